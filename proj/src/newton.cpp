#include "sigmak/newton.hpp"

#include "sigmak/errors.hpp"
#include "sigmak/linop.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace sigmak {

namespace {

using Vec = CompositeSystem::Vec;
using SpMat = CompositeSystem::SpMat;
using Trip = Eigen::Triplet<double>;

PointJet operator_plus(const Jet2& b, const PointJet& d) {
    return {b.v + d.u, b.d1 + d.ut, b.d2 + d.up, b.d11 + d.utt, b.d12 + d.utp, b.d22 + d.upp};
}

int reflect(int j, int np) {
    if (j < 0) return -j;
    if (j > np - 1) return 2 * (np - 1) - j;
    return j;
}

// Lagrange weights of the four nodes x0 + (k + off) h, k = 0..3, at x.
std::array<double, 4> lagrange4(double x, double x0, double h, int off) {
    std::array<double, 4> w{};
    double nodes[4];
    for (int k = 0; k < 4; ++k) nodes[k] = x0 + (k + off) * h;
    for (int k = 0; k < 4; ++k) {
        double p = 1;
        for (int m = 0; m < 4; ++m)
            if (m != k) p *= (x - nodes[m]) / (nodes[k] - nodes[m]);
        w[k] = p;
    }
    return w;
}

// Polynomial in one variable s truncated above degree 8. sigma_k(B) has degree 2k in the jets, so for
// k <= 4 evaluating it on base + s d gives the increment N(base + d) - N(base) without cancellation.
struct SPoly {
    static constexpr int D = 8;
    std::array<double, D + 1> c{};
    SPoly() = default;
    SPoly(double x) { c[0] = x; }
    SPoly operator-() const {
        SPoly r;
        for (int i = 0; i <= D; ++i) r.c[i] = -c[i];
        return r;
    }
    friend SPoly operator+(const SPoly& a, const SPoly& b) {
        SPoly r;
        for (int i = 0; i <= D; ++i) r.c[i] = a.c[i] + b.c[i];
        return r;
    }
    friend SPoly operator-(const SPoly& a, const SPoly& b) { return a + (-b); }
    friend SPoly operator*(const SPoly& a, const SPoly& b) {
        SPoly r;
        for (int i = 0; i <= D; ++i)
            for (int j = 0; i + j <= D; ++j) r.c[i + j] += a.c[i] * b.c[j];
        return r;
    }
    friend SPoly operator*(double x, const SPoly& a) {
        SPoly r;
        for (int i = 0; i <= D; ++i) r.c[i] = x * a.c[i];
        return r;
    }
    friend SPoly operator*(const SPoly& a, double x) { return x * a; }
};

SPoly line(double b, double d) {
    SPoly p(b);
    p.c[1] = d;
    return p;
}

// N(base + d) - N(base) at one point, summed from the exact expansion in s.
double residual_increment(const PointJet& b, const PointJet& d, double psi, bool pole, const DimensionParams& P) {
    const PointJetT<SPoly> j{line(b.u, d.u),     line(b.ut, d.ut),   line(b.up, d.up),
                             line(b.utt, d.utt), line(b.utp, d.utp), line(b.upp, d.upp)};
    const SPoly s = sigma_k_block(b_block(j, psi, pole, P), P);
    double inc = 0;
    for (int m = SPoly::D; m >= 1; --m) inc += s.c[m];
    return inc - P.rhs_const * std::pow(b.u, P.p_exp) * std::expm1(P.p_exp * std::log1p(d.u / b.u));
}

}  // namespace

CompositeSystem::CompositeSystem(const GluedGeometry& geo, const GlobalNormSpec& spec) : geo_(&geo), spec_(spec) {
    check_weight_windows(geo.P, spec.delta, spec.gamma);
    np_ = geo.np;
    end_off_[0] = 0;
    end_off_[1] = geo.ends[0].Nr * np_;
    neck_off_ = end_off_[1] + geo.ends[1].Nr * np_;
    coeff_off_ = neck_off_ + geo.neck.N * np_;
    n_unknowns_ = coeff_off_ + 8;
    try {
        basis_ = std::make_unique<PsiBasis>(PsiBasis::discrete(geo.P.n, np_, 4));
    } catch (const Error&) {
        // Complex discrete spectrum: project with the zonal harmonics instead.
        basis_ = std::make_unique<PsiBasis>(PsiBasis::zonal(geo.P.n, np_, 4));
    }
    classify();
    build_pde_rows();
    build_interpolation();
    assemble_jacobian();
}

void CompositeSystem::classify() {
    const GluedGeometry& geo = *geo_;
    for (int e = 0; e < 2; ++e) {
        const EndData& E = geo.ends[e];
        auto& K = kind_[e];
        K.assign(std::size_t(E.Nr) * np_, NodeKind::Active);
        for (int i = 0; i < E.Nr; ++i) {
            for (int j = 0; j < np_; ++j) {
                NodeKind& k = K[std::size_t(i) * np_ + j];
                if (i == 0 || i == E.Nr - 1)
                    k = NodeKind::Dirichlet;
                else if (geo.end_abs_x(e, E.r(i), j * geo.hp()) < geo.cfg.hole_radius)
                    k = NodeKind::Hole;
            }
        }
        // Hole nodes inside the 3x3 stencil of an active node become interpolation (fringe) nodes.
        std::vector<NodeKind> out = K;
        for (int i = 1; i < E.Nr - 1; ++i) {
            for (int j = 0; j < np_; ++j) {
                if (K[std::size_t(i) * np_ + j] != NodeKind::Active) continue;
                for (int di = -1; di <= 1; ++di) {
                    for (int dj = -1; dj <= 1; ++dj) {
                        const std::size_t q = std::size_t(i + di) * np_ + reflect(j + dj, np_);
                        if (K[q] == NodeKind::Hole) out[q] = NodeKind::Fringe;
                    }
                }
            }
        }
        K = std::move(out);
    }
}

void CompositeSystem::build_pde_rows() {
    const GluedGeometry& geo = *geo_;
    const DimensionParams& P = geo.P;
    pde_row_.assign(n_unknowns_, 0);
    owned_row_.assign(n_unknowns_, 0);
    for (int e = 0; e < 2; ++e) {
        const EndData& E = geo.ends[e];
        for (int i = 1; i < E.Nr - 1; ++i) {
            const double r = E.r(i);
            const double scale = std::pow(E.orbit->eval(r).v, -P.p_exp);
            for (int j = 0; j < np_; ++j) {
                if (kind(e, i, j) != NodeKind::Active) continue;
                PdeRow row;
                row.row = end_index(e, i, j);
                row.chart = e;
                row.i = i;
                row.j = j;
                row.scale = scale;
                row.base = geo.end_base(e, r, j * geo.hp());
                pde_row_[row.row] = 1;
                owned_row_[row.row] = geo.end_abs_x(e, r, j * geo.hp()) >= 1.0;
                row.exact_base = owned_row_[row.row] && (std::abs(r) <= E.Rp - 1 || std::abs(r) >= E.Rp);
                pde_rows_.push_back(row);
            }
        }
    }
    for (int i = 1; i < geo.neck.N - 1; ++i) {
        const double t = geo.neck.t(i);
        for (int j = 0; j < np_; ++j) {
            PdeRow row;
            row.row = neck_index(i, j);
            row.chart = 2;
            row.i = i;
            row.j = j;
            row.scale = std::pow(geo.one_plus_c(t, j * geo.hp()).v, -0.5 * P.n);
            row.base = geo.neck_base(t, j * geo.hp());
            pde_rows_.push_back(row);
            pde_row_[row.row] = 1;
            owned_row_[row.row] = 1;
        }
    }
}

CompositeSystem::Interp CompositeSystem::make_interp(int row, int src_chart, double s, double psi, double scale) const {
    const GluedGeometry& geo = *geo_;
    double s0, h;
    int N;
    if (src_chart == 2) {
        s0 = geo.neck.t0;
        h = geo.neck.h;
        N = geo.neck.N;
    } else {
        const EndData& E = geo.ends[src_chart];
        s0 = -E.L;
        h = E.h;
        N = E.Nr;
    }
    const double hp = geo.hp();
    const int i0 = std::clamp(int(std::floor((s - s0) / h)) - 1, 0, N - 4);
    const int j0 = int(std::floor(psi / hp)) - 1;
    const auto wi = lagrange4(s, s0, h, i0);
    const auto wj = lagrange4(psi, 0.0, hp, j0);
    Interp it;
    it.row = row;
    it.scale = scale;
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            const int jj = reflect(j0 + b, np_);
            const int idx = src_chart == 2 ? neck_index(i0 + a, jj) : end_index(src_chart, i0 + a, jj);
            it.idx[a * 4 + b] = idx;
            it.w[a * 4 + b] = wi[a] * wj[b];
        }
    }
    return it;
}

void CompositeSystem::build_interpolation() {
    const GluedGeometry& geo = *geo_;
    for (int e = 0; e < 2; ++e) {
        const EndData& E = geo.ends[e];
        for (int i = 0; i < E.Nr; ++i) {
            for (int j = 0; j < np_; ++j) {
                if (kind(e, i, j) != NodeKind::Fringe) continue;
                const double r = E.r(i), psi = j * geo.hp();
                double t, pn;
                geo.end_to_neck(e, r, psi, t, pn);
                // dU_end = Lambda dU_neck at the same point.
                interps_.push_back(make_interp(end_index(e, i, j), 2, t, pn, geo.chart_factor(e, r, psi)));
            }
        }
    }
    for (int side = 0; side < 2; ++side) {
        const int i = side == 0 ? 0 : geo.neck.N - 1;
        for (int j = 0; j < np_; ++j) {
            double r, psi;
            geo.neck_to_end(side, geo.neck.t(i), j * geo.hp(), r, psi);
            interps_.push_back(make_interp(neck_index(i, j), side, r, psi, 1.0 / geo.chart_factor(side, r, psi)));
        }
    }
}

std::vector<Trip> CompositeSystem::linear_triplets(const Vec* U, const FamilyState* fam) const {
    const GluedGeometry& geo = *geo_;
    const DimensionParams& P = geo.P;
    std::vector<Trip> T;
    T.reserve(std::size_t(n_unknowns_) * 10);
    std::vector<char> done(n_unknowns_, 0);
    const double hp = geo.hp();
    for (const PdeRow& pr : pde_rows_) {
        const double h = pr.chart == 2 ? geo.neck.h : geo.ends[pr.chart].h;
        auto idx = [&](int i, int j) {
            j = reflect(j, np_);
            return pr.chart == 2 ? neck_index(i, j) : end_index(pr.chart, i, j);
        };
        const double psi = pr.j * hp;
        const bool pole = pr.j == 0 || pr.j == np_ - 1;
        Jet2 base = pr.base;
        if (fam && pr.chart < 2 && std::abs(geo.ends[pr.chart].r(pr.i)) >= geo.ends[pr.chart].Rp - 1)
            base = geo.end_base(pr.chart, geo.ends[pr.chart].r(pr.i), psi, fam);
        PointJet J{base.v, base.d1, base.d2, base.d11, base.d12, base.d22};
        if (U) J = operator_plus(base, fd_jet(*U, pr.chart, pr.i, pr.j));
        const LinCoeffs lc = linearization_point(J, psi, pole, P);
        const double s = pr.scale;
        const int i = pr.i, j = pr.j;
        auto add = [&](int ii, int jj, double v) { T.emplace_back(pr.row, idx(ii, jj), s * v); };
        add(i, j, lc.c[0]);
        add(i + 1, j, lc.c[1] / (2 * h));
        add(i - 1, j, -lc.c[1] / (2 * h));
        add(i + 1, j, lc.c[3] / (h * h));
        add(i - 1, j, lc.c[3] / (h * h));
        add(i, j, -2 * lc.c[3] / (h * h));
        add(i, j + 1, lc.c[5] / (hp * hp));
        add(i, j - 1, lc.c[5] / (hp * hp));
        add(i, j, -2 * lc.c[5] / (hp * hp));
        if (!pole) {
            add(i, j + 1, lc.c[2] / (2 * hp));
            add(i, j - 1, -lc.c[2] / (2 * hp));
            const double x = lc.c[4] / (4 * h * hp);
            add(i + 1, j + 1, x);
            add(i + 1, j - 1, -x);
            add(i - 1, j + 1, -x);
            add(i - 1, j - 1, x);
        }
        if (!U && pr.chart < 2) {
            const EndData& E = geo.ends[pr.chart];
            const double r = E.r(i);
            if (std::abs(r) >= E.Rp - 1) {
                const int side = r > 0 ? 0 : 1;
                for (int jj = 0; jj < 2; ++jj) {
                    const Jet2 D = geo.deficiency_jet(pr.chart, side, jj, r, psi);
                    const double val =
                        lc.c[0] * D.v + lc.c[1] * D.d1 + lc.c[2] * D.d2 + lc.c[3] * D.d11 + lc.c[4] * D.d12 + lc.c[5] * D.d22;
                    if (val != 0) T.emplace_back(pr.row, coeff_index(4 * pr.chart + 2 * side + jj), s * val);
                }
            }
        }
        done[pr.row] = 1;
    }
    for (const Interp& it : interps_) {
        T.emplace_back(it.row, it.row, 1.0);
        for (int q = 0; q < 16; ++q) T.emplace_back(it.row, it.idx[q], -it.scale * it.w[q]);
        done[it.row] = 1;
    }
    // Projections of psi-modes 0 and 1 at the second-to-last rows: with dU = 0 on the last rows this is
    // zero Cauchy data for the low modes, the decaying condition of the low bands.
    std::vector<std::vector<double>> dual(2, std::vector<double>(np_));
    {
        std::vector<double> unit(np_, 0.0);
        for (int j = 0; j < np_; ++j) {
            unit[j] = 1.0;
            const auto c = basis_->project(unit.data());
            dual[0][j] = c[0];
            dual[1][j] = c[1];
            unit[j] = 0.0;
        }
    }
    for (int e = 0; e < 2; ++e) {
        const EndData& E = geo.ends[e];
        for (int side = 0; side < 2; ++side) {
            const int i = side == 0 ? E.Nr - 2 : 1;
            for (int m = 0; m < 2; ++m) {
                const int row = coeff_index(4 * e + 2 * side + m);
                for (int j = 0; j < np_; ++j) T.emplace_back(row, end_index(e, i, j), dual[m][j]);
                done[row] = 1;
            }
        }
    }
    for (int row = 0; row < n_unknowns_; ++row)
        if (!done[row]) T.emplace_back(row, row, 1.0);  // Dirichlet rows at +-L and hole nodes
    return T;
}

void CompositeSystem::assemble_jacobian() {
    const std::vector<Trip> T = linear_triplets(nullptr, nullptr);
    J0_.resize(n_unknowns_, n_unknowns_);
    J0_.setFromTriplets(T.begin(), T.end());
    J0_.makeCompressed();
    lu_ = std::make_unique<Eigen::SparseLU<SpMat>>();
    lu_->analyzePattern(J0_);
    lu_->factorize(J0_);
    if (lu_->info() != Eigen::Success)
        throw construction_error("the linearized operator on M_eps is singular at this epsilon: " + lu_->lastErrorMessage());
}

SpMat CompositeSystem::jacobian_at(const Vec& U) const {
    const FamilyState fam = family(U);
    const bool any = fam.coeffs.norm() != 0;
    std::vector<Trip> T = linear_triplets(&U, any ? &fam : nullptr);
    // The family is nonlinear in its parameters; its columns are taken by central differences.
    for (int k = 0; k < 8; ++k) {
        const double h = 1e-6 * std::max(1.0, std::abs(U[coeff_index(k)]));
        Vec Up = U, Um = U;
        Up[coeff_index(k)] += h;
        Um[coeff_index(k)] -= h;
        const Vec col = (residual(Up) - residual(Um)) / (2 * h);
        for (const PdeRow& pr : pde_rows_)
            if (col[pr.row] != 0) T.emplace_back(pr.row, coeff_index(k), col[pr.row]);
    }
    SpMat J(n_unknowns_, n_unknowns_);
    J.setFromTriplets(T.begin(), T.end());
    J.makeCompressed();
    return J;
}

const SpMat& CompositeSystem::jacobian() const { return J0_; }

Vec CompositeSystem::solve(const Vec& b) const {
    Vec x = lu_->solve(b);
    if (lu_->info() != Eigen::Success) throw construction_error("linear solve on M_eps failed");
    return x;
}

PointJet CompositeSystem::fd_jet(const Vec& U, int chart, int i, int j) const {
    const GluedGeometry& geo = *geo_;
    const double h = chart == 2 ? geo.neck.h : geo.ends[chart].h;
    const double hp = geo.hp();
    auto at = [&](int ii, int jj) {
        jj = reflect(jj, np_);
        return U[chart == 2 ? neck_index(ii, jj) : end_index(chart, ii, jj)];
    };
    PointJet J;
    J.u = at(i, j);
    J.ut = (at(i + 1, j) - at(i - 1, j)) / (2 * h);
    J.utt = (at(i + 1, j) - 2 * J.u + at(i - 1, j)) / (h * h);
    J.upp = (at(i, j + 1) - 2 * J.u + at(i, j - 1)) / (hp * hp);
    if (j != 0 && j != np_ - 1) {
        J.up = (at(i, j + 1) - at(i, j - 1)) / (2 * hp);
        J.utp = (at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1) + at(i - 1, j - 1)) / (4 * h * hp);
    }
    return J;
}

DeficiencyCoeffs CompositeSystem::coefficients(const Vec& U) const {
    DeficiencyCoeffs d = DeficiencyCoeffs::zeros(geo_->P.n);
    std::vector<double> x(8);
    for (int k = 0; k < 8; ++k) x[k] = U[coeff_index(k)];
    d.set_axial(x);
    return d;
}

FamilyState CompositeSystem::family(const Vec& U) const {
    FamilyState f;
    f.coeffs = coefficients(U);
    const double etas[2] = {geo_->cfg.eta1, geo_->cfg.eta2};
    for (int e = 0; e < 2; ++e) {
        const double b0 = f.coeffs.minus[e][0];
        if (b0 == 0) continue;
        auto& cache = shifted_cache_[e];
        if (!cache.second || cache.first != b0) {
            const double eta = etas[e] + b0;
            if (!(eta > 0 && eta < geo_->P.eta_sup()))
                throw divergence_error("neck-size parameter left its admissible range (0, eta_sup) during the iteration");
            cache = {b0, family_shift(*geo_, e, b0)};
        }
        f.shifted[e] = cache.second;
    }
    return f;
}

Vec CompositeSystem::residual(const Vec& U) const {
    const GluedGeometry& geo = *geo_;
    const DimensionParams& P = geo.P;
    Vec F = J0_ * U;  // exact on the linear rows
    const FamilyState fam = family(U);
    const bool any = fam.coeffs.norm() != 0;
    for (const PdeRow& pr : pde_rows_) {
        Jet2 base = pr.base;
        const double psi = pr.j * geo.hp();
        if (any && pr.chart < 2) {
            const EndData& E = geo.ends[pr.chart];
            const double r = E.r(pr.i);
            if (std::abs(r) >= E.Rp - 1) base = geo.end_base(pr.chart, r, psi, &fam);
        }
        const bool pole = pr.j == 0 || pr.j == np_ - 1;
        const PointJet d = fd_jet(U, pr.chart, pr.i, pr.j);
        if (2 * P.k > SPoly::D) {
            F[pr.row] = pr.scale * residual_point(operator_plus(base, d), psi, pole, P);
            continue;
        }
        // Outside the balls and the cutoff annuli the base solves the equation exactly (a Delaunay
        // solution or a conformal image of one), so only the increment is evaluated there. This keeps
        // the O(1) round-off of N(base) out of the weighted norm near r = +-L.
        const PointJet B{base.v, base.d1, base.d2, base.d11, base.d12, base.d22};
        const double n0 = pr.exact_base ? 0.0 : residual_point(B, psi, pole, P);
        F[pr.row] = pr.scale * (n0 + residual_increment(B, d, psi, pole, P));
    }
    return F;
}

Vec CompositeSystem::residual_magnitude(const Vec& U) const {
    const GluedGeometry& geo = *geo_;
    const DimensionParams& P = geo.P;
    Vec M = Vec::Zero(n_unknowns_);
    const FamilyState fam = family(U);
    const bool any = fam.coeffs.norm() != 0;
    for (const PdeRow& pr : pde_rows_) {
        Jet2 base = pr.base;
        const double psi = pr.j * geo.hp();
        if (any && pr.chart < 2 && std::abs(geo.ends[pr.chart].r(pr.i)) >= geo.ends[pr.chart].Rp - 1)
            base = geo.end_base(pr.chart, geo.ends[pr.chart].r(pr.i), psi, &fam);
        const PointJet J = operator_plus(base, fd_jet(U, pr.chart, pr.i, pr.j));
        // sigma_k(B) itself cancels on the nearly flat neck; bound its terms by binom(n,k) |B|^k instead.
        const BBlock<double> b = b_block(J, psi, pr.j == 0 || pr.j == np_ - 1, P);
        const double fro = std::sqrt(b.tt * b.tt + b.tp * b.tp + b.pt * b.pt + b.pp * b.pp + (P.n - 2) * b.mu * b.mu);
        M[pr.row] = pr.scale * (binomial(P.n, P.k) * std::pow(fro, P.k) + P.rhs_const * std::pow(J.u, P.p_exp));
    }
    return M;
}

double CompositeSystem::weight_of_row(int row) const {
    const GluedGeometry& geo = *geo_;
    if (row >= neck_off_) {
        const int i = (row - neck_off_) / np_;
        return spec_.neck(geo.epsilon, spec_.gamma - (geo.P.n - 2 * geo.P.k)).weight(geo.neck.t(i));
    }
    const int e = row >= end_off_[1] ? 1 : 0;
    const int i = (row - end_off_[e]) / np_;
    return spec_.end().weight(geo.ends[e].r(i));
}

double CompositeSystem::f_norm(const Vec& F) const {
    double m = 0;
    for (int row = 0; row < coeff_off_; ++row)
        if (owned_row_[row]) m = std::max(m, std::abs(F[row]) * weight_of_row(row));
    return m;
}

CompositeField CompositeSystem::corrections(const Vec& U) const {
    const GluedGeometry& geo = *geo_;
    CompositeField f;
    for (int e = 0; e < 2; ++e) {
        const EndData& E = geo.ends[e];
        f.end[e] = AxiSymField(E.Nr, np_, -E.L, E.h);
        for (int i = 0; i < E.Nr; ++i)
            for (int j = 0; j < np_; ++j) f.end[e](i, j) = U[end_index(e, i, j)];
    }
    f.neck = AxiSymField(geo.neck.N, np_, geo.neck.t0, geo.neck.h);
    for (int i = 0; i < geo.neck.N; ++i)
        for (int j = 0; j < np_; ++j) f.neck(i, j) = U[neck_index(i, j)];
    return f;
}

double CompositeSystem::w_norm(const Vec& U) const {
    const GluedGeometry& geo = *geo_;
    CompositeField w = corrections(U);
    double m = 0;
    for (int e = 0; e < 2; ++e) {
        const EndData& E = geo.ends[e];
        for (int i = 0; i < E.Nr; ++i) {
            const double v = E.orbit->eval(E.r(i)).v;
            for (int j = 0; j < np_; ++j) w.end[e](i, j) /= v;
        }
        m = std::max(m, weighted_norm(w.end[e], spec_.end(), 2, end_owned_mask(geo, e)));
    }
    for (int i = 0; i < geo.neck.N; ++i)
        for (int j = 0; j < np_; ++j) w.neck(i, j) /= std::pow(geo.one_plus_c(geo.neck.t(i), j * geo.hp()).v, 0.5 * geo.P.a_exp);
    m = std::max(m, weighted_norm(w.neck, spec_.neck(geo.epsilon, spec_.gamma - geo.P.a_exp), 2));
    return m + coefficients(U).norm();
}

Vec CompositeSystem::rhs_from(const CompositeField& f) const {
    Vec b = Vec::Zero(n_unknowns_);
    for (const PdeRow& pr : pde_rows_) b[pr.row] = pr.chart == 2 ? f.neck(pr.i, pr.j) : f.end[pr.chart](pr.i, pr.j);
    return b;
}

CompositeField CompositeSystem::total_factor(const Vec& U) const {
    const GluedGeometry& geo = *geo_;
    const FamilyState fam = family(U);
    CompositeField f = corrections(U);
    for (int e = 0; e < 2; ++e) {
        const EndData& E = geo.ends[e];
        for (int i = 0; i < E.Nr; ++i) {
            for (int j = 0; j < np_; ++j) {
                if (kind(e, i, j) == NodeKind::Hole) {
                    f.end[e](i, j) = 0;
                    continue;
                }
                f.end[e](i, j) += geo.end_base(e, E.r(i), j * geo.hp(), &fam).v;
            }
        }
    }
    for (int i = 0; i < geo.neck.N; ++i)
        for (int j = 0; j < np_; ++j) f.neck(i, j) += geo.neck_base(geo.neck.t(i), j * geo.hp()).v;
    return f;
}

Vec CompositeSystem::quadratic_remainder(const Vec& U) const {
    return residual(U) - residual(Vec::Zero(n_unknowns_)) - J0_ * U;
}

std::vector<int> CompositeSystem::interface_unknowns() const {
    std::vector<int> out;
    for (int e = 0; e < 2; ++e) {
        const EndData& E = geo_->ends[e];
        for (int side = 0; side < 2; ++side) {
            const int i = int(std::lround((E.L + (side == 0 ? E.R : -E.R)) / E.h));
            for (int j = 0; j < np_; ++j) out.push_back(end_index(e, i, j));
        }
    }
    return out;
}

int CompositeSystem::exterior_piece(int idx) const {
    if (idx >= coeff_off_) {
        const int k = idx - coeff_off_;
        return 2 * (k / 4) + (k % 4) / 2;
    }
    if (idx >= neck_off_) return -1;
    const int e = idx >= end_off_[1] ? 1 : 0;
    const EndData& E = geo_->ends[e];
    const int i = (idx - end_off_[e]) / np_;
    const int iR = int(std::lround((E.L + E.R) / E.h)), iL = int(std::lround((E.L - E.R) / E.h));
    if (i > iR) return 2 * e;
    if (i < iL) return 2 * e + 1;
    return -1;
}

std::vector<int> CompositeSystem::exterior_unknowns() const {
    std::vector<int> out;
    for (int idx = 0; idx < n_unknowns_; ++idx)
        if (exterior_piece(idx) >= 0) out.push_back(idx);
    return out;
}

std::vector<int> CompositeSystem::core_unknowns() const {
    std::vector<int> g = interface_unknowns();
    std::vector<char> mark(n_unknowns_, 0);
    for (int i : g) mark[i] = 1;
    std::vector<int> out;
    for (int idx = 0; idx < n_unknowns_; ++idx)
        if (!mark[idx] && exterior_piece(idx) < 0) out.push_back(idx);
    return out;
}

void check_coefficient_cap(const CompositeSystem& sys, const DeficiencyCoeffs& c, double cap) {
    const GluedGeometry& geo = sys.geometry();
    for (int e = 0; e < 2; ++e) {
        const double tail = std::exp(-(geo.ends[e].Rp - 1));
        const double size[4] = {std::abs(c.plus[e][0]), std::abs(c.plus[e][1]) * tail, std::abs(c.minus[e][0]),
                                std::abs(c.minus[e][1]) * tail};
        for (int q = 0; q < 4; ++q) {
            if (size[q] > cap) {
                std::ostringstream m;
                m << "deficiency parameter (end " << e + 1 << (q < 2 ? ", +" : ", -") << ", j = " << q % 2
                  << ") moves the family by " << size[q] << ", beyond the cap " << cap << "; epsilon too large";
                throw divergence_error(m.str());
            }
        }
    }
}

CompositeField family_variation(const CompositeSystem& sys, const DeficiencyCoeffs& coeffs, double cap) {
    Vec U = Vec::Zero(sys.size());
    const auto ax = coeffs.axial();
    for (int e = 0; e < 2; ++e)
        for (std::size_t j = 2; j < coeffs.plus[e].size(); ++j)
            if (coeffs.plus[e][j] != 0 || coeffs.minus[e][j] != 0)
                throw argument_error("bending parameters beyond the axial harmonic are not supported on axisymmetric grids");
    check_coefficient_cap(sys, coeffs, cap);
    for (int k = 0; k < 8; ++k) U[sys.coeff_index(k)] = ax[k];
    return sys.total_factor(U);
}

LinearSolution global_linear_solve(const CompositeSystem& sys, const CompositeField& f) {
    LinearSolution s;
    s.U = sys.solve(sys.rhs_from(f));
    s.w_hat = sys.corrections(s.U);
    s.coeffs = sys.coefficients(s.U);
    return s;
}

namespace {

SpMat extract(const SpMat& A, const std::vector<int>& rows, const std::vector<int>& cols, int n) {
    std::vector<int> rmap(n, -1), cmap(n, -1);
    for (std::size_t i = 0; i < rows.size(); ++i) rmap[rows[i]] = int(i);
    for (std::size_t i = 0; i < cols.size(); ++i) cmap[cols[i]] = int(i);
    std::vector<Trip> T;
    for (int c = 0; c < A.outerSize(); ++c)
        for (SpMat::InnerIterator it(A, c); it; ++it)
            if (rmap[it.row()] >= 0 && cmap[it.col()] >= 0) T.emplace_back(rmap[it.row()], cmap[it.col()], it.value());
    SpMat B(int(rows.size()), int(cols.size()));
    B.setFromTriplets(T.begin(), T.end());
    B.makeCompressed();
    return B;
}

Eigen::VectorXd gather(const Vec& b, const std::vector<int>& idx) {
    Eigen::VectorXd out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out[i] = b[idx[i]];
    return out;
}

}  // namespace

DtnReport dtn_maps(const CompositeSystem& sys, const Vec& b) {
    const int n = sys.size();
    const SpMat& A = sys.jacobian();
    const std::vector<int> G = sys.interface_unknowns(), E = sys.exterior_unknowns(), C = sys.core_unknowns();
    const SpMat Agg = extract(A, G, G, n), Age = extract(A, G, E, n), Agc = extract(A, G, C, n);
    const SpMat Aeg = extract(A, E, G, n), Aee = extract(A, E, E, n);
    const SpMat Acg = extract(A, C, G, n), Acc = extract(A, C, C, n);
    Eigen::SparseLU<SpMat> lue, luc;
    lue.compute(Aee);
    luc.compute(Acc);
    if (lue.info() != Eigen::Success || luc.info() != Eigen::Success)
        throw construction_error("interface decomposition: a subdomain problem is singular");
    const int m = int(G.size());
    DtnReport rep;
    rep.A_gg = Eigen::MatrixXd(Agg);
    rep.T = Eigen::MatrixXd::Zero(m, m);
    rep.S = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < m; ++k) {
        const Eigen::VectorXd ce = Eigen::VectorXd(Aeg.col(k));
        const Eigen::VectorXd cc = Eigen::VectorXd(Acg.col(k));
        rep.T.col(k) = -(Age * Eigen::VectorXd(lue.solve(ce)));
        rep.S.col(k) = Agc * Eigen::VectorXd(luc.solve(cc));
    }
    const int np = sys.geometry().np;
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < m; ++k)
            if (i / np != k / np) rep.T_offblock = std::max(rep.T_offblock, std::abs(rep.T(i, k)));
    const Eigen::MatrixXd M = rep.A_gg + rep.T - rep.S;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& sv = svd.singularValues();
    rep.condition = sv[0] / sv[sv.size() - 1];
    if (!(rep.condition < 1e14)) throw construction_error("interface operator is near singular; epsilon too large");
    const Eigen::VectorXd be = gather(b, E), bc = gather(b, C), bg = gather(b, G);
    const Eigen::VectorXd ye = lue.solve(be), yc = luc.solve(bc);
    const Eigen::VectorXd g = bg - Age * ye - Agc * yc;
    const Eigen::VectorXd xg = M.fullPivLu().solve(g);
    const Eigen::VectorXd xe = lue.solve(be - Aeg * xg), xc = luc.solve(bc - Acg * xg);
    rep.x = Vec::Zero(n);
    for (std::size_t i = 0; i < G.size(); ++i) rep.x[G[i]] = xg[i];
    for (std::size_t i = 0; i < E.size(); ++i) rep.x[E[i]] = xe[i];
    for (std::size_t i = 0; i < C.size(); ++i) rep.x[C[i]] = xc[i];
    return rep;
}

Eigen::MatrixXd project_modes(const CompositeSystem& sys, const Eigen::MatrixXd& S, int M_max) {
    const PsiBasis& B = sys.basis();
    const int np = B.np(), nb = int(S.rows()) / np, M = M_max + 1;
    if (M > B.modes()) throw argument_error("mode band exceeds the basis");
    Eigen::MatrixXd V(np, M), D(M, np);
    std::vector<double> unit(np, 0.0);
    for (int j = 0; j < np; ++j) {
        unit[j] = 1.0;
        const auto c = B.project(unit.data());
        for (int m = 0; m < M; ++m) D(m, j) = c[m];
        unit[j] = 0.0;
        for (int m = 0; m < M; ++m) V(j, m) = B.value(m, j);
    }
    Eigen::MatrixXd out(nb * M, nb * M);
    for (int a = 0; a < nb; ++a)
        for (int b = 0; b < nb; ++b) out.block(a * M, b * M, M, M) = D * S.block(a * np, b * np, np, np) * V;
    return out;
}

SolutionBundle newton_solve(const CompositeSystem& sys, const NewtonControl& ctl) {
    const GluedGeometry& geo = sys.geometry();
    const DimensionParams& P = geo.P;
    SolutionBundle out;
    Vec U = Vec::Zero(sys.size());
    Vec F = sys.residual(U);
    double rn = sys.f_norm(F);
    out.residual_norms.push_back(rn);
    int growth = 0;
    double prev_step = 0;
    while (rn > ctl.tol) {
        if (out.iterations >= ctl.max_iter) {
            std::ostringstream m;
            m << "Newton iteration did not reach tol = " << ctl.tol << " in " << ctl.max_iter << " steps (residual " << rn
              << ")";
            throw divergence_error(m.str());
        }
        Vec d;
        if (ctl.relinearize) {
            Eigen::SparseLU<SpMat> lu(sys.jacobian_at(U));
            if (lu.info() != Eigen::Success) throw construction_error("linearization at the iterate is singular");
            d = lu.solve(-F);
        } else {
            d = sys.solve(-F);
        }
        U += d;
        ++out.iterations;
        check_coefficient_cap(sys, sys.coefficients(U), ctl.coeff_cap);
        const double step = sys.w_norm(d);
        out.step_norms.push_back(step);
        out.iterate_norms.push_back(sys.w_norm(U));
        if (prev_step > 0) out.contraction.push_back(step / prev_step);
        prev_step = step;
        F = sys.residual(U);
        const double rn_new = sys.f_norm(F);
        if (!std::isfinite(rn_new)) throw divergence_error("nonlinear residual is not finite; epsilon too large");
        growth = rn_new > rn ? growth + 1 : 0;
        if (growth >= 3) throw divergence_error("residual grew over three consecutive iterates; epsilon too large");
        rn = rn_new;
        out.residual_norms.push_back(rn);
    }
    out.U = U;
    out.final_residual = rn;
    out.w_hat = sys.corrections(U);
    out.coeffs = sys.coefficients(U);
    // Positivity and the pointwise curvature check.
    const CompositeField tot = sys.total_factor(U);
    out.min_factor = std::numeric_limits<double>::infinity();
    for (int e = 0; e < 2; ++e)
        for (int i = 0; i < tot.end[e].nt(); ++i)
            for (int j = 0; j < tot.end[e].np(); ++j)
                if (sys.kind(e, i, j) != NodeKind::Hole) out.min_factor = std::min(out.min_factor, tot.end[e](i, j));
    for (double x : tot.neck.data()) out.min_factor = std::min(out.min_factor, x);
    if (!(out.min_factor > 0)) throw construction_error("final conformal factor is not positive");
    out.final_residual_field = sys.corrections(F);
    // sigma_k(g^{-1}A) - target = N / (u^p a^k) with u relative to the chart background. On the ends
    // u is close to 1 and this is well conditioned; in the neck u^p is tiny, so there only the
    // relative residual |N| / (binom(n,k) |B|^k + c u^p) is meaningful.
    const double ak = std::pow(P.a_exp, P.k);
    for (int e = 0; e < 2; ++e) {
        const EndData& E = geo.ends[e];
        for (int i = 1; i < E.Nr - 1; ++i) {
            const double v = E.orbit->eval(E.r(i)).v;
            for (int j = 0; j < geo.np; ++j) {
                const int row = sys.end_index(e, i, j);
                if (!sys.is_owned_row(row)) continue;
                const double u = tot.end[e](i, j) / v;
                out.sigma_defect = std::max(out.sigma_defect, std::abs(F[row]) / (std::pow(v, -P.p_exp) * std::pow(u, P.p_exp) * ak));
            }
        }
    }
    const Vec mag = sys.residual_magnitude(U);
    for (int row = 0; row < sys.size(); ++row)
        if (sys.is_owned_row(row) && mag[row] > 0) out.relative_residual = std::max(out.relative_residual, std::abs(F[row]) / mag[row]);
    return out;
}

std::vector<Vec> probe_rhs(const CompositeSystem& sys) {
    const GluedGeometry& geo = sys.geometry();
    std::vector<Vec> out;
    Vec F0 = sys.residual(Vec::Zero(sys.size()));
    for (int row = 0; row < sys.size(); ++row)
        if (!sys.is_pde_row(row)) F0[row] = 0;
    out.push_back(F0);
    // Bumps away from the overlap: on end 1 far from the puncture, near the interface of end 2, and in
    // the middle of the neck.
    auto end_bump = [&](int e, double rc) {
        CompositeField f = sys.corrections(Vec::Zero(sys.size()));
        const EndData& E = geo.ends[e];
        for (int i = 0; i < E.Nr; ++i) {
            const double s = E.r(i) - rc;
            if (std::abs(s) > 3) continue;
            for (int j = 0; j < geo.np; ++j) {
                const double psi = j * geo.hp();
                if (geo.end_abs_x(e, E.r(i), psi) < 1.2) continue;
                f.end[e](i, j) = std::exp(-2 * s * s) * (1 + 0.5 * std::cos(psi));
            }
        }
        return sys.rhs_from(f);
    };
    out.push_back(end_bump(0, -2.0));
    out.push_back(end_bump(1, geo.ends[1].R));
    CompositeField f = sys.corrections(Vec::Zero(sys.size()));
    for (int i = 0; i < geo.neck.N; ++i) {
        const double t = geo.neck.t(i);
        if (std::abs(t) > 3) continue;
        for (int j = 0; j < geo.np; ++j) f.neck(i, j) = std::exp(-2 * t * t) * (1 + 0.5 * std::cos(j * geo.hp()));
    }
    out.push_back(sys.rhs_from(f));
    return out;
}

MeasuredConstants measure_constants(const CompositeSystem& sys) {
    const GluedGeometry& geo = sys.geometry();
    const DimensionParams& P = geo.P;
    MeasuredConstants mc;
    const std::vector<Vec> probes = probe_rhs(sys);
    mc.residual_norm = sys.f_norm(probes[0]);
    mc.A = mc.residual_norm / std::pow(geo.epsilon, sys.spec().gamma * (P.n - 2 * P.k) / P.n);
    for (const Vec& f : probes) {
        const double fn = sys.f_norm(f);
        if (fn == 0) continue;
        mc.L = std::max(mc.L, sys.w_norm(sys.solve(f)) / fn);
    }
    mc.C = mc.L;
    mc.coercivity_margin = std::min(coercivity_margin(*geo.ends[0].orbit), coercivity_margin(*geo.ends[1].orbit));
    return mc;
}

}  // namespace sigmak
