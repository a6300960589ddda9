#include "sigmak/cylsolve.hpp"

#include "sigmak/errors.hpp"
#include "sigmak/linop.hpp"

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/gegenbauer.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace sigmak {

std::vector<double> solve_tridiagonal(const std::vector<double>& sub, const std::vector<double>& diag,
                                      const std::vector<double>& sup, std::vector<double> rhs) {
    const std::size_t N = diag.size();
    if (sub.size() != N || sup.size() != N || rhs.size() != N) throw argument_error("tridiagonal: size mismatch");
    std::vector<double> c(N);
    double scale = 0;
    for (double d : diag) scale = std::max(scale, std::abs(d));
    double piv = diag[0];
    if (std::abs(piv) <= 1e-14 * scale) throw accuracy_error("tridiagonal: vanishing pivot at row 0");
    c[0] = sup[0] / piv;
    rhs[0] /= piv;
    for (std::size_t i = 1; i < N; ++i) {
        piv = diag[i] - sub[i] * c[i - 1];
        if (std::abs(piv) <= 1e-14 * scale)
            throw accuracy_error("tridiagonal: vanishing pivot at row " + std::to_string(i));
        c[i] = sup[i] / piv;
        rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / piv;
    }
    for (std::size_t i = N - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
    return rhs;
}

// ---------------------------------------------------------------------------------------------
// Angular bases

double zonal_harmonic(int m, int n, double psi) {
    if (n < 3) throw argument_error("zonal harmonics need n >= 3");
    const double al = 0.5 * (n - 2);
    const double area = 2 * std::pow(M_PI, 0.5 * (n - 1)) / boost::math::tgamma(0.5 * (n - 1));  // |S^{n-2}|
    const double lg = std::log(M_PI) + (1 - 2 * al) * std::log(2.0) + boost::math::lgamma(m + 2 * al) -
                      boost::math::lgamma(m + 1.0) - std::log(m + al) - 2 * boost::math::lgamma(al);
    const double norm2 = area * std::exp(lg);
    return boost::math::gegenbauer(unsigned(m), al, std::cos(psi)) / std::sqrt(norm2);
}

std::vector<double> discrete_sphere_laplacian(int n, int np) {
    if (np < 5) throw grid_error("sphere Laplacian needs at least 5 psi-nodes");
    const double h = M_PI / (np - 1);
    std::vector<double> A(std::size_t(np) * np, 0.0);
    auto at = [&](int i, int j) -> double& { return A[std::size_t(i) * np + j]; };
    at(0, 0) = -2.0 * (n - 1) / (h * h);
    at(0, 1) = 2.0 * (n - 1) / (h * h);
    at(np - 1, np - 1) = -2.0 * (n - 1) / (h * h);
    at(np - 1, np - 2) = 2.0 * (n - 1) / (h * h);
    for (int j = 1; j < np - 1; ++j) {
        const double c = std::cos(j * h) / std::sin(j * h);
        at(j, j) = -2.0 / (h * h);
        at(j, j + 1) = 1.0 / (h * h) + (n - 2) * c / (2 * h);
        at(j, j - 1) = 1.0 / (h * h) - (n - 2) * c / (2 * h);
    }
    return A;
}

PsiBasis PsiBasis::zonal(int n, int np, int M_max) {
    if (M_max < 0 || M_max + 1 > np) throw argument_error("band limit must satisfy 0 <= M_max < np");
    PsiBasis b;
    b.kind_ = Kind::Zonal;
    b.n_ = n;
    b.np_ = np;
    b.M_ = M_max;
    const double h = M_PI / (np - 1);
    Eigen::MatrixXd V(np, M_max + 1);
    Eigen::VectorXd w(np);
    for (int j = 0; j < np; ++j) {
        // Simpson-like weights are not needed: the least-squares fit below is exact on the band.
        w(j) = std::max(std::pow(std::sin(j * h), n - 2), 1e-3 * std::pow(h, n - 2));
        for (int m = 0; m <= M_max; ++m) V(j, m) = zonal_harmonic(m, n, j * h);
    }
    for (int m = 0; m <= M_max; ++m) {
        b.lambda_.push_back(sphere_eigenvalue(m, n));
        for (int j = 0; j < np; ++j) b.vals_.push_back(V(j, m));
    }
    const Eigen::MatrixXd G = V.transpose() * w.asDiagonal() * V;
    const Eigen::MatrixXd D = G.ldlt().solve(V.transpose() * w.asDiagonal());
    for (int m = 0; m <= M_max; ++m)
        for (int j = 0; j < np; ++j) b.dual_.push_back(D(m, j));
    return b;
}

PsiBasis PsiBasis::discrete(int n, int np, int M_max) {
    if (M_max < 0 || M_max + 1 > np) throw argument_error("band limit must satisfy 0 <= M_max < np");
    const std::vector<double> A = discrete_sphere_laplacian(n, np);
    Eigen::MatrixXd D(np, np);
    for (int i = 0; i < np; ++i)
        for (int j = 0; j < np; ++j) D(i, j) = A[std::size_t(i) * np + j];
    Eigen::EigenSolver<Eigen::MatrixXd> right(D), left(D.transpose());
    auto pick = [&](const Eigen::EigenSolver<Eigen::MatrixXd>& es) {
        std::vector<int> idx(np);
        for (int i = 0; i < np; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(),
                  [&](int x, int y) { return -es.eigenvalues()(x).real() < -es.eigenvalues()(y).real(); });
        return idx;
    };
    const std::vector<int> ir = pick(right), il = pick(left);
    PsiBasis b;
    b.kind_ = Kind::Discrete;
    b.n_ = n;
    b.np_ = np;
    b.M_ = M_max;
    std::vector<Eigen::VectorXd> R, L;
    for (int m = 0; m <= M_max; ++m) {
        const auto lr = right.eigenvalues()(ir[m]), ll = left.eigenvalues()(il[m]);
        const double scale = 1.0 + std::abs(lr);
        if (std::abs(lr.imag()) > 1e-9 * scale || std::abs(ll.imag()) > 1e-9 * scale ||
            std::abs(lr.real() - ll.real()) > 1e-8 * scale)
            throw grid_error("discrete sphere Laplacian has a complex or unmatched eigenvalue at mode " +
                             std::to_string(m) + "; use the zonal basis for n = " + std::to_string(n));
        Eigen::VectorXd r = right.eigenvectors().col(ir[m]).real();
        Eigen::VectorXd l = left.eigenvectors().col(il[m]).real();
        r *= zonal_harmonic(m, n, 0.0) / r(0);
        l /= l.dot(r);
        b.lambda_.push_back(-lr.real());
        R.push_back(r);
        L.push_back(l);
    }
    for (int m = 0; m <= M_max; ++m)
        for (int j = 0; j < np; ++j) b.vals_.push_back(R[m](j));
    for (int m = 0; m <= M_max; ++m)
        for (int j = 0; j < np; ++j) b.dual_.push_back(L[m](j));
    return b;
}

std::vector<double> PsiBasis::project(const double* row) const {
    std::vector<double> c(std::size_t(M_) + 1, 0.0);
    for (int m = 0; m <= M_; ++m) {
        double s = 0;
        for (int j = 0; j < np_; ++j) s += dual_[std::size_t(m) * np_ + j] * row[j];
        c[m] = s;
    }
    return c;
}

SpectralField SpectralField::zeros(const UniformGrid& g, const PsiBasis& b) {
    SpectralField f;
    f.grid = g;
    f.basis = &b;
    f.coeff.assign(std::size_t(b.modes()), std::vector<double>(std::size_t(g.N), 0.0));
    return f;
}

AxiSymField SpectralField::reconstruct() const {
    AxiSymField u(grid.N, basis->np(), grid.t0, grid.h);
    for (int i = 0; i < grid.N; ++i)
        for (int j = 0; j < basis->np(); ++j) {
            double s = 0;
            for (int m = 0; m < basis->modes(); ++m) s += coeff[m][i] * basis->value(m, j);
            u(i, j) = s;
        }
    return u;
}

SpectralField SpectralField::project(const AxiSymField& f, const PsiBasis& b) {
    if (f.np() != b.np()) throw grid_error("field and basis use different psi-grids");
    SpectralField s = zeros({f.t0(), f.ht(), f.nt()}, b);
    for (int i = 0; i < f.nt(); ++i) {
        const std::vector<double> c = b.project(&f.data()[std::size_t(i) * f.np()]);
        for (int m = 0; m < b.modes(); ++m) s.coeff[m][i] = c[m];
    }
    return s;
}

// ---------------------------------------------------------------------------------------------
// Weighted norms

namespace {

double log_cosh(double t) {
    const double a = std::abs(t);
    return a + std::log1p(std::exp(-2 * a)) - std::log(2.0);
}

double log_weight(const WeightedNormSpec& s, double t) {
    if (s.flavor == WeightedNormSpec::Flavor::End) return -s.delta * log_cosh(t);
    return s.gamma * (std::log(s.epsilon) + log_cosh(t));
}

double weighted(double logw, double x) {
    if (x == 0.0) return 0.0;
    return std::exp(logw + std::log(std::abs(x)));
}

// Components of nabla^j u in an orthonormal frame for the given order.
void frame_terms(const PointJet& J, double psi, bool pole, int n, int order, double out[3]) {
    out[0] = std::abs(J.u);
    out[1] = order >= 1 ? std::sqrt(J.ut * J.ut + J.up * J.up) : 0.0;
    if (order >= 2) {
        const double hom = pole ? J.upp : std::cos(psi) / std::sin(psi) * J.up;
        out[2] = std::sqrt(J.utt * J.utt + 2 * J.utp * J.utp + J.upp * J.upp + (n - 2) * hom * hom);
    } else {
        out[2] = 0.0;
    }
}

}  // namespace

double WeightedNormSpec::weight(double t) const { return std::exp(log_weight(*this, t)); }

void check_weight_windows(const DimensionParams& P, double delta, double gamma) {
    const double db = P.delta_bar();
    if (!(delta > 1.0 && delta < db))
        throw argument_error("delta = " + std::to_string(delta) + " outside the decay window (1, delta_bar) = (1, " +
                             std::to_string(db) + ")");
    const double gmax = double(P.n - 2 * P.k) / P.k;
    if (!(gamma > 0.0 && gamma < gmax))
        throw argument_error("gamma = " + std::to_string(gamma) + " outside the neck window (0, (n-2k)/k) = (0, " +
                             std::to_string(gmax) + ")");
}

double weighted_norm(const AxiSymField& u, const WeightedNormSpec& spec, int order, const std::vector<char>& mask) {
    if (order < 0 || order > 2) throw argument_error("weighted norm supports orders 0, 1, 2 only");
    if (!mask.empty() && mask.size() != u.data().size()) throw grid_error("norm mask does not match the field");
    double best = 0.0;
    const int nt = u.nt(), np = u.np();
    std::vector<double> top;  // top-order magnitude per node for the Holder term
    if (spec.holder) top.assign(std::size_t(nt) * np, 0.0);
    for (int i = 0; i < nt; ++i) {
        const double lw = log_weight(spec, u.t(i));
        for (int j = 0; j < np; ++j) {
            const std::size_t id = std::size_t(i) * np + j;
            if (!mask.empty() && !mask[id]) continue;
            double terms[3];
            const PointJet J = order == 0 ? PointJet{u(i, j)} : u.jet(i, j);
            frame_terms(J, u.psi(j), u.is_pole(j), spec.n, order, terms);
            best = std::max(best, weighted(lw, terms[0] + terms[1] + terms[2]));
            if (spec.holder) top[id] = terms[order];
        }
    }
    if (spec.holder) {
        double q = 0.0;
        for (int i = 0; i < nt; ++i)
            for (int j = 0; j < np; ++j) {
                const std::size_t id = std::size_t(i) * np + j;
                if (!mask.empty() && !mask[id]) continue;
                const double lw = log_weight(spec, u.t(i));
                if (i + 1 < nt && (mask.empty() || mask[id + np]))
                    q = std::max(q, weighted(lw, (top[id + np] - top[id]) / std::pow(u.ht(), spec.beta)));
                if (j + 1 < np && (mask.empty() || mask[id + 1]))
                    q = std::max(q, weighted(lw, (top[id + 1] - top[id]) / std::pow(u.hp(), spec.beta)));
            }
        best += q;
    }
    return best;
}

double weighted_norm(const SpectralField& u, const WeightedNormSpec& spec, int order) {
    return weighted_norm(u.reconstruct(), spec, order);
}

double weighted_norm(const UniformGrid& g, const std::vector<double>& z, const WeightedNormSpec& spec) {
    double best = 0.0;
    for (int i = 0; i < g.N && i < int(z.size()); ++i) best = std::max(best, weighted(log_weight(spec, g.t(i)), z[i]));
    return best;
}

// ---------------------------------------------------------------------------------------------
// Mode solvers

double mode_potential(const DelaunayOrbit& orbit, double lambda, double t) {
    const ConjugateCoefficients c = conjugate_coefficients(orbit.eval(t), orbit.params);
    return lambda * c.a + c.p;
}

double to_conjugate_solution(const DelaunayOrbit& orbit, double t, double w) {
    return conjugate_coefficients(orbit.eval(t), orbit.params).g * w;
}
double from_conjugate_solution(const DelaunayOrbit& orbit, double t, double z) {
    return z / conjugate_coefficients(orbit.eval(t), orbit.params).g;
}
double to_conjugate_rhs(const DelaunayOrbit& orbit, double t, double f) {
    return f / conjugate_coefficients(orbit.eval(t), orbit.params).pref;
}

namespace {

std::vector<double> dirichlet_array(const DelaunayOrbit& orbit, double lambda, const std::vector<double>& y,
                                    const UniformGrid& g, double zL, double zR) {
    const int N = g.N;
    if (N < 3) throw grid_error("mode grid needs at least 3 nodes");
    std::vector<double> a(N, 0.0), b(N, 1.0), c(N, 0.0), r(N, 0.0);
    const double ih2 = 1.0 / (g.h * g.h);
    r[0] = zL;
    r[N - 1] = zR;
    for (int i = 1; i < N - 1; ++i) {
        a[i] = ih2;
        c[i] = ih2;
        b[i] = -2 * ih2 - mode_potential(orbit, lambda, g.t(i));
        r[i] = y[i];
    }
    return solve_tridiagonal(a, b, c, r);
}

std::vector<double> sample(const ModeRhs& y, const UniformGrid& g) {
    std::vector<double> out(std::size_t(g.N));
    for (int i = 0; i < g.N; ++i) out[i] = y(g.t(i));
    return out;
}

double default_lambda(int band, double lambda, int n) { return std::isnan(lambda) ? sphere_eigenvalue(band, n) : lambda; }

// Relative weighted change between two solutions on the nodes of the shorter one.
double relative_change(const UniformGrid& g_old, const std::vector<double>& z_old, const std::vector<double>& z_new,
                       const WeightedNormSpec& spec) {
    std::vector<double> d(z_old.size());
    for (std::size_t i = 0; i < z_old.size(); ++i) d[i] = z_new[i] - z_old[i];
    const double nn = weighted_norm(g_old, z_new, spec);
    const double dn = weighted_norm(g_old, d, spec);
    return nn > 0 ? dn / nn : dn;
}

int nodes_for(double len, double h) { return int(std::lround(len / h)) + 1; }

// Backward Cauchy sweep with zero data at the last two nodes.
std::vector<double> backward_cauchy(const DelaunayOrbit& orbit, double lambda, const std::vector<double>& y,
                                    const UniformGrid& g) {
    const int N = g.N;
    std::vector<double> z(std::size_t(N), 0.0);
    const double h2 = g.h * g.h;
    for (int i = N - 2; i >= 1; --i) z[i - 1] = 2 * z[i] - z[i + 1] + h2 * (mode_potential(orbit, lambda, g.t(i)) * z[i] + y[i]);
    return z;
}

ModeSolution low_solve(int band, const ModeRhs& y, const DelaunayOrbit& orbit, double R, double h,
                       const StabilizationControl& sc, double boundary, double lambda,
                       const std::function<double(double)>& psi_profile) {
    const double lam = default_lambda(band, lambda, orbit.params.n);
    double len = sc.T_initial > 0 ? sc.T_initial : 4 * orbit.T;
    ModeSolution out;
    UniformGrid g_prev;
    std::vector<double> z_prev;
    for (int d = 0; d <= sc.max_doublings; ++d) {
        UniformGrid g{R, h, nodes_for(len, h)};
        std::vector<double> z = backward_cauchy(orbit, lam, sample(y, g), g);
        if (!z_prev.empty() && relative_change(g_prev, z_prev, z, sc.spec) < sc.rel_tol) {
            out.grid = g;
            out.decaying = std::move(z);
            out.T_final = g.t_end();
            out.doublings = d;
            break;
        }
        g_prev = g;
        z_prev = std::move(z);
        len *= 2;
        if (d == sc.max_doublings) throw accuracy_error("low-mode truncation did not stabilize");
    }
    // Conjugated Jacobi field on the grid.
    std::vector<double> phi(std::size_t(out.grid.N));
    double scale = 0.0;
    for (int i = 0; i < out.grid.N; ++i) {
        const double t = out.grid.t(i);
        phi[i] = conjugate_coefficients(orbit.eval(t), orbit.params).g * psi_profile(t);
        if (t <= R + orbit.T) scale = std::max(scale, std::abs(phi[i]));
    }
    if (!(std::abs(phi[0]) >= sc.min_margin * scale))
        throw resonant_error("Jacobi field nearly vanishes at R = " + std::to_string(R) + " (|Phi(R)|/sup = " +
                             std::to_string(std::abs(phi[0]) / scale) + " below " + std::to_string(sc.min_margin) +
                             "); choose a different interface radius");
    out.jacobi_coefficient = (boundary - out.decaying[0]) / phi[0];
    out.coefficient_bound = scale / std::abs(phi[0]);
    out.z.resize(out.decaying.size());
    for (std::size_t i = 0; i < out.z.size(); ++i) out.z[i] = out.decaying[i] + out.jacobi_coefficient * phi[i];
    return out;
}

}  // namespace

std::vector<double> solve_mode_dirichlet(const DelaunayOrbit& orbit, double lambda, const ModeRhs& y,
                                         const UniformGrid& g, double zL, double zR) {
    return dirichlet_array(orbit, lambda, sample(y, g), g, zL, zR);
}

ModeSolution solve_mode_high(int band, const ModeRhs& y, const DelaunayOrbit& orbit, double R, double h,
                             const StabilizationControl& sc, double boundary, double lambda) {
    if (band < 2) throw argument_error("solve_mode_high: band " + std::to_string(band) + " is a low band");
    const double lam = default_lambda(band, lambda, orbit.params.n);
    double margin = 1e300;
    for (int i = 0; i < 400; ++i) margin = std::min(margin, mode_potential(orbit, lam, orbit.T * i / 400.0));
    if (!(margin > 0.0))
        throw argument_error("coercivity margin " + std::to_string(margin) + " is not positive at band " +
                             std::to_string(band) + " (mode misclassified)");
    double len = sc.T_initial > 0 ? sc.T_initial : 4 * orbit.T;
    UniformGrid g_prev;
    std::vector<double> z_prev;
    for (int d = 0; d <= sc.max_doublings; ++d) {
        UniformGrid g{R, h, nodes_for(len, h)};
        std::vector<double> z = dirichlet_array(orbit, lam, sample(y, g), g, boundary, 0.0);
        if (!z_prev.empty() && relative_change(g_prev, z_prev, z, sc.spec) < sc.rel_tol) {
            ModeSolution out;
            out.grid = g;
            out.decaying = z;
            out.z = std::move(z);
            out.T_final = g.t_end();
            out.doublings = d;
            return out;
        }
        g_prev = g;
        z_prev = std::move(z);
        len *= 2;
    }
    throw accuracy_error("high-mode truncation did not stabilize");
}

ModeSolution solve_mode_low(int band, const ModeRhs& y, const DelaunayOrbit& orbit, double R, double h,
                            const StabilizationControl& sc, double boundary, double lambda, const JacobiField* jacobi) {
    if (band != 0 && band != 1) throw argument_error("solve_mode_low: band must be 0 or 1");
    JacobiField def{band == 0 ? JacobiKind::ZeroPlus : JacobiKind::Plus, band, Growth::Bounded, &orbit};
    const JacobiField& f = jacobi ? *jacobi : def;
    return low_solve(band, y, orbit, R, h, sc, boundary, lambda, [&](double t) { return f.profile(t).f; });
}

RadiusBrackets radius_brackets(const DelaunayOrbit& orbit, double R) {
    const double a = orbit.params.a_exp;
    const OrbitPoint p = orbit.eval(R);
    RadiusBrackets b;
    b.bracket1 = (a + p.vd / p.v * std::tanh(R)) / a;
    b.bracket2 = (a * std::tanh(R) + p.vd / p.v) / a;
    double mvd = 0, mw = 0;
    for (int i = 0; i <= 400; ++i) {
        const double s = R - orbit.T + 2 * orbit.T * i / 400.0;
        mvd = std::max(mvd, std::abs(orbit.eval(s).vd));
        mw = std::max(mw, std::abs(orbit.eval_eta_derivative(s).v));
    }
    b.phi0_plus = std::abs(p.vd) / mvd;
    b.phi0_minus = std::abs(orbit.eval_eta_derivative(R).v) / mw;
    b.margin = std::min({std::abs(b.bracket1), std::abs(b.bracket2), b.phi0_plus, b.phi0_minus});
    return b;
}

double select_interface_radius(const DelaunayOrbit& orbit, double R_min, double origin, double h, double min_margin) {
    int i = int(std::ceil((R_min - origin) / h - 1e-9));
    double best_R = 0, best = -1;
    for (;; ++i) {
        const double R = origin + i * h;
        if (R >= R_min + orbit.T) break;
        const double m = radius_brackets(orbit, R).margin;
        if (m > best) {
            best = m;
            best_R = R;
        }
    }
    if (!(best >= min_margin))
        throw resonant_error("no interface radius in [" + std::to_string(R_min) + ", R_min + T) clears the bracket margin " +
                             std::to_string(min_margin));
    return best_R;
}

SpectralField solve_finite(const SpectralField& rhs, const DelaunayOrbit& orbit, double R, double min_margin) {
    const UniformGrid& g = rhs.grid;
    if (std::abs(g.t0 + R) > 1e-9 * (1 + R) || std::abs(g.t_end() - R) > 1e-9 * (1 + R))
        throw grid_error("finite-cylinder grid must span exactly [-R, R]");
    const RadiusBrackets br = radius_brackets(orbit, R);
    if (!(br.margin >= min_margin))
        throw resonant_error("R = " + std::to_string(R) + " is degenerate for the finite cylinder (bracket margin " +
                             std::to_string(br.margin) + " below " + std::to_string(min_margin) + ")");
    SpectralField out = SpectralField::zeros(g, *rhs.basis);
    for (int m = 0; m < rhs.basis->modes(); ++m) out.coeff[m] = dirichlet_array(orbit, rhs.basis->lambda(m), rhs.coeff[m], g, 0.0, 0.0);
    return out;
}

HalfSolution solve_half_with_boundary(const std::vector<ModeRhs>& rhs, const std::vector<double>& boundary,
                                      const DelaunayOrbit& orbit, const PsiBasis& basis, double R, int sign, double h,
                                      const StabilizationControl& sc) {
    if (sign != 1 && sign != -1) throw argument_error("sign must be +1 or -1");
    const int M = basis.modes();
    if (int(rhs.size()) != M || int(boundary.size()) != M)
        throw argument_error("band limit exceeded: need one rhs and one boundary value per basis mode");
    std::vector<ModeSolution> sols;
    HalfSolution out;
    for (int m = 0; m < M; ++m) {
        const ModeRhs y = [&, m](double s) { return rhs[m](sign * s); };
        if (m >= 2) {
            sols.push_back(solve_mode_high(m, y, orbit, R, h, sc, boundary[m], basis.lambda(m)));
        } else {
            JacobiField f{sign > 0 ? (m == 0 ? JacobiKind::ZeroPlus : JacobiKind::Plus)
                                   : (m == 0 ? JacobiKind::ZeroMinus : JacobiKind::Minus),
                          m, Growth::Bounded, &orbit};
            sols.push_back(low_solve(m, y, orbit, R, h, sc, boundary[m], basis.lambda(m),
                                     [&](double s) { return f.profile(sign * s).f; }));
            out.coefficients.push_back(sols.back().jacobi_coefficient);
        }
        out.T_final.push_back(sols.back().T_final);
    }
    int N = sols[0].grid.N;
    for (const ModeSolution& s : sols) N = std::min(N, s.grid.N);
    out.decaying = SpectralField::zeros({R, h, N}, basis);
    for (int m = 0; m < M; ++m) out.decaying.coeff[m].assign(sols[m].decaying.begin(), sols[m].decaying.begin() + N);
    return out;
}

}  // namespace sigmak
