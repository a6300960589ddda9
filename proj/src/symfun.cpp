#include "sigmak/symfun.hpp"

#include <algorithm>
#include <string>

namespace sigmak {

double elem_sym(const std::vector<double>& values, int j) {
    const int m = int(values.size());
    if (j < 0 || j > m)
        throw argument_error("elem_sym: order " + std::to_string(j) + " outside 0.." + std::to_string(m));
    // e[i] holds the coefficient of x^i in prod(1 + lambda x) over the values seen so far.
    std::vector<double> e(std::size_t(j) + 1, 0.0);
    e[0] = 1.0;
    for (int i = 0; i < m; ++i)
        for (int r = std::min(i + 1, j); r >= 1; --r) e[r] += values[i] * e[r - 1];
    return e[j];
}

SchoutenSpectrum make_spectrum(std::vector<double> values, int n) {
    if (int(values.size()) != n)
        throw argument_error("spectrum must have exactly n = " + std::to_string(n) + " eigenvalues");
    std::sort(values.begin(), values.end());
    return {std::move(values)};
}

bool cone_membership(const SchoutenSpectrum& s, int k) {
    for (int j = 1; j <= k; ++j)
        if (!(elem_sym(s.eigenvalues, j) > 0.0)) return false;
    return true;
}

SchoutenSpectrum cylinder_background_spectrum(int n) {
    const double R = double(n - 1) * (n - 2);
    std::vector<double> ric(std::size_t(n), double(n - 2));
    ric[0] = 0.0;
    std::vector<double> ev(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ev[i] = (ric[i] - R / (2.0 * (n - 1))) / double(n - 2);
    return make_spectrum(ev, n);
}

SchoutenSpectrum spectrum_point(const PointJet& j, double psi, bool pole, const DimensionParams& P) {
    const BBlock<double> b = b_block(j, psi, pole, P);
    if (std::abs(b.tp - b.pt) >= 1e-10) throw domain_error("Schouten block is not symmetric");
    const double m = 0.5 * (b.tt + b.pp);
    const double d = std::sqrt(0.25 * (b.tt - b.pp) * (b.tt - b.pp) + b.tp * b.tp);
    std::vector<double> ev(std::size_t(P.n), b.mu);
    ev[0] = m - d;
    ev[1] = m + d;
    return make_spectrum(std::move(ev), P.n);
}

LinCoeffs linearization_point(const PointJet& j, double psi, bool pole, const DimensionParams& P,
                              double rhs_scale) {
    using D = Dual<6>;
    PointJetT<D> jd;
    jd.u = D::var(j.u, 0);
    jd.ut = D::var(j.ut, 1);
    jd.up = D::var(j.up, 2);
    jd.utt = D::var(j.utt, 3);
    jd.utp = D::var(j.utp, 4);
    jd.upp = D::var(j.upp, 5);
    const D r = residual_point(jd, psi, pole, P, rhs_scale);
    LinCoeffs out;
    out.value = r.v;
    for (int i = 0; i < 6; ++i) out.c[i] = r.d[i];
    return out;
}

AxiSymField::AxiSymField(int nt, int np, double t0, double ht)
    : nt_(nt), np_(np), t0_(t0), ht_(ht), hp_(M_PI / (np - 1)), v_(std::size_t(nt) * np, 0.0) {
    if (nt < 4 || np < 5) throw grid_error("AxiSymField needs at least 4 t-rows and 5 psi-nodes");
}

PointJet AxiSymField::jet(int i, int j) const {
    const AxiSymField& f = *this;
    auto at = [&](int ii, int jj) {
        if (jj < 0) jj = -jj;
        if (jj > np_ - 1) jj = 2 * (np_ - 1) - jj;
        return f(ii, jj);
    };
    // t-derivative weights for rows i-1..i+1 (centered) or one-sided at the ends.
    auto dt = [&](int jj, double& d1, double& d2) {
        if (i == 0) {
            d1 = (-3 * at(0, jj) + 4 * at(1, jj) - at(2, jj)) / (2 * ht_);
            d2 = (2 * at(0, jj) - 5 * at(1, jj) + 4 * at(2, jj) - at(3, jj)) / (ht_ * ht_);
        } else if (i == nt_ - 1) {
            const int e = nt_ - 1;
            d1 = (3 * at(e, jj) - 4 * at(e - 1, jj) + at(e - 2, jj)) / (2 * ht_);
            d2 = (2 * at(e, jj) - 5 * at(e - 1, jj) + 4 * at(e - 2, jj) - at(e - 3, jj)) / (ht_ * ht_);
        } else {
            d1 = (at(i + 1, jj) - at(i - 1, jj)) / (2 * ht_);
            d2 = (at(i + 1, jj) - 2 * at(i, jj) + at(i - 1, jj)) / (ht_ * ht_);
        }
    };
    PointJet J;
    J.u = at(i, j);
    double d2;
    dt(j, J.ut, J.utt);
    J.up = (at(i, j + 1) - at(i, j - 1)) / (2 * hp_);
    J.upp = (at(i, j + 1) - 2 * at(i, j) + at(i, j - 1)) / (hp_ * hp_);
    double tp, tm;
    dt(j + 1, tp, d2);
    dt(j - 1, tm, d2);
    J.utp = (tp - tm) / (2 * hp_);
    if (is_pole(j)) {
        J.up = 0.0;
        J.utp = 0.0;
    }
    return J;
}

double AxiSymField::pole_defect() const {
    double scale = 0.0, worst = 0.0;
    for (double x : v_) scale = std::max(scale, std::abs(x));
    if (scale == 0.0) return 0.0;
    for (int i = 0; i < nt_; ++i) {
        const AxiSymField& f = *this;
        const int e = np_ - 1;
        // Fourth-order one-sided stencils; for an even profile the error is O(h^5).
        const double d0 = (-25 * f(i, 0) + 48 * f(i, 1) - 36 * f(i, 2) + 16 * f(i, 3) - 3 * f(i, 4)) / (12 * hp_);
        const double d1 = (25 * f(i, e) - 48 * f(i, e - 1) + 36 * f(i, e - 2) - 16 * f(i, e - 3) + 3 * f(i, e - 4)) / (12 * hp_);
        worst = std::max({worst, std::abs(d0), std::abs(d1)});
    }
    return worst / scale;
}

void AxiSymField::check_pole_closure(double tol) const {
    const double d = pole_defect();
    if (d > tol) throw grid_error("pole closure violated: relative one-sided d/dpsi = " + std::to_string(d));
}

void AxiSymField::check_positive() const {
    for (double x : v_)
        if (!(x > 0.0)) throw domain_error("conformal factor must be strictly positive");
}

std::vector<SchoutenSpectrum> schouten_endomorphism(const AxiSymField& u, const DimensionParams& P) {
    u.check_positive();
    u.check_pole_closure();
    std::vector<SchoutenSpectrum> out;
    out.reserve(std::size_t(u.nt()) * u.np());
    for (int i = 0; i < u.nt(); ++i)
        for (int j = 0; j < u.np(); ++j) out.push_back(spectrum_point(u.jet(i, j), u.psi(j), u.is_pole(j), P));
    return out;
}

AxiSymField nonlinear_residual(const AxiSymField& u, const AxiSymField* correction, const DimensionParams& P,
                               double rhs_scale) {
    u.check_positive();
    u.check_pole_closure();
    AxiSymField U = u;
    if (correction) {
        if (correction->nt() != u.nt() || correction->np() != u.np())
            throw grid_error("background correction grid does not match the field grid");
        for (std::size_t i = 0; i < U.data().size(); ++i) {
            const double f = 1.0 + correction->data()[i];
            if (!(f > 0.0)) throw domain_error("background factor 1+c must be positive");
            U.data()[i] *= std::pow(f, P.a_exp / 2.0);
        }
    }
    AxiSymField out(u.nt(), u.np(), u.t0(), u.ht());
    for (int i = 0; i < u.nt(); ++i)
        for (int j = 0; j < u.np(); ++j) {
            double r = residual_point(U.jet(i, j), U.psi(j), U.is_pole(j), P, rhs_scale);
            if (correction) r *= std::pow(1.0 + (*correction)(i, j), -0.5 * P.n);
            out(i, j) = r;
        }
    return out;
}

}  // namespace sigmak
