#include "sigmak/linop.hpp"

#include "sigmak/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sigmak {

double a_eta_of(double F, const DimensionParams& P) {
    const double n = P.n, k = P.k;
    return (n - k) / (k * (n - 1)) + n * (k - 1) / (k * (n - 1)) * F;
}

double p_eta_of(double v, double F, const DimensionParams& P) {
    const double n = P.n, k = P.k;
    const double a = P.a_exp;
    const double v4 = std::pow(v, 2.0 / a);  // v^{4k/(n-2k)}
    return a * a + n * (n * k + n - 2 * k) * (k - 1) / (2 * k * k) * F - n * n * (k * k - 1) / (4 * k * k) * F * F -
           n * (2 * k * n - n + 2 * k) / (4 * k) * v4 * std::pow(F, (k - 1) / k) +
           n * n * k * (k - 1) / (4 * k * k) * v4 * std::pow(F, (2 * k - 1) / k);
}

HJet h_jet(const OrbitPoint& p, const DimensionParams& P) {
    const double c2 = P.c_exp * P.c_exp;
    HJet J;
    J.h = p.v * p.v - c2 * p.vd * p.vd;
    J.h1 = 2 * p.v * p.vd - 2 * c2 * p.vd * p.vdd;
    J.h2 = 2 * p.vd * p.vd + 2 * p.v * p.vdd - 2 * c2 * (p.vdd * p.vdd + p.vd * p.vddd);
    return J;
}

ConjugateCoefficients conjugate_coefficients(const OrbitPoint& b, const DimensionParams& P) {
    const HJet H = h_jet(b, P);
    if (!(H.h > 0.0)) throw domain_error("h = v^2 - c^2 vdot^2 must stay positive");
    const double m = 0.5 * (P.k - 1);
    ConjugateCoefficients c;
    c.g = std::pow(H.h, m);
    c.g1 = m * std::pow(H.h, m - 1) * H.h1;
    c.g2 = m * (m - 1) * std::pow(H.h, m - 2) * H.h1 * H.h1 + m * std::pow(H.h, m - 1) * H.h2;
    const double F = std::pow(b.v, P.p_exp) / std::pow(H.h, P.k);
    c.a = a_eta_of(F, P);
    c.p = p_eta_of(b.v, F, P);
    c.pref = -P.C_nk * b.v * c.g;
    return c;
}

namespace {

using Conj = ConjugateCoefficients;
inline Conj conj_at(const OrbitPoint& b, const DimensionParams& P) { return conjugate_coefficients(b, P); }

double sphere_lap(const PointJet& w, double psi, bool pole, int n) {
    if (pole) return (n - 1) * w.upp;
    return w.upp + (n - 2) * std::cos(psi) / std::sin(psi) * w.up;
}

}  // namespace

ModeCoefficients delaunay_coefficients(const DelaunayOrbit& orbit, const std::vector<double>& tgrid) {
    ModeCoefficients mc;
    mc.t = tgrid;
    for (double t : tgrid) {
        const OrbitPoint b = orbit.eval(t);
        const double h = b.v * b.v - orbit.params.c_exp * orbit.params.c_exp * b.vd * b.vd;
        const double F = std::pow(b.v, orbit.params.p_exp) / std::pow(h, orbit.params.k);
        mc.a_eta.push_back(a_eta_of(F, orbit.params));
        mc.p_eta.push_back(p_eta_of(b.v, F, orbit.params));
    }
    return mc;
}

double sphere_eigenvalue(int m, int n) { return double(m) * (n - 2 + m); }

int sphere_multiplicity(int m, int n) {
    const double d = binomial(m + n - 1, n - 1) - (m >= 2 ? binomial(m + n - 3, n - 1) : 0.0);
    return int(std::lround(d));
}

IndicialData spectral_data(const DimensionParams& P, int M_max) {
    if (M_max < 1) throw argument_error("band limit M_max must be at least 1");
    IndicialData d;
    for (int m = 0; m <= M_max; ++m) {
        d.lambda.push_back(sphere_eigenvalue(m, P.n));
        d.multiplicity.push_back(sphere_multiplicity(m, P.n));
    }
    d.delta_bar = P.delta_bar();
    return d;
}

double coercivity_margin(const DelaunayOrbit& orbit, int samples) {
    const double lam = sphere_eigenvalue(2, orbit.params.n);
    double m = 1e300;
    for (int i = 0; i < samples; ++i) {
        const double t = orbit.T * i / samples;
        const Conj c = conj_at(orbit.eval(t), orbit.params);
        m = std::min(m, c.a * lam + c.p);
    }
    return m;
}

double linearized_point(const OrbitPoint& base, const PointJet& w, double psi, bool pole, const DimensionParams& P) {
    const Conj c = conj_at(base, P);
    const double gw_tt = c.g2 * w.u + 2 * c.g1 * w.ut + c.g * w.utt;
    return c.pref * (gw_tt + c.a * c.g * sphere_lap(w, psi, pole, P.n) - c.p * c.g * w.u);
}

AxiSymField apply_linearized(const AxiSymField& w, const DelaunayOrbit& orbit) {
    AxiSymField out(w.nt(), w.np(), w.t0(), w.ht());
    for (int i = 0; i < w.nt(); ++i) {
        const OrbitPoint b = orbit.eval(w.t(i));
        for (int j = 0; j < w.np(); ++j) out(i, j) = linearized_point(b, w.jet(i, j), w.psi(j), w.is_pole(j), orbit.params);
    }
    return out;
}

std::vector<double> apply_conjugate_mode(const std::vector<double>& z, double t0, double ht, int m,
                                         const DelaunayOrbit& orbit) {
    const int N = int(z.size());
    if (N < 3) throw argument_error("mode array needs at least 3 nodes");
    const double lam = sphere_eigenvalue(m, orbit.params.n);
    std::vector<double> out(z.size(), 0.0);
    for (int i = 1; i < N - 1; ++i) {
        const Conj c = conj_at(orbit.eval(t0 + i * ht), orbit.params);
        out[i] = (z[i + 1] - 2 * z[i] + z[i - 1]) / (ht * ht) - (lam * c.a + c.p) * z[i];
    }
    return out;
}

std::vector<double> apply_linearized_mode(const std::vector<double>& w, double t0, double ht, int m,
                                          const DelaunayOrbit& orbit) {
    std::vector<double> z(w.size());
    std::vector<double> pref(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        const Conj c = conj_at(orbit.eval(t0 + i * ht), orbit.params);
        z[i] = c.g * w[i];
        pref[i] = c.pref;
    }
    std::vector<double> out = apply_conjugate_mode(z, t0, ht, m, orbit);
    for (std::size_t i = 0; i < w.size(); ++i) out[i] *= pref[i];
    return out;
}

double schwarzschild_linearized_point(const SchwarzschildProfile& S, double t, const PointJet& w, double psi,
                                      bool pole) {
    const DimensionParams& P = S.params;
    const double n = P.n, k = P.k;
    const OrbitPoint b = S.eval(t);
    const double lap = sphere_lap(w, psi, pole, P.n);
    return -P.C_nk * b.v * std::pow(S.h0, k - 1) *
           (w.utt + (n - k) / (k * (n - 1)) * lap - P.a_exp * P.a_exp * w.u);
}

AxiSymField schwarzschild_linearized(const AxiSymField& w, const SchwarzschildProfile& S) {
    AxiSymField out(w.nt(), w.np(), w.t0(), w.ht());
    for (int i = 0; i < w.nt(); ++i)
        for (int j = 0; j < w.np(); ++j)
            out(i, j) = schwarzschild_linearized_point(S, w.t(i), w.jet(i, j), w.psi(j), w.is_pole(j));
    return out;
}

double sigma_schwarzschild(int j, double h, const DimensionParams& P) {
    const int k = P.k, e = k - 1 - j;
    if (j < 0 || e < 0) throw argument_error("sigma_schwarzschild: j must lie in 0..k-1");
    return std::pow(P.a_exp / 2.0, e) * std::pow(h, e) * (1.0 + j) / k * binomial(P.n, e);
}

double measure_decay_rate(const std::vector<double>& t, const std::vector<double>& y, double t_lo, double t_hi) {
    if (t.size() != y.size()) throw argument_error("decay fit: t and y differ in length");
    double s0 = 0, s1 = 0, s2 = 0, sy = 0, sty = 0;
    int sign = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_lo || t[i] > t_hi) continue;
        const int sg = y[i] > 0 ? 1 : (y[i] < 0 ? -1 : 0);
        if (sg == 0 || (sign != 0 && sg != sign))
            throw domain_error("decay fit: solution changes sign or vanishes inside the fit window");
        sign = sg;
        const double ly = std::log(std::abs(y[i]));
        s0 += 1;
        s1 += t[i];
        s2 += t[i] * t[i];
        sy += ly;
        sty += t[i] * ly;
    }
    if (s0 < 2) throw argument_error("decay fit: fewer than two samples in the window");
    return (s0 * sty - s1 * sy) / (s0 * s2 - s1 * s1);
}

}  // namespace sigmak
