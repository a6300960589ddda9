#include <doctest.h>

#include "sigmak/linop.hpp"

#include <cmath>
#include <random>

using namespace sigmak;

namespace {

// Exact jet of w(t, psi) = A sin(w1 t + ph) + B cos(w2 t) cos(psi) + C cos(psi)^2.
struct TestDir {
    double A, w1, ph, B, w2, C;
    PointJet jet(double t, double psi) const {
        const double cp = std::cos(psi), sp = std::sin(psi);
        PointJet J;
        J.u = A * std::sin(w1 * t + ph) + B * std::cos(w2 * t) * cp + C * cp * cp;
        J.ut = A * w1 * std::cos(w1 * t + ph) - B * w2 * std::sin(w2 * t) * cp;
        J.utt = -A * w1 * w1 * std::sin(w1 * t + ph) - B * w2 * w2 * std::cos(w2 * t) * cp;
        J.up = -B * std::cos(w2 * t) * sp - 2 * C * cp * sp;
        J.utp = B * w2 * std::sin(w2 * t) * sp;
        J.upp = -B * std::cos(w2 * t) * cp - 2 * C * (cp * cp - sp * sp);
        return J;
    }
};

PointJet radial_jet(const OrbitPoint& p) {
    PointJet J;
    J.u = p.v;
    J.ut = p.vd;
    J.utt = p.vdd;
    return J;
}

PointJet add(const PointJet& a, const PointJet& b, double s) {
    return {a.u + s * b.u, a.ut + s * b.ut, a.up + s * b.up, a.utt + s * b.utt, a.utp + s * b.utp, a.upp + s * b.upp};
}

double dot(const LinCoeffs& c, const PointJet& w) {
    return c.c[0] * w.u + c.c[1] * w.ut + c.c[2] * w.up + c.c[3] * w.utt + c.c[4] * w.utp + c.c[5] * w.upp;
}

}  // namespace

TEST_CASE("coefficient formulas") {
    DimensionParams P1(5, 1);
    for (double F : {0.1, 0.5, 0.9}) {
        CHECK(a_eta_of(F, P1) == doctest::Approx(1.0));
        CHECK(p_eta_of(0.6, F, P1) == doctest::Approx(2.25 - 5.0 * 7.0 / 4.0 * std::pow(0.6, 4.0 / 3.0)));
    }
    DimensionParams P(5, 2);
    const double lo = 3.0 / 8.0, hi = lo + 5.0 / 8.0;
    const auto o = solve_orbit(0.5, P);
    std::vector<double> tg;
    for (int i = 0; i <= 400; ++i) tg.push_back(2 * o.T * i / 400.0);
    const auto mc = delaunay_coefficients(o, tg);
    for (std::size_t i = 0; i < tg.size(); ++i) {
        CHECK(mc.a_eta[i] > lo);
        CHECK(mc.a_eta[i] < hi);
    }
    for (std::size_t i = 0; i + 200 < tg.size(); ++i) {
        CHECK(mc.a_eta[i] == doctest::Approx(mc.a_eta[i + 200]).epsilon(1e-8));
        CHECK(mc.p_eta[i] == doctest::Approx(mc.p_eta[i + 200]).epsilon(1e-8));
    }
}

TEST_CASE("spectral data") {
    CHECK(DimensionParams(5, 1).delta_bar() == doctest::Approx(3.5).epsilon(1e-14));
    CHECK(DimensionParams(5, 2).delta_bar() == doctest::Approx(std::sqrt(3.8125)).epsilon(1e-14));
    const auto d = spectral_data(DimensionParams(5, 2), 4);
    CHECK(d.lambda[0] == 0);
    CHECK(d.lambda[1] == 4);
    CHECK(d.multiplicity[1] == 5);
    CHECK(d.lambda[2] == 10);
    CHECK(d.multiplicity[2] == 14);
    CHECK(d.multiplicity[0] == 1);
    CHECK(d.delta_bar > 1);
}

TEST_CASE("coercivity on an eta sweep") {
    for (auto nk : {std::pair{5, 2}, std::pair{5, 1}, std::pair{7, 3}}) {
        DimensionParams P(nk.first, nk.second);
        for (int i = 1; i <= 10; ++i) CHECK(coercivity_margin(solve_orbit(P.eta_sup() * i / 11.0, P)) > 0);
    }
}

TEST_CASE("paper form equals the exact pointwise derivative of N") {
    for (auto nk : {std::pair{5, 2}, std::pair{5, 1}, std::pair{7, 3}}) {
        DimensionParams P(nk.first, nk.second);
        const auto o = solve_orbit(0.6 * P.eta_sup(), P);
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> U(-1, 1);
        for (int trial = 0; trial < 20; ++trial) {
            TestDir d{U(rng), 1 + U(rng), U(rng), U(rng), 1 + U(rng), U(rng)};
            const double t = 3 * U(rng), psi = 1.5 + 1.4 * U(rng);
            const PointJet uj = radial_jet(o.eval(t));
            const PointJet wj = d.jet(t, psi);
            const double paper = linearized_point(o.eval(t), wj, psi, false, P);
            const double exact = dot(linearization_point(uj, psi, false, P), wj);
            CHECK(paper == doctest::Approx(exact).epsilon(1e-10).scale(1.0));
            // Pole closure uses the same identity with cot(psi) u_psi -> u_psipsi.
            const PointJet wp = d.jet(t, 0.0);
            CHECK(linearized_point(o.eval(t), wp, 0.0, true, P) ==
                  doctest::Approx(dot(linearization_point(uj, 0.0, true, P), wp)).epsilon(1e-10).scale(1.0));
        }
    }
}

TEST_CASE("directional difference quotient has a first-order remainder") {
    DimensionParams P(5, 2);
    const auto o = solve_orbit(0.45, P);
    const auto S = schwarzschild_profile(0.4, 0.3, P);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int trial = 0; trial < 20; ++trial) {
        TestDir d{U(rng), 1 + U(rng), U(rng), U(rng), 1 + U(rng), U(rng)};
        const double t = 2 * U(rng), psi = 1.5 + U(rng);
        for (int which = 0; which < 2; ++which) {
            const PointJet uj = radial_jet(which ? S.eval(t) : o.eval(t));
            const double rs = which ? 0.0 : 1.0;
            const PointJet wj = d.jet(t, psi);
            const double L = which ? schwarzschild_linearized_point(S, t, wj, psi, false)
                                   : linearized_point(o.eval(t), wj, psi, false, P);
            auto err = [&](double s) {
                return std::abs((residual_point(add(uj, wj, s), psi, false, P, rs) - residual_point(uj, psi, false, P, rs)) / s - L);
            };
            CHECK(err(1e-3) / err(5e-4) == doctest::Approx(2.0).epsilon(0.1));
        }
    }
}

TEST_CASE("Jacobi field vdot is in the grid kernel at second order") {
    DimensionParams P(5, 2);
    const auto o = solve_orbit(0.5, P);
    double prev = 0, order = 0;
    for (int lev = 0; lev < 3; ++lev) {
        const int nt = 200 * (1 << lev) + 1;
        AxiSymField w(nt, 9, 0.0, o.T / (nt - 1));
        for (int i = 0; i < nt; ++i)
            for (int j = 0; j < 9; ++j) w(i, j) = o.eval(w.t(i)).vd;
        const AxiSymField r = apply_linearized(w, o);
        double e = 0;
        for (int i = 1; i < nt - 1; ++i) e = std::max(e, std::abs(r(i, 4)));
        if (lev) order = std::log2(prev / e);
        prev = e;
    }
    CHECK(prev < 1e-5);
    CHECK(order > 1.9);
}

TEST_CASE("Schwarzschild linearization") {
    DimensionParams P(5, 2);
    const auto S = schwarzschild_profile(0.5, -0.2, P);
    // Exact pointwise agreement with the sigma_k-flat derivative.
    for (double t : {-1.0, 0.2, 1.3})
        for (double psi : {0.4, 1.7}) {
            TestDir d{0.3, 1.2, 0.1, -0.4, 0.7, 0.2};
            const PointJet uj = radial_jet(S.eval(t)), wj = d.jet(t, psi);
            CHECK(schwarzschild_linearized_point(S, t, wj, psi, false) ==
                  doctest::Approx(dot(linearization_point(uj, psi, false, P, 0.0), wj)).epsilon(1e-11));
        }
    const double a = P.a_exp;
    for (double sgn : {1.0, -1.0}) {
        const int nt = 401;
        AxiSymField w(nt, 9, -1.0, 2.0 / (nt - 1));
        for (int i = 0; i < nt; ++i)
            for (int j = 0; j < 9; ++j) w(i, j) = std::exp(sgn * a * w.t(i));
        const AxiSymField r = schwarzschild_linearized(w, S);
        double e = 0;
        for (int i = 1; i < nt - 1; ++i) e = std::max(e, std::abs(r(i, 2)));
        CHECK(e < 1e-5);
    }
    // Characteristic decay rate for the first band is at least one.
    const double nn = 5, kk = 2;
    CHECK(std::sqrt(a * a + (nn - kk) * 4 / (kk * (nn - 1))) >= 1.0);
    for (int j = 0; j < P.k; ++j) {
        const PointJet uj = radial_jet(S.eval(0.37));
        const auto sp = spectrum_point(uj, 1.0, false, P);
        CHECK(elem_sym(sp.eigenvalues, P.k - 1 - j) == doctest::Approx(sigma_schwarzschild(j, 0.5, P)).epsilon(1e-12));
    }
    DimensionParams Q(7, 3);
    const auto S3 = schwarzschild_profile(0.8, 0.1, Q);
    for (int j = 0; j < Q.k; ++j) {
        const auto sp = spectrum_point(radial_jet(S3.eval(-0.6)), 2.0, false, Q);
        CHECK(elem_sym(sp.eigenvalues, Q.k - 1 - j) == doctest::Approx(sigma_schwarzschild(j, 0.8, Q)).epsilon(1e-12));
    }
}

TEST_CASE("decay rate fit") {
    std::vector<double> t, y;
    for (int i = 0; i <= 100; ++i) {
        t.push_back(0.1 * i);
        y.push_back(3 * std::exp(-t.back()));
    }
    CHECK(measure_decay_rate(t, y, 1, 9) == doctest::Approx(-1).epsilon(1e-10));
    y[50] = -1;
    CHECK_THROWS(measure_decay_rate(t, y, 1, 9));
}
