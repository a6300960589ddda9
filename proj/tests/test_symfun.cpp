#include <doctest.h>

#include "sigmak/delaunay.hpp"
#include "sigmak/symfun.hpp"

#include <cmath>
#include <random>

using namespace sigmak;

namespace {

// Sum over all j-subsets; the oracle for small lists.
double brute_elem_sym(const std::vector<double>& x, int j) {
    const int m = int(x.size());
    double s = 0;
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
        if (__builtin_popcount(mask) != j) continue;
        double p = 1;
        for (int i = 0; i < m; ++i)
            if (mask & (1u << i)) p *= x[i];
        s += p;
    }
    return s;
}

// Newton's identities from power sums.
double newton_elem_sym(const std::vector<double>& x, int j) {
    std::vector<double> e(j + 1, 0.0), pw(j + 1, 0.0);
    for (int r = 1; r <= j; ++r)
        for (double v : x) pw[r] += std::pow(v, r);
    e[0] = 1;
    for (int r = 1; r <= j; ++r) {
        double s = 0;
        for (int i = 1; i <= r; ++i) s += ((i % 2) ? 1.0 : -1.0) * e[r - i] * pw[i];
        e[r] = s / r;
    }
    return e[j];
}

template <class F>
AxiSymField radial_field(double t0, double t1, int nt, int np, F f) {
    AxiSymField u(nt, np, t0, (t1 - t0) / (nt - 1));
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < np; ++j) u(i, j) = f(u.t(i), u.psi(j));
    return u;
}

double interior_sup(const AxiSymField& r) {
    double m = 0;
    for (int i = 1; i < r.nt() - 1; ++i)
        for (int j = 0; j < r.np(); ++j) m = std::max(m, std::abs(r(i, j)));
    return m;
}

}  // namespace

TEST_CASE("elem_sym anchors") {
    CHECK(elem_sym(std::vector<double>(5, 0.5), 2) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(elem_sym({3.0, -7.0, 0.1}, 0) == 1.0);
    CHECK(elem_sym({-0.5, 0.5, 0.5, 0.5, 0.5}, 2) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(brute_elem_sym({-0.5, 0.5, 0.5, 0.5, 0.5}, 2) == doctest::Approx(0.5));
    CHECK_THROWS_AS(elem_sym({1.0, 2.0}, 3), Error);
    CHECK_THROWS_AS(elem_sym({1.0, 2.0}, -1), Error);
}

TEST_CASE("elem_sym agrees with subset sums and Newton identities") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int m = 2 + trial % 9;
        std::vector<double> x(m);
        for (double& v : x) v = U(rng);
        for (int j = 0; j <= m; ++j) {
            const double e = elem_sym(x, j);
            CHECK(e == doctest::Approx(brute_elem_sym(x, j)).epsilon(1e-12));
            const double nw = newton_elem_sym(x, j);
            CHECK(std::abs(e - nw) <= 1e-12 * std::max(1.0, std::abs(e)) * 10);
        }
    }
}

TEST_CASE("elem_sym homogeneity") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-2.0, 2.0), C(0.1, 3.0);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> x(7);
        for (double& v : x) v = U(rng);
        const double c = C(rng);
        std::vector<double> cx = x;
        for (double& v : cx) v *= c;
        for (int j = 0; j <= 7; ++j) {
            const double lhs = elem_sym(cx, j), rhs = std::pow(c, j) * elem_sym(x, j);
            CHECK(std::abs(lhs - rhs) <= 1e-13 * std::max(1.0, std::abs(rhs)) * 10);
        }
    }
}

TEST_CASE("cylinder spectrum and cone membership") {
    for (int n : {3, 5, 7, 9}) {
        const auto s = cylinder_background_spectrum(n);
        REQUIRE(s.eigenvalues.size() == std::size_t(n));
        CHECK(s.eigenvalues[0] == doctest::Approx(-0.5).epsilon(1e-15));
        for (int i = 1; i < n; ++i) CHECK(s.eigenvalues[i] == doctest::Approx(0.5).epsilon(1e-15));
    }
    const auto cyl = cylinder_background_spectrum(5);
    CHECK(elem_sym(cyl.eigenvalues, 1) == doctest::Approx(1.5));
    CHECK(elem_sym(cyl.eigenvalues, 2) == doctest::Approx(0.5));
    CHECK(cone_membership(cyl, 2));
    CHECK(cone_membership(make_spectrum(std::vector<double>(5, 0.5), 5), 2));
    CHECK_FALSE(cone_membership(make_spectrum({-1, 0, 0, 0, 0}, 5), 1));
    CHECK_THROWS_AS(make_spectrum({1, 2}, 5), Error);
}

TEST_CASE("constant factor gives a constant spectrum") {
    DimensionParams P(5, 2);
    AxiSymField u = radial_field(-1, 1, 21, 13, [](double, double) { return 0.7; });
    const auto sp = schouten_endomorphism(u, P);
    const double s0 = elem_sym(sp[0].eigenvalues, 2);
    for (const auto& s : sp) CHECK(elem_sym(s.eigenvalues, 2) == doctest::Approx(s0).epsilon(1e-13));
    // B scales like u^2; the constant spectrum is (a/2) u^2 times the cylinder one.
    const double a = P.a_exp, u2 = 0.49;
    CHECK(sp[0].eigenvalues.front() == doctest::Approx(-(a / 2) * u2));
    CHECK(sp[0].eigenvalues.back() == doctest::Approx((a / 2) * u2));
}

TEST_CASE("Delaunay orbit is an exact zero of N, second order under refinement") {
    for (auto nk : {std::pair{5, 2}, std::pair{5, 1}, std::pair{7, 3}}) {
        DimensionParams P(nk.first, nk.second);
        const auto orb = solve_orbit(0.8 * P.eta_sup(), P);
        double prev = 0, order = 0;
        for (int lev = 0; lev < 3; ++lev) {
            const int nt = 200 * (1 << lev) + 1;
            AxiSymField u = radial_field(0, orb.T, nt, 9, [&](double t, double) { return orb.eval(t).v; });
            const double e = interior_sup(nonlinear_residual(u, nullptr, P));
            if (lev > 0) order = std::log2(prev / e);
            prev = e;
        }
        CHECK(prev < 1e-5);
        CHECK(order >= 1.9);
    }
}

TEST_CASE("Schwarzschild profile is sigma_k flat") {
    DimensionParams P(5, 2);
    const auto S = schwarzschild_profile(0.3, 0.2, P);
    double prev = 0, order = 0;
    for (int lev = 0; lev < 3; ++lev) {
        const int nt = 200 * (1 << lev) + 1;
        AxiSymField u = radial_field(-2, 2, nt, 9, [&](double t, double) { return S.eval(t).v; });
        const AxiSymField flat = nonlinear_residual(u, nullptr, P, 0.0);
        const AxiSymField full = nonlinear_residual(u, nullptr, P, 1.0);
        for (int i = 1; i < nt - 1; i += 37)
            CHECK(full(i, 3) - flat(i, 3) ==
                  doctest::Approx(-P.rhs_const * std::pow(u(i, 3), P.p_exp)).epsilon(1e-12));
        const double e = interior_sup(flat);
        if (lev > 0) order = std::log2(prev / e);
        prev = e;
    }
    CHECK(prev < 1e-5);
    CHECK(order >= 1.9);
}

TEST_CASE("conformal equivariance on the grid") {
    DimensionParams P(5, 2);
    const auto orb = solve_orbit(0.5, P);
    auto c_of = [](double t, double psi) { return 0.3 * std::sin(t) * std::cos(psi) * std::cos(psi) + 0.1; };
    double prev = 0, order = 0;
    for (int lev = 0; lev < 3; ++lev) {
        const int nt = 80 * (1 << lev) + 1, np = 48 * (1 << lev) + 1;
        // u is chosen so that (1+c)^{a/2} u is the Delaunay solution: N(u, (1+c) g_cyl) must vanish.
        AxiSymField c = radial_field(0, 3, nt, np, c_of);
        AxiSymField u = radial_field(0, 3, nt, np, [&](double t, double psi) {
            return orb.eval(t).v * std::pow(1 + c_of(t, psi), -P.a_exp / 2);
        });
        const double e = interior_sup(nonlinear_residual(u, &c, P));
        if (lev > 0) order = std::log2(prev / e);
        prev = e;
    }
    CHECK(prev < 1e-3);
    CHECK(order >= 1.8);
}

TEST_CASE("grid and domain errors") {
    DimensionParams P(5, 2);
    AxiSymField u = radial_field(0, 1, 11, 49, [](double, double psi) { return 1.0 + 0.1 * std::cos(psi); });
    CHECK_NOTHROW(u.check_pole_closure());
    u(3, 0) = 1.5;
    CHECK_THROWS_AS(u.check_pole_closure(), Error);
    AxiSymField neg = radial_field(0, 1, 11, 9, [](double t, double) { return t - 0.5; });
    CHECK_THROWS_AS(schouten_endomorphism(neg, P), Error);
    CHECK_THROWS_AS(DimensionParams(5, 3), Error);
}
