#include <doctest.h>

#include "sigmak/glue.hpp"

#include <cmath>
#include <complex>
#include <map>

using namespace sigmak;

namespace {

const GluedGeometry& geometry(double eps) {
    static std::map<double, GluedGeometry> cache;
    auto it = cache.find(eps);
    if (it == cache.end()) {
        GlueConfig c;
        c.epsilon = eps;
        it = cache.emplace(eps, build_geometry(c)).first;
    }
    return it->second;
}

GlobalNormSpec default_spec(const DimensionParams& P) {
    GlobalNormSpec s;
    s.delta = 0.5 * (1 + P.delta_bar());
    s.gamma = P.a_exp;
    s.n = P.n;
    return s;
}

// Meridian point x(r, psi) straight from the defining formula, for finite differences.
std::complex<double> x_of(const GluedGeometry& g, int i, double r, double psi) {
    const auto& e = g.ends[i];
    const std::complex<double> Y = std::polar(std::exp(e.t0 - r), psi);
    return e.Kc * (1.0 / std::conj(Y + 1.0) - 0.5);
}

}  // namespace

TEST_CASE("geometry validation and radii") {
    GlueConfig c;
    for (double bad : {0.0, -1e-3, 0.06, 0.5}) {
        c.epsilon = bad;
        try {
            build_geometry(c);
            FAIL("accepted epsilon " << bad);
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Argument);
        }
    }
    c.epsilon = 1e-3;
    c.eps_max = 0.2;
    CHECK_THROWS_AS(build_geometry(c), Error);

    const GluedGeometry& g = geometry(1e-3);
    for (const auto& e : g.ends) {
        CHECK(e.Rp - 1 > e.R);
        CHECK(e.R > e.ball_extent);
        CHECK(e.L >= e.Rp + g.cfg.L_offset - 1e-12);
        CHECK(std::abs(e.R / e.h - std::round(e.R / e.h)) < 1e-9);
        CHECK(radius_brackets(*e.orbit, e.R).margin > 1e-6);
        CHECK(0.5 * e.Kc > 1.0);
    }
    CHECK(g.neck.t0 == doctest::Approx(std::log(1e-3)));
    CHECK(g.neck.t_end() == doctest::Approx(-std::log(1e-3)));
}

TEST_CASE("neck coordinates: anchors and round trips") {
    const GluedGeometry& g = geometry(1e-3);
    double r, psi;
    for (double pn : {0.0, 0.7, 2.0, M_PI}) {
        g.neck_to_end(0, 0.0, pn, r, psi);
        CHECK(g.end_abs_x(0, r, psi) == doctest::Approx(1e-3).epsilon(1e-10));
        g.neck_to_end(0, std::log(1e-3), pn, r, psi);
        CHECK(g.end_abs_x(0, r, psi) == doctest::Approx(1.0).epsilon(1e-10));
        g.neck_to_end(1, -std::log(1e-3), pn, r, psi);
        CHECK(g.end_abs_x(1, r, psi) == doctest::Approx(1.0).epsilon(1e-10));
    }
    double worst = 0;
    for (int i = 0; i < 2; ++i) {
        for (double t : {-6.0, -3.0, 0.0, 2.5, 6.5}) {
            for (double pn : {0.0, 0.3, 1.5, 2.9, M_PI}) {
                double tb, pb;
                g.neck_to_end(i, t, pn, r, psi);
                g.end_to_neck(i, r, psi, tb, pb);
                worst = std::max({worst, std::abs(tb - t), std::abs(pb - pn)});
                double rb, qb;
                g.neck_to_end(i, tb, pb, rb, qb);
                worst = std::max({worst, std::abs(rb - r), std::abs(qb - psi)});
            }
        }
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("the end chart is conformal and c is its deviation factor") {
    // Oracle: the map (r, psi) -> x must be conformal for dr^2 + dpsi^2 + sin^2(psi) g_{S^{n-2}} against
    // the flat metric, i.e. |x_r| = |x_psi| = Im x / sin psi, and then 1 + c = v^{2/a} / |x_r|^2.
    const GluedGeometry& g = geometry(1e-3);
    const double a = g.P.a_exp, d = 1e-5;
    for (int i = 0; i < 2; ++i) {
        for (double r : {2.0, 3.0, 3.6, 4.4}) {
            for (double psi : {0.2, 0.9, 1.7}) {
                const auto xr = (x_of(g, i, r + d, psi) - x_of(g, i, r - d, psi)) / (2 * d);
                const auto xp = (x_of(g, i, r, psi + d) - x_of(g, i, r, psi - d)) / (2 * d);
                const auto x = x_of(g, i, r, psi);
                CHECK(std::abs(xr) == doctest::Approx(std::abs(xp)).epsilon(1e-7));
                CHECK(std::abs(xr) == doctest::Approx(x.imag() / std::sin(psi)).epsilon(1e-7));
                const double v = g.ends[i].orbit->eval(r).v;
                const double c_oracle = std::pow(v, 2 / a) / std::norm(xr) - 1.0;
                CHECK(g.c_at_x(i, x.real(), x.imag()) == doctest::Approx(c_oracle).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("background correction: normalization, quadratic vanishing, blending") {
    const GluedGeometry& g = geometry(1e-3);
    for (int i = 0; i < 2; ++i) {
        CHECK(std::abs(g.c_at_x(i, 0, 0)) < 1e-12);
        const double d = 1e-4;
        const double gx = (g.c_at_x(i, d, 0) - g.c_at_x(i, -d, 0)) / (2 * d);
        const double gy = (g.c_at_x(i, 0, d) - g.c_at_x(i, 0, -d)) / (2 * d);
        CHECK(std::abs(gx) < 1e-6);
        CHECK(std::abs(gy) < 1e-6);
        for (double ang : {0.0, 0.6, 1.6, 2.8}) {
            const double r1 = 1e-2, r2 = 1e-3;
            const double c1 = std::abs(g.c_at_x(i, r1 * std::cos(ang), r1 * std::sin(ang)));
            const double c2 = std::abs(g.c_at_x(i, r2 * std::cos(ang), r2 * std::sin(ang)));
            const double slope = std::log(c1 / c2) / std::log(r1 / r2);
            CHECK(slope == doctest::Approx(2.0).epsilon(0.02));
            CHECK(c1 <= 2.0 * r1 * r1);
        }
    }
    const AxiSymField c = background_correction(g);
    double worst1 = 0, worst2 = 0;
    for (int it = 0; it < c.nt(); ++it) {
        const double t = c.t(it);
        for (int j = 0; j < c.np(); ++j) {
            const Jet2 tj = Jet2::var1(t), pj = Jet2::var2(c.psi(j));
            if (t <= -1) worst1 = std::max(worst1, std::abs(c(it, j) + 1 - g.one_plus_c_side(0, tj, pj).v));
            if (t >= 1) worst2 = std::max(worst2, std::abs(c(it, j) + 1 - g.one_plus_c_side(1, tj, pj).v));
            // |c| <= K |x|^2 on the respective half-neck, |x| = eps e^{-|t|} near the middle.
            CHECK(std::abs(c(it, j)) <= 2.0 * std::pow(1e-3 * std::exp(std::abs(t)), 2) + 1e-15);
        }
    }
    CHECK(worst1 == 0.0);
    CHECK(worst2 == 0.0);
}

TEST_CASE("cutoffs and neck profiles") {
    const GluedGeometry& g = geometry(1e-3);
    const double le = -std::log(1e-3), a = g.P.a_exp;
    CHECK(g.eta(-1).f == 1.0);
    CHECK(g.eta(1).f == 0.0);
    CHECK(g.eta(-5).f == 1.0);
    CHECK(g.chi(le - 1).f == 1.0);
    CHECK(g.chi(le).f == 0.0);
    CHECK(g.chi(-le + 0.1).f == 1.0);
    double prev = 2;
    for (int s = 0; s <= 400; ++s) {
        const double t = -2 + 4.0 * s / 400;
        CHECK(g.eta(t).f <= prev);
        prev = g.eta(t).f;
    }
    for (double t : {-6.0, -1.0, 0.0, 3.0}) {
        const double ax = 1e-3 * std::exp(-t);
        CHECK(g.u1(t).f == doctest::Approx(std::pow(ax, a)).epsilon(1e-13));
    }
    CHECK(g.u_eps(0).f == doctest::Approx(2 * std::pow(1e-3, a)).epsilon(1e-14));
    // Derivatives of u_eps against centered differences, including inside the chi transitions.
    for (double t : {-6.5, -3.0, 0.3, 6.2, 6.6}) {
        const double d = 1e-4;
        const auto p = g.u_eps(t), pp = g.u_eps(t + d), pm = g.u_eps(t - d);
        CHECK(p.f1 == doctest::Approx((pp.f - pm.f) / (2 * d)).epsilon(1e-6));
        CHECK(p.f2 == doctest::Approx((pp.f1 - pm.f1) / (2 * d)).epsilon(1e-5));
    }
}

TEST_CASE("approximate solution: positivity, identity outside the balls, chart consistency") {
    const GluedGeometry& g = geometry(1e-3);
    const ApproximateSolution A = approximate_solution(g);
    CHECK(A.max_interface_jump < g.neck.h * g.neck.h);
    for (int i = 0; i < A.neck_u.nt(); ++i) CHECK(A.neck_u(i, 0) > 0);
    for (int e = 0; e < 2; ++e) {
        const auto owned = end_owned_mask(g, e);
        const AxiSymField& u = A.end_u[e];
        int n_owned = 0, n_inner = 0;
        for (int i = 0; i < u.nt(); ++i) {
            for (int j = 0; j < u.np(); ++j) {
                const double ax = g.end_abs_x(e, u.t(i), u.psi(j));
                if (owned[std::size_t(i) * u.np() + j]) {
                    ++n_owned;
                    CHECK(u(i, j) == 1.0);
                } else if (ax >= g.cfg.hole_radius) {
                    ++n_inner;
                    CHECK(u(i, j) > 1.0);
                }
            }
        }
        CHECK(n_owned > 0);
        CHECK(n_inner > 0);
    }
    // On the overlap 1/2 <= |x| < 1 the end factor is the neck factor times the chart factor. g_bar is g_1
    // in the end chart and (1 + c) g_cyl in the neck chart, so N / u^p (u relative to the respective
    // background) is the chart-independent quantity.
    double worst_u = 0, worst_n = 0;
    const DimensionParams& P = g.P;
    for (int e = 0; e < 2; ++e) {
        for (double r : {2.2, 2.8, 3.3, 4.0, 4.5}) {
            for (double psi : {0.0, 0.4, 1.2, 2.5, M_PI}) {
                const double ax = g.end_abs_x(e, r, psi);
                if (ax < 0.5 || ax >= 1) continue;
                double t, pn;
                g.end_to_neck(e, r, psi, t, pn);
                const Jet2 ue = g.end_base(e, r, psi);
                const Jet2 un = g.neck_base(t, pn);
                worst_u = std::max(worst_u, std::abs(ue.v / (g.chart_factor(e, r, psi) * un.v) - 1));
                const bool pe = psi == 0 || psi == M_PI, pnp = pn < 1e-12 || pn > M_PI - 1e-12;
                const double Ne = std::pow(g.ends[e].orbit->eval(r).v, -P.p_exp) *
                                  residual_point(PointJet{ue.v, ue.d1, ue.d2, ue.d11, ue.d12, ue.d22}, psi, pe, P);
                const double Nn = std::pow(g.one_plus_c(t, pn).v, -0.5 * P.n) *
                                  residual_point(PointJet{un.v, un.d1, un.d2, un.d11, un.d12, un.d22}, pn, pnp, P);
                const double u_end = ue.v / g.ends[e].orbit->eval(r).v, u_neck = g.u_eps(t).f;
                worst_n = std::max(worst_n, std::abs(Ne / std::pow(u_end, P.p_exp) - Nn / std::pow(u_neck, P.p_exp)));
            }
        }
    }
    CHECK(worst_u < 1e-10);
    CHECK(worst_n < 1e-9);
}

TEST_CASE("residual: support, scaling along the ladder, cone membership") {
    const DimensionParams P(5, 2);
    const GlobalNormSpec spec = default_spec(P);
    std::vector<double> le, ln;
    for (double eps : {1e-2, 3e-3, 1e-3, 3e-4}) {
        const GluedGeometry& g = geometry(eps);
        const ResidualProfile R = residual_profile(approximate_solution(g), spec);
        CHECK(R.outside_max < 1e-12);
        CHECK(R.norm > 0);
        if (eps <= 1e-3) CHECK(R.cone_ok);
        le.push_back(std::log(eps));
        ln.push_back(std::log(R.norm));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < le.size(); ++i) mx += le[i] / le.size(), my += ln[i] / ln.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < le.size(); ++i) sxy += (le[i] - mx) * (ln[i] - my), sxx += (le[i] - mx) * (le[i] - mx);
    const double slope = sxy / sxx;
    CHECK(slope >= 0.8 * spec.gamma * (P.n - 2 * P.k) / P.n);
    CHECK_THROWS_AS(residual_profile(approximate_solution(geometry(1e-3)), GlobalNormSpec{0.5, 0.25, 5}), Error);
}

TEST_CASE("approximate metrics converge to the ends on a compact annulus") {
    double prev[2] = {1e300, 1e300};
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        const GluedGeometry& g = geometry(eps);
        for (int e = 0; e < 2; ++e) {
            const double d = metric_deviation_c2(g, e, end_compact_mask(g, e, 0.6));
            CHECK(d < prev[e]);
            prev[e] = d;
        }
    }
}

TEST_CASE("family parameters: zero is the straight solution, derivative is the cut-off Jacobi field") {
    const GluedGeometry& g = geometry(1e-3);
    FamilyState fam;
    fam.coeffs = DeficiencyCoeffs::zeros(g.P.n);
    CHECK(fam.coeffs.norm() == 0.0);
    for (double r : {-12.0, -9.0, 0.5, 9.0, 12.5}) {
        const Jet2 a = g.end_base(0, r, 0.7, &fam), b = g.end_base(0, r, 0.7);
        CHECK(a.v == b.v);
    }
    const double s = 1e-4;
    for (int side = 0; side < 2; ++side) {
        for (int j = 0; j < 2; ++j) {
            FamilyState fp, fm;
            fp.coeffs = fm.coeffs = DeficiencyCoeffs::zeros(g.P.n);
            auto& cp = side == 0 ? fp.coeffs.plus[1] : fp.coeffs.minus[1];
            auto& cm = side == 0 ? fm.coeffs.plus[1] : fm.coeffs.minus[1];
            cp[j] = s;
            cm[j] = -s;
            if (side == 1 && j == 0) {
                fp.shifted[1] = family_shift(g, 1, s);
                fm.shifted[1] = family_shift(g, 1, -s);
            }
            const double sg = side == 0 ? 1 : -1;
            for (double r : {g.ends[1].Rp - 0.5, g.ends[1].Rp + 0.3, g.ends[1].Rp + 2.0}) {
                for (double psi : {0.0, 1.0, 2.4}) {
                    const double fd = (g.end_base(1, sg * r, psi, &fp).v - g.end_base(1, sg * r, psi, &fm).v) / (2 * s);
                    const double an = g.deficiency_jet(1, side, j, sg * r, psi).v;
                    CHECK(std::abs(fd - an) <= 1e-5 * std::abs(an) + 1e-9);
                }
            }
        }
    }
    std::vector<double> ax = {1, 2, 3, 4, 5, 6, 7, 8};
    fam.coeffs.set_axial(ax);
    CHECK(fam.coeffs.axial() == ax);
    CHECK(fam.coeffs.norm() == 36.0);
    CHECK_THROWS_AS(g.deficiency_jet(0, 0, 2, 10.0, 0.1), Error);
}
