#include "sigmak/verify.hpp"

#include "sigmak/cylsolve.hpp"
#include "sigmak/errors.hpp"
#include "sigmak/jacobi.hpp"
#include "sigmak/linop.hpp"
#include "sigmak/newton.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <sstream>

namespace sigmak {

namespace {

using Clock = std::chrono::steady_clock;
using Vec = CompositeSystem::Vec;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double x) {
    std::ostringstream s;
    s.precision(3);
    s << x;
    return s.str();
}

// Collects sub-checks; the criterion passes when every one does.
struct Report {
    CriterionResult r;
    std::ostringstream line;
    bool first = true;

    Report(int id, std::string title) {
        r.id = id;
        r.title = std::move(title);
        r.pass = true;
    }
    void check(const std::string& name, double value, const std::string& rel, double bound) {
        bool ok = false;
        if (rel == "<=") ok = value <= bound;
        else if (rel == "<") ok = value < bound;
        else if (rel == ">=") ok = value >= bound;
        else if (rel == ">") ok = value > bound;
        else if (rel == "==") ok = value == bound;
        ok = ok && std::isfinite(value);
        r.pass = r.pass && ok;
        r.values.emplace_back(name, value);
        line << (first ? "" : "; ") << name << " " << fmt(value) << " " << rel << " " << fmt(bound) << (ok ? "" : " (fails)");
        first = false;
    }
    void fail(const std::string& why) {
        r.pass = false;
        line << (first ? "" : "; ") << why;
        first = false;
    }
    void note(const std::string& s) { r.notes.push_back(s); }
    CriterionResult done(Clock::time_point t0) {
        r.detail = line.str();
        r.seconds = seconds_since(t0);
        return r;
    }
};

GlobalNormSpec default_spec(const DimensionParams& P) {
    GlobalNormSpec s;
    s.delta = 0.5 * (1 + P.delta_bar());
    s.gamma = P.a_exp;
    s.n = P.n;
    return s;
}

struct Built {
    GluedGeometry geo;
    std::unique_ptr<CompositeSystem> sys;
};

std::unique_ptr<Built> build(double eps, const VerifyOptions& opt) {
    auto b = std::make_unique<Built>();
    GlueConfig c;
    c.n = opt.n;
    c.k = opt.k;
    c.epsilon = eps;
    b->geo = build_geometry(c);
    b->sys = std::make_unique<CompositeSystem>(b->geo, default_spec(b->geo.P));
    return b;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i] / x.size(), my += y[i] / y.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
    return sxy / sxx;
}

AxiSymField radial_samples(double t0, double t1, int nt, int np, const std::function<double(double)>& f) {
    AxiSymField u(nt, np, t0, (t1 - t0) / (nt - 1));
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < np; ++j) u(i, j) = f(u.t(i));
    return u;
}

double interior_sup(const AxiSymField& r) {
    double m = 0;
    for (int i = 1; i < r.nt() - 1; ++i)
        for (int j = 0; j < r.np(); ++j) m = std::max(m, std::abs(r(i, j)));
    return m;
}

// ---------------------------------------------------------------------------------------------

CriterionResult delaunay_conservation(const VerifyOptions& opt) {
    const auto t0 = Clock::now();
    Report rep(1, "Delaunay conservation");
    double drift = 0, period = 0, vmin = 1e300, vmax = -1e300;
    for (auto nk : {std::pair{opt.n, opt.k}, std::pair{5, 1}, std::pair{7, 3}}) {
        const DimensionParams P(nk.first, nk.second);
        for (int i = 1; i <= 10; ++i) {
            const double eta = P.eta_sup() * i / 11.0;
            const DelaunayOrbit o = solve_orbit(eta, P);
            const Trajectory tr = integrate_trajectory(eta, P, 10 * o.T, o.T / 200);
            for (std::size_t q = 0; q < tr.t.size(); ++q) {
                drift = std::max(drift, std::abs(hamiltonian(tr.v[q], tr.vd[q], P) - o.H0) / o.H0);
                vmin = std::min(vmin, tr.v[q]);
                vmax = std::max(vmax, tr.v[q]);
            }
            period = std::max(period, std::hypot(tr.v.back() - o.v[0], tr.vd.back()));
            const OrbitPoint e = o.eval(o.T);
            period = std::max(period, std::hypot(e.v - o.v[0], e.vd));
        }
    }
    rep.check("relative H drift over 10 periods", drift, "<=", 1e-7);
    rep.check("periodicity defect", period, "<=", 1e-6);
    rep.check("min v", vmin, ">", 0);
    rep.check("1 - max v", 1 - vmax, ">", 0);
    rep.check("runtime s", seconds_since(t0), "<=", 10);
    rep.note("10 eta values in (0, eta_sup) for (n,k) = (5,2), (5,1), (7,3)");
    return rep.done(t0);
}

CriterionResult closed_form_anchors(const VerifyOptions& opt) {
    const auto t0 = Clock::now();
    Report rep(2, "closed-form anchors");
    const DimensionParams P(opt.n, opt.k);
    const double n = P.n, k = P.k;
    const double H_eq = (2 * k / (n - 2 * k)) * std::pow((n - 2 * k) / n, n / (2 * k));
    rep.check("|H(v_cyl) - closed form| rel", std::abs(hamiltonian(P.v_cyl(), 0.0, P) - H_eq) / H_eq, "<=", 1e-12);

    const SchwarzschildProfile S = schwarzschild_profile(0.3, 0.2, P);
    double hdev = 0;
    for (int i = 0; i <= 400; ++i) {
        const double t = -4 + 0.02 * i;
        hdev = std::max(hdev, std::abs(S.h(t) - S.h(0)) / std::abs(S.h(0)));
    }
    rep.check("Schwarzschild h variation", hdev, "<=", 1e-12);

    // sigma_k-flat residual on [-2, 2] at 200, 400, 800 steps.
    double err[3];
    for (int lev = 0; lev < 3; ++lev) {
        const int nt = 200 * (1 << lev) + 1;
        const AxiSymField u = radial_samples(-2, 2, nt, 9, [&](double t) { return S.eval(t).v; });
        err[lev] = interior_sup(nonlinear_residual(u, nullptr, P, 0.0));
    }
    rep.check("sup sigma_k(B) at 200 steps", err[0], "<=", 1e-5);
    rep.check("refinement order", std::log2(err[1] / err[2]), ">=", 1.9);
    return rep.done(t0);
}

CriterionResult jacobi_suite(const VerifyOptions& opt) {
    const auto t0 = Clock::now();
    Report rep(3, "Jacobi kernel suite");
    const DimensionParams P(opt.n, opt.k);
    const DelaunayOrbit o = solve_orbit(0.75 * P.eta_sup(), P);
    const auto fields = jacobi_fields(o);
    if (int(fields.size()) != 2 * P.n + 2) rep.fail("wrong number of Jacobi fields");
    double worst = 0, order = 1e300;
    for (const auto& f : fields) {
        const double e0 = kernel_residual(f, o.T / 200), e1 = kernel_residual(f, o.T / 400), e2 = kernel_residual(f, o.T / 800);
        worst = std::max(worst, e0);
        order = std::min(order, std::log2(e1 / e2));
    }
    rep.check("max |L[Psi]| at T/200", worst, "<=", 1e-4);
    rep.check("min refinement order", order, ">=", 1.9);

    std::vector<double> t;
    for (int i = 0; i <= 2000; ++i) t.push_back(10 * o.T * i / 2000.0);
    double slope_err = 0;
    for (const auto& f : fields) {
        if (f.j == 0) continue;
        std::vector<double> y;
        for (double tt : t) y.push_back(f.profile(tt).f);
        const double want = f.kind == JacobiKind::Plus ? -1.0 : 1.0;
        slope_err = std::max(slope_err, std::abs(measure_decay_rate(t, y, 0, 10 * o.T) - want));
    }
    rep.check("max |tail slope -+ 1| over j-families", slope_err, "<=", 0.05);

    // Homogeneous decaying solution of the first high band: zero data far out, one at t = 0.
    const double lam = sphere_eigenvalue(2, P.n);
    const double len = 12 * o.T;
    const double h = o.T / 400;
    UniformGrid g{0.0, h, int(std::lround(len / h)) + 1};
    const auto z = solve_mode_dirichlet(o, lam, [](double) { return 0.0; }, g, 1.0, 0.0);
    std::vector<double> tt(g.N), zz(g.N);
    for (int i = 0; i < g.N; ++i) tt[i] = g.t(i), zz[i] = std::abs(z[i]);
    const double rate = -measure_decay_rate(tt, zz, 2 * o.T, 8 * o.T);
    rep.check("first high band decay rate - delta_bar", rate - P.delta_bar(), ">=", -0.1);
    rep.note("decay rate " + fmt(rate) + ", delta_bar " + fmt(P.delta_bar()) + " at eta = " + fmt(o.eta));
    return rep.done(t0);
}

// w(t, psi) = A sin(w1 t + ph) + B cos(w2 t) cos(psi) + C cos(psi)^2 with its exact jet.
struct Direction {
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

CriterionResult linearization_consistency(const VerifyOptions& opt) {
    const auto t0 = Clock::now();
    Report rep(4, "linearization consistency");
    const DimensionParams P(opt.n, opt.k);
    const DelaunayOrbit o = solve_orbit(0.7 * P.eta_sup(), P);
    const SchwarzschildProfile S = schwarzschild_profile(0.4, 0.3, P);
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> U(-1, 1);
    double lo = 1e300, hi = -1e300;
    auto radial = [](const OrbitPoint& p) {
        PointJet J;
        J.u = p.v;
        J.ut = p.vd;
        J.utt = p.vdd;
        return J;
    };
    for (int trial = 0; trial < 20; ++trial) {
        const Direction d{U(rng), 1 + U(rng), U(rng), U(rng), 1 + U(rng), U(rng)};
        const double t = 2 * U(rng), psi = 1.5 + U(rng);
        for (int which = 0; which < 2; ++which) {
            const PointJet uj = radial(which ? S.eval(t) : o.eval(t));
            const double rs = which ? 0.0 : 1.0;
            const PointJet wj = d.jet(t, psi);
            const double L = which ? schwarzschild_linearized_point(S, t, wj, psi, false)
                                   : linearized_point(o.eval(t), wj, psi, false, P);
            auto err = [&](double s) {
                PointJet p{uj.u + s * wj.u, uj.ut + s * wj.ut, uj.up + s * wj.up, uj.utt + s * wj.utt, uj.utp + s * wj.utp,
                           uj.upp + s * wj.upp};
                return std::abs((residual_point(p, psi, false, P, rs) - residual_point(uj, psi, false, P, rs)) / s - L);
            };
            const double ratio = err(1e-4) / err(5e-5);
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
    }
    rep.check("min error ratio", lo, ">=", 1.8);
    rep.check("max error ratio", hi, "<=", 2.2);
    rep.note("20 random directions on a Delaunay and a Schwarzschild base point, s = 1e-4 and 5e-5");
    return rep.done(t0);
}

CriterionResult solver_equivalence(const VerifyOptions& opt) {
    const auto t0 = Clock::now();
    Report rep(5, "linear solver oracle equivalence");
    const DimensionParams P(opt.n, opt.k);
    const DelaunayOrbit o = solve_orbit(0.75 * P.eta_sup(), P);
    StabilizationControl sc;
    sc.spec.flavor = WeightedNormSpec::Flavor::End;
    sc.spec.delta = -1.5;
    // Manufactured z*(t) = e^{-2s} - e^{-3s}, s = t - R, in the half-cylinder bands.
    auto zs = [](double s) { return std::exp(-2 * s) - std::exp(-3 * s); };
    auto zspp = [](double s) { return 4 * std::exp(-2 * s) - 9 * std::exp(-3 * s); };
    const double Rh = select_interface_radius(o, 2.0, 0.0, o.T / 200);
    double order_half = 1e300, zero_max = 0;
    for (int band : {0, 1, 2, 3}) {
        const double lam = sphere_eigenvalue(band, P.n);
        auto y = [&](double t) { return zspp(t - Rh) - mode_potential(o, lam, t) * zs(t - Rh); };
        double err[2];
        for (int r = 0; r < 2; ++r) {
            const double h = o.T / (200 << r);
            const ModeSolution s = band < 2 ? solve_mode_low(band, y, o, Rh, h, sc) : solve_mode_high(band, y, o, Rh, h, sc);
            double e = 0;
            for (int i = 0; i < s.grid.N; ++i) e = std::max(e, std::abs(s.z[i] - zs(s.grid.t(i) - Rh)));
            err[r] = e;
        }
        order_half = std::min(order_half, std::log2(err[0] / err[1]));
        const auto zero = band < 2 ? solve_mode_low(band, [](double) { return 0.0; }, o, Rh, o.T / 200, sc)
                                   : solve_mode_high(band, [](double) { return 0.0; }, o, Rh, o.T / 200, sc);
        for (double x : zero.z) zero_max = std::max(zero_max, std::abs(x));
    }
    rep.check("half-cylinder order", order_half, ">=", 1.9);

    const PsiBasis B = PsiBasis::discrete(P.n, 25, 4);
    double errf[2];
    for (int r = 0; r < 2; ++r) {
        const double h = o.T / (200 << r);
        const double R = select_interface_radius(o, 4.0, 0.0, h);
        const int N = int(std::lround(2 * R / h)) + 1;
        const UniformGrid g{-R, h, N};
        SpectralField rhs = SpectralField::zeros(g, B);
        const double kk = M_PI / (2 * R);
        for (int m = 0; m < B.modes(); ++m)
            for (int i = 0; i < N; ++i) {
                const double t = g.t(i);
                rhs.coeff[m][i] = -kk * kk * std::cos(kk * t) - mode_potential(o, B.lambda(m), t) * std::cos(kk * t);
            }
        const SpectralField z = solve_finite(rhs, o, R);
        double e = 0;
        for (int m = 0; m < B.modes(); ++m)
            for (int i = 0; i < N; ++i) e = std::max(e, std::abs(z.coeff[m][i] - std::cos(kk * g.t(i))));
        errf[r] = e;
        if (r == 0) {
            const SpectralField z0 = solve_finite(SpectralField::zeros(g, B), o, R);
            for (const auto& c : z0.coeff)
                for (double x : c) zero_max = std::max(zero_max, std::abs(x));
        }
    }
    rep.check("finite-cylinder order", std::log2(errf[0] / errf[1]), ">=", 1.9);

    // Global solve at eps = 1e-3: injectivity and the interface-decomposition path on random sides.
    const auto bs = build(1e-3, opt);
    const CompositeSystem& sys = *bs->sys;
    const GluedGeometry& geo = bs->geo;
    const LinearSolution z = global_linear_solve(sys, sys.corrections(Vec::Zero(sys.size())));
    zero_max = std::max(zero_max, z.U.lpNorm<Eigen::Infinity>());
    rep.check("max |solution| for f = 0", zero_max, "==", 0);
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> U(-1, 1);
    double worst_rel = 0, worst_abs = 0;
    for (int trial = 0; trial < 5; ++trial) {
        CompositeField f = sys.corrections(Vec::Zero(sys.size()));
        const double c0 = 4 * U(rng), c1 = 4 * U(rng), cn = 2 * U(rng), a0 = U(rng), a1 = U(rng), an = U(rng),
                     m1 = U(rng);
        for (int e = 0; e < 2; ++e) {
            const double c = e == 0 ? c0 : c1, a = e == 0 ? a0 : a1;
            for (int i = 0; i < geo.ends[e].Nr; ++i)
                for (int j = 0; j < geo.np; ++j) {
                    const double s = geo.ends[e].r(i) - c;
                    f.end[e](i, j) = a * std::exp(-s * s) * (1 + m1 * std::cos(j * geo.hp()));
                }
        }
        for (int i = 0; i < geo.neck.N; ++i)
            for (int j = 0; j < geo.np; ++j) {
                const double s = geo.neck.t(i) - cn;
                f.neck(i, j) = 1e-3 * an * std::exp(-s * s) * (1 + m1 * std::cos(j * geo.hp()));
            }
        const Vec b = sys.rhs_from(f);
        const DtnReport d = dtn_maps(sys, b);
        const Vec x = sys.solve(b);
        const double diff = sys.w_norm(d.x - x);
        worst_abs = std::max(worst_abs, diff);
        worst_rel = std::max(worst_rel, diff / sys.w_norm(x));
    }
    rep.check("two-path weighted difference (relative)", worst_rel, "<=", 1e-6);
    rep.note("two-path absolute weighted difference " + fmt(worst_abs) + " on solutions of weighted size up to ~1e6");
    return rep.done(t0);
}

CriterionResult residual_scaling(const VerifyOptions& opt) {
    const auto t0 = Clock::now();
    Report rep(6, "residual scaling");
    std::vector<double> le, ln;
    double outside = 0, expo = 0;
    for (double eps : {1e-2, 3e-3, 1e-3, 3e-4}) {
        GlueConfig c;
        c.n = opt.n;
        c.k = opt.k;
        c.epsilon = eps;
        const GluedGeometry g = build_geometry(c);
        const GlobalNormSpec spec = default_spec(g.P);
        expo = spec.gamma * (g.P.n - 2 * g.P.k) / g.P.n;
        const ResidualProfile R = residual_profile(approximate_solution(g), spec);
        outside = std::max(outside, R.outside_max);
        le.push_back(std::log(eps));
        ln.push_back(std::log(R.norm));
    }
    const double slope = fit_slope(le, ln);
    rep.check("fitted slope", slope, ">=", 0.8 * expo);
    rep.check("max |N| outside the balls", outside, "<=", 1e-12);
    rep.check("runtime s", seconds_since(t0), "<=", 120);
    rep.note("expected exponent gamma (n-2k)/n = " + fmt(expo) + "; outside values are floating-point round-off of an exact zero");
    return rep.done(t0);
}

CriterionResult uniform_constants(const VerifyOptions& opt) {
    const auto t0 = Clock::now();
    Report rep(7, "eps-uniform constants");
    double cmin = 1e300, cmax = 0;
    std::ostringstream cs;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        const auto b = build(eps, opt);
        const MeasuredConstants mc = measure_constants(*b->sys);
        cmin = std::min(cmin, mc.C);
        cmax = std::max(cmax, mc.C);
        cs << (eps == 1e-2 ? "" : ", ") << "C(" << eps << ") = " << fmt(mc.C);
    }
    rep.check("C max/min over the ladder", cmax / cmin, "<=", 2);
    const DimensionParams P(opt.n, opt.k);
    double margin = 1e300;
    for (int i = 1; i <= 10; ++i) margin = std::min(margin, coercivity_margin(solve_orbit(P.eta_sup() * i / 11.0, P)));
    rep.check("min coercivity margin over 10 eta", margin, ">", 0);
    rep.note(cs.str());
    return rep.done(t0);
}

// Solution on M_eps by the fixed-point scheme, falling back to Newton's method.
struct Solved {
    std::unique_ptr<Built> b;
    SolutionBundle sol;
    std::string how;
    bool ok = false;
};

Solved solve_any(double eps, const VerifyOptions& opt) {
    Solved s;
    s.b = build(eps, opt);
    try {
        s.sol = newton_solve(*s.b->sys);
        s.how = "fixed-point scheme";
        s.ok = true;
        return s;
    } catch (const Error& e) {
        s.how = std::string("fixed-point scheme: ") + e.what();
    }
    try {
        NewtonControl ctl;
        ctl.relinearize = true;
        s.sol = newton_solve(*s.b->sys, ctl);
        s.how += "; solved by Newton's method";
        s.ok = true;
    } catch (const Error& e) {
        s.how += std::string("; Newton's method: ") + e.what();
    }
    return s;
}

CriterionResult newton_convergence(const VerifyOptions& opt) {
    const auto t0 = Clock::now();
    Report rep(8, "Newton convergence at eps = 1e-3");
    const double eps = 1e-3;
    const auto b = build(eps, opt);
    const CompositeSystem& sys = *b->sys;
    const DimensionParams& P = b->geo.P;
    const MeasuredConstants mc = measure_constants(sys);
    const double bound = mc.A * mc.L * std::pow(eps, (sys.spec().gamma + 2) * (P.n - 2 * P.k) / P.n);
    const double w1 = sys.w_norm(sys.solve(-sys.residual(Vec::Zero(sys.size()))));
    rep.check("||w_1||", w1, "<=", bound);
    try {
        const SolutionBundle s = newton_solve(sys);
        double cmax = 0, wmax = 0;
        for (double c : s.contraction) cmax = std::max(cmax, c);
        for (double w : s.iterate_norms) wmax = std::max(wmax, w);
        rep.check("max contraction after the first iterate", cmax, "<", 0.5);
        rep.check("final weighted residual", s.final_residual, "<=", 1e-8);
        rep.check("min conformal factor", s.min_factor, ">", 0);
        rep.check("max ||w_j||", wmax, "<=", 2 * bound);
    } catch (const Error& e) {
        rep.fail(std::string("fixed-point iteration failed: ") + e.what());
    }
    rep.check("runtime s", seconds_since(t0), "<=", 600);
    rep.note("A = " + fmt(mc.A) + ", L = " + fmt(mc.L) + ", A L eps^{(gamma+2)(n-2k)/n} = " + fmt(bound) +
             "; the consistent bound L ||N(u_eps)|| = " + fmt(mc.L * mc.residual_norm));
    NewtonControl ctl;
    ctl.relinearize = true;
    try {
        const SolutionBundle s = newton_solve(sys, ctl);
        double cmax = 0;
        for (double c : s.contraction) cmax = std::max(cmax, c);
        rep.note("Newton's method at eps = 1e-3: " + std::to_string(s.iterations) + " iterations, final residual " +
                 fmt(s.final_residual) + ", max step ratio " + fmt(cmax) + ", min factor " + fmt(s.min_factor) +
                 ", sigma_k defect on the ends " + fmt(s.sigma_defect));
    } catch (const Error& e) {
        rep.note(std::string("Newton's method at eps = 1e-3 failed: ") + e.what());
    }
    const Eps0Scan scan = scan_eps0({1e-3, 3e-4, 1e-4});
    std::ostringstream sc;
    sc << "empirical eps_0 = " << scan.eps0 << " (";
    for (std::size_t i = 0; i < scan.ladder.size(); ++i)
        sc << (i ? ", " : "") << scan.ladder[i] << ": " << scan.outcome[i];
    sc << ")";
    rep.note(sc.str());
    return rep.done(t0);
}

CriterionResult convergence_to_ends(const VerifyOptions& opt) {
    const auto t0 = Clock::now();
    Report rep(9, "convergence to the ends");
    auto deviations = [&](const std::vector<double>& ladder, std::vector<std::string>& how) {
        std::vector<std::array<double, 2>> d;
        for (double eps : ladder) {
            Solved s = solve_any(eps, opt);
            how.push_back(s.how);
            if (!s.ok) {
                d.push_back({std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()});
                const GluedGeometry& g = s.b->geo;
                how.back() += "; approximate metric deviation " + fmt(metric_deviation_c2(g, 0, end_compact_mask(g, 0, 0.6)));
                continue;
            }
            const GluedGeometry& g = s.b->geo;
            const FamilyState fam = s.b->sys->family(s.sol.U);
            std::array<double, 2> de{};
            for (int e = 0; e < 2; ++e)
                de[e] = metric_deviation_c2(g, e, end_compact_mask(g, e, 0.6), &fam, &s.sol.w_hat.end[e]);
            d.push_back(de);
        }
        return d;
    };
    std::vector<std::string> how;
    const std::vector<double> ladder = {1e-2, 1e-3, 1e-4};
    const auto d = deviations(ladder, how);
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        if (std::isnan(d[i][0])) {
            std::ostringstream m;
            m << "no solution at eps = " << ladder[i];
            rep.fail(m.str());
        }
        rep.note("eps = " + fmt(ladder[i]) + ": " + how[i]);
    }
    for (int e = 0; e < 2; ++e) {
        std::ostringstream m;
        m << "end " << e + 1 << " C2 deviation:";
        for (std::size_t i = 0; i < ladder.size(); ++i) m << " " << fmt(d[i][e]);
        rep.note(m.str());
        bool mono = true;
        for (std::size_t i = 1; i < ladder.size(); ++i) mono = mono && d[i][e] < d[i - 1][e];
        rep.check("end " + std::to_string(e + 1) + " monotone decrease", mono ? 1 : 0, "==", 1);
    }
    // Where solutions exist the trend is the same.
    std::vector<std::string> how2;
    const std::vector<double> ladder2 = {3e-3, 1e-3, 1e-4};
    const auto d2 = deviations(ladder2, how2);
    std::ostringstream m;
    m << "supplementary ladder 3e-3, 1e-3, 1e-4, end 1 C2 deviation:";
    for (const auto& x : d2) m << " " << fmt(x[0]);
    rep.note(m.str());
    return rep.done(t0);
}

}  // namespace

CriterionResult run_criterion(int id, const VerifyOptions& opt) {
    switch (id) {
        case 1: return delaunay_conservation(opt);
        case 2: return closed_form_anchors(opt);
        case 3: return jacobi_suite(opt);
        case 4: return linearization_consistency(opt);
        case 5: return solver_equivalence(opt);
        case 6: return residual_scaling(opt);
        case 7: return uniform_constants(opt);
        case 8: return newton_convergence(opt);
        case 9: return convergence_to_ends(opt);
        default: throw argument_error("criterion id must be in 1..9");
    }
}

Eps0Scan scan_eps0(const std::vector<double>& ladder) {
    Eps0Scan out;
    out.ladder = ladder;
    for (double eps : ladder) {
        const auto b = build(eps, {});
        try {
            const SolutionBundle s = newton_solve(*b->sys);
            double cmax = 0;
            for (double c : s.contraction) cmax = std::max(cmax, c);
            out.max_contraction.push_back(cmax);
            out.outcome.push_back("converged, max ratio " + fmt(cmax));
            if (cmax < 0.5 && eps > out.eps0) out.eps0 = eps;
        } catch (const Error& e) {
            out.max_contraction.push_back(std::numeric_limits<double>::quiet_NaN());
            out.outcome.push_back("diverged");
        }
    }
    return out;
}

}  // namespace sigmak
