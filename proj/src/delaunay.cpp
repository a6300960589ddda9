#include "sigmak/delaunay.hpp"

#include "sigmak/errors.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace sigmak {

namespace odeint = boost::numeric::odeint;

double hamiltonian(double v, double vdot, const DimensionParams& P) {
    if (!(v > 0.0)) throw domain_error("hamiltonian: v must be positive");
    const double h = v * v - P.c_exp * P.c_exp * vdot * vdot;
    if (!(h > 0.0)) throw domain_error("hamiltonian: v^2 - c^2 vdot^2 <= 0, orbit left the admissible region");
    return std::pow(h, P.k) - std::pow(v, P.p_exp);
}

double delaunay_rhs(double v, double vdot, const DimensionParams& P) {
    const double c2 = P.c_exp * P.c_exp;
    const double h = v * v - c2 * vdot * vdot;
    const double q = double(P.n) / (P.n - 2 * P.k);
    return (v - q * std::pow(v, P.p_exp - 1) * std::pow(h, 1 - P.k)) / c2;
}

void delaunay_rhs_partials(double v, double vdot, const DimensionParams& P, double& fv, double& fvd) {
    const double c2 = P.c_exp * P.c_exp;
    const double h = v * v - c2 * vdot * vdot;
    const double q = double(P.n) / (P.n - 2 * P.k);
    const double k = P.k, p = P.p_exp;
    const double A = std::pow(v, p - 1), Hm = std::pow(h, 1 - k);
    const double dA = (p - 1) * std::pow(v, p - 2);
    const double dHm = (1 - k) * std::pow(h, -k);  // d/dh of h^{1-k}
    fv = (1.0 - q * (dA * Hm + A * dHm * 2 * v)) / c2;
    fvd = (-q * A * dHm * (-2 * c2 * vdot)) / c2;
}

double H0_of_eta(double eta, const DimensionParams& P) {
    const double v0 = std::pow(eta, P.a_exp);
    return std::pow(v0, 2 * P.k) - std::pow(v0, P.p_exp);
}

double equilibrium_frequency(const DimensionParams& P) {
    double fv, fvd;
    delaunay_rhs_partials(P.v_cyl(), 0.0, P, fv, fvd);
    return std::sqrt(-fv);
}

namespace {

using State = std::array<double, 4>;

struct System {
    DimensionParams P;
    void operator()(const State& x, State& dx, double) const {
        double fv, fvd;
        delaunay_rhs_partials(x[0], x[1], P, fv, fvd);
        dx[0] = x[1];
        dx[1] = delaunay_rhs(x[0], x[1], P);
        dx[2] = x[3];
        dx[3] = fv * x[2] + fvd * x[3];
    }
};

void check_eta(double eta, const DimensionParams& P) {
    if (!(eta > 0.0 && eta < P.eta_sup()))
        throw argument_error("eta = " + std::to_string(eta) + " outside the admissible window (0, ((n-2k)/n)^(1/(2k))) = (0, " +
                             std::to_string(P.eta_sup()) + ")");
}

State initial_state(double eta, const DimensionParams& P) {
    const double a = P.a_exp;
    const double v0 = std::pow(eta, a);
    if (!(delaunay_rhs(v0, 0.0, P) > 0.0))
        throw argument_error("initial point is not a minimum (vddot(0) <= 0)");
    return {v0, 0.0, a * std::pow(eta, a - 1.0), 0.0};
}

// Cubic Hermite on [0,1] with values f0,f1 and scaled slopes m0,m1.
inline double hermite(double s, double f0, double f1, double m0, double m1) {
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * f0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * f1 + (s3 - s2) * m1;
}

DelaunayOrbit try_solve(double eta, const DimensionParams& P, const StepControl& sc) {
    System sys{P};
    auto stepper = odeint::make_dense_output(sc.abs_tol, sc.rel_tol, odeint::runge_kutta_dopri5<State>());
    State x = initial_state(eta, P);
    stepper.initialize(x, 0.0, 1e-3);
    // Advance until vdot crosses zero upward after having been negative.
    bool seen_negative = false;
    double T = -1;
    State xs;
    for (int guard = 0; guard < 10000000; ++guard) {
        stepper.do_step(sys);
        const double t1 = stepper.current_time();
        const State& cur = stepper.current_state();
        if (cur[1] < 0) seen_negative = true;
        if (seen_negative && cur[1] >= 0) {
            double lo = stepper.previous_time(), hi = t1;
            while (hi - lo > 1e-10) {
                const double mid = 0.5 * (lo + hi);
                stepper.calc_state(mid, xs);
                (xs[1] < 0 ? lo : hi) = mid;
            }
            T = 0.5 * (lo + hi);
            break;
        }
        if (t1 > 1e4) break;
    }
    if (!(T > 0)) throw accuracy_error("period detection failed for eta = " + std::to_string(eta));

    // Refine the period and resample with a fixed-step integrator: equal RK78 steps of size T/(4N) make
    // the samples and T smooth functions of eta, which the family evaluations differentiate through.
    const int N = sc.samples_per_period;
    constexpr int sub = 4;
    odeint::runge_kutta_fehlberg78<State> rk;
    auto sweep = [&](double Tc, DelaunayOrbit* rec) {
        State x = initial_state(eta, P);
        const double h = Tc / (double(N) * sub);
        for (int i = 0; i < N; ++i) {
            if (rec) {
                rec->t[i] = Tc * double(i) / N;
                rec->v[i] = x[0];
                rec->vd[i] = x[1];
                rec->w[i] = x[2];
                rec->wd[i] = x[3];
            }
            for (int q = 0; q < sub; ++q) rk.do_step(sys, x, (i * sub + q) * h, h);
        }
        return x;
    };
    for (int it = 0; it < 20; ++it) {
        const State x = sweep(T, nullptr);
        const double dT = -x[1] / delaunay_rhs(x[0], x[1], P);
        T += dT;
        if (std::abs(dT) <= 4e-16 * T) break;
    }

    DelaunayOrbit o;
    o.params = P;
    o.eta = eta;
    o.T = T;
    o.H0 = H0_of_eta(eta, P);
    o.t.resize(N + 1);
    o.v.resize(N + 1);
    o.vd.resize(N + 1);
    o.w.resize(N + 1);
    o.wd.resize(N + 1);
    const State sT = sweep(T, &o);
    o.t[N] = T;
    o.v[N] = sT[0];
    o.vd[N] = sT[1];
    o.w[N] = sT[2];
    o.wd[N] = sT[3];
    // v(t + T(eta); eta) = v(t; eta) gives d/deta v(T) + vddot(T) T'(eta) = ... at the minimum.
    o.dT_deta = -sT[3] / delaunay_rhs(sT[0], sT[1], P);
    return o;
}

}  // namespace

OrbitPoint DelaunayOrbit::eval(double tt) const {
    double m = std::floor(tt / T);
    double s = tt - m * T;
    if (s < 0) s = 0;
    if (s >= T) s = T;
    const int N = int(t.size()) - 1;
    const double hs = T / N;
    int i = int(s / hs);
    if (i >= N) i = N - 1;
    const double u = (s - i * hs) / hs;
    OrbitPoint p;
    const double f0 = delaunay_rhs(v[i], vd[i], params), f1 = delaunay_rhs(v[i + 1], vd[i + 1], params);
    p.v = hermite(u, v[i], v[i + 1], vd[i] * hs, vd[i + 1] * hs);
    p.vd = hermite(u, vd[i], vd[i + 1], f0 * hs, f1 * hs);
    p.vdd = delaunay_rhs(p.v, p.vd, params);
    double fv, fvd;
    delaunay_rhs_partials(p.v, p.vd, params, fv, fvd);
    p.vddd = fv * p.vd + fvd * p.vdd;
    return p;
}

OrbitPoint DelaunayOrbit::eval_eta_derivative(double tt) const {
    const double m = std::floor(tt / T);
    double s = tt - m * T;
    if (s < 0) s = 0;
    const int N = int(t.size()) - 1;
    const double hs = T / N;
    int i = int(s / hs);
    if (i >= N) i = N - 1;
    const double u = (s - i * hs) / hs;
    auto wdd = [&](int j) {
        double fv, fvd;
        delaunay_rhs_partials(v[j], vd[j], params, fv, fvd);
        return fv * w[j] + fvd * wd[j];
    };
    OrbitPoint base = eval(s);
    double fv, fvd;
    delaunay_rhs_partials(base.v, base.vd, params, fv, fvd);
    OrbitPoint p;
    p.v = hermite(u, w[i], w[i + 1], wd[i] * hs, wd[i + 1] * hs);
    p.vd = hermite(u, wd[i], wd[i + 1], wdd(i) * hs, wdd(i + 1) * hs);
    p.vdd = fv * p.v + fvd * p.vd;
    // Secular part from the eta-dependence of the period.
    p.v -= m * dT_deta * base.vd;
    p.vd -= m * dT_deta * base.vdd;
    p.vdd -= m * dT_deta * base.vddd;
    return p;
}

double DelaunayOrbit::h(double tt) const {
    const OrbitPoint p = eval(tt);
    return p.v * p.v - params.c_exp * params.c_exp * p.vd * p.vd;
}

double DelaunayOrbit::F(double tt) const {
    const OrbitPoint p = eval(tt);
    const double vp = std::pow(p.v, params.p_exp);
    return vp / (H0 + vp);
}

double DelaunayOrbit::max_v() const {
    double m = 0;
    for (double x : v) m = std::max(m, x);
    return m;
}

double DelaunayOrbit::min_v() const {
    double m = 1e300;
    for (double x : v) m = std::min(m, x);
    return m;
}

double DelaunayOrbit::max_drift() const {
    double d = 0;
    for (std::size_t i = 0; i < v.size(); ++i) d = std::max(d, std::abs(hamiltonian(v[i], vd[i], params) - H0));
    return d / std::abs(H0);
}

DelaunayOrbit solve_orbit(double eta, const DimensionParams& P, const StepControl& sc) {
    check_eta(eta, P);
    StepControl s = sc;
    for (int attempt = 0; attempt < 3; ++attempt) {
        DelaunayOrbit o = try_solve(eta, P, s);
        if (o.max_drift() <= sc.drift_tol) {
            for (double x : o.v)
                if (!(x > 0.0 && x < 1.0)) throw accuracy_error("orbit left (0,1)");
            return o;
        }
        s.abs_tol *= 1e-2;
        s.rel_tol *= 1e-2;
    }
    throw accuracy_error("Hamiltonian drift above " + std::to_string(sc.drift_tol) + " for eta = " + std::to_string(eta));
}

namespace {

// delta'' = f(v + delta, v' + delta') - f(v, v') along the base orbit.
double shift_rhs(const DelaunayOrbit& o, double t, double d, double dd) {
    const OrbitPoint p = o.eval(t);
    return delaunay_rhs(p.v + d, p.vd + dd, o.params) - p.vdd;
}

}  // namespace

OrbitShift shift_orbit(std::shared_ptr<const DelaunayOrbit> base, double d_eta, double t_min, double t_max) {
    if (!base) throw argument_error("shift_orbit needs a base orbit");
    if (!(t_min <= 0 && t_max >= 0 && t_max > t_min)) throw argument_error("shift_orbit: need t_min <= 0 <= t_max");
    const DelaunayOrbit& o = *base;
    check_eta(o.eta + d_eta, o.params);
    OrbitShift s;
    s.base = base;
    s.d_eta = d_eta;
    s.h = o.T / (2.0 * double(o.t.size() - 1));
    const int nb = int(std::ceil(-t_min / s.h)), nf = int(std::ceil(t_max / s.h));
    s.t_min = -nb * s.h;
    s.dv.assign(std::size_t(nb + nf + 1), 0.0);
    s.dvd.assign(s.dv.size(), 0.0);
    // delta(0) = (eta + d)^a - eta^a without cancellation; both orbits start at a minimum.
    const double a = o.params.a_exp;
    s.dv[nb] = std::pow(o.eta, a) * std::expm1(a * std::log1p(d_eta / o.eta));
    auto rk4 = [&](double t, double& x, double& y, double hh) {
        const double k1x = y, k1y = shift_rhs(o, t, x, y);
        const double k2x = y + 0.5 * hh * k1y, k2y = shift_rhs(o, t + 0.5 * hh, x + 0.5 * hh * k1x, k2x);
        const double k3x = y + 0.5 * hh * k2y, k3y = shift_rhs(o, t + 0.5 * hh, x + 0.5 * hh * k2x, k3x);
        const double k4x = y + hh * k3y, k4y = shift_rhs(o, t + hh, x + hh * k3x, k4x);
        x += hh / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
        y += hh / 6 * (k1y + 2 * k2y + 2 * k3y + k4y);
    };
    for (int dir : {1, -1}) {
        double x = s.dv[nb], y = 0;
        const int steps = dir > 0 ? nf : nb;
        for (int q = 0; q < steps; ++q) {
            rk4(dir * q * s.h, x, y, dir * s.h);
            s.dv[nb + dir * (q + 1)] = x;
            s.dvd[nb + dir * (q + 1)] = y;
        }
    }
    return s;
}

OrbitPoint OrbitShift::eval(double t) const {
    if (t < t_min - 1e-12 || t > t_max() + 1e-12) throw argument_error("OrbitShift::eval outside the sampled range");
    const int N = int(dv.size()) - 1;
    int i = int(std::floor((t - t_min) / h));
    i = std::clamp(i, 0, N - 1);
    const double u = (t - t_min - i * h) / h;
    const double t0 = t_min + i * h;
    const double f0 = shift_rhs(*base, t0, dv[i], dvd[i]), f1 = shift_rhs(*base, t0 + h, dv[i + 1], dvd[i + 1]);
    OrbitPoint p;
    p.v = hermite(u, dv[i], dv[i + 1], dvd[i] * h, dvd[i + 1] * h);
    p.vd = hermite(u, dvd[i], dvd[i + 1], f0 * h, f1 * h);
    p.vdd = shift_rhs(*base, t, p.v, p.vd);
    return p;
}

Trajectory integrate_trajectory(double eta, const DimensionParams& P, double t_end, double dt, const StepControl& sc) {
    check_eta(eta, P);
    System sys{P};
    const State y0 = initial_state(eta, P);
    const double H0 = hamiltonian(y0[0], y0[1], P);
    const int N = int(std::ceil(t_end / dt - 1e-9));
    StepControl c = sc;
    for (int attempt = 0; attempt < 3; ++attempt) {
        auto st = odeint::make_dense_output(c.abs_tol, c.rel_tol, odeint::runge_kutta_dopri5<State>());
        st.initialize(y0, 0.0, 1e-3);
        Trajectory tr;
        double drift = 0;
        for (int i = 0; i <= N; ++i) {
            const double ti = std::min(t_end, i * dt);
            while (st.current_time() < ti) st.do_step(sys);
            State s = y0;
            if (i > 0) st.calc_state(ti, s);
            tr.t.push_back(ti);
            tr.v.push_back(s[0]);
            tr.vd.push_back(s[1]);
            drift = std::max(drift, std::abs(hamiltonian(s[0], s[1], P) - H0));
        }
        if (drift <= sc.drift_tol * std::abs(H0)) return tr;
        c.abs_tol *= 1e-2;
        c.rel_tol *= 1e-2;
    }
    throw accuracy_error("Hamiltonian drift above " + std::to_string(sc.drift_tol) + " along the trajectory for eta = " +
                         std::to_string(eta));
}

OrbitPoint SchwarzschildProfile::eval(double t) const {
    const double a = params.a_exp;
    const double s = std::sqrt(h0);
    const double x = a * t - c;
    return {s * std::cosh(x), s * a * std::sinh(x), s * a * a * std::cosh(x), s * a * a * a * std::sinh(x)};
}

double SchwarzschildProfile::h(double t) const {
    const OrbitPoint p = eval(t);
    return p.v * p.v - params.c_exp * params.c_exp * p.vd * p.vd;
}

SchwarzschildProfile schwarzschild_profile(double h0, double c, const DimensionParams& P) {
    if (!(h0 > 0.0)) throw argument_error("Schwarzschild level h0 must be positive");
    return {P, h0, c};
}

}  // namespace sigmak
