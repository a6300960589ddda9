#include "sigmak/glue.hpp"

#include "sigmak/cutoff.hpp"
#include "sigmak/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

namespace sigmak {

namespace {

using cplx = std::complex<double>;

Jet2 jet_of(const Jet2& g, const Profile3& f) { return compose(g, f.f, f.f1, f.f2); }

Jet2 v_of(const DelaunayOrbit& o, const Jet2& r) {
    const OrbitPoint p = o.eval(r.v);
    return compose(r, p.v, p.vd, p.vdd);
}

PointJet to_point(const Jet2& j) { return {j.v, j.d1, j.d2, j.d11, j.d12, j.d22}; }

// Largest |r| reached on |x| = 1; r is harmonic in x inside the disk, so this bounds the ball.
double ball_extent(const GluedGeometry& geo, int i) {
    double ext = 0;
    const int S = 720;
    for (int s = 0; s <= S; ++s) {
        const double phi = M_PI * s / S;
        double r, psi;
        geo.x_to_end(i, std::cos(phi), std::sin(phi), r, psi);
        ext = std::max(ext, std::abs(r));
    }
    return ext;
}

}  // namespace

DeficiencyCoeffs DeficiencyCoeffs::zeros(int n) {
    DeficiencyCoeffs d;
    for (int i = 0; i < 2; ++i) {
        d.plus[i].assign(n + 1, 0.0);
        d.minus[i].assign(n + 1, 0.0);
    }
    return d;
}

double DeficiencyCoeffs::norm() const {
    double s = 0;
    for (int i = 0; i < 2; ++i) {
        for (double x : plus[i]) s += std::abs(x);
        for (double x : minus[i]) s += std::abs(x);
    }
    return s;
}

std::vector<double> DeficiencyCoeffs::axial() const {
    std::vector<double> x;
    for (int i = 0; i < 2; ++i) {
        x.push_back(plus[i][0]);
        x.push_back(plus[i][1]);
        x.push_back(minus[i][0]);
        x.push_back(minus[i][1]);
    }
    return x;
}

void DeficiencyCoeffs::set_axial(const std::vector<double>& x) {
    if (x.size() != 8) throw argument_error("axial deficiency vector must have 8 entries");
    for (int i = 0; i < 2; ++i) {
        plus[i][0] = x[4 * i];
        plus[i][1] = x[4 * i + 1];
        minus[i][0] = x[4 * i + 2];
        minus[i][1] = x[4 * i + 3];
    }
}

Profile3 GluedGeometry::eta(double t) const { return ramp_down(t, -1.0, 1.0); }

Profile3 GluedGeometry::chi(double t) const {
    const double le = -log_eps();
    return ramp_down(t, le - 1.0, le);
}

Profile3 GluedGeometry::u1(double t) const {
    const double a = P.a_exp;
    const double f = std::pow(epsilon, a) * std::exp(-a * t);
    return {f, -a * f, a * a * f};
}

Profile3 GluedGeometry::u2(double t) const {
    const double a = P.a_exp;
    const double f = std::pow(epsilon, a) * std::exp(a * t);
    return {f, a * f, a * a * f};
}

Profile3 GluedGeometry::u_eps(double t) const {
    const Profile3 c1 = chi(t), c2m = chi(-t);
    const Profile3 c2 = {c2m.f, -c2m.f1, c2m.f2};
    const Profile3 a = u1(t), b = u2(t);
    return {c1.f * a.f + c2.f * b.f,
            c1.f1 * a.f + c1.f * a.f1 + c2.f1 * b.f + c2.f * b.f1,
            c1.f2 * a.f + 2 * c1.f1 * a.f1 + c1.f * a.f2 + c2.f2 * b.f + 2 * c2.f1 * b.f1 + c2.f * b.f2};
}

CJet GluedGeometry::end_to_x(int i, const Jet2& r, const Jet2& psi) const {
    const EndData& e = ends[i];
    const Jet2 mag = exp(Jet2(e.t0) - r);
    const CJet Y{mag * cos(psi), mag * sin(psi)};
    const CJet w = cinv(conj(CJet{Y.re + Jet2(1.0), Y.im}));
    return {w.re * Jet2(e.Kc) - Jet2(0.5 * e.Kc), w.im * Jet2(e.Kc)};
}

double GluedGeometry::end_abs_x(int i, double r, double psi) const {
    const EndData& e = ends[i];
    const cplx Y = std::polar(std::exp(e.t0 - r), psi);
    const cplx w = Y + 1.0;
    if (std::norm(w) < 1e-300) return std::numeric_limits<double>::infinity();
    return std::abs(e.Kc * (1.0 / std::conj(w) - 0.5));
}

void GluedGeometry::x_to_end(int i, double xr, double xi, double& r, double& psi) const {
    const EndData& e = ends[i];
    const cplx z = cplx(xr, xi) / e.Kc + 0.5;
    const cplx Y = z / std::norm(z) - 1.0;
    r = e.t0 - std::log(std::abs(Y));
    psi = std::abs(std::atan2(Y.imag(), Y.real()));
}

void GluedGeometry::end_to_neck(int i, double r, double psi, double& t, double& psin) const {
    const EndData& e = ends[i];
    const cplx Y = std::polar(std::exp(e.t0 - r), psi);
    const cplx x = e.Kc * (1.0 / std::conj(Y + 1.0) - 0.5);
    const double lx = std::log(std::abs(x));
    t = i == 0 ? log_eps() - lx : -log_eps() + lx;
    psin = std::abs(std::atan2(x.imag(), x.real()));
}

void GluedGeometry::neck_to_end(int i, double t, double psin, double& r, double& psi) const {
    const double ax = epsilon * std::exp(i == 0 ? -t : t);
    x_to_end(i, ax * std::cos(psin), ax * std::sin(psin), r, psi);
}

double GluedGeometry::chart_factor(int i, double r, double psi) const {
    const EndData& e = ends[i];
    const cplx Y = std::polar(std::exp(e.t0 - r), psi);
    const double muy = e.Kc * std::abs(Y) / std::norm(Y + 1.0);
    const double ax = std::abs(e.Kc * (1.0 / std::conj(Y + 1.0) - 0.5));
    return std::pow(muy / ax, P.a_exp);
}

Jet2 GluedGeometry::one_plus_c_side(int i, const Jet2& t, const Jet2& psin) const {
    const EndData& e = ends[i];
    const Jet2 ax = Jet2(epsilon) * exp(i == 0 ? -t : t);
    // z = x/Kc + 1/2 and Y + 1 = z/|z|^2, so |Y + 1|^2 = 1/|z|^2.
    const CJet z{ax * cos(psin) * Jet2(1.0 / e.Kc) + Jet2(0.5), ax * sin(psin) * Jet2(1.0 / e.Kc)};
    const Jet2 iz2 = inv(abs2(z));
    const CJet Y{z.re * iz2 - Jet2(1.0), z.im * iz2};
    const Jet2 Y2 = abs2(Y);
    const Jet2 r = Jet2(e.t0) - Jet2(0.5) * log(Y2);
    const Jet2 v = v_of(*e.orbit, r);
    // 1 + c_i = v^{2/a} |Y+1|^4 / (Kc^2 |Y|^2).
    return pow(v, 2.0 / P.a_exp) * iz2 * iz2 / (Y2 * Jet2(e.Kc * e.Kc));
}

Jet2 GluedGeometry::one_plus_c(double t, double psin) const {
    const Jet2 tj = Jet2::var1(t), pj = Jet2::var2(psin);
    const Profile3 e = eta(t);
    const Jet2 ej = Jet2::of1(e.f, e.f1, e.f2);
    Jet2 out(0.0);
    if (e.f > 0 || e.f1 != 0) out += ej * one_plus_c_side(0, tj, pj);
    if (e.f < 1 || e.f1 != 0) out += (Jet2(1.0) - ej) * one_plus_c_side(1, tj, pj);
    return out;
}

double GluedGeometry::c_at_x(int i, double xr, double xi) const {
    const EndData& e = ends[i];
    const cplx z = cplx(xr, xi) / e.Kc + 0.5;
    const cplx Y = z / std::norm(z) - 1.0;
    const double r = e.t0 - std::log(std::abs(Y));
    const double v = e.orbit->eval(r).v;
    const double iz2 = 1.0 / std::norm(z);
    return std::pow(v, 2.0 / P.a_exp) * iz2 * iz2 / (std::norm(Y) * e.Kc * e.Kc) - 1.0;
}

Jet2 GluedGeometry::neck_base(double t, double psin) const {
    const Profile3 u = u_eps(t);
    return Jet2::of1(u.f, u.f1, u.f2) * pow(one_plus_c(t, psin), 0.5 * P.a_exp);
}

Jet2 GluedGeometry::end_base(int i, double r, double psi, const FamilyState* fam) const {
    const EndData& e = ends[i];
    const DelaunayOrbit& o = *e.orbit;
    const double a = P.a_exp;
    const Jet2 rj = Jet2::var1(r), pj = Jet2::var2(psi);
    Jet2 V;
    bool done = false;
    if (fam) {
        const auto& ap = fam->coeffs.plus[i];
        const auto& am = fam->coeffs.minus[i];
        if (r >= e.Rp - 1 && (ap[0] != 0 || ap[1] != 0)) {
            const Jet2 ch = jet_of(rj, ramp_up(r, e.Rp - 1, e.Rp));
            const Jet2 a0 = ch * Jet2(ap[0]), a1 = ch * Jet2(ap[1]);
            const Jet2 q = a1 * exp(-rj);
            const Jet2 D = sqrt(Jet2(1.0) - Jet2(2.0) * q * cos(pj) + q * q);
            V = pow(D, -a) * v_of(o, rj + log(D) + log(Jet2(1.0) + a0));
            done = true;
        } else if (r <= -(e.Rp - 1) && (am[0] != 0 || am[1] != 0)) {
            const Jet2 mr = -rj;
            const Jet2 ch = jet_of(mr, ramp_up(-r, e.Rp - 1, e.Rp));
            const Jet2 q = ch * Jet2(am[1]) * exp(rj);
            const Jet2 D = sqrt(Jet2(1.0) - Jet2(2.0) * q * cos(pj) + q * q);
            const Jet2 s = rj - log(D);
            Jet2 vs = v_of(o, s);
            if (am[0] != 0) {
                if (!fam->shifted[i]) throw argument_error("family state lacks the neck-size shift");
                const OrbitPoint d = fam->shifted[i]->eval(s.v);
                vs += ch * compose(s, d.v, d.vd, d.vdd);
            }
            V = pow(D, -a) * vs;
            done = true;
        }
    }
    if (!done) {
        const OrbitPoint p = o.eval(r);
        V = Jet2::of1(p.v, p.vd, p.vdd);
    }
    const double ax = end_abs_x(i, r, psi);
    if (ax < 1.0) {
        const CJet x = end_to_x(i, rj, pj);
        const Jet2 tau = Jet2(log_eps()) - Jet2(0.5) * log(abs2(x));
        const Jet2 mt = -tau;
        V = V * (Jet2(1.0) + jet_of(mt, chi(mt.v)) * exp(Jet2(2 * a) * tau));
    }
    return V;
}

std::shared_ptr<const OrbitShift> family_shift(const GluedGeometry& geo, int i, double b0) {
    const EndData& e = geo.ends[i];
    return std::make_shared<const OrbitShift>(shift_orbit(e.orbit, b0, -e.L - 2, 0.0));
}

Jet2 GluedGeometry::deficiency_jet(int i, int side, int j, double r, double psi) const {
    const EndData& e = ends[i];
    const DelaunayOrbit& o = *e.orbit;
    const double a = P.a_exp;
    const Jet2 rj = Jet2::var1(r), pj = Jet2::var2(psi);
    if (j > 1) throw argument_error("only the axial Jacobi families (j = 0, 1) live on axisymmetric grids");
    const OrbitPoint p = o.eval(r);
    const Jet2 v = Jet2::of1(p.v, p.vd, p.vdd), vd = Jet2::of1(p.vd, p.vdd, p.vddd);
    if (side == 0) {
        const Jet2 ch = jet_of(rj, ramp_up(r, e.Rp - 1, e.Rp));
        if (j == 0) return ch * vd;
        return ch * (Jet2(a) * v - vd) * exp(-rj) * cos(pj);
    }
    const Jet2 mr = -rj;
    const Jet2 ch = jet_of(mr, ramp_up(-r, e.Rp - 1, e.Rp));
    if (j == 0) {
        const OrbitPoint q = o.eval_eta_derivative(r);
        return ch * Jet2::of1(q.v, q.vd, q.vdd);
    }
    return ch * (Jet2(a) * v + vd) * exp(rj) * cos(pj);
}

GluedGeometry build_geometry(const GlueConfig& cfg) {
    GluedGeometry geo;
    geo.P = DimensionParams(cfg.n, cfg.k);
    geo.cfg = cfg;
    if (!(cfg.eps_max > 0 && cfg.eps_max < std::exp(-2.0))) {
        std::ostringstream m;
        m << "eps0 = " << cfg.eps_max << " outside (0, e^-2): the cutoff transitions on the neck would overlap";
        throw argument_error(m.str());
    }
    if (!(cfg.epsilon > 0 && cfg.epsilon <= cfg.eps_max)) {
        std::ostringstream m;
        m << "epsilon = " << cfg.epsilon << " outside (0, eps0] with eps0 = " << cfg.eps_max;
        throw argument_error(m.str());
    }
    if (cfg.np < 5) throw grid_error("need at least 5 psi-nodes");
    if (cfg.steps_per_period < 20) throw grid_error("need at least 20 steps per period");
    if (!(cfg.hole_radius > 0 && cfg.hole_radius < 1)) throw argument_error("hole radius must lie in (0, 1)");
    if (!(cfg.Rp_offset > 1)) throw argument_error("R' - 1 > R requires Rp_offset > 1");
    geo.epsilon = cfg.epsilon;
    geo.np = cfg.np;
    const double etas[2] = {cfg.eta1, cfg.eta2};
    double hmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 2; ++i) {
        EndData& e = geo.ends[i];
        e.orbit = std::make_shared<const DelaunayOrbit>(solve_orbit(etas[i], geo.P));
        e.t0 = e.orbit->bulge();
        e.Kc = 4.0 * std::pow(e.orbit->eval(e.t0).v, 1.0 / geo.P.a_exp);
        if (!(0.5 * e.Kc > 1.01)) {
            std::ostringstream m;
            m << "end " << i + 1 << ": the unit ball about the puncture reaches the end (|x| of the ends = "
              << 0.5 * e.Kc << " must exceed 1)";
            throw chart_error(m.str());
        }
        e.h = e.orbit->T / cfg.steps_per_period;
        e.ball_extent = ball_extent(geo, i);
        e.R = select_interface_radius(*e.orbit, e.ball_extent + cfg.R_margin, 0.0, e.h);
        e.Rp = e.R + cfg.Rp_offset;
        const int half = int(std::ceil((e.Rp + cfg.L_offset) / e.h));
        e.L = half * e.h;
        e.Nr = 2 * half + 1;
        hmin = std::min(hmin, e.h);
    }
    const double le = -geo.log_eps();
    const int Nt = int(std::ceil(2 * le / hmin)) + 1;
    geo.neck = UniformGrid{-le, 2 * le / (Nt - 1), Nt};
    return geo;
}

AxiSymField background_correction(const GluedGeometry& geo) {
    AxiSymField c(geo.neck.N, geo.np, geo.neck.t0, geo.neck.h);
    for (int i = 0; i < c.nt(); ++i)
        for (int j = 0; j < c.np(); ++j) c(i, j) = geo.one_plus_c(c.t(i), c.psi(j)).v - 1.0;
    return c;
}

ApproximateSolution approximate_solution(const GluedGeometry& geo) {
    ApproximateSolution s;
    s.geo = &geo;
    s.neck_c = background_correction(geo);
    s.neck_u = AxiSymField(geo.neck.N, geo.np, geo.neck.t0, geo.neck.h);
    for (int i = 0; i < s.neck_u.nt(); ++i) {
        const double u = geo.u_eps(s.neck_u.t(i)).f;
        if (!(u > 0)) throw construction_error("u_eps is not positive on the neck; epsilon too large");
        for (int j = 0; j < geo.np; ++j) {
            s.neck_u(i, j) = u;
            if (!(1.0 + s.neck_c(i, j) > 0)) throw construction_error("1 + c is not positive on the neck");
        }
    }
    for (int e = 0; e < 2; ++e) {
        const EndData& E = geo.ends[e];
        AxiSymField f(E.Nr, geo.np, -E.L, E.h);
        for (int i = 0; i < f.nt(); ++i) {
            const double r = f.t(i);
            const double v = E.orbit->eval(r).v;
            for (int j = 0; j < geo.np; ++j) {
                // Nodes inside the hole belong to the neck chart; they carry 0 here.
                if (geo.end_abs_x(e, r, f.psi(j)) < geo.cfg.hole_radius) continue;
                f(i, j) = geo.end_base(e, r, f.psi(j)).v / v;
                if (!(f(i, j) > 0)) throw construction_error("u_eps is not positive on an end; epsilon too large");
            }
        }
        s.end_u[e] = std::move(f);
    }
    // C^2 matching of the cutoff profiles across their transition points.
    const double le = -geo.log_eps();
    const double d = 1e-7;
    const double scale = std::pow(geo.epsilon, geo.P.a_exp);
    for (double ts : {-1.0, 1.0, le - 1, -(le - 1)}) {
        const Profile3 lo = geo.u_eps(ts - d), hi = geo.u_eps(ts + d);
        const double jump = std::max({std::abs(hi.f - lo.f), std::abs(hi.f1 - lo.f1), std::abs(hi.f2 - lo.f2)});
        s.max_interface_jump = std::max(s.max_interface_jump, jump / scale);
        for (double psi : {0.0, 0.5 * M_PI, M_PI}) {
            const Jet2 a = geo.one_plus_c(ts - d, psi), b = geo.one_plus_c(ts + d, psi);
            const double jc = std::max({std::abs(a.v - b.v), std::abs(a.d1 - b.d1), std::abs(a.d11 - b.d11)});
            s.max_interface_jump = std::max(s.max_interface_jump, jc);
        }
    }
    const double tol = geo.neck.h * geo.neck.h;
    if (s.max_interface_jump > tol) {
        std::ostringstream m;
        m << "approximate solution jumps by " << s.max_interface_jump << " across a cutoff interface (tolerance "
          << tol << ")";
        throw construction_error(m.str());
    }
    return s;
}

std::vector<char> end_owned_mask(const GluedGeometry& geo, int i) {
    const EndData& E = geo.ends[i];
    std::vector<char> m(std::size_t(E.Nr) * geo.np, 0);
    for (int a = 0; a < E.Nr; ++a)
        for (int j = 0; j < geo.np; ++j) m[std::size_t(a) * geo.np + j] = geo.end_abs_x(i, E.r(a), j * geo.hp()) >= 1.0;
    return m;
}

std::vector<char> end_compact_mask(const GluedGeometry& geo, int i, double x_min) {
    const EndData& E = geo.ends[i];
    std::vector<char> m(std::size_t(E.Nr) * geo.np, 0);
    for (int a = 0; a < E.Nr; ++a) {
        if (std::abs(E.r(a)) > E.R) continue;
        for (int j = 0; j < geo.np; ++j) m[std::size_t(a) * geo.np + j] = geo.end_abs_x(i, E.r(a), j * geo.hp()) >= x_min;
    }
    return m;
}

WeightedNormSpec GlobalNormSpec::end() const {
    WeightedNormSpec s;
    s.flavor = WeightedNormSpec::Flavor::End;
    s.delta = -delta;
    s.n = n;
    return s;
}

WeightedNormSpec GlobalNormSpec::neck(double epsilon, double index) const {
    WeightedNormSpec s;
    s.flavor = WeightedNormSpec::Flavor::Neck;
    s.gamma = index;
    s.epsilon = epsilon;
    s.n = n;
    return s;
}

ResidualProfile residual_profile(const ApproximateSolution& approx, const GlobalNormSpec& spec) {
    const GluedGeometry& geo = *approx.geo;
    const DimensionParams& P = geo.P;
    check_weight_windows(P, spec.delta, spec.gamma);
    ResidualProfile out;
    out.neck = AxiSymField(geo.neck.N, geo.np, geo.neck.t0, geo.neck.h);
    const int kc = P.k - 1;
    for (int i = 0; i < out.neck.nt(); ++i) {
        for (int j = 0; j < geo.np; ++j) {
            const double t = out.neck.t(i), psi = out.neck.psi(j);
            const PointJet J = to_point(geo.neck_base(t, psi));
            const double opc = 1.0 + approx.neck_c(i, j);
            out.neck(i, j) = std::pow(opc, -0.5 * P.n) * residual_point(J, psi, out.neck.is_pole(j), P);
            if (kc >= 1 && !cone_membership(spectrum_point(J, psi, out.neck.is_pole(j), P), kc)) out.cone_ok = false;
        }
    }
    out.norm = weighted_norm(out.neck, spec.neck(geo.epsilon, spec.gamma - (P.n - 2 * P.k)), 0);
    for (int e = 0; e < 2; ++e) {
        const EndData& E = geo.ends[e];
        AxiSymField f(E.Nr, geo.np, -E.L, E.h);
        const std::vector<char> owned = end_owned_mask(geo, e);
        for (int i = 0; i < f.nt(); ++i) {
            const double r = f.t(i);
            const double vp = std::pow(E.orbit->eval(r).v, -P.p_exp);
            for (int j = 0; j < geo.np; ++j) {
                if (geo.end_abs_x(e, r, f.psi(j)) < geo.cfg.hole_radius) continue;
                const PointJet J = to_point(geo.end_base(e, r, f.psi(j)));
                f(i, j) = vp * residual_point(J, f.psi(j), f.is_pole(j), P);
                if (!owned[std::size_t(i) * geo.np + j]) continue;
                out.outside_max = std::max(out.outside_max, std::abs(f(i, j)));
                if (kc >= 1 && !cone_membership(spectrum_point(J, f.psi(j), f.is_pole(j), P), kc)) out.cone_ok = false;
            }
        }
        out.norm = std::max(out.norm, weighted_norm(f, spec.end(), 0, owned));
        out.end[e] = std::move(f);
    }
    return out;
}

double metric_deviation_c2(const GluedGeometry& geo, int i, const std::vector<char>& mask, const FamilyState* fam,
                           const AxiSymField* dU) {
    const EndData& E = geo.ends[i];
    AxiSymField phi(E.Nr, geo.np, -E.L, E.h);
    if (dU && (dU->nt() != E.Nr || dU->np() != geo.np)) throw grid_error("correction does not live on the end grid");
    const double ex = 2.0 / geo.P.a_exp;
    for (int a = 0; a < E.Nr; ++a) {
        const double r = E.r(a);
        const double v = E.orbit->eval(r).v;
        for (int j = 0; j < geo.np; ++j) {
            if (geo.end_abs_x(i, r, phi.psi(j)) < geo.cfg.hole_radius) continue;
            double U = geo.end_base(i, r, phi.psi(j), fam).v;
            if (dU) U += (*dU)(a, j);
            phi(a, j) = std::pow(U / v, ex) - 1.0;
        }
    }
    WeightedNormSpec flat;
    flat.n = geo.P.n;
    return weighted_norm(phi, flat, 2, mask);
}

}  // namespace sigmak
