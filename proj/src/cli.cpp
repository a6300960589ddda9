#include "sigmak/cli.hpp"

#include "sigmak/delaunay.hpp"
#include "sigmak/glue.hpp"
#include "sigmak/jacobi.hpp"
#include "sigmak/linop.hpp"
#include "sigmak/newton.hpp"
#include "sigmak/verify.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace sigmak {

namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

double to_double(const std::string& key, const std::string& v, int line) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw config_error("line " + std::to_string(line) + ": " + key + " expects a number, got '" + v + "'");
    }
}

int to_int(const std::string& key, const std::string& v, int line) {
    const double x = to_double(key, v, line);
    if (x != std::floor(x) || std::abs(x) > 1e9)
        throw config_error("line " + std::to_string(line) + ": " + key + " expects an integer, got '" + v + "'");
    return int(x);
}

bool to_bool(const std::string& key, const std::string& v, int line) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw config_error("line " + std::to_string(line) + ": " + key + " expects true or false, got '" + v + "'");
}

void apply(RunConfig& c, const std::string& key, const std::vector<std::string>& vals, int line) {
    auto one = [&]() -> const std::string& {
        if (vals.size() != 1)
            throw config_error("line " + std::to_string(line) + ": " + key + " takes a single value");
        return vals[0];
    };
    auto list = [&]() {
        std::vector<double> xs;
        for (const auto& v : vals) xs.push_back(to_double(key, v, line));
        return xs;
    };
    if (key == "n") c.n = to_int(key, one(), line);
    else if (key == "k") c.k = to_int(key, one(), line);
    else if (key == "eta") c.eta = list();
    else if (key == "epsilon") c.epsilon = list();
    else if (key == "delta") c.delta = one() == "auto" ? std::nullopt : std::optional(to_double(key, one(), line));
    else if (key == "gamma") c.gamma = one() == "auto" ? std::nullopt : std::optional(to_double(key, one(), line));
    else if (key == "steps_per_period") c.steps_per_period = to_int(key, one(), line);
    else if (key == "np") c.np = to_int(key, one(), line);
    else if (key == "M_max") c.M_max = to_int(key, one(), line);
    else if (key == "truncation") c.truncation = one();
    else if (key == "tol") c.tol = to_double(key, one(), line);
    else if (key == "max_iter") c.max_iter = to_int(key, one(), line);
    else if (key == "coeff_cap") c.coeff_cap = to_double(key, one(), line);
    else if (key == "relinearize") c.relinearize = to_bool(key, one(), line);
    else if (key == "schwarzschild_h0") c.schwarzschild_h0 = to_double(key, one(), line);
    else if (key == "schwarzschild_c") c.schwarzschild_c = to_double(key, one(), line);
    else if (key == "out_dir") c.out_dir = one();
    else if (key == "seed") c.seed = std::uint64_t(to_int(key, one(), line));
    else if (key == "dat") c.dat = to_bool(key, one(), line);
    else throw config_error("line " + std::to_string(line) + ": unknown key '" + key + "'");
}

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string tag(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

class Out {
public:
    explicit Out(const RunConfig& c) : dir_(c.out_dir), dat_(c.dat) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw io_error("cannot create output directory " + dir_.string() + ": " + ec.message());
    }

    void csv(const std::string& name, const std::string& header, const std::vector<std::vector<double>>& rows) {
        std::ostringstream s, d;
        s << header << '\n';
        d << "# " << header << '\n';
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) {
                s << (i ? "," : "") << num(r[i]);
                d << (i ? " " : "") << num(r[i]);
            }
            s << '\n';
            d << '\n';
        }
        text(name + ".csv", s.str());
        if (dat_) text(name + ".dat", d.str());
    }

    void json(const std::string& name, const ordered_json& j) { text(name, j.dump(2) + "\n"); }

    void text(const std::string& name, const std::string& body) {
        const fs::path p = dir_ / name;
        std::ofstream f(p, std::ios::binary);
        f << body;
        if (!f) throw io_error("cannot write " + p.string());
        written_.push_back(name);
    }

    const std::vector<std::string>& written() const { return written_; }

private:
    fs::path dir_;
    bool dat_;
    std::vector<std::string> written_;
};

ordered_json header(const RunConfig& c, const std::string& command) {
    ordered_json j;
    j["schema_version"] = 1;
    j["command"] = command;
    ordered_json p;
    p["n"] = c.n;
    p["k"] = c.k;
    p["eta"] = c.eta;
    p["epsilon"] = c.epsilon;
    p["delta"] = c.delta_value();
    p["gamma"] = c.gamma_value();
    p["steps_per_period"] = c.steps_per_period;
    p["np"] = c.np;
    p["M_max"] = c.M_max;
    p["truncation"] = c.truncation;
    p["tol"] = c.tol;
    p["max_iter"] = c.max_iter;
    p["coeff_cap"] = c.coeff_cap;
    p["relinearize"] = c.relinearize;
    p["seed"] = c.seed;
    j["parameters"] = p;
    return j;
}

std::vector<double> end_etas(const RunConfig& c) {
    return {c.eta[0], c.eta.size() > 1 ? c.eta[1] : c.eta[0]};
}

GlueConfig glue_config(const RunConfig& c, double eps) {
    GlueConfig g;
    g.n = c.n;
    g.k = c.k;
    const auto e = end_etas(c);
    g.eta1 = e[0];
    g.eta2 = e[1];
    g.epsilon = eps;
    g.steps_per_period = c.steps_per_period;
    g.np = c.np;
    return g;
}

GlobalNormSpec norm_spec(const RunConfig& c) {
    GlobalNormSpec s;
    s.delta = c.delta_value();
    s.gamma = c.gamma_value();
    s.n = c.n;
    return s;
}

// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double m = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double den = m * sxx - sx * sx;
    return den == 0 ? NAN : (m * sxy - sx * sy) / den;
}

// The eta list without repeats, in order; sweeps would otherwise rewrite the same files.
std::vector<double> sweep_etas(const RunConfig& c) {
    std::vector<double> out;
    for (double e : c.eta)
        if (std::find(out.begin(), out.end(), e) == out.end()) out.push_back(e);
    return out;
}

ordered_json finite(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); }

// ---------------------------------------------------------------------------------------------

void cmd_delaunay(const RunConfig& c, Out& out) {
    const DimensionParams P(c.n, c.k);
    auto j = header(c, "delaunay");
    std::vector<std::vector<double>> periods;
    ordered_json orbits = ordered_json::array();
    for (double eta : sweep_etas(c)) {
        const DelaunayOrbit o = solve_orbit(eta, P);
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < o.t.size(); ++i) {
            const double t = o.t[i];
            const double H = hamiltonian(o.v[i], o.vd[i], P);
            rows.push_back({t, o.v[i], o.vd[i], o.h(t), o.F(t), (H - o.H0) / std::abs(o.H0)});
        }
        const std::string name = "orbit_eta_" + tag(eta);
        out.csv(name, "t,v,vdot,h,F,H_drift", rows);
        periods.push_back({eta, o.H0, o.T, o.dT_deta, o.min_v(), o.max_v(), o.max_drift()});
        ordered_json e;
        e["eta"] = eta;
        e["file"] = name + ".csv";
        e["H0"] = o.H0;
        e["period"] = o.T;
        e["dT_deta"] = o.dT_deta;
        e["max_drift"] = o.max_drift();
        orbits.push_back(e);
    }
    out.csv("periods", "eta,H0,period,dT_deta,min_v,max_v,max_drift", periods);
    j["eta_sup"] = P.eta_sup();
    j["H_sup"] = P.H_sup();
    j["v_cyl"] = P.v_cyl();
    j["equilibrium_period"] = 2 * M_PI / equilibrium_frequency(P);
    j["orbits"] = orbits;
    out.json("delaunay.json", j);
}

void cmd_schwarzschild(const RunConfig& c, Out& out) {
    const DimensionParams P(c.n, c.k);
    const SchwarzschildProfile S = schwarzschild_profile(c.schwarzschild_h0, c.schwarzschild_c, P);
    const int steps = c.steps_per_period;
    const double t_lo = -2, t_hi = 2, dt = (t_hi - t_lo) / steps;
    std::vector<std::vector<double>> rows;
    double h_var = 0;
    for (int i = 0; i <= steps; ++i) {
        const double t = t_lo + i * dt;
        const OrbitPoint q = S.eval(t);
        const double h = S.h(t);
        h_var = std::max(h_var, std::abs(h - c.schwarzschild_h0));
        rows.push_back({t, q.v, q.vd, h});
    }
    out.csv("schwarzschild", "t,v,vdot,h", rows);
    std::vector<std::vector<double>> sig;
    for (int jj = 0; jj < c.k; ++jj) sig.push_back({double(jj), sigma_schwarzschild(jj, c.schwarzschild_h0, P)});
    out.csv("schwarzschild_sigma", "j,sigma_k_minus_1_minus_j", sig);
    auto j = header(c, "schwarzschild");
    j["h0"] = c.schwarzschild_h0;
    j["c"] = c.schwarzschild_c;
    j["interval"] = {t_lo, t_hi};
    j["max_h_variation"] = h_var;
    out.json("schwarzschild.json", j);
}

void cmd_linearize(const RunConfig& c, Out& out) {
    const DimensionParams P(c.n, c.k);
    auto j = header(c, "linearize");
    ordered_json runs = ordered_json::array();
    for (double eta : sweep_etas(c)) {
        const DelaunayOrbit o = solve_orbit(eta, P);
        std::vector<double> tg;
        for (int i = 0; i <= c.steps_per_period; ++i) tg.push_back(o.T * i / c.steps_per_period);
        const ModeCoefficients mc = delaunay_coefficients(o, tg);
        const double lam = sphere_eigenvalue(2, c.n);
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < tg.size(); ++i)
            rows.push_back({tg[i], mc.a_eta[i], mc.p_eta[i], mc.a_eta[i] * lam + mc.p_eta[i]});
        const std::string name = "linearize_eta_" + tag(eta);
        out.csv(name, "t,a_eta,p_eta,coercivity_margin", rows);
        ordered_json r;
        r["eta"] = eta;
        r["file"] = name + ".csv";
        r["coercivity_margin"] = coercivity_margin(o);
        runs.push_back(r);
    }
    const IndicialData sd = spectral_data(P, c.M_max);
    std::vector<std::vector<double>> spec;
    for (int m = 0; m <= c.M_max; ++m) spec.push_back({double(m), sd.lambda[m], double(sd.multiplicity[m])});
    out.csv("spectrum", "m,lambda,multiplicity", spec);
    j["delta_bar"] = sd.delta_bar;
    j["runs"] = runs;
    out.json("linearize.json", j);
}

void cmd_jacobi(const RunConfig& c, Out& out) {
    const DimensionParams P(c.n, c.k);
    auto j = header(c, "jacobi-check");
    std::vector<std::vector<double>> rows;
    ordered_json runs = ordered_json::array();
    for (double eta : sweep_etas(c)) {
        const DelaunayOrbit o = solve_orbit(eta, P);
        const double ht = o.T / c.steps_per_period;
        for (const JacobiField& f : jacobi_fields(o)) {
            if (f.j > 1) continue;  // j >= 2 repeats j = 1 up to the angular factor
            const double r1 = kernel_residual(f, ht), r2 = kernel_residual(f, 0.5 * ht);
            const double order = (r1 > 0 && r2 > 0) ? std::log2(r1 / r2) : NAN;
            rows.push_back({eta, double(int(f.kind)), double(f.j), r1, r2, order});
            ordered_json r;
            r["eta"] = eta;
            r["field"] = f.name();
            r["j"] = f.j;
            r["residual_h"] = r1;
            r["residual_h_half"] = r2;
            r["order"] = finite(order);
            runs.push_back(r);
        }
    }
    out.csv("jacobi", "eta,kind,j,residual_h,residual_h_half,order", rows);
    j["fields"] = runs;
    out.json("jacobi.json", j);
}

void cmd_glue(const RunConfig& c, Out& out) {
    auto j = header(c, "glue");
    ordered_json runs = ordered_json::array();
    for (double eps : c.epsilon) {
        const GluedGeometry geo = build_geometry(glue_config(c, eps));
        const ApproximateSolution ap = approximate_solution(geo);
        ordered_json r;
        r["epsilon"] = eps;
        ordered_json ends = ordered_json::array();
        for (const EndData& e : geo.ends) {
            ordered_json d;
            d["eta"] = e.orbit->eta;
            d["period"] = e.orbit->T;
            d["t0"] = e.t0;
            d["Kc"] = e.Kc;
            d["R"] = e.R;
            d["R_prime"] = e.Rp;
            d["L"] = e.L;
            d["h"] = e.h;
            d["Nr"] = e.Nr;
            ends.push_back(d);
        }
        r["ends"] = ends;
        r["neck"] = {{"t_min", geo.neck.t0}, {"h", geo.neck.h}, {"N", geo.neck.N}};
        r["max_interface_jump"] = ap.max_interface_jump;
        std::vector<std::vector<double>> rows;
        const int last = ap.neck_u.np() - 1;
        for (int i = 0; i < ap.neck_u.nt(); ++i) {
            const double t = ap.neck_u.t(i);
            rows.push_back({t, geo.u_eps(t).f, ap.neck_c(i, 0), ap.neck_c(i, last)});
        }
        const std::string name = "neck_eps_" + tag(eps);
        out.csv(name, "t,u_eps,c_psi0,c_psipi", rows);
        r["neck_file"] = name + ".csv";
        runs.push_back(r);
    }
    j["runs"] = runs;
    out.json("glue.json", j);
}

void cmd_residual(const RunConfig& c, Out& out) {
    const DimensionParams P(c.n, c.k);
    const GlobalNormSpec spec = norm_spec(c);
    auto j = header(c, "residual");
    std::vector<std::vector<double>> rows;
    std::vector<double> lx, ly;
    ordered_json runs = ordered_json::array();
    for (double eps : c.epsilon) {
        const GluedGeometry geo = build_geometry(glue_config(c, eps));
        const ResidualProfile rp = residual_profile(approximate_solution(geo), spec);
        rows.push_back({eps, rp.norm, std::log(eps), std::log(rp.norm)});
        lx.push_back(std::log(eps));
        ly.push_back(std::log(rp.norm));
        ordered_json r;
        r["epsilon"] = eps;
        r["residual_norm"] = rp.norm;
        r["outside_max"] = rp.outside_max;
        r["cone_ok"] = rp.cone_ok;
        runs.push_back(r);
    }
    out.csv("residual", "epsilon,residual_norm,log_eps,log_norm", rows);
    j["runs"] = runs;
    j["slope"] = lx.size() >= 2 ? finite(fit_slope(lx, ly)) : ordered_json(nullptr);
    j["expected_exponent"] = spec.gamma * (P.n - 2 * P.k) / P.n;
    out.json("residual.json", j);
}

void cmd_solve(const RunConfig& c, Out& out) {
    auto j = header(c, "solve");
    const GlobalNormSpec spec = norm_spec(c);
    NewtonControl ctl;
    ctl.tol = c.tol;
    ctl.max_iter = c.max_iter;
    ctl.coeff_cap = c.coeff_cap;
    ctl.relinearize = c.relinearize;
    ordered_json runs = ordered_json::array();
    for (double eps : c.epsilon) {
        const GluedGeometry geo = build_geometry(glue_config(c, eps));
        const CompositeSystem sys(geo, spec);
        const MeasuredConstants mc = measure_constants(sys);
        const SolutionBundle sb = newton_solve(sys, ctl);

        ordered_json r;
        r["epsilon"] = eps;
        r["measured_constants"] = {{"A", mc.A}, {"L", mc.L}, {"C", mc.C},
                                   {"coercivity_margin", mc.coercivity_margin}};
        ordered_json its = ordered_json::array();
        for (std::size_t i = 0; i < sb.iterate_norms.size(); ++i) {
            ordered_json it;
            it["iteration"] = i + 1;
            it["residual_norm"] = sb.residual_norms[i];
            it["iterate_norm"] = sb.iterate_norms[i];
            it["step_norm"] = sb.step_norms[i];
            it["contraction"] = i > 0 && i - 1 < sb.contraction.size() ? finite(sb.contraction[i - 1])
                                                                       : ordered_json(nullptr);
            its.push_back(it);
        }
        r["iterates"] = its;
        r["iterations"] = sb.iterations;
        r["deficiency_coefficients"] = sb.coeffs.axial();
        r["final"] = {{"residual_norm", sb.final_residual},
                      {"sigma_defect", sb.sigma_defect},
                      {"relative_residual", sb.relative_residual},
                      {"min_factor", sb.min_factor},
                      {"target_sigma", geo.P.target_sigma}};

        const CompositeField tot = sys.total_factor(sb.U);
        std::vector<std::vector<double>> rows;
        auto dump = [&](int chart, const AxiSymField& f, const AxiSymField& w) {
            const int last = f.np() - 1;
            for (int i = 0; i < f.nt(); ++i)
                rows.push_back({double(chart), f.t(i), f(i, 0), f(i, last), w(i, 0), w(i, last)});
        };
        dump(0, tot.end[0], sb.w_hat.end[0]);
        dump(2, tot.neck, sb.w_hat.neck);
        dump(1, tot.end[1], sb.w_hat.end[1]);
        const std::string name = "solution_eps_" + tag(eps);
        out.csv(name, "chart,s,factor_psi0,factor_psipi,w_psi0,w_psipi", rows);
        r["profile_file"] = name + ".csv";
        runs.push_back(r);
    }
    j["runs"] = runs;
    out.json("solve.json", j);
}

struct Timing {
    std::vector<std::pair<std::string, double>> items;
};

bool cmd_verify(const RunConfig& c, Out& out, Timing& tm) {
    VerifyOptions opt;
    opt.seed = c.seed;
    opt.n = c.n;
    opt.k = c.k;
    auto j = header(c, "verify");
    ordered_json crit = ordered_json::array();
    bool all = true;
    for (int id = 1; id <= 9; ++id) {
        CriterionResult r;
        try {
            r = run_criterion(id, opt);
        } catch (const Error& e) {
            r.id = id;
            r.pass = false;
            r.detail = std::string("error: ") + e.what();
        }
        all = all && r.pass;
        tm.items.push_back({"criterion_" + std::to_string(id), r.seconds});
        std::cout << "criterion " << id << (r.pass ? " PASS: " : " FAIL: ") << r.title << "  " << r.detail << '\n';
        ordered_json e;
        e["id"] = r.id;
        e["title"] = r.title;
        e["pass"] = r.pass;
        e["detail"] = r.detail;
        ordered_json vals = ordered_json::object();
        for (const auto& [k, v] : r.values) vals[k] = finite(v);
        e["values"] = vals;
        e["notes"] = r.notes;
        crit.push_back(e);
    }
    j["criteria"] = crit;
    j["all_pass"] = all;
    out.json("verify.json", j);
    return all;
}

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

}  // namespace

double RunConfig::delta_value() const {
    return delta ? *delta : 0.5 * (1 + DimensionParams(n, k).delta_bar());
}

double RunConfig::gamma_value() const { return gamma ? *gamma : DimensionParams(n, k).a_exp; }

RunConfig config_parse_text(const std::string& text) {
    RunConfig c;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        std::string key;
        std::vector<std::string> vals;
        for (const std::string& seg : split(s, ',')) {
            const auto eq = seg.find('=');
            if (eq != std::string::npos) {
                if (!key.empty()) apply(c, key, vals, line);
                key = trim(seg.substr(0, eq));
                vals = {trim(seg.substr(eq + 1))};
                if (key.empty()) throw config_error("line " + std::to_string(line) + ": missing key before '='");
            } else {
                if (key.empty()) throw config_error("line " + std::to_string(line) + ": expected key = value");
                vals.push_back(seg);
            }
            if (vals.back().empty())
                throw config_error("line " + std::to_string(line) + ": empty value for " + key);
        }
        apply(c, key, vals, line);
    }
    validate(c);
    return c;
}

RunConfig config_parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw io_error("cannot read config " + path);
    std::ostringstream s;
    s << f.rdbuf();
    return config_parse_text(s.str());
}

void validate(const RunConfig& c) {
    if (!(2 <= 2 * c.k && 2 * c.k < c.n))
        throw config_error("dimension window 2 <= 2k < n violated: n = " + std::to_string(c.n) +
                           ", k = " + std::to_string(c.k) + " gives 2k = " + std::to_string(2 * c.k));
    const DimensionParams P(c.n, c.k);
    if (c.eta.empty()) throw config_error("eta needs at least one value");
    for (double e : c.eta)
        if (!(e > 0 && e < P.eta_sup()))
            throw config_error("neck-size window 0 < eta < ((n-2k)/n)^(1/(2k)) = " + num(P.eta_sup()) +
                               " violated by eta = " + num(e));
    if (c.epsilon.empty()) throw config_error("epsilon needs at least one value");
    for (double e : c.epsilon)
        if (!(e > 0 && e <= GlueConfig{}.eps_max))
            throw config_error("necksize window 0 < epsilon <= " + num(GlueConfig{}.eps_max) +
                               " violated by epsilon = " + num(e));
    const double db = P.delta_bar();
    if (c.delta && !(*c.delta > 1 && *c.delta < db))
        throw config_error("end weight window 1 < delta < delta_bar = " + num(db) + " violated by delta = " +
                           num(*c.delta));
    const double gmax = double(c.n - 2 * c.k) / c.k;
    if (c.gamma && !(*c.gamma > 0 && *c.gamma < gmax))
        throw config_error("neck weight window 0 < gamma < (n-2k)/k = " + num(gmax) + " violated by gamma = " +
                           num(*c.gamma));
    if (c.steps_per_period < 20) throw config_error("steps_per_period must be at least 20");
    if (c.np < 5) throw config_error("np must be at least 5");
    if (c.M_max < 2) throw config_error("M_max must be at least 2");
    if (c.truncation != "doubling") throw config_error("truncation policy must be 'doubling'");
    if (!(c.tol > 0)) throw config_error("tol must be positive");
    if (c.max_iter < 1) throw config_error("max_iter must be at least 1");
    if (!(c.coeff_cap > 0)) throw config_error("coeff_cap must be positive");
    if (!(c.schwarzschild_h0 > 0)) throw config_error("Schwarzschild window h0 > 0 violated");
}

const std::vector<std::string>& pipeline_commands() {
    static const std::vector<std::string> cmds = {"delaunay", "schwarzschild", "linearize", "jacobi-check",
                                                  "glue",     "residual",      "solve",     "verify"};
    return cmds;
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config:
        case ErrorKind::Argument:
        case ErrorKind::Domain:
            return 2;
        case ErrorKind::Resonant:
            return 3;
        case ErrorKind::Divergence:
        case ErrorKind::Construction:
        case ErrorKind::Grid:
        case ErrorKind::Chart:
            return 4;
        case ErrorKind::Accuracy:
            return 5;
        case ErrorKind::Io:
            return 6;
    }
    return 1;
}

int run_pipeline(const RunConfig& cfg, const std::string& command, const std::vector<std::string>& argv_echo) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::string started = utc_now();
    int status = 0;
    std::string message;
    Timing tm;
    std::unique_ptr<Out> out;
    try {
        validate(cfg);
        out = std::make_unique<Out>(cfg);
        if (command == "delaunay") cmd_delaunay(cfg, *out);
        else if (command == "schwarzschild") cmd_schwarzschild(cfg, *out);
        else if (command == "linearize") cmd_linearize(cfg, *out);
        else if (command == "jacobi-check") cmd_jacobi(cfg, *out);
        else if (command == "glue") cmd_glue(cfg, *out);
        else if (command == "residual") cmd_residual(cfg, *out);
        else if (command == "solve") cmd_solve(cfg, *out);
        else if (command == "verify") {
            if (!cmd_verify(cfg, *out, tm)) {
                status = 5;
                message = "at least one acceptance criterion failed";
            }
        } else throw config_error("unknown command '" + command + "'");
    } catch (const Error& e) {
        status = exit_code(e.kind());
        message = e.what();
    }
    if (!message.empty()) std::cerr << "sigmak " << command << ": " << message << '\n';

    if (out) {
        ordered_json meta;
        meta["command"] = command;
        meta["argv"] = argv_echo;
        meta["started_utc"] = started;
        meta["finished_utc"] = utc_now();
        meta["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        meta["exit_status"] = status;
        if (!message.empty()) meta["message"] = message;
        ordered_json t = ordered_json::object();
        for (const auto& [k, v] : tm.items) t[k] = v;
        meta["timings"] = t;
        meta["files"] = out->written();
        try {
            out->json(command + ".meta.json", meta);
        } catch (const Error& e) {
            std::cerr << "sigmak " << command << ": " << e.what() << '\n';
            if (status == 0) status = exit_code(e.kind());
        }
    }
    return status;
}

}  // namespace sigmak
