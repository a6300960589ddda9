#include "sigmak/jacobi.hpp"

#include "sigmak/errors.hpp"
#include "sigmak/linop.hpp"

#include <cmath>
#include <string>

namespace sigmak {

double first_band_harmonic(int j, const std::vector<double>& theta) {
    if (j < 1 || j > int(theta.size())) throw argument_error("first-band harmonic index out of range");
    return theta[std::size_t(j - 1)];
}

Profile3 JacobiField::profile(double t) const {
    const OrbitPoint p = orbit->eval(t);
    const double a = orbit->params.a_exp;
    switch (kind) {
        case JacobiKind::ZeroPlus:
            return {p.vd, p.vdd, p.vddd};
        case JacobiKind::ZeroMinus: {
            const OrbitPoint w = orbit->eval_eta_derivative(t);
            return {w.v, w.vd, w.vdd};
        }
        case JacobiKind::Minus: {
            const double e = std::exp(t);
            const double b = a * p.v + p.vd, b1 = a * p.vd + p.vdd, b2 = a * p.vdd + p.vddd;
            return {b * e, (b1 + b) * e, (b2 + 2 * b1 + b) * e};
        }
        case JacobiKind::Plus: {
            const double e = std::exp(-t);
            const double b = a * p.v - p.vd, b1 = a * p.vd - p.vdd, b2 = a * p.vdd - p.vddd;
            return {b * e, (b1 - b) * e, (b2 - 2 * b1 + b) * e};
        }
    }
    return {};
}

double JacobiField::eval(double t, const std::vector<double>& theta) const {
    const double ang = j == 0 ? 1.0 : first_band_harmonic(j, theta);
    return profile(t).f * ang;
}

const char* JacobiField::name() const {
    switch (kind) {
        case JacobiKind::ZeroMinus: return "0-";
        case JacobiKind::ZeroPlus: return "0+";
        case JacobiKind::Minus: return "j-";
        case JacobiKind::Plus: return "j+";
    }
    return "?";
}

std::vector<JacobiField> jacobi_fields(const DelaunayOrbit& orbit) {
    std::vector<JacobiField> out;
    out.push_back({JacobiKind::ZeroMinus, 0, Growth::Linear, &orbit});
    out.push_back({JacobiKind::ZeroPlus, 0, Growth::Bounded, &orbit});
    for (int j = 1; j <= orbit.params.n; ++j) {
        out.push_back({JacobiKind::Minus, j, Growth::GrowsExp, &orbit});
        out.push_back({JacobiKind::Plus, j, Growth::DecaysExp, &orbit});
    }
    return out;
}

namespace {

std::vector<double> sample(const JacobiField& f, double t0, int N, double ht) {
    std::vector<double> y(std::size_t(N) + 1);
    for (int i = 0; i <= N; ++i) y[i] = f.profile(t0 + i * ht).f;
    return y;
}

// Psi^{j,-}(t + T) = e^T Psi^{j,-}(t), so every period carries the same residual up to scale;
// we use the period next to t = 0 on which the profile is O(1).
double residual_window_start(const JacobiField& f) { return f.kind == JacobiKind::Minus ? -f.orbit->T : 0.0; }

}  // namespace

double kernel_residual(const JacobiField& f, double ht, double scale) {
    const double T = f.orbit->T;
    const int N = int(std::lround(T / ht));
    const double h = T / N, t0 = residual_window_start(f);
    std::vector<double> y = sample(f, t0, N, h);
    for (double& x : y) x *= scale;
    const std::vector<double> r = apply_linearized_mode(y, t0, h, f.band(), *f.orbit);
    double m = 0;
    for (double x : r) m = std::max(m, std::abs(x));
    return m;
}

double conjugate_kernel_residual(const JacobiField& f, double ht) {
    const double T = f.orbit->T;
    const int N = int(std::lround(T / ht));
    const double h = T / N, t0 = residual_window_start(f);
    std::vector<double> y = sample(f, t0, N, h);
    const DimensionParams& P = f.orbit->params;
    for (int i = 0; i <= N; ++i) {
        const OrbitPoint b = f.orbit->eval(t0 + i * h);
        const double hh = b.v * b.v - P.c_exp * P.c_exp * b.vd * b.vd;
        y[i] *= std::pow(hh, 0.5 * (P.k - 1));
    }
    const std::vector<double> r = apply_conjugate_mode(y, t0, h, f.band(), *f.orbit);
    double m = 0;
    for (double x : r) m = std::max(m, std::abs(x));
    return m;
}

Profile3 DeficiencyElement::profile(double t) const {
    const Profile3 c = ramp_up(t, R_prime - 1.0, R_prime);
    if (c.f == 0.0 && c.f1 == 0.0) return {0.0, 0.0, 0.0};
    const Profile3 p = field.profile(t);
    return {c.f * p.f, c.f1 * p.f + c.f * p.f1, c.f2 * p.f + 2 * c.f1 * p.f1 + c.f * p.f2};
}

double DeficiencyElement::eval(double t, const std::vector<double>& theta) const {
    const double ang = field.j == 0 ? 1.0 : first_band_harmonic(field.j, theta);
    return profile(t).f * ang;
}

DeficiencyBasis deficiency_basis(const DelaunayOrbit& orbit, double R, double R_prime, DeficiencyFlavor flavor) {
    if (!(R_prime - 1.0 > R))
        throw argument_error("deficiency cutoff radius must satisfy R' - 1 > R (got R = " + std::to_string(R) +
                             ", R' = " + std::to_string(R_prime) + ")");
    DeficiencyBasis b;
    b.R_prime = R_prime;
    b.flavor = flavor;
    for (const JacobiField& f : jacobi_fields(orbit)) {
        const bool plus = f.kind == JacobiKind::ZeroPlus || f.kind == JacobiKind::Plus;
        if (flavor == DeficiencyFlavor::PlusOnly && !plus) continue;
        if (flavor == DeficiencyFlavor::MinusOnly && plus) continue;
        b.elements.push_back({f, R_prime});
    }
    return b;
}

}  // namespace sigmak
