#pragma once

#include "sigmak/delaunay.hpp"
#include "sigmak/errors.hpp"
#include "sigmak/symfun.hpp"

#include <vector>

namespace sigmak {

/// a_eta and p_eta at one point, from v and F = v^p / h^k.
double a_eta_of(double F, const DimensionParams& P);
double p_eta_of(double v, double F, const DimensionParams& P);

/// Conjugation data at one orbit point: g = h^{(k-1)/2} with two t-derivatives, a_eta, p_eta and
/// the prefactor -C v g, so that L[w] = pref (d_t^2 + a Lap_theta - p)(g w).
struct ConjugateCoefficients {
    double g = 0, g1 = 0, g2 = 0, a = 0, p = 0, pref = 0;
};
ConjugateCoefficients conjugate_coefficients(const OrbitPoint& b, const DimensionParams& P);

struct ModeCoefficients {
    std::vector<double> t, a_eta, p_eta;
};

/// Coefficients of the conjugate operator d^2/dt^2 + a_eta Lap_theta - p_eta on the given t-grid.
ModeCoefficients delaunay_coefficients(const DelaunayOrbit& orbit, const std::vector<double>& tgrid);

/// h = v^2 - c^2 vdot^2 with its first two t-derivatives along a radial profile.
struct HJet {
    double h = 0, h1 = 0, h2 = 0;
};
HJet h_jet(const OrbitPoint& p, const DimensionParams& P);

/// Eigenvalue m(n-2+m) of -Lap on S^{n-1} and the dimension of its eigenspace.
double sphere_eigenvalue(int m, int n);
int sphere_multiplicity(int m, int n);

struct IndicialData {
    std::vector<double> lambda;      // lambda_m, m = 0..M_max
    std::vector<int> multiplicity;
    double delta0 = 0.0, delta1 = 1.0;
    double delta_bar = 0.0;
};
IndicialData spectral_data(const DimensionParams& P, int M_max = 12);

/// min over the orbit of a_eta lambda + p_eta for the first high band (lambda = 2n).
double coercivity_margin(const DelaunayOrbit& orbit, int samples = 400);

/// Paper form of the linearized operator about a Delaunay solution at one point, for an
/// axisymmetric w with exact jet, at polar angle psi.
double linearized_point(const OrbitPoint& base, const PointJet& w, double psi, bool pole, const DimensionParams& P);

/// Same operator on a grid: w is differenced, the orbit coefficients are exact.
/// The field's t-grid is taken in the orbit's own coordinate.
AxiSymField apply_linearized(const AxiSymField& w, const DelaunayOrbit& orbit);

/// Per-mode form: L^m[w] = -C v h^{(k-1)/2} (d^2/dt^2 - lambda_m a_eta - p_eta)(h^{(k-1)/2} w).
/// Uniform grid t0 + i ht; end entries are left at zero.
std::vector<double> apply_linearized_mode(const std::vector<double>& w, double t0, double ht, int m,
                                          const DelaunayOrbit& orbit);
/// Conjugate per-mode operator z'' - lambda_m a_eta z - p_eta z.
std::vector<double> apply_conjugate_mode(const std::vector<double>& z, double t0, double ht, int m,
                                         const DelaunayOrbit& orbit);

/// Linearization about a Schwarzschild profile, -C v h^{k-1} [d_t^2 + (n-k)/(k(n-1)) Lap - a^2] w.
double schwarzschild_linearized_point(const SchwarzschildProfile& S, double t, const PointJet& w, double psi,
                                      bool pole);
AxiSymField schwarzschild_linearized(const AxiSymField& w, const SchwarzschildProfile& S);

/// sigma_{k-1-j} of B for the Schwarzschild profile at level h.
double sigma_schwarzschild(int j, double h, const DimensionParams& P);

/// Least-squares slope of log|y| against t on [t_lo, t_hi].
double measure_decay_rate(const std::vector<double>& t, const std::vector<double>& y, double t_lo, double t_hi);

}  // namespace sigmak
