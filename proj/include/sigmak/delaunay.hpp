#pragma once

#include "sigmak/params.hpp"

#include <memory>
#include <vector>

namespace sigmak {

/// H(v, vdot) = [v^2 - c_exp^2 vdot^2]^k - v^{p_exp}.
double hamiltonian(double v, double vdot, const DimensionParams& P);

/// Right side of the radial equation solved for vddot.
double delaunay_rhs(double v, double vdot, const DimensionParams& P);
/// Partials of delaunay_rhs with respect to v and vdot.
void delaunay_rhs_partials(double v, double vdot, const DimensionParams& P, double& fv, double& fvd);

/// Hamiltonian level of the orbit with neck-size eta: v(0) = eta^{(n-2k)/(2k)}, vdot(0) = 0.
double H0_of_eta(double eta, const DimensionParams& P);

/// Angular frequency of small oscillations about v_cyl.
double equilibrium_frequency(const DimensionParams& P);

struct StepControl {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int samples_per_period = 2048;
    double drift_tol = 1e-8;
};

struct OrbitPoint {
    double v = 0, vd = 0, vdd = 0, vddd = 0;
};

/// One period of a Delaunay-type solution started at its minimum, with the
/// eta-derivative (variational) field carried along.
class DelaunayOrbit {
public:
    DimensionParams params;
    double eta = 0;
    double H0 = 0;
    double T = 0;         // period
    double dT_deta = 0;   // derivative of the period in eta
    std::vector<double> t, v, vd;      // uniform samples on [0, T]
    std::vector<double> w, wd;         // d/deta of v and vdot at fixed t

    /// v and its first three derivatives at any real t (periodic extension).
    OrbitPoint eval(double tt) const;
    /// d/deta v(t; eta) and its first two t-derivatives (grows linearly in |t|).
    OrbitPoint eval_eta_derivative(double tt) const;

    double h(double tt) const;
    double F(double tt) const;
    double max_v() const;
    double min_v() const;
    /// Position in (0, T) of the maximum of v.
    double bulge() const { return 0.5 * T; }
    double max_drift() const;
};

/// Integrates the orbit; throws on eta outside (0, eta_sup) or unrecoverable drift.
DelaunayOrbit solve_orbit(double eta, const DimensionParams& P, const StepControl& sc = {});

/// Difference v_{eta + d}(t) - v_eta(t) on [t_min, t_max] for the neck-size family. It is integrated
/// as a difference along the base orbit, so its round-off scales with |d| rather than with v; v + delta
/// with delta'' taken from the equation solves the ODE up to that round-off.
class OrbitShift {
public:
    std::shared_ptr<const DelaunayOrbit> base;
    double d_eta = 0;
    double t_min = 0, h = 0;
    std::vector<double> dv, dvd;  // samples at t_min + i h

    /// delta, delta', delta'' at t in [t_min, t_max]; vddd is not filled.
    OrbitPoint eval(double t) const;
    double t_max() const { return t_min + h * double(dv.size() - 1); }
};
OrbitShift shift_orbit(std::shared_ptr<const DelaunayOrbit> base, double d_eta, double t_min, double t_max);

/// Direct integration over [0, t_end] without periodic reuse, sampled every dt. Retries with tighter
/// tolerances while the relative Hamiltonian drift exceeds sc.drift_tol.
struct Trajectory {
    std::vector<double> t, v, vd;
};
Trajectory integrate_trajectory(double eta, const DimensionParams& P, double t_end, double dt,
                                const StepControl& sc = {});

/// v(t) = sqrt(h0) cosh((n-2k) t/(2k) - c).
struct SchwarzschildProfile {
    DimensionParams params;
    double h0 = 1, c = 0;

    OrbitPoint eval(double t) const;
    double h(double t) const;
};

SchwarzschildProfile schwarzschild_profile(double h0, double c, const DimensionParams& P);

}  // namespace sigmak
