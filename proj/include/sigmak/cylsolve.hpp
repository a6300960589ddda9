#pragma once

// Linear solvers for the conjugate mode operator z'' - (lambda a_eta + p_eta) z = y on
// half and finite cylinders, angular bases, and weighted sup norms.

#include "sigmak/delaunay.hpp"
#include "sigmak/jacobi.hpp"
#include "sigmak/symfun.hpp"

#include <functional>
#include <limits>
#include <vector>

namespace sigmak {

struct UniformGrid {
    double t0 = 0, h = 1;
    int N = 0;  // number of nodes
    double t(int i) const { return t0 + i * h; }
    double t_end() const { return t0 + (N - 1) * h; }
};

/// Thomas algorithm; sub[0] and sup[N-1] are ignored. Throws on a vanishing pivot.
std::vector<double> solve_tridiagonal(const std::vector<double>& sub, const std::vector<double>& diag,
                                      const std::vector<double>& sup, std::vector<double> rhs);

/// Angular basis for axisymmetric fields on psi-nodes j*pi/(np-1).
/// Zonal: orthonormal zonal harmonics on S^{n-1} (Gegenbauer polynomials in cos psi).
/// Discrete: eigenvectors of the finite-difference sphere Laplacian used by AxiSymField jets,
/// scaled to agree with the zonal harmonic at psi = 0; mode m then decouples exactly on the grid.
class PsiBasis {
public:
    enum class Kind { Zonal, Discrete };
    static PsiBasis zonal(int n, int np, int M_max);
    static PsiBasis discrete(int n, int np, int M_max);

    Kind kind() const { return kind_; }
    int n() const { return n_; }
    int np() const { return np_; }
    int modes() const { return M_ + 1; }
    /// Eigenvalue of -Lap for mode m (exact for zonal, discrete for Discrete).
    double lambda(int m) const { return lambda_[m]; }
    double value(int m, int j) const { return vals_[std::size_t(m) * np_ + j]; }
    /// Coefficients of one psi-row.
    std::vector<double> project(const double* row) const;

private:
    Kind kind_ = Kind::Zonal;
    int n_ = 5, np_ = 0, M_ = 0;
    std::vector<double> lambda_, vals_, dual_;  // dual_: projection functionals, same layout as vals_
};

/// Orthonormal zonal harmonic of degree m on S^{n-1} at polar angle psi.
double zonal_harmonic(int m, int n, double psi);
/// Finite-difference sphere Laplacian on psi-nodes (dense np x np, row-major), pole closure (n-1) u_psipsi.
std::vector<double> discrete_sphere_laplacian(int n, int np);

/// Mode coefficients over a t-grid: u(t, theta) = sum_m coeff[m](t) phi_m(theta).
struct SpectralField {
    UniformGrid grid;
    const PsiBasis* basis = nullptr;
    std::vector<std::vector<double>> coeff;  // coeff[m][i]

    static SpectralField zeros(const UniformGrid& g, const PsiBasis& b);
    AxiSymField reconstruct() const;
    static SpectralField project(const AxiSymField& f, const PsiBasis& b);
};

/// Weight flavors. End: (cosh t)^{-delta} (the space C_delta; decaying spaces use delta < 0).
/// Neck: (eps cosh t)^{gamma}.
struct WeightedNormSpec {
    enum class Flavor { End, Neck };
    Flavor flavor = Flavor::End;
    double delta = 0;
    double gamma = 0;
    double epsilon = 1;
    double beta = 0.5;     // Holder exponent of the difference-quotient term
    bool holder = false;   // add the adjacent-node difference quotient of the top-order terms
    int n = 5;             // dimension; the (n-2) homogeneous directions enter |nabla^2 u|

    double weight(double t) const;
};

/// Admissible windows 1 < delta < delta_bar and 0 < gamma < (n-2k)/k; throws argument_error.
void check_weight_windows(const DimensionParams& P, double delta, double gamma);

/// Discrete weighted sup of sum_{j<=order} |nabla^j u| for g_cyl, at nodes where mask is nonzero
/// (all nodes when mask is empty).
double weighted_norm(const AxiSymField& u, const WeightedNormSpec& spec, int order,
                     const std::vector<char>& mask = {});
double weighted_norm(const SpectralField& u, const WeightedNormSpec& spec, int order);
/// Order-0 norm of a single mode array.
double weighted_norm(const UniformGrid& g, const std::vector<double>& z, const WeightedNormSpec& spec);

/// Potential lambda a_eta + p_eta of the conjugate mode operator.
double mode_potential(const DelaunayOrbit& orbit, double lambda, double t);

/// Conversions between w and the conjugate variables z = h^{(k-1)/2} w and
/// y = f / (-C v h^{(k-1)/2}).
double to_conjugate_solution(const DelaunayOrbit& orbit, double t, double w);
double from_conjugate_solution(const DelaunayOrbit& orbit, double t, double z);
double to_conjugate_rhs(const DelaunayOrbit& orbit, double t, double f);

using ModeRhs = std::function<double(double)>;

struct StabilizationControl {
    double T_initial = 0;       // length of the first truncated interval (0: 4 periods)
    double rel_tol = 1e-8;
    int max_doublings = 12;
    double min_margin = 1e-6;   // resonance guard for the Jacobi correction
    WeightedNormSpec spec{};    // norm used for the stopping test
};

struct ModeSolution {
    UniformGrid grid;
    std::vector<double> z;          // full solution
    std::vector<double> decaying;   // solution minus the Jacobi part (low modes)
    double jacobi_coefficient = 0;  // multiple of the conjugated Jacobi field (low modes)
    double coefficient_bound = 0;   // 1/|Phi(R)| relative to the Jacobi field's scale
    double T_final = 0;
    int doublings = 0;
};

/// Dirichlet problem on [R, R+len] with z(R) = zR and z(R+len) = 0, plain tridiagonal solve.
std::vector<double> solve_mode_dirichlet(const DelaunayOrbit& orbit, double lambda, const ModeRhs& y,
                                         const UniformGrid& g, double zL = 0.0, double zR = 0.0);

/// High band (m >= 2): Dirichlet data at R (default 0), truncation extended until the weighted
/// norm stabilizes. Refuses if the coercivity margin at this band is not positive.
ModeSolution solve_mode_high(int band, const ModeRhs& y, const DelaunayOrbit& orbit, double R, double h,
                             const StabilizationControl& sc, double boundary = 0.0, double lambda = std::numeric_limits<double>::quiet_NaN());

/// Low band (0 or 1) on [R, infinity): backward Cauchy problem from the truncation with zero data,
/// then the conjugated Jacobi field Phi is added so that z(R) = boundary. jacobi is the profile of Phi
/// before conjugation (Psi^{0,+} or Psi^{1,+} on the + side).
ModeSolution solve_mode_low(int band, const ModeRhs& y, const DelaunayOrbit& orbit, double R, double h,
                            const StabilizationControl& sc, double boundary = 0.0, double lambda = std::numeric_limits<double>::quiet_NaN(),
                            const JacobiField* jacobi = nullptr);

/// Non-degeneracy brackets of the finite-cylinder problem at R and the normalized values of the
/// mode-0 Jacobi fields there; margin is the smallest of them.
struct RadiusBrackets {
    double bracket1 = 0, bracket2 = 0;  // a + (v'/v) tanh R, a tanh R + v'/v, divided by a
    double phi0_plus = 0, phi0_minus = 0;
    double margin = 0;
};
RadiusBrackets radius_brackets(const DelaunayOrbit& orbit, double R);
/// Grid node R = origin + i h in [R_min, R_min + T) maximizing the margin; resonant_error if the
/// best margin is below min_margin.
double select_interface_radius(const DelaunayOrbit& orbit, double R_min, double origin, double h,
                               double min_margin = 1e-6);

/// Finite cylinder [-R, R], zero Dirichlet data, mode by mode (conjugate variables).
SpectralField solve_finite(const SpectralField& rhs, const DelaunayOrbit& orbit, double R,
                           double min_margin = 1e-6);

/// Half cylinder [R, inf) (sign = +1) or (-inf, -R] (sign = -1) with Dirichlet data per mode at the
/// boundary. Low bands pick up a multiple of Phi^{m,sign}; the result holds the decaying part on
/// [R, T_final] (mirrored grid for sign = -1, i.e. node i sits at t = -(R + i h)).
struct HalfSolution {
    SpectralField decaying;
    std::vector<double> coefficients;  // per low band (0, 1)
    std::vector<double> T_final;
};
HalfSolution solve_half_with_boundary(const std::vector<ModeRhs>& rhs, const std::vector<double>& boundary,
                                      const DelaunayOrbit& orbit, const PsiBasis& basis, double R, int sign,
                                      double h, const StabilizationControl& sc);

}  // namespace sigmak
