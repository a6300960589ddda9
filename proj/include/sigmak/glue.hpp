#pragma once

// Connected sum of two Delaunay-type ends D_1, D_2 at points on their bulges.
//
// Each end keeps its cylinder coordinates (r, psi) on [-L, L] x [0, pi]. The puncture p_i sits at
// r = t0 = T/2, psi = 0. A Moebius map of the meridian plane,
//     Y = e^{t0} e^{-r + i psi},   x = Kc (1/conj(Y + 1) - 1/2),   Kc = 4 v(t0)^{1/a},
// gives coordinates x centered at p_i in which g_i = (1 + c_i) |dx|^2 with c_i(0) = 0 and
// grad c_i(0) = 0. The neck N_eps = (log eps, -log eps) x S^{n-1} is glued in with
// t = log eps - log|x_1| on side 1 and t = -log eps + log|x_2| on side 2.

#include "sigmak/cylsolve.hpp"
#include "sigmak/delaunay.hpp"
#include "sigmak/jet.hpp"
#include "sigmak/symfun.hpp"

#include <array>
#include <memory>
#include <optional>
#include <vector>

namespace sigmak {

struct GlueConfig {
    int n = 5, k = 2;
    double eta1 = 0.5, eta2 = 0.5;
    double epsilon = 1e-3;
    double eps_max = 0.05;        // largest admissible necksize
    int steps_per_period = 200;   // end grid spacing T/steps
    int np = 49;                  // psi-nodes on every chart
    double hole_radius = 0.5;     // end-chart nodes with |x| below this are not solved for
    double R_margin = 1.0;        // R_min = (largest |r| on the unit ball) + R_margin
    double Rp_offset = 1.5;       // R' = R + Rp_offset
    double L_offset = 4.0;        // L >= R' + L_offset
};

/// One end: orbit, chart constants, interface radii and the (r, psi) grid.
struct EndData {
    std::shared_ptr<const DelaunayOrbit> orbit;
    double t0 = 0, Kc = 0;
    double R = 0, Rp = 0, L = 0, h = 0;
    int Nr = 0;                   // r-nodes, r_i = -L + i h
    double ball_extent = 0;       // max |r| over |x| <= 1

    double r(int i) const { return -L + i * h; }
};

/// Jacobi-family parameters per end: plus[j] multiplies Psi^{j,+} at r -> +inf, minus[j] multiplies
/// Psi^{j,-} at r -> -inf, j = 0..n. Only the axial j = 0, 1 may be nonzero on axisymmetric grids.
struct DeficiencyCoeffs {
    std::array<std::vector<double>, 2> plus, minus;

    static DeficiencyCoeffs zeros(int n);
    double norm() const;  // sum of absolute values of all components
    /// Flat axial vector (end, side, j): [a^{1,+}_0, a^{1,+}_1, a^{1,-}_0, a^{1,-}_1, a^{2,+}_0, ...].
    std::vector<double> axial() const;
    void set_axial(const std::vector<double>& x);
};

/// Deficiency coefficients together with the neck-size shifts v_{eta + b0} - v_eta they require.
struct FamilyState {
    DeficiencyCoeffs coeffs;
    std::array<std::shared_ptr<const OrbitShift>, 2> shifted;  // null when minus[0] == 0
};

class GluedGeometry {
public:
    DimensionParams P;
    GlueConfig cfg;
    double epsilon = 0;
    std::array<EndData, 2> ends;
    UniformGrid neck;   // t-grid on [log eps, -log eps]
    int np = 0;

    double log_eps() const { return std::log(epsilon); }
    double hp() const { return M_PI / (np - 1); }

    /// eta: 1 on (log eps, -1], 0 on [1, -log eps). chi: 1 on (log eps, -log eps - 1], 0 at -log eps.
    Profile3 eta(double t) const;
    Profile3 chi(double t) const;
    /// u_1 = eps^a e^{-a t}, u_2 = eps^a e^{a t} and u_eps = chi(t) u_1 + chi(-t) u_2 on the neck.
    Profile3 u1(double t) const;
    Profile3 u2(double t) const;
    Profile3 u_eps(double t) const;

    // Coordinate maps (side i = 0, 1 means end 1, 2). Angles are folded into [0, pi].
    CJet end_to_x(int i, const Jet2& r, const Jet2& psi) const;
    /// |x| of an end node, +inf at the antipodal singular point.
    double end_abs_x(int i, double r, double psi) const;
    void x_to_end(int i, double xr, double xi, double& r, double& psi) const;
    void end_to_neck(int i, double r, double psi, double& t, double& psin) const;
    void neck_to_end(int i, double t, double psin, double& r, double& psi) const;
    /// Lambda = (mu |y| / |x|)^a with U_end = Lambda U_neck at the same point.
    double chart_factor(int i, double r, double psi) const;

    /// 1 + c_i at a neck point, through end i's chart, with jets in (t, psi_neck).
    Jet2 one_plus_c_side(int i, const Jet2& t, const Jet2& psin) const;
    /// 1 + c = eta (1 + c_1) + (1 - eta)(1 + c_2).
    Jet2 one_plus_c(double t, double psin) const;
    /// c_i as a function of x near the puncture, for the normalization checks.
    double c_at_x(int i, double xr, double xi) const;

    /// Cylinder-level factor U_neck = u_eps (1 + c)^{a/2}: g_eps = U_neck^{4k/(n-2k)} g_cyl on the neck.
    Jet2 neck_base(double t, double psin) const;
    /// Cylinder-level factor on end i: v(r) (1 + chi(-tau) e^{2 a tau}) inside |x| < 1,
    /// v(r) elsewhere, with the Jacobi families beyond R' - 1 when a family state is given.
    Jet2 end_base(int i, double r, double psi, const FamilyState* fam = nullptr) const;
    /// d(end_base)/d(coefficient) at zero: chi_{+-R'} Psi^{j,+-} phi_j.
    Jet2 deficiency_jet(int i, int side, int j, double r, double psi) const;
};

/// Neck-size shift of end i's orbit by b0, sampled over the r-range the minus family uses.
std::shared_ptr<const OrbitShift> family_shift(const GluedGeometry& geo, int i, double b0);

/// Validates eps and the ends, solves the orbits, fixes t0, Kc, R (bracket rule), R', L and the grids.
GluedGeometry build_geometry(const GlueConfig& cfg);

/// c on the neck grid.
AxiSymField background_correction(const GluedGeometry& geo);

/// u_eps relative to each chart's background: neck (u_eps(t) on the neck grid) and ends
/// (U_end / v, which is 1 outside the unit balls).
struct ApproximateSolution {
    const GluedGeometry* geo = nullptr;
    AxiSymField neck_u, neck_c;
    std::array<AxiSymField, 2> end_u;
    double max_interface_jump = 0;
};
ApproximateSolution approximate_solution(const GluedGeometry& geo);

/// Ownership masks: end nodes with |x| >= 1 belong to D_i minus the ball; the neck owns its grid.
std::vector<char> end_owned_mask(const GluedGeometry& geo, int i);
std::vector<char> end_compact_mask(const GluedGeometry& geo, int i, double x_min);

/// Weighted norms on M_eps: ends with (cosh r)^{delta} (index -delta), neck with (eps cosh t)^{gamma'}.
struct GlobalNormSpec {
    double delta = 0, gamma = 0;
    int n = 5;
    WeightedNormSpec end() const;
    WeightedNormSpec neck(double epsilon, double index) const;
};

struct ResidualProfile {
    std::array<AxiSymField, 2> end;  // N(u_eps, g_bar) on the end grids
    AxiSymField neck;                // N(u_eps, g_bar) on the neck grid
    double norm = 0;                 // C^0 norm with f-weights (neck index gamma - (n-2k))
    double outside_max = 0;          // sup |N| over the owned end nodes (zero up to round-off)
    bool cone_ok = true;             // Gamma_{k-1}^+ at every owned node
};
ResidualProfile residual_profile(const ApproximateSolution& approx, const GlobalNormSpec& spec);

/// C^2 norm of (U / v)^{2/a} - 1 over the end nodes selected by mask, with U given by base jets plus
/// an optional grid correction dU (same grid as the end chart).
double metric_deviation_c2(const GluedGeometry& geo, int i, const std::vector<char>& mask,
                           const FamilyState* fam = nullptr, const AxiSymField* dU = nullptr);

}  // namespace sigmak
