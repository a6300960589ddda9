#pragma once

// Global linear solve on M_eps and the Newton iteration to an exact solution.
//
// M_eps is covered by three overlapping charts: the two end grids (r, psi) on [-L, L] x [0, pi] and the
// neck grid (t, psi) on [log eps, -log eps] x [0, pi]. End nodes with |x| < hole_radius are not solved
// for; those next to solved nodes take their values from the neck by bicubic interpolation, and the
// two neck boundary rows (|x| = 1) take theirs from the ends. Unknowns are the cylinder-level
// corrections dU on every chart plus the axial deficiency coefficients (a^{i,+}_{0,1}, a^{i,-}_{0,1}).
// Every chart row evaluates N(u, g_bar) with the exact jets of the base and centered differences of dU.

#include "sigmak/glue.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <memory>
#include <vector>

namespace sigmak {

/// One field per chart.
struct CompositeField {
    std::array<AxiSymField, 2> end;
    AxiSymField neck;
};

enum class NodeKind : char { Active, Fringe, Hole, Dirichlet };

class CompositeSystem {
public:
    using Vec = Eigen::VectorXd;
    using SpMat = Eigen::SparseMatrix<double>;

    CompositeSystem(const GluedGeometry& geo, const GlobalNormSpec& spec);

    const GluedGeometry& geometry() const { return *geo_; }
    const GlobalNormSpec& spec() const { return spec_; }
    int size() const { return n_unknowns_; }
    int end_index(int e, int i, int j) const { return end_off_[e] + i * np_ + j; }
    int neck_index(int i, int j) const { return neck_off_ + i * np_ + j; }
    int coeff_index(int k) const { return coeff_off_ + k; }
    int coeff_count() const { return 8; }
    NodeKind kind(int e, int i, int j) const { return kind_[e][std::size_t(i) * np_ + j]; }
    const PsiBasis& basis() const { return *basis_; }

    /// Rows holding the elliptic equation (active end nodes, interior neck nodes).
    bool is_pde_row(int row) const { return pde_row_[row] != 0; }
    /// PDE rows that own their point of M_eps (end nodes with |x| >= 1, interior neck nodes).
    bool is_owned_row(int row) const { return owned_row_[row] != 0; }

    CompositeField corrections(const Vec& U) const;
    DeficiencyCoeffs coefficients(const Vec& U) const;
    /// Family state for the coefficients of U; solves the shifted orbits when needed.
    FamilyState family(const Vec& U) const;

    /// Nonlinear residual F(U): N(u_eps(a) + dU, g_bar) on PDE rows, the interpolation and
    /// boundary conditions elsewhere.
    Vec residual(const Vec& U) const;
    /// Exact Jacobian of residual at U = 0 (the linearization L(u_eps, g_bar) with the deficiency columns).
    const SpMat& jacobian() const;
    /// Jacobian of residual at U: the linearization at u_eps(a) + dU, family columns by differences.
    SpMat jacobian_at(const Vec& U) const;
    /// Solves J0 x = b with the stored factorization.
    Vec solve(const Vec& b) const;

    /// Weighted C^0 norm of a right side over the owned PDE rows (neck index gamma - (n-2k)).
    double f_norm(const Vec& F) const;
    /// Weighted C^2 norm of w = dU / (background factor) on owned nodes plus the coefficient sum.
    double w_norm(const Vec& U) const;
    /// Places a right side given per chart on the PDE rows.
    Vec rhs_from(const CompositeField& f) const;
    /// Total cylinder-level factor on every chart at nodes that are solved for.
    CompositeField total_factor(const Vec& U) const;

    /// Size of the cancelling terms per PDE row, scale (binom(n,k) |B|^k + c u^p), for relative residuals.
    Vec residual_magnitude(const Vec& U) const;

    /// Quadratic remainder Q = F(U) - F(0) - J0 U, row by row.
    Vec quadratic_remainder(const Vec& U) const;

    /// Unknown blocks used by the interface decomposition: interface nodes r = +-R on each end, the
    /// exterior pieces |r| > R with the deficiency unknowns, and the core (|r| < R and the neck).
    std::vector<int> interface_unknowns() const;
    std::vector<int> exterior_unknowns() const;
    std::vector<int> core_unknowns() const;
    /// Exterior piece (end e, side 0 for r > R, 1 for r < -R) an unknown belongs to, or -1.
    int exterior_piece(int idx) const;

private:
    struct Interp {
        int row = 0;
        std::array<int, 16> idx{};
        std::array<double, 16> w{};
        double scale = 1;
    };
    struct PdeRow {
        int row = 0;
        int chart = 0;  // 0, 1 end charts, 2 neck
        int i = 0, j = 0;
        double scale = 1;   // v^{-p} or (1 + c)^{-n/2}
        Jet2 base;          // exact jet of the straight base factor
        bool exact_base = false;  // owned end row off the cutoff annulus: N(base) = 0 identically
    };

    void classify();
    void build_interpolation();
    void build_pde_rows();
    void assemble_jacobian();
    std::vector<Eigen::Triplet<double>> linear_triplets(const Vec* U, const FamilyState* fam) const;
    PointJet fd_jet(const Vec& U, int chart, int i, int j) const;
    double weight_of_row(int row) const;
    Interp make_interp(int row, int src_chart, double s, double psi, double scale) const;

    const GluedGeometry* geo_;
    GlobalNormSpec spec_;
    int np_ = 0;
    std::array<int, 2> end_off_{};
    int neck_off_ = 0, coeff_off_ = 0, n_unknowns_ = 0;
    std::array<std::vector<NodeKind>, 2> kind_;
    std::vector<char> pde_row_, owned_row_;
    std::vector<Interp> interps_;
    std::vector<PdeRow> pde_rows_;
    std::unique_ptr<PsiBasis> basis_;
    SpMat J0_;
    std::unique_ptr<Eigen::SparseLU<SpMat>> lu_;
    mutable std::array<std::pair<double, std::shared_ptr<const OrbitShift>>, 2> shifted_cache_;
};

/// Step limiter for the family parameters. The translation and neck-size parameters (j = 0) are capped
/// directly; the bending parameters (j = 1) enter as a e^{-+r} and are capped through the displacement
/// |a| e^{-(R' - 1)} they cause where the cutoff switches on.
void check_coefficient_cap(const CompositeSystem& sys, const DeficiencyCoeffs& c, double cap);

/// Base factor with the deficiency family: the displayed family formula beyond R' - 1 on each end,
/// u_eps elsewhere. Returned per chart as the total cylinder-level factor of u_eps(a, .).
CompositeField family_variation(const CompositeSystem& sys, const DeficiencyCoeffs& coeffs, double cap = 0.1);

struct LinearSolution {
    CompositeField w_hat;
    DeficiencyCoeffs coeffs;
    CompositeSystem::Vec U;
};
LinearSolution global_linear_solve(const CompositeSystem& sys, const CompositeField& f);

/// Interface decomposition of J0 x = b at r = +-R_i.
struct DtnReport {
    Eigen::MatrixXd T, S;          // exterior and interior Dirichlet-to-flux maps on the interface
    Eigen::MatrixXd A_gg;          // interface rows restricted to interface unknowns
    double condition = 0;          // of A_gg + T - S
    double T_offblock = 0;         // largest |entry| of T coupling different boundary components
    CompositeSystem::Vec x;        // matched solution
};
DtnReport dtn_maps(const CompositeSystem& sys, const CompositeSystem::Vec& b);
/// Interface operator S restricted to psi-modes 0..M_max on each component, in the discrete mode basis.
Eigen::MatrixXd project_modes(const CompositeSystem& sys, const Eigen::MatrixXd& S, int M_max);

struct NewtonControl {
    double tol = 1e-9;
    int max_iter = 60;
    double coeff_cap = 0.1;
    /// Refactor the Jacobian at every iterate (Newton's method) instead of the fixed-point scheme with L
    /// factored once. Used where the fixed-point map fails to contract.
    bool relinearize = false;
};

struct SolutionBundle {
    CompositeSystem::Vec U;
    CompositeField w_hat;
    DeficiencyCoeffs coeffs;
    std::vector<double> residual_norms;  // ||N|| before each step and at the end
    std::vector<double> iterate_norms;   // ||w_j||, j = 1, 2, ...
    std::vector<double> step_norms;      // ||w_{j+1} - w_j||, with w_0 = 0
    std::vector<double> contraction;     // step_{j+1} / step_j
    double final_residual = 0;
    double min_factor = 0;               // smallest total factor over solved nodes
    double sigma_defect = 0;             // max |sigma_k(g^{-1}A) - 2^{-k} binom(n,k)| over owned end nodes
    double relative_residual = 0;        // max |N| / (binom(n,k) |B|^k + c u^p) over all owned nodes
    CompositeField final_residual_field;
    int iterations = 0;
};

/// Chord iteration w_{i+1} = w_i - L^{-1} N(u_eps(a_i) + w_hat_i): the fixed-point scheme
/// w = L^{-1}[-N(u_eps) - Q(w, w)] with L factored once.
SolutionBundle newton_solve(const CompositeSystem& sys, const NewtonControl& ctl = {});

/// Measured constants of the construction.
struct MeasuredConstants {
    double A = 0;        // ||N(u_eps)|| / eps^{gamma (n-2k)/n}
    double L = 0;        // largest ||J0^{-1} f|| / ||f|| over the probes
    double C = 0;        // same ratio, the a priori constant of the global estimate
    double coercivity_margin = 0;
    double residual_norm = 0;
};
MeasuredConstants measure_constants(const CompositeSystem& sys);

/// Probe right sides used for L and C: N(u_eps) and smooth bumps on the ends and in the neck.
std::vector<CompositeSystem::Vec> probe_rhs(const CompositeSystem& sys);

}  // namespace sigmak
