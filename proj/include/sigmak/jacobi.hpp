#pragma once

#include "sigmak/cutoff.hpp"
#include "sigmak/delaunay.hpp"

#include <vector>

namespace sigmak {

enum class JacobiKind { ZeroMinus, ZeroPlus, Minus, Plus };
enum class Growth { Linear, Bounded, GrowsExp, DecaysExp };

/// First-band spherical harmonic phi_j(theta) = theta_j (the j-th coordinate on S^{n-1}),
/// eigenvalue n-1. The axial one used on axisymmetric grids is j = 1, phi_1 = cos(psi).
double first_band_harmonic(int j, const std::vector<double>& theta);

/// One Jacobi field about a Delaunay solution: radial profile times phi_j.
struct JacobiField {
    JacobiKind kind = JacobiKind::ZeroPlus;
    int j = 0;  // 0 for the 0-kinds, 1..n otherwise
    Growth growth = Growth::Bounded;
    const DelaunayOrbit* orbit = nullptr;

    /// Spherical-harmonic band of the angular factor (0 or 1).
    int band() const { return j == 0 ? 0 : 1; }
    /// Radial profile and its first two t-derivatives.
    Profile3 profile(double t) const;
    double eval(double t, const std::vector<double>& theta) const;
    const char* name() const;
};

/// All 2n+2 fields: 0-, 0+, then j-, j+ for j = 1..n. The orbit must outlive the result.
std::vector<JacobiField> jacobi_fields(const DelaunayOrbit& orbit);

/// Sup of |L[Psi]| (per-mode, sup |phi_j| = 1) at spacing ht over one period: [0, T], or [-T, 0]
/// for the growing j- fields.
double kernel_residual(const JacobiField& f, double ht, double scale = 1.0);
/// Same for the conjugated field h^{(k-1)/2} Psi under d_t^2 - lambda a_eta - p_eta.
double conjugate_kernel_residual(const JacobiField& f, double ht);

enum class DeficiencyFlavor { W, PlusOnly, MinusOnly };

/// chi_{R'} Psi with chi_{R'} = 0 for t <= R'-1 and 1 for t >= R'.
struct DeficiencyElement {
    JacobiField field;
    double R_prime = 0;
    Profile3 profile(double t) const;
    double eval(double t, const std::vector<double>& theta) const;
};

struct DeficiencyBasis {
    std::vector<DeficiencyElement> elements;
    double R_prime = 0;
    DeficiencyFlavor flavor = DeficiencyFlavor::W;
};

/// Requires R' - 1 > R.
DeficiencyBasis deficiency_basis(const DelaunayOrbit& orbit, double R, double R_prime, DeficiencyFlavor flavor);

}  // namespace sigmak
