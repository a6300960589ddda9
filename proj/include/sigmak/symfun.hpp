#pragma once

#include "sigmak/errors.hpp"
#include "sigmak/jet.hpp"
#include "sigmak/params.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace sigmak {

/// j-th elementary symmetric function, via the coefficients of prod(1 + lambda_i x).
double elem_sym(const std::vector<double>& values, int j);

/// Eigenvalues of the Schouten endomorphism at one point, sorted ascending.
struct SchoutenSpectrum {
    std::vector<double> eigenvalues;
};

SchoutenSpectrum make_spectrum(std::vector<double> values, int n);
bool cone_membership(const SchoutenSpectrum& s, int k);

/// Spectrum of g^{-1}A for the product metric dt^2 + g_{S^{n-1}}, computed from
/// Ric = diag(0, (n-2) id) and R = (n-1)(n-2).
SchoutenSpectrum cylinder_background_spectrum(int n);

/// Value and derivatives up to order two of an axisymmetric function u(t, psi).
template <class T>
struct PointJetT {
    T u{}, ut{}, up{}, utt{}, utp{}, upp{};
};
using PointJet = PointJetT<double>;

/// Entries of B = (n-2k)/(2k) u^{2n/(n-2k)} g_u^{-1} A_{g_u} for the cylinder background,
/// in the orthonormal frame (e_t, e_psi, e_Omega): the (t,psi) block and the
/// (n-2)-fold eigenvalue mu.
template <class T>
struct BBlock {
    T tt{}, tp{}, pt{}, pp{}, mu{};
};

template <class T>
BBlock<T> b_block(const PointJetT<T>& j, double psi, bool pole, const DimensionParams& P) {
    const double a = P.a_exp;
    const double q = double(P.n) / double(P.n - 2 * P.k);
    const double r = double(P.k) / double(P.n - 2 * P.k);
    const T u2 = j.u * j.u;
    const T g2 = j.ut * j.ut + j.up * j.up;
    BBlock<T> b;
    b.tt = -(a / 2) * u2 - j.u * j.utt + q * (j.ut * j.ut) - r * g2;
    b.tp = -(j.u * j.utp) + q * (j.ut * j.up);
    b.pt = -(j.u * j.utp) + q * (j.up * j.ut);
    b.pp = (a / 2) * u2 - j.u * j.upp + q * (j.up * j.up) - r * g2;
    // Hessian of u(t,psi) along the (n-2) orthogonal sphere directions is cot(psi) u_psi;
    // at the poles it closes to u_psipsi.
    const T hom = pole ? j.upp : (std::cos(psi) / std::sin(psi)) * j.up;
    b.mu = (a / 2) * u2 - j.u * hom - r * g2;
    return b;
}

template <class T>
T sigma_k_block(const BBlock<T>& b, const DimensionParams& P) {
    const int n = P.n, k = P.k;
    const T tr = b.tt + b.pp;
    const T det = b.tt * b.pp - b.tp * b.pt;
    auto mupow = [&](int e) {
        T r(1.0);
        for (int i = 0; i < e; ++i) r = r * b.mu;
        return r;
    };
    T s = binomial(n - 2, k) * mupow(k);
    if (k >= 1) s = s + tr * (binomial(n - 2, k - 1) * mupow(k - 1));
    if (k >= 2) s = s + det * (binomial(n - 2, k - 2) * mupow(k - 2));
    return s;
}

/// Pointwise N(u, g_cyl) = sigma_k(B) - rhs_scale * binom(n,k)((n-2k)/(4k))^k u^{2kn/(n-2k)}.
/// rhs_scale = 0 gives the sigma_k-flat operator used for Schwarzschild necks.
template <class T>
T residual_point(const PointJetT<T>& j, double psi, bool pole, const DimensionParams& P, double rhs_scale = 1.0) {
    const T s = sigma_k_block(b_block(j, psi, pole, P), P);
    return s - (rhs_scale * P.rhs_const) * pow(j.u, P.p_exp);
}

inline double residual_point(const PointJet& j, double psi, bool pole, const DimensionParams& P,
                             double rhs_scale = 1.0) {
    const double s = sigma_k_block(b_block(j, psi, pole, P), P);
    return s - rhs_scale * P.rhs_const * std::pow(j.u, P.p_exp);
}

/// Closed-form spectrum at one point (2x2 block by the quadratic formula).
SchoutenSpectrum spectrum_point(const PointJet& j, double psi, bool pole, const DimensionParams& P);

/// Partial derivatives of the pointwise residual with respect to (u, ut, up, utt, utp, upp).
struct LinCoeffs {
    double c[6] = {0, 0, 0, 0, 0, 0};
    double value = 0;
};
LinCoeffs linearization_point(const PointJet& j, double psi, bool pole, const DimensionParams& P,
                              double rhs_scale = 1.0);

/// Axisymmetric field on a uniform (t, psi) grid, psi in [0, pi] including both poles.
class AxiSymField {
public:
    AxiSymField() = default;
    AxiSymField(int nt, int np, double t0, double ht);

    int nt() const { return nt_; }
    int np() const { return np_; }
    double t0() const { return t0_; }
    double ht() const { return ht_; }
    double hp() const { return hp_; }
    double t(int i) const { return t0_ + i * ht_; }
    double psi(int j) const { return j * hp_; }
    bool is_pole(int j) const { return j == 0 || j == np_ - 1; }

    double& operator()(int i, int j) { return v_[std::size_t(i) * np_ + j]; }
    double operator()(int i, int j) const { return v_[std::size_t(i) * np_ + j]; }
    std::vector<double>& data() { return v_; }
    const std::vector<double>& data() const { return v_; }

    /// Second-order finite-difference jet; one-sided in t on the first and last rows,
    /// reflection (even extension) across the poles.
    PointJet jet(int i, int j) const;

    /// Largest one-sided psi-derivative at the poles relative to max |u|.
    double pole_defect() const;
    void check_pole_closure(double tol = 1e-6) const;
    void check_positive() const;

private:
    int nt_ = 0, np_ = 0;
    double t0_ = 0, ht_ = 0, hp_ = 0;
    std::vector<double> v_;
};

/// Eigenvalues of B at every node of u (row-major), background g_cyl.
std::vector<SchoutenSpectrum> schouten_endomorphism(const AxiSymField& u, const DimensionParams& P);

/// N(u, (1+c) g_cyl) on the grid. With a correction c, conformal equivariance gives
/// N(u, (1+c) g_cyl) = (1+c)^{-n/2} N((1+c)^{(n-2k)/(4k)} u, g_cyl).
AxiSymField nonlinear_residual(const AxiSymField& u, const AxiSymField* correction, const DimensionParams& P,
                               double rhs_scale = 1.0);

}  // namespace sigmak
