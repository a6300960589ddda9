#pragma once

#include <cmath>

namespace sigmak {

double binomial(int n, int k);

/// The pair (n, k) with 2 <= 2k < n and the exponents derived from it.
struct DimensionParams {
    int n = 5;
    int k = 2;
    double a_exp = 0.0;     // (n-2k)/(2k), the exponent of the neck profiles
    double c_exp = 0.0;     // 2k/(n-2k) = 1/a_exp
    double p_exp = 0.0;     // 2kn/(n-2k)
    double C_nk = 0.0;      // binom(n-1,k-1) ((n-2k)/(4k))^(k-1)
    double target_sigma = 0.0;  // 2^-k binom(n,k)
    double rhs_const = 0.0;     // binom(n,k) ((n-2k)/(4k))^k

    DimensionParams() : DimensionParams(5, 2) {}
    DimensionParams(int n_, int k_);

    /// Supremum of the neck-size parameter, ((n-2k)/n)^(1/(2k)).
    double eta_sup() const { return std::pow(double(n - 2 * k) / n, 1.0 / (2.0 * k)); }
    /// Upper end of the Hamiltonian range, (2k/(n-2k)) ((n-2k)/n)^(n/(2k)).
    double H_sup() const { return c_exp * std::pow(double(n - 2 * k) / n, double(n) / (2.0 * k)); }
    /// Constant solution v_cyl = ((n-2k)/n)^((n-2k)/(4k^2)).
    double v_cyl() const { return std::pow(double(n - 2 * k) / n, double(n - 2 * k) / (4.0 * k * k)); }
    /// Lower bound for the second indicial root.
    double delta_bar() const;
};

}  // namespace sigmak
