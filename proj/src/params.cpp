#include "sigmak/params.hpp"

#include "sigmak/errors.hpp"

#include <string>

namespace sigmak {

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
    return std::round(r);
}

DimensionParams::DimensionParams(int n_, int k_) : n(n_), k(k_) {
    if (n < 3 || k < 1 || 2 * k >= n)
        throw argument_error("dimension pair (n=" + std::to_string(n) + ", k=" + std::to_string(k) +
                             ") violates the admissibility window 2 <= 2k < n");
    a_exp = double(n - 2 * k) / (2.0 * k);
    c_exp = 1.0 / a_exp;
    p_exp = 2.0 * k * n / double(n - 2 * k);
    const double q = double(n - 2 * k) / (4.0 * k);
    C_nk = binomial(n - 1, k - 1) * std::pow(q, k - 1);
    target_sigma = std::pow(2.0, -k) * binomial(n, k);
    rhs_const = binomial(n, k) * std::pow(q, k);
}

double DimensionParams::delta_bar() const {
    const double nn = n, kk = k;
    return std::sqrt(2.0 * nn * (nn - kk) / (kk * (nn - 1.0)) + a_exp * a_exp);
}

}  // namespace sigmak
