#pragma once

#include <cmath>
#include <numbers>

namespace goldenphy {

// exp(-|x|) I0(x): scaled modified Bessel function of order zero. Power
// series below z = 20, asymptotic expansion above; the crossover mismatch is
// ~1e-12 relative, small enough that adaptive quadrature over Rician
// densities never stalls on it. The scaled form stays finite for the large
// arguments that appear at high SNR.
inline double bessel_i0e(double x) {
    const double z = std::fabs(x);
    if (z <= 20.0) {
        const double q = z * z / 4.0;
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < 200; ++k) {
            term *= q / (static_cast<double>(k) * static_cast<double>(k));
            sum += term;
            if (term < sum * 1e-18) break;
        }
        return sum * std::exp(-z);
    }
    // I0(z) ~ e^z / sqrt(2 pi z) * sum_k ((2k-1)!!)^2 / (k! (8z)^k)
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= 12; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= odd * odd / (8.0 * static_cast<double>(k) * z);
        sum += term;
    }
    return sum / std::sqrt(2.0 * std::numbers::pi * z);
}

inline double bessel_i0(double x) {
    return bessel_i0e(x) * std::exp(std::fabs(x));
}

}  // namespace goldenphy
