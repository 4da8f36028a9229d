#pragma once

#include <cmath>
#include <limits>

#include "bibstat/errors.hpp"

namespace bibstat {

inline double logistic(double x) {
    // Evaluate from the bounded side to avoid overflow.
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double log1p_exp(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / 1.4142135623730951); }

inline double two_sided_p_normal(double z) { return 2.0 * (1.0 - normal_cdf(std::fabs(z))); }

// Regularized incomplete beta via Lentz's continued fraction.
double incomplete_beta(double a, double b, double x);

// Student-t distribution, used when inference is referred to t with
// cluster-count degrees of freedom instead of the normal default.
double student_t_cdf(double t, double df);
double student_t_quantile(double p, double df);
double two_sided_p_student_t(double t, double df);

} // namespace bibstat
