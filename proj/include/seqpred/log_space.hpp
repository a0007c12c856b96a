#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace seqpred {

// All probabilities in this library live in natural-log space. Zero
// probability is exactly -inf, and -inf + finite stays -inf, so products of
// probabilities never turn into NaN.
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)); -inf operands are exact zeros.
inline double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = a > b ? a : b;
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// log(sum_i exp(v_i)) with a max shift. Empty or all -inf input gives -inf.
inline double log_sum_exp(std::span<const double> v) {
    double m = kNegInf;
    for (double x : v) {
        if (x > m) m = x;
    }
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (double x : v) {
        if (x != kNegInf) s += std::exp(x - m);
    }
    return m + std::log(s);
}

inline constexpr double kLn2 = 0.6931471805599453094172321214581766;

inline double nats_to_bits(double nats) { return nats / kLn2; }

}  // namespace seqpred
