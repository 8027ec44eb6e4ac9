#pragma once

#include <cmath>
#include <vector>

#include "subwalk/common.hpp"

namespace subwalk {

// Sign of Gamma(x) for non-pole x; negative only between odd/even negative
// integers.
inline double gamma_sign(double x) {
    if (x > 0) return 1.0;
    double f = std::floor(x);
    return (static_cast<long long>(f) % 2 != 0) ? -1.0 : 1.0;
}

// (-1)^k * binom(gamma, k) continued to real k > gamma, via
// Gamma(k-gamma) / (Gamma(k+1) Gamma(-gamma)).  This is the k-th Taylor
// coefficient of (1-z)^gamma up to sign, and stays positive for
// gamma in (0,1); for general gamma > 0 the sign comes from 1/Gamma(-gamma).
// Callers must skip nonnegative-integer gamma (the coefficient vanishes for
// k > gamma there).
inline double signed_binom_term(double gamma_exp, double k) {
    // 1/Gamma(-g) = -Gamma(1+g) sin(pi g) / pi  (reflection formula)
    double lg = std::lgamma(k - gamma_exp) - std::lgamma(k + 1.0) + std::lgamma(1.0 + gamma_exp);
    return -std::exp(lg) * std::sin(M_PI * gamma_exp) / M_PI;
}

/// Tail analogue: the partial alternating sum identity gives
// sum_{m>k} (-1)^m binom(gamma, m) = -(-1)^k binom(gamma-1, k); this returns
// (-1)^k binom(gamma-1, k) by the same continuation.
inline double signed_binom_tail_term(double gamma_exp, double k) {
    double g = gamma_exp - 1.0;  // 1 + g = gamma_exp > 0, so lgamma is safe
    double lg = std::lgamma(k - g) - std::lgamma(k + 1.0) + std::lgamma(1.0 + g);
    return -std::exp(lg) * std::sin(M_PI * g) / M_PI;
}

// Gauss-Legendre nodes/weights on [-1,1], by Newton iteration on the Legendre
// recurrence.
struct gl_rule {
    std::vector<double> x, w;
};

inline const gl_rule& gauss_legendre(int n) {
    static thread_local std::vector<gl_rule> cache(65);
    if (n < 1 || n > 64) throw std::invalid_argument("gauss_legendre: order out of range");
    gl_rule& r = cache[static_cast<std::size_t>(n)];
    if (!r.x.empty()) return r;
    r.x.resize(static_cast<std::size_t>(n));
    r.w.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / pp;
            z -= dz;
            if (std::fabs(dz) < 1e-15) break;
        }
        r.x[static_cast<std::size_t>(i)] = -z;
        r.x[static_cast<std::size_t>(n - 1 - i)] = z;
        double wi = 2.0 / ((1.0 - z * z) * pp * pp);
        r.w[static_cast<std::size_t>(i)] = wi;
        r.w[static_cast<std::size_t>(n - 1 - i)] = wi;
    }
    return r;
}

namespace detail {

inline double gser(double a, double x) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gcf(double a, double x) {
    const double fpmin = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / fpmin, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = b + an / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

// Regularized upper incomplete gamma Q(a,x) = Gamma(a,x)/Gamma(a).
inline double gammq(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gammq: bad arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - detail::gser(a, x);
    return detail::gcf(a, x);
}

// Survival function of the chi-square law with k degrees of freedom.
inline double chi2_sf(double x, double k) { return gammq(0.5 * k, 0.5 * x); }

// Kolmogorov asymptotic tail Q(lambda) = 2 sum (-1)^{j-1} exp(-2 j^2 lambda^2).
inline double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double s = 0.0, sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        double term = std::exp(-2.0 * j * j * lambda * lambda);
        s += sign * term;
        sign = -sign;
        if (term < 1e-18) break;
    }
    return std::fmin(1.0, std::fmax(0.0, 2.0 * s));
}

}  // namespace subwalk
