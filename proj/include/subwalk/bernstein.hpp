#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "subwalk/common.hpp"
#include "subwalk/fft.hpp"

namespace subwalk {

// A Bernstein function psi normalized so that psi(0) = 0 and psi(1) = 1.
// With that normalization, 1 - psi(1 - z) is the probability generating
// function of a random variable R on {1, 2, ...}; its law c(k) drives the
// discrete subordinator.
//
// Families:
//   stable(alpha):           psi(x) = x^(alpha/2)
//   stable_log(alpha, beta): psi(x) proportional to x^(alpha/2) * log(e + 1/x)^(-beta)
//   levy_quadrature:         psi(x) = b x + sum_i w_i (1 - exp(-x t_i))
enum class bernstein_family { stable, stable_log, levy_quadrature };

struct bernstein_spec {
    bernstein_family family = bernstein_family::stable;
    double alpha = 1.0;  // stable, stable_log; index of the induced walk limit
    double beta = 0.0;   // stable_log only; exponent of the logarithmic factor
    // levy_quadrature only: psi(x) = b x + sum w_i (1 - exp(-x t_i)).
    // The killing rate a is forced to 0 so psi(0) = 0.
    std::vector<double> nodes;
    std::vector<double> weights;
    double a = 0.0;
    double b = 0.0;
    // Normalization factor making psi(1) = 1, fixed at construction.
    double norm = 1.0;
};

inline void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("alpha must lie in (0,2)");
}

inline bernstein_spec make_stable(double alpha) {
    check_alpha(alpha);
    bernstein_spec s;
    s.family = bernstein_family::stable;
    s.alpha = alpha;
    return s;
}

inline bernstein_spec make_stable_log(double alpha, double beta) {
    check_alpha(alpha);
    if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
    bernstein_spec s;
    s.family = bernstein_family::stable_log;
    s.alpha = alpha;
    s.beta = beta;
    // psi_raw(1) = log(e + 1)^(-beta); divide by it so psi(1) = 1.
    s.norm = std::pow(std::log(std::exp(1.0) + 1.0), beta);
    return s;
}

double eval_psi(const bernstein_spec& spec, double x);

inline bernstein_spec make_levy_quadrature(std::vector<double> nodes, std::vector<double> weights,
                                           double a, double b) {
    (void)a;  // killing forced to zero: psi(0) must be 0
    if (nodes.size() != weights.size())
        throw std::invalid_argument("nodes and weights must have equal length");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!(nodes[i] > 0.0)) throw std::invalid_argument("quadrature nodes must be positive");
        if (!(weights[i] >= 0.0)) throw std::invalid_argument("quadrature weights must be nonnegative");
        if (i > 0 && !(nodes[i] > nodes[i - 1]))
            throw std::invalid_argument("quadrature nodes must be increasing");
    }
    if (!(b >= 0.0)) throw std::invalid_argument("drift must be nonnegative");
    bernstein_spec s;
    s.family = bernstein_family::levy_quadrature;
    s.nodes = std::move(nodes);
    s.weights = std::move(weights);
    s.a = 0.0;
    s.b = b;
    double raw = eval_psi(s, 1.0);
    if (!(raw > 0.0)) throw std::invalid_argument("quadrature measure must not vanish");
    s.b /= raw;
    for (double& w : s.weights) w /= raw;
    return s;
}

// Discretization of the stable Bernstein function x^(alpha/2) through its
// Levy measure nu(dt) = beta/Gamma(1-beta) t^(-1-beta) dt, beta = alpha/2:
// 400 geometric nodes on [1e-8, 50].  Mass below t_min acts linearly and
// becomes drift; mass above t_max saturates (1 - e^(-xt) ~ 1) and is lumped
// into the last node.  Panel weights come from integrating the cubic through
// the four nearest nodes against the exact power-law moments of nu, so the
// quadrature error is O(spacing^4) ~ 3e-7 over the resolved range.
inline bernstein_spec make_stable_quadrature(double alpha, std::size_t n_nodes = 400,
                                             double t_min = 1e-8, double t_max = 50.0) {
    check_alpha(alpha);
    if (n_nodes < 4) throw std::invalid_argument("need at least 4 quadrature nodes");
    double beta = alpha / 2.0;
    double cnu = beta / std::tgamma(1.0 - beta);  // nu(t) = cnu * t^(-1-beta)

    std::vector<double> t(n_nodes);
    double ratio = std::pow(t_max / t_min, 1.0 / static_cast<double>(n_nodes - 1));
    for (std::size_t i = 0; i < n_nodes; ++i)
        t[i] = t_min * std::pow(ratio, static_cast<double>(i));
    t.back() = t_max;

    std::vector<double> w(n_nodes, 0.0);
    // integral of t^q nu(t) dt over [lo, hi]
    auto moment = [&](int q, double lo, double hi) {
        double e = static_cast<double>(q) - beta;
        return cnu * (std::pow(hi, e) - std::pow(lo, e)) / e;
    };
    for (std::size_t p = 0; p + 1 < n_nodes; ++p) {
        std::size_t s0 = (p == 0) ? 0 : (p + 2 < n_nodes ? p - 1 : n_nodes - 4);
        double m[4];
        for (int q = 0; q < 4; ++q) m[q] = moment(q, t[p], t[p + 1]);
        for (int j = 0; j < 4; ++j) {
            // monomial coefficients of the Lagrange basis through t[s0..s0+3]
            double coef[4] = {1.0, 0.0, 0.0, 0.0};
            double denom = 1.0;
            int deg = 0;
            for (int mth = 0; mth < 4; ++mth) {
                if (mth == j) continue;
                double root = t[s0 + mth];
                denom *= t[s0 + j] - root;
                for (int q = deg; q >= 0; --q) {
                    coef[q + 1] += coef[q];
                    coef[q] *= -root;
                }
                ++deg;
            }
            double integral = 0.0;
            for (int q = 0; q < 4; ++q) integral += coef[q] * m[q];
            w[s0 + j] += integral / denom;
        }
    }
    for (double& wi : w)
        if (wi < 0.0) wi = 0.0;  // cubic end stencils can leave tiny negatives

    // below t_min: 1 - e^(-xt) ~ xt, exact first moment becomes drift
    double b = cnu * std::pow(t_min, 1.0 - beta) / (1.0 - beta);
    // above t_max: 1 - e^(-xt) ~ 1, total nu-mass lumped at t_max
    w.back() += cnu * std::pow(t_max, -beta) / beta;

    bernstein_spec s = make_levy_quadrature(std::move(t), std::move(w), 0.0, b);
    s.alpha = alpha;  // record the index the discretization targets
    return s;
}

inline double eval_psi(const bernstein_spec& spec, double x) {
    if (!(x >= 0.0)) throw std::domain_error("eval_psi requires x >= 0");
    if (x == 0.0) return 0.0;
    switch (spec.family) {
        case bernstein_family::stable:
            return std::pow(x, spec.alpha / 2.0);
        case bernstein_family::stable_log:
            return spec.norm * std::pow(x, spec.alpha / 2.0) *
                   std::pow(std::log(std::exp(1.0) + 1.0 / x), -spec.beta);
        case bernstein_family::levy_quadrature: {
            kahan_sum acc;
            acc.add(spec.b * x);
            for (std::size_t i = 0; i < spec.nodes.size(); ++i)
                acc.add(spec.weights[i] * (-std::expm1(-x * spec.nodes[i])));
            return acc.value();
        }
    }
    throw std::logic_error("unreachable");
}

// Principal-branch continuation used on Re z >= 0 (|arg z| <= pi/2), which is
// where the generating-function and characteristic-function work lives.
inline std::complex<double> eval_psi_complex(const bernstein_spec& spec, std::complex<double> z) {
    if (z == std::complex<double>(0.0, 0.0)) return {0.0, 0.0};
    switch (spec.family) {
        case bernstein_family::stable:
            return std::exp(std::complex<double>(spec.alpha / 2.0) * std::log(z));
        case bernstein_family::stable_log: {
            std::complex<double> lg = std::log(std::exp(1.0) + 1.0 / z);
            return spec.norm * std::exp(std::complex<double>(spec.alpha / 2.0) * std::log(z) -
                                        std::complex<double>(spec.beta) * std::log(lg));
        }
        case bernstein_family::levy_quadrature: {
            std::complex<double> acc = spec.b * z;
            for (std::size_t i = 0; i < spec.nodes.size(); ++i)
                acc += spec.weights[i] * (-cexpm1(-z * spec.nodes[i]));
            return acc;
        }
    }
    throw std::logic_error("unreachable");
}

// Step law of the subordinator: c(k) = P(R = k), k >= 1, where
// E[z^R] = 1 - psi(1 - z).  c is 1-based; c[0] is unused.
struct coeff_table {
    std::vector<double> c;
    double tail_mass = 0.0;  // P(R > K)
    std::size_t K = 0;
};

namespace detail {

inline coeff_table coefficients_stable(double alpha, std::size_t K) {
    double beta = alpha / 2.0;
    coeff_table out;
    out.K = K;
    out.c.assign(K + 1, 0.0);
    // c(k) = (-1)^(k+1) binom(beta, k): c(1) = beta, c(k+1) = c(k) (k - beta)/(k + 1).
    // The exact tail P(R > k) = (-1)^k binom(beta - 1, k) obeys
    // T(k) = T(k-1) (k - beta)/k with T(0) = 1, so the K-term sum plus the
    // tail is 1 by construction instead of by cancellation.
    double ck = beta;
    double tail = 1.0 - beta;  // T(1)
    if (K >= 1) out.c[1] = ck;
    for (std::size_t k = 1; k < K; ++k) {
        double kd = static_cast<double>(k);
        ck *= (kd - beta) / (kd + 1.0);
        out.c[k + 1] = ck;
        tail *= (kd + 1.0 - beta) / (kd + 1.0);
    }
    out.tail_mass = tail;
    return out;
}

inline coeff_table coefficients_levy(const bernstein_spec& spec, std::size_t K) {
    coeff_table out;
    out.K = K;
    out.c.assign(K + 1, 0.0);
    if (K >= 1) out.c[1] += spec.b;
    // Poisson mixture: c(k) = sum_i w_i e^(-t_i) t_i^k / k!
    for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
        double t = spec.nodes[i];
        double term = spec.weights[i] * std::exp(-t) * t;  // k = 1
        for (std::size_t k = 1; k <= K && term > 1e-300; ++k) {
            out.c[k] += term;
            term *= t / static_cast<double>(k + 1);
        }
    }
    kahan_sum acc;
    for (std::size_t k = 1; k <= K; ++k) acc.add(out.c[k]);
    out.tail_mass = std::max(0.0, 1.0 - acc.value());
    return out;
}

// Taylor coefficients of G(z) = 1 - psi(1 - z) by trapezoidal sampling on
// circles |z| = rho < 1 (exact up to aliasing for analytic G).  Block
// k in [2^j, 2^(j+1)) uses N = 16 * 2^j samples and rho = exp(-16/N), so the
// de-weighting rho^(-k) stays below e^2 while aliasing is down by e^(-16).
inline coeff_table coefficients_log(const bernstein_spec& spec, std::size_t K) {
    coeff_table out;
    out.K = K;
    out.c.assign(K + 1, 0.0);
    const double pi = std::acos(-1.0);
    for (std::size_t j = 0; (std::size_t{1} << j) <= K; ++j) {
        std::size_t k_lo = std::size_t{1} << j;
        std::size_t k_hi = std::min(K, (std::size_t{1} << (j + 1)) - 1);
        std::size_t N = std::size_t{16} << j;
        if (N > (std::size_t{1} << 25))
            throw numeric_error("stable_log coefficient extraction is limited to K <= 4194303");
        double rho = std::exp(-16.0 / static_cast<double>(N));
        std::vector<std::complex<double>> samples(N);
        for (std::size_t m = 0; m < N; ++m) {
            double th = 2.0 * pi * static_cast<double>(m) / static_cast<double>(N);
            std::complex<double> z = rho * std::complex<double>(std::cos(th), std::sin(th));
            samples[m] = 1.0 - eval_psi_complex(spec, 1.0 - z);
        }
        cfft_inplace(samples, FFTW_FORWARD);
        for (std::size_t k = k_lo; k <= k_hi; ++k) {
            double v = samples[k].real() /
                       (static_cast<double>(N) * std::pow(rho, static_cast<double>(k)));
            if (v < 0.0) {
                if (v < -1e-14)
                    throw numeric_error("negative coefficient from series extraction: " +
                                        std::to_string(v));
                v = 0.0;
            }
            out.c[k] = v;
        }
    }
    kahan_sum acc;
    for (std::size_t k = 1; k <= K; ++k) acc.add(out.c[k]);
    out.tail_mass = std::max(0.0, 1.0 - acc.value());
    return out;
}

}  // namespace detail

inline coeff_table coefficients(const bernstein_spec& spec, std::size_t K) {
    if (K < 1) throw std::invalid_argument("coefficients: K must be >= 1");
    switch (spec.family) {
        case bernstein_family::stable:
            return detail::coefficients_stable(spec.alpha, K);
        case bernstein_family::levy_quadrature:
            return detail::coefficients_levy(spec, K);
        case bernstein_family::stable_log:
            return detail::coefficients_log(spec, K);
    }
    throw std::logic_error("unreachable");
}

// Smallest K with tail below eps, capped.  Returns whatever tail the cap
// achieves when the target is out of reach (heavy-tailed laws at tight eps).
inline coeff_table coefficients_auto(const bernstein_spec& spec, double eps = 1e-9,
                                     std::size_t K_cap = 10'000'000) {
    if (spec.family == bernstein_family::stable) {
        double beta = spec.alpha / 2.0;
        double tail = 1.0;
        std::size_t k = 0;
        while (tail >= eps && k < K_cap) {
            ++k;
            tail *= (static_cast<double>(k) - beta) / static_cast<double>(k);
        }
        return detail::coefficients_stable(spec.alpha, std::max<std::size_t>(k, 1));
    }
    std::size_t limit = K_cap;
    if (spec.family == bernstein_family::stable_log)
        limit = std::min<std::size_t>(limit, (std::size_t{1} << 22) - 1);
    std::size_t K = 63;  // K+1 a power of two keeps the downstream FFT sizes tight
    coeff_table t = coefficients(spec, std::min(K, limit));
    while (t.tail_mass >= eps && t.K < limit) {
        K = std::min(2 * K + 1, limit);
        t = coefficients(spec, K);
    }
    return t;
}

// Inverse of psi on (0, psi(1)]; monotone bisection in log x.
inline double inverse_psi(const bernstein_spec& spec, double y) {
    const double x_lo = 1e-16, x_hi = 1.0;
    double f_lo = eval_psi(spec, x_lo);
    double f_hi = eval_psi(spec, x_hi);
    if (!(y > 0.0) || y > f_hi * (1.0 + 1e-12) || y < f_lo * (1.0 - 1e-9))
        throw std::out_of_range("inverse_psi: y outside [psi(1e-16), psi(1)]");
    if (y >= f_hi) return x_hi;
    if (y <= f_lo) return x_lo;
    double lo = std::log(x_lo), hi = std::log(x_hi);
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (eval_psi(spec, std::exp(mid)) < y)
            lo = mid;
        else
            hi = mid;
    }
    double x = std::exp(0.5 * (lo + hi));
    if (std::abs(eval_psi(spec, x) - y) > 1e-13 * y)
        throw numeric_error("inverse_psi failed to converge");
    return x;
}

}  // namespace subwalk
