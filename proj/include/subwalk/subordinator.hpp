#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "subwalk/bernstein.hpp"
#include "subwalk/common.hpp"
#include "subwalk/fft.hpp"
#include "subwalk/special.hpp"
#include "subwalk/walk.hpp"

namespace subwalk {

// Law of tau_n = R_1 + ... + R_n truncated at K, with the truncated mass
// carried explicitly.  p[k] = P(tau_n = k) for k = 0..K; support is n..K.
struct tau_table {
    long long n = 0;
    std::size_t K = 0;
    std::vector<double> p;
    double tail_mass = 0.0;  // P(tau_n > K)
    clamp_stats clamps;
};

inline tau_table tau_pmf(const coeff_table& steps, long long n) {
    if (n < 0) throw std::invalid_argument("tau_pmf: n must be >= 0");
    tau_table out;
    out.n = n;
    out.K = steps.K;
    if (n == 0) {
        out.p.assign(steps.K + 1, 0.0);
        out.p[0] = 1.0;
        out.tail_mass = 0.0;
        return out;
    }
    std::vector<double> base(steps.c);
    base.resize(steps.K + 1, 0.0);
    base[0] = 0.0;
    if (n == 1) {
        out.p = std::move(base);
    } else {
        out.p = self_convolve_power(base, n, steps.K, out.clamps);
    }
    kahan_sum acc;
    for (std::size_t k = 0; k <= steps.K; ++k) acc.add(out.p[k]);
    out.tail_mass = std::max(0.0, 1.0 - acc.value());
    return out;
}

// Doubles K until the truncated mass is below eps or the cap is reached;
// heavy-tailed step laws can exhaust the cap, in which case the returned
// table simply reports the tail mass it achieved.
inline tau_table tau_pmf_auto(const bernstein_spec& spec, long long n, double eps = 1e-8,
                              std::size_t K_cap = (std::size_t{1} << 23) - 1) {
    std::size_t K = 255;
    while (K < static_cast<std::size_t>(std::max<long long>(n, 1)) * 2) K = 2 * K + 1;
    K = std::min(K, K_cap);
    while (true) {
        tau_table t = tau_pmf(coefficients(spec, K), n);
        if (t.tail_mass < eps || K >= K_cap) return t;
        K = std::min(2 * K + 1, K_cap);
    }
}

// P(tau_n > t).  For t <= K the upper edge is exact: mass above K is known
// in closed form as tail_mass, so hi = sum_{t<k<=K} p[k] + tail_mass; lo
// discounts the truncated mass entirely.
struct tail_bracket {
    double lo = 0.0, hi = 0.0;
};

inline tail_bracket tau_tail(const tau_table& t, double thresh) {
    kahan_sum acc;
    std::size_t from = 0;
    if (thresh >= 0.0)
        from = static_cast<std::size_t>(std::min<double>(std::floor(thresh) + 1.0,
                                                         static_cast<double>(t.K) + 1.0));
    for (std::size_t k = t.K + 1; k-- > from;) acc.add(t.p[k]);
    tail_bracket b;
    b.hi = acc.value() + t.tail_mass;
    b.lo = std::max(0.0, b.hi - t.tail_mass);
    return b;
}

// First-order tail prediction P(tau_n > t) ~ n psi(1/t) / Gamma(1 - alpha/2).
inline double tau_tail_predictor(const bernstein_spec& spec, double alpha, long long n,
                                 double t) {
    if (!(t > 0.0)) throw std::invalid_argument("tail predictor needs t > 0");
    return static_cast<double>(n) * eval_psi(spec, 1.0 / t) / std::tgamma(1.0 - alpha / 2.0);
}

namespace detail {

inline double binom_exact(long long n, long long j) {
    double acc = 1.0;
    for (long long i = 1; i <= j; ++i)
        acc = acc * static_cast<double>(n - j + i) / static_cast<double>(i);
    return acc;
}

}  // namespace detail

// Exact law of tau_n for psi(x) = x^beta from the binomial expansion of the
// generating function (1 - (1-z)^beta)^n; valid at real k, which is what the
// truncation-tail integrals need.  The alternating j-sum is well conditioned
// for n up to ~140 (binomial growth), far beyond the n <= 20 it serves.
inline double discrete_stable_pmf(double beta, long long n, double k) {
    if (n < 0 || n > 140) throw std::invalid_argument("discrete_stable_pmf: n out of range");
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0,1)");
    if (!(k >= static_cast<double>(n)) || n == 0) return (n == 0 && k == 0.0) ? 1.0 : 0.0;
    kahan_sum acc;
    double sgn = -1.0;  // (-1)^j for j = 1
    for (long long j = 1; j <= n; ++j) {
        acc.add(sgn * detail::binom_exact(n, j) * signed_binom_term(beta * j, k));
        sgn = -sgn;
    }
    return acc.value();
}

// Same law as discrete_stable_pmf with the j-dependent constants hoisted out;
// used where the density is evaluated many times (truncation-tail integrals).
class stable_tau_density {
public:
    stable_tau_density(double beta, long long n) : beta_(beta), n_(n) {
        if (n < 1 || n > 140) throw std::invalid_argument("stable_tau_density: n out of range");
        if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0,1)");
        const double pi = std::acos(-1.0);
        coef_.resize(static_cast<std::size_t>(n) + 1, 0.0);
        double sgn = -1.0;
        for (long long j = 1; j <= n; ++j) {
            double g = beta * static_cast<double>(j);
            coef_[static_cast<std::size_t>(j)] = sgn * detail::binom_exact(n, j) *
                                                 (-std::sin(pi * g) / pi) *
                                                 std::exp(std::lgamma(1.0 + g));
            sgn = -sgn;
        }
    }

    double operator()(double k) const {
        if (!(k >= static_cast<double>(n_))) return 0.0;
        kahan_sum acc;
        if (k <= 6.7e7) {
            double lkf = std::lgamma(k + 1.0);
            for (long long j = 1; j <= n_; ++j)
                acc.add(coef_[static_cast<std::size_t>(j)] *
                        std::exp(std::lgamma(k - beta_ * static_cast<double>(j)) - lkf));
        } else {
            // lgamma differences of huge arguments cancel catastrophically;
            // Gamma(k-g)/Gamma(k+1) = k^(-1-g) (1 + g(g+1)/(2k) + O(k^-2))
            double lk = std::log(k);
            for (long long j = 1; j <= n_; ++j) {
                double g = beta_ * static_cast<double>(j);
                acc.add(coef_[static_cast<std::size_t>(j)] * std::exp(-(1.0 + g) * lk) *
                        (1.0 + 0.5 * g * (g + 1.0) / k));
            }
        }
        return acc.value();
    }

    // signed row C_j with f(k) = sum_j C_j Gamma(k - j beta) / Gamma(k + 1)
    const std::vector<double>& coefficients() const { return coef_; }

private:
    double beta_;
    long long n_;
    std::vector<double> coef_;
};

// P(tau_n > k) for psi(x) = x^beta, again at real k.
inline double discrete_stable_tail(double beta, long long n, double k) {
    if (n < 0 || n > 140) throw std::invalid_argument("discrete_stable_tail: n out of range");
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0,1)");
    if (n == 0) return 0.0;
    if (k < static_cast<double>(n)) return 1.0;
    kahan_sum acc;
    double sgn = 1.0;  // -(-1)^j for j = 1
    for (long long j = 1; j <= n; ++j) {
        acc.add(sgn * detail::binom_exact(n, j) * signed_binom_tail_term(beta * j, k));
        sgn = -sgn;
    }
    return acc.value();
}

// Walker alias method over a finite pmf.
class alias_table {
public:
    explicit alias_table(const std::vector<double>& weights) {
        std::size_t m = weights.size();
        if (m == 0) throw std::invalid_argument("alias_table: empty support");
        double total = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0)) throw std::invalid_argument("alias_table: negative weight");
            total += w;
        }
        if (!(total > 0.0)) throw std::invalid_argument("alias_table: zero mass");
        prob_.assign(m, 0.0);
        alias_.assign(m, 0);
        std::vector<double> scaled(m);
        for (std::size_t i = 0; i < m; ++i) scaled[i] = weights[i] * static_cast<double>(m) / total;
        std::vector<std::size_t> small, large;
        for (std::size_t i = 0; i < m; ++i)
            (scaled[i] < 1.0 ? small : large).push_back(i);
        while (!small.empty() && !large.empty()) {
            std::size_t s = small.back(), l = large.back();
            small.pop_back();
            prob_[s] = scaled[s];
            alias_[s] = l;
            scaled[l] -= 1.0 - scaled[s];
            if (scaled[l] < 1.0) {
                large.pop_back();
                small.push_back(l);
            }
        }
        for (std::size_t i : large) prob_[i] = 1.0;
        for (std::size_t i : small) prob_[i] = 1.0;  // round-off leftovers
    }

    template <class Rng>
    std::size_t sample(Rng& rng) const {
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        double u = u01(rng) * static_cast<double>(prob_.size());
        std::size_t i = std::min(static_cast<std::size_t>(u), prob_.size() - 1);
        double frac = u - static_cast<double>(i);
        return frac < prob_[i] ? i : alias_[i];
    }

private:
    std::vector<double> prob_;
    std::vector<std::size_t> alias_;
};

// Sampler for the subordinator step R.  Body (k <= K) goes through an alias
// table; the tail branch fires with probability tail_mass.  For the stable
// family the tail is sampled by inverting P(R > k | R > K) ~ (k/K)^{-beta}
// (relative error O(1/K) on that branch); other families redraw from the
// body and count the rejection.
class step_sampler {
public:
    step_sampler(const bernstein_spec& spec, const coeff_table& table)
        : spec_(spec),
          K_(table.K),
          tail_mass_(table.tail_mass),
          beta_(spec.alpha / 2.0),
          stable_tail_(spec.family == bernstein_family::stable),
          body_(std::vector<double>(table.c.begin() + 1, table.c.end())) {}

    template <class Rng>
    unsigned long long sample(Rng& rng) {
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        if (u01(rng) < tail_mass_) {
            if (stable_tail_) {
                double u = u01(rng);
                if (u < 1e-300) u = 1e-300;
                double k = static_cast<double>(K_) * std::pow(u, -1.0 / beta_);
                const double cap = 4.6e18;  // ~2^62
                if (k >= cap) {
                    ++clamped_;
                    return static_cast<unsigned long long>(cap);
                }
                unsigned long long kk = static_cast<unsigned long long>(k);
                return std::max<unsigned long long>(kk, static_cast<unsigned long long>(K_) + 1);
            }
            ++rejected_;
        }
        return static_cast<unsigned long long>(body_.sample(rng)) + 1;
    }

    long long rejected() const { return rejected_; }
    long long clamped() const { return clamped_; }
    std::size_t table_size() const { return K_; }

private:
    bernstein_spec spec_;
    std::size_t K_;
    double tail_mass_;
    double beta_;
    bool stable_tail_;
    alias_table body_;
    long long rejected_ = 0;
    long long clamped_ = 0;
};

// tau_0 = 0, tau_1, ..., tau_n for one replica; each entry saturates at 2^62
// (sums of heavy-tailed draws can exceed 64 bits in long runs).
inline std::vector<unsigned long long> sample_tau(step_sampler& sampler, long long n,
                                                  std::mt19937_64& rng) {
    std::vector<unsigned long long> tau(static_cast<std::size_t>(n) + 1, 0);
    const unsigned long long cap = 1ull << 62;
    unsigned __int128 acc = 0;
    for (long long i = 1; i <= n; ++i) {
        acc += sampler.sample(rng);
        tau[static_cast<std::size_t>(i)] =
            acc > cap ? cap : static_cast<unsigned long long>(acc);
    }
    return tau;
}

namespace detail {

// Binomial draw that stays exact while the count fits a double exactly and
// falls back to a rounded Gaussian beyond (relative CLT error ~ T^(-1/2)).
template <class Rng>
long long binomial_draw(Rng& rng, long long T, double p) {
    if (T <= 0) return 0;
    if (T <= (1LL << 53)) {
        std::binomial_distribution<long long> bin(T, p);
        return bin(rng);
    }
    double mean = static_cast<double>(T) * p;
    double sd = std::sqrt(static_cast<double>(T) * p * (1.0 - p));
    std::normal_distribution<double> gauss(mean, sd);
    double v = std::round(gauss(rng));
    v = std::min(std::max(v, 0.0), static_cast<double>(T));
    return static_cast<long long>(v);
}

}  // namespace detail

// Position increment of the walk over T steps, drawn exactly through the
// multinomial split of T among the step vectors (conditional binomials).
template <class Rng>
inline void walk_increment(const walk_spec& w, long long T, Rng& rng, std::vector<long long>& x) {
    long long remaining = T;
    double psum = 1.0;
    for (std::size_t i = 0; i + 1 < w.steps.size() && remaining > 0; ++i) {
        double q = std::min(1.0, w.prob[i] / psum);
        long long cnt = detail::binomial_draw(rng, remaining, q);
        for (int a = 0; a < w.d; ++a) x[a] += cnt * w.steps[i][a];
        remaining -= cnt;
        psum -= w.prob[i];
    }
    if (remaining > 0)
        for (int a = 0; a < w.d; ++a) x[a] += remaining * w.steps.back()[a];
}

// Endpoints S^psi at the times floor(n t) for t in t_grid, for `replicas`
// independent runs.  Output is flat: [replica][mark][coordinate].
// Increments between marks use independent walk increments over the tau
// increments, which matches the subordinated law exactly.
inline std::vector<long long> simulate_endpoint(const walk_spec& w, const bernstein_spec& spec,
                                                const coeff_table& table, long long n,
                                                const std::vector<double>& t_grid,
                                                long long replicas, std::uint64_t seed) {
    if (n < 0 || replicas < 0) throw std::invalid_argument("simulate_endpoint: negative size");
    std::vector<long long> marks;
    for (double t : t_grid) {
        if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("t_grid entries must lie in [0,1]");
        marks.push_back(static_cast<long long>(std::floor(static_cast<double>(n) * t)));
    }
    if (!std::is_sorted(marks.begin(), marks.end()))
        throw std::invalid_argument("t_grid must be nondecreasing");
    step_sampler sampler(spec, table);
    std::mt19937_64 rng(derive_seed(seed, 1));
    std::vector<long long> out(static_cast<std::size_t>(replicas) * marks.size() * w.d, 0);
    std::vector<long long> x(w.d);
    for (long long rep = 0; rep < replicas; ++rep) {
        std::fill(x.begin(), x.end(), 0);
        unsigned __int128 tau_prev = 0, tau = 0;
        long long step_idx = 0;
        std::size_t base = static_cast<std::size_t>(rep) * marks.size() * w.d;
        for (std::size_t mi = 0; mi < marks.size(); ++mi) {
            while (step_idx < marks[mi]) {
                tau += sampler.sample(rng);
                ++step_idx;
            }
            unsigned __int128 dt = tau - tau_prev;
            const unsigned long long cap = 1ull << 62;
            long long T = dt > cap ? static_cast<long long>(cap) : static_cast<long long>(dt);
            walk_increment(w, T, rng, x);
            tau_prev = tau;
            for (int a = 0; a < w.d; ++a) out[base + mi * w.d + a] = x[a];
        }
    }
    return out;
}

}  // namespace subwalk
