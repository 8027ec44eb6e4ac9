#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <map>
#include <stdexcept>
#include <vector>

#include "subwalk/bernstein.hpp"
#include "subwalk/common.hpp"
#include "subwalk/fft.hpp"
#include "subwalk/special.hpp"
#include "subwalk/stable_limit.hpp"
#include "subwalk/subordinator.hpp"
#include "subwalk/walk.hpp"

namespace subwalk {

// p_psi(x, n) together with a certified error bound.  Values are produced by
// two independent routes (direct summation over the subordinator law, and
// inversion of the characteristic function on a periodic grid) so that each
// route can be checked against the other within the combined bounds.
struct kernel_result {
    double value = 0.0;
    double error_bound = 0.0;
};

namespace detail {

inline bool is_simple_1d(const walk_spec& w) {
    return w.d == 1 && w.steps.size() == 2 &&
           ((w.steps[0][0] == -1 && w.steps[1][0] == 1) ||
            (w.steps[0][0] == 1 && w.steps[1][0] == -1)) &&
           w.prob[0] == 0.5 && w.prob[1] == 0.5;
}

inline bool walk_is_symmetric(const walk_spec& w) {
    std::map<std::vector<long long>, double> pm;
    for (std::size_t i = 0; i < w.steps.size(); ++i) pm[w.steps[i]] = w.prob[i];
    for (std::size_t i = 0; i < w.steps.size(); ++i) {
        std::vector<long long> neg = w.steps[i];
        for (long long& v : neg) v = -v;
        auto it = pm.find(neg);
        if (it == pm.end() || it->second != w.prob[i]) return false;
    }
    return true;
}

template <class T>
inline T pow_ll(T base, long long e) {
    T acc(1.0);
    while (e > 0) {
        if (e & 1) acc *= base;
        base *= base;
        e >>= 1;
    }
    return acc;
}

// ln P(S_k = x) for the simple 1d walk at real k: ln[ binom(k,(k+x)/2) 2^-k ].
// For large half-arguments the lgamma differences cancel catastrophically
// (absolute lgamma error ~ k ln k * eps), so switch to the entropy form,
// which is already in subtracted shape:
//   -(k/2)[(1+u)ln(1+u)+(1-u)ln(1-u)] - ln(pi k/2)/2 - ln(1-u^2)/2
//   + (1/12)(1/k - 1/m1 - 1/m2),   u = x/k, m1,2 = (k +- x)/2.
inline double log_simple_walk_weight(double k, double ax) {
    double m1 = 0.5 * (k + ax), m2 = 0.5 * (k - ax);
    if (m2 >= 8192.0) {
        double u = ax / k;
        double ent = (1.0 + u) * std::log1p(u) + (1.0 - u) * std::log1p(-u);
        return -0.5 * k * ent - 0.5 * std::log(0.5 * M_PI * k) - 0.5 * std::log1p(-u * u) +
               (1.0 / 12.0) * (1.0 / k - 1.0 / m1 - 1.0 / m2);
    }
    return -k * M_LN2 + std::lgamma(k + 1.0) - std::lgamma(m1 + 1.0) - std::lgamma(m2 + 1.0);
}

// Visit every k = k0, k0+2, ..., K (k0 the smallest index >= max(|x|, k_min)
// of the same parity as x) together with p = P(S_k = x) for the simple 1d
// walk.  p advances by the two-step ratio
//   p(x,k+2)/p(x,k) = (k+1)(k+2) / ((k+x+2)(k-x+2));
// indices with weight below exp(-650) are stepped in log space and skipped.
template <class Sink>
inline void simple_walk_scan(long long ax, long long k_min, std::size_t K, Sink&& sink) {
    long long k0 = std::max(ax, k_min);
    if (((k0 - ax) & 1) != 0) ++k0;
    long long kend = static_cast<long long>(K);
    if (k0 > kend) return;
    double axd = static_cast<double>(ax);
    double lp = log_simple_walk_weight(static_cast<double>(k0), axd);
    bool logmode = true;
    double p = 0.0;
    for (long long k = k0; k <= kend; k += 2) {
        double kd = static_cast<double>(k);
        if (logmode && lp > -650.0) {
            p = std::exp(lp);
            logmode = false;
        }
        if (!logmode) sink(k, p);
        double ratio = (kd + 1.0) * (kd + 2.0) / ((kd + axd + 2.0) * (kd - axd + 2.0));
        if (logmode)
            lp += std::log(ratio);
        else
            p *= ratio;
    }
}

}  // namespace detail

// Mass of sum_{k > K, k = x (mod 2)} P(S_k = x) P(tau_n in (k-window, k]) for
// the pure power family, as (1/2) integral_{K+1/2}^inf of the two analytic
// continuations.  Several n are integrated in one pass because the
// Gamma-ratio factors Gamma(k - j beta)/Gamma(k+1) are shared; only the
// signed coefficient rows differ.  The bound covers the parity residue and
// the midpoint correction of the sum-to-integral step plus quadrature slack.
inline std::vector<kernel_result> stable_tail_integral_multi(double beta,
                                                             const std::vector<long long>& ns,
                                                             long long ax_in, std::size_t K,
                                                             long long window = 1) {
    if (ns.empty()) return {};
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    long long jmax = 0;
    for (long long n : ns) {
        if (n < 1 || n > 140)
            throw std::invalid_argument("stable tail integral supports 1 <= n <= 140");
        jmax = std::max(jmax, n);
    }
    if (static_cast<long long>(K) < jmax + window + 1)
        throw std::invalid_argument("stable tail integral needs K >= n + window + 1");
    double ax = static_cast<double>(std::llabs(ax_in));

    std::vector<std::vector<double>> rows;
    rows.reserve(ns.size());
    for (long long n : ns) rows.push_back(stable_tau_density(beta, n).coefficients());

    std::vector<double> E(static_cast<std::size_t>(jmax) + 1, 0.0);
    std::vector<double> F(static_cast<std::size_t>(jmax) + 1, 0.0);
    auto fill_E = [&](double k) {
        if (k <= 6.7e7) {
            double lg = std::lgamma(k + 1.0);
            for (long long j = 1; j <= jmax; ++j)
                E[static_cast<std::size_t>(j)] =
                    std::exp(std::lgamma(k - beta * static_cast<double>(j)) - lg);
        } else {
            double lk = std::log(k);
            for (long long j = 1; j <= jmax; ++j) {
                double g = beta * static_cast<double>(j);
                E[static_cast<std::size_t>(j)] =
                    std::exp(-(1.0 + g) * lk) * (1.0 + 0.5 * g * (g + 1.0) / k);
            }
        }
    };
    auto eval_rows = [&](double k, std::vector<double>& h) {
        std::fill(F.begin(), F.end(), 0.0);
        for (long long w = 0; w < window; ++w) {
            fill_E(k - static_cast<double>(w));
            for (long long j = 1; j <= jmax; ++j)
                F[static_cast<std::size_t>(j)] += E[static_cast<std::size_t>(j)];
        }
        double s = std::exp(detail::log_simple_walk_weight(k, ax));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            double dot = 0.0;
            for (std::size_t j = 1; j < rows[i].size(); ++j) dot += rows[i][j] * F[j];
            h[i] = s * dot;
        }
    };

    const gl_rule& rule = gauss_legendre(16);
    std::vector<kahan_sum> acc(ns.size());
    std::vector<double> h(ns.size()), panel(ns.size()), last(ns.size(), 0.0);
    double lo = static_cast<double>(K) + 0.5;
    int quiet = 0;
    bool converged = false;
    for (int oct = 0; oct < 600 && !converged; ++oct) {
        double hi = 2.0 * lo;
        double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        std::fill(panel.begin(), panel.end(), 0.0);
        for (std::size_t q = 0; q < rule.x.size(); ++q) {
            eval_rows(mid + half * rule.x[q], h);
            for (std::size_t i = 0; i < panel.size(); ++i) panel[i] += rule.w[q] * h[i];
        }
        bool all_quiet = true;
        for (std::size_t i = 0; i < panel.size(); ++i) {
            panel[i] *= half;
            acc[i].add(panel[i]);
            last[i] = std::abs(panel[i]);
            if (last[i] > 1e-18 * std::abs(acc[i].value())) all_quiet = false;
        }
        if (all_quiet) {
            if (++quiet >= 2) converged = true;
        } else {
            quiet = 0;
        }
        lo = hi;
    }

    std::vector<double> hK(ns.size()), hK1(ns.size());
    eval_rows(static_cast<double>(K), hK);
    eval_rows(static_cast<double>(K) + 1.0, hK1);
    std::vector<kernel_result> out(ns.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].value = 0.5 * acc[i].value();
        double edge = std::max(std::abs(hK[i]), std::abs(hK1[i]));
        out[i].error_bound =
            0.75 * edge + std::abs(hK1[i] - hK[i]) / 12.0 + 1e-11 * std::abs(out[i].value);
        if (!converged) out[i].error_bound += 4.0 * last[i];
    }
    return out;
}

inline kernel_result stable_tail_integral(double beta, long long n, long long ax, std::size_t K,
                                          long long window = 1) {
    return stable_tail_integral_multi(beta, std::vector<long long>{n}, ax, K, window)[0];
}

// Upper envelope for the periodization error sum_{m != 0} p_psi(x + m M, n).
// Images sit at sup-distance >= m M - |x|_inf where the kernel is bounded by
// the heavy-tail envelope r C n psi(dist^-2) dist^-d per lattice point; the
// factor 4 covers the pre-asymptotic regime.  Shell m holds
// (2m+1)^d - (2m-1)^d lattice cells of the coarse partition.
inline double aliasing_bound(const bernstein_spec& spec, int d, long long r,
                             const std::vector<double>& Q, long long n, long long ax_inf,
                             std::size_t M) {
    if (n == 0) return 0.0;
    double C = const_C(d, spec.alpha, Q);
    kahan_sum s;
    for (long long m = 1; m <= 4000000; ++m) {
        double dist = static_cast<double>(m) * static_cast<double>(M) - static_cast<double>(ax_inf);
        double shell = std::pow(2.0 * static_cast<double>(m) + 1.0, d) -
                       std::pow(2.0 * static_cast<double>(m) - 1.0, d);
        double term = shell * eval_psi(spec, 1.0 / (dist * dist)) * std::pow(dist, -d);
        s.add(term);
        if (m >= 8 && term < 1e-6 * s.value()) break;
    }
    return 4.0 * static_cast<double>(r) * C * static_cast<double>(n) * s.value();
}

// Direct route for the simple 1d walk: p_psi(x, n) = sum_k P(S_k = x) p[k]
// over the truncated subordinator table, walking the binomial weight by its
// two-step ratio.  For the pure power family the mass beyond the truncation
// is integrated analytically, which shrinks the error bound far below the
// truncated tail mass; otherwise the tail mass itself is the bound.
class exact_kernel {
public:
    exact_kernel(const walk_spec& w, const bernstein_spec& spec, std::size_t K)
        : w_(w), spec_(spec), coeff_(coefficients(spec, K)) {
        validate_walk(w_);
        if (!detail::is_simple_1d(w_))
            throw std::invalid_argument(
                "exact_kernel drives the simple 1d walk; use kernel_exact for general walks");
        L_ = next_pow2(2 * coeff_.K + 1);
        std::vector<double> base(L_, 0.0);
        for (std::size_t k = 1; k <= coeff_.K; ++k) base[k] = coeff_.c[k];
        step_spec_ = rfft(base);
        reset();
    }

    std::size_t K() const { return coeff_.K; }
    long long n() const { return n_; }
    double tau_tail() const { return tau_tail_; }
    const std::vector<double>& tau() const { return tau_; }
    const coeff_table& coeffs() const { return coeff_; }

    void reset() {
        n_ = 0;
        tau_.assign(coeff_.K + 1, 0.0);
        tau_[0] = 1.0;
        tau_tail_ = 0.0;
    }

    // Law of tau_n truncated at K.  Single steps convolve against the cached
    // step spectrum; long jumps rebuild by repeated squaring.
    void set_n(long long n) {
        if (n < 0) throw std::invalid_argument("n must be >= 0");
        if (n < n_) reset();
        if (n == n_) return;
        if (n - n_ > 8) {
            tau_table t = tau_pmf(coeff_, n);
            tau_ = std::move(t.p);
            tau_tail_ = t.tail_mass;
            n_ = n;
            return;
        }
        while (n_ < n) advance();
    }

    kernel_result at(long long x) const { return at_windowed(x, 1); }

    // Windowed variant sum_{j<window} sum_k P(S_{k+j} = x) p[k], i.e. the
    // smoothed kernel when window equals the walk period.
    kernel_result at_windowed(long long x, long long window) const {
        if (window < 1) throw std::invalid_argument("window must be >= 1");
        long long ax = std::llabs(x);
        kernel_result out;
        if (n_ == 0) {
            // tau_0 = 0: only the window shifts contribute
            for (long long j = 0; j < window; ++j)
                if (j >= ax && ((j - ax) & 1) == 0)
                    out.value += std::exp(detail::log_simple_walk_weight(static_cast<double>(j),
                                                                         static_cast<double>(ax)));
            return out;
        }
        long long kend = static_cast<long long>(coeff_.K);
        if (ax > kend) throw numeric_error("truncation K is below |x|; increase K");

        kahan_sum acc;
        detail::simple_walk_scan(ax, n_, coeff_.K, [&](long long k, double p) {
            double wsum = tau_[static_cast<std::size_t>(k)];
            for (long long j = 1; j < window; ++j)
                if (k - j >= 0) wsum += tau_[static_cast<std::size_t>(k - j)];
            acc.add(p * wsum);
        });
        out.value = acc.value();

        bool pure_power = spec_.family == bernstein_family::stable;
        if (pure_power && n_ <= 140 && kend >= n_ + window + 1) {
            kernel_result tail =
                stable_tail_integral(spec_.alpha / 2.0, n_, ax, coeff_.K, window);
            out.value += tail.value;
            out.error_bound = tail.error_bound + 1e-12 * std::abs(out.value);
        } else {
            out.error_bound = static_cast<double>(window) * tau_tail_;
        }
        return out;
    }

private:
    void advance() {
        std::vector<double> buf(tau_);
        buf.resize(L_, 0.0);
        auto f = rfft(buf);
        for (std::size_t i = 0; i < f.size(); ++i) f[i] *= step_spec_[i];
        buf = irfft(f, L_);
        buf.resize(coeff_.K + 1);
        clamp_nonnegative(buf, clamps_);
        tau_ = std::move(buf);
        ++n_;
        kahan_sum s;
        for (double v : tau_) s.add(v);
        tau_tail_ = std::max(0.0, 1.0 - s.value());
    }

    walk_spec w_;
    bernstein_spec spec_;
    coeff_table coeff_;
    std::size_t L_ = 0;
    std::vector<std::complex<double>> step_spec_;
    std::vector<double> tau_;
    double tau_tail_ = 0.0;
    long long n_ = 0;
    clamp_stats clamps_;
};

// Direct route for a general walk: dense convolution sweep over k = 0..K
// accumulating p[k] (or its window sums) at the requested points.  Feasible
// only for moderate K; the guards push larger problems to the fourier route.
inline std::vector<kernel_result> kernel_exact_general(const walk_spec& w, const tau_table& tau,
                                                       const std::vector<std::vector<long long>>& xs,
                                                       long long window = 1) {
    validate_walk(w);
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    long long kend = static_cast<long long>(tau.K);

    std::vector<long long> lo(w.d), hi(w.d);
    long long cells = 1;
    for (int a = 0; a < w.d; ++a) {
        long long mn = 0, mx = 0;
        for (const auto& v : w.steps) {
            mn = std::min(mn, v[a]);
            mx = std::max(mx, v[a]);
        }
        lo[a] = kend * mn;
        hi[a] = kend * mx;
        cells *= hi[a] - lo[a] + 1;
        if (cells > (1LL << 26))
            throw numeric_error("exact route state space too large; use the fourier route");
    }
    double ops = static_cast<double>(cells) * static_cast<double>(kend) *
                 static_cast<double>(w.steps.size());
    if (ops > 1.8e10)
        throw numeric_error("exact route would need too many operations; use the fourier route");

    std::vector<long long> stride(w.d, 1);
    for (int a = w.d - 2; a >= 0; --a) stride[a] = stride[a + 1] * (hi[a + 1] - lo[a + 1] + 1);
    long long origin = 0;
    for (int a = 0; a < w.d; ++a) origin -= lo[a] * stride[a];

    std::vector<long long> step_off(w.steps.size());
    for (std::size_t i = 0; i < w.steps.size(); ++i) {
        long long off = 0;
        for (int a = 0; a < w.d; ++a) off += w.steps[i][a] * stride[a];
        step_off[i] = off;
    }

    std::vector<double> wt(tau.p.size(), 0.0);
    for (long long k = 0; k <= kend; ++k) {
        double s = 0.0;
        for (long long j = 0; j < window && k - j >= 0; ++j)
            s += tau.p[static_cast<std::size_t>(k - j)];
        wt[static_cast<std::size_t>(k)] = s;
    }

    std::vector<long long> xoff(xs.size(), -1);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (static_cast<int>(xs[i].size()) != w.d)
            throw std::invalid_argument("x has wrong dimension");
        bool inside = true;
        long long off = origin;
        for (int a = 0; a < w.d; ++a) {
            if (xs[i][a] < lo[a] || xs[i][a] > hi[a]) {
                inside = false;
                break;
            }
            off += xs[i][a] * stride[a];
        }
        if (inside) xoff[i] = off;
    }

    std::vector<double> cur(static_cast<std::size_t>(cells), 0.0);
    std::vector<double> nxt(static_cast<std::size_t>(cells), 0.0);
    cur[static_cast<std::size_t>(origin)] = 1.0;
    std::vector<kahan_sum> acc(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (xoff[i] >= 0) acc[i].add(wt[0] * cur[static_cast<std::size_t>(xoff[i])]);
    // after k steps the support stays inside k * (step range), so in-support
    // cells never index outside the box
    for (long long k = 1; k <= kend; ++k) {
        std::fill(nxt.begin(), nxt.end(), 0.0);
        for (long long idx = 0; idx < cells; ++idx) {
            double pv = cur[static_cast<std::size_t>(idx)];
            if (pv == 0.0) continue;
            for (std::size_t i = 0; i < w.steps.size(); ++i)
                nxt[static_cast<std::size_t>(idx + step_off[i])] += pv * w.prob[i];
        }
        std::swap(cur, nxt);
        if (wt[static_cast<std::size_t>(k)] != 0.0)
            for (std::size_t i = 0; i < xs.size(); ++i)
                if (xoff[i] >= 0)
                    acc[i].add(wt[static_cast<std::size_t>(k)] *
                               cur[static_cast<std::size_t>(xoff[i])]);
    }

    std::vector<kernel_result> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        out[i].value = acc[i].value();
        out[i].error_bound = static_cast<double>(window) * tau.tail_mass;
    }
    return out;
}

inline std::vector<kernel_result> kernel_exact(const walk_spec& w, const bernstein_spec& spec,
                                               const std::vector<std::vector<long long>>& xs,
                                               long long n, std::size_t K, long long window = 1) {
    validate_walk(w);
    if (n < 0) throw std::invalid_argument("n must be >= 0");
    if (detail::is_simple_1d(w)) {
        exact_kernel eng(w, spec, K);
        eng.set_n(n);
        std::vector<kernel_result> out;
        out.reserve(xs.size());
        for (const auto& x : xs) {
            if (x.size() != 1) throw std::invalid_argument("x has wrong dimension");
            out.push_back(eng.at_windowed(x[0], window));
        }
        return out;
    }
    tau_table tau = tau_pmf(coefficients(spec, K), n);
    return kernel_exact_general(w, tau, xs, window);
}

// Fourier route for d = 1: p_M(x, n) = (1/M) sum_m V(theta_m)^n e^(-i theta_m x)
// with V = 1 - psi(1 - Phi), the exact periodization of p_psi on Z mod M.
// The only error against p_psi is aliasing, bounded by aliasing_bound.
// Symmetric walks keep a real half spectrum; general walks a complex one.
class fourier_kernel {
public:
    fourier_kernel(const walk_spec& w, const bernstein_spec& spec, std::size_t M)
        : w_(w), spec_(spec), M_(M) {
        validate_walk(w_);
        if (w_.d != 1)
            throw std::invalid_argument("fourier_kernel drives d = 1; use kernel_fourier instead");
        if (M_ < 4 || (M_ % 2) != 0) throw std::invalid_argument("M must be even and >= 4");
        symmetric_ = detail::walk_is_symmetric(w_);
        const double two_pi = 2.0 * M_PI;
        std::vector<double> theta(1);
        if (symmetric_) {
            std::size_t H = M_ / 2;
            phi_r_.resize(H + 1);
            V_r_.resize(H + 1);
            for (std::size_t m = 0; m <= H; ++m) {
                theta[0] = two_pi * static_cast<double>(m) / static_cast<double>(M_);
                double u = std::max(one_minus_char(w_, theta).real(), 0.0);
                if (m != 0 && u < 1e-15)
                    throw numeric_error(
                        "walk characteristic function returns to 1 at a nonzero grid point; "
                        "the walk is periodic for this M");
                phi_r_[m] = 1.0 - u;
                V_r_[m] = (m == 0) ? 1.0 : 1.0 - eval_psi(spec_, u);
            }
            W_r_.assign(H + 1, 1.0);
        } else {
            phi_c_.resize(M_);
            V_c_.resize(M_);
            for (std::size_t m = 0; m < M_; ++m) {
                theta[0] = two_pi * static_cast<double>(m) / static_cast<double>(M_);
                std::complex<double> u = one_minus_char(w_, theta);
                if (m != 0 && u.real() < 1e-15)
                    throw numeric_error(
                        "walk characteristic function returns to 1 at a nonzero grid point; "
                        "the walk is periodic for this M");
                phi_c_[m] = 1.0 - u;
                V_c_[m] = (m == 0) ? std::complex<double>(1.0)
                                   : 1.0 - eval_psi_complex(spec_, u);
            }
            W_c_.assign(M_, std::complex<double>(1.0));
        }
        // degenerate walks are reported as grid periodicity above, before the
        // reachability analysis gets a chance to reject them
        analysis_ = analyze_walk(w_);
    }

    std::size_t M() const { return M_; }
    long long n() const { return n_; }
    const walk_analysis& analysis() const { return analysis_; }

    void set_n(long long n) {
        if (n < 0) throw std::invalid_argument("n must be >= 0");
        if (n == n_) return;
        long long dn = n - n_;
        if (dn < 0) {
            if (symmetric_)
                std::fill(W_r_.begin(), W_r_.end(), 1.0);
            else
                std::fill(W_c_.begin(), W_c_.end(), std::complex<double>(1.0));
            dn = n;
        }
        if (dn > 0) {
            if (symmetric_) {
                if (dn == 1)
                    for (std::size_t i = 0; i < W_r_.size(); ++i) W_r_[i] *= V_r_[i];
                else
                    for (std::size_t i = 0; i < W_r_.size(); ++i)
                        W_r_[i] *= detail::pow_ll(V_r_[i], dn);
            } else {
                if (dn == 1)
                    for (std::size_t i = 0; i < W_c_.size(); ++i) W_c_[i] *= V_c_[i];
                else
                    for (std::size_t i = 0; i < W_c_.size(); ++i)
                        W_c_[i] *= detail::pow_ll(V_c_[i], dn);
            }
        }
        n_ = n;
        fresh_ = false;
    }

    // kernel values on the full period 0..M-1 for the current n
    const std::vector<double>& values() {
        if (!fresh_) {
            p_ = invert(1);
            fresh_ = true;
        }
        return p_;
    }

    kernel_result at(long long x) {
        check_x(x);
        const auto& p = values();
        kernel_result out;
        out.value = p[grid_index(x)];
        out.error_bound = aliasing_bound(spec_, 1, analysis_.period, analysis_.q.Q, n_,
                                         std::llabs(x), M_);
        return out;
    }

    // smoothed kernel: multiplier sum_{j<window} Phi^j applied on the spectrum
    kernel_result at_windowed(long long x, long long window) {
        if (window < 1) throw std::invalid_argument("window must be >= 1");
        if (window == 1) return at(x);
        check_x(x);
        std::vector<double> ps = invert(window);
        kernel_result out;
        out.value = ps[grid_index(x)];
        out.error_bound = static_cast<double>(window) *
                          aliasing_bound(spec_, 1, analysis_.period, analysis_.q.Q, n_,
                                         std::llabs(x), M_);
        return out;
    }

private:
    void check_x(long long x) const {
        if (2 * std::llabs(x) >= static_cast<long long>(M_))
            throw std::invalid_argument("fourier grid needs M > 2|x|");
    }

    std::size_t grid_index(long long x) const {
        long long m = static_cast<long long>(M_);
        return static_cast<std::size_t>(((x % m) + m) % m);
    }

    std::vector<double> invert(long long window) const {
        if (symmetric_) {
            std::vector<std::complex<double>> spec(W_r_.size());
            for (std::size_t i = 0; i < W_r_.size(); ++i) {
                double mult = 1.0, pj = 1.0;
                for (long long j = 1; j < window; ++j) {
                    pj *= phi_r_[i];
                    mult += pj;
                }
                spec[i] = W_r_[i] * mult;
            }
            return irfft(spec, M_);
        }
        std::vector<std::complex<double>> buf(M_);
        for (std::size_t i = 0; i < M_; ++i) {
            std::complex<double> mult(1.0), pj(1.0);
            for (long long j = 1; j < window; ++j) {
                pj *= phi_c_[i];
                mult += pj;
            }
            buf[i] = W_c_[i] * mult;
        }
        cfft_inplace(buf, FFTW_FORWARD);
        std::vector<double> outp(M_);
        double inv = 1.0 / static_cast<double>(M_);
        for (std::size_t j = 0; j < M_; ++j) outp[j] = buf[j].real() * inv;
        return outp;
    }

    walk_spec w_;
    bernstein_spec spec_;
    std::size_t M_;
    bool symmetric_ = false;
    std::vector<double> phi_r_, V_r_, W_r_;
    std::vector<std::complex<double>> phi_c_, V_c_, W_c_;
    walk_analysis analysis_;
    long long n_ = 0;
    bool fresh_ = false;
    std::vector<double> p_;
};

// Fourier route on a d-dimensional M^d grid by direct summation; meant for
// d in {2, 3} where per-point sums over the grid are affordable.
inline std::vector<kernel_result> kernel_fourier_grid(const walk_spec& w,
                                                      const bernstein_spec& spec,
                                                      const std::vector<std::vector<long long>>& xs,
                                                      long long n, std::size_t M,
                                                      long long window = 1) {
    validate_walk(w);
    if (n < 0) throw std::invalid_argument("n must be >= 0");
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    if (M < 4 || (M % 2) != 0) throw std::invalid_argument("M must be even and >= 4");
    double cells_d = std::pow(static_cast<double>(M), w.d);
    if (cells_d > 16777216.0) throw numeric_error("fourier grid too large");
    std::size_t cells = 1;
    for (int a = 0; a < w.d; ++a) cells *= M;

    const double two_pi = 2.0 * M_PI;
    std::vector<std::complex<double>> W(cells);
    std::vector<double> theta(w.d);
    for (std::size_t c = 0; c < cells; ++c) {
        std::size_t rem = c;
        bool zero = true;
        for (int a = w.d - 1; a >= 0; --a) {
            std::size_t ma = rem % M;
            rem /= M;
            theta[a] = two_pi * static_cast<double>(ma) / static_cast<double>(M);
            if (ma != 0) zero = false;
        }
        std::complex<double> u = one_minus_char(w, theta);
        if (!zero && u.real() < 1e-15)
            throw numeric_error(
                "walk characteristic function returns to 1 at a nonzero grid point; "
                "the walk is periodic for this M");
        std::complex<double> V = zero ? std::complex<double>(1.0)
                                      : 1.0 - eval_psi_complex(spec, u);
        std::complex<double> mult(1.0), pj(1.0);
        for (long long j = 1; j < window; ++j) {
            pj *= 1.0 - u;
            mult += pj;
        }
        W[c] = detail::pow_ll(V, n) * mult;
    }
    walk_analysis an = analyze_walk(w);

    std::vector<kernel_result> out(xs.size());
    std::vector<std::vector<std::complex<double>>> tw(
        static_cast<std::size_t>(w.d), std::vector<std::complex<double>>(M));
    for (std::size_t t = 0; t < xs.size(); ++t) {
        if (static_cast<int>(xs[t].size()) != w.d)
            throw std::invalid_argument("x has wrong dimension");
        long long ax_inf = 0;
        for (int a = 0; a < w.d; ++a) {
            long long axa = std::llabs(xs[t][a]);
            ax_inf = std::max(ax_inf, axa);
            if (2 * axa >= static_cast<long long>(M))
                throw std::invalid_argument("fourier grid needs M > 2|x|");
            for (std::size_t m = 0; m < M; ++m)
                tw[static_cast<std::size_t>(a)][m] = std::polar(
                    1.0, -two_pi * static_cast<double>(m) * static_cast<double>(xs[t][a]) /
                             static_cast<double>(M));
        }
        kahan_sum re;
        if (w.d == 1) {
            for (std::size_t m0 = 0; m0 < M; ++m0) re.add((W[m0] * tw[0][m0]).real());
        } else if (w.d == 2) {
            for (std::size_t m0 = 0; m0 < M; ++m0)
                for (std::size_t m1 = 0; m1 < M; ++m1)
                    re.add((W[m0 * M + m1] * tw[0][m0] * tw[1][m1]).real());
        } else {
            for (std::size_t m0 = 0; m0 < M; ++m0)
                for (std::size_t m1 = 0; m1 < M; ++m1)
                    for (std::size_t m2 = 0; m2 < M; ++m2)
                        re.add((W[(m0 * M + m1) * M + m2] * tw[0][m0] * tw[1][m1] * tw[2][m2])
                                   .real());
        }
        out[t].value = re.value() / static_cast<double>(cells);
        out[t].error_bound = static_cast<double>(window) *
                             aliasing_bound(spec, w.d, an.period, an.q.Q, n, ax_inf, M);
    }
    return out;
}

inline std::vector<kernel_result> kernel_fourier(const walk_spec& w, const bernstein_spec& spec,
                                                 const std::vector<std::vector<long long>>& xs,
                                                 long long n, std::size_t M, long long window = 1) {
    validate_walk(w);
    if (w.d == 1) {
        fourier_kernel eng(w, spec, M);
        eng.set_n(n);
        std::vector<kernel_result> out;
        out.reserve(xs.size());
        for (const auto& x : xs) {
            if (x.size() != 1) throw std::invalid_argument("x has wrong dimension");
            out.push_back(eng.at_windowed(x[0], window));
        }
        return out;
    }
    return kernel_fourier_grid(w, spec, xs, n, M, window);
}

}  // namespace subwalk
