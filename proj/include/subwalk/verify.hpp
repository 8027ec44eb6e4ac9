#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <string>
#include <vector>

#include "subwalk/bernstein.hpp"
#include "subwalk/common.hpp"
#include "subwalk/kernel.hpp"
#include "subwalk/stable_limit.hpp"
#include "subwalk/subordinator.hpp"
#include "subwalk/walk.hpp"

namespace subwalk {

// Outcome of one asymptotic study: measured quantity, its predicted limit
// form, and their ratio per grid cell.  pass summarizes the study's own
// acceptance rule (documented per study); worst_ratio is the judged ratio
// farthest from 1.
struct asymptotic_report {
    std::string study;
    std::vector<std::string> grid;
    std::vector<double> measured;
    std::vector<double> predicted;
    std::vector<double> ratio;
    double tolerance = 0.0;
    double worst_ratio = 1.0;
    bool pass = false;
};

// The canonical spatial scale s(n) = psi^{-1}(1/n)^{-1/2}.
inline double canonical_scale(const bernstein_spec& spec, long long n) {
    if (n < 1) throw std::invalid_argument("canonical scale needs n >= 1");
    return 1.0 / std::sqrt(inverse_psi(spec, 1.0 / static_cast<double>(n)));
}

namespace detail {

inline std::string cell_label(const std::string& key, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s=%.12g", key.c_str(), v);
    return buf;
}

// log(1 + w) without cancellation for small |w|
inline std::complex<double> clog1p(std::complex<double> w) {
    if (std::abs(w) < 1e-4) {
        // w - w^2/2 + w^3/3 - w^4/4, remainder below 1e-20
        return w * (1.0 - w * (0.5 - w * (1.0 / 3.0 - w * 0.25)));
    }
    return std::log(1.0 + w);
}

// judged-cells rule shared by the grid studies: every judged ratio within
// tolerance of 1, and when an earlier comparison cell is supplied, the
// deviation must not have grown
inline void finish_report(asymptotic_report& rep, const std::vector<std::size_t>& judged,
                          double improvement_vs = -1.0) {
    bool ok = true;
    double worst = 0.0;
    for (std::size_t i : judged) {
        double dev = std::abs(rep.ratio[i] - 1.0);
        if (dev > worst) {
            worst = dev;
            rep.worst_ratio = rep.ratio[i];
        }
        if (dev > rep.tolerance) ok = false;
    }
    if (improvement_vs >= 0.0 && worst > improvement_vs + 1e-12) ok = false;
    rep.pass = ok;
}

}  // namespace detail

// On-site decay: p_psi(0, n) against D(d, alpha, Q) psi^{-1}(1/n)^{d/2}.
// Pass: the last (largest n) ratio is within tol of 1 and its deviation does
// not exceed the first cell's.
inline asymptotic_report verify_onsite(const walk_spec& w, const bernstein_spec& spec,
                                       const std::vector<long long>& n_grid, std::size_t M,
                                       double tol = 0.05) {
    if (n_grid.empty()) throw std::invalid_argument("verify_onsite needs a nonempty n grid");
    asymptotic_report rep;
    rep.study = "onsite-decay";
    rep.tolerance = tol;
    walk_analysis an = analyze_walk(w);
    double D = const_D(w.d, spec.alpha, an.q.Q);
    std::vector<long long> origin(static_cast<std::size_t>(w.d), 0);

    if (w.d == 1) {
        fourier_kernel eng(w, spec, M);
        for (long long n : n_grid) {
            eng.set_n(n);
            rep.measured.push_back(eng.at(0).value);
        }
    } else {
        for (long long n : n_grid)
            rep.measured.push_back(kernel_fourier_grid(w, spec, {origin}, n, M)[0].value);
    }
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        long long n = n_grid[i];
        rep.grid.push_back(detail::cell_label("n", static_cast<double>(n)));
        double pred = D * std::pow(inverse_psi(spec, 1.0 / static_cast<double>(n)),
                                   0.5 * static_cast<double>(w.d));
        rep.predicted.push_back(pred);
        rep.ratio.push_back(rep.measured[i] / pred);
    }
    double first_dev = std::abs(rep.ratio.front() - 1.0);
    detail::finish_report(rep, {rep.ratio.size() - 1},
                          n_grid.size() > 1 ? first_dev : -1.0);
    return rep;
}

// Subordinator tail: P(tau_n > t) against n psi(1/t) / Gamma(1 - alpha/2).
// The empirical side is exact: for t <= K the truncated mass is known in
// closed form and included.  Pass judged on the largest-t cell (deepest
// asymptotic regime), with the same no-worsening rule.
inline asymptotic_report verify_tail(const bernstein_spec& spec, long long n,
                                     const std::vector<double>& t_grid, double eps = 1e-8,
                                     std::size_t K_cap = (std::size_t{1} << 23) - 1,
                                     double tol = 0.15) {
    if (t_grid.empty()) throw std::invalid_argument("verify_tail needs a nonempty t grid");
    if (!std::is_sorted(t_grid.begin(), t_grid.end()))
        throw std::invalid_argument("t grid must be sorted increasing");
    asymptotic_report rep;
    rep.study = "tail-asymptotic";
    rep.tolerance = tol;
    tau_table tab = tau_pmf_auto(spec, n, eps, K_cap);
    for (double t : t_grid) {
        rep.grid.push_back(detail::cell_label("t", t));
        tail_bracket b = tau_tail(tab, t);
        double pred = tau_tail_predictor(spec, spec.alpha, n, t);
        rep.measured.push_back(b.hi);
        rep.predicted.push_back(pred);
        rep.ratio.push_back(b.hi / pred);
    }
    double first_dev = std::abs(rep.ratio.front() - 1.0);
    detail::finish_report(rep, {rep.ratio.size() - 1},
                          t_grid.size() > 1 ? first_dev : -1.0);
    return rep;
}

// Ratio limit: p_psi(x, n) / p_psi(0, n) -> 1 for fixed x.  All cells judged.
inline asymptotic_report verify_ratio(const walk_spec& w, const bernstein_spec& spec,
                                      long long n, const std::vector<std::vector<long long>>& xs,
                                      std::size_t M, double tol = 0.01) {
    if (xs.empty()) throw std::invalid_argument("verify_ratio needs at least one x");
    asymptotic_report rep;
    rep.study = "ratio-limit";
    rep.tolerance = tol;
    std::vector<std::vector<long long>> pts = xs;
    pts.push_back(std::vector<long long>(static_cast<std::size_t>(w.d), 0));
    std::vector<kernel_result> vals = kernel_fourier(w, spec, pts, n, M);
    double p0 = vals.back().value;
    if (!(p0 > 0.0)) throw numeric_error("on-site kernel value is not positive");
    std::vector<std::size_t> judged;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double nx = 0.0;
        for (long long c : xs[i]) nx += static_cast<double>(c) * static_cast<double>(c);
        rep.grid.push_back(detail::cell_label("|x|", std::sqrt(nx)));
        rep.measured.push_back(vals[i].value / p0);
        rep.predicted.push_back(1.0);
        rep.ratio.push_back(rep.measured.back());
        judged.push_back(i);
    }
    detail::finish_report(rep, judged);
    return rep;
}

// Off-diagonal heavy-tail form: smoothed kernel against
// r C(d, alpha, Q) n psi(|x|^-2) |x|^-d.  Either route; all cells judged.
inline asymptotic_report verify_polya(const walk_spec& w, const bernstein_spec& spec,
                                      const std::vector<std::vector<long long>>& xs, long long n,
                                      bool use_fourier, std::size_t size, double tol = 0.15) {
    if (xs.empty()) throw std::invalid_argument("verify_polya needs at least one x");
    asymptotic_report rep;
    rep.study = "polya-tail";
    rep.tolerance = tol;
    walk_analysis an = analyze_walk(w);
    long long r = an.period;
    double C = const_C(w.d, spec.alpha, an.q.Q);
    std::vector<kernel_result> vals = use_fourier ? kernel_fourier(w, spec, xs, n, size, r)
                                                  : kernel_exact(w, spec, xs, n, size, r);
    std::vector<std::size_t> judged;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double nx = 0.0;
        for (long long c : xs[i]) nx += static_cast<double>(c) * static_cast<double>(c);
        nx = std::sqrt(nx);
        if (!(nx > 0.0)) throw std::invalid_argument("verify_polya needs x != 0");
        rep.grid.push_back(detail::cell_label("|x|", nx));
        double pred = static_cast<double>(r) * C * static_cast<double>(n) *
                      eval_psi(spec, 1.0 / (nx * nx)) * std::pow(nx, -w.d);
        rep.measured.push_back(vals[i].value);
        rep.predicted.push_back(pred);
        rep.ratio.push_back(vals[i].value / pred);
        judged.push_back(i);
    }
    detail::finish_report(rep, judged);
    return rep;
}

// Domain of attraction: n Log Phi_psi(xi / s(n)) along the first axis against
// -2^{-alpha/2} (Q_11 xi^2)^{alpha/2}.  Judged on the largest-n cells, with
// the no-worsening rule against the first n when the grid has several.
inline asymptotic_report verify_doa(const walk_spec& w, const bernstein_spec& spec,
                                    const std::vector<long long>& n_grid,
                                    const std::vector<double>& xi_grid, double tol = 0.02) {
    if (n_grid.empty() || xi_grid.empty())
        throw std::invalid_argument("verify_doa needs nonempty grids");
    asymptotic_report rep;
    rep.study = "domain-of-attraction";
    rep.tolerance = tol;
    walk_analysis an = analyze_walk(w);
    double q11 = an.q.Q[0];
    bool symmetric = detail::walk_is_symmetric(w);
    std::vector<double> theta(static_cast<std::size_t>(w.d), 0.0);
    std::vector<std::size_t> judged;
    for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
        long long n = n_grid[ni];
        double bn = canonical_scale(spec, n);
        for (double xi : xi_grid) {
            theta[0] = xi / bn;
            double measured;
            if (symmetric) {
                double u = std::max(one_minus_char(w, theta).real(), 0.0);
                measured = static_cast<double>(n) * std::log1p(-eval_psi(spec, u));
            } else {
                std::complex<double> u = one_minus_char(w, theta);
                measured = static_cast<double>(n) *
                           detail::clog1p(-eval_psi_complex(spec, u)).real();
            }
            double pred = -std::pow(2.0, -0.5 * spec.alpha) *
                          std::pow(q11 * xi * xi, 0.5 * spec.alpha);
            rep.grid.push_back(detail::cell_label("n", static_cast<double>(n)) + " " +
                               detail::cell_label("xi", xi));
            rep.measured.push_back(measured);
            rep.predicted.push_back(pred);
            rep.ratio.push_back(measured / pred);
            if (ni + 1 == n_grid.size()) judged.push_back(rep.ratio.size() - 1);
        }
    }
    double first_dev = -1.0;
    if (n_grid.size() > 1) {
        first_dev = 0.0;
        for (std::size_t i = 0; i < xi_grid.size(); ++i)
            first_dev = std::max(first_dev, std::abs(rep.ratio[i] - 1.0));
    }
    detail::finish_report(rep, judged, first_dev);
    return rep;
}

// Two-sided Kolmogorov-Smirnov distance on a lattice sample: atoms are
// compared on both sides, sup_v max(F(v) - Femp(v-), Femp(v) - F(v)).
inline double ks_distance(std::vector<double> sample, const stable_limit_law& lim, double t) {
    std::sort(sample.begin(), sample.end());
    double N = static_cast<double>(sample.size());
    double D = 0.0;
    std::size_t i = 0;
    while (i < sample.size()) {
        std::size_t j = i;
        while (j < sample.size() && sample[j] == sample[i]) ++j;
        double F = stable_cdf(lim, sample[i], t);
        D = std::max(D, F - static_cast<double>(i) / N);
        D = std::max(D, static_cast<double>(j) / N - F);
        i = j;
    }
    return D;
}

// Functional limit marginal: S^psi_{floor(n t)} / s(n) against the limit law
// at time t, measured by the two-sided KS distance on `replicas` endpoints.
// measured = KS, predicted = 0, ratio = KS / tol.  Pass: the last (largest n)
// KS is below tol and no larger than the first cell's.
inline asymptotic_report verify_flt_marginal(const walk_spec& w, const bernstein_spec& spec,
                                             const std::vector<long long>& n_grid, double t,
                                             long long replicas, std::uint64_t seed,
                                             double tol = 0.02, std::size_t sampler_K = 4095) {
    if (n_grid.empty()) throw std::invalid_argument("verify_flt_marginal needs an n grid");
    if (w.d != 1) throw std::invalid_argument("the marginal comparison is for d = 1");
    asymptotic_report rep;
    rep.study = "flt-marginal";
    rep.tolerance = tol;
    walk_analysis an = analyze_walk(w);
    stable_limit_law lim = make_stable_limit(w.d, spec.alpha, an.q.Q);
    coeff_table table = coefficients(spec, sampler_K);
    for (long long n : n_grid) {
        rep.grid.push_back(detail::cell_label("n", static_cast<double>(n)));
        std::vector<long long> raw = simulate_endpoint(
            w, spec, table, n, {t}, replicas,
            derive_seed(seed, static_cast<std::uint64_t>(n)));
        double bn = canonical_scale(spec, n);
        std::vector<double> scaled(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i)
            scaled[i] = static_cast<double>(raw[i]) / bn;
        double ks = ks_distance(std::move(scaled), lim, t);
        rep.measured.push_back(ks);
        rep.predicted.push_back(0.0);
        rep.ratio.push_back(ks / tol);
    }
    rep.worst_ratio = rep.ratio.back();
    rep.pass = rep.measured.back() <= tol &&
               (n_grid.size() < 2 || rep.measured.back() <= rep.measured.front() + 1e-12);
    return rep;
}

}  // namespace subwalk
