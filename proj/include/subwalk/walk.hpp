#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "subwalk/common.hpp"

namespace subwalk {

// Mean-zero irreducible random walk on Z^d, d in {1,2,3}, with finitely many
// steps.  Probabilities can be exact rationals ("1/6"); validation is then
// exact instead of tolerance-based.
struct walk_spec {
    int d = 1;
    std::vector<std::vector<long long>> steps;
    std::vector<double> prob;
    std::vector<rational> prob_rat;  // parallel to prob when rational_probs
    bool rational_probs = false;
};

inline void validate_walk(const walk_spec& w) {
    if (w.d < 1 || w.d > 3) throw std::invalid_argument("dimension must be 1, 2, or 3");
    if (w.steps.empty()) throw std::invalid_argument("walk needs at least one step");
    if (w.steps.size() != w.prob.size())
        throw std::invalid_argument("steps and probabilities must have equal length");
    for (const auto& v : w.steps)
        if (static_cast<int>(v.size()) != w.d)
            throw std::invalid_argument("step dimension mismatch");
    auto sorted = w.steps;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("step vectors must be distinct");
    for (double p : w.prob)
        if (!(p > 0.0)) throw std::invalid_argument("step probabilities must be positive");

    if (w.rational_probs) {
        if (w.prob_rat.size() != w.prob.size())
            throw std::invalid_argument("rational probabilities missing");
        rational sum{0, 1};
        for (const auto& r : w.prob_rat) sum = sum + r;
        if (!(sum == rational{1, 1}))
            throw std::invalid_argument("step probabilities must sum to 1");
        for (int a = 0; a < w.d; ++a) {
            rational mean{0, 1};
            for (std::size_t i = 0; i < w.steps.size(); ++i)
                mean = mean + w.prob_rat[i] * w.steps[i][a];
            if (!(mean == rational{0, 1}))
                throw std::invalid_argument("walk must have exactly zero mean");
        }
    } else {
        kahan_sum sum;
        for (double p : w.prob) sum.add(p);
        if (std::abs(sum.value() - 1.0) > 1e-14)
            throw std::invalid_argument("step probabilities must sum to 1");
        for (int a = 0; a < w.d; ++a) {
            kahan_sum mean;
            for (std::size_t i = 0; i < w.steps.size(); ++i)
                mean.add(w.prob[i] * static_cast<double>(w.steps[i][a]));
            if (std::abs(mean.value()) > 1e-14)
                throw std::invalid_argument("walk must have zero mean");
        }
    }
}

inline walk_spec make_walk(int d, std::vector<std::vector<long long>> steps,
                           std::vector<double> prob) {
    walk_spec w;
    w.d = d;
    w.steps = std::move(steps);
    w.prob = std::move(prob);
    validate_walk(w);
    return w;
}

inline walk_spec make_walk_rational(int d, std::vector<std::vector<long long>> steps,
                                    std::vector<rational> prob) {
    walk_spec w;
    w.d = d;
    w.steps = std::move(steps);
    w.prob_rat = std::move(prob);
    w.rational_probs = true;
    w.prob.reserve(w.prob_rat.size());
    for (const auto& r : w.prob_rat) w.prob.push_back(r.as_double());
    validate_walk(w);
    return w;
}

// Simple walk: +-e_i with probability 1/(2d) each.
inline walk_spec make_simple_walk(int d) {
    std::vector<std::vector<long long>> steps;
    std::vector<rational> prob;
    for (int a = 0; a < d; ++a) {
        for (int sgn : {+1, -1}) {
            std::vector<long long> v(d, 0);
            v[a] = sgn;
            steps.push_back(std::move(v));
            prob.push_back(rational{1, 2LL * d});
        }
    }
    return make_walk_rational(d, std::move(steps), std::move(prob));
}

// Covariance form Q_ab = sum_v p(v) v_a v_b with inverse and determinant.
struct quad_form {
    int d = 1;
    std::vector<double> Q;     // row-major d x d
    std::vector<double> Qinv;  // row-major d x d
    double detQ = 0.0;
};

inline quad_form compute_Q(const walk_spec& w) {
    quad_form q;
    q.d = w.d;
    q.Q.assign(static_cast<std::size_t>(w.d) * w.d, 0.0);
    for (std::size_t i = 0; i < w.steps.size(); ++i)
        for (int a = 0; a < w.d; ++a)
            for (int b = 0; b < w.d; ++b)
                q.Q[static_cast<std::size_t>(a) * w.d + b] +=
                    w.prob[i] * static_cast<double>(w.steps[i][a]) *
                    static_cast<double>(w.steps[i][b]);
    const auto& Q = q.Q;
    q.Qinv.assign(Q.size(), 0.0);
    if (w.d == 1) {
        q.detQ = Q[0];
        if (!(q.detQ > 0.0)) throw std::invalid_argument("covariance not positive definite");
        q.Qinv[0] = 1.0 / Q[0];
    } else if (w.d == 2) {
        q.detQ = Q[0] * Q[3] - Q[1] * Q[2];
        if (!(Q[0] > 0.0 && q.detQ > 0.0))
            throw std::invalid_argument("covariance not positive definite");
        q.Qinv = {Q[3] / q.detQ, -Q[1] / q.detQ, -Q[2] / q.detQ, Q[0] / q.detQ};
    } else {
        double m00 = Q[4] * Q[8] - Q[5] * Q[7];
        double m01 = Q[3] * Q[8] - Q[5] * Q[6];
        double m02 = Q[3] * Q[7] - Q[4] * Q[6];
        q.detQ = Q[0] * m00 - Q[1] * m01 + Q[2] * m02;
        double det2 = Q[0] * Q[4] - Q[1] * Q[3];
        if (!(Q[0] > 0.0 && det2 > 0.0 && q.detQ > 0.0))
            throw std::invalid_argument("covariance not positive definite");
        q.Qinv = {m00 / q.detQ,
                  -(Q[1] * Q[8] - Q[2] * Q[7]) / q.detQ,
                  (Q[1] * Q[5] - Q[2] * Q[4]) / q.detQ,
                  -m01 / q.detQ,
                  (Q[0] * Q[8] - Q[2] * Q[6]) / q.detQ,
                  -(Q[0] * Q[5] - Q[2] * Q[3]) / q.detQ,
                  m02 / q.detQ,
                  -(Q[0] * Q[7] - Q[1] * Q[6]) / q.detQ,
                  (Q[0] * Q[4] - Q[1] * Q[3]) / q.detQ};
    }
    return q;
}

inline double quad_apply(const std::vector<double>& M, int d, const std::vector<double>& x) {
    double acc = 0.0;
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) acc += M[static_cast<std::size_t>(a) * d + b] * x[a] * x[b];
    return acc;
}

// Structure of the walk: period r, residue classes, covariance.
// class_gen[i] is the class of the unit vector e_i; a point x is reachable
// at time n only if sum_i class_gen[i] x_i = n (mod r).
struct walk_analysis {
    int d = 1;
    long long period = 1;
    std::vector<long long> class_gen;
    quad_form q;
    bool symmetric = false;
};

inline long long point_class(const walk_analysis& an, const std::vector<long long>& x) {
    long long s = 0;
    for (int a = 0; a < an.d; ++a) s += an.class_gen[a] * x[a];
    long long r = an.period;
    return ((s % r) + r) % r;
}

inline walk_analysis analyze_walk(const walk_spec& w) {
    validate_walk(w);
    walk_analysis an;
    an.d = w.d;
    an.q = compute_Q(w);

    // symmetry: step set closed under v -> -v with matching probabilities
    std::map<std::vector<long long>, double> pmap;
    for (std::size_t i = 0; i < w.steps.size(); ++i) pmap[w.steps[i]] = w.prob[i];
    an.symmetric = true;
    for (std::size_t i = 0; i < w.steps.size(); ++i) {
        std::vector<long long> neg(w.steps[i]);
        for (auto& c : neg) c = -c;
        auto it = pmap.find(neg);
        if (it == pmap.end() || it->second != w.prob[i]) {
            an.symmetric = false;
            break;
        }
    }

    // Reachability in a box |x|_inf <= B over 64 steps.  Probabilities are
    // irrelevant here (and would underflow), so the sweep is boolean; the
    // first hitting time of each cell is recorded along the way.
    long long maxA = 1;
    for (const auto& v : w.steps)
        for (long long c : v) maxA = std::max(maxA, std::llabs(c));
    const long long B = 32 * maxA;
    const int horizon = 64;
    long long side = 2 * B + 1;
    long long cells = 1;
    for (int a = 0; a < w.d; ++a) {
        cells *= side;
        if (cells > (1LL << 26)) throw numeric_error("period search box too large");
    }
    std::vector<long long> stride(w.d);
    stride[w.d - 1] = 1;
    for (int a = w.d - 2; a >= 0; --a) stride[a] = stride[a + 1] * side;
    std::vector<long long> step_off(w.steps.size());
    for (std::size_t i = 0; i < w.steps.size(); ++i) {
        long long off = 0;
        for (int a = 0; a < w.d; ++a) off += w.steps[i][a] * stride[a];
        step_off[i] = off;
    }
    long long origin = 0;
    for (int a = 0; a < w.d; ++a) origin += B * stride[a];

    std::vector<char> cur(cells, 0), nxt(cells, 0);
    std::vector<int> first_hit(cells, -1);
    cur[origin] = 1;
    std::vector<long long> coord(w.d);
    std::vector<int> return_times;
    for (int n = 1; n <= horizon; ++n) {
        std::fill(nxt.begin(), nxt.end(), 0);
        for (long long idx = 0; idx < cells; ++idx) {
            if (!cur[idx]) continue;
            // decode to check box clearance per coordinate
            long long rem = idx;
            for (int a = 0; a < w.d; ++a) {
                coord[a] = rem / stride[a] - B;
                rem %= stride[a];
            }
            for (std::size_t i = 0; i < w.steps.size(); ++i) {
                bool inside = true;
                for (int a = 0; a < w.d; ++a) {
                    long long t = coord[a] + w.steps[i][a];
                    if (t < -B || t > B) {
                        inside = false;
                        break;
                    }
                }
                if (inside) nxt[idx + step_off[i]] = 1;
            }
        }
        std::swap(cur, nxt);
        for (long long idx = 0; idx < cells; ++idx)
            if (cur[idx] && first_hit[idx] < 0) first_hit[idx] = n;
        if (cur[origin] && std::find(return_times.begin(), return_times.end(), n) ==
                               return_times.end())
            return_times.push_back(n);
    }
    if (return_times.empty()) throw numeric_error("period undetermined within horizon");
    long long r = 0;
    for (int n : return_times) r = std::gcd(r, static_cast<long long>(n));
    an.period = r;

    // irreducibility: every point of the 3*maxA box must be reached
    const long long B2 = 3 * maxA;
    std::vector<long long> pt(w.d, -B2);
    while (true) {
        long long idx = 0;
        for (int a = 0; a < w.d; ++a) idx += (pt[a] + B) * stride[a];
        if (first_hit[idx] < 0) throw std::invalid_argument("reducible walk");
        int a = w.d - 1;
        while (a >= 0 && ++pt[a] > B2) pt[a--] = -B2;
        if (a < 0) break;
    }

    an.class_gen.assign(w.d, 0);
    for (int a = 0; a < w.d; ++a)
        an.class_gen[a] = first_hit[origin + stride[a]] % r;

    // consistency: recorded hitting times must agree with the class map mod r
    for (long long idx = 0; idx < cells; ++idx) {
        if (first_hit[idx] < 0) continue;
        long long rem = idx, s = 0;
        for (int a = 0; a < w.d; ++a) {
            s += an.class_gen[a] * (rem / stride[a] - B);
            rem %= stride[a];
        }
        if (((s - first_hit[idx]) % r + r) % r != 0)
            throw numeric_error("inconsistent residue class structure");
    }
    return an;
}

// 1 - Phi(theta) with Phi the characteristic function of one step, computed
// without cancellation: 1 - e^(i phi) = 2 sin^2(phi/2) - i sin(phi).
inline std::complex<double> one_minus_char(const walk_spec& w, const std::vector<double>& theta) {
    kahan_sum re, im;
    for (std::size_t i = 0; i < w.steps.size(); ++i) {
        double phi = 0.0;
        for (int a = 0; a < w.d; ++a) phi += theta[a] * static_cast<double>(w.steps[i][a]);
        double s = std::sin(0.5 * phi);
        re.add(w.prob[i] * 2.0 * s * s);
        im.add(-w.prob[i] * std::sin(phi));
    }
    return {re.value(), im.value()};
}

inline std::complex<double> char_fn(const walk_spec& w, const std::vector<double>& theta) {
    return 1.0 - one_minus_char(w, theta);
}

// Exact n-step distribution by dense dynamic programming on the reachable box.
struct lattice_pmf {
    int d = 1;
    std::vector<long long> lo, hi;  // per-coordinate bounds
    std::vector<long long> stride;
    std::vector<double> p;

    double at(const std::vector<long long>& x) const {
        long long idx = 0;
        for (int a = 0; a < d; ++a) {
            if (x[a] < lo[a] || x[a] > hi[a]) return 0.0;
            idx += (x[a] - lo[a]) * stride[a];
        }
        return p[idx];
    }
};

inline lattice_pmf convolve_walk(const walk_spec& w, long long n) {
    if (n < 0) throw std::invalid_argument("convolve_walk: n must be >= 0");
    lattice_pmf out;
    out.d = w.d;
    out.lo.assign(w.d, 0);
    out.hi.assign(w.d, 0);
    for (int a = 0; a < w.d; ++a) {
        long long mn = 0, mx = 0;
        for (const auto& v : w.steps) {
            mn = std::min(mn, v[a]);
            mx = std::max(mx, v[a]);
        }
        out.lo[a] = n * mn;
        out.hi[a] = n * mx;
    }
    long long cells = 1;
    for (int a = 0; a < w.d; ++a) {
        cells *= out.hi[a] - out.lo[a] + 1;
        if (cells > (1LL << 28)) throw numeric_error("walk convolution state space too large");
    }
    out.stride.assign(w.d, 1);
    for (int a = w.d - 2; a >= 0; --a)
        out.stride[a] = out.stride[a + 1] * (out.hi[a + 1] - out.lo[a + 1] + 1);
    long long origin = 0;
    for (int a = 0; a < w.d; ++a) origin += (0 - out.lo[a]) * out.stride[a];

    std::vector<long long> step_off(w.steps.size());
    for (std::size_t i = 0; i < w.steps.size(); ++i) {
        long long off = 0;
        for (int a = 0; a < w.d; ++a) off += w.steps[i][a] * out.stride[a];
        step_off[i] = off;
    }

    std::vector<double> cur(cells, 0.0), nxt(cells, 0.0);
    cur[origin] = 1.0;
    // after m steps, support is within m * (step range); sweep only that window
    for (long long m = 1; m <= n; ++m) {
        std::fill(nxt.begin(), nxt.end(), 0.0);
        for (long long idx = 0; idx < cells; ++idx) {
            double pv = cur[idx];
            if (pv == 0.0) continue;
            for (std::size_t i = 0; i < w.steps.size(); ++i) nxt[idx + step_off[i]] += pv * w.prob[i];
        }
        std::swap(cur, nxt);
    }
    out.p = std::move(cur);
    return out;
}

// Local limit estimate r (2 pi n)^(-d/2) det(Q)^(-1/2) exp(-<Qinv x, x>/(2n))
// on the residue class reachable at time n, 0 off it.
inline double lclt_estimate(const walk_analysis& an, const std::vector<long long>& x,
                            long long n) {
    long long want = static_cast<long long>(n % an.period);
    if (point_class(an, x) != want) return 0.0;
    const double pi = std::acos(-1.0);
    std::vector<double> xr(an.d);
    for (int a = 0; a < an.d; ++a) xr[a] = static_cast<double>(x[a]);
    double quad = quad_apply(an.q.Qinv, an.d, xr);
    double nd = static_cast<double>(n);
    return static_cast<double>(an.period) *
           std::pow(2.0 * pi * nd, -0.5 * an.d) / std::sqrt(an.q.detQ) *
           std::exp(-quad / (2.0 * nd));
}

}  // namespace subwalk
