#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace subwalk {

// Raised when a computation fails numerically (quadrature that will not
// converge, convolution round-off beyond tolerance, ...).  The CLI maps this
// to exit code 3, as opposed to argument/config errors (exit 2).
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Compensated (Kahan) accumulator for long probability sums.
struct kahan_sum {
    double s = 0.0;
    double c = 0.0;
    void add(double x) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    double value() const { return s; }
};

// splitmix64, used to derive independent substreams from (seed, stream-id).
// Sampling is pure given those two values.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64_next(s);
    s ^= stream * 0xda942042e4dd58b5ULL + 0x2545f4914f6cdd1dULL;
    std::uint64_t b = splitmix64_next(s);
    return a ^ (b + 0x9e3779b97f4a7c15ULL);
}

// Exact fraction with a small numerator/denominator; walk probabilities given
// as "1/6" are kept in this form so the mass and mean-zero checks can run in
// integer arithmetic.
struct rational {
    long long num = 0;
    long long den = 1;

    rational() = default;
    rational(long long n, long long d) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) throw std::invalid_argument("rational with zero denominator");
        if (den < 0) { den = -den; num = -num; }
        long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }

    double as_double() const { return static_cast<double>(num) / static_cast<double>(den); }

    rational operator+(const rational& o) const {
        __int128 n = static_cast<__int128>(num) * o.den + static_cast<__int128>(o.num) * den;
        __int128 d = static_cast<__int128>(den) * o.den;
        __int128 g = d; // reduce through gcd on the 128-bit values before narrowing
        {
            __int128 a = n < 0 ? -n : n, b = d;
            while (b != 0) { __int128 t = a % b; a = b; b = t; }
            g = a == 0 ? 1 : a;
        }
        n /= g; d /= g;
        if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX)
            throw std::overflow_error("rational overflow");
        return rational(static_cast<long long>(n), static_cast<long long>(d));
    }

    rational operator*(long long k) const {
        __int128 n = static_cast<__int128>(num) * k;
        if (n > INT64_MAX || n < INT64_MIN) throw std::overflow_error("rational overflow");
        return rational(static_cast<long long>(n), den);
    }

    bool operator==(const rational& o) const { return num == o.num && den == o.den; }
};

// Parses "3/8" exactly; plain numerics fall back to the double parse and the
// caller's floating tolerance.
inline bool parse_rational(const std::string& text, rational& out) {
    auto slash = text.find('/');
    if (slash == std::string::npos) return false;
    try {
        std::size_t p1 = 0, p2 = 0;
        long long n = std::stoll(text.substr(0, slash), &p1);
        long long d = std::stoll(text.substr(slash + 1), &p2);
        if (p1 != slash || p2 != text.size() - slash - 1) return false;
        out = rational(n, d);
        return true;
    } catch (const std::exception&) {
        return false;
    }
}

// Integer power by squaring; the Fourier grids need v^n for negative v, where
// pow() with a floating exponent would be both slower and fussier.
inline double ipow(double v, long long n) {
    double acc = 1.0, base = v;
    while (n > 0) {
        if (n & 1) acc *= base;
        base *= base;
        n >>= 1;
    }
    return acc;
}

// exp(w) - 1 for complex w, accurate near w = 0.
inline std::complex<double> cexpm1(std::complex<double> w) {
    if (std::abs(w) < 1e-4) {
        // w (1 + w/2 (1 + w/3 (1 + w/4))), error O(|w|^5)
        return w * (1.0 + w / 2.0 * (1.0 + w / 3.0 * (1.0 + w / 4.0)));
    }
    return std::exp(w) - 1.0;
}

}  // namespace subwalk
