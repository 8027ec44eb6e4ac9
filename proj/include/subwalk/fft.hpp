#pragma once

#include <complex>
#include <cstring>
#include <vector>

#include <fftw3.h>

#include "subwalk/common.hpp"

namespace subwalk {

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Thin RAII wrappers over FFTW.  Everything here is single-threaded and uses
// FFTW_ESTIMATE so plans are cheap and runs are deterministic.

inline std::vector<std::complex<double>> rfft(const std::vector<double>& in) {
    std::size_t L = in.size();
    std::vector<std::complex<double>> out(L / 2 + 1);
    std::vector<double> buf(in);  // FFTW may clobber input
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(L), buf.data(),
                                          reinterpret_cast<fftw_complex*>(out.data()),
                                          FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    return out;
}

// Inverse of rfft including the 1/L normalization.
inline std::vector<double> irfft(const std::vector<std::complex<double>>& spec, std::size_t L) {
    std::vector<double> out(L);
    std::vector<std::complex<double>> buf(spec);  // c2r destroys its input
    fftw_plan plan = fftw_plan_dft_c2r_1d(static_cast<int>(L),
                                          reinterpret_cast<fftw_complex*>(buf.data()),
                                          out.data(), FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    double inv = 1.0 / static_cast<double>(L);
    for (double& v : out) v *= inv;
    return out;
}

struct clamp_stats {
    long long clamped = 0;
    double worst_negative = 0.0;
};

// Clamp small negative convolution round-off to zero; anything below -1e-12
// indicates a real numerical problem.
inline void clamp_nonnegative(std::vector<double>& v, clamp_stats& stats) {
    for (double& x : v) {
        if (x < 0.0) {
            if (x < stats.worst_negative) stats.worst_negative = x;
            if (x < -1e-12)
                throw numeric_error("convolution produced a negative value below -1e-12: " +
                                    std::to_string(x));
            x = 0.0;
            ++stats.clamped;
        }
    }
}

// n-fold self-convolution of a nonnegative sequence, truncated to indices
// 0..K.  Because the input has no mass at index 0 (subordinator steps are
// >= 1), truncating every intermediate factor at K is exact for all retained
// indices.  Binary exponentiation: O(log n) full-length FFT convolutions.
inline std::vector<double> self_convolve_power(const std::vector<double>& base, long long n,
                                               std::size_t K, clamp_stats& stats) {
    if (n < 1) throw std::invalid_argument("self_convolve_power: n must be >= 1");
    std::size_t L = next_pow2(2 * K + 1);

    auto truncate = [&](std::vector<double>& v) {
        v.resize(K + 1);
        clamp_nonnegative(v, stats);
        v.resize(L, 0.0);
    };

    std::vector<double> sq(base);
    sq.resize(L, 0.0);
    std::vector<double> acc;
    bool have_acc = false;

    auto convolve = [&](const std::vector<double>& a, const std::vector<double>& b) {
        auto fa = rfft(a);
        auto fb = rfft(b);
        for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
        return irfft(fa, L);
    };
    auto square = [&](const std::vector<double>& a) {
        auto fa = rfft(a);
        for (auto& z : fa) z *= z;
        return irfft(fa, L);
    };

    long long m = n;
    while (true) {
        if (m & 1) {
            if (!have_acc) {
                acc = sq;
                have_acc = true;
            } else {
                acc = convolve(acc, sq);
                truncate(acc);
            }
        }
        m >>= 1;
        if (m == 0) break;
        sq = square(sq);
        truncate(sq);
    }
    acc.resize(K + 1);
    clamp_nonnegative(acc, stats);
    return acc;
}

// Complex DFT used by the Taylor-coefficient extraction.
inline void cfft_inplace(std::vector<std::complex<double>>& data, int sign) {
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(data.size()),
                                      reinterpret_cast<fftw_complex*>(data.data()),
                                      reinterpret_cast<fftw_complex*>(data.data()),
                                      sign, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
}

}  // namespace subwalk
