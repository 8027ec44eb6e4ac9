#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "subwalk/common.hpp"
#include "subwalk/special.hpp"

namespace subwalk {

struct spd_matrix {
    int d = 1;
    std::vector<double> m;    // row-major
    std::vector<double> inv;  // row-major
    double det = 0.0;
};

inline spd_matrix make_spd(int d, std::vector<double> Q) {
    if (d < 1 || d > 3) throw std::invalid_argument("dimension must be 1, 2, or 3");
    if (Q.size() != static_cast<std::size_t>(d) * d)
        throw std::invalid_argument("Q has wrong shape");
    spd_matrix s;
    s.d = d;
    s.m = std::move(Q);
    const auto& M = s.m;
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b)
            if (std::abs(M[static_cast<std::size_t>(a) * d + b] -
                         M[static_cast<std::size_t>(b) * d + a]) > 1e-12)
                throw std::invalid_argument("Q not symmetric");
    if (d == 1) {
        s.det = M[0];
        if (!(s.det > 0.0)) throw std::invalid_argument("Q not positive definite");
        s.inv = {1.0 / M[0]};
    } else if (d == 2) {
        s.det = M[0] * M[3] - M[1] * M[2];
        if (!(M[0] > 0.0 && s.det > 0.0)) throw std::invalid_argument("Q not positive definite");
        s.inv = {M[3] / s.det, -M[1] / s.det, -M[2] / s.det, M[0] / s.det};
    } else {
        double m00 = M[4] * M[8] - M[5] * M[7];
        double m01 = M[3] * M[8] - M[5] * M[6];
        double m02 = M[3] * M[7] - M[4] * M[6];
        s.det = M[0] * m00 - M[1] * m01 + M[2] * m02;
        double det2 = M[0] * M[4] - M[1] * M[3];
        if (!(M[0] > 0.0 && det2 > 0.0 && s.det > 0.0))
            throw std::invalid_argument("Q not positive definite");
        s.inv = {m00 / s.det,
                 -(M[1] * M[8] - M[2] * M[7]) / s.det,
                 (M[1] * M[5] - M[2] * M[4]) / s.det,
                 -m01 / s.det,
                 (M[0] * M[8] - M[2] * M[6]) / s.det,
                 -(M[0] * M[5] - M[2] * M[3]) / s.det,
                 m02 / s.det,
                 -(M[0] * M[7] - M[1] * M[6]) / s.det,
                 (M[0] * M[4] - M[1] * M[3]) / s.det};
    }
    return s;
}

// Tail constant of the unit-scale symmetric stable density on R:
// the density of exp(-t |xi|^alpha) satisfies f(x,t) ~ c_alpha t x^(-1-alpha).
inline double const_polya(double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("alpha must lie in (0,2)");
    const double pi = std::acos(-1.0);
    return alpha * std::pow(2.0, alpha - 1.0) * std::pow(pi, -1.5) *
           std::tgamma((alpha + 1.0) / 2.0) * std::tgamma(alpha / 2.0) *
           std::sin(pi * alpha / 2.0);
}

// Tail constant of the limit density with characteristic exponent
// (<Q xi, xi>/2)^(alpha/2): f(x,t) ~ C t |x|^(-d-alpha) radially for the
// whitened norm; in the lattice statements it appears as
// p(x,n) ~ r C n psi(|x|^(-2)) |x|^(-d).
inline double const_C(int d, double alpha, const std::vector<double>& Q) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("alpha must lie in (0,2)");
    spd_matrix q = make_spd(d, Q);
    const double pi = std::acos(-1.0);
    return alpha * std::pow(2.0, alpha / 2.0 - 1.0) * std::pow(pi, -0.5 * d - 1.0) /
           std::sqrt(q.det) * std::tgamma(alpha / 2.0) * std::tgamma((d + alpha) / 2.0) *
           std::sin(pi * alpha / 2.0);
}

// Onsite constant: the value of the limit density at the origin at time 1,
// so that p(0,n) ~ D s(n)^(-d) with s(n) the spatial scale psi^(-1)(1/n)^(-1/2).
inline double const_D(int d, double alpha, const std::vector<double>& Q) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("alpha must lie in (0,2)");
    spd_matrix q = make_spd(d, Q);
    const double pi = std::acos(-1.0);
    return std::pow(2.0 * pi, -0.5 * d) * std::tgamma(1.0 + d / alpha) /
           std::tgamma(1.0 + 0.5 * d) / std::sqrt(q.det);
}

// Limit law of the subordinated walk: characteristic function
// exp(-t (<Q xi, xi>/2)^(alpha/2)).
struct stable_limit_law {
    int d = 1;
    double alpha = 1.0;
    spd_matrix Q;
};

inline stable_limit_law make_stable_limit(int d, double alpha, std::vector<double> Q) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("alpha must lie in (0,2)");
    stable_limit_law lim;
    lim.d = d;
    lim.alpha = alpha;
    lim.Q = make_spd(d, std::move(Q));
    return lim;
}

namespace detail {

// Density at the origin in closed form:
// (2 pi)^(-d) |Q|^(-1/2) * surface(d-1) * Gamma(d/alpha) / (alpha c^(d/alpha))
inline double stable_density_origin(const stable_limit_law& lim, double t) {
    const double pi = std::acos(-1.0);
    double c = t * std::pow(2.0, -lim.alpha / 2.0);
    double surface = 2.0 * std::pow(pi, 0.5 * lim.d) / std::tgamma(0.5 * lim.d);
    return std::pow(2.0 * pi, -lim.d) / std::sqrt(lim.Q.det) * surface *
           std::tgamma(lim.d / lim.alpha) / lim.alpha * std::pow(c, -lim.d / lim.alpha);
}

// One-dimensional integral along the rotated ray xi = u e^(i phi), which
// turns the oscillatory Fourier integrand into an exponentially damped one.
// The integrand callback receives u; panels are geometric around u_scale
// (they resolve the u^alpha kink at 0) and are split so that no panel spans
// more than ~5 radians of the residual phase ax * u * cos(phi).
template <class F>
std::complex<double> contour_integral(double u_scale, double phase_rate, F&& integrand) {
    kahan_sum re, im;
    const gl_rule& gl = gauss_legendre(16);
    auto add_panel = [&](double lo, double hi) {
        std::complex<double> acc{0.0, 0.0};
        double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        for (std::size_t i = 0; i < gl.x.size(); ++i) {
            std::complex<double> v = integrand(mid + half * gl.x[i]);
            acc += gl.w[i] * v;
        }
        acc *= half;
        re.add(acc.real());
        im.add(acc.imag());
        return std::abs(acc);
    };
    auto add_split = [&](double lo, double hi) {
        int pieces = 1 + static_cast<int>(phase_rate * (hi - lo) / 5.0);
        pieces = std::min(pieces, 512);
        double w = (hi - lo) / pieces;
        double total = 0.0;
        for (int i = 0; i < pieces; ++i) total += add_panel(lo + i * w, lo + (i + 1) * w);
        return total;
    };
    for (int j = 60; j >= 1; --j)
        add_panel(u_scale * std::ldexp(1.0, -j), u_scale * std::ldexp(1.0, -j + 1));
    int quiet = 0;
    for (int j = 0; j < 300; ++j) {
        double contrib = add_split(u_scale * std::ldexp(1.0, j), u_scale * std::ldexp(1.0, j + 1));
        double mag = std::hypot(re.value(), im.value());
        if (contrib < 1e-16 * mag + 1e-320) {
            if (++quiet >= 2) return {re.value(), im.value()};
        } else {
            quiet = 0;
        }
    }
    throw numeric_error("contour quadrature failed to converge");
}

inline void d1_contour_setup(double alpha, double c, double ax, double& phi, double& u_scale,
                             double& phase_rate) {
    const double pi = std::acos(-1.0);
    phi = 0.95 * std::min(pi / (2.0 * alpha), pi / 2.0);
    double osc_scale = ax > 0.0 ? 1.0 / (ax * std::sin(phi)) : 1e300;
    double damp_scale = std::pow(c * std::cos(alpha * phi), -1.0 / alpha);
    u_scale = std::min(osc_scale, damp_scale);
    phase_rate = ax * std::cos(phi);
}

inline double stable_density_1d(double alpha, double c, double ax) {
    // f(x) = (1/pi) Re e^(i phi) Int_0^inf expm1(-c u^alpha e^(i alpha phi))
    //        e^(i x u e^(i phi)) du;  the dropped pure-phase part integrates
    //        to i/x, whose real contribution vanishes.
    const double pi = std::acos(-1.0);
    double phi, u_scale, phase_rate;
    d1_contour_setup(alpha, c, ax, phi, u_scale, phase_rate);
    std::complex<double> rot{std::cos(phi), std::sin(phi)};
    std::complex<double> stable_arg = -c * std::complex<double>(std::cos(alpha * phi),
                                                                std::sin(alpha * phi));
    std::complex<double> osc_arg = std::complex<double>(0.0, ax) * rot;
    auto integrand = [&](double u) {
        return cexpm1(stable_arg * std::pow(u, alpha)) * std::exp(osc_arg * u);
    };
    std::complex<double> I = contour_integral(u_scale, phase_rate, integrand);
    return (rot * I).real() / pi;
}

inline double stable_cdf_1d_positive(double alpha, double c, double x) {
    // F(x) - 1/2 = (1/pi) Im Int_0^inf (e^(i x u e^(i phi)) - 1)
    //              e^(-c u^alpha e^(i alpha phi)) du / u
    const double pi = std::acos(-1.0);
    double phi, u_scale, phase_rate;
    d1_contour_setup(alpha, c, x, phi, u_scale, phase_rate);
    std::complex<double> rot{std::cos(phi), std::sin(phi)};
    std::complex<double> stable_arg = -c * std::complex<double>(std::cos(alpha * phi),
                                                                std::sin(alpha * phi));
    std::complex<double> osc_arg = std::complex<double>(0.0, x) * rot;
    auto integrand = [&](double u) {
        return cexpm1(osc_arg * u) * std::exp(stable_arg * std::pow(u, alpha)) / u;
    };
    std::complex<double> I = contour_integral(u_scale, phase_rate, integrand);
    return I.imag() / pi;
}

// Radial integral for d in {2,3} on the real axis.  Geometric panels resolve
// the s^alpha kink at the origin; above the characteristic scale each octave
// is split so no panel spans more than half an oscillation of the
// Bessel/sine factor (wavelength 2 pi / rho).
template <class F>
double radial_integral(double alpha, double c, double rho, F&& kernel_factor) {
    kahan_sum acc;
    const gl_rule& gl = gauss_legendre(16);
    double s_scale = std::pow(1.0 / c, 1.0 / alpha);
    if (rho > 0.0) s_scale = std::min(s_scale, std::acos(-1.0) / rho);
    double s_max = std::pow(45.0 / c, 1.0 / alpha);
    double max_width = rho > 0.0 ? std::acos(-1.0) / rho * 0.5 : 1e300;
    auto add_panel = [&](double lo, double hi) {
        double sum = 0.0;
        double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        for (std::size_t i = 0; i < gl.x.size(); ++i) {
            double s = mid + half * gl.x[i];
            sum += gl.w[i] * kernel_factor(s) * std::exp(-c * std::pow(s, alpha));
        }
        acc.add(sum * half);
        return std::abs(sum * half);
    };
    for (int j = 60; j >= 1; --j)
        add_panel(s_scale * std::ldexp(1.0, -j), s_scale * std::ldexp(1.0, -j + 1));
    long long panels = 0;
    int quiet = 0;
    for (int j = 0; j < 300; ++j) {
        double lo = s_scale * std::ldexp(1.0, j);
        double hi = s_scale * std::ldexp(1.0, j + 1);
        long long pieces = 1 + static_cast<long long>((hi - lo) / max_width);
        double w = (hi - lo) / static_cast<double>(pieces);
        double contrib = 0.0;
        for (long long i = 0; i < pieces; ++i)
            contrib += add_panel(lo + static_cast<double>(i) * w,
                                 lo + static_cast<double>(i + 1) * w);
        if ((panels += pieces) > 2000000)
            throw numeric_error("radial quadrature failed to converge");
        if (lo > s_max && contrib < 1e-16 * std::abs(acc.value()) + 1e-320) {
            if (++quiet >= 2) return acc.value();
        } else {
            quiet = 0;
        }
    }
    throw numeric_error("radial quadrature failed to converge");
}

}  // namespace detail

// Density of the limit law at x after time t.
inline double stable_density(const stable_limit_law& lim, const std::vector<double>& x,
                             double t) {
    if (!(t > 0.0)) throw std::invalid_argument("stable_density: t must be positive");
    if (x.size() != static_cast<std::size_t>(lim.d))
        throw std::invalid_argument("stable_density: x has wrong dimension");
    const double pi = std::acos(-1.0);
    double rho2 = 0.0;
    for (int a = 0; a < lim.d; ++a)
        for (int b = 0; b < lim.d; ++b)
            rho2 += lim.Q.inv[static_cast<std::size_t>(a) * lim.d + b] * x[a] * x[b];
    double rho = std::sqrt(std::max(0.0, rho2));  // |Q^(-1/2) x|
    if (rho == 0.0) return detail::stable_density_origin(lim, t);
    double c = t * std::pow(2.0, -lim.alpha / 2.0);
    if (lim.d == 1) {
        return detail::stable_density_1d(lim.alpha, c, rho) / std::sqrt(lim.Q.det);
    }
    if (lim.d == 2) {
        double I = detail::radial_integral(lim.alpha, c, rho,
                                           [&](double s) { return s * std::cyl_bessel_j(0.0, s * rho); });
        return I / (2.0 * pi * std::sqrt(lim.Q.det));
    }
    double I = detail::radial_integral(lim.alpha, c, rho,
                                       [&](double s) { return s * std::sin(s * rho); });
    return I / (2.0 * pi * pi * rho * std::sqrt(lim.Q.det));
}

// One-dimensional distribution function of the limit law.
inline double stable_cdf(const stable_limit_law& lim, double x, double t) {
    if (lim.d != 1) throw std::invalid_argument("stable_cdf is one-dimensional");
    if (!(t > 0.0)) throw std::invalid_argument("stable_cdf: t must be positive");
    double xw = x / std::sqrt(lim.Q.m[0]);  // whiten: law of Q^(-1/2) X has Q = 1
    double c = t * std::pow(2.0, -lim.alpha / 2.0);
    if (xw == 0.0) return 0.5;
    double ax = std::abs(xw);
    double half;
    if (lim.alpha == 1.0) {
        half = std::atan(ax / c) / std::acos(-1.0);  // Cauchy with scale c
    } else {
        half = detail::stable_cdf_1d_positive(lim.alpha, c, ax);
    }
    return xw > 0.0 ? 0.5 + half : 0.5 - half;
}

}  // namespace subwalk
