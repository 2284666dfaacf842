#pragma once

// Special-function kernels behind the truncated potential sum:
//
//   S(x,t)   = sum_n [(x-n)^2 + t]^-2 in closed form, valid for t of either
//              sign (t = a^2; a = ib turns the hyperbolic functions into
//              trigonometric ones) with a series branch around t = 0,
//   S*(x,y)  = S(x,y^2) - pi/(2 y^3), its mean-free part,
//   C(z)     = -(12/(pi y)) log|eta(z)| - Re E2(z), the exponentially small
//              combination controlling the final tail refinement,
//   c, c1    = the constants in the average of the root-count function N(r),
//   eps(n)   = (6/pi^2) sigma_{-1}(n).

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "kmc/common.hpp"
#include "kmc/geometry.hpp"

namespace kmc {

inline constexpr double pi = std::numbers::pi;

/// Denominator threshold below which eval_S refuses to produce a value.
inline constexpr double pole_epsilon = 1e-9;

namespace detail {

/// Polynomials p_m(c) with sum_n (x+n)^{-m} = pi^m p_m(cot(pi x)), generated
/// by p_1 = c, p_{m+1} = (1+c^2) p_m' / m.  Used by the small-|t| branch.
inline const std::vector<std::vector<double>>& cot_sum_polys() {
    static const std::vector<std::vector<double>> polys = [] {
        constexpr int max_m = 70;
        std::vector<std::vector<double>> ps;
        ps.push_back({});          // unused index 0
        ps.push_back({0.0, 1.0});  // p_1 = c
        for (int m = 1; m + 1 <= max_m; ++m) {
            const auto& p = ps[m];
            std::vector<double> dp(p.size() > 1 ? p.size() - 1 : 1, 0.0);
            for (std::size_t k = 1; k < p.size(); ++k)
                dp[k - 1] = p[k] * static_cast<double>(k);
            std::vector<double> np(dp.size() + 2, 0.0);
            for (std::size_t k = 0; k < dp.size(); ++k) {
                np[k] += dp[k] / m;
                np[k + 2] += dp[k] / m;
            }
            ps.push_back(std::move(np));
        }
        return ps;
    }();
    return polys;
}

inline double horner(const std::vector<double>& p, double c) {
    double v = 0.0;
    for (std::size_t k = p.size(); k-- > 0;) v = v * c + p[k];
    return v;
}

/// S(x,t) as a Taylor series in t around 0; requires |t| pi^2/sin^2(pi x) < 1.
inline double eval_s_series(double x, double t) {
    const auto& ps = cot_sum_polys();
    const double c = 1.0 / std::tan(pi * x);
    double term_pi = pi * pi * pi * pi; // pi^{4+2j}
    double tj = 1.0;                    // (-t)^j
    double acc = 0.0;
    for (int j = 0;; ++j) {
        const std::size_t m = static_cast<std::size_t>(4 + 2 * j);
        if (m >= ps.size())
            throw std::runtime_error("eval_S: series branch failed to converge");
        const double term = (j + 1) * tj * term_pi * horner(ps[m], c);
        acc += term;
        if (std::abs(term) < 1e-18 * std::abs(acc) && j > 2) break;
        tj *= -t;
        term_pi *= pi * pi;
    }
    return acc;
}

} // namespace detail

/// Lattice kernel S(x,t) = sum_{n in Z} [(x-n)^2 + t]^-2.
///
/// For t = a^2 > 0 the closed form is
///   (pi/2a^3) sinh(2 pi a)/(cosh 2 pi a - cos 2 pi x)
///   + (pi^2/a^2) (cosh 2 pi a cos 2 pi x - 1)/(cosh 2 pi a - cos 2 pi x)^2,
/// evaluated through u = exp(-2 pi a) so it never overflows; for t < 0 the
/// continuation a = ib replaces the hyperbolic functions by trigonometric
/// ones.  Near t = 0 both forms cancel catastrophically and a Taylor series
/// in t takes over.  Throws pole_proximity within pole_epsilon of a zero
/// denominator (for t <= 0 the sum genuinely diverges there).
inline double eval_S(double x, double t) {
    // reduce x mod 1 to [-1/2, 1/2]
    x -= std::nearbyint(x);
    const double s = std::sin(pi * x);
    if (std::abs(t) < 0.25 * s * s / (pi * pi))
        return detail::eval_s_series(x, t);

    const double c = std::cos(2.0 * pi * x);
    if (t > 0.0) {
        const double a = std::sqrt(t);
        const double u = std::exp(-2.0 * pi * a);
        const double den = 1.0 + u * u - 2.0 * u * c; // = 2u (cosh 2pi a - cos 2pi x)
        if (den < pole_epsilon * 2.0 * u)
            throw pole_proximity("eval_S: denominator below pole epsilon", den / (2.0 * u));
        const double t1 = (pi / (2.0 * a * a * a)) * (1.0 - u * u) / den;
        const double t2 = (pi * pi / t) * 2.0 * u * ((1.0 + u * u) * c - 2.0 * u) / (den * den);
        return t1 + t2;
    }
    const double b = std::sqrt(-t);
    const double cb = std::cos(2.0 * pi * b);
    const double den = cb - c;
    if (std::abs(den) < pole_epsilon)
        throw pole_proximity("eval_S: pole of the continued kernel", den);
    const double t1 = -(pi / (2.0 * b * b * b)) * std::sin(2.0 * pi * b) / den;
    const double t2 = (pi * pi / t) * (cb * c - 1.0) / (den * den);
    return t1 + t2;
}

/// S*(x,y) = S(x,y^2) - pi/(2y^3); zero mean in x.
inline double eval_S_star(double x, double y) {
    if (!(y > 0.0)) throw std::invalid_argument("eval_S_star: y must be > 0");
    return eval_S(x, y * y) - pi / (2.0 * y * y * y);
}

namespace detail {

inline std::size_t q_series_length(double y) {
    // |q|^n below 1e-18
    return static_cast<std::size_t>(18.0 * std::log(10.0) / (2.0 * pi * y)) + 2;
}

} // namespace detail

/// C(z) = -(12/(pi y)) log|eta(z)| - Re E2(z), via the q-series of the eta
/// product and the Lambert series of E2, truncated once |q|^n < 1e-18.
inline double eval_C(const geom::half_plane_point& z) {
    geom::require_upper(z, "eval_C");
    const std::size_t nmax = detail::q_series_length(z.y);
    const std::complex<double> q = std::exp(std::complex<double>(0.0, 2.0 * pi) * z.z());
    std::complex<double> qn = 1.0;
    double log_eta = -pi * z.y / 12.0;
    double e2_re = 1.0;
    for (std::size_t n = 1; n <= nmax; ++n) {
        qn *= q;
        log_eta += 0.5 * std::log(std::norm(1.0 - qn));
        e2_re -= 24.0 * static_cast<double>(n) * (qn / (1.0 - qn)).real();
    }
    return -12.0 / (pi * z.y) * log_eta - e2_re;
}

/// Same quantity from the divisor-sum series
/// (12/(pi y)) sum_n (sigma_{-1}(n) + 2 pi sigma_1(n) y) e^{-2 pi n y} cos(2 pi n x).
inline double eval_C_sigma_series(const geom::half_plane_point& z) {
    geom::require_upper(z, "eval_C_sigma_series");
    const std::size_t nmax = detail::q_series_length(z.y);
    std::vector<double> sig1(nmax + 1, 0.0), sigm1(nmax + 1, 0.0);
    for (std::size_t d = 1; d <= nmax; ++d)
        for (std::size_t k = d; k <= nmax; k += d) {
            sig1[k] += static_cast<double>(d);
            sigm1[k] += 1.0 / static_cast<double>(d);
        }
    double acc = 0.0;
    for (std::size_t n = nmax; n >= 1; --n) {
        const double nn = static_cast<double>(n);
        acc += (sigm1[n] + 2.0 * pi * sig1[n] * z.y) * std::exp(-2.0 * pi * nn * z.y) *
               std::cos(2.0 * pi * nn * z.x);
    }
    return 12.0 / (pi * z.y) * acc;
}

namespace detail {

/// zeta'(2) from -sum log(n)/n^2 with an Euler-Maclaurin tail.
inline double zeta_prime_2_impl() {
    constexpr std::int64_t cutoff = 200000;
    kahan_sum s;
    for (std::int64_t n = cutoff - 1; n >= 2; --n) {
        const double nn = static_cast<double>(n);
        s.add(std::log(nn) / (nn * nn));
    }
    const double N = static_cast<double>(cutoff);
    const double logN = std::log(N);
    const double tail = (logN + 1.0) / N            // integral_N^inf
                        + logN / (2.0 * N * N)      // f(N)/2
                        - (1.0 - 2.0 * logN) / (12.0 * N * N * N);
    return -(s.value() + tail);
}

} // namespace detail

/// zeta'(2) = -0.93754825431584...
inline double zeta_prime_2() {
    static const double v = detail::zeta_prime_2_impl();
    return v;
}

struct average_constants {
    double c;  ///< 6/pi^2 = 0.6079271...
    double c1; ///< c (2 gamma - log(2)/2 - 2 zeta'(2)/zeta(2)) = 1.184108...
};

/// Constants in the mean behaviour N(r) ~ c log r + c1 of the root counts.
inline average_constants correction_constants() {
    static const average_constants k = [] {
        const double c = 6.0 / (pi * pi);
        const double zeta2 = pi * pi / 6.0;
        const double c1 =
            c * (2.0 * std::numbers::egamma - 0.5 * std::log(2.0) - 2.0 * zeta_prime_2() / zeta2);
        return average_constants{c, c1};
    }();
    return k;
}

/// eps(n) = (6/pi^2) sigma_{-1}(n).
inline double ramanujan_epsilon(std::uint64_t n) {
    if (n < 1) throw std::invalid_argument("ramanujan_epsilon: n must be >= 1");
    double sig = 0.0;
    for (std::uint64_t d = 1; d * d <= n; ++d) {
        if (n % d != 0) continue;
        sig += 1.0 / static_cast<double>(d);
        const std::uint64_t e = n / d;
        if (e != d) sig += 1.0 / static_cast<double>(e);
    }
    return 6.0 / (pi * pi) * sig;
}

} // namespace kmc
