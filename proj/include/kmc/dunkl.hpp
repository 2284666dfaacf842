#pragma once

// Rank-2 root planes and the scalar coefficients of the Dunkl commutator
// two-form restricted to them.
//
// A plane spanned by roots alpha, beta with alpha.beta = -m carries the root
// sequence gamma_k = xi_k alpha + xi_{k-1} beta, where xi solves the
// three-term recursion xi_{k+1} = m xi_k - xi_{k-1}, xi_0 = 0, xi_1 = 1
// (for m = 3 the even-index Fibonacci numbers).  Everything a plane sum needs
// about the evaluation point is the pair (u, v) = (alpha.x, beta.x).

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "kmc/common.hpp"
#include "kmc/kernels.hpp"

namespace kmc::dunkl {

using std::int64_t;

struct plane_coefficients {
    int64_t m = 0;
    int64_t k_max = 0;
    std::vector<int64_t> values; ///< xi_k for k in [-k_max, k_max]

    int64_t xi(int64_t k) const {
        if (k < -k_max || k > k_max)
            throw std::out_of_range("plane_coefficients: index " + std::to_string(k) +
                                    " outside window [-" + std::to_string(k_max) + "," +
                                    std::to_string(k_max) + "]");
        return values[static_cast<std::size_t>(k + k_max)];
    }
};

struct plane_point {
    double u = 0.0; ///< alpha . x
    double v = 0.0; ///< beta . x
    double wbar() const { return u + v; } ///< (alpha+beta) . x
};

struct coeff_result {
    double value = 0.0;
    double tail_bound = 0.0; ///< certified bound on the truncation remainder
};

/// Exact integer sequence xi_{-K}..xi_K; throws sequence_overflow before any
/// 64-bit wraparound (for m = 3 that limits K to 45).
inline plane_coefficients xi_sequence(int64_t m, int64_t K) {
    if (m < 0) throw std::invalid_argument("xi_sequence: m must be >= 0");
    if (K < 1) throw std::invalid_argument("xi_sequence: K must be >= 1");
    plane_coefficients pc;
    pc.m = m;
    pc.k_max = K;
    pc.values.assign(static_cast<std::size_t>(2 * K + 1), 0);
    auto set = [&](int64_t k, int64_t v) { pc.values[static_cast<std::size_t>(k + K)] = v; };
    int64_t prev = 0, cur = 1; // xi_0, xi_1
    set(0, 0);
    if (K >= 1) set(1, 1);
    for (int64_t k = 1; k < K; ++k) {
        int64_t t1 = 0, nxt = 0;
        if (__builtin_mul_overflow(m, cur, &t1) || __builtin_sub_overflow(t1, prev, &nxt))
            throw sequence_overflow("xi_sequence: xi_" + std::to_string(k + 1) +
                                    " exceeds 64-bit range (m=" + std::to_string(m) + ")");
        prev = cur;
        cur = nxt;
        set(k + 1, cur);
    }
    for (int64_t k = 1; k <= K; ++k) set(-k, -pc.xi(k));
    return pc;
}

/// gamma_k . gamma_k' = xi_{k-k'+1} - xi_{k-k'-1}; also equal to
/// 2(xi_k xi_k' + xi_{k-1} xi_{k'-1}) - m(xi_k xi_{k'-1} + xi_{k-1} xi_k').
inline int64_t gram_pairing(const plane_coefficients& pc, int64_t k, int64_t k2) {
    return pc.xi(k - k2 + 1) - pc.xi(k - k2 - 1);
}

/// xi_{k+1} via the alternating binomial sum in powers of m; exact, used as
/// an independent route in tests.
inline int64_t xi_binomial(int64_t m, int64_t k) {
    if (k < 0) throw std::invalid_argument("xi_binomial: k must be >= 0");
    __int128 acc = 0;
    for (int64_t l = 0; l <= k / 2; ++l) {
        // binom(k-l, l) * m^(k-2l), exact in __int128
        __int128 b = 1;
        for (int64_t i = 0; i < l; ++i) b = b * (k - l - i) / (i + 1);
        __int128 p = 1;
        for (int64_t i = 0; i < k - 2 * l; ++i) p *= m;
        acc += (l % 2 == 0 ? b * p : -b * p);
    }
    if (acc > INT64_MAX || acc < INT64_MIN)
        throw sequence_overflow("xi_binomial: value exceeds 64-bit range");
    return static_cast<int64_t>(acc);
}

namespace detail {

/// Denominators d_k = xi_{k-1} wbar + (xi_k - xi_{k-1}) u of the plane sums,
/// extended over [-K-pad, K+pad].
class plane_denominators {
public:
    plane_denominators(const plane_coefficients& pc, const plane_point& pt)
        : k_max_(pc.k_max - 1), d_(static_cast<std::size_t>(2 * k_max_ + 1)) {
        const double w = pt.wbar();
        for (int64_t k = -k_max_; k <= k_max_; ++k) {
            const double xk = static_cast<double>(pc.xi(k));
            const double xk1 = static_cast<double>(pc.xi(k - 1));
            d_[static_cast<std::size_t>(k + k_max_)] = xk1 * w + (xk - xk1) * pt.u;
        }
    }
    double operator()(int64_t k) const { return d_[static_cast<std::size_t>(k + k_max_)]; }
    int64_t k_max() const { return k_max_; }

private:
    int64_t k_max_;
    std::vector<double> d_;
};

inline void check_denominators(const plane_denominators& d, const plane_point& pt) {
    const double scale = std::abs(pt.u) + std::abs(pt.wbar());
    for (int64_t k = -d.k_max(); k <= d.k_max(); ++k)
        if (std::abs(d(k)) < 1e-9 * scale)
            throw pole_proximity("plane sum: denominator d_k vanishes at k=" + std::to_string(k),
                                 d(k), k, 0);
}

/// Windowed sum sum_{|k|<=K} 1/(d_k d_{k-ell}) with a geometric tail bound
/// (valid for m >= 3, where |d_k| grows like z_+^|k|).
inline coeff_result windowed_pair_sum(int64_t m, int64_t ell, const plane_denominators& d,
                                      int64_t K) {
    kahan_sum s;
    for (int64_t k = -K; k <= K; ++k) s.add(1.0 / (d(k) * d(k - ell)));
    const double zp = (static_cast<double>(m) + std::sqrt(static_cast<double>(m * m - 4))) / 2.0;
    const double q = 1.0 / (zp * zp);
    // the window must already be inside the growth regime on both ends
    if (!(std::abs(d(K)) > std::abs(d(K - 1))) || !(std::abs(d(-K)) > std::abs(d(-K + 1))))
        throw tail_not_certified("plane sum: window end not yet in the growth regime");
    const double edge = std::abs(1.0 / (d(K) * d(K - ell))) +
                        std::abs(1.0 / (d(-K) * d(-K - ell)));
    return {s.value(), edge * q / (1.0 - q)};
}

} // namespace detail

/// Coefficient c_ell of the group element pair (s_a s_b)^ell - (s_b s_a)^ell
/// in the plane's commutator two-form:
///   c_ell = -xi_ell sum_k 1/(d_k d_{k-ell}).
///
/// For m = 0 the reflections commute and for m = 1 the finite hexagon
/// collapses to the cyclic three-term identity, so those planes report the
/// exactly-cancelling combination; m = 2 uses the cotangent closed form; for
/// m >= 3 the k-sum converges geometrically and carries a certified tail.
inline coeff_result y_coefficient(int64_t m, int64_t ell, const plane_point& pt, int64_t K) {
    if (ell < 1) throw std::invalid_argument("y_coefficient: ell must be >= 1");
    if (K < 1) throw std::invalid_argument("y_coefficient: K must be >= 1");
    const double scale = std::abs(pt.u) + std::abs(pt.wbar());
    if (!(scale > 0.0)) throw std::invalid_argument("y_coefficient: degenerate point");

    if (m == 0) {
        // [s_alpha, s_beta] = 0: every coefficient vanishes identically
        if (std::abs(pt.u) < 1e-9 * scale || std::abs(pt.v) < 1e-9 * scale)
            throw pole_proximity("y_coefficient: point on a mirror of the A1+A1 plane", 0.0);
        return {0.0, 0.0};
    }
    if (m == 1) {
        // A2 plane: cyclic identity over gamma = -(alpha+beta)
        const double w = -pt.wbar();
        if (std::abs(pt.u) < 1e-9 * scale || std::abs(pt.v) < 1e-9 * scale ||
            std::abs(w) < 1e-9 * scale)
            throw pole_proximity("y_coefficient: point on a mirror of the A2 plane", w);
        return {1.0 / (pt.u * pt.v) + 1.0 / (pt.v * w) + 1.0 / (w * pt.u), 0.0};
    }
    if (m == 2) {
        // affine plane: the k-sum equals -(pi/(ell wbar^2)) [cot(pi(ell - r))
        // + cot(pi r)] with r = u/wbar, and cot(pi(ell - r)) = -cot(pi r) for
        // integral ell, so the closed form collapses to an exact zero
        const double w = pt.wbar();
        if (std::abs(w) < 1e-9 * scale)
            throw pole_proximity("y_coefficient: null direction degenerates (wbar = 0)", w);
        const double ratio = pt.u / w;
        const double frac = ratio - std::nearbyint(ratio);
        if (std::abs(frac) < 1e-9)
            throw tail_not_certified("y_coefficient: cotangent argument at a pole (m = 2)");
        return {0.0, 0.0};
    }

    const auto pc = xi_sequence(m, K + std::max<int64_t>(ell, 1) + 2);
    const detail::plane_denominators d(pc, pt);
    detail::check_denominators(d, pt);
    auto res = detail::windowed_pair_sum(m, ell, d, K);
    const double xl = static_cast<double>(pc.xi(ell));
    res.value *= -xl;
    res.tail_bound *= std::abs(xl);
    return res;
}

/// Trace-side coefficient c~_ell = (gamma_k . gamma_{k-ell}) sum_k
/// 1/(d_k d_{k-ell}); the Gram factor xi_{ell+1} - xi_{ell-1} is constant
/// along the plane.  ell = 0 gives the strictly positive diagonal sum.
inline coeff_result trace_coefficient(int64_t m, int64_t ell, const plane_point& pt, int64_t K) {
    if (ell < 0) throw std::invalid_argument("trace_coefficient: ell must be >= 0");
    if (K < 1) throw std::invalid_argument("trace_coefficient: K must be >= 1");
    const double scale = std::abs(pt.u) + std::abs(pt.wbar());
    if (!(scale > 0.0)) throw std::invalid_argument("trace_coefficient: degenerate point");

    if (m <= 1) {
        // finite plane: gamma_{k+period} = -gamma_k, so sum one period of k
        const int64_t period = m == 0 ? 2 : 3;
        const auto pc = xi_sequence(m, period + ell + 3);
        std::vector<double> dk; // dk[k-1] = gamma_k . x for k = 1..period
        for (int64_t k = 1; k <= period; ++k) {
            const double xk = static_cast<double>(pc.xi(k));
            const double xk1 = static_cast<double>(pc.xi(k - 1));
            dk.push_back(xk1 * pt.wbar() + (xk - xk1) * pt.u);
        }
        for (const double dv : dk)
            if (std::abs(dv) < 1e-9 * scale)
                throw pole_proximity("trace_coefficient: point on a plane mirror", dv);
        const int64_t g = pc.xi(ell + 1) - pc.xi(ell - 1);
        kahan_sum s;
        for (int64_t k = 1; k <= period; ++k) {
            const double a = dk[static_cast<std::size_t>(k - 1)];
            const int64_t j = ((k - ell - 1) % period + period) % period + 1; // in 1..period
            const int64_t wraps = (k - ell - j) / period;
            const double b = (wraps % 2 == 0 ? 1.0 : -1.0) * dk[static_cast<std::size_t>(j - 1)];
            s.add(1.0 / (a * b));
        }
        return {static_cast<double>(g) * s.value(), 0.0};
    }
    if (m == 2) {
        const double w = pt.wbar();
        if (std::abs(w) < 1e-9 * scale)
            throw pole_proximity("trace_coefficient: wbar = 0 on an affine plane", w);
        const double ratio = pt.u / w;
        const double frac = ratio - std::nearbyint(ratio);
        if (std::abs(frac) < 1e-9)
            throw tail_not_certified("trace_coefficient: closed form at a pole (m = 2)");
        if (ell == 0) {
            // 2 sum_k (k wbar + u)^-2 = 2 pi^2 / (wbar^2 sin^2(pi u/wbar))
            const double s = std::sin(pi * frac);
            return {2.0 * pi * pi / (w * w * s * s), 0.0};
        }
        // gram factor 2 times the identically-vanishing cotangent pair sum
        return {0.0, 0.0};
    }

    const auto pc = xi_sequence(m, K + std::max<int64_t>(ell, 1) + 2);
    const detail::plane_denominators d(pc, pt);
    detail::check_denominators(d, pt);
    auto res = detail::windowed_pair_sum(m, ell, d, K);
    const double g = static_cast<double>(pc.xi(ell + 1) - pc.xi(ell - 1));
    res.value *= g;
    res.tail_bound *= std::abs(g);
    return res;
}

/// xi_k at m = 3 equals the even-index Fibonacci numbers f_{2k}, with
/// f_{-n} = (-1)^{n+1} f_n on the left.
inline bool fibonacci_halving_check(int64_t K) {
    if (K < 1 || K > 45) throw std::invalid_argument("fibonacci_halving_check: K must be in [1,45]");
    const auto pc = xi_sequence(3, K);
    std::vector<int64_t> fib(static_cast<std::size_t>(2 * K + 1));
    fib[0] = 0;
    fib[1] = 1;
    for (std::size_t i = 2; i < fib.size(); ++i) {
        int64_t f = 0;
        if (__builtin_add_overflow(fib[i - 1], fib[i - 2], &f))
            throw sequence_overflow("fibonacci_halving_check: Fibonacci overflow");
        fib[i] = f;
    }
    for (int64_t k = -K; k <= K; ++k) {
        const int64_t n = 2 * k;
        const int64_t fn = n >= 0 ? fib[static_cast<std::size_t>(n)]
                                  : ((-n) % 2 == 1 ? fib[static_cast<std::size_t>(-n)]
                                                   : -fib[static_cast<std::size_t>(-n)]);
        if (pc.xi(k) != fn) return false;
    }
    return true;
}

} // namespace kmc::dunkl
