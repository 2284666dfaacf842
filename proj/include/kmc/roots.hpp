#pragma once

// Real roots of the rank-3 hyperbolic Kac-Moody algebra AE3 and the
// translations between their labelings:
//
//   Cartan coefficients (ell,m,n) of alpha = ell*a0 + m*a1 + n*a2, constrained
//   by (ell-m)^2 + n(n-m) = 1; reflection triples (p,q,r) with p^2 + q r = 1
//   labeling the mirror z -> (p zbar + q)/(r zbar - p); and binary quadratic
//   forms (A,B,C) of discriminant 4.

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "kmc/common.hpp"

namespace kmc::roots {

using std::int64_t;

struct cartan_root {
    int64_t ell = 0, m = 0, n = 0;
    friend bool operator==(const cartan_root&, const cartan_root&) = default;
    friend auto operator<=>(const cartan_root&, const cartan_root&) = default;
};

struct reflection_triple {
    int64_t p = 0, q = 0, r = 0;
    friend bool operator==(const reflection_triple&, const reflection_triple&) = default;
};

struct quad_form {
    int64_t a = 0, b = 0, c = 0;
    int64_t d = 0; ///< discriminant b^2 - 4ac
    friend bool operator==(const quad_form&, const quad_form&) = default;
};

struct dynkin_label {
    int64_t pbar = 0, qbar = 0, rbar = 0;
};

enum class weyl_orbit { plus, minus };

/// (ell-m)^2 + n(n-m) = 1, exact.
inline bool is_real_root(const cartan_root& a) {
    const int64_t d = a.ell - a.m;
    return d * d + a.n * (a.n - a.m) == 1;
}

inline bool is_valid(const reflection_triple& t) {
    return t.p * t.p + t.q * t.r == 1;
}

/// Gram product of two roots in the (a0,a1,a2) basis (the Cartan matrix).
inline int64_t gram_dot(const cartan_root& a, const cartan_root& b) {
    // G = [[2,-2,0],[-2,2,-1],[0,-1,2]]
    return 2 * a.ell * b.ell + 2 * a.m * b.m + 2 * a.n * b.n
         - 2 * (a.ell * b.m + a.m * b.ell) - (a.m * b.n + a.n * b.m);
}

/// Root and its five S3 (horizontal Weyl group) images, in orbit order.
inline std::array<cartan_root, 6> s3_images(const cartan_root& a) {
    const int64_t l = a.ell, m = a.m, n = a.n;
    return {{{l, m, n},
             {l, m, m - n},
             {l, 2 * l - n, m - n},
             {l, 2 * l - n, 2 * l - m},
             {l, 2 * l - m + n, 2 * l - m},
             {l, 2 * l - m + n, n}}};
}

/// All real roots at level ell, sorted lexicographically in (m,n).
///
/// The (m,n) range follows from rewriting the root condition as
/// 4(ell-m)^2 + (2n-m)^2 = m^2 + 4, which forces (2ell-3m)(2ell-m) <= 4.
inline std::vector<cartan_root> enumerate_level(int64_t ell) {
    if (ell < 0) throw std::invalid_argument("enumerate_level: ell must be >= 0");
    std::vector<cartan_root> out;
    const int64_t lo = (2 * ell) / 3 - 2;
    const int64_t hi = 2 * ell + 2;
    for (int64_t m = lo; m <= hi; ++m) {
        if ((2 * ell - 3 * m) * (2 * ell - m) > 4) continue;
        const int64_t disc = m * m + 4 - 4 * (ell - m) * (ell - m);
        if (disc < 0) continue;
        const auto s = static_cast<int64_t>(std::llround(std::sqrt(static_cast<double>(disc))));
        int64_t s_exact = -1;
        for (int64_t c = std::max<int64_t>(0, s - 1); c <= s + 1; ++c)
            if (c * c == disc) s_exact = c;
        if (s_exact < 0) continue;
        for (const int64_t sg : {s_exact, -s_exact}) {
            if ((m + sg) % 2 != 0) continue;
            const cartan_root root{ell, m, (m + sg) / 2};
            assert(is_real_root(root));
            out.push_back(root);
            if (sg == 0) break;
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// Level-ell roots grouped into S3 orbits (one A2 representation each).
/// Orbits are sorted by their lexicographically smallest member.
inline std::vector<std::vector<cartan_root>> level_orbits(int64_t ell) {
    const auto roots = enumerate_level(ell);
    std::vector<std::vector<cartan_root>> orbits;
    std::vector<cartan_root> seen;
    for (const auto& root : roots) {
        if (std::binary_search(seen.begin(), seen.end(), root)) continue;
        auto img = s3_images(root);
        std::vector<cartan_root> orbit(img.begin(), img.end());
        std::sort(orbit.begin(), orbit.end());
        orbit.erase(std::unique(orbit.begin(), orbit.end()), orbit.end());
#ifndef NDEBUG
        for (const auto& o : orbit)
            assert(std::binary_search(roots.begin(), roots.end(), o));
#endif
        seen.insert(seen.end(), orbit.begin(), orbit.end());
        std::sort(seen.begin(), seen.end());
        orbits.push_back(std::move(orbit));
    }
    return orbits;
}

/// Number of A2 representations occurring at level ell.
inline std::size_t representation_count(int64_t ell) {
    return level_orbits(ell).size();
}

/// Translate Cartan labels to the canonical reflection triple.
///
/// The raw translation is (p,q,r) = (n-ell, m-n, m-2ell); the triple and its
/// negation label the same mirror, so the representative is fixed by
/// r > 0, or r = 0 and p > 0, or p = r = 0 and q > 0.
inline reflection_triple cartan_to_reflection(const cartan_root& a) {
    if (!is_real_root(a)) throw std::invalid_argument("cartan_to_reflection: not a real root");
    reflection_triple t{a.n - a.ell, a.m - a.n, a.m - 2 * a.ell};
    assert(is_valid(t));
    const bool canonical = t.r > 0 || (t.r == 0 && t.p > 0) ||
                           (t.r == 0 && t.p == 0 && t.q > 0);
    if (!canonical) t = {-t.p, -t.q, -t.r};
    return t;
}

/// Inverse of the raw (un-normalized) translation.
inline cartan_root reflection_to_cartan(const reflection_triple& t) {
    if (!is_valid(t)) throw std::invalid_argument("reflection_to_cartan: p^2 + qr != 1");
    return {t.p + t.q - t.r, 2 * t.p + 2 * t.q - t.r, 2 * t.p + t.q - t.r};
}

/// (A,B,C) = (r, -2p, -q), discriminant 4.
inline quad_form reflection_to_quadform(const reflection_triple& t) {
    if (!is_valid(t)) throw std::invalid_argument("reflection_to_quadform: p^2 + qr != 1");
    quad_form f{t.r, -2 * t.p, -t.q, 0};
    f.d = f.b * f.b - 4 * f.a * f.c;
    assert(f.d == 4);
    return f;
}

inline dynkin_label dynkin_of(const cartan_root& a) {
    dynkin_label d{-2 * a.ell + 2 * a.m - a.n, -a.m + 2 * a.n, 0};
    d.rbar = -d.pbar - d.qbar;
    return d;
}

/// Classify by the parity pattern of (ell,m,n).  Exactly four patterns occur
/// for real roots: (e,o,o), (e,e,o), (e,o,e) in the plus orbit and (o,e,e)
/// in the minus orbit; anything else indicates an enumeration bug upstream.
inline weyl_orbit weyl_orbit_of(const cartan_root& a) {
    if (!is_real_root(a)) throw std::invalid_argument("weyl_orbit_of: not a real root");
    const int le = static_cast<int>(((a.ell % 2) + 2) % 2);
    const int me = static_cast<int>(((a.m % 2) + 2) % 2);
    const int ne = static_cast<int>(((a.n % 2) + 2) % 2);
    if (le == 0 && !(me == 0 && ne == 0)) return weyl_orbit::plus;
    if (le == 1 && me == 0 && ne == 0) return weyl_orbit::minus;
    throw std::logic_error("weyl_orbit_of: parity pattern outside the orbit table");
}

/// Null-vector triplet n_i in Cartan coefficients: n1 = a0+a1, n2 = a0+2a1+a2,
/// n3 = a0+a1+a2.  They satisfy n_i . n_i = 0 and n_i . n_j = -1.
inline cartan_root null_vector(int i) {
    switch (i) {
        case 1: return {1, 1, 0};
        case 2: return {1, 2, 1};
        case 3: return {1, 1, 1};
        default: throw std::invalid_argument("null_vector: i must be 1, 2 or 3");
    }
}

inline cartan_root simple_a2_root(int i) {
    switch (i) {
        case 1: return {0, 1, 0};
        case 2: return {0, 0, 1};
        case 3: return {0, -1, -1}; // a3 = -a1 - a2
        default: throw std::invalid_argument("simple_a2_root: i must be 1, 2 or 3");
    }
}

/// First-family root ell*n_i + sign*a_i.
inline cartan_root first_family_root(int64_t ell, int i, int sign) {
    if (ell < 0) throw std::invalid_argument("first_family_root: ell must be >= 0");
    if (sign != 1 && sign != -1) throw std::invalid_argument("first_family_root: sign must be +-1");
    const cartan_root ni = null_vector(i);
    const cartan_root ai = simple_a2_root(i);
    cartan_root out{ell * ni.ell + sign * ai.ell,
                    ell * ni.m + sign * ai.m,
                    ell * ni.n + sign * ai.n};
    assert(gram_dot(out, out) == 2);
    return out;
}

/// Embedding of a root into Minkowski coordinates (e0,e1,e2),
/// metric diag(-1,+1,+1).
inline std::array<double, 3> embed(const cartan_root& a) {
    // a0 = sqrt(2)(1/sqrt3, -1, -1/sqrt3), a1 = sqrt(2)(0,1,0),
    // a2 = sqrt(2)(0,-1/2, sqrt3/2)
    static const double s2 = std::sqrt(2.0);
    static const double s3 = std::sqrt(3.0);
    const double l = static_cast<double>(a.ell);
    const double m = static_cast<double>(a.m);
    const double n = static_cast<double>(a.n);
    return {s2 * l / s3,
            s2 * (-l + m - 0.5 * n),
            s2 * (-l / s3 + 0.5 * s3 * n)};
}

inline double minkowski_dot(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return -a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

} // namespace kmc::roots
