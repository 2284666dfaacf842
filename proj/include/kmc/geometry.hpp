#pragma once

// Coordinate charts of the hyperbolic plane used by the potential: the unit
// future hyperboloid in R^{1,2}, the Poincare disk, and the complex upper
// half-plane, plus the PGL(2,Z) action and fundamental-domain reduction.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include "kmc/common.hpp"
#include "kmc/roots.hpp"

namespace kmc::geom {

using complex = std::complex<double>;

/// rho = exp(2 pi i / 3), stored exactly as (-1/2, sqrt(3)/2).
inline const complex rho{-0.5, std::sqrt(3.0) / 2.0};

struct minkowski_point {
    double x0 = 1.0, x1 = 0.0, x2 = 0.0; // metric diag(-1,+1,+1)
    double dot(const minkowski_point& o) const { return -x0 * o.x0 + x1 * o.x1 + x2 * o.x2; }
};

struct disk_point {
    complex v;
};

struct half_plane_point {
    double x = 0.0;
    double y = 1.0;
    complex z() const { return {x, y}; }
    static half_plane_point from(complex z) { return {z.real(), z.imag()}; }
};

/// Integral 2x2 matrix of determinant +-1 acting on the half-plane:
/// z -> (az+b)/(cz+d) for det +1 and z -> (a zbar + b)/(c zbar + d) for det -1.
struct gl2z {
    std::int64_t a = 1, b = 0, c = 0, d = 1;

    std::int64_t det() const { return a * d - b * c; }

    void validate() const {
        const auto dt = det();
        if (dt != 1 && dt != -1)
            throw std::invalid_argument("gl2z: determinant must be +-1, got " + std::to_string(dt));
    }

    friend gl2z operator*(const gl2z& l, const gl2z& r) {
        return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d,
                l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
    }
    friend bool operator==(const gl2z&, const gl2z&) = default;

    static gl2z identity() { return {1, 0, 0, 1}; }
    static gl2z T() { return {1, 1, 0, 1}; }        // z -> z+1
    static gl2z S() { return {0, -1, 1, 0}; }       // z -> -1/z
    static gl2z s1() { return {0, 1, 1, 0}; }       // z -> 1/zbar
    static gl2z s2() { return {1, -1, 0, -1}; }     // z -> 1-zbar
    static gl2z s3() { return {1, 0, 0, -1}; }      // z -> -zbar
    static gl2z T_pow(std::int64_t n) { return {1, n, 0, 1}; }
};

inline void require_upper(const half_plane_point& z, const char* who) {
    if (!(z.y > 0.0)) throw std::invalid_argument(std::string(who) + ": Im z must be > 0");
}

// ---------------------------------------------------------------------------
// charts

/// Stereographic projection of the future hyperboloid x.x = -1, x0 >= 1 to the
/// open unit disk: v = w/(1 + sqrt(1 + wbar w)) with w = x1 + i x2.
inline disk_point hyperboloid_to_disk(const minkowski_point& p, double tol = 1e-12) {
    if (std::abs(p.dot(p) + 1.0) > tol || p.x0 < 1.0 - tol)
        throw std::invalid_argument("hyperboloid_to_disk: point not on the future unit hyperboloid");
    const complex w{p.x1, p.x2};
    return {w / (1.0 + std::sqrt(1.0 + std::norm(w)))};
}

inline minkowski_point disk_to_hyperboloid(const disk_point& d) {
    const double vv = std::norm(d.v);
    if (!(vv < 1.0)) throw std::invalid_argument("disk_to_hyperboloid: |v| must be < 1");
    const complex w = 2.0 * d.v / (1.0 - vv);
    return {(1.0 + vv) / (1.0 - vv), w.real(), w.imag()};
}

/// Cayley-type map z = (1 - i rho v)/(i v - rho); disk center goes to the
/// corner z = 1/2 + i sqrt(3)/2 of the fundamental triangle.
inline half_plane_point disk_to_halfplane(const disk_point& d) {
    if (!(std::norm(d.v) < 1.0)) throw std::invalid_argument("disk_to_halfplane: |v| must be < 1");
    const complex i{0.0, 1.0};
    return half_plane_point::from((1.0 - i * rho * d.v) / (i * d.v - rho));
}

inline disk_point halfplane_to_disk(const half_plane_point& z) {
    require_upper(z, "halfplane_to_disk");
    const complex i{0.0, 1.0};
    return {-i * (rho * z.z() + 1.0) / (z.z() + rho)};
}

/// Direct chart: w = (2/sqrt3) (1 + rho z)(rhobar + zbar)/(z - zbar),
/// x0 = sqrt(1 + |w|^2).
inline minkowski_point halfplane_to_hyperboloid(const half_plane_point& z) {
    require_upper(z, "halfplane_to_hyperboloid");
    const complex zz = z.z();
    const complex w = (2.0 / std::sqrt(3.0)) * (1.0 + rho * zz) *
                      (std::conj(rho) + std::conj(zz)) / (zz - std::conj(zz));
    return {std::sqrt(1.0 + std::norm(w)), w.real(), w.imag()};
}

// ---------------------------------------------------------------------------
// group action

inline half_plane_point apply(const gl2z& g, const half_plane_point& z) {
    g.validate();
    require_upper(z, "apply");
    const complex zz = g.det() == 1 ? z.z() : std::conj(z.z());
    const complex num = static_cast<double>(g.a) * zz + static_cast<double>(g.b);
    const complex den = static_cast<double>(g.c) * zz + static_cast<double>(g.d);
    return half_plane_point::from(num / den);
}

inline bool in_fundamental_domain(const half_plane_point& z, double tol = 1e-12) {
    return z.x * z.x + z.y * z.y >= 1.0 - tol && z.x >= -tol && z.x <= 0.5 + tol;
}

/// Gauss reduction into F = { |z| >= 1, 0 <= Re z <= 1/2 }, returning the
/// group element that maps the input to the returned point.
inline std::pair<half_plane_point, gl2z> reduce_to_fundamental(const half_plane_point& z0,
                                                               double tol = 1e-12) {
    require_upper(z0, "reduce_to_fundamental");
    half_plane_point z = z0;
    gl2z g = gl2z::identity();
    if (in_fundamental_domain(z, tol)) return {z, g};
    constexpr int max_iter = 10000;
    int it = 0;
    for (; it < max_iter; ++it) {
        const auto n = static_cast<std::int64_t>(std::llround(z.x));
        if (n != 0) {
            z.x -= static_cast<double>(n);
            g = gl2z::T_pow(-n) * g;
        }
        const double r2 = z.x * z.x + z.y * z.y;
        if (r2 < 1.0 - tol) {
            z = apply(gl2z::S(), z);
            g = gl2z::S() * g;
        } else {
            break;
        }
    }
    if (it == max_iter)
        throw std::runtime_error("reduce_to_fundamental: iteration guard tripped");
    if (z.x < 0.0) {
        // |Re z| <= 1/2 here, so one reflection lands in [0, 1/2]
        z.x = -z.x;
        g = gl2z::s3() * g;
    }
    return {z, g};
}

/// True iff z lies within tol of the mirror r z zbar - p(z+zbar) - q = 0.
inline bool mirror_curve_contains(const roots::reflection_triple& t,
                                  const half_plane_point& z, double tol) {
    if (!roots::is_valid(t)) throw std::invalid_argument("mirror_curve_contains: invalid triple");
    if (!(tol > 0.0)) throw std::invalid_argument("mirror_curve_contains: tol must be > 0");
    const double zz = z.x * z.x + z.y * z.y;
    const double val = static_cast<double>(t.r) * zz - 2.0 * static_cast<double>(t.p) * z.x -
                       static_cast<double>(t.q);
    return std::abs(val) < tol;
}

} // namespace kmc::geom
