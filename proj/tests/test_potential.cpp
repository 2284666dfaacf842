#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "kmc/potential.hpp"

using namespace kmc;
using geom::gl2z;
using geom::half_plane_point;
using geom::minkowski_point;

namespace {

const half_plane_point z1{0.1, 0.7};
const half_plane_point z2{-0.2, 1.4};

const sqrt_one_table& table1e5() {
    static const auto t = sqrt_one_table::build(100000);
    return t;
}

// direct oracle for U_r: sum over all integer p with p^2 = 1 (mod r)
double u_r_direct(std::uint64_t r, const half_plane_point& z, std::int64_t pmax = 100000) {
    kahan_sum s;
    const double rr = static_cast<double>(r);
    const std::int64_t ri = static_cast<std::int64_t>(r);
    for (std::int64_t p = -pmax; p <= pmax; ++p) {
        const std::int64_t pp = ((p % ri) + ri) % ri;
        if ((pp * pp) % ri != 1 % ri) continue;
        const double d = (z.x - static_cast<double>(p) / rr) * (z.x - static_cast<double>(p) / rr) +
                         z.y * z.y - 1.0 / (rr * rr);
        s.add(1.0 / (d * d));
    }
    return s.value() * z.y * z.y / (rr * rr);
}

double raw_at(const half_plane_point& z, std::uint64_t R, unsigned threads = 1) {
    eval_options opt;
    opt.threads = threads;
    return u_truncated(z, {R, correction_level::raw}, table1e5(), opt).value;
}

} // namespace

TEST_SUITE("potential") {

TEST_CASE("u0_exact") {
    CHECK(u0_exact({0.25, 1.0}) == doctest::Approx(2.0 * pi * pi).epsilon(1e-14));
    // direct oracle 2 sum_q y^2/(2x+q)^2
    kahan_sum s;
    for (std::int64_t q = -1000000; q <= 1000000; ++q) {
        const double d = 2.0 * 0.1 + static_cast<double>(q);
        s.add(0.49 / (d * d));
    }
    CHECK(u0_exact(z1) == doctest::Approx(2.0 * s.value()).epsilon(1e-5));
    CHECK(u0_exact(z1) ==
          doctest::Approx(2.0 * pi * pi * 0.49 / std::pow(std::sin(0.2 * pi), 2)).epsilon(1e-13));
    CHECK_THROWS_AS((void)u0_exact({0.0, 1.0}), pole_proximity);
    CHECK_THROWS_AS((void)u0_exact({0.5, 1.0}), pole_proximity);
}

TEST_CASE("u_r_term against the direct lattice oracle") {
    CHECK(u_r_term(1, z1, table1e5()) == doctest::Approx(u_r_direct(1, z1)).epsilon(1e-9));
    CHECK(u_r_term(2, z1, table1e5()) == doctest::Approx(u_r_direct(2, z1)).epsilon(1e-9));
    CHECK(u_r_term(12, z1, table1e5()) == doctest::Approx(u_r_direct(12, z1)).epsilon(1e-9));
    CHECK(u_r_term(5, z2, table1e5()) == doctest::Approx(u_r_direct(5, z2)).epsilon(1e-9));
}

TEST_CASE("u_r_term heuristic mean at large y") {
    const half_plane_point zbig{0.37, 50.0};
    for (std::uint64_t r = 1; r <= 10; ++r) {
        const double expect = static_cast<double>(table1e5().count(r)) * pi /
                              (2.0 * zbig.y * static_cast<double>(r * r));
        CHECK(u_r_term(r, zbig, table1e5()) == doctest::Approx(expect).epsilon(0.1));
    }
}

TEST_CASE("raw truncation reproduces the reference table") {
    CHECK(std::abs(raw_at(z1, 10000) - 52.24167922) < 5e-8);
    CHECK(std::abs(raw_at(z2, 10000) - 52.24339662) < 5e-8);
    CHECK(std::abs(raw_at(z1, 20000) - 52.24327256) < 5e-8);
    CHECK(std::abs(raw_at(z1, 100000) - 52.24465475) < 5e-8);
}

TEST_CASE("correction ladder reproduces the reference table at R = 10^5") {
    auto level_at = [&](const half_plane_point& z, correction_level lv) {
        return u_truncated(z, {100000, lv}, table1e5()).value;
    };
    CHECK(std::abs(level_at(z1, correction_level::c0) - 52.24496886) < 5e-8);
    CHECK(std::abs(level_at(z1, correction_level::c1) - 52.24504929) < 5e-8);
    CHECK(std::abs(level_at(z1, correction_level::c2) - 52.24505901) < 5e-8);
    CHECK(std::abs(level_at(z1, correction_level::cinf) - 52.2450552237500) < 1e-10);
    CHECK(std::abs(level_at(z2, correction_level::cinf) - 52.2450552255882) < 1e-10);
    CHECK(std::abs(level_at(z2, correction_level::c1) - 52.24505520) < 5e-8);
}

TEST_CASE("cinf at R = 10^4 matches the refined reference values") {
    auto v = u_truncated(z1, {10000, correction_level::cinf}, table1e5()).value;
    CHECK(std::abs(v - 52.2450557618857) < 1e-10);
    v = u_truncated(z2, {10000, correction_level::cinf}, table1e5()).value;
    CHECK(std::abs(v - 52.2450554614623) < 1e-10);
}

TEST_CASE("convergence ordering of the ladder") {
    const double uref = 52.2450552288639; // converged reference at this point
    for (const std::uint64_t R : {std::uint64_t{10000}, std::uint64_t{100000}}) {
        auto err = [&](correction_level lv) {
            return std::abs(u_truncated(z1, {R, lv}, table1e5()).value - uref);
        };
        const double e_raw = err(correction_level::raw);
        const double e_c0 = err(correction_level::c0);
        const double e_c1 = err(correction_level::c1);
        const double e_c2 = err(correction_level::c2);
        const double e_inf = err(correction_level::cinf);
        CHECK(e_inf < e_c2);
        CHECK(e_c2 < e_c1);
        CHECK(e_c1 < e_c0);
        CHECK(e_c0 < e_raw);
    }
}

TEST_CASE("raw partial sums are positive and nondecreasing") {
    eval_options opt;
    opt.partial_points = {10, 100, 1000, 5000, 10000};
    const auto est = u_truncated(z1, {10000, correction_level::raw}, table1e5(), opt);
    REQUIRE(est.partials.size() >= 5);
    double prev = 0.0;
    for (const auto& [r, v] : est.partials) {
        CHECK(v > 0.0);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("averaged scheme equals the mean of single cinf evaluations") {
    truncation_scheme avg{300, correction_level::averaged};
    const auto got = u_truncated(z1, avg, table1e5()).value;
    kahan_sum mean;
    std::uint64_t lo = static_cast<std::uint64_t>(std::ceil((1.0 - avg.avg_window) * 300.0));
    std::uint64_t count = 0;
    for (std::uint64_t rp = lo; rp <= 300; ++rp) {
        mean.add(u_truncated(z1, {rp, correction_level::cinf}, table1e5()).value);
        ++count;
    }
    CHECK(got == mean.value() / static_cast<double>(count)); // bit-identical by construction
}

TEST_CASE("tiny truncations equal the hand-assembled sums") {
    const double expect1 = u0_exact(z1) + 2.0 * u_r_term(1, z1, table1e5());
    CHECK(raw_at(z1, 1) == doctest::Approx(expect1).epsilon(1e-15));
    const double expect3 = expect1 + 2.0 * (u_r_term(2, z1, table1e5()) +
                                            u_r_term(3, z1, table1e5()));
    CHECK(raw_at(z1, 3) == doctest::Approx(expect3).epsilon(1e-14));
}

TEST_CASE("double-double validation pass agrees with the compensated engine") {
    const double kahan = raw_at(z1, 100000);
    const double dd = u_raw_double_double(z1, 100000, table1e5());
    CHECK(std::abs(kahan - dd) < 1e-12);
}

TEST_CASE("reduction into the fundamental domain preserves the potential") {
    const auto [zr, g] = geom::reduce_to_fundamental(z1);
    CHECK(geom::in_fundamental_domain(zr));
    const double a = u_truncated(z1, {100000, correction_level::cinf}, table1e5()).value;
    const double b = u_truncated(zr, {100000, correction_level::cinf}, table1e5()).value;
    CHECK(std::abs(a - b) < 5e-9);
}

TEST_CASE("averaged subsampling stride") {
    truncation_scheme s7{90000, correction_level::averaged, 1.0 / 3.0, 7};
    eval_options o1, o4;
    o1.threads = 1;
    o4.threads = 4;
    const double a = u_truncated(z1, s7, table1e5(), o1).value;
    const double b = u_truncated(z1, s7, table1e5(), o4).value;
    CHECK(a == b); // deterministic under threading
    const double full = u_truncated(z1, {90000, correction_level::averaged}, table1e5()).value;
    CHECK(std::abs(a - full) < 1e-9); // subsampled mean tracks the full mean
}

TEST_CASE("results are bit-identical across worker counts") {
    const double v1 = raw_at(z1, 100000, 1);
    const double v2 = raw_at(z1, 100000, 2);
    const double v4 = raw_at(z1, 100000, 4);
    const double v8 = raw_at(z1, 100000, 8);
    CHECK(v1 == v2);
    CHECK(v1 == v4);
    CHECK(v1 == v8);

    eval_options o1, o5;
    o1.threads = 1;
    o5.threads = 5;
    const auto a1 = u_truncated(z1, {90000, correction_level::averaged}, table1e5(), o1).value;
    const auto a5 = u_truncated(z1, {90000, correction_level::averaged}, table1e5(), o5).value;
    CHECK(a1 == a5);
}

TEST_CASE("modularity") {
    SUBCASE("identity gives exactly zero") {
        CHECK(modularity_residual(z1, gl2z::identity(), {2000, correction_level::cinf},
                                  table1e5()) == 0.0);
    }
    SUBCASE("translation invariance at matched truncation") {
        CHECK(modularity_residual(z1, gl2z::T(), {100000, correction_level::raw}, table1e5()) <
              1e-10);
    }
    SUBCASE("reflection s3 symmetry U(-zbar) = U(z)") {
        CHECK(modularity_residual(z1, gl2z::s3(), {100000, correction_level::raw}, table1e5()) <
              1e-11);
    }
    SUBCASE("inversion S at the refined level") {
        // cinf(z1) vs cinf(z2 = S z1) at R = 10^5, both within 1e-10 of the
        // reference values 2.2e-9 apart
        CHECK(modularity_residual(z1, gl2z::S(), {100000, correction_level::cinf}, table1e5()) <
              3e-9);
    }
}

TEST_CASE("level slicing") {
    SUBCASE("single level against the triple-loop oracle") {
        for (std::uint64_t ell = 0; ell <= 5; ++ell) {
            kahan_sum oracle;
            const std::int64_t L = static_cast<std::int64_t>(ell);
            for (std::int64_t p = -100; p <= 100; ++p)
                for (std::int64_t q = -100; q <= 100; ++q)
                    for (std::int64_t r = 1; r <= 10; ++r) {
                        if (p * p + q * r != 1) continue;
                        if (r - p - q != L) continue;
                        const double den = static_cast<double>(r) * (z1.x * z1.x + z1.y * z1.y) -
                                           2.0 * static_cast<double>(p) * z1.x -
                                           static_cast<double>(q);
                        oracle.add(z1.y * z1.y / (den * den));
                    }
            CHECK(level_slice_sum(z1, ell) == doctest::Approx(oracle.value()).epsilon(1e-13));
        }
    }
    SUBCASE("partial sums increase monotonically") {
        double prev = 0.0;
        for (const std::uint64_t L : {10u, 50u, 200u, 500u}) {
            const double v = u_by_level_slicing(z1, L);
            CHECK(v > prev);
            prev = v;
        }
    }
    SUBCASE("consistency with the r-truncated route") {
        const double uref = u_truncated(z1, {100000, correction_level::cinf}, table1e5()).value;
        for (const std::uint64_t L : {200u, 500u, 1000u}) {
            const double v = u_by_level_slicing(z1, L);
            CHECK(v < uref);
            CHECK(std::abs(v - uref) < 50.0 / static_cast<double>(L));
        }
    }
}

TEST_CASE("v_level_minkowski") {
    const minkowski_point x{2.0, 0.3, 0.1};
    SUBCASE("level 0 equals the explicit six-term sum") {
        // adjoint roots +-a1, +-a2, +-a3 in Minkowski coordinates
        const double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0);
        const std::array<std::array<double, 3>, 3> a = {{{0.0, s2, 0.0},
                                                         {0.0, -s2 / 2.0, s2 * s3 / 2.0},
                                                         {0.0, -s2 / 2.0, -s2 * s3 / 2.0}}};
        double expect = 0.0;
        for (const auto& ai : a) {
            const double ax = ai[1] * x.x1 + ai[2] * x.x2;
            expect += 2.0 / (ax * ax); // both signs of each root
        }
        expect *= 0.5;
        CHECK(v_level_minkowski(0, x) == doctest::Approx(expect).epsilon(1e-13));
    }
    SUBCASE("dihedral symmetry of the adjoint slice") {
        const double r = 1.7, th = 0.9;
        for (const double phi : {0.13, 1.1, 2.0}) {
            const minkowski_point p1{r * std::cosh(th), r * std::sinh(th) * std::cos(phi),
                                     r * std::sinh(th) * std::sin(phi)};
            const double phi2 = phi + 2.0 * pi / 3.0;
            const minkowski_point p2{r * std::cosh(th), r * std::sinh(th) * std::cos(phi2),
                                     r * std::sinh(th) * std::sin(phi2)};
            CHECK(v_level_minkowski(0, p1) ==
                  doctest::Approx(v_level_minkowski(0, p2)).epsilon(1e-12));
        }
    }
    SUBCASE("V_{-l} = V_l") {
        CHECK(v_level_minkowski(-3, x) == v_level_minkowski(3, x));
    }
    SUBCASE("summing levels approaches the half-plane value") {
        const auto xz = geom::halfplane_to_hyperboloid(z1);
        const minkowski_point p{xz.x0, xz.x1, xz.x2};
        kahan_sum acc;
        acc.add(v_level_minkowski(0, p));
        for (std::int64_t l = 1; l <= 400; ++l) acc.add(2.0 * v_level_minkowski(l, p));
        const double uref = u_truncated(z1, {100000, correction_level::cinf}, table1e5()).value;
        CHECK(acc.value() < uref);
        CHECK(std::abs(acc.value() - uref) < 0.1);
    }
    SUBCASE("outside the future cone is rejected") {
        CHECK_THROWS_AS((void)v_level_minkowski(0, {0.5, 1.0, 0.0}), std::invalid_argument);
    }
}

TEST_CASE("first-family resummation closed form") {
    const auto xz = geom::halfplane_to_hyperboloid(half_plane_point{0.13, 0.9});
    const std::array<double, 3> x{xz.x0, xz.x1, xz.x2};
    std::array<std::array<double, 3>, 4> ni_e, ai_e;
    for (int i = 1; i <= 3; ++i) {
        ni_e[i] = roots::embed(roots::null_vector(i));
        ai_e[i] = roots::embed(roots::simple_a2_root(i));
    }
    auto mdot = [](const std::array<double, 3>& a, const std::array<double, 3>& b) {
        return -a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    };
    // closed form sum_i [ (a_i.x)^-2 + pi^2 / ((n_i.x)^2 sin^2(pi a_i.x / n_i.x)) ]
    double closed = 0.0;
    for (int i = 1; i <= 3; ++i) {
        const double ax = mdot(ai_e[i], x), nx = mdot(ni_e[i], x);
        closed += 1.0 / (ax * ax) + pi * pi / (nx * nx * std::pow(std::sin(pi * ax / nx), 2));
    }
    auto family_partial = [&](std::int64_t L) {
        kahan_sum s;
        for (std::int64_t l = 0; l <= L; ++l)
            for (int i = 1; i <= 3; ++i) {
                const double nx = mdot(ni_e[i], x), ax = mdot(ai_e[i], x);
                const double dp = static_cast<double>(l) * nx + ax;
                const double dm = static_cast<double>(l) * nx - ax;
                s.add(1.0 / (dp * dp) + 1.0 / (dm * dm));
            }
        return s.value();
    };
    const double e1 = std::abs(family_partial(2000) - closed);
    const double e2 = std::abs(family_partial(8000) - closed);
    CHECK(e2 < e1);
    CHECK(e1 < 1e-2);
    CHECK(e2 < 3e-3);
}

TEST_CASE("Hecke route") {
    static const auto big = sqrt_one_table::build(40000);
    SUBCASE("A = 0 strata in closed form") {
        // sum_C y^2/(x+C)^2 = pi^2 y^2 / sin^2(pi x)
        kahan_sum s;
        for (std::int64_t c = -2000000; c <= 2000000; ++c) {
            const double d = 0.1 + static_cast<double>(c);
            s.add(0.49 / (d * d));
        }
        CHECK(s.value() ==
              doctest::Approx(pi * pi * 0.49 / std::pow(std::sin(pi * 0.1), 2)).epsilon(1e-6));
    }
    SUBCASE("residual is small and shrinks with R") {
        const double res3 = hecke_identity_residual(z1, 1000, big);
        const double res4 = hecke_identity_residual(z1, 10000, big);
        CHECK(res4 < res3);
        CHECK(res3 < 8e-3);
        CHECK(res4 < 1e-3);
    }
    SUBCASE("table must reach 4R") {
        CHECK_THROWS_AS((void)hecke_identity_residual(z1, 30000, table1e5()),
                        table_too_small);
    }
}

TEST_CASE("mirror masking and pole paths") {
    CHECK_THROWS_AS((void)u_truncated({0.0, 1.0}, {100, correction_level::raw}, table1e5()),
                    pole_proximity);
    // on the unit circle (level-0 mirror)
    CHECK_THROWS_AS(
        (void)u_truncated({0.6, 0.8}, {100, correction_level::raw}, table1e5()),
        pole_proximity);
    try {
        (void)u_truncated({0.6, 0.8}, {100, correction_level::raw}, table1e5());
    } catch (const pole_proximity& e) {
        CHECK(e.r == 1); // the z zbar = 1 mirror lives at r = 1
    }
    CHECK_THROWS_AS((void)u_truncated(z1, {200000, correction_level::raw}, table1e5()),
                    table_too_small);
}

TEST_CASE("checkpoint sidecar") {
    const auto path = std::filesystem::temp_directory_path() / "kmc_test.uckp";
    std::error_code ec;
    std::filesystem::remove(path, ec);

    eval_options opt;
    opt.threads = 2;
    opt.checkpoint = path;
    const truncation_scheme sch{500000, correction_level::raw};
    static const auto big = sqrt_one_table::build(500000);

    const double fresh = u_truncated(z1, sch, big, opt).value;
    REQUIRE(std::filesystem::exists(path)); // at least one flush happened

    // a resumed run (checkpoint present) must give the identical value
    const double resumed = u_truncated(z1, sch, big, opt).value;
    CHECK(resumed == fresh);

    // and must match a run without any checkpointing
    const double plain = u_truncated(z1, sch, big).value;
    CHECK(plain == fresh);

    SUBCASE("checkpoint for a different z is rejected") {
        eval_options opt2 = opt;
        CHECK_THROWS_AS((void)u_truncated(z2, sch, big, opt2), io_error);
    }
    SUBCASE("corrupted checkpoint is rejected") {
        std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(20);
        f.put('\x7f');
        f.close();
        CHECK_THROWS_AS((void)u_truncated(z1, sch, big, opt), io_error);
    }
    std::filesystem::remove(path, ec);
}

} // TEST_SUITE
