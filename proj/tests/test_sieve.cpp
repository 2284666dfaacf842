#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "kmc/kernels.hpp"
#include "kmc/sieve.hpp"

using kmc::sqrt_one_table;

namespace {

std::vector<std::uint32_t> brute_roots(std::uint64_t r) {
    if (r == 1) return {0};
    std::vector<std::uint32_t> out;
    for (std::uint64_t p = 0; p < r; ++p)
        if ((p * p) % r == 1 % r) out.push_back(static_cast<std::uint32_t>(p));
    return out;
}

} // namespace

TEST_SUITE("sieve") {

TEST_CASE("landmark moduli") {
    const auto t = sqrt_one_table::build(16);
    CHECK(std::vector<std::uint32_t>(t.roots(1).begin(), t.roots(1).end()) ==
          std::vector<std::uint32_t>{0});
    CHECK(std::vector<std::uint32_t>(t.roots(8).begin(), t.roots(8).end()) ==
          std::vector<std::uint32_t>{1, 3, 5, 7});
    CHECK(t.count(8) == 4);
    const auto t12 = sqrt_one_table::build(12);
    CHECK(std::vector<std::uint32_t>(t12.roots(12).begin(), t12.roots(12).end()) ==
          std::vector<std::uint32_t>{1, 5, 7, 11});
}

TEST_CASE("equality with brute force up to 10^4") {
    const auto t = sqrt_one_table::build(10000);
    for (std::uint64_t r = 1; r <= 10000; ++r) {
        const auto want = brute_roots(r);
        const auto got = t.roots(r);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < want.size(); ++i) CHECK(got[i] == want[i]);
    }
}

TEST_CASE("roots pair up under p -> r-p") {
    const auto t = sqrt_one_table::build(500);
    for (std::uint64_t r = 3; r <= 500; ++r)
        for (const auto p : t.roots(r)) {
            const std::uint32_t mate = static_cast<std::uint32_t>(r - p);
            const auto rs = t.roots(r);
            CHECK(std::binary_search(rs.begin(), rs.end(), mate));
        }
}

TEST_CASE("count table: multiplicativity, growth, Dirichlet value") {
    static const auto t = sqrt_one_table::build(1000000);

    SUBCASE("N is multiplicative on coprime pairs up to 10^3") {
        for (std::uint64_t r = 2; r <= 1000; ++r)
            for (std::uint64_t s = r + 1; s <= 1000; ++s) {
                if (std::gcd(r, s) != 1) continue;
                CHECK(t.count(r * s) == t.count(r) * t.count(s));
            }
    }

    SUBCASE("prime power counts") {
        CHECK(t.count(2) == 1);
        CHECK(t.count(4) == 2);
        CHECK(t.count(32) == 4);
        CHECK(t.count(3 * 3 * 3) == 2);
        CHECK(t.count(7 * 7) == 2);
    }

    SUBCASE("average growth c R (log R - 1) + c1 R") {
        const auto k = kmc::correction_constants();
        const double R = 1e6;
        const double fit = k.c * R * (std::log(R) - 1.0) + k.c1 * R;
        const double total = static_cast<double>(t.total_roots());
        CHECK(std::abs(total - fit) / R < 0.05);
    }

    SUBCASE("sum N(r)/r^2 + tail estimate hits the Euler product value") {
        kmc::kahan_sum s;
        for (std::uint64_t r = 1000000; r >= 1; --r)
            s.add(static_cast<double>(t.count(r)) / (static_cast<double>(r) * static_cast<double>(r)));
        const auto k = kmc::correction_constants();
        const double R = 1e6;
        const double approx = s.value() + (k.c * std::log(R) + k.c + k.c1) / R;
        const double zeta2 = kmc::pi * kmc::pi / 6.0;
        const double zeta4 = kmc::pi * kmc::pi * kmc::pi * kmc::pi / 90.0;
        const double exact = (1.0 - 0.25 + 0.125) * zeta2 * zeta2 / zeta4; // = 2.1875
        CHECK(std::abs(approx - exact) < 1e-5);
    }
}

TEST_CASE("cache file round trip") {
    const auto dir = std::filesystem::temp_directory_path();
    const auto path = dir / "kmc_sieve_test.sq1t";
    const auto t = sqrt_one_table::build(2000);
    t.save(path);

    const auto back = sqrt_one_table::load(path);
    REQUIRE(back.r_max() == 2000);
    for (std::uint64_t r = 1; r <= 2000; ++r) {
        const auto a = t.roots(r);
        const auto b = back.roots(r);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    }
    CHECK_NOTHROW(sqrt_one_table::verify(path));

    SUBCASE("bit flip breaks the checksum") {
        auto bytes = std::filesystem::file_size(path);
        std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(static_cast<std::streamoff>(bytes / 2));
        char c;
        f.seekg(static_cast<std::streamoff>(bytes / 2));
        f.get(c);
        f.seekp(static_cast<std::streamoff>(bytes / 2));
        f.put(static_cast<char>(c ^ 0x01));
        f.close();
        CHECK_THROWS_AS(sqrt_one_table::verify(path), kmc::io_error);
    }

    SUBCASE("truncation is detected") {
        std::filesystem::resize_file(path, std::filesystem::file_size(path) - 5);
        CHECK_THROWS_AS(sqrt_one_table::verify(path), kmc::io_error);
    }

    std::error_code ec;
    std::filesystem::remove(path, ec);
}

TEST_CASE("bounds and budget") {
    const auto t = sqrt_one_table::build(100);
    CHECK_THROWS_AS((void)t.roots(101), kmc::table_too_small);
    CHECK_THROWS_AS((void)t.roots(0), kmc::table_too_small);
    CHECK_THROWS_AS((void)sqrt_one_table::build(10000, 64), kmc::memory_budget_exceeded);
    CHECK_THROWS_AS((void)sqrt_one_table::build(0), std::invalid_argument);
}

} // TEST_SUITE
