#pragma once

// Square-roots of unity: for every modulus r <= r_max the sorted residues
// p in [0,r) with p^2 = 1 (mod r).  Built from a smallest-prime-factor sieve,
// per-prime-power root sets and CRT recombination; the per-r counts N(r) are
// multiplicative with N(p^v) = 2 for odd p, N(2) = 1, N(4) = 2, N(2^v) = 4.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "kmc/common.hpp"

namespace kmc {

class sqrt_one_table {
public:
    /// Default construction memory budget: 2 GiB of residues.
    static constexpr std::size_t default_memory_cap = std::size_t{2} << 30;

    static sqrt_one_table build(std::uint64_t r_max,
                                std::size_t memory_cap_bytes = default_memory_cap) {
        if (r_max < 1) throw std::invalid_argument("sqrt_one_table: r_max must be >= 1");
        if (r_max > (std::uint64_t{1} << 31))
            throw std::invalid_argument("sqrt_one_table: r_max larger than 2^31 unsupported");

        sqrt_one_table t;
        t.r_max_ = r_max;
        t.offset_.assign(r_max + 2, 0);
        // ~ (6/pi^2) r log r residues overall
        t.flat_.reserve(static_cast<std::size_t>(
            0.65 * static_cast<double>(r_max) * std::log(static_cast<double>(r_max) + 2.0) +
            2.0 * static_cast<double>(r_max)));

        const auto spf = smallest_prime_factors(r_max);

        std::vector<std::uint64_t> cur, next;
        std::vector<std::uint64_t> proots;
        for (std::uint64_t r = 1; r <= r_max; ++r) {
            t.offset_[r] = t.flat_.size();
            if (r == 1) {
                t.flat_.push_back(0);
                continue;
            }
            cur.assign(1, 0);
            std::uint64_t cur_mod = 1;
            std::uint64_t x = r;
            while (x > 1) {
                const std::uint64_t p = spf[x];
                std::uint64_t pv = 1;
                while (x % p == 0) { x /= p; pv *= p; }
                prime_power_roots(p, pv, proots);
                next.clear();
                const std::uint64_t inv = inverse_mod(cur_mod % pv, pv);
                for (const std::uint64_t a : cur)
                    for (const std::uint64_t b : proots) {
                        const std::uint64_t k = ((b + pv - a % pv) % pv) * inv % pv;
                        next.push_back(a + cur_mod * k);
                    }
                cur.swap(next);
                cur_mod *= pv;
            }
            std::sort(cur.begin(), cur.end());
            for (const std::uint64_t p : cur)
                t.flat_.push_back(static_cast<std::uint32_t>(p));
            if (t.flat_.size() * sizeof(std::uint32_t) > memory_cap_bytes)
                throw memory_budget_exceeded(
                    "sqrt_one_table: residue storage exceeds the configured cap of " +
                    std::to_string(memory_cap_bytes) + " bytes");
        }
        t.offset_[r_max + 1] = t.flat_.size();
        return t;
    }

    std::uint64_t r_max() const { return r_max_; }

    std::span<const std::uint32_t> roots(std::uint64_t r) const {
        if (r < 1 || r > r_max_) throw table_too_small(r, r_max_);
        return {flat_.data() + offset_[r], flat_.data() + offset_[r + 1]};
    }

    /// N(r), the number of square-roots of 1 modulo r.
    std::size_t count(std::uint64_t r) const { return roots(r).size(); }

    std::size_t total_roots() const { return flat_.size(); }

    // -- cache file -----------------------------------------------------
    // "SQ1T", version u16, r_max u64, then per r (increasing): count u32,
    // count x u32 residues; trailing u64 FNV-1a over everything after the
    // 14-byte header.  All integers little-endian.

    static constexpr std::uint16_t format_version = 1;

    void save(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot open sieve cache for writing: " + path.string());
        out.write("SQ1T", 4);
        put_u16(out, format_version);
        put_u64(out, r_max_);
        fnv1a h;
        std::vector<unsigned char> buf;
        for (std::uint64_t r = 1; r <= r_max_; ++r) {
            const auto rs = roots(r);
            buf.clear();
            append_u32(buf, static_cast<std::uint32_t>(rs.size()));
            for (const auto p : rs) append_u32(buf, p);
            h.update(buf.data(), buf.size());
            out.write(reinterpret_cast<const char*>(buf.data()),
                      static_cast<std::streamsize>(buf.size()));
        }
        put_u64(out, h.digest());
        if (!out) throw io_error("short write to sieve cache: " + path.string());
    }

    static sqrt_one_table load(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw io_error("cannot open sieve cache: " + path.string());
        char magic[4];
        in.read(magic, 4);
        if (!in || std::string(magic, 4) != "SQ1T")
            throw io_error("bad magic in sieve cache: " + path.string());
        const std::uint16_t ver = get_u16(in);
        if (ver != format_version)
            throw io_error("unsupported sieve cache version " + std::to_string(ver));
        const std::uint64_t r_max = get_u64(in);
        if (r_max < 1 || r_max > (std::uint64_t{1} << 31))
            throw io_error("implausible r_max in sieve cache");

        sqrt_one_table t;
        t.r_max_ = r_max;
        t.offset_.assign(r_max + 2, 0);
        fnv1a h;
        for (std::uint64_t r = 1; r <= r_max; ++r) {
            t.offset_[r] = t.flat_.size();
            unsigned char cnt_raw[4];
            in.read(reinterpret_cast<char*>(cnt_raw), 4);
            if (!in) throw io_error("truncated sieve cache: " + path.string());
            h.update(cnt_raw, 4);
            const std::uint32_t cnt = read_u32(cnt_raw);
            if (cnt > r + 1) throw io_error("corrupt residue count in sieve cache");
            for (std::uint32_t i = 0; i < cnt; ++i) {
                unsigned char raw[4];
                in.read(reinterpret_cast<char*>(raw), 4);
                if (!in) throw io_error("truncated sieve cache: " + path.string());
                h.update(raw, 4);
                t.flat_.push_back(read_u32(raw));
            }
        }
        t.offset_[r_max + 1] = t.flat_.size();
        const std::uint64_t want = get_u64(in);
        if (!in) throw io_error("truncated sieve cache: " + path.string());
        if (want != h.digest())
            throw io_error("sieve cache checksum mismatch: " + path.string());
        return t;
    }

    /// Checksum + structure check without materializing a usable table.
    static void verify(const std::filesystem::path& path) { (void)load(path); }

private:
    std::uint64_t r_max_ = 0;
    std::vector<std::uint64_t> offset_; // offset_[r] .. offset_[r+1]
    std::vector<std::uint32_t> flat_;

    static std::vector<std::uint32_t> smallest_prime_factors(std::uint64_t n) {
        std::vector<std::uint32_t> spf(n + 1, 0);
        for (std::uint64_t i = 2; i * i <= n; ++i)
            if (spf[i] == 0)
                for (std::uint64_t j = i * i; j <= n; j += i)
                    if (spf[j] == 0) spf[j] = static_cast<std::uint32_t>(i);
        for (std::uint64_t i = 2; i <= n; ++i)
            if (spf[i] == 0) spf[i] = static_cast<std::uint32_t>(i);
        return spf;
    }

    static void prime_power_roots(std::uint64_t p, std::uint64_t pv,
                                  std::vector<std::uint64_t>& out) {
        out.clear();
        if (p != 2) {
            out = {1, pv - 1};
        } else if (pv == 2) {
            out = {1};
        } else if (pv == 4) {
            out = {1, 3};
        } else {
            out = {1, pv / 2 - 1, pv / 2 + 1, pv - 1};
        }
    }

    static std::uint64_t inverse_mod(std::uint64_t a, std::uint64_t m) {
        // extended Euclid; inputs are coprime by construction
        std::int64_t t = 0, nt = 1;
        std::int64_t r = static_cast<std::int64_t>(m), nr = static_cast<std::int64_t>(a % m);
        while (nr != 0) {
            const std::int64_t q = r / nr;
            std::swap(t -= q * nt, nt);
            std::swap(r -= q * nr, nr);
        }
        return static_cast<std::uint64_t>(t < 0 ? t + static_cast<std::int64_t>(m) : t);
    }

    static void append_u32(std::vector<unsigned char>& b, std::uint32_t v) {
        for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    static std::uint32_t read_u32(const unsigned char* p) {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
        return v;
    }
    static void put_u16(std::ostream& o, std::uint16_t v) {
        const unsigned char raw[2] = {static_cast<unsigned char>(v),
                                      static_cast<unsigned char>(v >> 8)};
        o.write(reinterpret_cast<const char*>(raw), 2);
    }
    static void put_u64(std::ostream& o, std::uint64_t v) {
        unsigned char raw[8];
        for (int i = 0; i < 8; ++i) raw[i] = static_cast<unsigned char>(v >> (8 * i));
        o.write(reinterpret_cast<const char*>(raw), 8);
    }
    static std::uint16_t get_u16(std::istream& in) {
        unsigned char raw[2];
        in.read(reinterpret_cast<char*>(raw), 2);
        return static_cast<std::uint16_t>(raw[0] | (raw[1] << 8));
    }
    static std::uint64_t get_u64(std::istream& in) {
        unsigned char raw[8];
        in.read(reinterpret_cast<char*>(raw), 8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(raw[i]) << (8 * i);
        return v;
    }
};

} // namespace kmc
