#pragma once

// The automorphic Calogero potential on the upper half-plane.
//
// U(z) is summed over the mirrors (p,q,r), p^2+qr = 1: the r = 0 stratum in
// closed form, each r >= 1 stratum as a finite sum of S-kernel values over
// the square-roots of 1 mod r, truncated at r = R with a ladder of tail
// corrections (raw, c0, c1, c2, cinf, averaged).
//
// The r-sum runs over a fixed chunk grid with compensated per-chunk sums
// merged in increasing-r order, so results are bit-identical for any worker
// count.  Checkpoints persist the merged prefix at chunk boundaries.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "kmc/common.hpp"
#include "kmc/geometry.hpp"
#include "kmc/kernels.hpp"
#include "kmc/roots.hpp"
#include "kmc/sieve.hpp"

namespace kmc {

enum class correction_level { raw, c0, c1, c2, cinf, averaged };

struct truncation_scheme {
    std::uint64_t r_bound = 1;
    correction_level level = correction_level::raw;
    double avg_window = 1.0 / 3.0; ///< averaged: window fraction (1-w)R..R
    std::uint64_t avg_stride = 1;  ///< averaged: subsampling stride within the window
};

struct potential_estimate {
    double value = 0.0;
    truncation_scheme scheme;
    geom::half_plane_point z;
    /// (R', value at R' under the same correction level); filled for the
    /// record points requested through eval_options::partial_points.
    std::vector<std::pair<std::uint64_t, double>> partials;
};

struct eval_options {
    unsigned threads = 1; ///< 0 = hardware concurrency
    std::optional<std::filesystem::path> checkpoint;
    std::vector<std::uint64_t> partial_points;
};

// ---------------------------------------------------------------------------
// closed strata and single terms

/// r = 0 stratum: 2 pi^2 y^2 / sin^2(2 pi x).  Diverges on x in Z/2.
inline double u0_exact(const geom::half_plane_point& z) {
    geom::require_upper(z, "u0_exact");
    double xr = 2.0 * z.x;
    xr -= std::nearbyint(xr); // sin^2(2 pi x) has period 1/2 in x
    const double s = std::sin(pi * xr);
    if (std::abs(xr) < pole_epsilon)
        throw pole_proximity("u0_exact: z on a vertical mirror x in Z/2", xr);
    return 2.0 * pi * pi * z.y * z.y / (s * s);
}

/// U_r(z) = (y^2/r^2) sum_{p^2=1 (r)} S(x - p/r, y^2 - 1/r^2).
inline double u_r_term(std::uint64_t r, const geom::half_plane_point& z,
                       const sqrt_one_table& table) {
    geom::require_upper(z, "u_r_term");
    const double rr = static_cast<double>(r);
    const double t = z.y * z.y - 1.0 / (rr * rr);
    double acc = 0.0;
    for (const std::uint32_t p : table.roots(r)) {
        double xt = z.x - static_cast<double>(p) / rr;
        xt -= std::nearbyint(xt);
        try {
            acc += eval_S(xt, t);
        } catch (const pole_proximity& e) {
            throw pole_proximity("u_r_term: kernel pole at residue p/r", e.denom,
                                 static_cast<std::int64_t>(r), static_cast<std::int64_t>(p));
        }
    }
    return acc * z.y * z.y / (rr * rr);
}

/// Guard against evaluating on a mirror: checks the vertical lines x in Z/2
/// exactly and the curved mirrors with r <= min(r_limit, 100); the kernel's
/// own pole detection covers larger r at run time.
inline void assert_off_mirrors(const geom::half_plane_point& z, const sqrt_one_table& table,
                               std::uint64_t r_limit) {
    geom::require_upper(z, "assert_off_mirrors");
    double xr = 2.0 * z.x;
    xr -= std::nearbyint(xr);
    if (std::abs(xr) < pole_epsilon)
        throw pole_proximity("potential undefined on the vertical mirror x in Z/2", xr);
    const auto cap = std::min<std::uint64_t>({r_limit, 100, table.r_max()});
    for (std::uint64_t r = 1; r <= cap; ++r) {
        const double rr = static_cast<double>(r);
        for (const std::uint32_t rho : table.roots(r)) {
            // each integer lift p = rho + k r labels its own mirror, so scan
            // the lifts with p/r within one unit of x
            const auto k0 = static_cast<std::int64_t>(
                std::llround(z.x - static_cast<double>(rho) / rr));
            for (std::int64_t k = k0 - 1; k <= k0 + 1; ++k) {
                const std::int64_t p = static_cast<std::int64_t>(rho) +
                                       k * static_cast<std::int64_t>(r);
                const double u = z.x - static_cast<double>(p) / rr;
                const double d = rr * u * u + rr * z.y * z.y - 1.0 / rr;
                if (std::abs(d) < pole_epsilon)
                    throw pole_proximity("z lies on a mirror curve", d,
                                         static_cast<std::int64_t>(r), p);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// checkpoint sidecar ("UCKP": z, merged prefix at a chunk boundary)

struct checkpoint_state {
    double zx = 0.0, zy = 0.0;
    std::uint64_t r_done = 0;
    double sum = 0.0, comp = 0.0;
};

namespace detail {

inline constexpr std::uint64_t sweep_chunk = 4096;
inline constexpr std::uint16_t checkpoint_version = 1;

inline void write_checkpoint(const std::filesystem::path& path, const checkpoint_state& st) {
    unsigned char payload[40];
    auto put64 = [&](int off, std::uint64_t v) {
        for (int i = 0; i < 8; ++i) payload[off + i] = static_cast<unsigned char>(v >> (8 * i));
    };
    auto putf = [&](int off, double d) {
        std::uint64_t bits;
        std::memcpy(&bits, &d, 8);
        put64(off, bits);
    };
    putf(0, st.zx);
    putf(8, st.zy);
    put64(16, st.r_done);
    putf(24, st.sum);
    putf(32, st.comp);
    fnv1a h;
    h.update(payload, sizeof payload);

    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot write checkpoint: " + path.string());
        out.write("UCKP", 4);
        const unsigned char ver[2] = {checkpoint_version & 0xff, checkpoint_version >> 8};
        out.write(reinterpret_cast<const char*>(ver), 2);
        out.write(reinterpret_cast<const char*>(payload), sizeof payload);
        std::uint64_t dig = h.digest();
        unsigned char raw[8];
        for (int i = 0; i < 8; ++i) raw[i] = static_cast<unsigned char>(dig >> (8 * i));
        out.write(reinterpret_cast<const char*>(raw), 8);
        if (!out) throw io_error("short write to checkpoint: " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::optional<checkpoint_state> read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != "UCKP")
        throw io_error("bad magic in checkpoint: " + path.string());
    unsigned char ver[2];
    in.read(reinterpret_cast<char*>(ver), 2);
    if (!in || (ver[0] | (ver[1] << 8)) != checkpoint_version)
        throw io_error("unsupported checkpoint version in " + path.string());
    unsigned char payload[40];
    in.read(reinterpret_cast<char*>(payload), sizeof payload);
    unsigned char digraw[8];
    in.read(reinterpret_cast<char*>(digraw), 8);
    if (!in) throw io_error("truncated checkpoint: " + path.string());
    fnv1a h;
    h.update(payload, sizeof payload);
    std::uint64_t want = 0;
    for (int i = 0; i < 8; ++i) want |= static_cast<std::uint64_t>(digraw[i]) << (8 * i);
    if (want != h.digest()) throw io_error("checkpoint checksum mismatch: " + path.string());
    auto get64 = [&](int off) {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(payload[off + i]) << (8 * i);
        return v;
    };
    auto getf = [&](int off) {
        const std::uint64_t bits = get64(off);
        double d;
        std::memcpy(&d, &bits, 8);
        return d;
    };
    return checkpoint_state{getf(0), getf(8), get64(16), getf(24), getf(32)};
}

} // namespace detail

// ---------------------------------------------------------------------------
// the chunked r-sweep

struct sweep_result {
    /// (R', raw truncated value U0 + 2 sum_{r<=R'} U_r) at every requested
    /// record point, in increasing R'; always includes R itself.
    std::vector<std::pair<std::uint64_t, double>> values;
    std::uint64_t kernel_terms = 0;
};

/// Raw truncated sums at all record points, bit-reproducible for any thread
/// count.  Throws pole_proximity / table_too_small.
inline sweep_result u_raw_sweep(const geom::half_plane_point& z, std::uint64_t r_bound,
                                std::vector<std::uint64_t> record_points,
                                const sqrt_one_table& table, const eval_options& options = {}) {
    geom::require_upper(z, "u_raw_sweep");
    if (r_bound < 1) throw std::invalid_argument("u_raw_sweep: r_bound must be >= 1");
    if (table.r_max() < r_bound) throw table_too_small(r_bound, table.r_max());

    record_points.push_back(r_bound);
    std::sort(record_points.begin(), record_points.end());
    record_points.erase(std::unique(record_points.begin(), record_points.end()),
                        record_points.end());
    if (record_points.front() < 1 || record_points.back() > r_bound)
        throw std::invalid_argument("u_raw_sweep: record points outside [1, R]");

    const double u0 = u0_exact(z);

    constexpr std::uint64_t chunk_len = detail::sweep_chunk;
    const std::uint64_t n_chunks = (r_bound + chunk_len - 1) / chunk_len;

    // resume: the checkpointed prefix must sit on the chunk grid and below
    // the first record point
    kahan_sum prefix;
    std::uint64_t first_chunk = 0;
    if (options.checkpoint) {
        if (auto st = detail::read_checkpoint(*options.checkpoint)) {
            if (st->zx != z.x || st->zy != z.y)
                throw io_error("checkpoint was written for a different z");
            if (st->r_done % chunk_len != 0 || st->r_done > r_bound ||
                st->r_done >= record_points.front())
                throw io_error("checkpoint incompatible with this sweep");
            prefix.sum = st->sum;
            prefix.comp = st->comp;
            first_chunk = st->r_done / chunk_len;
        }
    }

    struct chunk_result {
        kahan_sum sum;
        std::uint64_t terms = 0;
        std::vector<std::pair<std::uint64_t, kahan_sum>> records;
        std::atomic<bool> done{false};
    };
    std::vector<chunk_result> chunks(n_chunks);

    std::atomic<std::uint64_t> next{first_chunk};
    std::atomic<bool> stop{false};
    std::mutex err_mutex;
    std::exception_ptr first_error;

    const double y2 = z.y * z.y;
    auto run_chunk = [&](std::uint64_t ci) {
        chunk_result& out = chunks[ci];
        const std::uint64_t lo = ci * chunk_len + 1;
        const std::uint64_t hi = std::min(r_bound, (ci + 1) * chunk_len);
        auto rec = std::lower_bound(record_points.begin(), record_points.end(), lo);
        for (std::uint64_t r = lo; r <= hi; ++r) {
            const double rr = static_cast<double>(r);
            const double t = y2 - 1.0 / (rr * rr);
            double ur = 0.0;
            for (const std::uint32_t p : table.roots(r)) {
                double xt = z.x - static_cast<double>(p) / rr;
                xt -= std::nearbyint(xt);
                try {
                    ur += eval_S(xt, t);
                } catch (const pole_proximity& e) {
                    throw pole_proximity("kernel pole inside the r-sweep", e.denom,
                                         static_cast<std::int64_t>(r),
                                         static_cast<std::int64_t>(p));
                }
                ++out.terms;
            }
            out.sum.add(ur * y2 / (rr * rr));
            if (rec != record_points.end() && *rec == r) {
                out.records.emplace_back(r, out.sum);
                ++rec;
            }
        }
        out.done.store(true, std::memory_order_release);
    };

    auto worker = [&] {
        while (!stop.load(std::memory_order_relaxed)) {
            const std::uint64_t ci = next.fetch_add(1);
            if (ci >= n_chunks) return;
            try {
                run_chunk(ci);
            } catch (...) {
                std::scoped_lock lk(err_mutex);
                if (!first_error) first_error = std::current_exception();
                stop.store(true);
                return;
            }
        }
    };

    unsigned n_threads = options.threads == 0
                             ? std::max(1u, std::thread::hardware_concurrency())
                             : options.threads;
    n_threads = static_cast<unsigned>(
        std::max<std::uint64_t>(1, std::min<std::uint64_t>(n_threads, n_chunks - first_chunk)));

    // last chunk index whose completion may still be checkpointed (the
    // checkpointed prefix must stay below the first record point)
    const std::uint64_t ck_limit =
        record_points.front() > 1 ? (record_points.front() - 1) / chunk_len : 0;

    if (n_threads <= 1) {
        std::uint64_t terms_since_ck = 0;
        for (std::uint64_t ci = first_chunk; ci < n_chunks; ++ci) {
            run_chunk(ci);
            terms_since_ck += chunks[ci].terms;
            if (options.checkpoint && ci + 1 <= ck_limit && terms_since_ck >= 1000000) {
                kahan_sum pre = prefix;
                for (std::uint64_t c = first_chunk; c <= ci; ++c) pre.merge(chunks[c].sum);
                detail::write_checkpoint(*options.checkpoint,
                                         {z.x, z.y, (ci + 1) * chunk_len, pre.sum, pre.comp});
                terms_since_ck = 0;
            }
        }
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        if (options.checkpoint) {
            // advance the checkpoint along the contiguous-completion frontier
            std::uint64_t ck_chunk = first_chunk;
            std::uint64_t terms_since_ck = 0;
            for (;;) {
                std::this_thread::sleep_for(std::chrono::milliseconds(100));
                if (stop.load()) break;
                std::uint64_t f = ck_chunk;
                while (f < n_chunks && chunks[f].done.load(std::memory_order_acquire)) {
                    terms_since_ck += chunks[f].terms;
                    ++f;
                }
                const std::uint64_t f_ck = std::min(f, ck_limit);
                if (f_ck > ck_chunk && terms_since_ck >= 1000000) {
                    kahan_sum pre = prefix;
                    for (std::uint64_t c = first_chunk; c < f_ck; ++c) pre.merge(chunks[c].sum);
                    detail::write_checkpoint(*options.checkpoint,
                                             {z.x, z.y, f_ck * chunk_len, pre.sum, pre.comp});
                    terms_since_ck = 0;
                }
                ck_chunk = f;
                if (f == n_chunks) break;
            }
        }
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    sweep_result res;
    res.values.reserve(record_points.size());
    std::uint64_t terms_done = 0;
    for (std::uint64_t ci = first_chunk; ci < n_chunks; ++ci) {
        for (const auto& [r, local] : chunks[ci].records) {
            kahan_sum at_r = prefix;
            at_r.merge(local);
            res.values.emplace_back(r, u0 + 2.0 * at_r.value());
        }
        prefix.merge(chunks[ci].sum);
        terms_done += chunks[ci].terms;
    }
    res.kernel_terms = terms_done;
    return res;
}

// ---------------------------------------------------------------------------
// the correction ladder

struct correction_context {
    double c_of_z = 0.0;  ///< eval_C(z)
    double s_star = 0.0;  ///< S*(x,y)
};

inline correction_context make_correction_context(const geom::half_plane_point& z,
                                                  correction_level level) {
    correction_context ctx;
    if (level == correction_level::c2) ctx.s_star = eval_S_star(z.x, z.y);
    if (level == correction_level::cinf || level == correction_level::averaged)
        ctx.c_of_z = eval_C(z);
    return ctx;
}

/// Tail-corrected value at truncation R' given the raw truncated sum there.
inline double apply_correction(correction_level level, const geom::half_plane_point& z,
                               std::uint64_t r_at, double raw, const correction_context& ctx) {
    if (level == correction_level::raw) return raw;
    const double R = static_cast<double>(r_at);
    const auto k = correction_constants();
    double v = raw + 6.0 / (pi * z.y) * std::log(R) / R;
    if (level == correction_level::c0) return v;
    v += pi / z.y * (k.c + k.c1) / R;
    switch (level) {
        case correction_level::c1:
            return v;
        case correction_level::c2:
            return v + 4.0 * z.y * z.y * ctx.s_star / R;
        case correction_level::cinf:
        case correction_level::averaged:
            // residues cluster around each rational direction from two
            // congruence classes, so the eta/E2 combination enters doubled
            return v + 2.0 * ctx.c_of_z / R;
        default:
            throw std::logic_error("apply_correction: bad level");
    }
}

// ---------------------------------------------------------------------------
// the public evaluator

inline potential_estimate u_truncated(const geom::half_plane_point& z,
                                      const truncation_scheme& scheme,
                                      const sqrt_one_table& table,
                                      const eval_options& options = {}) {
    if (scheme.r_bound < 1) throw std::invalid_argument("u_truncated: R must be >= 1");
    if (!(scheme.avg_window > 0.0 && scheme.avg_window < 1.0))
        throw std::invalid_argument("u_truncated: avg_window must be in (0,1)");
    if (table.r_max() < scheme.r_bound) throw table_too_small(scheme.r_bound, table.r_max());
    assert_off_mirrors(z, table, scheme.r_bound);

    const bool averaged = scheme.level == correction_level::averaged;
    std::vector<std::uint64_t> records = options.partial_points;
    std::uint64_t window_lo = scheme.r_bound;
    if (averaged) {
        window_lo = static_cast<std::uint64_t>(
            std::ceil((1.0 - scheme.avg_window) * static_cast<double>(scheme.r_bound)));
        window_lo = std::max<std::uint64_t>(window_lo, 1);
        const std::uint64_t stride = std::max<std::uint64_t>(scheme.avg_stride, 1);
        for (std::uint64_t r = window_lo; r < scheme.r_bound; r += stride) records.push_back(r);
    }

    const auto sweep = u_raw_sweep(z, scheme.r_bound, records, table, options);
    const auto ctx = make_correction_context(z, scheme.level);

    potential_estimate est;
    est.scheme = scheme;
    est.z = z;

    if (!averaged) {
        for (const auto& [r, raw] : sweep.values) {
            const double v = apply_correction(scheme.level, z, r, raw, ctx);
            if (r == scheme.r_bound) est.value = v;
            est.partials.emplace_back(r, v);
        }
        if (options.partial_points.empty()) est.partials.clear();
        return est;
    }

    kahan_sum mean;
    std::uint64_t count = 0;
    for (const auto& [r, raw] : sweep.values) {
        if (r < window_lo) continue;
        mean.add(apply_correction(correction_level::cinf, z, r, raw, ctx));
        ++count;
    }
    est.value = mean.value() / static_cast<double>(count);
    for (const std::uint64_t rp : options.partial_points) {
        for (const auto& [r, raw] : sweep.values)
            if (r == rp)
                est.partials.emplace_back(r, apply_correction(correction_level::cinf, z, r, raw, ctx));
    }
    return est;
}

/// Sequential double-double re-evaluation of the raw truncated sum, used to
/// validate the chunked compensated reduction on long runs.
inline double u_raw_double_double(const geom::half_plane_point& z, std::uint64_t r_bound,
                                  const sqrt_one_table& table) {
    geom::require_upper(z, "u_raw_double_double");
    if (table.r_max() < r_bound) throw table_too_small(r_bound, table.r_max());
    dd_sum acc;
    const double y2 = z.y * z.y;
    for (std::uint64_t r = 1; r <= r_bound; ++r) {
        const double rr = static_cast<double>(r);
        const double t = y2 - 1.0 / (rr * rr);
        double ur = 0.0;
        for (const std::uint32_t p : table.roots(r)) {
            double xt = z.x - static_cast<double>(p) / rr;
            xt -= std::nearbyint(xt);
            ur += eval_S(xt, t);
        }
        acc.add(ur * y2 / (rr * rr));
    }
    return u0_exact(z) + 2.0 * acc.value();
}

/// |U(z) - U(g z)| under the same truncation scheme.
inline double modularity_residual(const geom::half_plane_point& z, const geom::gl2z& g,
                                  const truncation_scheme& scheme, const sqrt_one_table& table,
                                  const eval_options& options = {}) {
    const auto a = u_truncated(z, scheme, table, options);
    const auto b = u_truncated(geom::apply(g, z), scheme, table, options);
    return std::abs(a.value - b.value);
}

// ---------------------------------------------------------------------------
// slower cross-check routes

/// Inner double sum of the level-sliced form at one level:
/// sum_{r=1}^{floor(4(l+1)/3)} sum_{s^2 = 4lr+4-3r^2} y^2 / [...]^2.
inline double level_slice_sum(const geom::half_plane_point& z, std::uint64_t ell) {
    const double zz = z.x * z.x + z.y * z.y;
    double acc = 0.0;
    const std::uint64_t r_hi = (4 * (ell + 1)) / 3;
    for (std::uint64_t r = 1; r <= r_hi; ++r) {
        const std::int64_t disc = static_cast<std::int64_t>(4 * ell * r + 4) -
                                  static_cast<std::int64_t>(3 * r * r);
        if (disc < 0) continue;
        const auto s0 = static_cast<std::int64_t>(
            std::llround(std::sqrt(static_cast<double>(disc))));
        std::int64_t s = -1;
        for (std::int64_t c = std::max<std::int64_t>(0, s0 - 1); c <= s0 + 1; ++c)
            if (c * c == disc) s = c;
        if (s < 0) continue;
        for (const std::int64_t sg : {s, -s}) {
            const double den = static_cast<double>(r) * zz -
                               static_cast<double>(static_cast<std::int64_t>(r) - sg) * z.x -
                               static_cast<double>(static_cast<std::int64_t>(r) + sg) / 2.0 +
                               static_cast<double>(ell);
            if (std::abs(den) < pole_epsilon)
                throw pole_proximity("level_slice_sum: mirror denominator", den,
                                     static_cast<std::int64_t>(r), 0);
            acc += z.y * z.y / (den * den);
            if (sg == 0) break;
        }
    }
    return acc;
}

/// Level-sliced evaluation U0 + 2 sum_{l<=ell_max} (slice sum).  Converges
/// much slower than the r-truncated route; cross-check only.
inline double u_by_level_slicing(const geom::half_plane_point& z, std::uint64_t ell_max) {
    geom::require_upper(z, "u_by_level_slicing");
    kahan_sum acc;
    for (std::uint64_t ell = 0; ell <= ell_max; ++ell) acc.add(level_slice_sum(z, ell));
    return u0_exact(z) + 2.0 * acc.value();
}

/// V_ell(x) = 1/2 sum_{alpha at level ell} (alpha . x)^-2 in Minkowski
/// coordinates, from the exact level enumeration.
inline double v_level_minkowski(std::int64_t ell, const geom::minkowski_point& x) {
    if (!(x.dot(x) < 0.0) || !(x.x0 > 0.0))
        throw std::invalid_argument("v_level_minkowski: point not inside the future lightcone");
    const auto level = roots::enumerate_level(ell < 0 ? -ell : ell); // V_{-l} = V_l
    kahan_sum acc;
    for (const auto& root : level) {
        const auto a = roots::embed(root);
        const double ax = -a[0] * x.x0 + a[1] * x.x1 + a[2] * x.x2;
        const double scale =
            std::abs(a[0] * x.x0) + std::abs(a[1] * x.x1) + std::abs(a[2] * x.x2);
        if (std::abs(ax) < pole_epsilon * scale)
            throw pole_proximity("v_level_minkowski: x on the mirror of root (" +
                                     std::to_string(root.ell) + "," + std::to_string(root.m) +
                                     "," + std::to_string(root.n) + ")",
                                 ax);
        acc.add(1.0 / (ax * ax));
    }
    return 0.5 * acc.value();
}

// ---------------------------------------------------------------------------
// Hecke route (discriminant-1 series)

/// Discriminant-1 series F1(z) truncated at A <= a_bound: the A = 0 stratum
/// pi^2 y^2 / sin^2(pi x) in closed form plus
/// sum_A (y^2/A^2) sum_{rho mod 2A, rho^2 = 1 mod 4A} S(x + rho/2A, y^2 - 1/4A^2).
inline double f1_series(const geom::half_plane_point& z, std::uint64_t a_bound,
                        const sqrt_one_table& table) {
    geom::require_upper(z, "f1_series");
    if (table.r_max() < 4 * a_bound) throw table_too_small(4 * a_bound, table.r_max());
    double xr = z.x - std::nearbyint(z.x);
    if (std::abs(xr) < pole_epsilon)
        throw pole_proximity("f1_series: z on a vertical mirror x in Z", xr);
    const double s = std::sin(pi * xr);
    kahan_sum acc;
    std::vector<std::uint32_t> residues;
    const double y2 = z.y * z.y;
    for (std::uint64_t a = 1; a <= a_bound; ++a) {
        residues.clear();
        for (const std::uint32_t p : table.roots(4 * a))
            residues.push_back(p % static_cast<std::uint32_t>(2 * a));
        std::sort(residues.begin(), residues.end());
        residues.erase(std::unique(residues.begin(), residues.end()), residues.end());
        const double aa = static_cast<double>(a);
        const double t = y2 - 1.0 / (4.0 * aa * aa);
        double inner = 0.0;
        for (const std::uint32_t rho : residues) {
            double xt = z.x + static_cast<double>(rho) / (2.0 * aa);
            xt -= std::nearbyint(xt);
            try {
                inner += eval_S(xt, t);
            } catch (const pole_proximity& e) {
                throw pole_proximity("f1_series: kernel pole", e.denom,
                                     static_cast<std::int64_t>(a),
                                     static_cast<std::int64_t>(rho));
            }
        }
        acc.add(inner * y2 / (aa * aa));
    }
    return pi * pi * y2 / (s * s) + acc.value();
}

/// |2 U(z,R) - [F1(2z) + F1(z/2) + F1((z+1)/2) - F1(z)]| with all series
/// truncated at the same coefficient bound R.  A finite-R convergence
/// diagnostic: the two truncations have different tail shapes, so the
/// residual decays like the tails themselves.
inline double hecke_identity_residual(const geom::half_plane_point& z, std::uint64_t r_bound,
                                      const sqrt_one_table& table,
                                      const eval_options& options = {}) {
    const auto u = u_truncated(z, {r_bound, correction_level::raw}, table, options);
    const geom::half_plane_point z2{2.0 * z.x, 2.0 * z.y};
    const geom::half_plane_point zh{z.x / 2.0, z.y / 2.0};
    const geom::half_plane_point zh1{(z.x + 1.0) / 2.0, z.y / 2.0};
    const double rhs = f1_series(z2, r_bound, table) + f1_series(zh, r_bound, table) +
                       f1_series(zh1, r_bound, table) - f1_series(z, r_bound, table);
    return std::abs(2.0 * u.value - rhs);
}

} // namespace kmc
