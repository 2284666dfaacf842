// kmc: command-line frontend for the AE3 Calogero potential toolkit.
//
// Subcommands: roots, potential {eval,table,grid}, dunkl scan,
// sieve {build,verify}, geometry reduce.  Exit codes: 0 success, 2 usage,
// 3 numerical (pole / tail certification), 4 I/O.  Errors print a
// machine-parsable `code=...` line on stderr.

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "kmc/dunkl.hpp"
#include "kmc/geometry.hpp"
#include "kmc/potential.hpp"
#include "kmc/roots.hpp"
#include "kmc/sieve.hpp"

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;
using kmc::geom::half_plane_point;

std::string fmt(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string fmt_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

struct output_target {
    std::optional<std::string> path;
    std::ofstream file;
    std::ostream& stream() {
        if (!path) return std::cout;
        if (!file.is_open()) {
            file.open(*path, std::ios::trunc);
            if (!file) throw kmc::io_error("cannot open output file: " + *path);
        }
        return file;
    }
};

half_plane_point parse_z(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos)
        throw CLI::ValidationError("--z", "expected X,Y");
    try {
        const double x = std::stod(s.substr(0, comma));
        const double y = std::stod(s.substr(comma + 1));
        if (!(y > 0.0)) throw CLI::ValidationError("--z", "Im z must be > 0");
        return {x, y};
    } catch (const std::invalid_argument&) {
        throw CLI::ValidationError("--z", "expected X,Y");
    }
}

std::vector<std::uint64_t> parse_u64_list(const std::string& s) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stoull(item));
    }
    if (out.empty()) throw CLI::ValidationError("--R", "expected a list of integers");
    return out;
}

kmc::correction_level parse_scheme(const std::string& s) {
    if (s == "raw") return kmc::correction_level::raw;
    if (s == "c0") return kmc::correction_level::c0;
    if (s == "c1") return kmc::correction_level::c1;
    if (s == "c2") return kmc::correction_level::c2;
    if (s == "cinf") return kmc::correction_level::cinf;
    if (s == "avg") return kmc::correction_level::averaged;
    throw CLI::ValidationError("--scheme", "unknown scheme '" + s + "'");
}

const char* scheme_name(kmc::correction_level lv) {
    switch (lv) {
        case kmc::correction_level::raw: return "raw";
        case kmc::correction_level::c0: return "c0";
        case kmc::correction_level::c1: return "c1";
        case kmc::correction_level::c2: return "c2";
        case kmc::correction_level::cinf: return "cinf";
        default: return "avg";
    }
}

std::optional<std::string> default_cache_path() {
    if (const char* env = std::getenv("KMC_SIEVE_CACHE"); env && *env)
        return std::string(env);
    return std::nullopt;
}

/// Load the sieve cache when it is present and large enough, otherwise build
/// (and write back through the cache path if one was given).
kmc::sqrt_one_table acquire_table(std::uint64_t need, const std::optional<std::string>& cache) {
    if (cache && fs::exists(*cache)) {
        auto t = kmc::sqrt_one_table::load(*cache);
        if (t.r_max() >= need) return t;
    }
    auto t = kmc::sqrt_one_table::build(need);
    if (cache) t.save(*cache);
    return t;
}

// ---------------------------------------------------------------------------
// roots

struct root_row {
    kmc::roots::cartan_root root;
    kmc::roots::reflection_triple triple;
    kmc::roots::dynkin_label dynkin;
    kmc::roots::weyl_orbit orbit;
    std::size_t rep;
};

int cmd_roots(const std::string& levels, const std::string& format, output_target& out) {
    std::int64_t lo = 0, hi = 0;
    {
        const auto colon = levels.find(':');
        try {
            if (colon == std::string::npos) {
                lo = hi = std::stoll(levels);
            } else {
                lo = std::stoll(levels.substr(0, colon));
                hi = std::stoll(levels.substr(colon + 1));
            }
        } catch (const std::exception&) {
            std::cerr << "code=usage msg=\"bad --levels\"\n";
            return 2;
        }
    }
    if (lo < 0 || hi < lo || hi > 10000) {
        std::cerr << "code=usage msg=\"--levels must satisfy 0 <= lo <= hi <= 10000\"\n";
        return 2;
    }

    std::vector<root_row> rows;
    for (std::int64_t ell = lo; ell <= hi; ++ell) {
        const auto orbits = kmc::roots::level_orbits(ell);
        for (std::size_t rep = 0; rep < orbits.size(); ++rep)
            for (const auto& r : orbits[rep])
                rows.push_back({r, kmc::roots::cartan_to_reflection(r), kmc::roots::dynkin_of(r),
                                kmc::roots::weyl_orbit_of(r), rep});
    }
    std::sort(rows.begin(), rows.end(),
              [](const root_row& a, const root_row& b) { return a.root < b.root; });

    auto& os = out.stream();
    if (format == "csv" || format == "text") {
        os << "ell,m,n,p,q,r,pbar,qbar,orbit\n";
        for (const auto& w : rows)
            os << w.root.ell << ',' << w.root.m << ',' << w.root.n << ',' << w.triple.p << ','
               << w.triple.q << ',' << w.triple.r << ',' << w.dynkin.pbar << ',' << w.dynkin.qbar
               << ',' << (w.orbit == kmc::roots::weyl_orbit::plus ? "+" : "-") << '\n';
    } else {
        json arr = json::array();
        for (const auto& w : rows)
            arr.push_back({{"ell", w.root.ell},
                           {"m", w.root.m},
                           {"n", w.root.n},
                           {"p", w.triple.p},
                           {"q", w.triple.q},
                           {"r", w.triple.r},
                           {"pbar", w.dynkin.pbar},
                           {"qbar", w.dynkin.qbar},
                           {"orbit", w.orbit == kmc::roots::weyl_orbit::plus ? "+" : "-"},
                           {"rep", w.rep}});
        os << arr.dump(2) << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------------------
// potential

struct potential_common {
    std::string z_str;
    std::optional<std::string> cache;
    unsigned threads = 0;
    bool reduce = false;

    half_plane_point z() const {
        auto z0 = parse_z(z_str);
        if (reduce) z0 = kmc::geom::reduce_to_fundamental(z0).first;
        return z0;
    }
};

int cmd_potential_eval(const potential_common& common, std::uint64_t R,
                       const std::string& scheme, double avg_window, std::uint64_t avg_stride,
                       const std::optional<std::string>& checkpoint, const std::string& format,
                       output_target& out) {
    const auto z = common.z();
    const auto level = parse_scheme(scheme);
    const auto table = acquire_table(R, common.cache);
    kmc::eval_options opt;
    opt.threads = common.threads;
    if (checkpoint) opt.checkpoint = fs::path(*checkpoint);
    kmc::truncation_scheme sch{R, level, avg_window, avg_stride};
    const auto est = kmc::u_truncated(z, sch, table, opt);

    auto& os = out.stream();
    if (format == "text") {
        os << "U(" << fmt(z.x) << "," << fmt(z.y) << ") R=" << R << " scheme="
           << scheme_name(level) << " = " << fmt(est.value) << '\n';
    } else if (format == "csv") {
        os << "x,y,R,scheme,value\n"
           << fmt(z.x) << ',' << fmt(z.y) << ',' << R << ',' << scheme_name(level) << ','
           << fmt(est.value) << '\n';
    } else {
        os << json{{"x", z.x}, {"y", z.y}, {"R", R}, {"scheme", scheme_name(level)},
                   {"value", est.value}}
                  .dump(2)
           << '\n';
    }
    return 0;
}

int cmd_potential_table(const potential_common& common, const std::string& r_list_str,
                        const std::string& schemes_str, bool reference_layout,
                        const std::string& format, output_target& out) {
    const auto z = common.z();
    auto r_list = parse_u64_list(r_list_str);
    std::sort(r_list.begin(), r_list.end());
    r_list.erase(std::unique(r_list.begin(), r_list.end()), r_list.end());
    const std::uint64_t r_max = r_list.back();

    std::vector<kmc::correction_level> schemes;
    {
        std::stringstream ss(schemes_str);
        std::string item;
        while (std::getline(ss, item, ',')) schemes.push_back(parse_scheme(item));
    }
    const auto table = acquire_table(r_max, common.cache);
    kmc::eval_options opt;
    opt.threads = common.threads;

    auto column_values = [&](const half_plane_point& zz,
                             kmc::correction_level lv) -> std::vector<double> {
        std::vector<double> col;
        if (lv == kmc::correction_level::averaged) {
            for (const auto R : r_list)
                col.push_back(kmc::u_truncated(zz, {R, lv}, table, opt).value);
            return col;
        }
        kmc::eval_options rec = opt;
        rec.partial_points = r_list;
        const auto est = kmc::u_truncated(zz, {r_max, lv}, table, rec);
        for (const auto R : r_list)
            for (const auto& [rp, v] : est.partials)
                if (rp == R) col.push_back(v);
        return col;
    };

    auto& os = out.stream();
    if (reference_layout) {
        // the reference table layout: one block per ladder level, rows for z
        // and its inversion image -1/z, 8 decimals (13 for the refined level)
        const auto zinv =
            kmc::geom::apply(kmc::geom::gl2z::S(), z);
        const struct {
            kmc::correction_level lv;
            const char* label;
            int decimals;
        } blocks[] = {{kmc::correction_level::raw, "U", 8},
                      {kmc::correction_level::c0, "U0", 8},
                      {kmc::correction_level::c1, "U1", 8},
                      {kmc::correction_level::c2, "U2", 8},
                      {kmc::correction_level::cinf, "Uinf", 13}};
        for (const auto& b : blocks) {
            os << "# " << b.label << "(z,R)\n";
            os << "R";
            for (const auto R : r_list) os << '\t' << R;
            os << '\n';
            for (const auto& [tag, zz] : {std::pair<const char*, half_plane_point>{"z", z},
                                          {"Sz", zinv}}) {
                const auto col = column_values(zz, b.lv);
                os << tag;
                for (const auto v : col) os << '\t' << fmt_fixed(v, b.decimals);
                os << '\n';
            }
            os << '\n';
        }
        return 0;
    }

    std::vector<std::vector<double>> cols;
    for (const auto lv : schemes) cols.push_back(column_values(z, lv));

    if (format == "json") {
        json rows = json::array();
        for (std::size_t i = 0; i < r_list.size(); ++i) {
            json row{{"R", r_list[i]}};
            for (std::size_t c = 0; c < schemes.size(); ++c)
                row[scheme_name(schemes[c])] = cols[c][i];
            rows.push_back(row);
        }
        os << rows.dump(2) << '\n';
    } else {
        os << "R";
        for (const auto lv : schemes) os << ',' << scheme_name(lv);
        os << '\n';
        for (std::size_t i = 0; i < r_list.size(); ++i) {
            os << r_list[i];
            for (std::size_t c = 0; c < schemes.size(); ++c) os << ',' << fmt(cols[c][i]);
            os << '\n';
        }
    }
    return 0;
}

int cmd_potential_grid(const potential_common& common, const std::string& re_spec,
                       const std::string& im_spec, std::uint64_t R, const std::string& scheme,
                       output_target& out) {
    auto parse_range = [](const std::string& s, const char* what) {
        double a = 0, b = 0;
        std::uint64_t n = 0;
        std::stringstream ss(s);
        std::string p1, p2, p3;
        if (!std::getline(ss, p1, ':') || !std::getline(ss, p2, ':') || !std::getline(ss, p3))
            throw CLI::ValidationError(what, "expected a:b:n");
        a = std::stod(p1);
        b = std::stod(p2);
        n = std::stoull(p3);
        if (n < 1) throw CLI::ValidationError(what, "n must be >= 1");
        return std::tuple<double, double, std::uint64_t>{a, b, n};
    };
    const auto [xa, xb, nx] = parse_range(re_spec, "--re");
    const auto [ya, yb, ny] = parse_range(im_spec, "--im");
    if (!(ya > 0.0)) throw CLI::ValidationError("--im", "grid must lie in the upper half-plane");

    const auto level = parse_scheme(scheme);
    const auto table = acquire_table(R, common.cache);
    kmc::eval_options opt;
    opt.threads = common.threads;

    auto& os = out.stream();
    os << "x,y,u,log_u\n";
    for (std::uint64_t j = 0; j < ny; ++j) {
        const double y = ny == 1 ? ya : ya + (yb - ya) * static_cast<double>(j) /
                                                  static_cast<double>(ny - 1);
        for (std::uint64_t i = 0; i < nx; ++i) {
            const double x = nx == 1 ? xa : xa + (xb - xa) * static_cast<double>(i) /
                                                      static_cast<double>(nx - 1);
            os << fmt(x) << ',' << fmt(y) << ',';
            try {
                const auto est = kmc::u_truncated({x, y}, {R, level}, table, opt);
                os << fmt(est.value) << ',' << fmt(std::log(est.value)) << '\n';
            } catch (const kmc::pole_proximity&) {
                os << "nan,nan\n"; // masked: the point sits on a mirror
            }
        }
    }
    return 0;
}

// ---------------------------------------------------------------------------
// dunkl

int cmd_dunkl_scan(std::int64_t m, std::int64_t ell_max, std::int64_t K,
                   const std::optional<std::string>& points_path, const std::string& format,
                   output_target& out) {
    if (m < 0 || ell_max < 1) {
        std::cerr << "code=usage msg=\"--m must be >= 0 and --ell-max >= 1\"\n";
        return 2;
    }
    std::vector<kmc::dunkl::plane_point> pts;
    if (points_path) {
        std::ifstream in(*points_path);
        if (!in) throw kmc::io_error("cannot open points file: " + *points_path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
            const auto comma = line.find(',');
            if (comma == std::string::npos) continue;
            pts.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
        }
        if (pts.empty()) throw kmc::io_error("no points parsed from " + *points_path);
    } else {
        pts = {{1.0, 0.3}, {0.8, 0.45}, {-1.2, 0.7}, {0.6, -1.7}, {1.5, 1.1}};
    }
    if (K == 0) {
        if (m >= 3) {
            const double zp = (static_cast<double>(m) +
                               std::sqrt(static_cast<double>(m * m - 4))) / 2.0;
            const auto k_need = static_cast<std::int64_t>(std::ceil(16.0 / std::log10(zp * zp)));
            const auto k_cap = static_cast<std::int64_t>(
                std::floor(std::log(9.2e18) / std::log(zp))) - 2;
            K = std::min(ell_max + k_need + 4, k_cap);
        } else {
            K = ell_max + 8;
        }
    }

    auto& os = out.stream();
    json arr = json::array();
    if (format != "json") os << "u,v,ell,c_ell,tail_bound,trace_ell\n";
    for (const auto& pt : pts)
        for (std::int64_t ell = 1; ell <= ell_max; ++ell) {
            const auto c = kmc::dunkl::y_coefficient(m, ell, pt, K);
            const auto t = kmc::dunkl::trace_coefficient(m, ell, pt, K);
            if (format == "json")
                arr.push_back({{"u", pt.u},
                               {"v", pt.v},
                               {"ell", ell},
                               {"c_ell", c.value},
                               {"tail_bound", c.tail_bound},
                               {"trace_ell", t.value}});
            else
                os << fmt(pt.u) << ',' << fmt(pt.v) << ',' << ell << ',' << fmt(c.value) << ','
                   << fmt(c.tail_bound) << ',' << fmt(t.value) << '\n';
        }
    if (format == "json") os << arr.dump(2) << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// sieve + geometry

int cmd_sieve_build(std::uint64_t R, const std::string& out_path) {
    const auto t = kmc::sqrt_one_table::build(R);
    t.save(out_path);
    std::cout << "wrote " << out_path << " r_max=" << t.r_max()
              << " total_roots=" << t.total_roots() << '\n';
    return 0;
}

int cmd_sieve_verify(const std::optional<std::string>& path) {
    auto p = path;
    if (!p) p = default_cache_path();
    if (!p) {
        std::cerr << "code=usage msg=\"no path given and KMC_SIEVE_CACHE unset\"\n";
        return 2;
    }
    const auto t = kmc::sqrt_one_table::load(*p);
    std::cout << "OK " << *p << " r_max=" << t.r_max() << " total_roots=" << t.total_roots()
              << '\n';
    return 0;
}

int cmd_geometry_reduce(const std::string& z_str, const std::string& format,
                        output_target& out) {
    const auto z = parse_z(z_str);
    const auto [zr, g] = kmc::geom::reduce_to_fundamental(z);
    std::string name = "";
    if (g == kmc::geom::gl2z::identity()) name = "id";
    else if (g == kmc::geom::gl2z::s3()) name = "s3";
    else if (g == kmc::geom::gl2z::S()) name = "S";
    else if (g.c == 0 && g.a == 1 && g.d == 1) name = "T^" + std::to_string(g.b);

    auto& os = out.stream();
    if (format == "json") {
        os << json{{"x", zr.x},
                   {"y", zr.y},
                   {"g", {{"a", g.a}, {"b", g.b}, {"c", g.c}, {"d", g.d}}},
                   {"det", g.det()},
                   {"name", name}}
                  .dump(2)
           << '\n';
    } else {
        os << "z = " << fmt(zr.x) << ',' << fmt(zr.y) << '\n';
        os << "g = [" << g.a << ' ' << g.b << "; " << g.c << ' ' << g.d << "] det=" << g.det();
        if (!name.empty()) os << ' ' << name;
        os << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"AE3 Calogero potential toolkit"};
    app.require_subcommand(1);

    std::string format = "text";
    output_target out;
    app.add_option("--format", format, "output format")
        ->check(CLI::IsMember({"text", "csv", "json"}))
        ->capture_default_str();
    std::string out_path;
    app.add_option("--out", out_path, "write output to a file instead of stdout");

    // roots
    auto* roots_cmd = app.add_subcommand("roots", "enumerate real roots by level");
    std::string levels;
    roots_cmd->add_option("--levels", levels, "level range lo:hi")->required();

    // potential
    auto* pot = app.add_subcommand("potential", "evaluate the half-plane potential");
    pot->require_subcommand(1);
    potential_common common;
    std::optional<std::string> cache_opt;

    auto add_eval_opts = [&](CLI::App* c) {
        c->add_option("--sieve-cache", cache_opt, "sieve cache file (default $KMC_SIEVE_CACHE)");
        c->add_option("--threads", common.threads, "worker count (0 = auto)");
    };
    auto add_common = [&](CLI::App* c) {
        c->add_option("--z", common.z_str, "evaluation point X,Y")->required();
        c->add_flag("--reduce", common.reduce, "reduce z into the fundamental domain first");
        add_eval_opts(c);
    };

    auto* ev = pot->add_subcommand("eval", "single evaluation");
    add_common(ev);
    std::uint64_t R = 10000;
    std::string scheme = "cinf";
    double avg_window = 1.0 / 3.0;
    std::uint64_t avg_stride = 1;
    std::optional<std::string> checkpoint;
    ev->add_option("--R", R, "truncation bound")->required();
    ev->add_option("--scheme", scheme, "raw|c0|c1|c2|cinf|avg")->capture_default_str();
    ev->add_option("--avg-window", avg_window, "averaging window fraction");
    ev->add_option("--avg-stride", avg_stride, "averaging subsample stride");
    ev->add_option("--checkpoint", checkpoint, "checkpoint sidecar path");

    auto* tbl = pot->add_subcommand("table", "truncation table across R values");
    add_common(tbl);
    std::string r_list = "10000,100000";
    std::string schemes = "raw,cinf";
    bool reference_layout = false;
    tbl->add_option("--R-list,--R", r_list, "comma-separated R values")->capture_default_str();
    tbl->add_option("--scheme", schemes, "comma-separated schemes")->capture_default_str();
    tbl->add_flag("--paper-tables", reference_layout,
                  "emit the reference-table layout (z and -1/z, fixed decimals)");

    auto* grid = pot->add_subcommand("grid", "potential samples on a rectangular grid");
    add_eval_opts(grid);
    std::string re_spec, im_spec;
    std::uint64_t grid_R = 2000;
    std::string grid_scheme = "cinf";
    grid->add_option("--re", re_spec, "real range a:b:n")->required();
    grid->add_option("--im", im_spec, "imaginary range a:b:n")->required();
    grid->add_option("--R", grid_R, "truncation bound")->capture_default_str();
    grid->add_option("--scheme", grid_scheme, "correction scheme")->capture_default_str();

    // dunkl
    auto* dunkl = app.add_subcommand("dunkl", "rank-2 plane obstruction scans");
    auto* scan = dunkl->add_subcommand("scan", "tabulate c_ell and trace coefficients");
    std::int64_t scan_m = 3, scan_ell_max = 3, scan_K = 0;
    std::optional<std::string> points_path;
    scan->add_option("--m", scan_m, "plane Gram value |alpha.beta|")->required();
    scan->add_option("--ell-max", scan_ell_max, "largest group-element index")->required();
    scan->add_option("--K", scan_K, "window half-width (0 = auto)");
    scan->add_option("--points", points_path, "CSV file of u,v sample points");

    // sieve
    auto* sieve = app.add_subcommand("sieve", "square-roots-of-unity table management");
    sieve->require_subcommand(1);
    auto* sbuild = sieve->add_subcommand("build", "build and save a table");
    std::uint64_t sieve_R = 0;
    std::string sieve_out;
    sbuild->add_option("--R", sieve_R, "largest modulus")->required();
    sbuild->add_option("--out", sieve_out, "output path")->required();
    auto* sverify = sieve->add_subcommand("verify", "check a cache file");
    std::optional<std::string> sieve_in;
    sverify->add_option("path", sieve_in, "cache path (default $KMC_SIEVE_CACHE)");

    // geometry
    auto* geo = app.add_subcommand("geometry", "half-plane utilities");
    auto* reduce = geo->add_subcommand("reduce", "reduce into the fundamental domain");
    std::string geo_z;
    reduce->add_option("--z", geo_z, "point X,Y")->required();

    // let --format/--out given after a subcommand reach the global options
    for (auto* sub : {roots_cmd, pot, ev, tbl, grid, dunkl, scan, sieve, sbuild, sverify, geo,
                      reduce})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "code=usage msg=\"" << e.what() << "\"\n";
        return 2;
    }

    if (!out_path.empty()) out.path = out_path;
    if (!cache_opt) cache_opt = default_cache_path();
    common.cache = cache_opt;

    try {
        if (app.got_subcommand(roots_cmd)) return cmd_roots(levels, format, out);
        if (pot->got_subcommand(ev))
            return cmd_potential_eval(common, R, scheme, avg_window, avg_stride, checkpoint,
                                      format, out);
        if (pot->got_subcommand(tbl))
            return cmd_potential_table(common, r_list, schemes, reference_layout, format, out);
        if (pot->got_subcommand(grid))
            return cmd_potential_grid(common, re_spec, im_spec, grid_R, grid_scheme, out);
        if (dunkl->got_subcommand(scan))
            return cmd_dunkl_scan(scan_m, scan_ell_max, scan_K, points_path, format, out);
        if (sieve->got_subcommand(sbuild)) return cmd_sieve_build(sieve_R, sieve_out);
        if (sieve->got_subcommand(sverify)) return cmd_sieve_verify(sieve_in);
        if (geo->got_subcommand(reduce)) return cmd_geometry_reduce(geo_z, format, out);
        std::cerr << "code=usage msg=\"no subcommand\"\n";
        return 2;
    } catch (const kmc::pole_proximity& e) {
        std::cerr << "code=pole_proximity r=" << e.r << " p=" << e.p << " msg=\"" << e.what()
                  << "\"\n";
        return 3;
    } catch (const kmc::tail_not_certified& e) {
        std::cerr << "code=tail_not_certified msg=\"" << e.what() << "\"\n";
        return 3;
    } catch (const kmc::table_too_small& e) {
        std::cerr << "code=table_too_small msg=\"" << e.what() << "\"\n";
        return 3;
    } catch (const kmc::sequence_overflow& e) {
        std::cerr << "code=sequence_overflow msg=\"" << e.what() << "\"\n";
        return 3;
    } catch (const kmc::memory_budget_exceeded& e) {
        std::cerr << "code=memory_budget msg=\"" << e.what() << "\"\n";
        return 4;
    } catch (const kmc::io_error& e) {
        std::cerr << "code=io_error msg=\"" << e.what() << "\"\n";
        return 4;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "code=io_error msg=\"" << e.what() << "\"\n";
        return 4;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "code=usage msg=\"" << e.what() << "\"\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "code=usage msg=\"" << e.what() << "\"\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "code=internal msg=\"" << e.what() << "\"\n";
        return 1;
    }
}
