#pragma once

// Command-line front end: simulate | converge | verify-bounds | selftest.
//
// run_cli is invokable in-process (tests drive it directly to pin down exit
// codes and byte-identical outputs); tools/main.cpp is a thin wrapper.
//
// Exit codes: 0 success, 1 selftest failure, 2 configuration error,
// 3 I/O error.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stburgers/analysis.hpp"
#include "stburgers/config.hpp"
#include "stburgers/scheme.hpp"

namespace stburgers {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kOutDirEnv = "STBURGERS_OUT";

namespace cli_detail {

inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Writes a file atomically enough for our purposes and returns its checksum.
inline std::uint64_t write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed for '" + path.string() + "'");
    return fnv1a(content);
}

struct CliOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> paths;
    std::string out_dir;
    unsigned threads = 1;
};

// The manifest echoes the config verbatim plus the effective overrides, which
// is exactly what a byte-for-byte re-run needs.
struct ManifestData {
    std::string command;
    RunConfig cfg;
    unsigned threads = 1;
    double wall_ms = 0.0;
    std::map<std::string, double> level_ms;
    std::map<std::string, std::string> checksums;
};

inline std::string render_manifest(const ManifestData& m) {
    nlohmann::json j;
    j["version"] = kVersion;
    j["command"] = m.command;
    j["config_text"] = m.cfg.config_text;
    j["seed"] = m.cfg.seed;
    j["paths"] = m.cfg.paths;
    j["threads"] = m.threads;
    j["wall_ms"] = m.wall_ms;
    j["level_ms"] = m.level_ms;
    j["checksums"] = m.checksums;
    return j.dump(2) + "\n";
}

// --config may name either a config file or a previously written
// manifest.json; in the latter case the embedded config text and the
// recorded seed/paths overrides are replayed.
inline RunConfig load_config_or_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError({"cannot open config file '" + path + "'"});
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError({std::string("manifest parse error: ") + e.what()});
        }
        if (!j.contains("config_text"))
            throw ConfigError({"manifest is missing the config_text field"});
        RunConfig cfg = parse_config_text(j["config_text"].get<std::string>());
        if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("paths")) cfg.paths = j["paths"].get<std::size_t>();
        return cfg;
    }
    return parse_config_text(text);
}

inline std::filesystem::path resolve_out_dir(const CliOptions& opt, const RunConfig& cfg) {
    if (!opt.out_dir.empty()) return opt.out_dir;
    if (!cfg.out_dir.empty()) return cfg.out_dir;
    if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
    return "out";
}

inline std::vector<std::uint64_t> seed_list(std::uint64_t base, std::size_t n) {
    std::vector<std::uint64_t> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = base + i;
    return s;
}

using Clock = std::chrono::steady_clock;

inline double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// subcommands

inline int cmd_simulate(const CliOptions& opt, std::ostream& out, std::ostream& err) {
    const auto t0 = Clock::now();
    RunConfig cfg = load_config_or_manifest(opt.config_path);
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.paths) cfg.paths = *opt.paths;

    const int level = cfg.levels.back();
    NoiseHierarchy noise{cfg.seed, cfg.n_max, cfg.model.T};
    const auto tl0 = Clock::now();
    const TrajectoryRecord tr = simulate_path(cfg.model, noise, level);
    const double lvl_ms = ms_since(tl0);

    std::ostringstream csv;
    csv << "t,norm_H,norm_Hrho,psi_norm_Hrho,indicator\n";
    for (std::size_t m = 0; m < tr.times.size(); ++m)
        csv << fmt17(tr.times[m]) << ',' << fmt17(tr.norm_H[m]) << ',' << fmt17(tr.norm_X_Hrho[m])
            << ',' << fmt17(tr.norm_Psi_Hrho[m]) << ',' << int(tr.indicator[m]) << '\n';

    const auto dir = resolve_out_dir(opt, cfg);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "'");

    ManifestData man{"simulate", cfg, opt.threads, 0.0, {}, {}};
    man.level_ms["level_" + std::to_string(level)] = lvl_ms;
    man.checksums["trajectory.csv"] = hex64(write_file(dir / "trajectory.csv", csv.str()));
    man.wall_ms = ms_since(t0);
    write_file(dir / "manifest.json", render_manifest(man));

    out << "simulate: level " << level << ", " << tr.times.size() - 1 << " steps -> "
        << (dir / "trajectory.csv").string() << "\n";
    (void)err;
    return 0;
}

inline int cmd_converge(const CliOptions& opt, std::ostream& out, std::ostream& err) {
    const auto t0 = Clock::now();
    RunConfig cfg = load_config_or_manifest(opt.config_path);
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.paths) cfg.paths = *opt.paths;
    if (cfg.levels.size() < 3)
        throw ConfigError({"converge requires at least 3 levels (rate undefined otherwise)"});
    if (cfg.paths < 8) throw ConfigError({"converge requires at least 8 paths"});

    const auto seeds = seed_list(cfg.seed, cfg.paths);
    const ErrorReport rep =
        convergence_study(cfg.model, seeds, cfg.levels, cfg.n_max, cfg.model.q_moment, opt.threads);
    const RateFit fit = rate_fit(rep);

    // single-path per-level timing samples (the MC run itself is reduced in a
    // fixed order, so it is not instrumented per level)
    ManifestData man{"converge", cfg, opt.threads, 0.0, {}, {}};
    {
        NoiseHierarchy noise{cfg.seed, cfg.n_max, cfg.model.T};
        for (int lvl : cfg.levels) {
            const auto tl0 = Clock::now();
            simulate_path(cfg.model, noise, lvl);
            man.level_ms["level_" + std::to_string(lvl) + "_per_path"] = ms_since(tl0);
        }
    }

    std::ostringstream csv;
    csv << "level,N,h,q,strong_error,std_err,pathwise_p50,pathwise_p90,pathwise_max\n";
    for (const auto& le : rep.levels)
        csv << le.level << ',' << le.N << ',' << fmt17(le.h) << ',' << fmt17(rep.q) << ','
            << fmt17(le.strong_error) << ',' << fmt17(le.std_err) << ',' << fmt17(le.pathwise_p50)
            << ',' << fmt17(le.pathwise_p90) << ',' << fmt17(le.pathwise_max) << '\n';

    nlohmann::json rj;
    rj["rate"] = fit.rate;
    rj["intercept"] = fit.intercept;
    rj["r_squared"] = fit.r_squared;
    rj["q"] = rep.q;
    rj["paths"] = rep.paths;
    rj["ref_level"] = rep.ref_level;
    rj["monotone_fraction"] = rep.monotone_fraction;

    const auto dir = resolve_out_dir(opt, cfg);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "'");

    man.checksums["errors.csv"] = hex64(write_file(dir / "errors.csv", csv.str()));
    man.checksums["rates.json"] = hex64(write_file(dir / "rates.json", rj.dump(2) + "\n"));
    man.wall_ms = ms_since(t0);
    write_file(dir / "manifest.json", render_manifest(man));

    out << "converge: " << rep.paths << " paths, levels";
    for (const auto& le : rep.levels) out << ' ' << le.level;
    out << ", fitted rate " << fit.rate << " -> " << (dir / "errors.csv").string() << "\n";
    (void)err;
    return 0;
}

inline int cmd_verify_bounds(const CliOptions& opt, std::ostream& out, std::ostream& err) {
    const auto t0 = Clock::now();
    RunConfig cfg = load_config_or_manifest(opt.config_path);
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.paths) cfg.paths = *opt.paths;

    const auto seeds = seed_list(cfg.seed, cfg.paths);
    BoundConstants bc = cfg.bounds;
    if (bc.theta <= 0.0) bc.theta = default_theta(cfg.model, bc.eta, bc.l4_embedding);
    if (bc.c_neg <= 0.0)
        bc.c_neg = negative_norm_constant(cfg.model.gamma, cfg.model.burgers(), bc.tail_tol);

    const std::size_t nl = cfg.levels.size();
    ManifestData man{"verify-bounds", cfg, opt.threads, 0.0, {}, {}};
    std::vector<std::vector<AprioriResult>> res(seeds.size(), std::vector<AprioriResult>(nl));
    for (std::size_t li = 0; li < nl; ++li) {
        const auto tl0 = Clock::now();
        run_parallel(seeds.size(), opt.threads, [&](std::size_t si) {
            NoiseHierarchy noise{seeds[si], cfg.n_max, cfg.model.T};
            const TrajectoryRecord tr = simulate_path(cfg.model, noise, cfg.levels[li]);
            res[si][li] = apriori_check(tr, bc, cfg.model);
        });
        man.level_ms["level_" + std::to_string(cfg.levels[li])] = ms_since(tl0);
    }

    std::ostringstream csv;
    csv << "seed,level,lhs_max,rhs,margin,holds,overflow\n";
    double min_margin = std::numeric_limits<double>::infinity();
    bool all_hold = true;
    for (std::size_t si = 0; si < seeds.size(); ++si)
        for (std::size_t li = 0; li < nl; ++li) {
            const auto& r = res[si][li];
            csv << seeds[si] << ',' << cfg.levels[li] << ',' << fmt17(r.lhs_max) << ','
                << fmt17(r.rhs) << ',' << fmt17(r.margin) << ',' << (r.holds ? 1 : 0) << ','
                << (r.overflow ? 1 : 0) << '\n';
            min_margin = std::min(min_margin, r.margin);
            all_hold = all_hold && r.holds;
        }
    csv << "summary,all," << ',' << ',' << fmt17(min_margin) << ',' << (all_hold ? 1 : 0) << ','
        << '\n';

    const auto dir = resolve_out_dir(opt, cfg);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "'");
    man.checksums["bounds.csv"] = hex64(write_file(dir / "bounds.csv", csv.str()));
    man.wall_ms = ms_since(t0);
    write_file(dir / "manifest.json", render_manifest(man));

    out << "verify-bounds: " << seeds.size() << " paths x " << nl << " levels, min margin "
        << min_margin << ", all hold: " << (all_hold ? "yes" : "NO") << "\n";
    (void)err;
    return 0;
}

// ---------------------------------------------------------------------------
// selftest: fast invariant and oracle-equivalence battery

inline SpectralField random_field(std::uint64_t tag, std::size_t dim, double scale = 1.0) {
    SpectralField v(dim);
    for (std::size_t k = 0; k < dim; ++k) {
        const std::uint64_t u = rng_detail::mix64(tag * 0x9e3779b97f4a7c15ull + k + 1);
        v[k] = scale * (2.0 * rng_detail::to_unit_open(u) - 1.0);
    }
    return v;
}

inline int cmd_selftest(std::ostream& out, std::ostream& err) {
    std::vector<std::string> failures;
    auto check = [&](const std::string& name, bool ok) {
        out << (ok ? "[ok]   " : "[FAIL] ") << name << "\n";
        if (!ok) failures.push_back(name);
    };
    const OperatorSpec op{1.0, 0.0};
    const BurgersSpec b{1.0, op};

    // nonlinearity oracle equivalence
    {
        double worst = 0.0;
        for (std::uint64_t i = 0; i < 100; ++i) {
            const std::size_t dim = 1 + (rng_detail::mix64(i) % 32);
            const SpectralField v = random_field(i + 1, dim);
            const SpectralField fast = burgers_f(v, b, 2 * dim);
            const SpectralField exact = burgers_f_exact(v, b);
            for (std::size_t k = 0; k < 2 * dim; ++k)
                worst = std::max(worst, std::abs(fast[k] - exact[k]));
        }
        check("nonlinearity oracle equivalence", worst <= 1e-11);
    }

    // semigroup properties
    {
        const SpectralField v = random_field(7, 16);
        const SpectralField ab = apply_semigroup(apply_semigroup(v, 0.3, op), 0.2, op);
        const SpectralField once = apply_semigroup(v, 0.5, op);
        double worst = 0.0;
        for (std::size_t k = 0; k < 16; ++k) worst = std::max(worst, std::abs(ab[k] - once[k]));
        const bool contraction = h_norm(apply_semigroup(v, 0.1, op)) <= h_norm(v);
        check("semigroup composition and contraction", worst <= 1e-12 && contraction);
    }

    // OU variance, mode 1 at T = 1
    {
        const std::size_t n_seeds = 2000;
        std::vector<double> samples(n_seeds);
        for (std::size_t s = 0; s < n_seeds; ++s) {
            NoiseHierarchy noise{0xabc000 + s, 4, 1.0};
            const auto O = stochastic_convolution(noise, 4, op);
            samples[s] = O.back()[0];
        }
        const double mean = pairwise_sum(samples) / n_seeds;
        double var = 0.0;
        for (double x : samples) var += (x - mean) * (x - mean);
        var /= (n_seeds - 1);
        const double lam = eigenvalue(1, op);
        const double target = -std::expm1(-2.0 * lam) / (2.0 * lam);
        const double se = target * std::sqrt(2.0 / (n_seeds - 1));
        check("OU variance", std::abs(var - target) <= 5.0 * se);
    }

    // coupling telescope
    {
        NoiseHierarchy noise{99, 6, 1.0};
        const auto fine = stochastic_convolution(noise, 5, op);
        const auto coarse = stochastic_convolution(noise, 4, op);
        bool ok = true;
        for (std::size_t m = 0; m < coarse.size(); ++m)
            for (std::size_t k = 0; k < coarse[m].dim(); ++k)
                ok = ok && coarse[m][k] == fine[2 * m][k];
        check("coupling telescope", ok);
    }

    // grid-point equivalence of the stepper and the trajectory recursion
    {
        ModelParams p;
        NoiseHierarchy noise{5, 8, 1.0};
        const TrajectoryRecord tr = simulate_path(p, noise, 5);
        double worst = 0.0;
        for (std::size_t m : {std::size_t{0}, std::size_t{13}, std::size_t{27}}) {
            const auto [next, ind] =
                step(tr.X[m], tr.procs.Psi[m], tr.procs.O[m], tr.procs.O[m + 1], p, 5);
            (void)ind;
            for (std::size_t k = 0; k < next.dim(); ++k)
                worst = std::max(worst, std::abs(next[k] - tr.X[m + 1][k]));
        }
        check("grid-point equivalence", worst <= 1e-12);
    }

    // rate_fit on a planted power law
    {
        ErrorReport rep;
        rep.q = 2.0;
        for (int l = 3; l <= 7; ++l) {
            LevelError le;
            le.level = l;
            le.h = std::pow(2.0, -l);
            le.strong_error = 0.37 * std::pow(le.h, 1.25);
            rep.levels.push_back(le);
        }
        const RateFit f = rate_fit(rep);
        check("rate_fit planted power law",
              std::abs(f.rate - 1.25) <= 1e-9 && f.r_squared > 1.0 - 1e-12);
    }

    if (!failures.empty()) {
        err << "selftest failures:";
        for (const auto& f : failures) err << ' ' << f << ';';
        err << "\n";
        return 1;
    }
    out << "selftest: all checks passed\n";
    return 0;
}

} // namespace cli_detail

inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    using namespace cli_detail;
    CLI::App app{"Spectral Galerkin exponential Euler solver for a stochastic "
                 "Burgers-type equation"};
    app.require_subcommand(1);

    CliOptions opt;
    std::uint64_t seed_val = 0, paths_val = 0;
    bool seed_set = false, paths_set = false;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* c = sub->add_option("--config", opt.config_path, "configuration file or manifest");
        if (needs_config) c->required();
        sub->add_option("--seed", seed_val, "override monte_carlo.seed")
            ->each([&](const std::string&) { seed_set = true; });
        sub->add_option("--paths", paths_val, "override monte_carlo.paths")
            ->each([&](const std::string&) { paths_set = true; });
        sub->add_option("--out", opt.out_dir, "output directory");
        sub->add_option("--threads", opt.threads, "worker threads");
    };

    CLI::App* sim = app.add_subcommand("simulate", "one trajectory at the finest config level");
    CLI::App* conv = app.add_subcommand("converge", "coupled Monte Carlo convergence study");
    CLI::App* vb = app.add_subcommand("verify-bounds", "trajectory-wise a priori bound check");
    CLI::App* st = app.add_subcommand("selftest", "fast invariant and oracle battery");
    add_common(sim, true);
    add_common(conv, true);
    add_common(vb, true);
    add_common(st, false);

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    if (seed_set) opt.seed = seed_val;
    if (paths_set) opt.paths = paths_val;

    try {
        if (sim->parsed()) return cmd_simulate(opt, out, err);
        if (conv->parsed()) return cmd_converge(opt, out, err);
        if (vb->parsed()) return cmd_verify_bounds(opt, out, err);
        return cmd_selftest(out, err);
    } catch (const ConfigError& e) {
        err << "configuration error:\n";
        for (const auto& m : e.messages) err << "  " << m << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "configuration error:\n  " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        err << "configuration error:\n  " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << "\n";
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "I/O error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace stburgers
