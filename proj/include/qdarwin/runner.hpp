#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "qdarwin/analytic.hpp"
#include "qdarwin/baselines.hpp"
#include "qdarwin/config.hpp"
#include "qdarwin/csv.hpp"
#include "qdarwin/info.hpp"
#include "qdarwin/version.hpp"

// Experiment runner behind the CLI subcommands. Work parallelizes over
// (t, k, fragment) units inside build_profile; output assembly is single
// threaded and ordered, so files are byte-identical for a given config and
// seed no matter the thread count.

namespace qdarwin::cli {

namespace detail {

inline std::string fd(double x) { return util::format_double(x); }

inline void fnv_digest_accumulate(std::uint64_t& h, double x) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(x));
    std::memcpy(&bits, &x, sizeof(bits));
    for (int i = 0; i < 8; ++i) {
        h ^= (bits >> (8 * i)) & 0xffull;
        h *= 1099511628211ull;
    }
}

inline std::string couplings_digest(const model::Couplings& c) {
    std::uint64_t h = 14695981039346656037ull;
    for (Eigen::Index i = 0; i < c.d.size(); ++i) fnv_digest_accumulate(h, c.d(i));
    for (Eigen::Index j = 0; j < c.m.rows(); ++j)
        for (Eigen::Index k = 0; k < c.m.cols(); ++k) fnv_digest_accumulate(h, c.m(j, k));
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

inline void write_manifest(const std::string& dir, const std::string& command,
                           const ExperimentConfig& cfg, const std::string& digest,
                           const std::vector<std::string>& outputs) {
    json manifest;
    manifest["tool"] = {{"name", kToolName}, {"version", kToolVersion}, {"rng", kRngVersion}};
    manifest["command"] = command;
    manifest["config"] = resolved_config_json(cfg);
    if (!digest.empty()) manifest["couplings_digest"] = digest;
    manifest["outputs"] = outputs;
    const std::string path = dir + "/run_manifest.json";
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << manifest.dump(2) << '\n';
    if (!out) throw IoError("write failed on " + path);
}

// entropy-like values are stored in nats and only converted on output
inline double in_unit(double nats, const std::string& unit) {
    return unit == "bits" ? nats / std::log(2.0) : nats;
}

} // namespace detail

inline void require_model(const ExperimentConfig& cfg, const std::string& command) {
    if (!cfg.model_given)
        throw ConfigError("subcommand \"" + command + "\" requires a \"model\" section");
}

// Time sweep of mutual-information profiles, redundancy and ranked
// eigenvalues; the datasets behind the redundancy rise-and-fall figures.
inline void cmd_simulate(const ExperimentConfig& cfg, const std::string& out_dir, int threads) {
    require_model(cfg, "simulate");
    detail::ensure_dir(out_dir);
    const auto couplings = resolve_couplings(cfg);
    const auto grid = cfg.time.resolve();
    const double h_s_max = analytic::binary_entropy(cfg.model.b);
    const std::string& unit = cfg.unit;

    if (cfg.oracle.enabled && cfg.model.n_env > cfg.oracle.n_cap)
        throw ConfigError("oracle enabled but n_env exceeds oracle.n_cap");

    util::CsvWriter profile_csv(out_dir + "/profile.csv",
                                {"t", "k", "n_fragments", "H_S", "mean_H_F", "se_H_F",
                                 "mean_H_SF", "se_H_SF", "mean_MI", "se_MI"});
    util::CsvWriter red_csv(out_dir + "/redundancy.csv",
                            {"t", "delta", "f_delta_exact", "f_delta_interp", "R_exact",
                             "R_interp", "defined_flag"});
    util::CsvWriter eig_csv(out_dir + "/eigenvalues.csv", {"t", "k", "rank", "mean_eigenvalue"});

    for (double t : grid.times) {
        const auto prof = info::build_profile(cfg.model, couplings, t, cfg.fragment_budget,
                                              cfg.model.seed, threads);
        if (cfg.oracle.enabled) {
            // spot-check the analytic path against the statevector oracle
            const auto psi = rdm::evolve_statevector(cfg.model, couplings, t, cfg.oracle.n_cap);
            const auto frag = model::enumerate_fragments(cfg.model.n_env,
                                                         cfg.model.n_env / 2, 1, cfg.model.seed)[0];
            const auto ref = rdm::spectrum(rdm::partial_trace(psi, cfg.model.n_env, frag, false));
            const auto got = rdm::fragment_spectrum(cfg.model, couplings, frag, t);
            for (std::size_t i = 0; i < ref.values.size(); ++i)
                if (std::abs(ref.values[i] - got.values[i]) > 1e-9)
                    throw InvariantError("oracle cross-check failed at t = " + std::to_string(t));
        }
        for (const auto& s : prof.by_size) {
            profile_csv.write_row({detail::fd(t), std::to_string(s.k),
                                   std::to_string(s.n_fragments),
                                   detail::fd(detail::in_unit(prof.h_s, unit)),
                                   detail::fd(detail::in_unit(s.mean_h_f, unit)),
                                   detail::fd(detail::in_unit(s.se_h_f, unit)),
                                   detail::fd(detail::in_unit(s.mean_h_sf, unit)),
                                   detail::fd(detail::in_unit(s.se_h_sf, unit)),
                                   detail::fd(detail::in_unit(s.mean_mi, unit)),
                                   detail::fd(detail::in_unit(s.se_mi, unit))});
            for (std::size_t r = 0; r < s.mean_eigenvalues.size(); ++r)
                eig_csv.write_row({detail::fd(t), std::to_string(s.k), std::to_string(r + 1),
                                   detail::fd(s.mean_eigenvalues[r])});
        }
        for (double delta : cfg.deltas) {
            const auto red = info::redundancy(prof, delta, h_s_max);
            red_csv.write_row({detail::fd(t), detail::fd(delta), detail::fd(red.f_delta_exact),
                               detail::fd(red.f_delta_interp), detail::fd(red.r_exact),
                               detail::fd(red.r_interp), red.defined ? "1" : "0"});
        }
    }
    profile_csv.close();
    red_csv.close();
    eig_csv.close();
    detail::write_manifest(out_dir, "simulate", cfg, detail::couplings_digest(couplings),
                           {"profile.csv", "redundancy.csv", "eigenvalues.csv"});
}

// Decoherence factor trace over the time grid, with the +-2 sigma_Gamma
// reference encoded in a trailing summary row.
inline void cmd_decoherence(const ExperimentConfig& cfg, const std::string& out_dir,
                            int /*threads*/) {
    require_model(cfg, "decoherence");
    detail::ensure_dir(out_dir);
    const auto couplings = resolve_couplings(cfg);
    const auto grid = cfg.time.resolve();

    util::CsvWriter gamma_csv(out_dir + "/gamma.csv",
                              {"t", "re_gamma", "im_gamma", "abs_gamma", "short_time_approx"});
    for (double t : grid.times) {
        const auto g = analytic::gamma_factor(couplings.d, t, cfg.model.a);
        gamma_csv.write_row({detail::fd(t), detail::fd(g.real()), detail::fd(g.imag()),
                             detail::fd(std::abs(g)),
                             detail::fd(analytic::short_time_gamma(couplings.d, t))});
    }
    const double a = cfg.model.a;
    const double sigma_sq = std::pow(a * a + (1.0 - a) * (1.0 - a), cfg.model.n_env);
    const double sigma = std::sqrt(sigma_sq);
    gamma_csv.write_row({"ref_2sigma", detail::fd(2.0 * sigma), detail::fd(-2.0 * sigma),
                         detail::fd(sigma), detail::fd(sigma_sq)});
    gamma_csv.close();
    detail::write_manifest(out_dir, "decoherence", cfg, detail::couplings_digest(couplings),
                           {"gamma.csv"});
}

// Long-time moments of Gamma, Gamma_F and Delta against their predictions.
inline void cmd_stats(const ExperimentConfig& cfg, const std::string& out_dir, int /*threads*/) {
    require_model(cfg, "stats");
    detail::ensure_dir(out_dir);
    const auto couplings = resolve_couplings(cfg);
    const int n = cfg.model.n_env;
    const double a = cfg.model.a;
    const double base = a * a + (1.0 - a) * (1.0 - a);

    if (cfg.model.sigma_d > 0.0 && cfg.stats.t_min < 10.0 / cfg.model.sigma_d)
        std::cerr << "warning: stats window starts at t < 10/sigma_d; "
                     "cosines are not yet well mixed\n";

    std::vector<std::uint64_t> masks = cfg.stats.fragment_masks;
    if (masks.empty())
        masks = {(1ull << std::max(1, n / 4)) - 1ull, (1ull << std::max(1, n / 2)) - 1ull};

    util::CsvWriter csv(out_dir + "/moments.csv",
                        {"quantity", "predicted", "estimated", "std_error", "z_score"});
    const auto seed = cfg.model.seed;
    auto emit = [&](const std::string& name, double predicted,
                    const std::function<analytic::Complex(double)>& factor, bool mean_row) {
        const auto mom = analytic::time_avg_moments(factor, cfg.stats.t_min, cfg.stats.t_max,
                                                    cfg.stats.n_samples, seed);
        const double est = mean_row ? std::abs(mom.mean) : mom.second_moment;
        const double se = mean_row ? mom.mean_se : mom.second_se;
        const double z = se > 0.0 ? (est - predicted) / se : 0.0;
        csv.write_row({name, detail::fd(predicted), detail::fd(est), detail::fd(se),
                       detail::fd(z)});
    };

    const auto full = model::Fragment::full(n);
    emit("gamma_mean", 0.0,
         [&](double t) { return analytic::gamma_factor(couplings.d, full, t, a); }, true);
    emit("gamma_sq", std::pow(base, n),
         [&](double t) { return analytic::gamma_factor(couplings.d, full, t, a); }, false);
    for (const auto mask : masks) {
        const model::Fragment f{mask};
        const int k = f.size();
        char label[64];
        std::snprintf(label, sizeof(label), "gamma_F_sq[mask=0x%llx]",
                      static_cast<unsigned long long>(mask));
        emit(label, std::pow(base, k),
             [&](double t) { return analytic::gamma_factor(couplings.d, f, t, a); }, false);
        // Delta for maximally differing fragment configurations r = +1..,
        // r' = -1..; every outside spin then contributes a mixing factor
        std::snprintf(label, sizeof(label), "delta_sq[mask=0x%llx]",
                      static_cast<unsigned long long>(mask));
        const std::vector<int> r(static_cast<std::size_t>(k), 1),
            rp(static_cast<std::size_t>(k), -1);
        emit(label, std::pow(base, n - k),
             [&](double t) { return analytic::delta_factor(couplings.m, f, r, rp, t, a); },
             false);
    }
    csv.close();
    detail::write_manifest(out_dir, "stats", cfg, detail::couplings_digest(couplings),
                           {"moments.csv"});
}

// Haar-random baselines: subsystem entropies against the Page prediction,
// and the f* threshold curves.
inline void cmd_baseline(const ExperimentConfig& cfg, const std::string& out_dir, int threads) {
    detail::ensure_dir(out_dir);
    const auto& b = cfg.baseline;
    const std::string& unit = cfg.unit;
    const auto stats = baselines::haar_profile(b.d_s, b.d_e, b.n_env, b.n_samples, b.budget,
                                               cfg.model.seed, b.dim_cap, threads);

    util::CsvWriter haar_csv(out_dir + "/haar_profile.csv",
                             {"k", "mean_H", "se", "page_prediction", "mean_MI", "se_MI"});
    for (int k = 0; k <= b.n_env; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        haar_csv.write_row(
            {std::to_string(k), detail::fd(detail::in_unit(stats.mean_h_f[ku], unit)),
             detail::fd(detail::in_unit(stats.se_h_f[ku], unit)),
             detail::fd(detail::in_unit(baselines::haar_page_prediction(b.d_s, b.d_e, b.n_env, k),
                                        unit)),
             detail::fd(detail::in_unit(stats.mean_mi[ku], unit)),
             detail::fd(detail::in_unit(stats.se_mi[ku], unit))});
    }
    haar_csv.close();

    util::CsvWriter fstar_csv(out_dir + "/fstar.csv", {"a", "fstar_basic", "fstar_improved"});
    for (int i = 1; i <= b.fstar_points; ++i) {
        const double a = static_cast<double>(i) / (b.fstar_points + 1);
        fstar_csv.write_row({detail::fd(a), detail::fd(baselines::f_star(a, false)),
                             detail::fd(baselines::f_star(a, true))});
    }
    fstar_csv.close();
    detail::write_manifest(out_dir, "baseline", cfg, "",
                           {"haar_profile.csv", "fstar.csv"});
}

} // namespace qdarwin::cli
