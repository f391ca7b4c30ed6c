#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "qdarwin/analytic.hpp"
#include "qdarwin/model.hpp"
#include "qdarwin/parallel.hpp"
#include "qdarwin/rdm.hpp"

// Mutual-information profiles over fragment size, and the redundancy they
// imply.

namespace qdarwin::info {

// I(S:F) = H_S + H_F - H_SF (nats).
inline double mutual_information(double h_s, double h_f, double h_sf) {
    return h_s + h_f - h_sf;
}

struct SizeStats {
    int k = 0;
    std::uint64_t n_fragments = 0;
    double mean_h_f = 0.0, se_h_f = 0.0;
    double mean_h_sf = 0.0, se_h_sf = 0.0;
    double mean_mi = 0.0, se_mi = 0.0;
    std::vector<double> mean_eigenvalues; // ranked means of spectrum(rho_F)
};

// Fragment-averaged entropies and mutual information at one time.
struct MIProfile {
    double t = 0.0;
    double h_s = 0.0;
    std::vector<SizeStats> by_size; // index k = 0..N

    double mean_mi(int k) const { return by_size[static_cast<std::size_t>(k)].mean_mi; }
};

struct RedundancyResult {
    double delta = 0.0;
    bool defined = false;        // threshold met at some k
    double f_delta_exact = std::numeric_limits<double>::quiet_NaN();
    double f_delta_interp = std::numeric_limits<double>::quiet_NaN();
    double r_exact = std::numeric_limits<double>::quiet_NaN();
    double r_interp = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    util::KahanSum sum;
    for (double x : xs) sum.add(x);
    MeanSe out;
    out.mean = sum.value() / n;
    if (xs.size() < 2) return out;
    util::KahanSum dev;
    for (double x : xs) dev.add((x - out.mean) * (x - out.mean));
    out.se = std::sqrt(dev.value() / (n * (n - 1.0)));
    return out;
}

} // namespace detail

// Average H_F, H_SF and I over enumerate_fragments(N, k, budget, seed) for
// every size k. Entropies come from the analytic reduced states; sizes past
// N/2 are reached through the complement trick (H_F = H_{S Fbar},
// H_SF = H_Fbar), which keeps matrix dimensions at 2^(ceil(N/2)+1).
inline MIProfile build_profile(const model::ModelParams& p, const model::Couplings& c, double t,
                               std::uint64_t budget, std::uint64_t seed, int threads = 0) {
    p.validate();
    const int n = p.n_env;

    MIProfile profile;
    profile.t = t;
    profile.h_s = rdm::entropy_of(rdm::rho_sys_fragment_analytic(p, c, model::Fragment{0}, t));
    profile.by_size.resize(static_cast<std::size_t>(n) + 1);

    for (int k = 0; k <= n; ++k) {
        const auto fragments = model::enumerate_fragments(n, k, budget, seed);
        const std::size_t m = fragments.size();
        std::vector<double> h_f(m), h_sf(m);
        const std::size_t n_ranks = std::size_t{1}
                                    << std::min(k, n + 1 - k); // nonzero ranks of rho_F
        std::vector<std::vector<double>> eigs(m);

        util::parallel_for(m, threads, [&](std::size_t i) {
            const auto frag = fragments[i];
            const auto spec_f = rdm::fragment_spectrum(p, c, frag, t);
            const auto spec_sf = rdm::sys_fragment_spectrum(p, c, frag, t);
            h_f[i] = rdm::von_neumann_entropy(spec_f);
            h_sf[i] = rdm::von_neumann_entropy(spec_sf);
            eigs[i] = spec_f.values;
            eigs[i].resize(n_ranks, 0.0);
        });

        SizeStats& s = profile.by_size[static_cast<std::size_t>(k)];
        s.k = k;
        s.n_fragments = m;
        const auto hf = detail::mean_se(h_f);
        const auto hsf = detail::mean_se(h_sf);
        s.mean_h_f = hf.mean;
        s.se_h_f = hf.se;
        s.mean_h_sf = hsf.mean;
        s.se_h_sf = hsf.se;
        std::vector<double> mi(m);
        for (std::size_t i = 0; i < m; ++i)
            mi[i] = mutual_information(profile.h_s, h_f[i], h_sf[i]);
        const auto mis = detail::mean_se(mi);
        s.mean_mi = mis.mean;
        s.se_mi = mis.se;

        s.mean_eigenvalues.resize(n_ranks);
        for (std::size_t r = 0; r < n_ranks; ++r) {
            util::KahanSum sum;
            for (std::size_t i = 0; i < m; ++i) sum.add(eigs[i][r]);
            s.mean_eigenvalues[r] = sum.value() / static_cast<double>(m);
        }
    }
    return profile;
}

// Smallest fragment fraction with I(f) >= (1 - delta) H_S^max, both at
// integer sizes and linearly interpolated; R = 1/f.
inline RedundancyResult redundancy(const MIProfile& profile, double delta, double h_s_max) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must be in (0,1)");
    const int n = static_cast<int>(profile.by_size.size()) - 1;
    const double threshold = (1.0 - delta) * h_s_max;

    RedundancyResult out;
    out.delta = delta;
    int k_star = -1;
    for (int k = 0; k <= n; ++k) {
        if (profile.mean_mi(k) >= threshold) {
            k_star = k;
            break;
        }
    }
    if (k_star < 0 || k_star == 0) {
        // threshold never met (or met already by the empty fragment, which
        // only happens for a degenerate threshold <= 0)
        out.defined = k_star == 0;
        if (out.defined) {
            out.f_delta_exact = out.f_delta_interp = 0.0;
            out.r_exact = out.r_interp = std::numeric_limits<double>::infinity();
        }
        return out;
    }

    out.defined = true;
    out.f_delta_exact = static_cast<double>(k_star) / n;
    out.r_exact = static_cast<double>(n) / k_star;

    const double lo = profile.mean_mi(k_star - 1);
    const double hi = profile.mean_mi(k_star);
    const double frac = (threshold - lo) / (hi - lo);
    out.f_delta_interp = (static_cast<double>(k_star - 1) + frac) / n;
    out.r_interp = 1.0 / out.f_delta_interp;
    return out;
}

// Mean n-th largest eigenvalue of rho_F over fragments of size k.
inline std::vector<double> eigenvalue_ranks(const model::ModelParams& p,
                                            const model::Couplings& c, double t, int k,
                                            std::uint64_t budget, std::uint64_t seed,
                                            int threads = 0) {
    const int n = p.n_env;
    const auto fragments = model::enumerate_fragments(n, k, budget, seed);
    const std::size_t m = fragments.size();
    const std::size_t n_ranks = std::size_t{1} << std::min(k, n + 1 - k);
    std::vector<std::vector<double>> eigs(m);
    util::parallel_for(m, threads, [&](std::size_t i) {
        eigs[i] = rdm::fragment_spectrum(p, c, fragments[i], t).values;
        eigs[i].resize(n_ranks, 0.0);
    });
    std::vector<double> mean(n_ranks);
    for (std::size_t r = 0; r < n_ranks; ++r) {
        util::KahanSum sum;
        for (std::size_t i = 0; i < m; ++i) sum.add(eigs[i][r]);
        mean[r] = sum.value() / static_cast<double>(m);
    }
    return mean;
}

} // namespace qdarwin::info
