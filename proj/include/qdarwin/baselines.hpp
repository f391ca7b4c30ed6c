#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qdarwin/analytic.hpp"
#include "qdarwin/model.hpp"
#include "qdarwin/parallel.hpp"
#include "qdarwin/rdm.hpp"
#include "qdarwin/rng.hpp"

// Haar-random baselines and the inequality/threshold toolkit the model
// results are judged against.

namespace qdarwin::baselines {

// Haar-average entropy (nats) of an m-dimensional subsystem of a random
// pure state on an m*n-dimensional space:
//   sum_{k=n+1}^{mn} 1/k - (m-1)/(2n),  for 1 <= m <= n.
// Callers must pass the smaller dimension first.
inline double page_entropy(std::int64_t m, std::int64_t n) {
    if (m < 1 || m > n) throw std::invalid_argument("page_entropy requires 1 <= m <= n");
    util::KahanSum sum;
    for (std::int64_t k = m * n; k > n; --k) sum.add(1.0 / static_cast<double>(k));
    return sum.value() - static_cast<double>(m - 1) / (2.0 * static_cast<double>(n));
}

// Dimension-imposed entropy ceilings for a fragment of k spins out of N
// plus a system qubit: (Min[k, N+1-k] ln 2, Min[k+1, N-k] ln 2).
struct EntropyCaps {
    double h_f_max;
    double h_sf_max;
};

inline EntropyCaps entropy_caps(int k, int n) {
    if (k < 0 || k > n) throw std::invalid_argument("entropy_caps: k out of range");
    const double ln2 = std::log(2.0);
    return {std::min(k, n + 1 - k) * ln2, std::min(k + 1, n - k) * ln2};
}

// Audenaert's refinement of Fannes' inequality: two states at trace
// distance T on a D-dimensional space have |dH| <= T ln(D-1) + H2[T].
inline double fannes_audenaert(double t, std::int64_t d) {
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("fannes_audenaert: T must be in [0,1]");
    if (d < 2) throw std::invalid_argument("fannes_audenaert: D must be >= 2");
    return t * std::log(static_cast<double>(d - 1)) + analytic::binary_entropy(t);
}

// Chebyshev-type bound on late-time trace-distance excursions of rho_F from
// the maximally mixed state (balanced case, f < 1/2):
//   P[T > T0] <= 2^{(2f-1)N} / (4 T0^2), capped at 1.
inline double fluctuation_bound(double f, int n, double t0) {
    if (!(f > 0.0 && f < 0.5))
        throw std::domain_error("fluctuation_bound is vacuous unless 0 < f < 1/2");
    if (!(t0 > 0.0)) throw std::invalid_argument("fluctuation_bound: T0 must be > 0");
    const double bound = std::exp2((2.0 * f - 1.0) * n) / (4.0 * t0 * t0);
    return std::min(bound, 1.0);
}

// Threshold choice T0 = 2^{-(1/2-f)N/2}, for which P[T > T0] is itself
// suppressed as 2^{-(1/2-f)N}.
inline double fluctuation_threshold(double f, int n) {
    return std::exp2(-(0.5 - f) * n / 2.0);
}

// Largest fragment fraction for which the equilibrium argument proves
// maximal mixing, as a function of the environment balance a. Both the
// numerator and denominator of the improved form are taken in bits, the
// only reading with f*(1/2) = 1/2. Returns 0 at the degenerate boundaries
// a = 0 and a = 1.
inline double f_star(double a, bool improved) {
    if (a <= 0.0 || a >= 1.0) return 0.0;
    if (a == 0.5) return 0.5;
    const double l = -std::log2(a * a + (1.0 - a) * (1.0 - a)); // in (0, 1]
    if (!improved) return l / (l + 1.0);
    const double h2_bits = analytic::binary_entropy(a) / std::log(2.0);
    return l / (l + h2_bits);
}

// True iff the spectrum is no more mixed than the branch weights: every
// partial sum of the descending spectrum must reach the corresponding
// partial sum of the descending weights (up to 1e-9). Length mismatch is
// handled by zero-padding.
inline bool majorization_check(const rdm::Spectrum& s, std::vector<double> weights) {
    std::vector<double> spec = s.values;
    const std::size_t len = std::max(spec.size(), weights.size());
    spec.resize(len, 0.0);
    weights.resize(len, 0.0);
    std::sort(spec.begin(), spec.end(), std::greater<double>());
    std::sort(weights.begin(), weights.end(), std::greater<double>());
    double ps = 0.0, pw = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        ps += spec[i];
        pw += weights[i];
        if (ps < pw - 1e-9) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Haar sampling
// ---------------------------------------------------------------------------

inline constexpr std::int64_t kDefaultHaarDimCap = 1 << 15;

struct HaarSampleStats {
    int d_s = 2;
    int d_e = 2;
    int n_env = 0;
    int n_samples = 0;
    double mean_h_s = 0.0, se_h_s = 0.0;
    // indexed by fragment size k = 0..N
    std::vector<double> mean_h_f, se_h_f;
    std::vector<double> mean_h_sf, se_h_sf;
    std::vector<double> mean_mi, se_mi;
};

namespace detail {

// Normalized vector of i.i.d. standard complex Gaussians: Haar-distributed
// on the unit sphere by unitary invariance.
inline Eigen::VectorXcd haar_state(Eigen::Index dim, rng::Stream& stream) {
    Eigen::VectorXcd psi(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        const double re = stream.normal();
        const double im = stream.normal();
        psi(i) = std::complex<double>(re, im);
    }
    psi.normalize();
    return psi;
}

} // namespace detail

// Sample pure states of S (dim D_S) plus N qudits (dim D_E each) from the
// Haar measure and average subsystem entropies per fragment size. Entropies
// are always computed on the smaller side of each bipartition.
inline HaarSampleStats haar_profile(int d_s, int d_e, int n, int n_samples,
                                    std::uint64_t budget, std::uint64_t seed,
                                    std::int64_t dim_cap = kDefaultHaarDimCap,
                                    int threads = 0) {
    if (d_s < 2 || d_e < 2 || n < 1) throw std::invalid_argument("haar_profile: bad dimensions");
    if (n_samples < 1) throw std::invalid_argument("haar_profile: need n_samples >= 1");
    std::int64_t dim = d_s;
    for (int i = 0; i < n; ++i) {
        dim *= d_e;
        if (dim > dim_cap)
            throw std::invalid_argument("haar_profile: total dimension exceeds cap");
    }

    std::vector<int> dims(static_cast<std::size_t>(n) + 1, d_e);
    dims.back() = d_s; // subsystem N is the system

    // one deterministic fragment set per size, shared by all samples
    std::vector<std::vector<model::Fragment>> frag_sets(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k)
        frag_sets[static_cast<std::size_t>(k)] = model::enumerate_fragments(n, k, budget, seed);

    auto keep_list = [&](model::Fragment f, bool with_system) {
        std::vector<int> keep = f.indices();
        if (with_system) keep.push_back(n);
        return keep;
    };
    auto subsystem_entropy = [&](const Eigen::VectorXcd& psi, model::Fragment f,
                                 bool with_system) {
        // reduce to whichever side of the cut is smaller
        std::int64_t side = with_system ? d_s : 1;
        for (int i = 0; i < n; ++i)
            if (f.contains(i)) side *= d_e;
        model::Fragment used = f;
        bool used_system = with_system;
        if (side * side > dim) {
            used = f.complement(n);
            used_system = !with_system;
        }
        return rdm::entropy_of(
            rdm::partial_trace_general(psi, dims, keep_list(used, used_system)));
    };

    const std::size_t ns = static_cast<std::size_t>(n_samples);
    std::vector<double> h_s(ns);
    std::vector<std::vector<double>> h_f(static_cast<std::size_t>(n) + 1,
                                         std::vector<double>(ns)),
        h_sf(static_cast<std::size_t>(n) + 1, std::vector<double>(ns)),
        mi(static_cast<std::size_t>(n) + 1, std::vector<double>(ns));

    util::parallel_for(ns, threads, [&](std::size_t s) {
        auto stream = rng::derive(seed, "haar", static_cast<std::uint64_t>(s));
        const Eigen::VectorXcd psi = detail::haar_state(dim, stream);
        h_s[s] = subsystem_entropy(psi, model::Fragment{0}, true);
        for (int k = 0; k <= n; ++k) {
            const auto& frags = frag_sets[static_cast<std::size_t>(k)];
            util::KahanSum sum_f, sum_sf;
            for (const auto& frag : frags) {
                sum_f.add(subsystem_entropy(psi, frag, false));
                sum_sf.add(subsystem_entropy(psi, frag, true));
            }
            const double nf = static_cast<double>(frags.size());
            h_f[static_cast<std::size_t>(k)][s] = sum_f.value() / nf;
            h_sf[static_cast<std::size_t>(k)][s] = sum_sf.value() / nf;
            mi[static_cast<std::size_t>(k)][s] = h_s[s] +
                                                 h_f[static_cast<std::size_t>(k)][s] -
                                                 h_sf[static_cast<std::size_t>(k)][s];
        }
    });

    auto reduce = [](const std::vector<double>& xs, double& mean, double& se) {
        util::KahanSum sum;
        for (double x : xs) sum.add(x);
        const double n_ = static_cast<double>(xs.size());
        mean = sum.value() / n_;
        se = 0.0;
        if (xs.size() > 1) {
            util::KahanSum dev;
            for (double x : xs) dev.add((x - mean) * (x - mean));
            se = std::sqrt(dev.value() / (n_ * (n_ - 1.0)));
        }
    };

    HaarSampleStats stats;
    stats.d_s = d_s;
    stats.d_e = d_e;
    stats.n_env = n;
    stats.n_samples = n_samples;
    reduce(h_s, stats.mean_h_s, stats.se_h_s);
    stats.mean_h_f.resize(static_cast<std::size_t>(n) + 1);
    stats.se_h_f.resize(static_cast<std::size_t>(n) + 1);
    stats.mean_h_sf.resize(static_cast<std::size_t>(n) + 1);
    stats.se_h_sf.resize(static_cast<std::size_t>(n) + 1);
    stats.mean_mi.resize(static_cast<std::size_t>(n) + 1);
    stats.se_mi.resize(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        reduce(h_f[ku], stats.mean_h_f[ku], stats.se_h_f[ku]);
        reduce(h_sf[ku], stats.mean_h_sf[ku], stats.se_h_sf[ku]);
        reduce(mi[ku], stats.mean_mi[ku], stats.se_mi[ku]);
    }
    return stats;
}

// Page prediction for the H_F column of a Haar profile: the entropy of the
// smaller side of the F vs (S u Fbar) cut.
inline double haar_page_prediction(int d_s, int d_e, int n, int k) {
    double side_f = 1.0, side_rest = d_s;
    for (int i = 0; i < k; ++i) side_f *= d_e;
    for (int i = 0; i < n - k; ++i) side_rest *= d_e;
    const auto m = static_cast<std::int64_t>(std::min(side_f, side_rest));
    const auto nn = static_cast<std::int64_t>(std::max(side_f, side_rest));
    return page_entropy(m, nn);
}

} // namespace qdarwin::baselines
