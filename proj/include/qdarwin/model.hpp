#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <set>
#include <stdexcept>
#include <vector>

#include "qdarwin/rng.hpp"

namespace qdarwin::model {

// The universe: one qubit monitored by n_env spins. Couplings d_i tie the
// system to each spin, m_jk tie spins to each other; the initial state is a
// full product state with per-site weights (a, 1-a) and (b, 1-b).
struct ModelParams {
    int n_env = 1;
    double sigma_d = 0.1;    // std dev of system-environment couplings
    double sigma_m = 0.0;    // std dev of intra-environment couplings
    double a = 0.5;          // environment weight |alpha_+1|^2
    double b = 0.5;          // system weight |beta_up|^2
    double alpha_phase = 0.0; // phase of alpha_+1 relative to alpha_-1
    double beta_phase = 0.0;  // phase of beta_up relative to beta_down
    std::uint64_t seed = 1;

    void validate() const {
        if (n_env < 1) throw std::invalid_argument("n_env must be >= 1");
        if (sigma_d < 0.0 || sigma_m < 0.0)
            throw std::invalid_argument("coupling std devs must be >= 0");
        if (a < 0.0 || a > 1.0) throw std::invalid_argument("a must be in [0,1]");
        if (b < 0.0 || b > 1.0) throw std::invalid_argument("b must be in [0,1]");
    }
};

// Initial-state amplitudes, normalized by construction.
struct InitialAmplitudes {
    std::complex<double> alpha_plus;
    std::complex<double> alpha_minus;
    std::complex<double> beta_up;
    std::complex<double> beta_down;
};

inline InitialAmplitudes initial_amplitudes(const ModelParams& p) {
    const std::complex<double> ea(std::cos(p.alpha_phase), std::sin(p.alpha_phase));
    const std::complex<double> eb(std::cos(p.beta_phase), std::sin(p.beta_phase));
    return {std::sqrt(p.a) * ea, std::sqrt(1.0 - p.a), std::sqrt(p.b) * eb,
            std::sqrt(1.0 - p.b)};
}

struct Couplings {
    Eigen::VectorXd d;  // length N
    Eigen::MatrixXd m;  // N x N, diagonal unused

    // Only m_jk + m_kj ever enters a physical quantity.
    double sym(int j, int k) const { return m(j, k) + m(k, j); }
};

// A subset of environment spins. Bit i set means spin i is in the fragment;
// the system qubit is never part of a fragment.
struct Fragment {
    std::uint64_t mask = 0;

    int size() const { return std::popcount(mask); }
    bool contains(int i) const { return (mask >> i) & 1ull; }
    Fragment complement(int n_env) const {
        const std::uint64_t all =
            n_env == 64 ? ~0ull : ((1ull << n_env) - 1ull);
        return Fragment{all & ~mask};
    }
    std::vector<int> indices() const {
        std::vector<int> out;
        out.reserve(static_cast<std::size_t>(size()));
        for (int i = 0; i < 64; ++i)
            if (contains(i)) out.push_back(i);
        return out;
    }
    static Fragment full(int n_env) { return Fragment{0}.complement(n_env); }

    friend bool operator==(Fragment x, Fragment y) { return x.mask == y.mask; }
    friend bool operator<(Fragment x, Fragment y) { return x.mask < y.mask; }
};

struct TimeGrid {
    std::vector<double> times;

    void validate() const {
        double prev = -1.0;
        for (double t : times) {
            if (!(t >= 0.0)) throw std::invalid_argument("times must be >= 0");
            if (!(t > prev)) throw std::invalid_argument("times must be strictly increasing");
            prev = t;
        }
    }

    static TimeGrid linear(double t_min, double t_max, int n_points) {
        if (n_points < 1 || t_max < t_min)
            throw std::invalid_argument("bad linear time grid");
        TimeGrid g;
        g.times.reserve(static_cast<std::size_t>(n_points));
        for (int i = 0; i < n_points; ++i) {
            const double x = n_points == 1 ? 0.0
                                           : static_cast<double>(i) / (n_points - 1);
            g.times.push_back(t_min + (t_max - t_min) * x);
        }
        g.validate();
        return g;
    }

    static TimeGrid logarithmic(double t_min, double t_max, int n_points) {
        if (n_points < 1 || t_min <= 0.0 || t_max < t_min)
            throw std::invalid_argument("bad logarithmic time grid");
        TimeGrid g;
        g.times.reserve(static_cast<std::size_t>(n_points));
        const double l0 = std::log(t_min), l1 = std::log(t_max);
        for (int i = 0; i < n_points; ++i) {
            const double x = n_points == 1 ? 0.0
                                           : static_cast<double>(i) / (n_points - 1);
            g.times.push_back(std::exp(l0 + (l1 - l0) * x));
        }
        g.validate();
        return g;
    }
};

// Draw couplings from centered normals. Same (params, seed) gives
// bit-identical output, and d_i / m_jk depend only on their own index, so
// universes with different N but the same seed share a coupling prefix.
inline Couplings sample_couplings(const ModelParams& p) {
    p.validate();
    const int n = p.n_env;
    Couplings c;
    c.d.resize(n);
    c.m = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        c.d(i) = p.sigma_d * rng::derive(p.seed, "d", static_cast<std::uint64_t>(i)).normal();
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            if (j != k)
                c.m(j, k) = p.sigma_m * rng::derive(p.seed, "m", static_cast<std::uint64_t>(j),
                                                    static_cast<std::uint64_t>(k))
                                            .normal();
    return c;
}

struct Timescales {
    double tau_d;        // (sqrt(N) sigma_d)^-1, collective decoherence time
    double tau_m;        // (sqrt(N) sigma_m)^-1, collective mixing time
    double inv_sigma_d;  // single-pair decoherence action time
    double inv_sigma_m;  // single-pair mixing action time
};

// Infinite entries flag a vanishing sigma.
inline Timescales timescales(const ModelParams& p) {
    p.validate();
    const double rn = std::sqrt(static_cast<double>(p.n_env));
    const double inf = std::numeric_limits<double>::infinity();
    return {p.sigma_d > 0.0 ? 1.0 / (rn * p.sigma_d) : inf,
            p.sigma_m > 0.0 ? 1.0 / (rn * p.sigma_m) : inf,
            p.sigma_d > 0.0 ? 1.0 / p.sigma_d : inf,
            p.sigma_m > 0.0 ? 1.0 / p.sigma_m : inf};
}

namespace detail {

// C(n, k) for n <= 64; C(64, 32) still fits in a u64. The running value is
// C(n-k+i, i) at step i, so the division is exact.
inline std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 c = 1;
    for (int i = 1; i <= k; ++i)
        c = c * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    return static_cast<std::uint64_t>(c);
}

// Rank -> mask in colexicographic order (combinadic decomposition).
inline std::uint64_t unrank_combination(std::uint64_t rank, int n, int k) {
    std::uint64_t mask = 0;
    int c = n - 1;
    for (int j = k; j >= 1; --j) {
        while (binomial(c, j) > rank) --c;
        mask |= 1ull << c;
        rank -= binomial(c, j);
        --c;
    }
    return mask;
}

} // namespace detail

// All C(N,k) fragments of size k if they fit in the budget, otherwise
// `budget` distinct fragments sampled uniformly without replacement. The
// output is sorted by mask either way.
inline std::vector<Fragment> enumerate_fragments(int n, int k, std::uint64_t budget,
                                                 std::uint64_t seed) {
    if (n < 1 || n > 63) throw std::invalid_argument("n out of range");
    if (k < 0 || k > n) throw std::invalid_argument("fragment size out of range");
    if (budget < 1) throw std::invalid_argument("budget must be >= 1");

    std::vector<Fragment> out;
    const std::uint64_t total = detail::binomial(n, k);
    if (total <= budget) {
        out.reserve(total);
        if (k == 0) {
            out.push_back(Fragment{0});
            return out;
        }
        // Gosper's hack walks same-popcount masks in ascending order.
        std::uint64_t v = (1ull << k) - 1ull;
        const std::uint64_t last = v << (n - k);
        for (;;) {
            out.push_back(Fragment{v});
            if (v == last) break;
            const std::uint64_t c = v & (0ull - v);
            const std::uint64_t r = v + c;
            v = (((r ^ v) >> 2) / c) | r;
        }
        return out;
    }

    auto stream = rng::derive(seed, "fragments", static_cast<std::uint64_t>(n),
                              static_cast<std::uint64_t>(k));
    std::set<std::uint64_t> ranks;
    while (ranks.size() < budget) ranks.insert(stream.below(total));
    out.reserve(budget);
    for (std::uint64_t r : ranks) out.push_back(Fragment{detail::unrank_combination(r, n, k)});
    return out;
}

} // namespace qdarwin::model
