#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "qdarwin/errors.hpp"
#include "qdarwin/model.hpp"
#include "qdarwin/rng.hpp"

namespace qdarwin::analytic {

using Complex = std::complex<double>;

// Binary entropy in nats, with 0 ln 0 = 0.
inline double binary_entropy(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return -x * std::log(x) - (1.0 - x) * std::log(1.0 - x);
}

// Per-spin phase average a e^{-i phi} + (1-a) e^{+i phi}.
inline Complex phase_factor(double a, double phi) {
    return Complex(std::cos(phi), -std::sin(phi)) * a +
           Complex(std::cos(phi), std::sin(phi)) * (1.0 - a);
}

// Decoherence factor over a subset of spins,
//   Gamma = prod_{i in subset} [a e^{-2 i t d_i} + (1-a) e^{+2 i t d_i}],
// which reduces to prod cos(2 d_i t) in the balanced case a = 1/2.
//
// For more than 32 factors the product is accumulated in log-magnitude and
// phase: |Gamma| shrinks like 2^{-#subset/2} and would underflow otherwise.
inline Complex gamma_factor(const Eigen::VectorXd& d, model::Fragment subset, double t,
                            double a) {
    const int n = subset.size();
    if (n <= 32) {
        Complex g(1.0, 0.0);
        for (int i = 0; i < d.size(); ++i)
            if (subset.contains(i)) g *= phase_factor(a, 2.0 * d(i) * t);
        return g;
    }
    double log_mag = 0.0;
    double phase = 0.0;
    for (int i = 0; i < d.size(); ++i) {
        if (!subset.contains(i)) continue;
        const Complex f = phase_factor(a, 2.0 * d(i) * t);
        const double m = std::abs(f);
        if (m == 0.0) return Complex(0.0, 0.0);
        log_mag += std::log(m);
        phase += std::arg(f);
    }
    return std::exp(log_mag) * Complex(std::cos(phase), std::sin(phase));
}

// Gamma over the whole environment.
inline Complex gamma_factor(const Eigen::VectorXd& d, double t, double a) {
    return gamma_factor(d, model::Fragment::full(static_cast<int>(d.size())), t, a);
}

// Gaussian short-time approximation exp(-2 t^2 sum d_i^2), balanced case.
inline double short_time_gamma(const Eigen::VectorXd& d, double t) {
    return std::exp(-2.0 * t * t * d.squaredNorm());
}

// Von Neumann entropy (nats) of the 2x2 state
//   [[b, sqrt(b(1-b)) gamma], [sqrt(b(1-b)) conj(gamma), 1-b]],
// whose eigenvalues are (1 +- sqrt((2b-1)^2 + 4b(1-b)|gamma|^2)) / 2.
inline double entropy_system(Complex gamma, double b) {
    double g = std::abs(gamma);
    if (g > 1.0 + 1e-9)
        throw InvariantError("entropy_system: |gamma| = " + std::to_string(g) + " > 1");
    g = std::min(g, 1.0);
    const double disc = std::sqrt((2.0 * b - 1.0) * (2.0 * b - 1.0) +
                                  4.0 * b * (1.0 - b) * g * g);
    return binary_entropy(0.5 * (1.0 + disc));
}

// chi(b) = 4 b (1-b) arctanh(1-2b) / (1-2b); the curvature of the system
// entropy in |gamma|^2. Equals 1 iff b = 1/2.
inline double chi(double b) {
    if (b <= 0.0 || b >= 1.0) throw std::domain_error("chi requires 0 < b < 1");
    const double u = 1.0 - 2.0 * b;
    // atanh(u)/u -> 1 + u^2/3 + u^4/5 near u = 0; both branches agree to
    // better than 1e-12 at the switchover.
    if (std::abs(u) < 1e-4) {
        const double u2 = u * u;
        return (1.0 - u2) * (1.0 + u2 / 3.0 + u2 * u2 / 5.0);
    }
    return 4.0 * b * (1.0 - b) * std::atanh(u) / u;
}

// Small-Gamma mutual information for pure decoherence,
//   H_S^max - chi(b) (|G|^2 + |G_F|^2 - |G_Fbar|^2) / 2.
inline double mi_pure_decoherence(Complex gamma_all, Complex gamma_f, Complex gamma_fbar,
                                  double b) {
    if (b <= 0.0 || b >= 1.0) return 0.0;
    const double q = std::norm(gamma_all) + std::norm(gamma_f) - std::norm(gamma_fbar);
    return binary_entropy(b) - chi(b) * q / 2.0;
}

// Off-diagonal suppression factor from intra-environment mixing,
//   Delta = prod_{k not in F} [a e^{-i t theta_k} + (1-a) e^{+i t theta_k}],
//   theta_k = sum_{j in F} (m_jk + m_kj) (r_j - r'_j).
// r and rprime hold +-1 entries indexed by ascending fragment spin.
inline Complex delta_factor(const Eigen::MatrixXd& m, model::Fragment f,
                            const std::vector<int>& r, const std::vector<int>& rprime,
                            double t, double a) {
    const int n = static_cast<int>(m.rows());
    const auto spins = f.indices();
    if (r.size() != spins.size() || rprime.size() != spins.size())
        throw std::invalid_argument("delta_factor: r vectors must be indexed by F");
    Complex delta(1.0, 0.0);
    for (int k = 0; k < n; ++k) {
        if (f.contains(k)) continue;
        double theta = 0.0;
        for (std::size_t p = 0; p < spins.size(); ++p)
            theta += (m(spins[p], k) + m(k, spins[p])) * (r[p] - rprime[p]);
        delta *= phase_factor(a, t * theta);
    }
    return delta;
}

struct Moments {
    Complex mean;          // sample mean of the factor
    double mean_se;        // standard error of the mean (combined components)
    double second_moment;  // sample mean of |factor|^2
    double second_se;      // standard error of the second moment
};

// Long-time statistics of a factor evaluator over uniformly random times in
// [t_min, t_max). Random times rather than a grid avoid aliasing against
// near-commensurate cosine frequencies. Sample i draws its own stream, so
// the result does not depend on evaluation order.
inline Moments time_avg_moments(const std::function<Complex(double)>& factor, double t_min,
                                double t_max, int n_samples, std::uint64_t seed) {
    if (!(t_max > t_min)) throw std::invalid_argument("time_avg_moments: empty window");
    if (n_samples < 100) throw std::invalid_argument("time_avg_moments: need >= 100 samples");

    Complex sum(0.0, 0.0);
    double sum2 = 0.0, sum4 = 0.0;
    std::vector<Complex> values(static_cast<std::size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i) {
        const double t =
            rng::derive(seed, "tavg", static_cast<std::uint64_t>(i)).uniform(t_min, t_max);
        values[static_cast<std::size_t>(i)] = factor(t);
    }
    for (const Complex& v : values) {
        sum += v;
        const double n2 = std::norm(v);
        sum2 += n2;
        sum4 += n2 * n2;
    }
    const double n = static_cast<double>(n_samples);
    Moments out;
    out.mean = sum / n;
    out.second_moment = sum2 / n;
    double dev = 0.0;
    for (const Complex& v : values) dev += std::norm(v - out.mean);
    out.mean_se = std::sqrt(dev / (n * (n - 1.0)));
    const double var2 = sum4 / n - out.second_moment * out.second_moment;
    out.second_se = std::sqrt(std::max(var2, 0.0) / (n - 1.0));
    return out;
}

} // namespace qdarwin::analytic
