#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdarwin/analytic.hpp"
#include "qdarwin/errors.hpp"
#include "qdarwin/model.hpp"

// Reduced density matrices of a fragment F and of S u F, built two ways:
//
//  * analytically, from the closed-form matrix elements -- polynomial in N
//    for fixed fragment size, and unitarily equivalent to the true reduced
//    state (intra-fragment phases are dropped, so only spectra are
//    comparable between the two paths);
//  * by brute force, evolving the full 2^(N+1) statevector and tracing.
//
// Basis convention, fixed so both paths agree: spins are indexed 0..N-1,
// bit i of a basis index encodes spin i via 0 -> +1, 1 -> -1, and the
// system qubit occupies the most significant position (0 -> up, 1 -> down).
// Reduced bases keep spins in ascending index order, system on top.

namespace qdarwin::rdm {

using Complex = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

inline constexpr int kDefaultOracleCap = 14;
inline constexpr double kEigClampThreshold = -1e-10;

// Descending, clamped eigenvalues of a density matrix.
struct Spectrum {
    std::vector<double> values;
};

inline void validate_density_matrix(const MatrixXcd& rho, double tol = 1e-12) {
    if (rho.rows() != rho.cols()) throw InvariantError("density matrix not square");
    const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (herm > tol)
        throw InvariantError("density matrix not Hermitian: max dev " + std::to_string(herm));
    const double tr_err = std::abs(rho.trace() - Complex(1.0, 0.0));
    if (tr_err > tol)
        throw InvariantError("density matrix trace off by " + std::to_string(tr_err));
}

// Eigenvalues sorted descending. Values in [-1e-10, 0) are clamped to zero
// and the spectrum renormalized; anything below the clamp threshold means
// the matrix construction is broken and throws.
inline Spectrum spectrum(const MatrixXcd& rho) {
    // (M + M^dag)/2 kills the ~1e-16 asymmetry left by phase products.
    const MatrixXcd sym = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(sym, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw InvariantError("eigensolver failed");
    Eigen::VectorXd ev = solver.eigenvalues();

    Spectrum s;
    s.values.resize(static_cast<std::size_t>(ev.size()));
    double sum = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        double v = ev(ev.size() - 1 - i); // descending
        if (v < kEigClampThreshold)
            throw InvariantError("eigenvalue " + std::to_string(v) + " below clamp threshold");
        if (v < 0.0) v = 0.0;
        s.values[static_cast<std::size_t>(i)] = v;
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw InvariantError("spectrum sums to " + std::to_string(sum));
    for (double& v : s.values) v /= sum;
    return s;
}

inline double von_neumann_entropy(const Spectrum& s) {
    double h = 0.0;
    for (double v : s.values)
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

inline double entropy_of(const MatrixXcd& rho) { return von_neumann_entropy(spectrum(rho)); }

// Trace distance ||r1 - r2||_1 / 2.
inline double trace_distance(const MatrixXcd& r1, const MatrixXcd& r2) {
    if (r1.rows() != r2.rows() || r1.cols() != r2.cols())
        throw std::invalid_argument("trace_distance: dimension mismatch");
    const MatrixXcd diff = 0.5 * ((r1 - r2) + (r1 - r2).adjoint());
    Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(diff, Eigen::EigenvaluesOnly);
    return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

// Hilbert-Schmidt (Frobenius) distance.
inline double hs_distance(const MatrixXcd& r1, const MatrixXcd& r2) {
    if (r1.rows() != r2.rows() || r1.cols() != r2.cols())
        throw std::invalid_argument("hs_distance: dimension mismatch");
    return (r1 - r2).norm();
}

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

// Full statevector at time t. The Hamiltonian is diagonal in the z-basis, so
// amplitude(s, r) = beta_s (prod_j alpha_{r_j}) exp(-i t E(s, r)) with
// E(s, r) = s sum_i d_i r_i + sum_{j<k} (m_jk + m_kj) r_j r_k.
inline VectorXcd evolve_statevector(const model::ModelParams& p, const model::Couplings& c,
                                    double t, int n_cap = kDefaultOracleCap) {
    p.validate();
    const int n = p.n_env;
    if (n > n_cap)
        throw std::invalid_argument("evolve_statevector: N = " + std::to_string(n) +
                                    " exceeds oracle cap " + std::to_string(n_cap));
    const auto amp = model::initial_amplitudes(p);
    const std::size_t env_dim = 1ull << n;

    std::vector<Complex> pow_plus(static_cast<std::size_t>(n) + 1),
        pow_minus(static_cast<std::size_t>(n) + 1);
    pow_plus[0] = pow_minus[0] = Complex(1.0, 0.0);
    for (int i = 1; i <= n; ++i) {
        pow_plus[static_cast<std::size_t>(i)] =
            pow_plus[static_cast<std::size_t>(i - 1)] * amp.alpha_plus;
        pow_minus[static_cast<std::size_t>(i)] =
            pow_minus[static_cast<std::size_t>(i - 1)] * amp.alpha_minus;
    }

    VectorXcd psi(static_cast<Eigen::Index>(2 * env_dim));
    for (std::size_t e = 0; e < env_dim; ++e) {
        double d_sum = 0.0;
        for (int i = 0; i < n; ++i) d_sum += c.d(i) * (((e >> i) & 1ull) ? -1.0 : 1.0);
        double m_sum = 0.0;
        for (int j = 0; j < n; ++j) {
            const double rj = ((e >> j) & 1ull) ? -1.0 : 1.0;
            for (int k = j + 1; k < n; ++k) {
                const double rk = ((e >> k) & 1ull) ? -1.0 : 1.0;
                m_sum += c.sym(j, k) * rj * rk;
            }
        }
        const int pc = std::popcount(e);
        const Complex alpha_prod = pow_plus[static_cast<std::size_t>(n - pc)] *
                                   pow_minus[static_cast<std::size_t>(pc)];
        // s = +1 (up) in the low block, s = -1 (down) in the high block
        const double phase_up = t * (d_sum + m_sum);
        const double phase_down = t * (-d_sum + m_sum);
        psi(static_cast<Eigen::Index>(e)) =
            amp.beta_up * alpha_prod * Complex(std::cos(phase_up), -std::sin(phase_up));
        psi(static_cast<Eigen::Index>(env_dim + e)) =
            amp.beta_down * alpha_prod * Complex(std::cos(phase_down), -std::sin(phase_down));
    }
    return psi;
}

// Reduced density matrix over kept subsystems from a pure state of
// S + n_env qubits. Kept spins map to bits 0.. in ascending index order;
// the system, when kept, is the most significant bit.
inline MatrixXcd partial_trace(const VectorXcd& psi, int n_env, model::Fragment keep,
                               bool keep_system) {
    const int n_tot = n_env + 1;
    if (psi.size() != (Eigen::Index{1} << n_tot))
        throw std::invalid_argument("partial_trace: statevector size mismatch");

    std::vector<int> kept_bits = keep.indices();
    if (keep_system) kept_bits.push_back(n_env);
    std::vector<int> traced_bits;
    for (int i = 0; i < n_env; ++i)
        if (!keep.contains(i)) traced_bits.push_back(i);
    if (!keep_system) traced_bits.push_back(n_env);

    const int nk = static_cast<int>(kept_bits.size());
    const int nt = n_tot - nk;
    const Eigen::Index kept_dim = Eigen::Index{1} << nk;
    const Eigen::Index traced_dim = Eigen::Index{1} << nt;

    MatrixXcd grouped(kept_dim, traced_dim);
    for (Eigen::Index idx = 0; idx < psi.size(); ++idx) {
        Eigen::Index ki = 0, ti = 0;
        for (int b = 0; b < nk; ++b) ki |= ((idx >> kept_bits[static_cast<std::size_t>(b)]) & 1) << b;
        for (int b = 0; b < nt; ++b) ti |= ((idx >> traced_bits[static_cast<std::size_t>(b)]) & 1) << b;
        grouped(ki, ti) = psi(idx);
    }
    return grouped * grouped.adjoint();
}

// Same reduction applied to a density matrix over S + n_env qubits.
inline MatrixXcd partial_trace(const MatrixXcd& rho, int n_env, model::Fragment keep,
                               bool keep_system) {
    const int n_tot = n_env + 1;
    if (rho.rows() != (Eigen::Index{1} << n_tot))
        throw std::invalid_argument("partial_trace: density matrix size mismatch");

    std::vector<int> kept_bits = keep.indices();
    if (keep_system) kept_bits.push_back(n_env);
    std::vector<int> traced_bits;
    for (int i = 0; i < n_env; ++i)
        if (!keep.contains(i)) traced_bits.push_back(i);
    if (!keep_system) traced_bits.push_back(n_env);

    const int nk = static_cast<int>(kept_bits.size());
    const int nt = n_tot - nk;
    const Eigen::Index kept_dim = Eigen::Index{1} << nk;
    const Eigen::Index traced_dim = Eigen::Index{1} << nt;

    auto compose = [&](Eigen::Index k, Eigen::Index t) {
        Eigen::Index idx = 0;
        for (int b = 0; b < nk; ++b) idx |= ((k >> b) & 1) << kept_bits[static_cast<std::size_t>(b)];
        for (int b = 0; b < nt; ++b) idx |= ((t >> b) & 1) << traced_bits[static_cast<std::size_t>(b)];
        return idx;
    };
    MatrixXcd out = MatrixXcd::Zero(kept_dim, kept_dim);
    for (Eigen::Index ka = 0; ka < kept_dim; ++ka)
        for (Eigen::Index kb = 0; kb < kept_dim; ++kb)
            for (Eigen::Index e = 0; e < traced_dim; ++e)
                out(ka, kb) += rho(compose(ka, e), compose(kb, e));
    return out;
}

// Generic partial trace for mixed local dimensions (used by the Haar
// baselines). Subsystem 0 is the least significant digit; `keep` must be
// ascending subsystem indices.
inline MatrixXcd partial_trace_general(const VectorXcd& psi, const std::vector<int>& dims,
                                       const std::vector<int>& keep) {
    Eigen::Index total = 1;
    for (int d : dims) total *= d;
    if (psi.size() != total) throw std::invalid_argument("partial_trace_general: size mismatch");

    std::vector<char> kept(dims.size(), 0);
    for (int k : keep) kept[static_cast<std::size_t>(k)] = 1;
    Eigen::Index kept_dim = 1, traced_dim = 1;
    for (std::size_t i = 0; i < dims.size(); ++i)
        (kept[i] ? kept_dim : traced_dim) *= dims[i];

    MatrixXcd grouped(kept_dim, traced_dim);
    for (Eigen::Index idx = 0; idx < total; ++idx) {
        Eigen::Index rem = idx, ki = 0, ti = 0, kw = 1, tw = 1;
        for (std::size_t i = 0; i < dims.size(); ++i) {
            const Eigen::Index digit = rem % dims[i];
            rem /= dims[i];
            if (kept[i]) {
                ki += digit * kw;
                kw *= dims[i];
            } else {
                ti += digit * tw;
                tw *= dims[i];
            }
        }
        grouped(ki, ti) = psi(idx);
    }
    return grouped * grouped.adjoint();
}

// ---------------------------------------------------------------------------
// Analytic path
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::uint64_t> pow3_table(int k) {
    std::vector<std::uint64_t> p(static_cast<std::size_t>(k) + 1);
    p[0] = 1;
    for (int i = 1; i <= k; ++i) p[static_cast<std::size_t>(i)] = 3 * p[static_cast<std::size_t>(i - 1)];
    return p;
}

// Products prod_j alpha_{r_j} for every fragment configuration.
inline std::vector<Complex> amplitude_products(const model::InitialAmplitudes& amp, int k) {
    const std::size_t dim = 1ull << k;
    std::vector<Complex> a(dim);
    for (std::size_t r = 0; r < dim; ++r) {
        Complex prod(1.0, 0.0);
        for (int p = 0; p < k; ++p) prod *= ((r >> p) & 1ull) ? amp.alpha_minus : amp.alpha_plus;
        a[r] = prod;
    }
    return a;
}

} // namespace detail

// Fragment state rho~_F, unitarily equivalent to the true rho_F. Matrix
// element (r, r') = [b e^{-i t D} + (1-b) e^{+i t D}] Delta_(r-r')
// prod_j alpha_{r_j} alpha*_{r'_j}, with D = sum_{j in F} d_j (r_j - r'_j).
// Cost O(4^#F N).
inline MatrixXcd rho_fragment_analytic(const model::ModelParams& p, const model::Couplings& c,
                                       model::Fragment f, double t) {
    p.validate();
    const int n = p.n_env;
    const int k = f.size();
    const auto amp = model::initial_amplitudes(p);
    const auto spins = f.indices();
    std::vector<int> out;
    for (int i = 0; i < n; ++i)
        if (!f.contains(i)) out.push_back(i);
    const int n_out = static_cast<int>(out.size());

    // coupling sums entering theta_k, indexed [fragment spin][outside spin]
    std::vector<double> csum(static_cast<std::size_t>(k) * static_cast<std::size_t>(n_out));
    for (int pidx = 0; pidx < k; ++pidx)
        for (int o = 0; o < n_out; ++o)
            csum[static_cast<std::size_t>(pidx) * static_cast<std::size_t>(n_out) +
                 static_cast<std::size_t>(o)] =
                c.sym(spins[static_cast<std::size_t>(pidx)], out[static_cast<std::size_t>(o)]);

    const auto pow3 = detail::pow3_table(k);
    const std::uint64_t n_diff = pow3[static_cast<std::size_t>(k)];
    std::vector<Complex> g(n_diff);
    std::vector<int> w(static_cast<std::size_t>(k), 0);
    std::vector<double> theta(static_cast<std::size_t>(n_out));
    for (std::uint64_t widx = 0; widx < n_diff; ++widx) {
        std::uint64_t rem = widx;
        double dsum = 0.0;
        std::fill(theta.begin(), theta.end(), 0.0);
        for (int pidx = 0; pidx < k; ++pidx) {
            const int wp = static_cast<int>(rem % 3) - 1;
            rem /= 3;
            w[static_cast<std::size_t>(pidx)] = wp;
            if (wp == 0) continue;
            dsum += 2.0 * c.d(spins[static_cast<std::size_t>(pidx)]) * wp;
            const double* row = &csum[static_cast<std::size_t>(pidx) * static_cast<std::size_t>(n_out)];
            for (int o = 0; o < n_out; ++o) theta[static_cast<std::size_t>(o)] += 2.0 * row[o] * wp;
        }
        Complex val = analytic::phase_factor(p.b, t * dsum);
        for (int o = 0; o < n_out; ++o)
            val *= analytic::phase_factor(p.a, t * theta[static_cast<std::size_t>(o)]);
        g[widx] = val;
    }

    const auto aprod = detail::amplitude_products(amp, k);
    const Eigen::Index dim = Eigen::Index{1} << k;
    MatrixXcd rho(dim, dim);
    for (Eigen::Index row = 0; row < dim; ++row) {
        for (Eigen::Index col = 0; col < dim; ++col) {
            std::uint64_t widx = 0;
            for (int pidx = 0; pidx < k; ++pidx) {
                const int digit = static_cast<int>((col >> pidx) & 1) -
                                  static_cast<int>((row >> pidx) & 1) + 1;
                widx += static_cast<std::uint64_t>(digit) * pow3[static_cast<std::size_t>(pidx)];
            }
            rho(row, col) = g[widx] * aprod[static_cast<std::size_t>(row)] *
                            std::conj(aprod[static_cast<std::size_t>(col)]);
        }
    }
    return rho;
}

// Joint state rho~_SF, unitarily equivalent to rho_SF; dimension 2^(#F+1).
// Each outside spin contributes a e^{-i t [(s-s') d_k + theta_k]} + (1-a)
// e^{+i t [...]}; the intra-(S u F) phases are dropped.
inline MatrixXcd rho_sys_fragment_analytic(const model::ModelParams& p,
                                           const model::Couplings& c, model::Fragment f,
                                           double t) {
    p.validate();
    const int n = p.n_env;
    const int k = f.size();
    const auto amp = model::initial_amplitudes(p);
    const auto spins = f.indices();
    std::vector<int> out;
    for (int i = 0; i < n; ++i)
        if (!f.contains(i)) out.push_back(i);
    const int n_out = static_cast<int>(out.size());

    std::vector<double> csum(static_cast<std::size_t>(k) * static_cast<std::size_t>(n_out));
    for (int pidx = 0; pidx < k; ++pidx)
        for (int o = 0; o < n_out; ++o)
            csum[static_cast<std::size_t>(pidx) * static_cast<std::size_t>(n_out) +
                 static_cast<std::size_t>(o)] =
                c.sym(spins[static_cast<std::size_t>(pidx)], out[static_cast<std::size_t>(o)]);

    // ternary digits: positions 0..k-1 for fragment spins, position k for S
    const auto pow3 = detail::pow3_table(k + 1);
    const std::uint64_t n_diff = pow3[static_cast<std::size_t>(k + 1)];
    std::vector<Complex> g(n_diff);
    std::vector<double> theta(static_cast<std::size_t>(n_out));
    for (std::uint64_t widx = 0; widx < n_diff; ++widx) {
        std::uint64_t rem = widx;
        std::fill(theta.begin(), theta.end(), 0.0);
        int ds = 0;
        for (int pidx = 0; pidx <= k; ++pidx) {
            const int wp = static_cast<int>(rem % 3) - 1;
            rem /= 3;
            if (pidx == k) {
                ds = wp;
            } else if (wp != 0) {
                const double* row =
                    &csum[static_cast<std::size_t>(pidx) * static_cast<std::size_t>(n_out)];
                for (int o = 0; o < n_out; ++o) theta[static_cast<std::size_t>(o)] += 2.0 * row[o] * wp;
            }
        }
        Complex val(1.0, 0.0);
        for (int o = 0; o < n_out; ++o) {
            const double phi = t * (2.0 * ds * c.d(out[static_cast<std::size_t>(o)]) +
                                    theta[static_cast<std::size_t>(o)]);
            val *= analytic::phase_factor(p.a, phi);
        }
        g[widx] = val;
    }

    const auto aprod = detail::amplitude_products(amp, k);
    const Complex beta[2] = {amp.beta_up, amp.beta_down};
    const Eigen::Index frag_dim = Eigen::Index{1} << k;
    const Eigen::Index dim = frag_dim * 2;
    MatrixXcd rho(dim, dim);
    for (Eigen::Index row = 0; row < dim; ++row) {
        const Eigen::Index rfrag = row & (frag_dim - 1);
        const int rs = static_cast<int>(row >> k);
        for (Eigen::Index col = 0; col < dim; ++col) {
            const Eigen::Index cfrag = col & (frag_dim - 1);
            const int cs = static_cast<int>(col >> k);
            std::uint64_t widx = 0;
            for (int pidx = 0; pidx < k; ++pidx) {
                const int digit = static_cast<int>((cfrag >> pidx) & 1) -
                                  static_cast<int>((rfrag >> pidx) & 1) + 1;
                widx += static_cast<std::uint64_t>(digit) * pow3[static_cast<std::size_t>(pidx)];
            }
            widx += static_cast<std::uint64_t>(cs - rs + 1) * pow3[static_cast<std::size_t>(k)];
            rho(row, col) = beta[rs] * std::conj(beta[cs]) * g[widx] *
                            aprod[static_cast<std::size_t>(rfrag)] *
                            std::conj(aprod[static_cast<std::size_t>(cfrag)]);
        }
    }
    return rho;
}

// Long-time limit prod_{i in F} [a |+1><+1| + (1-a) |-1><-1|]; maximally
// mixed for a = 1/2.
inline MatrixXcd rho_fragment_equilibrium(model::Fragment f, double a) {
    const int k = f.size();
    const Eigen::Index dim = Eigen::Index{1} << k;
    MatrixXcd rho = MatrixXcd::Zero(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r) {
        double w = 1.0;
        for (int pidx = 0; pidx < k; ++pidx) w *= ((r >> pidx) & 1) ? (1.0 - a) : a;
        rho(r, r) = w;
    }
    return rho;
}

// ---------------------------------------------------------------------------
// Minimal-dimension spectra via the Schmidt decomposition
// ---------------------------------------------------------------------------

// Spectrum of rho_F. For #F > (N+1)/2 this diagonalizes rho_{S Fbar}
// instead (equal spectrum for a pure global state), capping the matrix
// dimension at 2^(ceil(N/2)+1). The returned length is
// min(2^#F, 2^(N+1-#F)); remaining eigenvalues are structural zeros.
inline Spectrum fragment_spectrum(const model::ModelParams& p, const model::Couplings& c,
                                  model::Fragment f, double t) {
    const int n = p.n_env;
    const int k = f.size();
    if (2 * k <= n + 1) return spectrum(rho_fragment_analytic(p, c, f, t));
    return spectrum(rho_sys_fragment_analytic(p, c, f.complement(n), t));
}

// Spectrum of rho_SF; uses rho_Fbar when that is smaller. Length
// min(2^(#F+1), 2^(N-#F)).
inline Spectrum sys_fragment_spectrum(const model::ModelParams& p, const model::Couplings& c,
                                      model::Fragment f, double t) {
    const int n = p.n_env;
    const int k = f.size();
    if (2 * k + 1 <= n) return spectrum(rho_sys_fragment_analytic(p, c, f, t));
    return spectrum(rho_fragment_analytic(p, c, f.complement(n), t));
}

} // namespace qdarwin::rdm
