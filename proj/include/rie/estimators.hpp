#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "rie/freeprob.hpp"
#include "rie/spectra.hpp"

namespace rie {

// One denoising problem: the observation with its SVD, plus the model
// parameters the estimators need.
struct DenoisingInstance {
    SvdResult svd;      // of the observation Y
    double snr = 1.0;   // lambda
    double epsilon = 0.5;  // smoothing exponent, eta = N^(-epsilon)

    int n_rows() const { return static_cast<int>(svd.left_vectors.rows()); }
    double alpha() const {
        return static_cast<double>(svd.left_vectors.rows()) /
               svd.right_vectors.rows();
    }
    double eta() const { return smoothing_eta(n_rows(), epsilon); }
};

inline DenoisingInstance make_instance(const MatrixXd& y, double snr,
                                       double epsilon = 0.5) {
    if (snr <= 0.0) throw std::invalid_argument("make_instance: snr must be > 0");
    DenoisingInstance inst;
    inst.svd = svd_decompose(y);
    inst.snr = snr;
    inst.epsilon = epsilon;
    return inst;
}

// Per-estimate diagnostics.
enum ShrinkageFlag : std::uint32_t {
    kFlagNone = 0,
    kFlagDegenerateDensity = 1u << 0,  // Im g ~ 0 at some gamma_j; xi forced to 0
};

struct ShrinkageResult {
    VectorXd xis;          // shrunken singular values, in svd order
    double eta_used = 0.0;
    std::uint32_t flags = kFlagNone;

    MatrixXd estimate(const SvdResult& svd) const {
        return svd.left_vectors * xis.asDiagonal() * svd.right_vectors.transpose();
    }
};

// Best singular-basis coefficients given the true signal: xi*_j = u_j^T S v_j.
inline ShrinkageResult oracle_rie(const DenoisingInstance& inst,
                                  const MatrixXd& signal) {
    const SvdResult& svd = inst.svd;
    if (signal.rows() != svd.left_vectors.rows() ||
        signal.cols() != svd.right_vectors.rows())
        throw std::invalid_argument("oracle_rie: signal shape mismatch");
    ShrinkageResult out;
    out.eta_used = 0.0;
    // diag(U^T S V) without forming the full product
    const MatrixXd sv = signal * svd.right_vectors;  // N x N
    out.xis = (svd.left_vectors.transpose() * sv).diagonal();
    return out;
}

// Resolvent of the symmetrized squared spectrum:
// G2(z) = (1/N) sum_k 1/(z^2 - gamma_k^2), so that stieltjes(z) = z G2(z).
inline Complex g2_transform(const EmpiricalSpectrum& spec, Complex z) {
    Complex sum(0.0, 0.0);
    for (Eigen::Index k = 0; k < spec.values.size(); ++k)
        sum += 1.0 / (z * z - spec.values(k) * spec.values(k));
    return sum / static_cast<double>(spec.values.size());
}

// Shrinkage for i.i.d. Gaussian noise, from the observation spectrum alone:
//   xi_j = (1/sqrt(lambda)) Im{G2 (z^2 + 1 - 1/alpha) - z^2 G2^2} / Im{z G2}
// at z = gamma_j + i eta.
inline ShrinkageResult gaussian_rie(const DenoisingInstance& inst) {
    const EmpiricalSpectrum& spec = inst.svd.spectrum;
    const double eta = inst.eta();
    const double alpha = inst.alpha();
    const double inv_sqrt_snr = 1.0 / std::sqrt(inst.snr);
    ShrinkageResult out;
    out.eta_used = eta;
    out.xis.resize(spec.values.size());
    for (Eigen::Index j = 0; j < spec.values.size(); ++j) {
        const Complex z(spec.values(j), eta);
        const Complex g2 = g2_transform(spec, z);
        const double denom = (z * g2).imag();
        if (std::abs(denom) < 1e-12) {
            out.xis(j) = 0.0;
            out.flags |= kFlagDegenerateDensity;
            continue;
        }
        const Complex num = g2 * (z * z + 1.0 - 1.0 / alpha) - z * z * g2 * g2;
        out.xis(j) = inv_sqrt_snr * num.imag() / denom;
    }
    return out;
}

// Shrinkage for a general bi-rotationally invariant noise with rectangular
// R-transform C:
//   xi_j = (1/sqrt(lambda)) Im[z g - C(w)] / Im[g],
// with z = gamma_j - i eta, g the Stieltjes transform of the symmetrized
// spectrum at z, and w = (g/z)(1 - alpha + alpha z g).
inline ShrinkageResult general_rie(const DenoisingInstance& inst,
                                   const NoiseFamily& noise) {
    const EmpiricalSpectrum& spec = inst.svd.spectrum;
    const double eta = inst.eta();
    const double alpha = inst.alpha();
    if (std::abs(noise.alpha - alpha) > 1e-9)
        throw std::invalid_argument("general_rie: noise family alpha mismatch");
    const double inv_sqrt_snr = 1.0 / std::sqrt(inst.snr);
    ShrinkageResult out;
    out.eta_used = eta;
    out.xis.resize(spec.values.size());
    for (Eigen::Index j = 0; j < spec.values.size(); ++j) {
        const Complex z(spec.values(j), -eta);
        const Complex g = stieltjes(spec, z);
        if (std::abs(g.imag()) < 1e-12) {
            out.xis(j) = 0.0;
            out.flags |= kFlagDegenerateDensity;
            continue;
        }
        const Complex w = (g / z) * (1.0 - alpha + alpha * z * g);
        const Complex c = rect_r_transform(noise, w);
        out.xis(j) = inv_sqrt_snr * (z * g - c).imag() / g.imag();
    }
    return out;
}

// Exact finite-N optimal coefficient at gamma_j as a ratio of smoothed
// window integrals of the two trace functions, refined over a shrinking
// sequence of etas until stable.
struct ExactXiResult {
    double xi = 0.0;
    double eta_final = 0.0;
    bool converged = false;
    bool isolated = true;  // no other gamma_k inside the final window
};

inline ExactXiResult exact_xi_prop1(const DenoisingInstance& inst,
                                    const MatrixXd& signal, int index) {
    const SvdResult& svd = inst.svd;
    const EmpiricalSpectrum& spec = svd.spectrum;
    const int n = static_cast<int>(spec.values.size());
    if (index < 0 || index >= n)
        throw std::out_of_range("exact_xi_prop1: index");
    const double gamma_j = spec.values(index);
    const MatrixXd sv = signal * svd.right_vectors;
    const VectorXd overlaps = (svd.left_vectors.transpose() * sv).diagonal();

    auto window_ratio = [&](double eta) {
        // Window integrals of Im L and Im{z G} over (gamma_j - eta, gamma_j + eta)
        // reduce to sums of arctan differences over the atoms.
        double num = 0.0, den = 0.0;
        const double lo = gamma_j - eta, hi = gamma_j + eta;
        for (int k = 0; k < n; ++k) {
            const double gk = spec.values(k);
            // Integral over the window of the Poisson kernel at +gk and -gk.
            const double wp = std::atan((hi - gk) / eta) - std::atan((lo - gk) / eta);
            const double wm = std::atan((hi + gk) / eta) - std::atan((lo + gk) / eta);
            // gamma_k/(z^2-gamma_k^2) = [1/(z-gamma_k) - 1/(z+gamma_k)]/2 and
            // z/(z^2-gamma_k^2) = [1/(z-gamma_k) + 1/(z+gamma_k)]/2, so Im L
            // carries odd Poisson pairs weighted by the overlaps and Im{zG}
            // even pairs.
            num += 0.5 * overlaps(k) * (wp - wm);
            den += 0.5 * (wp + wm);
        }
        return std::pair<double, double>(num, den);
    };

    ExactXiResult res;
    double eta = inst.eta();
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (int it = 0; it < 12; ++it) {
        auto [num, den] = window_ratio(eta);
        if (std::abs(den) < 1e-14) break;
        const double xi = num / den;
        res.xi = xi;
        res.eta_final = eta;
        if (std::isfinite(prev) && std::abs(xi - prev) < 1e-6 * (1.0 + std::abs(xi))) {
            res.converged = true;
            break;
        }
        prev = xi;
        eta *= 0.5;
    }
    for (int k = 0; k < n; ++k)
        if (k != index && std::abs(spec.values(k) - gamma_j) < res.eta_final)
            res.isolated = false;
    return res;
}

// Squared-error loss (1/N) ||A - B||_F^2.
inline double mse(const MatrixXd& a, const MatrixXd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("mse: shape mismatch");
    return (a - b).squaredNorm() / a.rows();
}

}  // namespace rie
