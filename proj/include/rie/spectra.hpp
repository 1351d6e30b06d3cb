#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>

namespace rie {

using Complex = std::complex<double>;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Singular values of a matrix together with its shape. Values are kept in
// descending order; the aspect ratio alpha = N/M lies in (0, 1] after
// canonicalization.
struct EmpiricalSpectrum {
    Eigen::VectorXd values;  // descending, nonnegative, length n_rows
    int n_rows = 0;          // N
    int n_cols = 0;          // M >= N

    double aspect_ratio() const {
        return static_cast<double>(n_rows) / static_cast<double>(n_cols);
    }
    double max_value() const { return values.size() ? values(0) : 0.0; }
};

// Default smoothing offset eta = N^{-1/2}; the generic N^{-epsilon} form is
// exposed for sensitivity sweeps.
inline double smoothing_eta(int n, double epsilon = 0.5) {
    return std::pow(static_cast<double>(n), -epsilon);
}

// Puts a matrix into the N <= M convention, recording whether a transpose was
// applied so a caller can transpose an estimate back.
inline std::pair<Eigen::MatrixXd, bool> canonicalize(const Eigen::MatrixXd& y) {
    if (y.rows() == 0 || y.cols() == 0)
        throw std::invalid_argument("canonicalize: empty matrix");
    if (y.rows() > y.cols()) return {y.transpose(), true};
    return {y, false};
}

// Full SVD of a canonicalized (N <= M) matrix. The right factor is stored
// thin (M x N, orthonormal columns); that is all any estimator needs and the
// reconstruction Y = U diag(gamma) V^T holds exactly in this form.
struct SvdResult {
    Eigen::MatrixXd left_vectors;   // N x N orthogonal
    EmpiricalSpectrum spectrum;     // descending singular values
    Eigen::MatrixXd right_vectors;  // M x N, orthonormal columns

    Eigen::MatrixXd reconstruct() const {
        return left_vectors * spectrum.values.asDiagonal() *
               right_vectors.transpose();
    }
};

inline SvdResult svd_decompose(const Eigen::MatrixXd& y) {
    if (y.rows() > y.cols())
        throw std::invalid_argument("svd_decompose: expects N <= M (canonicalize first)");
    if (!y.allFinite())
        throw std::invalid_argument("svd_decompose: non-finite entries");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SvdResult r;
    r.left_vectors = svd.matrixU();
    r.right_vectors = svd.matrixV();
    r.spectrum.values = svd.singularValues();
    r.spectrum.n_rows = static_cast<int>(y.rows());
    r.spectrum.n_cols = static_cast<int>(y.cols());
    return r;
}

// Symmetric embedding [[0, Y], [Y^T, 0]]; its eigenvalues are +-gamma_k plus
// M - N zeros.
inline Eigen::MatrixXd hermitize(const Eigen::MatrixXd& y) {
    if (!y.allFinite())
        throw std::invalid_argument("hermitize: non-finite entries");
    const Eigen::Index n = y.rows(), m = y.cols();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n + m, n + m);
    h.topRightCorner(n, m) = y;
    h.bottomLeftCorner(m, n) = y.transpose();
    return h;
}

// Stieltjes transform of the symmetrized empirical measure,
// (1/2N) sum_k [1/(z - gamma_k) + 1/(z + gamma_k)]. Evaluation off the real
// axis is exactly the Cauchy-kernel smoothed estimate.
inline Complex stieltjes(const EmpiricalSpectrum& spec, Complex z) {
    if (z.imag() == 0.0)
        throw std::domain_error("stieltjes: Im z must be nonzero");
    Complex sum(0.0, 0.0);
    const auto& g = spec.values;
    for (Eigen::Index k = 0; k < g.size(); ++k)
        sum += 1.0 / (z - g(k)) + 1.0 / (z + g(k));
    return sum / (2.0 * static_cast<double>(g.size()));
}

// Boundary values at z = x - i*eta (lower half-plane, so Im G > 0):
// returns (density, hilbert) = (Im G / pi, Re G / pi), the smoothed
// symmetrized density and its Hilbert transform.
inline std::pair<double, double> plemelj_limits(const EmpiricalSpectrum& spec,
                                                double x, double eta) {
    if (eta <= 0.0) throw std::domain_error("plemelj_limits: eta must be > 0");
    const Complex g = stieltjes(spec, Complex(x, -eta));
    return {g.imag() / M_PI, g.real() / M_PI};
}

// Smoothed spectral evaluator: the 2N symmetrized atoms +-gamma_k with mass
// 1/2N each, read through a fixed imaginary offset.
struct SpectralFunction {
    EmpiricalSpectrum spectrum;
    double smoothing_eta = 0.0;

    SpectralFunction(EmpiricalSpectrum spec, double eta)
        : spectrum(std::move(spec)), smoothing_eta(eta) {
        if (eta <= 0.0)
            throw std::domain_error("SpectralFunction: eta must be > 0");
    }

    Complex operator()(Complex z) const { return stieltjes(spectrum, z); }
    double density(double x) const {
        return plemelj_limits(spectrum, x, smoothing_eta).first;
    }
    double hilbert(double x) const {
        return plemelj_limits(spectrum, x, smoothing_eta).second;
    }
};

}  // namespace rie
