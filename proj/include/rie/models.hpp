#pragma once

#include <Eigen/Dense>
#include <Eigen/QR>

#include <cmath>
#include <stdexcept>
#include <string>

#include "rie/freeprob.hpp"
#include "rie/rng.hpp"
#include "rie/spectra.hpp"

namespace rie {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Which signal / noise samplers make up an experiment instance.
struct EnsembleSpec {
    enum class Signal { GaussianIid, BernoulliSpectrum, BernoulliRademacher };
    enum class Noise { Gaussian, UniformSpectrum, RankOneSum };

    Signal signal = Signal::GaussianIid;
    Noise noise = Noise::Gaussian;
    int n_rows = 0;
    int n_cols = 0;
    double snr = 1.0;  // lambda
    double c = 1.0;    // rank-one-sum rate
    double p = 0.5;    // zero-mass of the Bernoulli signal priors

    double alpha() const { return static_cast<double>(n_rows) / n_cols; }

    void validate() const {
        if (n_rows <= 0 || n_cols <= 0 || n_rows > n_cols)
            throw std::invalid_argument("EnsembleSpec: need 0 < N <= M");
        if (snr <= 0.0) throw std::invalid_argument("EnsembleSpec: snr must be > 0");
        if (noise == Noise::RankOneSum && c <= 0.0)
            throw std::invalid_argument("EnsembleSpec: c must be > 0");
        if (p < 0.0 || p > 1.0)
            throw std::invalid_argument("EnsembleSpec: p must be in [0, 1]");
        if (noise == Noise::UniformSpectrum && n_rows != n_cols)
            throw std::invalid_argument(
                "EnsembleSpec: uniform-spectrum noise requires N = M");
    }

    NoiseFamily noise_family() const {
        switch (noise) {
            case Noise::Gaussian: return NoiseFamily::gaussian(alpha());
            case Noise::UniformSpectrum: return NoiseFamily::uniform_spectrum();
            case Noise::RankOneSum: return NoiseFamily::rank_one_sum(c, alpha());
        }
        throw std::logic_error("EnsembleSpec: unknown noise");
    }

    static Signal signal_from_string(const std::string& s) {
        if (s == "gaussian_iid") return Signal::GaussianIid;
        if (s == "bernoulli_spectrum") return Signal::BernoulliSpectrum;
        if (s == "bernoulli_rademacher") return Signal::BernoulliRademacher;
        throw std::invalid_argument("unknown signal kind: " + s);
    }
    static Noise noise_from_string(const std::string& s) {
        if (s == "gaussian") return Noise::Gaussian;
        if (s == "uniform") return Noise::UniformSpectrum;
        if (s == "rank1sum") return Noise::RankOneSum;
        throw std::invalid_argument("unknown noise kind: " + s);
    }
    static const char* to_string(Signal s) {
        switch (s) {
            case Signal::GaussianIid: return "gaussian_iid";
            case Signal::BernoulliSpectrum: return "bernoulli_spectrum";
            case Signal::BernoulliRademacher: return "bernoulli_rademacher";
        }
        return "?";
    }
    static const char* to_string(Noise n) {
        switch (n) {
            case Noise::Gaussian: return "gaussian";
            case Noise::UniformSpectrum: return "uniform";
            case Noise::RankOneSum: return "rank1sum";
        }
        return "?";
    }
};

inline MatrixXd gaussian_matrix(int rows, int cols, RngStream& rng,
                                double stddev) {
    MatrixXd x(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) x(i, j) = stddev * rng.gaussian();
    return x;
}

// Entries i.i.d. N(0, 1/N): unit mean square singular value as N -> inf.
inline MatrixXd gaussian_iid(int rows, int cols, RngStream& rng) {
    return gaussian_matrix(rows, cols, rng, 1.0 / std::sqrt(rows));
}

// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the sign
// of R's diagonal folded into Q.
inline MatrixXd haar_orthogonal(int n, RngStream& rng) {
    const MatrixXd g = gaussian_matrix(n, n, rng, 1.0);
    Eigen::HouseholderQR<MatrixXd> qr(g);
    MatrixXd q = qr.householderQ();
    const MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

// Thin rows x cols (rows <= cols) block of a Haar orthogonal cols x cols
// matrix: orthonormalize a Gaussian cols x rows matrix and transpose.
inline MatrixXd haar_thin(int rows, int cols, RngStream& rng) {
    if (rows > cols) throw std::invalid_argument("haar_thin: rows > cols");
    const MatrixXd g = gaussian_matrix(cols, rows, rng, 1.0);
    Eigen::HouseholderQR<MatrixXd> qr(g);
    MatrixXd q = MatrixXd::Identity(cols, rows);
    q = qr.householderQ() * q;
    const MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < rows; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q.transpose();
}

// Noise with singular values uniform on [0, 2] in Haar-random bases (square
// case only, matching its analytic R-transform).
inline MatrixXd uniform_spectrum_noise(int n, RngStream& rng) {
    VectorXd sv(n);
    for (int k = 0; k < n; ++k) sv(k) = 2.0 * rng.uniform();
    const MatrixXd u = haar_orthogonal(n, rng);
    const MatrixXd v = haar_orthogonal(n, rng);
    return u * sv.asDiagonal() * v.transpose();
}

// Sum of L = round(c N) independent unit rank-one outer products a b^T with
// a, b uniform on their spheres.
inline MatrixXd rank_one_sum_noise(int rows, int cols, double c,
                                   RngStream& rng) {
    const int count = static_cast<int>(std::lround(c * rows));
    MatrixXd a(rows, count), b(cols, count);
    for (int l = 0; l < count; ++l) {
        for (int i = 0; i < rows; ++i) a(i, l) = rng.gaussian();
        for (int j = 0; j < cols; ++j) b(j, l) = rng.gaussian();
        a.col(l).normalize();
        b.col(l).normalize();
    }
    return a * b.transpose();
}

// Signal with singular values i.i.d. from p delta_0 + (1-p) delta_1 in
// Haar-random bases.
inline MatrixXd bernoulli_spectrum_signal(int rows, int cols, double p,
                                          RngStream& rng) {
    VectorXd sv(rows);
    for (int k = 0; k < rows; ++k) sv(k) = rng.uniform() < p ? 0.0 : 1.0;
    const MatrixXd u = haar_orthogonal(rows, rng);
    const MatrixXd vt = haar_thin(rows, cols, rng);  // first rows of a Haar V^T
    return u * sv.asDiagonal() * vt;
}

// Entries i.i.d. +-1/sqrt(N) with probability (1-p)/2 each, 0 with
// probability p.
inline MatrixXd bernoulli_rademacher_signal(int rows, int cols, double p,
                                            RngStream& rng) {
    MatrixXd s(rows, cols);
    const double scale = 1.0 / std::sqrt(rows);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            const double u = rng.uniform();
            s(i, j) = u < p ? 0.0 : (u < p + 0.5 * (1.0 - p) ? scale : -scale);
        }
    return s;
}

inline MatrixXd sample_signal(const EnsembleSpec& spec, RngStream& rng) {
    switch (spec.signal) {
        case EnsembleSpec::Signal::GaussianIid:
            return gaussian_iid(spec.n_rows, spec.n_cols, rng);
        case EnsembleSpec::Signal::BernoulliSpectrum:
            return bernoulli_spectrum_signal(spec.n_rows, spec.n_cols, spec.p, rng);
        case EnsembleSpec::Signal::BernoulliRademacher:
            return bernoulli_rademacher_signal(spec.n_rows, spec.n_cols, spec.p, rng);
    }
    throw std::logic_error("sample_signal: unknown kind");
}

inline MatrixXd sample_noise(const EnsembleSpec& spec, RngStream& rng) {
    switch (spec.noise) {
        case EnsembleSpec::Noise::Gaussian:
            return gaussian_iid(spec.n_rows, spec.n_cols, rng);
        case EnsembleSpec::Noise::UniformSpectrum:
            return uniform_spectrum_noise(spec.n_rows, rng);
        case EnsembleSpec::Noise::RankOneSum:
            return rank_one_sum_noise(spec.n_rows, spec.n_cols, spec.c, rng);
    }
    throw std::logic_error("sample_noise: unknown kind");
}

// Y = sqrt(lambda) S + Z
inline MatrixXd observe(const MatrixXd& signal, const MatrixXd& noise,
                        double snr) {
    return std::sqrt(snr) * signal + noise;
}

}  // namespace rie
