#include <catch_amalgamated.hpp>

#include <cmath>

#include "rie/models.hpp"
#include "rie/rng.hpp"
#include "rie/spectra.hpp"

using namespace rie;

TEST_CASE("rng streams are deterministic and role-separated") {
    RngStream a(derive_seed(42, 0, 0));
    RngStream b(derive_seed(42, 0, 0));
    RngStream c(derive_seed(42, 0, 1));
    bool differs = false;
    for (int i = 0; i < 16; ++i) {
        const double va = a.uniform();
        REQUIRE(va == b.uniform());
        if (va != c.uniform()) differs = true;
    }
    REQUIRE(differs);
}

TEST_CASE("gaussian stream has unit variance and zero mean") {
    RngStream rng(derive_seed(1, 2, 3));
    const int n = 20000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = rng.gaussian();
        sum += g;
        sumsq += g * g;
    }
    REQUIRE(sum / n == Catch::Approx(0.0).margin(0.03));
    REQUIRE(sumsq / n == Catch::Approx(1.0).margin(0.05));
}

TEST_CASE("haar_orthogonal is orthogonal and sign-balanced") {
    RngStream rng(21);
    const int n = 16;
    const MatrixXd q = haar_orthogonal(n, rng);
    REQUIRE((q.transpose() * q - MatrixXd::Identity(n, n)).norm() < 1e-12);

    // first-entry distribution: mean 0, variance 1/n
    double sum = 0.0, sumsq = 0.0;
    const int samples = 400;
    for (int s = 0; s < samples; ++s) {
        const MatrixXd m = haar_orthogonal(n, rng);
        sum += m(0, 0);
        sumsq += m(0, 0) * m(0, 0);
    }
    REQUIRE(sum / samples == Catch::Approx(0.0).margin(0.05));
    REQUIRE(sumsq / samples == Catch::Approx(1.0 / n).margin(0.02));
}

TEST_CASE("haar_thin rows are orthonormal") {
    RngStream rng(22);
    const MatrixXd a = haar_thin(4, 10, rng);
    REQUIRE(a.rows() == 4);
    REQUIRE(a.cols() == 10);
    REQUIRE((a * a.transpose() - MatrixXd::Identity(4, 4)).norm() < 1e-12);
    REQUIRE_THROWS_AS(haar_thin(10, 4, rng), std::invalid_argument);
}

TEST_CASE("gaussian_iid has unit mean-square singular value per aspect") {
    RngStream rng(23);
    const MatrixXd x = gaussian_iid(300, 600, rng);
    // E (1/N) sum gamma^2 = E ||X||_F^2 / N = M/N
    REQUIRE(x.squaredNorm() / 300.0 == Catch::Approx(2.0).epsilon(0.05));
}

TEST_CASE("uniform_spectrum_noise has uniform singular values on [0, 2]") {
    RngStream rng(24);
    const int n = 300;
    const MatrixXd z = uniform_spectrum_noise(n, rng);
    const VectorXd sv = svd_decompose(z).spectrum.values;
    REQUIRE(sv.maxCoeff() <= 2.0 + 1e-10);
    REQUIRE(sv.minCoeff() >= -1e-10);
    REQUIRE(sv.mean() == Catch::Approx(1.0).margin(0.1));
    // Kolmogorov-Smirnov distance to U[0, 2]
    VectorXd sorted = sv;
    std::sort(sorted.data(), sorted.data() + n);
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
        const double cdf = sorted(i) / 2.0;
        ks = std::max(ks, std::abs(cdf - (i + 1.0) / n));
        ks = std::max(ks, std::abs(cdf - static_cast<double>(i) / n));
    }
    REQUIRE(ks < 1.63 / std::sqrt(static_cast<double>(n)));  // ~1% level
}

TEST_CASE("rank_one_sum_noise has the advertised rank") {
    RngStream rng(25);
    const MatrixXd z = rank_one_sum_noise(40, 80, 0.5, rng);
    const VectorXd sv = svd_decompose(z).spectrum.values;
    int rank = 0;
    for (int k = 0; k < sv.size(); ++k)
        if (sv(k) > 1e-10) ++rank;
    REQUIRE(rank == 20);
}

TEST_CASE("bernoulli_spectrum_signal has 0/1 singular values") {
    RngStream rng(26);
    const MatrixXd s = bernoulli_spectrum_signal(60, 120, 0.3, rng);
    const VectorXd sv = svd_decompose(s).spectrum.values;
    int ones = 0;
    for (int k = 0; k < sv.size(); ++k) {
        const bool is0 = std::abs(sv(k)) < 1e-9;
        const bool is1 = std::abs(sv(k) - 1.0) < 1e-9;
        REQUIRE((is0 || is1));
        ones += is1;
    }
    REQUIRE(ones > 0.7 * 0.5 * 60);  // ~ (1-p) N with slack
}

TEST_CASE("bernoulli_rademacher_signal entries take three values") {
    RngStream rng(27);
    const int n = 50, m = 100;
    const MatrixXd s = bernoulli_rademacher_signal(n, m, 0.4, rng);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    int zeros = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            const double v = s(i, j);
            REQUIRE((v == 0.0 || v == scale || v == -scale));
            zeros += v == 0.0;
        }
    REQUIRE(static_cast<double>(zeros) / (n * m) ==
            Catch::Approx(0.4).margin(0.05));
}

TEST_CASE("observe forms sqrt(lambda) S + Z") {
    RngStream rng(28);
    const MatrixXd s = gaussian_iid(5, 8, rng);
    const MatrixXd z = gaussian_iid(5, 8, rng);
    const MatrixXd y = observe(s, z, 4.0);
    REQUIRE((y - 2.0 * s - z).norm() < 1e-14);
}

TEST_CASE("ensemble validation rejects bad parameters") {
    EnsembleSpec e;
    e.n_rows = 100;
    e.n_cols = 50;
    REQUIRE_THROWS_AS(e.validate(), std::invalid_argument);
    e.n_cols = 200;
    e.snr = -1.0;
    REQUIRE_THROWS_AS(e.validate(), std::invalid_argument);
    e.snr = 1.0;
    e.noise = EnsembleSpec::Noise::UniformSpectrum;
    REQUIRE_THROWS_AS(e.validate(), std::invalid_argument);  // needs N = M
    e.noise = EnsembleSpec::Noise::RankOneSum;
    e.c = 0.0;
    REQUIRE_THROWS_AS(e.validate(), std::invalid_argument);
    e.c = 1.0;
    e.validate();
    REQUIRE(EnsembleSpec::noise_from_string("rank1sum") ==
            EnsembleSpec::Noise::RankOneSum);
    REQUIRE_THROWS_AS(EnsembleSpec::signal_from_string("nope"),
                      std::invalid_argument);
}
