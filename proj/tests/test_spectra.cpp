#include <catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <complex>

#include "rie/models.hpp"
#include "rie/rng.hpp"
#include "rie/spectra.hpp"

using namespace rie;

TEST_CASE("canonicalize transposes tall matrices") {
    MatrixXd tall(5, 3);
    tall.setRandom();
    auto [c, transposed] = canonicalize(tall);
    REQUIRE(transposed);
    REQUIRE(c.rows() == 3);
    REQUIRE(c.cols() == 5);
    REQUIRE((c - tall.transpose()).norm() == 0.0);

    auto [same, t2] = canonicalize(c);
    REQUIRE_FALSE(t2);

    REQUIRE_THROWS_AS(canonicalize(MatrixXd(0, 3)), std::invalid_argument);
}

TEST_CASE("svd_decompose reconstructs and is orthonormal") {
    RngStream rng(11);
    const MatrixXd y = gaussian_iid(6, 9, rng);
    const SvdResult svd = svd_decompose(y);
    REQUIRE((svd.reconstruct() - y).norm() < 1e-12);
    REQUIRE((svd.left_vectors.transpose() * svd.left_vectors -
             MatrixXd::Identity(6, 6))
                .norm() < 1e-12);
    REQUIRE((svd.right_vectors.transpose() * svd.right_vectors -
             MatrixXd::Identity(6, 6))
                .norm() < 1e-12);
    for (int k = 1; k < 6; ++k)
        REQUIRE(svd.spectrum.values(k) <= svd.spectrum.values(k - 1));

    REQUIRE_THROWS_AS(svd_decompose(y.transpose()), std::invalid_argument);
    MatrixXd bad = y;
    bad(0, 0) = std::nan("");
    REQUIRE_THROWS_AS(svd_decompose(bad), std::invalid_argument);
}

TEST_CASE("hermitize eigenvalues are plus-minus singular values") {
    RngStream rng(12);
    const MatrixXd y = gaussian_iid(4, 7, rng);
    const SvdResult svd = svd_decompose(y);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(hermitize(y));
    const VectorXd ev = es.eigenvalues();  // ascending, length 11
    for (int k = 0; k < 4; ++k) {
        REQUIRE(ev(10 - k) == Catch::Approx(svd.spectrum.values(k)).margin(1e-10));
        REQUIRE(ev(k) == Catch::Approx(-svd.spectrum.values(k)).margin(1e-10));
    }
    for (int k = 4; k < 7; ++k) REQUIRE(std::abs(ev(k)) < 1e-10);
}

TEST_CASE("stieltjes matches direct symmetrized sum and bounds") {
    EmpiricalSpectrum spec;
    spec.values = VectorXd::Zero(3);
    spec.values << 2.0, 1.0, 0.5;
    spec.n_rows = 3;
    spec.n_cols = 3;
    const Complex z(0.7, -0.1);
    Complex direct(0, 0);
    for (int k = 0; k < 3; ++k)
        direct += 1.0 / (z - spec.values(k)) + 1.0 / (z + spec.values(k));
    direct /= 6.0;
    REQUIRE(std::abs(stieltjes(spec, z) - direct) < 1e-14);
    REQUIRE(std::abs(stieltjes(spec, z)) <= 1.0 / std::abs(z.imag()) + 1e-12);
    REQUIRE_THROWS_AS(stieltjes(spec, Complex(0.7, 0.0)), std::domain_error);
}

TEST_CASE("plemelj limits give Cauchy-kernel density and Hilbert transform") {
    // single atom at a: symmetrized measure has mass 1/2 at +-a
    EmpiricalSpectrum spec;
    spec.values = VectorXd::Constant(1, 1.5);
    spec.n_rows = 1;
    spec.n_cols = 1;
    const double a = 1.5, eta = 0.05, x = 1.3;
    auto [dens, hilb] = plemelj_limits(spec, x, eta);
    const double expected_dens =
        0.5 * (eta / ((x - a) * (x - a) + eta * eta) +
               eta / ((x + a) * (x + a) + eta * eta)) /
        M_PI;
    const double expected_hilb =
        0.5 * ((x - a) / ((x - a) * (x - a) + eta * eta) +
               (x + a) / ((x + a) * (x + a) + eta * eta)) /
        M_PI;
    REQUIRE(dens == Catch::Approx(expected_dens).epsilon(1e-12));
    REQUIRE(hilb == Catch::Approx(expected_hilb).epsilon(1e-12));
    REQUIRE(dens > 0.0);
    REQUIRE_THROWS_AS(plemelj_limits(spec, x, 0.0), std::domain_error);
}

TEST_CASE("smoothed density integrates to one and Hilbert is odd-symmetric") {
    RngStream rng(5);
    const MatrixXd y = gaussian_iid(200, 200, rng);
    const SvdResult svd = svd_decompose(y);
    SpectralFunction f(svd.spectrum, smoothing_eta(200));

    // full symmetrized grid
    double mass = 0.0;
    const int np = 4000;
    const double hi = svd.spectrum.max_value() + 3.0;
    double prev = f.density(-hi);
    for (int i = 1; i <= np; ++i) {
        const double x = -hi + 2.0 * hi * i / np;
        const double cur = f.density(x);
        mass += 0.5 * (cur + prev) * (2.0 * hi / np);
        prev = cur;
    }
    REQUIRE(mass > 0.98);
    REQUIRE(mass < 1.02);
    REQUIRE(f.density(0.3) == Catch::Approx(f.density(-0.3)).epsilon(1e-12));
    REQUIRE(f.hilbert(0.3) == Catch::Approx(-f.hilbert(-0.3)).epsilon(1e-12));
}

TEST_CASE("smoothing_eta") {
    REQUIRE(smoothing_eta(100) == Catch::Approx(0.1));
    REQUIRE(smoothing_eta(1000, 0.3) == Catch::Approx(std::pow(1000.0, -0.3)));
}
