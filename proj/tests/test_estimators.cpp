#include <catch_amalgamated.hpp>

#include <cmath>

#include "rie/estimators.hpp"
#include "rie/models.hpp"
#include "rie/rng.hpp"

using namespace rie;

namespace {

struct Problem {
    MatrixXd s;
    MatrixXd y;
    DenoisingInstance inst;
};

Problem make_problem(int n, int m, double lambda, std::uint64_t seed,
                     double eps = 0.5) {
    RngStream srng(derive_seed(seed, 0, 0));
    RngStream zrng(derive_seed(seed, 0, 1));
    Problem p;
    p.s = gaussian_iid(n, m, srng);
    p.y = observe(p.s, gaussian_iid(n, m, zrng), lambda);
    p.inst = make_instance(p.y, lambda, eps);
    return p;
}

}  // namespace

TEST_CASE("oracle coefficients are diag(U^T S V) and minimize the loss") {
    auto p = make_problem(20, 30, 1.0, 3);
    const ShrinkageResult oracle = oracle_rie(p.inst, p.s);
    const MatrixXd direct = p.inst.svd.left_vectors.transpose() * p.s *
                            p.inst.svd.right_vectors;
    for (int j = 0; j < 20; ++j)
        REQUIRE(oracle.xis(j) == Catch::Approx(direct(j, j)).margin(1e-12));

    const double base = mse(oracle.estimate(p.inst.svd), p.s);
    // any perturbation of the coefficients increases the loss
    RngStream rng(4);
    for (int trial = 0; trial < 5; ++trial) {
        ShrinkageResult perturbed = oracle;
        for (int j = 0; j < 20; ++j) perturbed.xis(j) += 0.1 * rng.gaussian();
        REQUIRE(mse(perturbed.estimate(p.inst.svd), p.s) > base);
    }

    MatrixXd wrong(21, 30);
    wrong.setZero();
    REQUIRE_THROWS_AS(oracle_rie(p.inst, wrong), std::invalid_argument);
}

TEST_CASE("mse") {
    MatrixXd a = MatrixXd::Zero(2, 3);
    MatrixXd b = MatrixXd::Ones(2, 3);
    REQUIRE(mse(a, b) == Catch::Approx(3.0));
    REQUIRE_THROWS_AS(mse(a, MatrixXd::Zero(3, 2)), std::invalid_argument);
}

TEST_CASE("gaussian formula is the Gaussian-family case of the general one") {
    for (auto [n, m] : {std::pair{40, 40}, std::pair{30, 60}}) {
        auto p = make_problem(n, m, 2.0, 17);
        const ShrinkageResult g = gaussian_rie(p.inst);
        const ShrinkageResult a =
            general_rie(p.inst, NoiseFamily::gaussian(p.inst.alpha()));
        REQUIRE((g.xis - a.xis).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("both estimators are equivariant under rotations") {
    auto p = make_problem(15, 25, 1.5, 23);
    RngStream rng(24);
    const MatrixXd u = haar_orthogonal(15, rng);
    const MatrixXd v = haar_orthogonal(25, rng);
    const MatrixXd y_rot = u * p.y * v.transpose();
    DenoisingInstance inst_rot = make_instance(y_rot, 1.5);

    const MatrixXd est = general_rie(p.inst, NoiseFamily::gaussian(0.6))
                             .estimate(p.inst.svd);
    const MatrixXd est_rot = general_rie(inst_rot, NoiseFamily::gaussian(0.6))
                                 .estimate(inst_rot.svd);
    REQUIRE((est_rot - u * est * v.transpose()).cwiseAbs().maxCoeff() < 1e-8);

    const MatrixXd gest = gaussian_rie(p.inst).estimate(p.inst.svd);
    const MatrixXd gest_rot = gaussian_rie(inst_rot).estimate(inst_rot.svd);
    REQUIRE((gest_rot - u * gest * v.transpose()).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("zero observation produces zero estimate") {
    DenoisingInstance inst = make_instance(MatrixXd::Zero(10, 15), 1.0);
    REQUIRE(gaussian_rie(inst).xis.cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE(general_rie(inst, NoiseFamily::gaussian(10.0 / 15.0))
                .xis.cwiseAbs()
                .maxCoeff() < 1e-12);
}

TEST_CASE("general_rie validates the family aspect ratio") {
    auto p = make_problem(10, 20, 1.0, 5);
    REQUIRE_THROWS_AS(general_rie(p.inst, NoiseFamily::gaussian(1.0)),
                      std::invalid_argument);
}

TEST_CASE("window-integral coefficients converge to the oracle on small toys") {
    int matched = 0, total = 0;
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        auto p = make_problem(8, 12, 1.0, seed);
        const ShrinkageResult oracle = oracle_rie(p.inst, p.s);
        for (int j = 0; j < 8; ++j) {
            const ExactXiResult r = exact_xi_prop1(p.inst, p.s, j);
            if (!r.converged || !r.isolated) continue;
            ++total;
            matched += std::abs(r.xi - oracle.xis(j)) < 1e-4;
        }
    }
    REQUIRE(total > 40);
    REQUIRE(matched == total);
}

TEST_CASE("shrinkage reduces the error relative to the raw observation") {
    auto p = make_problem(200, 200, 1.0, 77);
    const MatrixXd est = gaussian_rie(p.inst).estimate(p.inst.svd);
    REQUIRE(mse(est, p.s) < mse(p.y, p.s));
}
