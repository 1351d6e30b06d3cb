#include <catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "rie/bench.hpp"
#include "rie/matrix_io.hpp"
#include "rie/models.hpp"
#include "rie/plot.hpp"
#include "rie/rng.hpp"

using namespace rie;

TEST_CASE("matrix CSV and binary formats round trip") {
    RngStream rng(55);
    const MatrixXd m = gaussian_iid(7, 11, rng);

    std::stringstream csv;
    save_matrix_csv(m, csv);
    REQUIRE((load_matrix_csv(csv) - m).cwiseAbs().maxCoeff() == 0.0);

    std::stringstream bin;
    save_matrix_riem(m, bin);
    REQUIRE((load_matrix_riem(bin) - m).cwiseAbs().maxCoeff() == 0.0);

    std::stringstream empty;
    REQUIRE_THROWS_AS(load_matrix_csv(empty), io_error);
    std::stringstream badmagic("XXXX....");
    REQUIRE_THROWS_AS(load_matrix_riem(badmagic), io_error);
    std::stringstream truncated("3,4\n1,2,3,4\n");
    REQUIRE_THROWS_AS(load_matrix_csv(truncated), io_error);

    // extension selects the on-disk format; loading detects by magic
    const std::string p1 = "/tmp/rie_test_matrix.csv";
    const std::string p2 = "/tmp/rie_test_matrix.riem";
    save_matrix(m, p1);
    save_matrix(m, p2);
    REQUIRE((load_matrix(p1) - m).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((load_matrix(p2) - m).cwiseAbs().maxCoeff() == 0.0);
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("experiment configs round trip through JSON with stable hashes") {
    for (const char* name :
         {"fig1a", "fig1b", "fig3", "fig4", "fig5", "fig6", "fig7"}) {
        const ExperimentConfig c = ExperimentConfig::builtin(name);
        const ExperimentConfig back = ExperimentConfig::from_json(c.to_json());
        REQUIRE(back.to_json() == c.to_json());
        REQUIRE(back.hash() == c.hash());
    }
    REQUIRE_THROWS_AS(ExperimentConfig::builtin("fig99"), std::invalid_argument);

    ExperimentConfig bad = ExperimentConfig::builtin("fig1a");
    bad.n_trials = 0;
    REQUIRE_THROWS_WITH(bad.validate(),
                        Catch::Matchers::ContainsSubstring("config.n_trials"));
    bad = ExperimentConfig::builtin("fig1a");
    bad.lambda_grid = {1.0, -2.0};
    REQUIRE_THROWS_WITH(bad.validate(),
                        Catch::Matchers::ContainsSubstring("config.lambda_grid"));
}

TEST_CASE("benchmark runs are deterministic across thread counts") {
    ExperimentConfig c;
    c.experiment = "custom";
    c.n_rows = 24;
    c.n_cols = 36;
    c.lambda_grid = {1.0, 2.0};
    c.n_trials = 6;
    c.master_seed = 9001;

    std::ostringstream a, b;
    run_experiment(c, 1).write_csv(a);
    run_experiment(c, 4).write_csv(b);
    REQUIRE(a.str() == b.str());
    REQUIRE(a.str().rfind(ExperimentResult::csv_header(), 0) == 0);

    const ExperimentResult r = run_experiment(c, 2);
    REQUIRE(r.rows.size() == 4);  // oracle + rie per lambda
    for (const auto& row : r.rows) {
        REQUIRE(row.ci95 >= 0.0);
        REQUIRE(row.n_trials == 6);
        REQUIRE(row.wall_ms == 0);  // timing off by default for stable bytes
    }
}

TEST_CASE("residual-scan configs produce one row per N") {
    ExperimentConfig c = ExperimentConfig::builtin("fig3");
    c.n_grid = {24, 48};
    c.n_trials = 4;
    const ExperimentResult r = run_experiment(c, 2);
    REQUIRE(r.rows.size() == 2);
    REQUIRE(r.rows[0].estimator == "theorem2_abs_residual");
    REQUIRE(r.rows[0].n == 24);
    REQUIRE(r.rows[1].n == 48);
    REQUIRE(r.rows[0].mean_mse > r.rows[1].mean_mse);  // shrinks with N
}

TEST_CASE("epsilon sweeps tag the estimator name") {
    ExperimentConfig c;
    c.n_rows = 20;
    c.n_cols = 40;
    c.lambda_grid = {2.0};
    c.epsilon_grid = {0.2, 0.5};
    c.n_trials = 3;
    const ExperimentResult r = run_experiment(c, 1);
    bool found = false;
    for (const auto& row : r.rows)
        if (row.estimator == "rie_gaussian_eps0.5") found = true;
    REQUIRE(found);
}

TEST_CASE("SVG rendering is deterministic and validates its input") {
    ExperimentConfig c;
    c.n_rows = 16;
    c.n_cols = 16;
    c.lambda_grid = {0.5, 1.0, 2.0};
    c.n_trials = 3;
    std::ostringstream csv;
    run_experiment(c, 1).write_csv(csv);

    std::istringstream in1(csv.str()), in2(csv.str());
    const std::string svg1 = render_results_svg(in1);
    const std::string svg2 = render_results_svg(in2);
    REQUIRE(svg1 == svg2);
    REQUIRE(svg1.rfind("<svg", 0) == 0);
    REQUIRE(svg1.find("oracle") != std::string::npos);

    std::istringstream empty("");
    REQUIRE_THROWS_AS(render_results_svg(empty), plot_error);
    std::istringstream headeronly(ExperimentResult::csv_header());
    REQUIRE_THROWS_AS(render_results_svg(headeronly), plot_error);
    std::istringstream badheader("a,b,c\n1,2,3\n");
    REQUIRE_THROWS_AS(render_results_svg(badheader), plot_error);

    // residual scans get the reference line
    ExperimentConfig f3 = ExperimentConfig::builtin("fig3");
    f3.n_grid = {24, 48};
    f3.n_trials = 3;
    std::ostringstream csv3;
    run_experiment(f3, 1).write_csv(csv3);
    std::istringstream in3(csv3.str());
    REQUIRE(render_results_svg(in3).find("ref_0.4_N^-1/2") != std::string::npos);
}
