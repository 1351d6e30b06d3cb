#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rie/bench.hpp"
#include "rie/estimators.hpp"
#include "rie/matrix_io.hpp"
#include "rie/models.hpp"
#include "rie/plot.hpp"
#include "rie/theory.hpp"

namespace {

constexpr int kExitIo = 2;
constexpr int kExitValidation = 3;
constexpr int kExitNumeric = 4;

int run_denoise(const std::string& input, const std::string& noise_name,
                double c, double snr, double eps, const std::string& output) {
    rie::MatrixXd y_raw;
    try {
        y_raw = rie::load_matrix(input);
    } catch (const rie::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    auto [y, transposed] = rie::canonicalize(y_raw);

    rie::NoiseFamily family = rie::NoiseFamily::gaussian(1.0);
    const double alpha = static_cast<double>(y.rows()) / y.cols();
    bool use_gaussian_formula = false;
    if (noise_name == "gaussian") {
        use_gaussian_formula = true;
    } else if (noise_name == "uniform") {
        family = rie::NoiseFamily::uniform_spectrum();
        if (y.rows() != y.cols()) {
            std::cerr << "error: uniform noise supports square matrices only\n";
            return kExitValidation;
        }
    } else if (noise_name == "rank1sum") {
        family = rie::NoiseFamily::rank_one_sum(c, alpha);
    } else {
        std::cerr << "error: unknown noise family '" << noise_name << "'\n";
        return kExitValidation;
    }

    rie::DenoisingInstance inst = rie::make_instance(y, snr, eps);
    const rie::ShrinkageResult res = use_gaussian_formula
                                         ? rie::gaussian_rie(inst)
                                         : rie::general_rie(inst, family);

    std::vector<int> bad;
    for (Eigen::Index j = 0; j < res.xis.size(); ++j)
        if (!std::isfinite(res.xis(j))) bad.push_back(static_cast<int>(j));
    if (!bad.empty()) {
        std::cerr << "error: non-finite shrunken values at indices:";
        for (int j : bad) std::cerr << " " << j;
        std::cerr << "\n";
        return kExitNumeric;
    }

    rie::MatrixXd s_hat = res.estimate(inst.svd);
    if (transposed) s_hat.transposeInPlace();
    try {
        rie::save_matrix(s_hat, output);
    } catch (const rie::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }

    nlohmann::json j;
    j["input"] = input;
    j["output"] = output;
    j["n"] = y.rows();
    j["m"] = y.cols();
    j["transposed"] = transposed;
    j["noise"] = noise_name;
    j["snr"] = snr;
    j["epsilon"] = eps;
    j["eta"] = res.eta_used;
    j["estimator"] = use_gaussian_formula ? "rie_gaussian" : "rie_general";
    j["degenerate_density"] =
        (res.flags & rie::kFlagDegenerateDensity) != 0;
    j["xi_min"] = res.xis.size() ? res.xis.minCoeff() : 0.0;
    j["xi_max"] = res.xis.size() ? res.xis.maxCoeff() : 0.0;
    j["xi_mean"] = res.xis.size() ? res.xis.mean() : 0.0;
    j["estimate_fro_norm"] = s_hat.norm();
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_bench(const std::string& config_path, const std::string& experiment,
              const std::string& out, std::int64_t seed_override, int threads,
              bool timing) {
    rie::ExperimentConfig config;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "error: cannot read config " << config_path << "\n";
            return kExitIo;
        }
        nlohmann::json j;
        try {
            in >> j;
            config = rie::ExperimentConfig::from_json(j);
        } catch (const std::exception& e) {
            std::cerr << "error: invalid config: " << e.what() << "\n";
            return kExitValidation;
        }
    } else if (!experiment.empty()) {
        try {
            config = rie::ExperimentConfig::builtin(experiment);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitValidation;
        }
    } else {
        std::cerr << "error: provide --config or --experiment\n";
        return kExitValidation;
    }
    if (seed_override >= 0)
        config.master_seed = static_cast<std::uint64_t>(seed_override);
    if (timing) config.timing = true;

    rie::ExperimentResult result;
    try {
        result = rie::run_experiment(config, threads);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }

    std::ofstream os(out);
    if (!os) {
        std::cerr << "error: cannot write " << out << "\n";
        return kExitIo;
    }
    result.write_csv(os);
    std::cerr << "wrote " << result.rows.size() << " rows to " << out
              << " (config hash " << result.config_hash << ")\n";
    return 0;
}

int run_check_theorem2(const std::string& n_grid_arg, const std::string& out,
                       int trials, std::int64_t seed, int threads) {
    rie::ExperimentConfig config = rie::ExperimentConfig::builtin("fig3");
    if (!n_grid_arg.empty()) {
        config.n_grid.clear();
        std::stringstream ss(n_grid_arg);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                config.n_grid.push_back(std::stoi(tok));
            } catch (const std::exception&) {
                std::cerr << "error: bad --n-grid entry '" << tok << "'\n";
                return kExitValidation;
            }
        }
    }
    if (trials > 0) config.n_trials = trials;
    if (seed >= 0) config.master_seed = static_cast<std::uint64_t>(seed);

    rie::ExperimentResult result;
    try {
        result = rie::run_experiment(config, threads);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    std::ofstream os(out);
    if (!os) {
        std::cerr << "error: cannot write " << out << "\n";
        return kExitIo;
    }
    result.write_csv(os);
    return 0;
}

int run_overlap(double alpha, int n, int trials, double snr, int sigma_index,
                std::int64_t seed, const std::string& out,
                const std::string& theory_out) {
    if (alpha <= 0.0 || alpha > 1.0) {
        std::cerr << "error: --alpha must be in (0, 1]\n";
        return kExitValidation;
    }
    rie::EnsembleSpec spec;
    spec.n_rows = n;
    spec.n_cols = static_cast<int>(std::lround(n / alpha));
    spec.snr = snr;
    try {
        spec.validate();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    if (sigma_index < 0) sigma_index = n / 2;
    const std::uint64_t master = seed >= 0 ? static_cast<std::uint64_t>(seed) : 1;

    rie::OverlapCurve curve;
    try {
        curve = rie::overlap_empirical(spec, sigma_index, trials, master);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    std::ofstream os(out);
    if (!os) {
        std::cerr << "error: cannot write " << out << "\n";
        return kExitIo;
    }
    curve.write_csv(os);

    if (!theory_out.empty()) {
        // effective signal is sqrt(lambda) S; reproduce its sigma_k
        rie::RngStream srng(rie::derive_seed(master, 0, 1));
        const rie::MatrixXd a =
            std::sqrt(spec.snr) * rie::sample_signal(spec, srng);
        const rie::SvdResult asvd = rie::svd_decompose(a);
        const double sigma = asvd.spectrum.values(sigma_index);
        const rie::DensityGrid grid =
            rie::analytic_gaussian_grid(spec.alpha(), spec.snr, 4001);
        const rie::NoiseFamily noise = rie::NoiseFamily::gaussian(spec.alpha());
        std::ofstream ts(theory_out);
        if (!ts) {
            std::cerr << "error: cannot write " << theory_out << "\n";
            return kExitIo;
        }
        ts << "gamma,overlap,stderr,n_trials\n";
        char buf[120];
        for (double g : curve.gammas) {
            const double o = rie::overlap_theoretical(g, sigma, grid, noise,
                                                      spec.alpha(), 5e-3);
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,0,0\n", g, o);
            ts << buf;
        }
    }
    return 0;
}

int run_plot(const std::string& input, const std::string& out) {
    std::ifstream in(input);
    if (!in) {
        std::cerr << "error: cannot read " << input << "\n";
        return kExitIo;
    }
    std::string svg;
    try {
        svg = rie::render_results_svg(in);
    } catch (const rie::plot_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    std::ofstream os(out, std::ios::binary);
    if (!os) {
        std::cerr << "error: cannot write " << out << "\n";
        return kExitIo;
    }
    os << svg;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rotational invariant estimators for matrix denoising"};
    app.require_subcommand(1);

    // denoise
    auto* denoise = app.add_subcommand("denoise", "Denoise a matrix from file");
    std::string d_input, d_output, d_noise = "gaussian";
    double d_c = 1.0, d_snr = 1.0, d_eps = 0.5;
    denoise->add_option("--input", d_input, "observation matrix (.csv or .riem)")
        ->required();
    denoise->add_option("--noise", d_noise, "gaussian|uniform|rank1sum");
    denoise->add_option("--c", d_c, "rank-one-sum rate");
    denoise->add_option("--snr", d_snr, "signal-to-noise ratio lambda")
        ->required();
    denoise->add_option("--eps", d_eps, "smoothing exponent");
    denoise->add_option("--output", d_output, "estimate output path")->required();

    // bench
    auto* bench = app.add_subcommand("bench", "Run a Monte-Carlo benchmark");
    std::string b_config, b_experiment, b_out;
    std::int64_t b_seed = -1;
    int b_threads = 0;
    bool b_timing = false;
    bench->add_option("--config", b_config, "JSON config path");
    bench->add_option("--experiment", b_experiment,
                      "built-in experiment name (fig1a..fig7)");
    bench->add_option("--out", b_out, "results CSV path")->required();
    bench->add_option("--seed", b_seed, "master seed override");
    bench->add_option("--threads", b_threads,
                      "worker threads (RIE_THREADS overrides)");
    bench->add_flag("--timing", b_timing, "record wall-clock in wall_ms");

    // check-theorem2
    auto* thm = app.add_subcommand("check-theorem2",
                                   "Trace-relation residual scan over N");
    std::string t_ngrid, t_out;
    int t_trials = 0, t_threads = 0;
    std::int64_t t_seed = -1;
    thm->add_option("--n-grid", t_ngrid, "comma-separated N values");
    thm->add_option("--out", t_out, "results CSV path")->required();
    thm->add_option("--trials", t_trials, "seeds per N");
    thm->add_option("--seed", t_seed, "master seed");
    thm->add_option("--threads", t_threads, "worker threads");

    // overlap
    auto* ovl = app.add_subcommand("overlap",
                                   "Monte-Carlo singular-vector overlap curve");
    double o_alpha = 0.25, o_snr = 1.0;
    int o_n = 1000, o_trials = 1000, o_sigma_index = -1;
    std::int64_t o_seed = -1;
    std::string o_out, o_theory_out;
    ovl->add_option("--alpha", o_alpha, "aspect ratio N/M");
    ovl->add_option("--n", o_n, "rows N");
    ovl->add_option("--trials", o_trials, "noise redraws");
    ovl->add_option("--snr", o_snr, "signal-to-noise ratio lambda");
    ovl->add_option("--sigma-index", o_sigma_index,
                    "signal singular value index (default N/2)");
    ovl->add_option("--seed", o_seed, "master seed");
    ovl->add_option("--out", o_out, "empirical curve CSV path")->required();
    ovl->add_option("--theory-out", o_theory_out,
                    "also write the limiting curve to this CSV");

    // plot
    auto* plot = app.add_subcommand("plot", "Render a results CSV as SVG");
    std::string p_input, p_out;
    plot->add_option("--input", p_input, "results CSV")->required();
    plot->add_option("--out", p_out, "SVG output path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (denoise->parsed())
            return run_denoise(d_input, d_noise, d_c, d_snr, d_eps, d_output);
        if (bench->parsed())
            return run_bench(b_config, b_experiment, b_out, b_seed, b_threads,
                             b_timing);
        if (thm->parsed())
            return run_check_theorem2(t_ngrid, t_out, t_trials, t_seed,
                                      t_threads);
        if (ovl->parsed())
            return run_overlap(o_alpha, o_n, o_trials, o_snr, o_sigma_index,
                               o_seed, o_out, o_theory_out);
        if (plot->parsed()) return run_plot(p_input, p_out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return 0;
}
