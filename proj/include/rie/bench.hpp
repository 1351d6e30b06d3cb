#pragma once

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rie/estimators.hpp"
#include "rie/models.hpp"
#include "rie/rng.hpp"
#include "rie/theory.hpp"

namespace rie {

struct ExperimentConfig {
    std::string experiment = "custom";
    int n_rows = 1000;
    int n_cols = 1000;
    std::vector<double> lambda_grid = {1.0};
    EnsembleSpec::Signal signal = EnsembleSpec::Signal::GaussianIid;
    EnsembleSpec::Noise noise = EnsembleSpec::Noise::Gaussian;
    double c = 1.0;
    double p = 0.5;
    int n_trials = 10;
    double epsilon = 0.5;
    std::vector<double> epsilon_grid;  // non-empty: sweep the smoothing exponent
    std::vector<int> n_grid;           // non-empty: trace-relation residual scan
    std::uint64_t master_seed = 1;
    double mse_scale = 1.0;  // reported MSEs are multiplied by this
    bool timing = false;     // wall_ms column is 0 unless set, keeping CSVs
                             // byte-stable across runs

    EnsembleSpec ensemble(double lambda) const {
        EnsembleSpec e;
        e.signal = signal;
        e.noise = noise;
        e.n_rows = n_rows;
        e.n_cols = n_cols;
        e.snr = lambda;
        e.c = c;
        e.p = p;
        return e;
    }

    void validate() const {
        if (n_trials < 1) throw std::invalid_argument("config.n_trials: must be >= 1");
        if (lambda_grid.empty())
            throw std::invalid_argument("config.lambda_grid: must be non-empty");
        for (double l : lambda_grid)
            if (l <= 0.0)
                throw std::invalid_argument("config.lambda_grid: entries must be > 0");
        for (double e : epsilon_grid)
            if (e <= 0.0 || e >= 1.0)
                throw std::invalid_argument("config.epsilon_grid: entries must be in (0,1)");
        for (int n : n_grid)
            if (n < 2) throw std::invalid_argument("config.n_grid: entries must be >= 2");
        if (epsilon <= 0.0 || epsilon >= 1.0)
            throw std::invalid_argument("config.epsilon: must be in (0,1)");
        if (mse_scale <= 0.0)
            throw std::invalid_argument("config.mse_scale: must be > 0");
        ensemble(lambda_grid.front()).validate();  // dims vs ensembles
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["experiment"] = experiment;
        j["n_rows"] = n_rows;
        j["n_cols"] = n_cols;
        j["lambda_grid"] = lambda_grid;
        j["signal"] = EnsembleSpec::to_string(signal);
        j["noise"] = EnsembleSpec::to_string(noise);
        j["c"] = c;
        j["p"] = p;
        j["n_trials"] = n_trials;
        j["epsilon"] = epsilon;
        j["epsilon_grid"] = epsilon_grid;
        j["n_grid"] = n_grid;
        j["master_seed"] = master_seed;
        j["mse_scale"] = mse_scale;
        j["timing"] = timing;
        return j;
    }

    static ExperimentConfig from_json(const nlohmann::json& j) {
        ExperimentConfig c;
        if (j.contains("experiment")) {
            const std::string name = j.at("experiment").get<std::string>();
            c = builtin(name);
        }
        if (j.contains("n_rows")) c.n_rows = j.at("n_rows").get<int>();
        if (j.contains("n_cols")) c.n_cols = j.at("n_cols").get<int>();
        if (j.contains("lambda_grid"))
            c.lambda_grid = j.at("lambda_grid").get<std::vector<double>>();
        if (j.contains("signal"))
            c.signal = EnsembleSpec::signal_from_string(j.at("signal").get<std::string>());
        if (j.contains("noise"))
            c.noise = EnsembleSpec::noise_from_string(j.at("noise").get<std::string>());
        if (j.contains("c")) c.c = j.at("c").get<double>();
        if (j.contains("p")) c.p = j.at("p").get<double>();
        if (j.contains("n_trials")) c.n_trials = j.at("n_trials").get<int>();
        if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
        if (j.contains("epsilon_grid"))
            c.epsilon_grid = j.at("epsilon_grid").get<std::vector<double>>();
        if (j.contains("n_grid")) c.n_grid = j.at("n_grid").get<std::vector<int>>();
        if (j.contains("master_seed"))
            c.master_seed = j.at("master_seed").get<std::uint64_t>();
        if (j.contains("mse_scale")) c.mse_scale = j.at("mse_scale").get<double>();
        if (j.contains("timing")) c.timing = j.at("timing").get<bool>();
        c.validate();
        return c;
    }

    // FNV-1a over the canonical JSON serialization.
    std::uint64_t hash() const {
        const std::string s = to_json().dump();
        std::uint64_t h = 14695981039346656037ull;
        for (unsigned char ch : s) {
            h ^= ch;
            h *= 1099511628211ull;
        }
        return h;
    }

    static ExperimentConfig builtin(const std::string& name);
};

inline ExperimentConfig ExperimentConfig::builtin(const std::string& name) {
    ExperimentConfig c;
    c.experiment = name;
    if (name == "custom") {
        return c;
    } else if (name == "fig1a") {
        c.n_rows = c.n_cols = 1000;
        c.noise = EnsembleSpec::Noise::UniformSpectrum;
        c.lambda_grid = {0.1, 0.5, 1.0, 2.0, 5.0};
    } else if (name == "fig1b") {
        c.n_rows = 1000;
        c.n_cols = 2000;
        c.noise = EnsembleSpec::Noise::RankOneSum;
        c.c = 1.0;
        c.lambda_grid = {0.5, 1.0, 2.0, 5.0};
    } else if (name == "fig3") {
        c.n_rows = c.n_cols = 1000;
        c.n_grid = {100, 200, 400, 800, 1000};
        c.lambda_grid = {1.0};
        c.n_trials = 100;
    } else if (name == "fig4") {
        c.n_rows = c.n_cols = 1000;
        c.lambda_grid = {0.5, 1.0, 2.0, 5.0};
    } else if (name == "fig5") {
        c.n_rows = 1000;
        c.n_cols = 2000;
        c.signal = EnsembleSpec::Signal::BernoulliSpectrum;
        c.p = 0.2;
        c.mse_scale = 1.0 / (1.0 - c.p);
        c.lambda_grid = {0.5, 1.0, 2.0, 5.0};
    } else if (name == "fig6") {
        c.n_rows = 1000;
        c.n_cols = 2000;
        c.lambda_grid = {2.0};
        c.epsilon_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    } else if (name == "fig7" || name == "overlap") {
        c.n_rows = 1000;
        c.n_cols = 4000;
        c.lambda_grid = {1.0};
        c.n_trials = 1000;
    } else {
        throw std::invalid_argument("unknown experiment: " + name);
    }
    return c;
}

struct ResultRow {
    std::string experiment;
    double lambda = 0.0;
    int n = 0, m = 0;
    std::string estimator;
    double mean_mse = 0.0;
    double ci95 = 0.0;
    double rel_err_pct = 0.0;
    int n_trials = 0;
    std::uint64_t seed = 0;
    long wall_ms = 0;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;

    static const char* csv_header() {
        return "experiment,lambda,N,M,estimator,mean_mse,ci95,rel_err_pct,"
               "n_trials,seed,wall_ms\n";
    }

    void write_csv(std::ostream& os) const {
        os << csv_header();
        char buf[320];
        for (const auto& r : rows) {
            std::snprintf(buf, sizeof(buf),
                          "%s,%.17g,%d,%d,%s,%.17g,%.17g,%.17g,%d,%llu,%ld\n",
                          r.experiment.c_str(), r.lambda, r.n, r.m,
                          r.estimator.c_str(), r.mean_mse, r.ci95, r.rel_err_pct,
                          r.n_trials,
                          static_cast<unsigned long long>(r.seed), r.wall_ms);
            os << buf;
        }
    }
};

namespace detail {

inline int resolve_threads(int requested) {
    if (const char* env = std::getenv("RIE_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    if (requested > 0) return requested;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

// Runs fn(t) for t in [0, n) over a small thread pool. Each index writes to
// its own result slot, so scheduling never affects output.
template <typename Fn>
void parallel_for(int n, int n_threads, Fn&& fn) {
    n_threads = std::min(n_threads, n);
    if (n_threads <= 1) {
        for (int t = 0; t < n; ++t) fn(t);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int w = 0; w < n_threads; ++w)
        pool.emplace_back([&, w] {
            for (int t = w; t < n; t += n_threads) fn(t);
        });
    for (auto& th : pool) th.join();
}

struct Aggregate {
    double mean = 0.0;
    double ci95 = 0.0;
};

inline Aggregate aggregate(const std::vector<double>& xs) {
    const int n = static_cast<int>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double var = 0.0;
    if (n > 1) {
        for (double x : xs) var += (x - mean) * (x - mean);
        var /= (n - 1);
    }
    return {mean, 1.96 * std::sqrt(var / n)};
}

// MSE from the shrunken coefficients without forming the estimate:
// ||Xi - S||_F^2 = ||S||_F^2 - 2 xi.d + xi.xi  with d_j = u_j^T S v_j.
inline double mse_from_xis(const VectorXd& xis, const VectorXd& d,
                           double s_norm2, int n) {
    return (s_norm2 - 2.0 * xis.dot(d) + xis.squaredNorm()) / n;
}

}  // namespace detail

// Monte-Carlo benchmark over the config's (lambda [, epsilon | N]) grid.
// Each grid cell runs n_trials independent instances; per-trial RNG streams
// are derived from (master_seed, trial, role), so results do not depend on
// the thread count.
inline ExperimentResult run_experiment(const ExperimentConfig& config,
                                       int n_threads = 0) {
    config.validate();
    const int threads = detail::resolve_threads(n_threads);
    ExperimentResult result;
    result.config_hash = config.hash();
    result.seed = config.master_seed;

    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed_ms = [&] {
        if (!config.timing) return 0L;
        return static_cast<long>(
            std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - t_start)
                .count());
    };

    // Trace-relation residual scan: rows of mean |eps_N| per N at z = 1 + i/sqrt(N).
    if (!config.n_grid.empty()) {
        for (std::size_t cell = 0; cell < config.n_grid.size(); ++cell) {
            const int n = config.n_grid[cell];
            ExperimentConfig sub = config;
            sub.n_rows = n;
            sub.n_cols = static_cast<int>(
                std::lround(n * static_cast<double>(config.n_cols) / config.n_rows));
            const EnsembleSpec spec = sub.ensemble(config.lambda_grid.front());
            std::vector<double> abs_eps(config.n_trials);
            detail::parallel_for(config.n_trials, threads, [&](int t) {
                RngStream srng(derive_seed(config.master_seed,
                                           static_cast<std::uint64_t>(t),
                                           2 * cell));
                RngStream zrng(derive_seed(config.master_seed,
                                           static_cast<std::uint64_t>(t),
                                           2 * cell + 1));
                const MatrixXd s = sample_signal(spec, srng);
                const MatrixXd y = observe(s, sample_noise(spec, zrng), spec.snr);
                DenoisingInstance inst = make_instance(y, spec.snr, config.epsilon);
                const Complex z(1.0, 1.0 / std::sqrt(static_cast<double>(n)));
                abs_eps[t] = std::abs(theorem2_residual(inst, s, z));
            });
            const auto agg = detail::aggregate(abs_eps);
            ResultRow row;
            row.experiment = config.experiment;
            row.lambda = config.lambda_grid.front();
            row.n = n;
            row.m = sub.n_cols;
            row.estimator = "theorem2_abs_residual";
            row.mean_mse = agg.mean;
            row.ci95 = agg.ci95;
            row.n_trials = config.n_trials;
            row.seed = config.master_seed;
            row.wall_ms = elapsed_ms();
            result.rows.push_back(row);
        }
        return result;
    }

    const std::vector<double> eps_grid =
        config.epsilon_grid.empty() ? std::vector<double>{config.epsilon}
                                    : config.epsilon_grid;
    std::size_t cell = 0;
    for (double lambda : config.lambda_grid) {
        const EnsembleSpec spec = config.ensemble(lambda);
        const NoiseFamily family = spec.noise_family();
        const bool gaussian_noise = spec.noise == EnsembleSpec::Noise::Gaussian;
        for (double eps : eps_grid) {
            std::vector<double> oracle_mse(config.n_trials);
            std::vector<double> rie_mse(config.n_trials);
            const std::size_t this_cell = cell++;
            detail::parallel_for(config.n_trials, threads, [&](int t) {
                RngStream srng(derive_seed(config.master_seed,
                                           static_cast<std::uint64_t>(t),
                                           2 * this_cell));
                RngStream zrng(derive_seed(config.master_seed,
                                           static_cast<std::uint64_t>(t),
                                           2 * this_cell + 1));
                const MatrixXd s = sample_signal(spec, srng);
                const MatrixXd y = observe(s, sample_noise(spec, zrng), lambda);
                DenoisingInstance inst = make_instance(y, lambda, eps);
                const ShrinkageResult oracle = oracle_rie(inst, s);
                const ShrinkageResult rie =
                    gaussian_noise ? gaussian_rie(inst) : general_rie(inst, family);
                const double s_norm2 = s.squaredNorm();
                const int n = spec.n_rows;
                oracle_mse[t] = config.mse_scale *
                                detail::mse_from_xis(oracle.xis, oracle.xis,
                                                     s_norm2, n);
                rie_mse[t] = config.mse_scale *
                             detail::mse_from_xis(rie.xis, oracle.xis, s_norm2, n);
            });
            const auto oracle_agg = detail::aggregate(oracle_mse);
            const auto rie_agg = detail::aggregate(rie_mse);
            const bool sweep = !config.epsilon_grid.empty();
            char eps_tag[32] = {0};
            if (sweep) std::snprintf(eps_tag, sizeof(eps_tag), "_eps%g", eps);

            ResultRow base;
            base.experiment = config.experiment;
            base.lambda = lambda;
            base.n = spec.n_rows;
            base.m = spec.n_cols;
            base.n_trials = config.n_trials;
            base.seed = config.master_seed;

            ResultRow orow = base;
            orow.estimator = "oracle";
            orow.mean_mse = oracle_agg.mean;
            orow.ci95 = oracle_agg.ci95;
            orow.wall_ms = elapsed_ms();

            ResultRow rrow = base;
            rrow.estimator =
                std::string(gaussian_noise ? "rie_gaussian" : "rie_general") +
                eps_tag;
            rrow.mean_mse = rie_agg.mean;
            rrow.ci95 = rie_agg.ci95;
            rrow.rel_err_pct =
                100.0 * (rie_agg.mean - oracle_agg.mean) / oracle_agg.mean;
            rrow.wall_ms = elapsed_ms();

            result.rows.push_back(orow);
            result.rows.push_back(rrow);
        }
    }
    return result;
}

}  // namespace rie
