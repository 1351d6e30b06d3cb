#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rie/estimators.hpp"
#include "rie/freeprob.hpp"
#include "rie/models.hpp"
#include "rie/rng.hpp"
#include "rie/spectra.hpp"

namespace rie {

inline constexpr double kPi = 3.14159265358979323846;

// Tabulated boundary data of a symmetrized singular-value density on the
// positive half-axis: density(x) = mu_bar_Y(x) (mass ~ 1/2 on the grid) and
// hilbert(x) = H[mu_bar_Y](x) with the principal-value 1/pi convention. The
// one-sided singular-value density is 2 * density.
struct DensityGrid {
    std::vector<double> xs;
    std::vector<double> density;
    std::vector<double> hilbert;
    std::string source;

    double mass() const {
        double m = 0.0;
        for (std::size_t i = 1; i < xs.size(); ++i)
            m += 0.5 * (density[i] + density[i - 1]) * (xs[i] - xs[i - 1]);
        return m;
    }

    double interpolate(const std::vector<double>& ys, double x) const {
        if (xs.size() < 2) throw std::invalid_argument("DensityGrid: too few points");
        if (x <= xs.front()) return ys.front();
        if (x >= xs.back()) return ys.back();
        const auto it = std::upper_bound(xs.begin(), xs.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - xs.begin());
        const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
        return (1.0 - t) * ys[i - 1] + t * ys[i];
    }
    double density_at(double x) const { return interpolate(density, x); }
    double hilbert_at(double x) const { return interpolate(hilbert, x); }

    // Stieltjes transform of the symmetrized density at a complex point,
    // by quadrature over the tabulated grid.
    Complex stieltjes_at(Complex z) const {
        if (z.imag() == 0.0)
            throw std::domain_error("DensityGrid::stieltjes_at: real argument");
        Complex acc(0.0, 0.0);
        for (std::size_t i = 1; i < xs.size(); ++i) {
            const double dx = xs[i] - xs[i - 1];
            auto f = [&](std::size_t k) {
                return density[k] *
                       (1.0 / (z - xs[k]) + 1.0 / (z + xs[k]));
            };
            acc += 0.5 * (f(i) + f(i - 1)) * dx;
        }
        return acc;
    }

    void write_csv(std::ostream& os) const {
        os << "x,density,hilbert\n";
        char buf[120];
        for (std::size_t i = 0; i < xs.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", xs[i],
                          density[i], hilbert[i]);
            os << buf;
        }
    }
};

// Boundary data of one observed spectrum, kernel-smoothed at scale eta.
inline DensityGrid empirical_density_grid(const EmpiricalSpectrum& spec,
                                          double eta, int n_points = 2001) {
    if (eta <= 0.0) throw std::invalid_argument("empirical_density_grid: eta <= 0");
    if (n_points < 2) throw std::invalid_argument("empirical_density_grid: n_points");
    DensityGrid g;
    g.source = "empirical(N=" + std::to_string(spec.values.size()) +
               ", eta=" + std::to_string(eta) + ")";
    const double hi = spec.max_value() + 64.0 * eta;
    g.xs.resize(n_points);
    g.density.resize(n_points);
    g.hilbert.resize(n_points);
    for (int i = 0; i < n_points; ++i) {
        const double x = hi * (i + 0.5) / n_points;
        auto [dens, hilb] = plemelj_limits(spec, x, eta);
        g.xs[i] = x;
        g.density[i] = std::max(dens, 0.0);
        g.hilbert[i] = hilb;
    }
    return g;
}

// Limiting boundary data for Y = sqrt(lambda) S + Z with S and Z both i.i.d.
// Gaussian of entry variance 1/N: the Marchenko-Pastur singular-value law
// rescaled by sqrt(1 + lambda). At alpha = 1 this is the quarter circle on
// [0, 2 sqrt(1+lambda)], where the Hilbert transform has the closed form
// x / (2 + 2 lambda) (times 1/pi in this convention); for alpha < 1 the
// extra term -(1 - alpha)/(2 alpha x) appears.
inline DensityGrid analytic_gaussian_grid(double alpha, double lambda,
                                          int n_points = 2001) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("analytic_gaussian_grid: alpha");
    if (lambda <= 0.0) throw std::invalid_argument("analytic_gaussian_grid: lambda");
    const double s2 = 1.0 + lambda;
    const double sa = std::sqrt(alpha);
    // singular-value support of the unscaled Gaussian: [|1/sqrt(a)-1|, 1/sqrt(a)+1]
    const double lo = std::abs(1.0 / sa - 1.0) * std::sqrt(s2);
    const double hi = (1.0 / sa + 1.0) * std::sqrt(s2);
    const double a = (1.0 - sa) * (1.0 - sa);
    const double b = (1.0 + sa) * (1.0 + sa);
    DensityGrid g;
    g.source = "analytic(gaussian, alpha=" + std::to_string(alpha) +
               ", lambda=" + std::to_string(lambda) + ")";
    g.xs.resize(n_points);
    g.density.resize(n_points);
    g.hilbert.resize(n_points);
    for (int i = 0; i < n_points; ++i) {
        const double x = lo + (hi - lo) * (i + 0.5) / n_points;
        const double u = alpha * x * x / s2;  // eigenvalue variable, in [a, b]
        const double rad = std::max((b - u) * (u - a), 0.0);
        const double mu_one_sided = std::sqrt(rad) / (kPi * alpha * x);
        g.xs[i] = x;
        g.density[i] = 0.5 * mu_one_sided;
        g.hilbert[i] = (x / (2.0 * s2) - (1.0 - alpha) / (2.0 * alpha * x)) / kPi;
    }
    return g;
}

// Traces of the resolvent of YY^T against I and against YS^T:
//   G(z) = (1/N) sum 1/(z^2 - gamma_k^2)
//   L(z) = (1/N) sum [gamma_k / (z^2 - gamma_k^2)] (u_k^T S v_k)
struct TraceGL {
    Complex g;
    Complex l;
};

inline TraceGL trace_functions_GL(const DenoisingInstance& inst,
                                  const MatrixXd& signal, Complex z) {
    if (z.imag() == 0.0)
        throw std::domain_error("trace_functions_GL: real argument");
    const SvdResult& svd = inst.svd;
    const EmpiricalSpectrum& spec = svd.spectrum;
    const MatrixXd sv = signal * svd.right_vectors;
    const VectorXd overlaps = (svd.left_vectors.transpose() * sv).diagonal();
    const int n = static_cast<int>(spec.values.size());
    TraceGL out{Complex(0, 0), Complex(0, 0)};
    for (int k = 0; k < n; ++k) {
        const double gk = spec.values(k);
        const Complex r = 1.0 / (z * z - gk * gk);
        out.g += r;
        out.l += gk * r * overlaps(k);
    }
    out.g /= n;
    out.l /= n;
    return out;
}

// Error term of the asymptotic trace relation
//   L(z) = (1/sqrt(lambda)) [G(z)(z^2 + 1 - 1/alpha0) - z^2 G(z)^2 - 1] + eps_N
// for Gaussian signals.
inline Complex theorem2_residual(const DenoisingInstance& inst,
                                 const MatrixXd& signal, Complex z) {
    const TraceGL gl = trace_functions_GL(inst, signal, z);
    const double alpha0 = inst.alpha();
    const Complex pred =
        (gl.g * (z * z + 1.0 - 1.0 / alpha0) - z * z * gl.g * gl.g - 1.0) /
        std::sqrt(inst.snr);
    return gl.l - pred;
}

// --- asymptotic shrinkage functions over supp(mu_Y) -------------------------

inline std::function<double(double)> xi_function_gaussian(
    const DensityGrid& grid, double alpha, double lambda) {
    return [&grid, alpha, lambda](double x) {
        return (x + (1.0 - 1.0 / alpha) / x -
                2.0 * kPi * grid.hilbert_at(x)) /
               std::sqrt(lambda);
    };
}

inline std::function<double(double)> xi_function_general(
    const DensityGrid& grid, NoiseFamily noise, double alpha, double lambda) {
    return [&grid, noise, alpha, lambda](double x) {
        const Complex g(kPi * grid.hilbert_at(x), kPi * grid.density_at(x));
        if (g.imag() < 1e-12) return 0.0;
        const Complex w = (g / x) * (1.0 - alpha + alpha * x * g);
        const Complex c = rect_r_transform(noise, w);
        return (x * g - c).imag() / g.imag() / std::sqrt(lambda);
    };
}

// Asymptotic minimum mean squared error, from the shrinkage function and the
// limiting observation density:
//   MMSE = int x^2 mu_S - int xi(x)^2 mu_Y(x) dx.
inline double mmse_general(double mu_s_second_moment,
                           const std::function<double(double)>& xi_fn,
                           const DensityGrid& grid) {
    const double m = grid.mass();
    if (m < 0.475)
        throw std::runtime_error("mmse_general: density grid covers only " +
                                 std::to_string(2.0 * m) + " of unit mass");
    double acc = 0.0;
    std::vector<double> f(grid.xs.size());
    for (std::size_t i = 0; i < grid.xs.size(); ++i) {
        const double xi = xi_fn(grid.xs[i]);
        f[i] = xi * xi * 2.0 * grid.density[i];
    }
    for (std::size_t i = 1; i < grid.xs.size(); ++i)
        acc += 0.5 * (f[i] + f[i - 1]) * (grid.xs[i] - grid.xs[i - 1]);
    return mu_s_second_moment - acc;
}

// Gaussian-noise closed form:
//   MMSE = (1/lambda)[1/alpha - (1/alpha - 1)^2 int mu_Y/x^2 - (pi^2/3) int mu_Y^3].
// The 1/x^2 integrand is cut off below x = 1e-3: kernel smoothing leaks mass
// toward 0 where the limiting density has a hard edge.
inline double mmse_gaussian(const DensityGrid& grid, double alpha,
                            double lambda) {
    double inv_x2 = 0.0, cube = 0.0;
    const auto& xs = grid.xs;
    for (std::size_t i = 1; i < xs.size(); ++i) {
        const double dx = xs[i] - xs[i - 1];
        auto mu = [&](std::size_t k) { return 2.0 * grid.density[k]; };
        auto inv_term = [&](std::size_t k) {
            return xs[k] < 1e-3 ? 0.0 : mu(k) / (xs[k] * xs[k]);
        };
        inv_x2 += 0.5 * (inv_term(i) + inv_term(i - 1)) * dx;
        cube += 0.5 * (std::pow(mu(i), 3) + std::pow(mu(i - 1), 3)) * dx;
    }
    const double ia = 1.0 / alpha;
    return (ia - (ia - 1.0) * (ia - 1.0) * inv_x2 -
            kPi * kPi / 3.0 * cube) /
           lambda;
}

// --- singular-vector overlaps ------------------------------------------------

struct ZetaPair {
    Complex zeta1;
    Complex zeta2;
    Complex z;
};

// Subordination points of the observation resolvent:
//   zeta1 = z Z / (M + 1),  zeta2 = alpha z Z / (alpha M + 1),
// with M = M_{mu_Y}(1/z^2) = z G_{mu_bar_Y}(z) - 1 and
// Z = C_{mu_Z}((1/z^2) T(M)) = C_{mu_Z}((G/z)(1 - alpha + alpha z G)).
inline ZetaPair zeta_pair(const DensityGrid& grid, const NoiseFamily& noise,
                          double alpha, Complex z) {
    const Complex g = grid.stieltjes_at(z);
    const Complex my = z * g - 1.0;
    const Complex w = (g / z) * (1.0 - alpha + alpha * z * g);
    const Complex bigz = rect_r_transform(noise, w);
    ZetaPair zp;
    zp.z = z;
    zp.zeta1 = z * bigz / (my + 1.0);
    zp.zeta2 = alpha * z * bigz / (alpha * my + 1.0);
    return zp;
}

// Limiting rescaled overlap between observed and signal singular vectors,
//   O(gamma, sigma) = (1/(pi mu_bar_Y(gamma))) Im sigma/((z-zeta2)(z-zeta1) - sigma^2)
// at z = gamma - i eta. sigma is the singular value of the effective signal
// sqrt(lambda) S.
inline double overlap_theoretical(double gamma, double sigma,
                                  const DensityGrid& grid,
                                  const NoiseFamily& noise, double alpha,
                                  double eta) {
    if (eta <= 0.0) throw std::invalid_argument("overlap_theoretical: eta <= 0");
    const Complex z(gamma, -eta);
    const ZetaPair zp = zeta_pair(grid, noise, alpha, z);
    const double mu_bar = grid.stieltjes_at(z).imag() / kPi;
    if (mu_bar <= 0.0) return 0.0;
    const Complex denom = (z - zp.zeta2) * (z - zp.zeta1) - sigma * sigma;
    return (sigma / denom).imag() / (kPi * mu_bar);
}

struct OverlapCurve {
    std::vector<double> gammas;   // bin centers
    std::vector<double> overlap;  // mean of N (u.s_l)(v.s_r) per bin
    std::vector<double> stderr_;  // standard error of that mean
    int n_trials = 0;

    void write_csv(std::ostream& os) const {
        os << "gamma,overlap,stderr,n_trials\n";
        char buf[120];
        for (std::size_t i = 0; i < gammas.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%d\n", gammas[i],
                          overlap[i], stderr_[i], n_trials);
            os << buf;
        }
    }
};

namespace detail {

// Left/right singular vectors of Y via the eigendecomposition of YY^T
// (faster than a full SVD; right vectors recovered as Y^T u / gamma).
struct FastBasis {
    MatrixXd u;       // N x N, columns sorted by descending gamma
    VectorXd gammas;  // descending
};

inline FastBasis fast_left_basis(const MatrixXd& y) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(y * y.transpose());
    const int n = static_cast<int>(y.rows());
    FastBasis fb;
    fb.u.resize(n, n);
    fb.gammas.resize(n);
    for (int j = 0; j < n; ++j) {  // eigenvalues come back ascending
        fb.u.col(j) = es.eigenvectors().col(n - 1 - j);
        fb.gammas(j) = std::sqrt(std::max(es.eigenvalues()(n - 1 - j), 0.0));
    }
    return fb;
}

}  // namespace detail

// Monte-Carlo overlap curve for one signal singular direction. The signal is
// drawn once from `spec` (trial stream 0); noise is redrawn each trial.
// Contributions from signal values within sigma_tol of sigma_k are summed:
// only that degenerate block is basis-invariant.
inline OverlapCurve overlap_empirical(const EnsembleSpec& spec, int sigma_index,
                                      int n_trials, std::uint64_t master_seed,
                                      int n_bins = 60,
                                      double sigma_tol = 1e-9) {
    spec.validate();
    if (n_trials < 2)
        throw std::invalid_argument("overlap_empirical: need at least 2 trials");
    const int n = spec.n_rows;

    RngStream srng(derive_seed(master_seed, 0, 1));
    const MatrixXd a = std::sqrt(spec.snr) * sample_signal(spec, srng);
    const SvdResult asvd = svd_decompose(a);
    if (sigma_index < 0 || sigma_index >= n)
        throw std::out_of_range("overlap_empirical: sigma_index");
    std::vector<int> block;
    const double sigma_k = asvd.spectrum.values(sigma_index);
    for (int j = 0; j < n; ++j)
        if (std::abs(asvd.spectrum.values(j) - sigma_k) <= sigma_tol)
            block.push_back(j);
    const MatrixXd s_left = asvd.left_vectors(Eigen::all, block);   // N x B
    const MatrixXd s_right = asvd.right_vectors(Eigen::all, block); // M x B

    // Bin range from the limiting bulk with generous padding; entries outside
    // are dropped (edge fluctuations only).
    RngStream probe(derive_seed(master_seed, 1, 2));
    const MatrixXd y0 = a + sample_noise(spec, probe);
    const auto fb0 = detail::fast_left_basis(y0);
    const double pad = 4.0 / std::sqrt(static_cast<double>(n));
    const double lo = std::max(fb0.gammas.minCoeff() - pad, 0.0);
    const double hi = fb0.gammas.maxCoeff() + pad;
    const double width = (hi - lo) / n_bins;

    std::vector<double> sum(n_bins, 0.0), sumsq(n_bins, 0.0);
    std::vector<long> count(n_bins, 0);
    for (int t = 0; t < n_trials; ++t) {
        RngStream zrng(derive_seed(master_seed, static_cast<std::uint64_t>(t), 3));
        const MatrixXd y = a + sample_noise(spec, zrng);
        const auto fb = detail::fast_left_basis(y);
        // v_j = Y^T u_j / gamma_j, so v_j . s_r = (u_j . Y s_r) / gamma_j
        const MatrixXd ul = fb.u.transpose() * s_left;              // N x B
        const MatrixXd ur = fb.u.transpose() * (y * s_right);       // N x B
        for (int j = 0; j < n; ++j) {
            if (fb.gammas(j) <= 1e-12) continue;
            const double val =
                n * ul.row(j).dot(ur.row(j)) / fb.gammas(j);
            const int bin = static_cast<int>((fb.gammas(j) - lo) / width);
            if (bin < 0 || bin >= n_bins) continue;
            sum[bin] += val;
            sumsq[bin] += val * val;
            count[bin] += 1;
        }
    }

    OverlapCurve out;
    out.n_trials = n_trials;
    for (int b = 0; b < n_bins; ++b) {
        if (count[b] == 0) continue;
        const double mean = sum[b] / count[b];
        const double var =
            std::max(sumsq[b] / count[b] - mean * mean, 0.0);
        out.gammas.push_back(lo + (b + 0.5) * width);
        out.overlap.push_back(mean);
        out.stderr_.push_back(std::sqrt(var / count[b]));
    }
    return out;
}

}  // namespace rie
