#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rie/spectra.hpp"

namespace rie {

// Thrown when a numeric inversion fails; carries the last bracket state.
struct convergence_error : std::runtime_error {
    double bracket_lo, bracket_hi;
    convergence_error(const std::string& what, double lo, double hi)
        : std::runtime_error(what + " (bracket [" + std::to_string(lo) + ", " +
                             std::to_string(hi) + "])"),
          bracket_lo(lo),
          bracket_hi(hi) {}
};

// Descriptor of a bi-rotationally invariant noise ensemble: which sampler it
// comes from plus the rectangular R-transform used by the denoiser. Analytic
// forms exist for the built-in families; anything else goes through the
// empirical (numerically inverted) path.
struct NoiseFamily {
    enum class Kind { Gaussian, UniformSpectrum, RankOneSum, Empirical };

    Kind kind = Kind::Gaussian;
    double alpha = 1.0;        // aspect ratio in (0, 1]
    double c = 0.0;            // rank-one-sum rate, c > 0
    EmpiricalSpectrum spectrum;  // empirical kind only

    static NoiseFamily gaussian(double alpha) {
        check_alpha(alpha);
        return {Kind::Gaussian, alpha, 0.0, {}};
    }
    // Singular values uniform on [0, 2]; analytic R-transform known for
    // alpha = 1 only.
    static NoiseFamily uniform_spectrum() {
        return {Kind::UniformSpectrum, 1.0, 0.0, {}};
    }
    static NoiseFamily rank_one_sum(double c, double alpha) {
        check_alpha(alpha);
        if (c <= 0.0) throw std::invalid_argument("rank_one_sum: c must be > 0");
        return {Kind::RankOneSum, alpha, c, {}};
    }
    static NoiseFamily empirical(EmpiricalSpectrum spec) {
        if (spec.values.size() && spec.values.minCoeff() < 0.0)
            throw std::invalid_argument("empirical: negative singular values");
        NoiseFamily f{Kind::Empirical, spec.aspect_ratio(), 0.0, std::move(spec)};
        check_alpha(f.alpha);
        return f;
    }

private:
    static void check_alpha(double a) {
        if (!(a > 0.0 && a <= 1.0))
            throw std::invalid_argument("alpha must be in (0, 1]");
    }
};

// Moment generating function M_mu(z) = E[1 / (1 - t^2 z)] - 1 of a
// singular-value measure.
inline Complex m_transform(const EmpiricalSpectrum& spec, Complex z) {
    Complex sum(0.0, 0.0);
    const auto& g = spec.values;
    for (Eigen::Index k = 0; k < g.size(); ++k) {
        const Complex d = 1.0 - g(k) * g(k) * z;
        if (std::abs(d) < 1e-14)
            throw std::domain_error("m_transform: pole at atom " +
                                    std::to_string(k));
        sum += 1.0 / d;
    }
    return sum / static_cast<double>(g.size()) - 1.0;
}

inline Complex m_transform_derivative(const EmpiricalSpectrum& spec, Complex z) {
    Complex sum(0.0, 0.0);
    const auto& g = spec.values;
    for (Eigen::Index k = 0; k < g.size(); ++k) {
        const Complex d = 1.0 - g(k) * g(k) * z;
        sum += g(k) * g(k) / (d * d);
    }
    return sum / static_cast<double>(g.size());
}

// T^(alpha)(z) = (alpha z + 1)(z + 1)
inline Complex t_alpha(Complex x, double alpha) {
    return (alpha * x + 1.0) * (x + 1.0);
}

// Inverse branch anchored at T^{-1}(1) = 0, continuous from the origin:
// the root of alpha x^2 + (1 + alpha) x + (1 - w) = 0 with principal sqrt.
inline Complex t_alpha_inverse(Complex w, double alpha) {
    if (alpha == 0.0) return w - 1.0;  // linear limit T(x) = x + 1
    const Complex disc = (1.0 + alpha) * (1.0 + alpha) - 4.0 * alpha * (1.0 - w);
    return (-(1.0 + alpha) + std::sqrt(disc)) / (2.0 * alpha);
}

// H^(alpha)_mu(z) = z T^(alpha)(M_mu(z))
inline Complex h_transform(const EmpiricalSpectrum& spec, Complex z,
                           double alpha) {
    return z * t_alpha(m_transform(spec, z), alpha);
}

inline Complex h_transform_derivative(const EmpiricalSpectrum& spec, Complex z,
                                      double alpha) {
    const Complex m = m_transform(spec, z);
    const Complex dm = m_transform_derivative(spec, z);
    // d/dz [z T(M)] = T(M) + z T'(M) M'
    const Complex tprime = alpha * (m + 1.0) + (alpha * m + 1.0);
    return t_alpha(m, alpha) + z * tprime * dm;
}

// Inverts H on (0, 1/gamma_max^2), where it is increasing from 0 to +inf.
// Bisection only: bracket-safe near the edge singularity.
inline double h_inverse(const EmpiricalSpectrum& spec, double w, double alpha) {
    if (w == 0.0) return 0.0;
    const double gmax = spec.max_value();
    if (gmax <= 0.0) {
        // delta_0 noise: H(z) = z
        return w;
    }
    double lo = 0.0;
    double hi = 1.0 / (gmax * gmax) - 1e-12;
    auto h_real = [&](double z) {
        return h_transform(spec, Complex(z, 0.0), alpha).real();
    };
    if (w < 0.0 || w > h_real(hi))
        throw std::range_error(
            "h_inverse: w outside attainable interval [0, " +
            std::to_string(h_real(hi)) + "]");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (h_real(mid) < w)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-16 * (1.0 + hi)) break;
    }
    const double z = 0.5 * (lo + hi);
    if (std::abs(h_real(z) - w) > 1e-10 * (1.0 + std::abs(w)))
        throw convergence_error("h_inverse: bisection did not converge", lo, hi);
    return z;
}

// Analytic continuation of the inverse to complex arguments: Newton from the
// real inversion of Re w (clamped into the attainable range).
inline Complex h_inverse_complex(const EmpiricalSpectrum& spec, Complex w,
                                 double alpha) {
    if (std::abs(w.imag()) < 1e-300 && w.real() >= 0.0)
        return Complex(h_inverse(spec, w.real(), alpha), 0.0);
    const double gmax = spec.max_value();
    double seed_w = std::max(w.real(), 1e-8);
    Complex z;
    try {
        z = Complex(h_inverse(spec, seed_w, alpha), 0.0);
    } catch (const std::range_error&) {
        z = Complex(0.5 / (gmax * gmax + 1.0), 0.0);
    }
    for (int it = 0; it < 100; ++it) {
        const Complex f = h_transform(spec, z, alpha) - w;
        if (std::abs(f) < 1e-12 * (1.0 + std::abs(w))) return z;
        const Complex df = h_transform_derivative(spec, z, alpha);
        if (std::abs(df) < 1e-300)
            throw convergence_error("h_inverse_complex: flat derivative",
                                    z.real(), z.imag());
        z -= f / df;
    }
    throw convergence_error("h_inverse_complex: Newton did not converge",
                            z.real(), z.imag());
}

namespace detail {

// x * coth(x), analytic and even in x; series near 0 avoids cancellation.
inline Complex xcoth(Complex x) {
    if (std::abs(x) < 1e-3) {
        const Complex x2 = x * x;
        return 1.0 + x2 / 3.0 - x2 * x2 / 45.0 + 2.0 * x2 * x2 * x2 / 945.0;
    }
    return x / std::tanh(x);
}

}  // namespace detail

// Rectangular R-transform C^(alpha)_mu of a noise family. Analytic families
// use their closed forms; empirical spectra go through
// C(z) = T^{-1}(z / H^{-1}(z)) with the inversion done numerically.
inline Complex rect_r_transform(const NoiseFamily& family, Complex z) {
    switch (family.kind) {
        case NoiseFamily::Kind::Gaussian:
            return z / family.alpha;
        case NoiseFamily::Kind::UniformSpectrum: {
            if (std::abs(family.alpha - 1.0) > 1e-12)
                throw std::invalid_argument(
                    "uniform_spectrum R-transform is only available at alpha = 1");
            // 2 sqrt(z) coth(2 sqrt(z)) - 1; even in sqrt(z), so the branch
            // of the square root is immaterial.
            return detail::xcoth(2.0 * std::sqrt(z)) - 1.0;
        }
        case NoiseFamily::Kind::RankOneSum:
            return family.c * z / (1.0 - z);
        case NoiseFamily::Kind::Empirical: {
            if (std::abs(z) < 1e-300) return Complex(0.0, 0.0);
            const Complex hinv = h_inverse_complex(family.spectrum, z, family.alpha);
            if (std::abs(hinv) < 1e-300) return Complex(0.0, 0.0);
            return t_alpha_inverse(z / hinv, family.alpha);
        }
    }
    throw std::logic_error("rect_r_transform: unknown family");
}

// Max deviation of the free-additivity identity C_Y(u) - C_S(u) - C_Z(u) = 0
// over a grid of real arguments, using the empirical transforms of one
// simulated instance Y = S + U Z V^T.
inline double check_free_additivity(const EmpiricalSpectrum& spec_s,
                                    const EmpiricalSpectrum& spec_z,
                                    const EmpiricalSpectrum& spec_y,
                                    double alpha,
                                    const std::vector<double>& u_grid) {
    const NoiseFamily fs = NoiseFamily::empirical(spec_s);
    const NoiseFamily fz = NoiseFamily::empirical(spec_z);
    const NoiseFamily fy = NoiseFamily::empirical(spec_y);
    double worst = 0.0;
    for (double u : u_grid) {
        const Complex cy = rect_r_transform(fy, Complex(u, 0.0));
        const Complex cs = rect_r_transform(fs, Complex(u, 0.0));
        const Complex cz = rect_r_transform(fz, Complex(u, 0.0));
        worst = std::max(worst, std::abs(cy - cs - cz));
    }
    (void)alpha;  // carried by the empirical families themselves
    return worst;
}

// Evaluation cache for transform curves; serializable to CSV.
struct TransformGrid {
    std::vector<Complex> arguments;
    std::vector<Complex> values;
    std::string transform_tag;  // "M", "H", or "C"

    void write_csv(std::ostream& os) const {
        os << "re_arg,im_arg,re_val,im_val,tag\n";
        char buf[160];
        for (std::size_t i = 0; i < arguments.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%s\n",
                          arguments[i].real(), arguments[i].imag(),
                          values[i].real(), values[i].imag(),
                          transform_tag.c_str());
            os << buf;
        }
    }
};

}  // namespace rie
