#pragma once

// Multipath ULA channel: steering vectors, path loss, channel draws and the
// spatial covariance (analytic Toeplitz form and sample estimate).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "decontam/errors.hpp"
#include "decontam/numerics.hpp"
#include "decontam/quadrature.hpp"
#include "decontam/random.hpp"

namespace decontam {

inline constexpr double kPi = std::numbers::pi;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Maps a bearing in (-pi, pi] onto [0, pi]. A ULA cannot tell theta from -theta.
inline double fold_angle(double bearing) {
    double b = std::remainder(bearing, 2.0 * kPi); // now in [-pi, pi]
    return std::abs(b);
}

struct ArrayGeometry {
    int num_antennas = 1;
    double spacing_ratio = 0.5; ///< antenna spacing over wavelength, D / lambda

    void validate() const {
        if (num_antennas < 1) {
            throw ConfigError("ArrayGeometry: num_antennas must be >= 1");
        }
        if (!(spacing_ratio > 0.0 && spacing_ratio <= 0.5)) {
            throw ConfigError("ArrayGeometry: spacing_ratio must lie in (0, 0.5]");
        }
    }
};

/// Uniform AoA density on [center - half_spread, center + half_spread], clipped
/// to [0, pi] and renormalized.
struct AngularSupport {
    double center = kPi / 2;
    double half_spread = 0.0;

    double lower() const { return std::max(0.0, center - half_spread); }
    double upper() const { return std::min(kPi, center + half_spread); }
    double width() const { return upper() - lower(); }
    bool degenerate() const { return half_spread == 0.0; }

    bool contains(double theta) const {
        if (degenerate()) {
            return std::abs(theta - center) <= 1e-12;
        }
        return theta >= lower() && theta <= upper();
    }

    void validate() const {
        if (!(center > 0.0 && center < kPi)) {
            throw ConfigError("AngularSupport: center must lie in (0, pi)");
        }
        if (!(half_spread >= 0.0 && half_spread < kPi / 2)) {
            throw ConfigError("AngularSupport: half_spread must lie in [0, pi/2)");
        }
    }
};

/// Length of the intersection of two supports, in radians.
inline double overlap_width(const AngularSupport& a, const AngularSupport& b) {
    return std::max(0.0, std::min(a.upper(), b.upper()) - std::max(a.lower(), b.lower()));
}

struct LinkProfile {
    double beta = 1.0; ///< path-loss amplitude; E|h_m|^2 = beta^2
    AngularSupport support;
    int num_paths = 1;

    void validate() const {
        if (!(beta > 0.0)) {
            throw ConfigError("LinkProfile: beta must be positive");
        }
        if (num_paths < 1) {
            throw ConfigError("LinkProfile: num_paths must be >= 1");
        }
        support.validate();
    }
};

struct PathRecord {
    double aoa = 0.0;   ///< radians in [0, pi]
    double phase = 0.0; ///< radians in [0, 2 pi)
};

struct ChannelRealization {
    CVector vector;
    std::vector<PathRecord> paths;
    double beta = 1.0;
};

enum class CovarianceSource { analytic, empirical };

struct CovarianceMatrix {
    CMatrix matrix;
    CovarianceSource source = CovarianceSource::analytic;
    std::size_t sample_count = 0; ///< number of draws for empirical estimates
};

/// a(theta)_m = exp(-j 2 pi (D/lambda) m cos theta), m = 0..M-1.
inline CVector steering_vector(const ArrayGeometry& geom, double theta) {
    if (!(theta >= 0.0 && theta <= kPi)) {
        throw DomainError("steering_vector: theta must lie in [0, pi], got " +
                          std::to_string(theta));
    }
    const double step = -2.0 * kPi * geom.spacing_ratio * std::cos(theta);
    CVector a(geom.num_antennas);
    for (int m = 0; m < geom.num_antennas; ++m) {
        a(m) = std::polar(1.0, step * m);
    }
    return a;
}

/// beta = sqrt(alpha / d^gamma).
inline double path_loss(double alpha, double gamma, double distance) {
    if (!(distance > 0.0)) {
        throw DomainError("path_loss: distance must be positive");
    }
    if (!(alpha > 0.0) || !(gamma >= 0.0)) {
        throw DomainError("path_loss: need alpha > 0 and gamma >= 0");
    }
    return std::sqrt(alpha / std::pow(distance, gamma));
}

namespace detail {

// beta / sqrt(P) * sum over the selected paths of a(theta_p) e^{i phi_p}
template <typename Pred>
CVector sum_paths(const ArrayGeometry& geom, double beta, std::span<const PathRecord> paths,
                  Pred keep) {
    // One phasor per path, advanced antenna by antenna (recurrence across
    // paths vectorizes; drift is O(M * eps), far below the 1e-12 budget).
    std::vector<double> angles, phases;
    angles.reserve(paths.size());
    phases.reserve(paths.size());
    for (const auto& p : paths) {
        if (keep(p)) {
            angles.push_back(-2.0 * kPi * geom.spacing_ratio * std::cos(p.aoa));
            phases.push_back(p.phase);
        }
    }
    const auto n = static_cast<Eigen::Index>(angles.size());
    const Eigen::Map<const Eigen::ArrayXd> step(angles.data(), n);
    const Eigen::Map<const Eigen::ArrayXd> phase(phases.data(), n);
    const Eigen::ArrayXd cr = step.cos(), ci = step.sin();
    Eigen::ArrayXd er = phase.cos(), ei = phase.sin(), t(n);
    CVector h(geom.num_antennas);
    for (int m = 0; m < geom.num_antennas; ++m) {
        h(m) = Complex(er.sum(), ei.sum());
        t = er * cr - ei * ci;
        ei = er * ci + ei * cr;
        er = t;
    }
    return h * (beta / std::sqrt(static_cast<double>(paths.size())));
}

} // namespace detail

/// Rebuilds the channel vector from retained path records.
inline CVector reconstruct_channel(const ArrayGeometry& geom, double beta,
                                   std::span<const PathRecord> paths) {
    return detail::sum_paths(geom, beta, paths, [](const PathRecord&) { return true; });
}

inline ChannelRealization draw_channel(const LinkProfile& profile, const ArrayGeometry& geom,
                                       RandomStream& rng) {
    ChannelRealization out;
    out.beta = profile.beta;
    out.paths.resize(static_cast<std::size_t>(profile.num_paths));
    const double lo = profile.support.lower();
    const double hi = profile.support.upper();
    for (auto& p : out.paths) {
        p.aoa = profile.support.degenerate() ? profile.support.center : uniform(rng, lo, hi);
        p.phase = uniform(rng, 0.0, 2.0 * kPi);
    }
    out.vector = reconstruct_channel(geom, profile.beta, out.paths);
    return out;
}

inline constexpr int kDefaultQuadraturePoints = 512;

/// R(m,n) = beta^2 * E{ exp(j 2 pi (D/lambda) (n-m) cos theta) } with theta
/// uniform over the support, evaluated by composite Gauss-Legendre on 64-node
/// panels. quad_points is a floor: more panels are added when the integrand
/// for the farthest lag would otherwise swing more than 40 rad per panel.
/// The result is Toeplitz, and PSD by construction since it is a positively
/// weighted sum of rank-one steering outer products.
inline CovarianceMatrix analytic_covariance(const LinkProfile& profile, const ArrayGeometry& geom,
                                            int quad_points = kDefaultQuadraturePoints) {
    if (quad_points < 64) {
        throw ConfigError("analytic_covariance: quad_points must be >= 64");
    }
    const int M = geom.num_antennas;
    const double power = profile.beta * profile.beta;
    CovarianceMatrix out;
    out.source = CovarianceSource::analytic;
    if (profile.support.degenerate() || profile.support.width() == 0.0) {
        const CVector a = steering_vector(geom, profile.support.center);
        out.matrix = power * a * a.adjoint();
        return out;
    }
    const double lo = profile.support.lower();
    const double hi = profile.support.upper();
    const double swing =
        2.0 * kPi * geom.spacing_ratio * (M - 1) * (std::cos(lo) - std::cos(hi));
    const int panels = std::max((quad_points + 63) / 64, static_cast<int>(std::ceil(swing / 40.0)));
    const QuadratureRule rule = composite_gauss_legendre(lo, hi, panels * 64);
    const double density = 1.0 / (hi - lo);

    // First row r(k) = R(0, k).
    CVector r = CVector::Zero(M);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double step = 2.0 * kPi * geom.spacing_ratio * std::cos(rule.nodes[q]);
        const double w = rule.weights[q] * density;
        // phasor recurrence, resynchronized every 64 lags
        const Complex rot = std::polar(1.0, step);
        Complex z;
        for (int k = 0; k < M; ++k) {
            z = (k % 64 == 0) ? std::polar(w, step * k) : z * rot;
            r(k) += z;
        }
    }
    r *= power;
    r(0) = Complex(r(0).real(), 0.0);
    out.matrix.resize(M, M);
    for (int m = 0; m < M; ++m) {
        for (int n = 0; n < M; ++n) {
            out.matrix(m, n) = n >= m ? r(n - m) : std::conj(r(m - n));
        }
    }
    return out;
}

/// (1/N) sum h h^H over the given draws.
inline CovarianceMatrix empirical_covariance(std::span<const ChannelRealization> samples) {
    if (samples.empty()) {
        throw InvalidInputError("empirical_covariance: no samples");
    }
    const Eigen::Index M = samples.front().vector.size();
    CMatrix stacked(M, static_cast<Eigen::Index>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].vector.size() != M) {
            throw DimensionError("empirical_covariance: inconsistent antenna counts");
        }
        stacked.col(static_cast<Eigen::Index>(i)) = samples[i].vector;
    }
    CovarianceMatrix out;
    out.source = CovarianceSource::empirical;
    out.sample_count = samples.size();
    CMatrix gram = CMatrix::Zero(M, M);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(stacked, 1.0 / static_cast<double>(samples.size()));
    out.matrix = gram.selfadjointView<Eigen::Lower>();
    return out;
}

/// Draws n channels from the profile and returns their sample covariance.
inline CovarianceMatrix sampled_covariance(const LinkProfile& profile, const ArrayGeometry& geom,
                                           std::size_t n, RandomStream& rng) {
    std::vector<ChannelRealization> draws;
    draws.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        draws.push_back(draw_channel(profile, geom, rng));
    }
    return empirical_covariance(draws);
}

struct SupportSplit {
    CVector inside;
    CVector outside;
};

/// Splits a realization into the paths whose AoA falls inside `target` and the rest.
inline SupportSplit decompose_by_support(const ChannelRealization& real, const ArrayGeometry& geom,
                                         const AngularSupport& target) {
    if (real.paths.empty()) {
        throw InvalidInputError("decompose_by_support: realization carries no path records");
    }
    SupportSplit out;
    out.inside = detail::sum_paths(geom, real.beta, real.paths,
                                   [&](const PathRecord& p) { return target.contains(p.aoa); });
    out.outside = detail::sum_paths(geom, real.beta, real.paths,
                                    [&](const PathRecord& p) { return !target.contains(p.aoa); });
    return out;
}

} // namespace decontam
