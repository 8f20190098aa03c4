#pragma once

// Error and rate metrics, plus numerical checks of the decontamination
// conditions (alpha ordering, residual in-support interference power, bounded
// covariance spectrum).

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "decontam/channel_model.hpp"
#include "decontam/errors.hpp"
#include "decontam/estimators.hpp"
#include "decontam/numerics.hpp"
#include "decontam/signal_stage.hpp"

namespace decontam {

inline constexpr double kErrorFloorDb = -200.0;

inline double to_db(double linear) {
    if (!(linear > 0.0)) {
        return kErrorFloorDb;
    }
    return std::max(kErrorFloorDb, 10.0 * std::log10(linear));
}

struct NormalizedError {
    double linear = 0.0;
    double db = kErrorFloorDb;
    int excluded = 0; ///< pairs skipped because the true channel was zero
};

/// Mean over pairs of |h_hat - h|^2 / |h|^2.
inline NormalizedError normalized_error(std::span<const CVector> estimates,
                                        std::span<const CVector> truths) {
    if (estimates.size() != truths.size()) {
        throw DimensionError("normalized_error: estimate and truth counts differ");
    }
    NormalizedError out;
    double sum = 0.0;
    int used = 0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        if (estimates[i].size() != truths[i].size()) {
            throw DimensionError("normalized_error: vector lengths differ");
        }
        const double power = truths[i].squaredNorm();
        if (!(power > 0.0)) {
            ++out.excluded;
            continue;
        }
        sum += (estimates[i] - truths[i]).squaredNorm() / power;
        ++used;
    }
    if (used == 0) {
        throw InvalidInputError("normalized_error: every true channel is zero");
    }
    out.linear = sum / used;
    out.db = to_db(out.linear);
    return out;
}

/// Sum over the users of cell `bs` of log2(1 + SINR_k), MRC combiner g = h_hat_k,
/// with the true channels of every other user (all cells) as interference.
inline double percell_rate_mrc(std::span<const CVector> estimates, const ChannelSet& channels,
                               int bs, double noise_variance) {
    const auto& at_bs = channels.at(static_cast<std::size_t>(bs));
    const auto& own = at_bs.at(static_cast<std::size_t>(bs));
    if (estimates.size() != own.size()) {
        throw DimensionError("percell_rate_mrc: need one estimate per user of the cell");
    }
    double rate = 0.0;
    for (std::size_t k = 0; k < own.size(); ++k) {
        const CVector& g = estimates[k];
        const double gain = g.squaredNorm();
        if (!(gain > 0.0)) {
            continue;
        }
        const double signal = std::norm(g.dot(own[k].vector));
        double interference = noise_variance * gain;
        for (std::size_t l = 0; l < at_bs.size(); ++l) {
            for (std::size_t kk = 0; kk < at_bs[l].size(); ++kk) {
                if (l == static_cast<std::size_t>(bs) && kk == k) {
                    continue;
                }
                interference += std::norm(g.dot(at_bs[l][kk].vector));
            }
        }
        rate += std::log2(1.0 + signal / interference);
    }
    return rate;
}

/// (1/M) tr(Xi R_l Xi^H) for every cell l, Xi the spatial filter of `user`.
inline std::vector<double> compute_alpha(const CovarianceSet& cov, int user, const CMatrix& filter) {
    const double M = static_cast<double>(cov.antennas());
    std::vector<double> alpha;
    for (int l = 0; l < cov.num_cells(); ++l) {
        const CMatrix xr = filter * cov.at(l, user);
        // tr(Xi R Xi^H) = sum_ab (Xi R)_ab conj(Xi)_ab
        alpha.push_back(std::max(0.0, (xr.array() * filter.conjugate().array()).sum().real() / M));
    }
    return alpha;
}

inline std::vector<double> compute_alpha(const CovarianceSet& cov, int user) {
    return compute_alpha(cov, user, spatial_filters(cov, user).filter);
}

struct TheoremCheck {
    bool holds = true;
    /// Smallest gap (desired minus worst interferer); +inf when there is no interferer.
    double margin = std::numeric_limits<double>::infinity();
};

/// alpha_target > alpha_l for every interferer, strictly.
inline TheoremCheck check_theorem1(std::span<const double> alpha, int target) {
    TheoremCheck out;
    for (std::size_t l = 0; l < alpha.size(); ++l) {
        if (static_cast<int>(l) == target) {
            continue;
        }
        out.margin = std::min(out.margin, alpha[static_cast<std::size_t>(target)] - alpha[l]);
    }
    out.holds = out.margin > 0.0;
    return out;
}

/// |Xi h_{l,in}| < |Xi h_target| for every interferer, where h_{l,in} keeps the
/// interferer paths falling inside the target support. `users` holds the
/// realizations sharing the target's pilot, one per cell.
inline TheoremCheck check_theorem2(std::span<const ChannelRealization> users, int target,
                                   const CMatrix& filter, const AngularSupport& target_support,
                                   const ArrayGeometry& geom) {
    TheoremCheck out;
    const double desired = (filter * users[static_cast<std::size_t>(target)].vector).norm();
    for (std::size_t l = 0; l < users.size(); ++l) {
        if (static_cast<int>(l) == target) {
            continue;
        }
        const SupportSplit split = decompose_by_support(users[l], geom, target_support);
        out.margin = std::min(out.margin, desired - (filter * split.inside).norm());
    }
    out.holds = out.margin > 0.0;
    return out;
}

/// |h_{l,in}| < |h_target| for every interferer.
inline TheoremCheck check_theorem3(std::span<const ChannelRealization> users, int target,
                                   const AngularSupport& target_support,
                                   const ArrayGeometry& geom) {
    TheoremCheck out;
    const double desired = users[static_cast<std::size_t>(target)].vector.norm();
    for (std::size_t l = 0; l < users.size(); ++l) {
        if (static_cast<int>(l) == target) {
            continue;
        }
        const SupportSplit split = decompose_by_support(users[l], geom, target_support);
        out.margin = std::min(out.margin, desired - split.inside.norm());
    }
    out.holds = out.margin > 0.0;
    return out;
}

struct SpectralPoint {
    int antennas = 0;
    double lambda1 = 0.0;
};

/// Largest covariance eigenvalue of a profile over a grid of array sizes.
inline std::vector<SpectralPoint> spectral_growth_diagnostic(const LinkProfile& profile,
                                                             double spacing_ratio,
                                                             std::span<const int> antenna_grid) {
    if (!std::is_sorted(antenna_grid.begin(), antenna_grid.end())) {
        throw ConfigError("spectral_growth_diagnostic: antenna grid must be increasing");
    }
    std::vector<SpectralPoint> out;
    for (int M : antenna_grid) {
        const ArrayGeometry geom{M, spacing_ratio};
        const CovarianceMatrix r = analytic_covariance(profile, geom);
        out.push_back({M, hermitian_eig(r.matrix).values(0)});
    }
    return out;
}

/// Everything the decontamination conditions depend on for one target user.
struct TheoremDiagnostics {
    std::vector<double> alpha;            ///< per cell
    std::vector<double> filtered_overlap; ///< |Xi h_{l,in}|^2 per cell (0 for the target)
    std::vector<double> raw_overlap;      ///< |h_{l,in}|^2 per cell (0 for the target)
    std::vector<double> covariance_norms; ///< |R_l|_2 per cell
    double filter_gram_norm = 0.0;        ///< |Xi Xi^H|_2
    TheoremCheck theorem1;
    TheoremCheck theorem2;
    TheoremCheck theorem3;
};

inline TheoremDiagnostics theorem_diagnostics(const CovarianceSet& cov, int user,
                                              const CMatrix& filter,
                                              std::span<const ChannelRealization> users,
                                              const AngularSupport& target_support,
                                              const ArrayGeometry& geom) {
    TheoremDiagnostics d;
    const int j = cov.target_cell;
    d.alpha = compute_alpha(cov, user, filter);
    for (std::size_t l = 0; l < users.size(); ++l) {
        d.covariance_norms.push_back(hermitian_eig(cov.at(static_cast<int>(l), user)).values(0));
        if (static_cast<int>(l) == j) {
            d.filtered_overlap.push_back(0.0);
            d.raw_overlap.push_back(0.0);
            continue;
        }
        const SupportSplit split = decompose_by_support(users[l], geom, target_support);
        d.filtered_overlap.push_back((filter * split.inside).squaredNorm());
        d.raw_overlap.push_back(split.inside.squaredNorm());
    }
    d.filter_gram_norm = spectral_norm(filter * filter.adjoint());
    d.theorem1 = check_theorem1(d.alpha, j);
    d.theorem2 = check_theorem2(users, j, filter, target_support, geom);
    d.theorem3 = check_theorem3(users, j, target_support, geom);
    return d;
}

} // namespace decontam
