#pragma once

// Channel estimators for the target base station of a pilot-contaminated
// multi-cell uplink:
//
//   ls    least squares, Y S^H / tau
//   mmse  linear MMSE with per-link covariances
//   am    amplitude projection onto the dominant eigenspace of W W^H / C
//   ca    covariance-aided amplitude projection (spatial filter, dominant
//         eigenvector, filter reversal, pilot-based phase/amplitude fix),
//         with a zero-forcing pre-filter against co-cell users when K > 1
//   sa    subspace + amplitude projection (single user per cell)
//   ma    MMSE estimate projected onto the amplitude eigenspace
//
// Every estimator is a pure function of its inputs. Routines that need the
// data block only through its sample Gram matrix G = W W^H / C accept G
// directly so that a caller running several estimators forms it once.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "decontam/channel_model.hpp"
#include "decontam/errors.hpp"
#include "decontam/network_topology.hpp"
#include "decontam/numerics.hpp"
#include "decontam/random.hpp"
#include "decontam/signal_stage.hpp"

namespace decontam {

enum class EstimatorKind { ls, mmse, am, ca, sa, ma };

inline constexpr std::array<EstimatorKind, 6> kAllEstimators{
    EstimatorKind::ls, EstimatorKind::mmse, EstimatorKind::am,
    EstimatorKind::ca, EstimatorKind::sa,   EstimatorKind::ma};

inline std::string_view to_string(EstimatorKind kind) {
    switch (kind) {
    case EstimatorKind::ls: return "ls";
    case EstimatorKind::mmse: return "mmse";
    case EstimatorKind::am: return "am";
    case EstimatorKind::ca: return "ca";
    case EstimatorKind::sa: return "sa";
    case EstimatorKind::ma: return "ma";
    }
    return "?";
}

inline EstimatorKind parse_estimator(std::string_view tag) {
    for (auto k : kAllEstimators) {
        if (to_string(k) == tag) {
            return k;
        }
    }
    throw ConfigError("unknown estimator '" + std::string(tag) + "'");
}

/// Default eigenvalue threshold factor for amplitude-based basis selection.
inline constexpr double kDefaultMu = 0.2;
/// Fraction of trace kept by the subspace + amplitude estimator's rank rule.
inline constexpr double kDefaultEnergyFraction = 0.999;

/// Covariances of every user toward one target base station.
struct CovarianceSet {
    std::vector<std::vector<CMatrix>> R; ///< [cell l][user k]
    double noise_variance = 1.0;
    int target_cell = 0;

    int num_cells() const { return static_cast<int>(R.size()); }
    int users_per_cell() const { return R.empty() ? 0 : static_cast<int>(R.front().size()); }
    Eigen::Index antennas() const { return R.front().front().rows(); }

    const CMatrix& at(int cell, int user) const {
        return R.at(static_cast<std::size_t>(cell)).at(static_cast<std::size_t>(user));
    }
    const CMatrix& target(int user) const { return at(target_cell, user); }

    /// sum_l R_{lk} over the users sharing pilot k.
    CMatrix pilot_sum(int user) const {
        CMatrix s = CMatrix::Zero(antennas(), antennas());
        for (int l = 0; l < num_cells(); ++l) {
            s += at(l, user);
        }
        return s;
    }

    /// The same set with every interfering cell removed.
    CovarianceSet target_only() const {
        CovarianceSet out;
        out.R = {R.at(static_cast<std::size_t>(target_cell))};
        out.noise_variance = noise_variance;
        out.target_cell = 0;
        return out;
    }
};

inline CovarianceSet analytic_covariance_set(const Scenario& scenario, int bs,
                                             int quad_points = kDefaultQuadraturePoints) {
    CovarianceSet set;
    set.noise_variance = scenario.noise_variance;
    set.target_cell = bs;
    for (int l = 0; l < scenario.num_cells(); ++l) {
        set.R.emplace_back();
        for (int k = 0; k < scenario.users_per_cell(); ++k) {
            set.R.back().push_back(
                analytic_covariance(scenario.profile(bs, l, k), scenario.geometry, quad_points).matrix);
        }
    }
    return set;
}

/// Sample covariances from `samples` independent draws per link.
inline CovarianceSet empirical_covariance_set(const Scenario& scenario, int bs,
                                              std::size_t samples, RandomStream& rng) {
    CovarianceSet set;
    set.noise_variance = scenario.noise_variance;
    set.target_cell = bs;
    for (int l = 0; l < scenario.num_cells(); ++l) {
        set.R.emplace_back();
        for (int k = 0; k < scenario.users_per_cell(); ++k) {
            set.R.back().push_back(
                sampled_covariance(scenario.profile(bs, l, k), scenario.geometry, samples, rng).matrix);
        }
    }
    return set;
}

struct EstimateDiagnostics {
    int kappa = 0;                            ///< amplitude-basis size
    int retained_rank = 0;                    ///< subspace rank kept by sa
    std::vector<double> dominant_eigenvalues; ///< lambda_1 of the matrix whose eigenvector was used
    bool zf_fallback = false;                 ///< ZF Gram was ill-conditioned, pseudo-inverse used
};

struct EstimateSet {
    EstimatorKind kind = EstimatorKind::ls;
    std::vector<CVector> estimates; ///< one per target user
    EstimateDiagnostics diagnostics;
};

/// W W^H / C
inline CMatrix sample_gram(const CMatrix& data) {
    if (data.cols() == 0) {
        throw InvalidInputError("sample_gram: empty data block");
    }
    CMatrix g = CMatrix::Zero(data.rows(), data.rows());
    g.selfadjointView<Eigen::Lower>().rankUpdate(data, 1.0 / static_cast<double>(data.cols()));
    return g.selfadjointView<Eigen::Lower>();
}

namespace detail {

inline void require_training(const CMatrix& y, const CMatrix& pilots) {
    if (y.cols() != pilots.cols()) {
        throw DimensionError("training block has " + std::to_string(y.cols()) +
                             " symbols but pilots have length " + std::to_string(pilots.cols()));
    }
}

inline std::vector<CVector> split_columns(const CMatrix& m) {
    std::vector<CVector> out;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        out.emplace_back(m.col(c));
    }
    return out;
}

// (1/tau) u u^H Y s_k^*  with u unit norm
inline CVector project_pilot_estimate(const CVector& u, const CMatrix& y, const CVector& pilot) {
    const CVector ls = y * pilot.conjugate() / static_cast<double>(pilot.size());
    return u * (u.adjoint() * ls)(0);
}

} // namespace detail

inline EstimateSet ls_estimate(const CMatrix& y, const PilotBook& pilots) {
    detail::require_training(y, pilots.symbols);
    EstimateSet out;
    out.kind = EstimatorKind::ls;
    out.estimates = detail::split_columns(y * pilots.symbols.adjoint() / pilots.length());
    return out;
}

/// Per-user linear MMSE. With row-orthogonal pilots the stacked KM-dimensional
/// estimator is block diagonal, so user k only needs
///   R_{jk} (tau sum_l R_{lk} + sigma^2 I)^{-1} Y s_k^*.
inline EstimateSet mmse_estimate(const CMatrix& y, const PilotBook& pilots,
                                 const CovarianceSet& cov) {
    detail::require_training(y, pilots.symbols);
    const Eigen::Index M = y.rows();
    if (cov.antennas() != M) {
        throw DimensionError("mmse_estimate: covariance size does not match antenna count");
    }
    const double tau = pilots.length();
    EstimateSet out;
    out.kind = EstimatorKind::mmse;
    const CMatrix despread = y * pilots.symbols.adjoint();
    for (int k = 0; k < pilots.users(); ++k) {
        CMatrix system = tau * cov.pilot_sum(k);
        system.diagonal().array() += cov.noise_variance;
        out.estimates.emplace_back(cov.target(k) * solve_hpd(system, despread.col(k)));
    }
    return out;
}

struct SignalBasis {
    CMatrix basis; ///< M x kappa, orthonormal columns
    int kappa = 0;
    RVector eigenvalues;
};

/// Dominant eigenvectors of the data Gram: every eigenvalue above mu * lambda_K,
/// and never fewer than K. Eigenvalues below M * eps * lambda_1 count as zero,
/// which only matters for mu = 0 on rank-deficient data.
inline SignalBasis select_signal_basis_from_gram(const CMatrix& gram, int users, double mu) {
    if (!(mu >= 0.0 && mu < 1.0)) {
        throw ConfigError("select_signal_basis: mu must lie in [0, 1)");
    }
    if (users < 1 || users > gram.rows()) {
        throw ConfigError("select_signal_basis: need 1 <= K <= M");
    }
    const HermitianEig eig = hermitian_eig(gram);
    const double floor = static_cast<double>(gram.rows()) *
                         std::numeric_limits<double>::epsilon() * std::max(eig.values(0), 0.0);
    const double cut = std::max(mu * eig.values(users - 1), floor);
    int kappa = 0;
    while (kappa < eig.values.size() && eig.values(kappa) > cut) {
        ++kappa;
    }
    kappa = std::max(kappa, users);
    SignalBasis out;
    out.kappa = kappa;
    out.basis = eig.vectors.leftCols(kappa);
    out.eigenvalues = eig.values;
    return out;
}

inline SignalBasis select_signal_basis(const CMatrix& data, int users, double mu) {
    if (data.cols() < users) {
        throw ConfigError("select_signal_basis: need at least K data symbols");
    }
    if (users > data.rows()) {
        throw ConfigError("select_signal_basis: K exceeds the antenna count");
    }
    return select_signal_basis_from_gram(sample_gram(data), users, mu);
}

inline EstimateSet amplitude_estimate_from_basis(const CMatrix& y, const PilotBook& pilots,
                                                 const SignalBasis& basis) {
    detail::require_training(y, pilots.symbols);
    EstimateSet out;
    out.kind = EstimatorKind::am;
    const CMatrix ls = y * pilots.symbols.adjoint() / pilots.length();
    out.estimates = detail::split_columns(basis.basis * (basis.basis.adjoint() * ls));
    out.diagnostics.kappa = basis.kappa;
    out.diagnostics.dominant_eigenvalues.assign(basis.eigenvalues.data(),
                                                basis.eigenvalues.data() + basis.kappa);
    return out;
}

/// (1/tau) E E^H Y S^H
inline EstimateSet amplitude_estimate(const CMatrix& y, const CMatrix& data,
                                      const PilotBook& pilots, double mu = kDefaultMu) {
    return amplitude_estimate_from_basis(y, pilots, select_signal_basis(data, pilots.users(), mu));
}

struct SpatialFilters {
    CMatrix filter;  ///< (sum_l R_lk + sigma^2 I)^{-1} R_jk
    CMatrix reverse; ///< R_jk^+ (sum_l R_lk + sigma^2 I)
};

inline SpatialFilters spatial_filters(const CovarianceSet& cov, int user,
                                      const NumericTolerances& tol = {}) {
    if (!(cov.noise_variance > 0.0)) {
        throw ConfigError("spatial_filters: noise variance must be positive");
    }
    CMatrix q = cov.pilot_sum(user);
    q.diagonal().array() += cov.noise_variance;
    const CMatrix& target = cov.target(user);
    SpatialFilters f;
    f.filter = solve_hpd(q, target, tol);
    f.reverse = pseudo_inverse(target, tol.pinv_rel) * q;
    return f;
}

struct ZeroForcing {
    CMatrix projector; ///< I - H (H^H H)^{-1} H^H
    bool fallback = false;
};

/// Projector onto the orthogonal complement of the columns of `others`.
/// A Gram condition number above 1e12 switches to the pseudo-inverse.
inline ZeroForcing zf_projector(const CMatrix& others, Eigen::Index antennas) {
    ZeroForcing zf;
    zf.projector = CMatrix::Identity(antennas, antennas);
    if (others.cols() == 0) {
        return zf;
    }
    const CMatrix gram = others.adjoint() * others;
    const HermitianEig eig = hermitian_eig(hermitian_part(gram));
    const double lmax = eig.values(0);
    const double lmin = eig.values(eig.values.size() - 1);
    CMatrix inv;
    if (lmax > 0.0 && lmin > lmax * 1e-12) {
        inv = solve_hpd(gram, CMatrix::Identity(gram.rows(), gram.cols()));
    } else {
        zf.fallback = true;
        inv = pseudo_inverse(hermitian_part(gram), 1e-12);
    }
    zf.projector -= others * inv * others.adjoint();
    return zf;
}

namespace detail {

// Steps 1-3 of the covariance-aided projection, given the (possibly ZF
// pre-filtered) data Gram.
inline CVector covariance_aided_direction(const CMatrix& gram, const SpatialFilters& f,
                                          double* lambda1) {
    const CMatrix filtered = hermitian_part(f.filter * gram * f.filter.adjoint());
    double lambda = 0.0;
    const CVector u = dominant_eigenvector(filtered, &lambda);
    if (!(lambda > 0.0)) {
        throw DegenerateInputError("covariance-aided projection: filtered data has no energy");
    }
    if (lambda1 != nullptr) {
        *lambda1 = lambda;
    }
    const CVector back = f.reverse * u;
    const double norm = back.norm();
    if (!(norm > 0.0)) {
        throw DegenerateInputError("covariance-aided projection: reversed direction vanished");
    }
    return back / norm;
}

} // namespace detail

/// Covariance-aided amplitude projection for user `user`, from the data Gram.
/// K = 1 reduces to the single-user algorithm (the ZF projector is I).
inline EstimateSet ca_estimate_from_gram(const CMatrix& y, const CMatrix& gram,
                                         const PilotBook& pilots, const CovarianceSet& cov,
                                         int user, const SpatialFilters* filters = nullptr) {
    detail::require_training(y, pilots.symbols);
    const Eigen::Index M = y.rows();
    const int K = pilots.users();
    if (user < 0 || user >= K) {
        throw ConfigError("ca_estimate: user index out of range");
    }
    EstimateSet out;
    out.kind = EstimatorKind::ca;
    std::optional<SpatialFilters> own;
    if (filters == nullptr) {
        own = spatial_filters(cov, user);
        filters = &*own;
    }
    CMatrix effective = gram;
    if (K > 1) {
        const CMatrix ls = y * pilots.symbols.adjoint() / pilots.length();
        CMatrix others(M, K - 1);
        for (int k = 0, c = 0; k < K; ++k) {
            if (k != user) {
                others.col(c++) = ls.col(k);
            }
        }
        const ZeroForcing zf = zf_projector(others, M);
        out.diagnostics.zf_fallback = zf.fallback;
        effective = zf.projector * gram * zf.projector.adjoint();
    }
    double lambda = 0.0;
    const CVector direction = detail::covariance_aided_direction(effective, *filters, &lambda);
    out.diagnostics.dominant_eigenvalues = {lambda};
    out.estimates = {detail::project_pilot_estimate(direction, y, pilots.pilot(user))};
    return out;
}

/// Single user per cell: W~ = Xi W, u~ = e1(W~ W~^H / C), u = Xi' u~ / |Xi' u~|,
/// h = (1/tau) u u^H Y s^*.
inline EstimateSet ca_estimate_single(const CMatrix& y, const CMatrix& data, const CVector& pilot,
                                      const CovarianceSet& cov) {
    PilotBook book;
    book.symbols = pilot.transpose();
    return ca_estimate_from_gram(y, sample_gram(data), book, cov, 0);
}

/// Multi-user form: LS estimates of the other K-1 co-cell users feed a ZF
/// projector T, then the single-user steps run on Xi_jk T W.
inline EstimateSet ca_estimate_multi(const CMatrix& y, const CMatrix& data,
                                     const PilotBook& pilots, const CovarianceSet& cov, int user) {
    return ca_estimate_from_gram(y, sample_gram(data), pilots, cov, user);
}

/// Leading eigenvectors of R capturing `energy_fraction` of its trace.
inline CMatrix signal_subspace(const CMatrix& r, double energy_fraction = kDefaultEnergyFraction) {
    const HermitianEig eig = hermitian_eig(r);
    const double total = eig.values.cwiseMax(0.0).sum();
    if (!(total > 0.0)) {
        throw DegenerateInputError("signal_subspace: covariance has no energy");
    }
    double acc = 0.0;
    Eigen::Index rank = 0;
    while (rank < eig.values.size() && acc < energy_fraction * total) {
        acc += std::max(eig.values(rank), 0.0);
        ++rank;
    }
    return eig.vectors.leftCols(rank);
}

inline EstimateSet sa_estimate_from_gram(const CMatrix& y, const CMatrix& gram,
                                         const CVector& pilot, const CMatrix& subspace) {
    if (subspace.cols() == 0) {
        throw DegenerateInputError("sa_estimate: retained rank is zero");
    }
    const CMatrix proj = subspace * subspace.adjoint();
    double lambda = 0.0;
    const CVector u = dominant_eigenvector(hermitian_part(proj * gram * proj), &lambda);
    if (!(lambda > 0.0)) {
        throw DegenerateInputError("sa_estimate: projected data has no energy");
    }
    EstimateSet out;
    out.kind = EstimatorKind::sa;
    out.diagnostics.retained_rank = static_cast<int>(subspace.cols());
    out.diagnostics.dominant_eigenvalues = {lambda};
    out.estimates = {detail::project_pilot_estimate(u, y, pilot)};
    return out;
}

/// Subspace + amplitude projection: project W onto the dominant eigenspace of
/// R_target, take the dominant eigenvector, fix phase/amplitude with the pilot.
inline EstimateSet sa_estimate(const CMatrix& y, const CMatrix& data, const CVector& pilot,
                               const CMatrix& r_target,
                               double energy_fraction = kDefaultEnergyFraction) {
    if (y.cols() != pilot.size()) {
        throw DimensionError("sa_estimate: pilot length mismatch");
    }
    return sa_estimate_from_gram(y, sample_gram(data), pilot,
                                 signal_subspace(r_target, energy_fraction));
}

/// MMSE estimate of each user projected onto the common amplitude basis E.
inline EstimateSet ma_estimate_from_basis(const CMatrix& y, const PilotBook& pilots,
                                          const CovarianceSet& cov, const SignalBasis& basis) {
    EstimateSet out = mmse_estimate(y, pilots, cov);
    out.kind = EstimatorKind::ma;
    for (auto& h : out.estimates) {
        h = basis.basis * (basis.basis.adjoint() * h);
    }
    out.diagnostics.kappa = basis.kappa;
    return out;
}

inline EstimateSet ma_estimate(const CMatrix& y, const CMatrix& data, const PilotBook& pilots,
                               const CovarianceSet& cov, double mu = kDefaultMu) {
    return ma_estimate_from_basis(y, pilots, cov, select_signal_basis(data, pilots.users(), mu));
}

} // namespace decontam
