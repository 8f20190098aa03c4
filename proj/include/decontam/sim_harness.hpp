#pragma once

// Deterministic Monte Carlo driver: scenario x estimator x antenna grid.
//
// Every (M, trial) pair owns a random stream derived from (master_seed, M,
// trial), so results do not depend on the number of workers or on the order
// in which trials run. All estimators of a trial see the same channels,
// training block and data block.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "decontam/channel_model.hpp"
#include "decontam/errors.hpp"
#include "decontam/estimators.hpp"
#include "decontam/metrics_theory.hpp"
#include "decontam/network_topology.hpp"
#include "decontam/random.hpp"
#include "decontam/signal_stage.hpp"

namespace decontam {

inline constexpr const char* kVersion = "0.1.0";

enum class CovarianceMode { analytic, empirical };

struct ExperimentConfig {
    ScenarioParams scenario = preset_params("fig1");
    std::vector<int> antenna_grid{10, 20, 50, 100};
    std::vector<EstimatorKind> estimators{EstimatorKind::ls, EstimatorKind::mmse,
                                          EstimatorKind::am, EstimatorKind::ca,
                                          EstimatorKind::ma};
    int trials = 100;
    std::uint64_t master_seed = 1;
    CovarianceMode covariance_mode = CovarianceMode::analytic;
    std::size_t covariance_samples = 1000;
    std::string output_path;
    double mu = kDefaultMu;
    /// Also run MMSE on the training block with every interferer removed
    /// (same noise); reported per trial, not in the CSV.
    bool interference_free_reference = false;

    bool wants(EstimatorKind kind) const {
        return std::find(estimators.begin(), estimators.end(), kind) != estimators.end();
    }

    void validate() const {
        scenario.validate();
        if (trials < 1) {
            throw ConfigError("trials must be >= 1");
        }
        if (antenna_grid.empty()) {
            throw ConfigError("M_grid must not be empty");
        }
        for (std::size_t i = 0; i < antenna_grid.size(); ++i) {
            if (antenna_grid[i] < 1 || (i > 0 && antenna_grid[i] <= antenna_grid[i - 1])) {
                throw ConfigError("M_grid must be strictly ascending positive integers");
            }
            if (antenna_grid[i] < scenario.users_per_cell) {
                throw ConfigError("every M in M_grid must be >= users_per_cell");
            }
        }
        if (estimators.empty()) {
            throw ConfigError("estimator list must not be empty");
        }
        if (wants(EstimatorKind::sa) && scenario.users_per_cell > 1) {
            throw ConfigError("estimator 'sa' supports one user per cell only");
        }
        if (covariance_mode == CovarianceMode::empirical && covariance_samples < 1) {
            throw ConfigError("empirical covariance needs at least one sample");
        }
        if (!(mu >= 0.0 && mu < 1.0)) {
            throw ConfigError("mu must lie in [0, 1)");
        }
    }
};

struct EstimatorOutcome {
    double error = 0.0; ///< normalized error (linear) over all (cell, user) pairs
    double rate = 0.0;  ///< MRC per-cell rate averaged over cells, bits/s/Hz
};

struct TrialResult {
    int antennas = 0;
    int trial = 0;
    std::vector<EstimatorOutcome> outcomes; ///< aligned with config.estimators
    double interference_free_mmse_error = std::numeric_limits<double>::quiet_NaN();
    int theorem_pairs = 0; ///< (cell, user) pairs checked
    int theorem1_hits = 0;
    int theorem2_hits = 0;
    int theorem3_hits = 0;
};

inline TrialResult run_trial(const ExperimentConfig& config, int antennas, int trial) {
    RandomStream rng = derive_stream(config.master_seed,
                                     {static_cast<std::uint64_t>(antennas),
                                      static_cast<std::uint64_t>(trial)});
    ScenarioParams params = config.scenario;
    params.num_antennas = antennas;
    const Scenario scenario = build_scenario(params, rng);
    const int L = scenario.num_cells();
    const int K = scenario.users_per_cell();
    const PilotBook pilots = generate_pilots(K, params.pilot_length);
    const Observation obs = observe(scenario, pilots, rng);

    const std::size_t E = config.estimators.size();
    std::vector<std::vector<CVector>> estimates(E);
    std::vector<CVector> truths;
    std::vector<double> rate_sum(E, 0.0);
    std::vector<CVector> reference_estimates;
    TrialResult result;
    result.antennas = antennas;
    result.trial = trial;

    const bool need_basis = config.wants(EstimatorKind::am) || config.wants(EstimatorKind::ma);
    const bool need_reverse = config.wants(EstimatorKind::ca);

    for (int j = 0; j < L; ++j) {
        const CovarianceSet cov =
            config.covariance_mode == CovarianceMode::analytic
                ? analytic_covariance_set(scenario, j)
                : empirical_covariance_set(scenario, j, config.covariance_samples, rng);
        const CMatrix& y = obs.training.received[static_cast<std::size_t>(j)];
        const CMatrix gram = sample_gram(obs.data[static_cast<std::size_t>(j)]);
        SignalBasis basis;
        if (need_basis) {
            basis = select_signal_basis_from_gram(gram, K, config.mu);
        }

        std::vector<SpatialFilters> filters;
        for (int k = 0; k < K; ++k) {
            if (need_reverse) {
                filters.push_back(spatial_filters(cov, k));
            } else {
                CMatrix q = cov.pilot_sum(k);
                q.diagonal().array() += cov.noise_variance;
                filters.push_back({solve_hpd(q, cov.target(k)), CMatrix()});
            }
            truths.push_back(obs.channels[j][j][k].vector);

            std::vector<ChannelRealization> sharing;
            for (int l = 0; l < L; ++l) {
                sharing.push_back(obs.channels[j][l][k]);
            }
            const AngularSupport& support = scenario.profile(j, j, k).support;
            const auto alpha = compute_alpha(cov, k, filters.back().filter);
            result.theorem1_hits += check_theorem1(alpha, j).holds ? 1 : 0;
            result.theorem2_hits +=
                check_theorem2(sharing, j, filters.back().filter, support, scenario.geometry).holds ? 1 : 0;
            result.theorem3_hits += check_theorem3(sharing, j, support, scenario.geometry).holds ? 1 : 0;
            ++result.theorem_pairs;
        }

        for (std::size_t e = 0; e < E; ++e) {
            EstimateSet set;
            switch (config.estimators[e]) {
            case EstimatorKind::ls: set = ls_estimate(y, pilots); break;
            case EstimatorKind::mmse: set = mmse_estimate(y, pilots, cov); break;
            case EstimatorKind::am: set = amplitude_estimate_from_basis(y, pilots, basis); break;
            case EstimatorKind::ma: set = ma_estimate_from_basis(y, pilots, cov, basis); break;
            case EstimatorKind::ca:
                set.kind = EstimatorKind::ca;
                for (int k = 0; k < K; ++k) {
                    set.estimates.push_back(
                        ca_estimate_from_gram(y, gram, pilots, cov, k, &filters[static_cast<std::size_t>(k)])
                            .estimates.front());
                }
                break;
            case EstimatorKind::sa:
                set = sa_estimate_from_gram(y, gram, pilots.pilot(0), signal_subspace(cov.target(0)));
                break;
            }
            rate_sum[e] += percell_rate_mrc(set.estimates, obs.channels, j, cov.noise_variance);
            for (auto& h : set.estimates) {
                estimates[e].push_back(std::move(h));
            }
        }

        if (config.interference_free_reference) {
            const CMatrix clean = channel_matrix(obs.channels, j, j) * pilots.symbols +
                                  obs.training.noise[static_cast<std::size_t>(j)];
            for (auto& h : mmse_estimate(clean, pilots, cov.target_only()).estimates) {
                reference_estimates.push_back(std::move(h));
            }
        }
    }

    for (std::size_t e = 0; e < E; ++e) {
        result.outcomes.push_back({normalized_error(estimates[e], truths).linear, rate_sum[e] / L});
    }
    if (config.interference_free_reference) {
        result.interference_free_mmse_error = normalized_error(reference_estimates, truths).linear;
    }
    return result;
}

/// All trials of one antenna count, ordered by trial index.
struct TrialBatch {
    int antennas = 0;
    std::vector<TrialResult> trials;
};

/// Runs every (M, trial) pair on `workers` threads. Output is independent of
/// the worker count.
inline std::vector<TrialBatch> run_trials(const ExperimentConfig& config, int workers = 1) {
    config.validate();
    const std::size_t T = static_cast<std::size_t>(config.trials);
    const std::size_t total = config.antenna_grid.size() * T;
    std::vector<TrialResult> flat(total);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto work = [&] {
        for (std::size_t i = next++; i < total; i = next++) {
            try {
                flat[i] = run_trial(config, config.antenna_grid[i / T], static_cast<int>(i % T));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next = total;
            }
        }
    };
    const int n = std::max(1, workers);
    if (n == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < n; ++w) {
            pool.emplace_back(work);
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    std::vector<TrialBatch> batches;
    for (std::size_t m = 0; m < config.antenna_grid.size(); ++m) {
        TrialBatch b;
        b.antennas = config.antenna_grid[m];
        b.trials.assign(std::make_move_iterator(flat.begin() + static_cast<std::ptrdiff_t>(m * T)),
                        std::make_move_iterator(flat.begin() + static_cast<std::ptrdiff_t>((m + 1) * T)));
        batches.push_back(std::move(b));
    }
    return batches;
}

struct ResultRow {
    std::string scenario;
    std::string estimator;
    int M = 0;
    int K = 0;
    int L = 0;
    int C = 0;
    int trials = 0;
    double mean_err_db = 0.0;   ///< dB of the mean linear error
    double median_err_db = 0.0; ///< median of per-trial dB errors
    double std_err_db = 0.0;    ///< sample standard deviation of per-trial dB errors
    double mean_rate = 0.0;
    double theorem1_frac = 0.0;
    double theorem2_frac = 0.0;
    double theorem3_frac = 0.0;
};

inline double median(std::vector<double> values) {
    if (values.empty()) {
        throw InvalidInputError("median of an empty sample");
    }
    const std::size_t n = values.size();
    std::sort(values.begin(), values.end());
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

/// Per-trial errors (dB) of one estimator in a batch.
inline std::vector<double> trial_errors_db(const TrialBatch& batch, std::size_t estimator_index) {
    std::vector<double> out;
    for (const auto& t : batch.trials) {
        out.push_back(to_db(t.outcomes.at(estimator_index).error));
    }
    return out;
}

inline std::vector<ResultRow> aggregate(const ExperimentConfig& config,
                                        const std::vector<TrialBatch>& batches) {
    std::vector<ResultRow> rows;
    for (const auto& batch : batches) {
        int pairs = 0, t1 = 0, t2 = 0, t3 = 0;
        for (const auto& t : batch.trials) {
            pairs += t.theorem_pairs;
            t1 += t.theorem1_hits;
            t2 += t.theorem2_hits;
            t3 += t.theorem3_hits;
        }
        for (std::size_t e = 0; e < config.estimators.size(); ++e) {
            ResultRow row;
            row.scenario = config.scenario.name;
            row.estimator = std::string(to_string(config.estimators[e]));
            row.M = batch.antennas;
            row.K = config.scenario.users_per_cell;
            row.L = config.scenario.num_cells;
            row.C = config.scenario.data_length;
            row.trials = static_cast<int>(batch.trials.size());

            const std::vector<double> db = trial_errors_db(batch, e);
            double linear = 0.0, rate = 0.0, mean_db = 0.0;
            for (std::size_t i = 0; i < batch.trials.size(); ++i) {
                linear += batch.trials[i].outcomes[e].error;
                rate += batch.trials[i].outcomes[e].rate;
                mean_db += db[i];
            }
            const double n = static_cast<double>(batch.trials.size());
            mean_db /= n;
            double var = 0.0;
            for (double v : db) {
                var += (v - mean_db) * (v - mean_db);
            }
            row.mean_err_db = to_db(linear / n);
            row.median_err_db = median(db);
            row.std_err_db = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
            row.mean_rate = rate / n;
            row.theorem1_frac = pairs ? static_cast<double>(t1) / pairs : 0.0;
            row.theorem2_frac = pairs ? static_cast<double>(t2) / pairs : 0.0;
            row.theorem3_frac = pairs ? static_cast<double>(t3) / pairs : 0.0;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

inline std::vector<ResultRow> run_experiment(const ExperimentConfig& config, int workers = 1) {
    return aggregate(config, run_trials(config, workers));
}

inline constexpr const char* kCsvHeader =
    "scenario,estimator,M,K,L,C,trials,mean_err_db,median_err_db,std_err_db,mean_rate,"
    "theorem1_frac,theorem2_frac,theorem3_frac";

inline std::string format_fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

/// Metadata comment, header, one line per row; LF line endings.
inline void write_csv(std::ostream& os, const std::vector<ResultRow>& rows,
                      std::uint64_t master_seed) {
    os << "# master_seed=" << master_seed << " version=" << kVersion << '\n';
    os << kCsvHeader << '\n';
    for (const auto& r : rows) {
        os << r.scenario << ',' << r.estimator << ',' << r.M << ',' << r.K << ',' << r.L << ','
           << r.C << ',' << r.trials << ',' << format_fixed(r.mean_err_db) << ','
           << format_fixed(r.median_err_db) << ',' << format_fixed(r.std_err_db) << ','
           << format_fixed(r.mean_rate) << ',' << format_fixed(r.theorem1_frac) << ','
           << format_fixed(r.theorem2_frac) << ',' << format_fixed(r.theorem3_frac) << '\n';
    }
}

} // namespace decontam
