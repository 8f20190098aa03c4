#pragma once

// Pilot construction and synthesis of the uplink training and data blocks.

#include <cmath>
#include <vector>

#include "decontam/channel_model.hpp"
#include "decontam/errors.hpp"
#include "decontam/network_topology.hpp"
#include "decontam/numerics.hpp"
#include "decontam/random.hpp"

namespace decontam {

/// K x tau pilot matrix; row k is the sequence of user k in every cell.
struct PilotBook {
    CMatrix symbols;

    int users() const { return static_cast<int>(symbols.rows()); }
    int length() const { return static_cast<int>(symbols.cols()); }
    /// s_k as a column vector of length tau.
    CVector pilot(int k) const { return symbols.row(k).transpose(); }
};

/// First K rows of the tau-point DFT matrix (unit-modulus symbols), so
/// S S^H = tau I_K.
inline PilotBook generate_pilots(int users, int length) {
    if (users < 1 || length < users) {
        throw ConfigError("generate_pilots: need 1 <= K <= tau, got K=" + std::to_string(users) +
                          " tau=" + std::to_string(length));
    }
    PilotBook book;
    book.symbols.resize(users, length);
    for (int k = 0; k < users; ++k) {
        for (int t = 0; t < length; ++t) {
            // reduce k*t mod tau first to keep the phase argument small
            const double frac = static_cast<double>((k * t) % length) / length;
            book.symbols(k, t) = std::polar(1.0, -2.0 * kPi * frac);
        }
    }
    return book;
}

/// True channels of one coherence block, indexed [base station j][cell l][user k].
using ChannelSet = std::vector<std::vector<std::vector<ChannelRealization>>>;

inline ChannelSet draw_channels(const Scenario& scenario, RandomStream& rng) {
    const int L = scenario.num_cells();
    const int K = scenario.users_per_cell();
    ChannelSet out(static_cast<std::size_t>(L));
    for (int j = 0; j < L; ++j) {
        out[j].resize(static_cast<std::size_t>(L));
        for (int l = 0; l < L; ++l) {
            for (int k = 0; k < K; ++k) {
                out[j][l].push_back(draw_channel(scenario.profile(j, l, k), scenario.geometry, rng));
            }
        }
    }
    return out;
}

/// M x K matrix H_l^{(j)} of the users of cell l seen at base station j.
inline CMatrix channel_matrix(const ChannelSet& channels, int bs, int cell) {
    const auto& users = channels.at(static_cast<std::size_t>(bs)).at(static_cast<std::size_t>(cell));
    if (users.empty()) {
        return {};
    }
    CMatrix h(users.front().vector.size(), static_cast<Eigen::Index>(users.size()));
    for (std::size_t k = 0; k < users.size(); ++k) {
        h.col(static_cast<Eigen::Index>(k)) = users[k].vector;
    }
    return h;
}

struct TrainingSignals {
    std::vector<CMatrix> received; ///< Y^{(j)}, M x tau
    std::vector<CMatrix> noise;    ///< N^{(j)}, kept so interference-free baselines reuse it
};

/// Y^{(j)} = sum_l H_l^{(j)} S + N^{(j)}.
inline TrainingSignals simulate_training(const Scenario& scenario, const ChannelSet& channels,
                                         const PilotBook& pilots, RandomStream& rng) {
    const int L = scenario.num_cells();
    const int M = scenario.geometry.num_antennas;
    TrainingSignals out;
    for (int j = 0; j < L; ++j) {
        CMatrix noise = complex_gaussian_matrix(rng, M, pilots.length(), scenario.noise_variance);
        CMatrix y = noise;
        for (int l = 0; l < L; ++l) {
            y.noalias() += channel_matrix(channels, j, l) * pilots.symbols;
        }
        out.received.push_back(std::move(y));
        out.noise.push_back(std::move(noise));
    }
    return out;
}

/// W^{(j)} = sum_l H_l^{(j)} X_l + Z^{(j)} with Gaussian unit-variance symbols X_l.
/// The symbols of a cell are common to every base station.
inline std::vector<CMatrix> simulate_data(const Scenario& scenario, const ChannelSet& channels,
                                          RandomStream& rng) {
    const int L = scenario.num_cells();
    const int K = scenario.users_per_cell();
    const int M = scenario.geometry.num_antennas;
    const int C = scenario.params.data_length;
    std::vector<CMatrix> symbols;
    for (int l = 0; l < L; ++l) {
        symbols.push_back(complex_gaussian_matrix(rng, K, C));
    }
    std::vector<CMatrix> out;
    for (int j = 0; j < L; ++j) {
        CMatrix w = complex_gaussian_matrix(rng, M, C, scenario.noise_variance);
        for (int l = 0; l < L; ++l) {
            w.noalias() += channel_matrix(channels, j, l) * symbols[static_cast<std::size_t>(l)];
        }
        out.push_back(std::move(w));
    }
    return out;
}

/// Everything one coherence block produces at every base station.
struct Observation {
    ChannelSet channels;
    TrainingSignals training;
    std::vector<CMatrix> data;
};

inline Observation observe(const Scenario& scenario, const PilotBook& pilots, RandomStream& rng) {
    Observation obs;
    obs.channels = draw_channels(scenario, rng);
    obs.training = simulate_training(scenario, obs.channels, pilots, rng);
    obs.data = simulate_data(scenario, obs.channels, rng);
    return obs;
}

} // namespace decontam
