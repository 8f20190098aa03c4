#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace decontam {

using RandomStream = std::mt19937_64;

/// Builds an independent stream from a master seed and a list of counters
/// (e.g. antenna count and trial index). The same key always yields the same
/// stream, regardless of which worker asks for it.
inline RandomStream derive_stream(std::uint64_t master_seed,
                                  std::initializer_list<std::uint64_t> counters = {}) {
    std::vector<std::uint32_t> words;
    words.reserve(2 + 2 * counters.size());
    auto push = [&words](std::uint64_t v) {
        words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
        words.push_back(static_cast<std::uint32_t>(v >> 32));
    };
    push(master_seed);
    for (auto c : counters) {
        push(c);
    }
    std::seed_seq seq(words.begin(), words.end());
    return RandomStream(seq);
}

inline double uniform(RandomStream& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
inline std::complex<double> complex_gaussian(RandomStream& rng, double variance = 1.0) {
    if (variance == 0.0) {
        return {};
    }
    std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

inline Eigen::MatrixXcd complex_gaussian_matrix(RandomStream& rng, Eigen::Index rows,
                                                Eigen::Index cols, double variance = 1.0) {
    if (variance == 0.0) {
        return Eigen::MatrixXcd::Zero(rows, cols);
    }
    Eigen::MatrixXcd out(rows, cols);
    std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            const double re = n(rng);
            const double im = n(rng);
            out(r, c) = {re, im};
        }
    }
    return out;
}

} // namespace decontam
