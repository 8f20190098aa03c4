#include <cmath>
#include <iostream>
#include <vector>

#include <gtest/gtest.h>

#include "decontam/metrics_theory.hpp"
#include "decontam/network_topology.hpp"
#include "oracles.hpp"

using namespace decontam;

namespace {

LinkProfile profile(double center_deg, double spread_deg, double beta = 1.0) {
    LinkProfile p;
    p.beta = beta;
    p.support = {deg_to_rad(center_deg), 0.5 * deg_to_rad(spread_deg)};
    p.num_paths = 50;
    return p;
}

CovarianceSet covariance_set(std::vector<CMatrix> per_cell, double noise, int target = 0) {
    CovarianceSet set;
    for (auto& r : per_cell) {
        set.R.push_back({std::move(r)});
    }
    set.noise_variance = noise;
    set.target_cell = target;
    return set;
}

ChannelSet single_cell_channels(std::vector<CVector> users) {
    ChannelSet ch(1);
    ch[0].resize(1);
    for (auto& h : users) {
        ChannelRealization r;
        r.vector = std::move(h);
        ch[0][0].push_back(std::move(r));
    }
    return ch;
}

} // namespace

TEST(NormalizedError, ExactEstimateHitsFloor) {
    oracle::Rng rng(1);
    const std::vector<CVector> h{oracle::gaussian_matrix(rng, 8, 1), oracle::gaussian_matrix(rng, 8, 1)};
    const NormalizedError e = normalized_error(h, h);
    EXPECT_EQ(e.linear, 0.0);
    EXPECT_EQ(e.db, kErrorFloorDb);
}

TEST(NormalizedError, ZeroAndDoubledEstimates) {
    oracle::Rng rng(2);
    const std::vector<CVector> h{oracle::gaussian_matrix(rng, 8, 1)};
    const std::vector<CVector> zero{CVector::Zero(8)};
    const std::vector<CVector> twice{2.0 * h[0]};
    EXPECT_NEAR(normalized_error(zero, h).linear, 1.0, 1e-15);
    EXPECT_NEAR(normalized_error(zero, h).db, 0.0, 1e-12);
    EXPECT_NEAR(normalized_error(twice, h).linear, 1.0, 1e-15);
}

TEST(NormalizedError, SkipsZeroTruthAndChecksShapes) {
    oracle::Rng rng(3);
    const CVector h = oracle::gaussian_matrix(rng, 4, 1);
    const std::vector<CVector> truth{h, CVector::Zero(4)};
    const std::vector<CVector> est{CVector::Zero(4), h};
    const NormalizedError e = normalized_error(est, truth);
    EXPECT_EQ(e.excluded, 1);
    EXPECT_NEAR(e.linear, 1.0, 1e-15);
    const std::vector<CVector> zeros{CVector::Zero(4)};
    EXPECT_THROW(normalized_error(zeros, zeros), InvalidInputError);
    const std::vector<CVector> shorter{CVector::Zero(3)};
    EXPECT_THROW(normalized_error(shorter, zeros), DimensionError);
    EXPECT_THROW(normalized_error(est, zeros), DimensionError);
}

TEST(NormalizedError, UnitaryInvariance) {
    oracle::Rng rng(4);
    const CMatrix q = oracle::gram_schmidt(oracle::gaussian_matrix(rng, 6, 6));
    std::vector<CVector> h, est, qh, qest;
    for (int i = 0; i < 3; ++i) {
        h.push_back(oracle::gaussian_matrix(rng, 6, 1));
        est.push_back(h.back() + 0.3 * oracle::gaussian_matrix(rng, 6, 1));
        qh.push_back(q * h.back());
        qest.push_back(q * est.back());
    }
    EXPECT_NEAR(normalized_error(est, h).linear, normalized_error(qest, qh).linear, 1e-13);
}

TEST(Rate, SingleUserUnitSnr) {
    CVector h = CVector::Zero(4);
    h(0) = 1.0;
    h(2) = Complex(0.0, 1.0);
    const ChannelSet ch = single_cell_channels({h});
    const std::vector<CVector> est{h};
    EXPECT_NEAR(percell_rate_mrc(est, ch, 0, 2.0), 1.0, 1e-15);
}

TEST(Rate, OrthogonalInterferersDoNotCount) {
    CVector h1 = CVector::Zero(4), h2 = CVector::Zero(4);
    h1(0) = 2.0;
    h2(1) = 3.0;
    const std::vector<CVector> est{h1, h2};
    const double with = percell_rate_mrc(est, single_cell_channels({h1, h2}), 0, 0.5);
    const double alone = std::log2(1.0 + 4.0 / 0.5) + std::log2(1.0 + 9.0 / 0.5);
    EXPECT_NEAR(with, alone, 1e-13);
}

TEST(Rate, InterferenceTermsUseTrueChannels) {
    oracle::Rng rng(5);
    const CVector h1 = oracle::gaussian_matrix(rng, 6, 1);
    const CVector h2 = oracle::gaussian_matrix(rng, 6, 1);
    const CVector g = h1 + 0.2 * oracle::gaussian_matrix(rng, 6, 1);
    const std::vector<CVector> est{g, h2};
    const double rate = percell_rate_mrc(est, single_cell_channels({h1, h2}), 0, 0.7);
    auto sinr = [](const CVector& gv, const CVector& own, const CVector& other, double noise) {
        return std::norm(gv.dot(own)) / (std::norm(gv.dot(other)) + noise * gv.squaredNorm());
    };
    const double ref = std::log2(1.0 + sinr(g, h1, h2, 0.7)) + std::log2(1.0 + sinr(h2, h2, h1, 0.7));
    EXPECT_NEAR(rate, ref, 1e-12);
}

TEST(Rate, ScaleInvariant) {
    oracle::Rng rng(6);
    const CVector h1 = oracle::gaussian_matrix(rng, 6, 1);
    const CVector h2 = oracle::gaussian_matrix(rng, 6, 1);
    const ChannelSet ch = single_cell_channels({h1, h2});
    const std::vector<CVector> est{h1 + h2, h2 - 0.5 * h1};
    const std::vector<CVector> scaled{7.5 * est[0], 0.01 * est[1]};
    EXPECT_NEAR(percell_rate_mrc(est, ch, 0, 0.3), percell_rate_mrc(scaled, ch, 0, 0.3), 1e-12);
}

TEST(Alpha, ScalarCase) {
    const CovarianceSet cov = covariance_set({CMatrix::Identity(5, 5)}, 1.0);
    const std::vector<double> a = compute_alpha(cov, 0);
    ASSERT_EQ(a.size(), 1u);
    EXPECT_NEAR(a[0], 0.25, 1e-15);
}

TEST(Alpha, DisjointInterfererIsSuppressed) {
    const int M = 256;
    const LinkProfile target = profile(60.0, 30.0);
    const LinkProfile interferer = profile(120.0, 30.0);
    const CovarianceSet cov = covariance_set({analytic_covariance(target, {M, 0.5}).matrix,
                                              analytic_covariance(interferer, {M, 0.5}).matrix},
                                             1.0);
    const std::vector<double> a = compute_alpha(cov, 0);

    // Brute-force path: midpoint covariances, Gauss-Jordan inverse, explicit trace.
    const CMatrix r0 = oracle::midpoint_covariance(1.0, target.support.lower(), target.support.upper(), M, 0.5, 8000);
    const CMatrix r1 = oracle::midpoint_covariance(1.0, interferer.support.lower(), interferer.support.upper(), M, 0.5, 8000);
    const CMatrix xi = oracle::gauss_jordan_inverse(r0 + r1 + CMatrix::Identity(M, M)) * r0;
    const double ref0 = (xi * r0 * xi.adjoint()).trace().real() / M;
    const double ref1 = (xi * r1 * xi.adjoint()).trace().real() / M;
    EXPECT_NEAR(a[0] / ref0, 1.0, 1e-4);
    EXPECT_LT(ref1 / ref0, 0.05);
    EXPECT_LT(a[1] / a[0], 0.05);
}

TEST(Alpha, InvariantUnderUnitaryRebasis) {
    oracle::Rng rng(7);
    const CMatrix q = oracle::gram_schmidt(oracle::gaussian_matrix(rng, 7, 7));
    const CMatrix r0 = oracle::random_psd(rng, 7, 3);
    const CMatrix r1 = oracle::random_psd(rng, 7, 4);
    const auto a = compute_alpha(covariance_set({r0, r1}, 0.4), 0);
    const auto b = compute_alpha(covariance_set({q * r0 * q.adjoint(), q * r1 * q.adjoint()}, 0.4), 0);
    EXPECT_NEAR(a[0], b[0], 1e-12);
    EXPECT_NEAR(a[1], b[1], 1e-12);
}

TEST(Alpha, FiniteArrayValueIsStable) {
    const LinkProfile target = profile(70.0, 30.0);
    const LinkProfile interferer = profile(95.0, 30.0);
    std::vector<double> ratio;
    for (int M : {256, 512}) {
        const CovarianceSet cov = covariance_set({analytic_covariance(target, {M, 0.5}).matrix,
                                                  analytic_covariance(interferer, {M, 0.5}).matrix},
                                                 1.0);
        ratio.push_back(compute_alpha(cov, 0)[0]);
    }
    EXPECT_NEAR(ratio[1] / ratio[0], 1.0, 0.05);
}

TEST(AlphaCondition, IdenticalCellsFail) {
    const CMatrix r = analytic_covariance(profile(80.0, 30.0), {32, 0.5}).matrix;
    const CovarianceSet cov = covariance_set({r, r}, 0.5);
    const auto a = compute_alpha(cov, 0);
    EXPECT_EQ(a[0], a[1]);
    EXPECT_FALSE(check_theorem1(a, 0).holds);
    EXPECT_EQ(check_theorem1(a, 0).margin, 0.0);
}

TEST(AlphaCondition, DisjointSupportsHold) {
    const CovarianceSet cov = covariance_set({analytic_covariance(profile(60.0, 30.0), {64, 0.5}).matrix,
                                              analytic_covariance(profile(120.0, 30.0), {64, 0.5}).matrix},
                                             1.0);
    const TheoremCheck c = check_theorem1(compute_alpha(cov, 0), 0);
    EXPECT_TRUE(c.holds);
    EXPECT_GT(c.margin, 0.0);
}

TEST(AlphaCondition, SingleCellIsVacuous) {
    const std::vector<double> a{0.3};
    const TheoremCheck c = check_theorem1(a, 0);
    EXPECT_TRUE(c.holds);
    EXPECT_TRUE(std::isinf(c.margin));
}

TEST(AlphaCondition, InvariantToJointScaling) {
    oracle::Rng rng(8);
    for (int i = 0; i < 20; ++i) {
        const CMatrix r0 = oracle::random_psd(rng, 6, 2);
        const CMatrix r1 = oracle::random_psd(rng, 6, 2);
        const bool base = check_theorem1(compute_alpha(covariance_set({r0, r1}, 0.5), 0), 0).holds;
        const bool scaled =
            check_theorem1(compute_alpha(covariance_set({1e-6 * r0, 1e-6 * r1}, 0.5e-6), 0), 0).holds;
        EXPECT_EQ(base, scaled);
    }
}

TEST(FilteredOverlapCondition, DisjointSupportsHold) {
    const ArrayGeometry g{32, 0.5};
    const LinkProfile target = profile(60.0, 30.0);
    const LinkProfile interferer = profile(120.0, 30.0);
    const CovarianceSet cov = covariance_set({analytic_covariance(target, g).matrix,
                                              analytic_covariance(interferer, g).matrix},
                                             1.0);
    const CMatrix filter = spatial_filters(cov, 0).filter;
    RandomStream rng = derive_stream(9);
    for (int i = 0; i < 20; ++i) {
        const std::vector<ChannelRealization> users{draw_channel(target, g, rng), draw_channel(interferer, g, rng)};
        EXPECT_TRUE(check_theorem2(users, 0, filter, target.support, g).holds);
    }
}

TEST(FilteredOverlapCondition, StrongInterfererInsideSupportFails) {
    const ArrayGeometry g{32, 0.5};
    const LinkProfile target = profile(90.0, 40.0);
    const LinkProfile interferer = profile(90.0, 40.0, std::sqrt(10.0));
    const CovarianceSet cov = covariance_set({analytic_covariance(target, g).matrix,
                                              analytic_covariance(interferer, g).matrix},
                                             1.0);
    const CMatrix filter = spatial_filters(cov, 0).filter;
    RandomStream rng = derive_stream(10);
    int holds = 0;
    for (int i = 0; i < 200; ++i) {
        const std::vector<ChannelRealization> users{draw_channel(target, g, rng), draw_channel(interferer, g, rng)};
        holds += check_theorem2(users, 0, filter, target.support, g).holds ? 1 : 0;
    }
    EXPECT_LT(holds / 200.0, 0.1);
}

TEST(FilteredOverlapCondition, TwoCellPresetFractionIsStrictlyBetween) {
    ScenarioParams p = preset_params("fig1");
    p.num_antennas = 10;
    RandomStream rng = derive_stream(11);
    const Scenario s = build_scenario(p, rng);
    const CovarianceSet cov = analytic_covariance_set(s, 0);
    const CMatrix filter = spatial_filters(cov, 0).filter;
    int holds = 0;
    for (int i = 0; i < 200; ++i) {
        const std::vector<ChannelRealization> users{draw_channel(s.profile(0, 0, 0), s.geometry, rng),
                                                    draw_channel(s.profile(0, 1, 0), s.geometry, rng)};
        holds += check_theorem2(users, 0, filter, s.profile(0, 0, 0).support, s.geometry).holds ? 1 : 0;
    }
    std::cout << "two-cell preset, M=10: condition held in " << holds << "/200 trials\n";
    EXPECT_GT(holds, 0);
    EXPECT_LT(holds, 200);
}

TEST(RawOverlapCondition, DisjointSupportsHold) {
    const ArrayGeometry g{16, 0.5};
    RandomStream rng = derive_stream(12);
    const LinkProfile target = profile(50.0, 30.0);
    const std::vector<ChannelRealization> users{draw_channel(target, g, rng),
                                                draw_channel(profile(130.0, 30.0), g, rng)};
    EXPECT_TRUE(check_theorem3(users, 0, target.support, g).holds);
}

TEST(RawOverlapCondition, IdenticalSupportsHoldAboutHalfTheTime) {
    const ArrayGeometry g{16, 0.5};
    const LinkProfile p = profile(80.0, 30.0);
    RandomStream rng = derive_stream(13);
    int holds = 0;
    const int n = 1000;
    for (int i = 0; i < n; ++i) {
        const std::vector<ChannelRealization> users{draw_channel(p, g, rng), draw_channel(p, g, rng)};
        holds += check_theorem3(users, 0, p.support, g).holds ? 1 : 0;
    }
    EXPECT_NEAR(holds / static_cast<double>(n), 0.5, 0.05);
}

TEST(RawOverlapCondition, ZeroSpreadDistinctAnglesAlwaysHold) {
    const ArrayGeometry g{16, 0.5};
    const LinkProfile target = profile(70.0, 0.0);
    const LinkProfile interferer = profile(71.0, 0.0, 5.0);
    RandomStream rng = derive_stream(14);
    for (int i = 0; i < 100; ++i) {
        const std::vector<ChannelRealization> users{draw_channel(target, g, rng), draw_channel(interferer, g, rng)};
        EXPECT_TRUE(check_theorem3(users, 0, target.support, g).holds);
    }
}

TEST(SpectralGrowth, BoundedSupportSaturates) {
    const LinkProfile p = profile(90.0, 30.0);
    const std::vector<int> grid{16, 32, 64, 128, 256, 512};
    const auto table = spectral_growth_diagnostic(p, 0.5, grid);
    ASSERT_EQ(table.size(), grid.size());
    for (std::size_t i = 1; i < table.size(); ++i) {
        EXPECT_GE(table[i].lambda1, table[i - 1].lambda1 * (1 - 1e-12));
    }
    EXPECT_LT(table[5].lambda1 / table[4].lambda1, 1.10);

    double l256 = 0.0, l512 = 0.0;
    oracle::power_iteration(analytic_covariance(p, {256, 0.5}).matrix, &l256);
    oracle::power_iteration(analytic_covariance(p, {512, 0.5}).matrix, &l512);
    // top eigenvalues are clustered, so the power iteration converges slowly
    EXPECT_NEAR(table[4].lambda1 / l256, 1.0, 1e-4);
    EXPECT_LT(l512 / l256, 1.10);
}

TEST(SpectralGrowth, ZeroSpreadGrowsLinearly) {
    const LinkProfile p = profile(60.0, 0.0, 0.5);
    const std::vector<int> grid{16, 64, 256};
    for (const auto& pt : spectral_growth_diagnostic(p, 0.5, grid)) {
        EXPECT_NEAR(pt.lambda1, 0.25 * pt.antennas, 1e-10 * pt.antennas);
    }
}

TEST(SpectralGrowth, RejectsUnsortedGrid) {
    const std::vector<int> grid{64, 32};
    EXPECT_THROW(spectral_growth_diagnostic(profile(90.0, 30.0), 0.5, grid), ConfigError);
}

TEST(Diagnostics, BundleIsConsistent) {
    ScenarioParams p = preset_params("fig1");
    p.num_antennas = 32;
    RandomStream rng = derive_stream(15);
    const Scenario s = build_scenario(p, rng);
    const CovarianceSet cov = analytic_covariance_set(s, 0);
    const CMatrix filter = spatial_filters(cov, 0).filter;
    const std::vector<ChannelRealization> users{draw_channel(s.profile(0, 0, 0), s.geometry, rng),
                                                draw_channel(s.profile(0, 1, 0), s.geometry, rng)};
    const TheoremDiagnostics d =
        theorem_diagnostics(cov, 0, filter, users, s.profile(0, 0, 0).support, s.geometry);
    EXPECT_EQ(d.alpha.size(), 2u);
    EXPECT_EQ(d.filtered_overlap[0], 0.0);
    EXPECT_GT(d.raw_overlap[1], 0.0);
    EXPECT_LE(d.filter_gram_norm, std::pow(d.covariance_norms[0] / cov.noise_variance, 2));
    EXPECT_EQ(d.theorem1.holds, check_theorem1(d.alpha, 0).holds);
}
