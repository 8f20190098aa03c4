#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace decontam {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
inline QuadratureRule gauss_legendre(int n) {
    if (n < 1) {
        throw std::invalid_argument("gauss_legendre: need at least one node");
    }
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double pn = n == 1 ? x : p1;
            const double pnm1 = n == 1 ? 1.0 : p0;
            dp = n * (x * pn - pnm1) / (x * x - 1.0);
            const double dx = pn / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        // recompute derivative at the converged node
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        const double pn = n == 1 ? x : p1;
        const double pnm1 = n == 1 ? 1.0 : p0;
        dp = n * (x * pn - pnm1) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) {
        rule.nodes[n / 2] = 0.0;
    }
    return rule;
}

/// Composite rule on [lo, hi]: ceil(total_points / panel_points) equal panels,
/// each carrying a panel_points-node Gauss-Legendre rule.
inline QuadratureRule composite_gauss_legendre(double lo, double hi, int total_points,
                                               int panel_points = 64) {
    const int panels = std::max(1, (total_points + panel_points - 1) / panel_points);
    const QuadratureRule base = gauss_legendre(panel_points);
    QuadratureRule rule;
    rule.nodes.reserve(static_cast<std::size_t>(panels) * panel_points);
    rule.weights.reserve(rule.nodes.capacity());
    const double width = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
        const double a = lo + p * width;
        const double mid = a + 0.5 * width;
        for (int i = 0; i < panel_points; ++i) {
            rule.nodes.push_back(mid + 0.5 * width * base.nodes[i]);
            rule.weights.push_back(0.5 * width * base.weights[i]);
        }
    }
    return rule;
}

} // namespace decontam
