#pragma once

// Multi-cell layouts, user placement, per-link statistics and named presets.

#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "decontam/channel_model.hpp"
#include "decontam/errors.hpp"
#include "decontam/random.hpp"

namespace decontam {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Hexagonal cells with flat-top orientation: vertices at 0, 60, ... degrees,
/// first-ring neighbours at sqrt(3) * radius along 90, 150, ..., 30 degrees.
/// The ULA axis of every base station is the x axis.
struct CellLayout {
    int num_cells = 1;
    double cell_radius = 1000.0;
    std::vector<Point2> base_stations;
};

inline CellLayout build_hex_layout(int num_cells, double radius) {
    if (!(radius > 0.0)) {
        throw ConfigError("build_hex_layout: radius must be positive");
    }
    if (num_cells != 1 && num_cells != 2 && num_cells != 7) {
        throw ConfigError("build_hex_layout: supported cell counts are 1, 2 and 7, got " +
                          std::to_string(num_cells));
    }
    CellLayout layout;
    layout.num_cells = num_cells;
    layout.cell_radius = radius;
    layout.base_stations.push_back({0.0, 0.0});
    const double spacing = std::sqrt(3.0) * radius;
    for (int i = 0; i + 1 < num_cells; ++i) {
        const double angle = deg_to_rad(90.0 + 60.0 * i);
        layout.base_stations.push_back({spacing * std::cos(angle), spacing * std::sin(angle)});
    }
    return layout;
}

/// True when p lies inside the flat-top hexagon of circumradius `radius` centred at c.
inline bool in_hexagon(Point2 p, Point2 c, double radius) {
    const double apothem = 0.5 * std::sqrt(3.0) * radius;
    const double dx = p.x - c.x;
    const double dy = p.y - c.y;
    for (double deg : {30.0, 90.0, 150.0}) {
        const double a = deg_to_rad(deg);
        if (std::abs(dx * std::cos(a) + dy * std::sin(a)) > apothem) {
            return false;
        }
    }
    return true;
}

using UserPositions = std::vector<std::vector<Point2>>; ///< [cell][user]

/// K users per cell, uniform over the hexagon minus the exclusion disc.
inline UserPositions place_users(const CellLayout& layout, int users_per_cell,
                                 double exclusion_radius, RandomStream& rng) {
    if (!(exclusion_radius >= 0.0 && exclusion_radius < layout.cell_radius)) {
        throw ConfigError("place_users: exclusion radius must lie in [0, cell_radius)");
    }
    const double r = layout.cell_radius;
    UserPositions out(static_cast<std::size_t>(layout.num_cells));
    for (int l = 0; l < layout.num_cells; ++l) {
        const Point2 bs = layout.base_stations[static_cast<std::size_t>(l)];
        auto& cell = out[static_cast<std::size_t>(l)];
        while (static_cast<int>(cell.size()) < users_per_cell) {
            const Point2 p{bs.x + uniform(rng, -r, r), bs.y + uniform(rng, -r, r)};
            if (in_hexagon(p, bs, r) && distance(p, bs) >= exclusion_radius) {
                cell.push_back(p);
            }
        }
    }
    return out;
}

/// Two-cell mirror placement: the users sit symmetrically about the bisector
/// between the base stations, with their line-of-sight bearings at each base
/// station separated by half the angular spread (supports overlap by half).
inline UserPositions place_users_symmetric(const CellLayout& layout, double spread) {
    if (layout.num_cells != 2) {
        throw ConfigError("symmetric placement needs exactly two cells");
    }
    const double sep = layout.base_stations[1].y; // BS 2 sits on the +y axis
    const double d = 0.5 * layout.cell_radius;
    const double target = 0.5 * spread;
    auto gap = [&](double theta) {
        const double x = d * std::cos(theta);
        const double y = d * std::sin(theta);
        return std::atan2(sep - y, x) - theta - target;
    };
    double lo = deg_to_rad(1.0);
    double hi = deg_to_rad(89.999);
    if (!(gap(lo) > 0.0 && gap(hi) < 0.0)) {
        throw ConfigError("symmetric placement: no bearing realizes a half overlap for this spread");
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (gap(mid) > 0.0 ? lo : hi) = mid;
    }
    const double theta = 0.5 * (lo + hi);
    const Point2 u1{d * std::cos(theta), d * std::sin(theta)};
    const Point2 u2{u1.x, sep - u1.y};
    return {{u1}, {u2}};
}

/// Statistics of every link, indexed [base station j][cell l][user k].
struct LinkTable {
    std::vector<std::vector<std::vector<LinkProfile>>> profiles;
    std::vector<std::vector<std::vector<double>>> distances;
};

inline LinkTable derive_profiles(const CellLayout& layout, const UserPositions& positions,
                                 double spread, int num_paths, double gamma, double alpha) {
    LinkTable table;
    const auto L = static_cast<std::size_t>(layout.num_cells);
    table.profiles.resize(L);
    table.distances.resize(L);
    for (std::size_t j = 0; j < L; ++j) {
        const Point2 bs = layout.base_stations[j];
        table.profiles[j].resize(positions.size());
        table.distances[j].resize(positions.size());
        for (std::size_t l = 0; l < positions.size(); ++l) {
            for (const Point2& u : positions[l]) {
                const double dist = distance(u, bs);
                LinkProfile p;
                p.beta = path_loss(alpha, gamma, dist);
                p.support.center = fold_angle(std::atan2(u.y - bs.y, u.x - bs.x));
                p.support.half_spread = 0.5 * spread;
                p.num_paths = num_paths;
                table.profiles[j][l].push_back(p);
                table.distances[j][l].push_back(dist);
            }
        }
    }
    return table;
}

/// Noise variance giving the requested per-antenna SNR for a unit-power user at
/// the cell edge.
inline double calibrate_noise(const CellLayout& layout, double gamma, double alpha,
                              double snr_edge_db) {
    if (!std::isfinite(snr_edge_db)) {
        throw ConfigError("calibrate_noise: SNR must be finite");
    }
    const double edge = path_loss(alpha, gamma, layout.cell_radius);
    return edge * edge / std::pow(10.0, snr_edge_db / 10.0);
}

enum class Placement { uniform, symmetric };

struct ScenarioParams {
    std::string name = "custom";
    int num_cells = 7;
    int users_per_cell = 1;
    double cell_radius = 1000.0;
    double exclusion_radius = 100.0;
    double path_loss_exponent = 2.0;
    double path_loss_constant = 1.0;
    double angular_spread_deg = 30.0; ///< total support width
    int num_paths = 50;
    double spacing_ratio = 0.5;
    double snr_edge_db = 0.0;
    int pilot_length = 10;
    int data_length = 500;
    int num_antennas = 100;
    Placement placement = Placement::uniform;

    void validate() const {
        if (pilot_length < users_per_cell) {
            throw ConfigError("scenario: pilot_length must be >= users_per_cell");
        }
        if (users_per_cell < 1 || data_length < 1 || num_paths < 1) {
            throw ConfigError("scenario: users_per_cell, data_length and num_paths must be >= 1");
        }
        if (!(angular_spread_deg >= 0.0 && angular_spread_deg < 180.0)) {
            throw ConfigError("scenario: angular_spread_deg must lie in [0, 180)");
        }
        if (placement == Placement::symmetric && (num_cells != 2 || users_per_cell != 1)) {
            throw ConfigError("scenario: symmetric placement needs 2 cells with 1 user each");
        }
        ArrayGeometry{num_antennas, spacing_ratio}.validate();
    }
};

struct Scenario {
    ScenarioParams params;
    CellLayout layout;
    ArrayGeometry geometry;
    double noise_variance = 1.0;
    UserPositions user_positions;
    LinkTable links;

    int num_cells() const { return layout.num_cells; }
    int users_per_cell() const { return params.users_per_cell; }

    const LinkProfile& profile(int bs, int cell, int user) const {
        return links.profiles.at(static_cast<std::size_t>(bs))
            .at(static_cast<std::size_t>(cell))
            .at(static_cast<std::size_t>(user));
    }
};

/// Lays out cells, places users (drawing from rng for uniform placement) and
/// derives every link profile.
inline Scenario build_scenario(const ScenarioParams& params, RandomStream& rng) {
    params.validate();
    Scenario s;
    s.params = params;
    s.layout = build_hex_layout(params.num_cells, params.cell_radius);
    s.geometry = {params.num_antennas, params.spacing_ratio};
    s.noise_variance = calibrate_noise(s.layout, params.path_loss_exponent,
                                       params.path_loss_constant, params.snr_edge_db);
    const double spread = deg_to_rad(params.angular_spread_deg);
    s.user_positions = params.placement == Placement::symmetric
                           ? place_users_symmetric(s.layout, spread)
                           : place_users(s.layout, params.users_per_cell,
                                         params.exclusion_radius, rng);
    s.links = derive_profiles(s.layout, s.user_positions, spread, params.num_paths,
                              params.path_loss_exponent, params.path_loss_constant);
    return s;
}

inline constexpr std::array<std::string_view, 3> kPresetNames{"fig1", "fig2_3", "fig4_5"};

/// Parameters of the named experiment presets.
inline ScenarioParams preset_params(std::string_view name) {
    ScenarioParams p;
    p.name = std::string(name);
    if (name == "fig1") {
        p.num_cells = 2;
        p.users_per_cell = 1;
        p.path_loss_exponent = 0.0;
        p.angular_spread_deg = 60.0;
        p.placement = Placement::symmetric;
    } else if (name == "fig2_3") {
        p.num_cells = 7;
        p.users_per_cell = 1;
        p.path_loss_exponent = 2.0;
        p.angular_spread_deg = 30.0;
    } else if (name == "fig4_5") {
        p.num_cells = 7;
        p.users_per_cell = 4;
        p.path_loss_exponent = 2.0;
        p.angular_spread_deg = 30.0;
    } else {
        throw ConfigError("unknown preset '" + std::string(name) + "'");
    }
    return p;
}

inline Scenario preset(std::string_view name, std::uint64_t placement_seed = 0) {
    RandomStream rng = derive_stream(placement_seed);
    return build_scenario(preset_params(name), rng);
}

} // namespace decontam
