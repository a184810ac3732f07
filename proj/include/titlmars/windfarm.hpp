#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "titlmars/dataset.hpp"

namespace titlmars {

struct FarmConfig {
  int cells_per_side = 41;
  double cell_width = 308.0;  // m
  double rotor_radius = 40.0;  // m
  double wake_decay = 0.075;
  int turbines = 40;
};

// Throws InputError on a non-positive size, width, radius or decay, or when
// the turbine count exceeds the number of cells.
void validate(const FarmConfig& farm);

// Direction is where the wind blows from, in radians clockwise from north.
struct WindCase {
  double speed = 0.0;
  double direction = 0.0;
  double weight = 1.0;
};

struct WindScenario {
  std::string name;
  std::vector<WindCase> cases;  // weights sum to 1
};

// Normalizes weights and wraps directions into [0, 2pi). Throws InputError
// on negative speeds or weights, or a zero total weight.
WindScenario make_scenario(std::string name, std::vector<WindCase> cases);

// fw1 .. fw4.
WindScenario builtin_scenario(std::string_view name);
std::optional<WindScenario> find_builtin_scenario(std::string_view name);

// One case per line: "speed direction weight"; '#' starts a comment.
WindScenario parse_scenario(std::string_view text, std::string name = "custom");
WindScenario load_scenario(const std::filesystem::path& path);
// Builtin name or file path.
WindScenario resolve_scenario(std::string_view name_or_path);

// Cell index = row * cells_per_side + col; row 0 is the southern edge and
// col 0 the western edge.
struct CellCenter {
  double east = 0.0;
  double north = 0.0;
};
CellCenter cell_center(const FarmConfig& farm, std::size_t cell);

// v0 (1 - (2/3) R^2 / r^2). Throws InputError for r < R or R <= 0.
double wake_speed(double v0, double rotor_radius, double wake_radius);

// v0 [1 - sqrt(sum (1 - v_ij / v0)^2)], clamped at 0.
double combined_speed(double v0, const std::vector<double>& upstream_speeds);

// Piecewise power curve in kW.
double turbine_power(double speed);

struct UpstreamTurbine {
  std::size_t turbine = 0;      // index into the layout
  double distance = 0.0;        // along the wind, > 0
  double offset = 0.0;          // across the wind, >= 0
  double wake_radius = 0.0;     // R + kappa * distance
};

using Layout = std::vector<std::size_t>;  // distinct occupied cells

// Turbines whose wake cone covers the hub of layout[i].
std::vector<UpstreamTurbine> upstream_set(const FarmConfig& farm, const Layout& layout,
                                          double direction, std::size_t i);

// Expected power per turbine (kW), weighted over the scenario cases.
std::vector<double> simulate_layout(const FarmConfig& farm, const Layout& layout,
                                    const WindScenario& scenario);

// Uniform T-subset of the cells.
Layout random_layout(const FarmConfig& farm, std::mt19937_64& rng);

struct PowerGrid {
  std::vector<double> mean;           // per cell; NaN where never occupied
  std::vector<std::int64_t> count;    // occurrences per cell
};

// Mean power per turbine occurrence over `layouts` seeded random layouts.
PowerGrid monte_carlo_power_grid(const FarmConfig& farm, const WindScenario& scenario,
                                 int layouts, std::uint64_t seed);

// Occupied cells as rows (x1 = easting, x2 = northing, y = mean kW). Bounds
// are the full farm extent of cell centres.
Dataset power_grid_dataset(const FarmConfig& farm, const PowerGrid& grid);

}  // namespace titlmars
