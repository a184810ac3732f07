#include "titlmars/windfarm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "text_util.hpp"
#include "titlmars/errors.hpp"

namespace titlmars {

void validate(const FarmConfig& farm) {
  if (farm.cells_per_side < 1) throw InputError("farm needs at least one cell per side");
  if (!(farm.cell_width > 0.0)) throw InputError("farm cell width must be positive");
  if (!(farm.rotor_radius > 0.0)) throw InputError("rotor radius must be positive");
  if (!(farm.wake_decay > 0.0)) throw InputError("wake decay must be positive");
  const long cells = static_cast<long>(farm.cells_per_side) * farm.cells_per_side;
  if (farm.turbines < 1 || farm.turbines > cells) {
    throw InputError(fmt::format("turbine count {} must be in 1..{}", farm.turbines, cells));
  }
}

WindScenario make_scenario(std::string name, std::vector<WindCase> cases) {
  if (cases.empty()) throw InputError(fmt::format("scenario '{}' has no wind cases", name));
  double total = 0.0;
  for (const auto& c : cases) {
    if (!(c.speed >= 0.0) || !std::isfinite(c.speed)) {
      throw InputError(fmt::format("scenario '{}': wind speed must be >= 0", name));
    }
    if (!(c.weight >= 0.0) || !std::isfinite(c.weight) || !std::isfinite(c.direction)) {
      throw InputError(fmt::format("scenario '{}': weights must be finite and >= 0", name));
    }
    total += c.weight;
  }
  if (!(total > 0.0)) throw InputError(fmt::format("scenario '{}': weights sum to zero", name));
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  for (auto& c : cases) {
    c.weight /= total;
    c.direction = std::fmod(c.direction, kTwoPi);
    if (c.direction < 0.0) c.direction += kTwoPi;
    if (c.direction >= kTwoPi) c.direction = 0.0;
  }
  return {std::move(name), std::move(cases)};
}

std::optional<WindScenario> find_builtin_scenario(std::string_view name) {
  constexpr double pi = std::numbers::pi;
  std::vector<WindCase> cases;
  if (name == "fw1") {
    cases = {{15.0, pi / 4, 1.0}};
  } else if (name == "fw2") {
    cases = {{15.0, 0.0, 1.0}, {15.0, pi, 1.0}, {15.0, pi / 2, 1.0}, {15.0, 3 * pi / 2, 1.0}};
  } else if (name == "fw3") {
    for (int k = 0; k < 6; ++k) cases.push_back({15.0, k * pi / 3, 1.0});
  } else if (name == "fw4") {
    for (double speed : {12.0, 10.0, 8.0}) {
      for (int k = 0; k < 12; ++k) cases.push_back({speed, k * pi / 6, 1.0});
    }
  } else {
    return std::nullopt;
  }
  return make_scenario(std::string(name), std::move(cases));
}

WindScenario builtin_scenario(std::string_view name) {
  auto s = find_builtin_scenario(name);
  if (!s) throw InputError(fmt::format("unknown scenario '{}' (expected fw1..fw4)", name));
  return *s;
}

WindScenario parse_scenario(std::string_view text, std::string name) {
  std::vector<WindCase> cases;
  const auto lines = detail::split_char(text, '\n');
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto fields = detail::split_ws(line);
    if (fields.empty()) continue;
    if (fields.size() != 3) {
      throw ParseError(fmt::format("scenario line {}: expected 'speed direction weight'", i + 1));
    }
    double vals[3];
    for (std::size_t f = 0; f < 3; ++f) {
      auto v = detail::parse_double(fields[f]);
      if (!v) {
        throw ParseError(
            fmt::format("scenario line {}, field {}: not a number: '{}'", i + 1, f + 1, fields[f]));
      }
      vals[f] = *v;
    }
    cases.push_back({vals[0], vals[1], vals[2]});
  }
  return make_scenario(std::move(name), std::move(cases));
}

WindScenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(detail::read_file(path), path.stem().string());
}

WindScenario resolve_scenario(std::string_view name_or_path) {
  if (auto s = find_builtin_scenario(name_or_path)) return *s;
  return load_scenario(std::filesystem::path(name_or_path));
}

CellCenter cell_center(const FarmConfig& farm, std::size_t cell) {
  const std::size_t side = static_cast<std::size_t>(farm.cells_per_side);
  const double col = static_cast<double>(cell % side);
  const double row = static_cast<double>(cell / side);
  return {(col + 0.5) * farm.cell_width, (row + 0.5) * farm.cell_width};
}

double wake_speed(double v0, double rotor_radius, double wake_radius) {
  if (!(rotor_radius > 0.0)) throw InputError("rotor radius must be positive");
  if (wake_radius < rotor_radius) {
    throw InputError(fmt::format("wake radius {} is inside the rotor radius {}", wake_radius,
                                 rotor_radius));
  }
  const double ratio = rotor_radius / wake_radius;
  return v0 - 2.0 * v0 * ratio * ratio / 3.0;
}

double combined_speed(double v0, const std::vector<double>& upstream_speeds) {
  if (upstream_speeds.empty() || v0 <= 0.0) return v0;
  double sum = 0.0;
  for (double v : upstream_speeds) {
    const double deficit = 1.0 - v / v0;
    sum += deficit * deficit;
  }
  return std::max(0.0, v0 * (1.0 - std::sqrt(sum)));
}

double turbine_power(double speed) {
  if (speed < 2.0) return 0.0;
  if (speed < 12.8) return 0.3 * speed * speed * speed;
  if (speed <= 18.0) return 629.1;
  return 0.0;
}

std::vector<UpstreamTurbine> upstream_set(const FarmConfig& farm, const Layout& layout,
                                          double direction, std::size_t i) {
  const double ux = std::sin(direction);
  const double uy = std::cos(direction);
  const CellCenter pi = cell_center(farm, layout[i]);
  std::vector<UpstreamTurbine> out;
  for (std::size_t j = 0; j < layout.size(); ++j) {
    if (j == i) continue;
    const CellCenter pj = cell_center(farm, layout[j]);
    const double dx = pj.east - pi.east;
    const double dy = pj.north - pi.north;
    const double d = dx * ux + dy * uy;
    // Cell centres on a common cross-wind line give d of order 1e-13.
    if (d <= 1e-9 * farm.cell_width) continue;
    const double offset = std::abs(dx * uy - dy * ux);
    const double radius = farm.rotor_radius + farm.wake_decay * d;
    if (offset <= radius) out.push_back({j, d, offset, radius});
  }
  return out;
}

std::vector<double> simulate_layout(const FarmConfig& farm, const Layout& layout,
                                    const WindScenario& scenario) {
  std::vector<double> power(layout.size(), 0.0);
  std::vector<double> speeds;
  for (const auto& wind : scenario.cases) {
    for (std::size_t i = 0; i < layout.size(); ++i) {
      speeds.clear();
      for (const auto& up : upstream_set(farm, layout, wind.direction, i)) {
        speeds.push_back(wake_speed(wind.speed, farm.rotor_radius, up.wake_radius));
      }
      power[i] += wind.weight * turbine_power(combined_speed(wind.speed, speeds));
    }
  }
  return power;
}

Layout random_layout(const FarmConfig& farm, std::mt19937_64& rng) {
  const std::size_t cells =
      static_cast<std::size_t>(farm.cells_per_side) * static_cast<std::size_t>(farm.cells_per_side);
  const std::size_t t = static_cast<std::size_t>(farm.turbines);
  // Partial Fisher-Yates shuffle.
  std::vector<std::size_t> idx(cells);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t k = 0; k < t; ++k) {
    const std::size_t span = cells - k;
    const std::size_t pick = k + static_cast<std::size_t>(rng() % span);
    std::swap(idx[k], idx[pick]);
  }
  idx.resize(t);
  return idx;
}

PowerGrid monte_carlo_power_grid(const FarmConfig& farm, const WindScenario& scenario,
                                 int layouts, std::uint64_t seed) {
  validate(farm);
  if (layouts < 1) throw InputError("need at least one layout");
  const std::size_t cells =
      static_cast<std::size_t>(farm.cells_per_side) * static_cast<std::size_t>(farm.cells_per_side);
  std::vector<double> sum(cells, 0.0);
  PowerGrid grid;
  grid.count.assign(cells, 0);
  std::mt19937_64 rng(seed);
  for (int n = 0; n < layouts; ++n) {
    const Layout layout = random_layout(farm, rng);
    const auto power = simulate_layout(farm, layout, scenario);
    for (std::size_t i = 0; i < layout.size(); ++i) {
      sum[layout[i]] += power[i];
      ++grid.count[layout[i]];
    }
  }
  grid.mean.resize(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    grid.mean[c] = grid.count[c] > 0 ? sum[c] / static_cast<double>(grid.count[c])
                                     : std::numeric_limits<double>::quiet_NaN();
  }
  return grid;
}

Dataset power_grid_dataset(const FarmConfig& farm, const PowerGrid& grid) {
  std::vector<std::size_t> occupied;
  for (std::size_t c = 0; c < grid.count.size(); ++c) {
    if (grid.count[c] > 0) occupied.push_back(c);
  }
  Dataset d;
  d.x.resize(static_cast<Eigen::Index>(occupied.size()), 2);
  d.y.resize(static_cast<Eigen::Index>(occupied.size()));
  for (std::size_t r = 0; r < occupied.size(); ++r) {
    const auto p = cell_center(farm, occupied[r]);
    const auto row = static_cast<Eigen::Index>(r);
    d.x(row, 0) = p.east;
    d.x(row, 1) = p.north;
    d.y(row) = grid.mean[occupied[r]];
  }
  const double lo = 0.5 * farm.cell_width;
  const double hi = (farm.cells_per_side - 0.5) * farm.cell_width;
  d.lower = {lo, lo};
  d.upper = {hi, hi};
  return d;
}

}  // namespace titlmars
