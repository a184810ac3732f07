#include "titlmars/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "text_util.hpp"
#include "titlmars/errors.hpp"

namespace titlmars {

std::string_view to_string(Sense sense) {
  return sense == Sense::kMin ? "min" : "max";
}

std::string_view to_string(VarKind kind) {
  return kind == VarKind::kReal ? "real" : "int";
}

Sense parse_sense(std::string_view text) {
  if (text == "min") return Sense::kMin;
  if (text == "max") return Sense::kMax;
  throw InputError(fmt::format("unknown sense '{}', expected min or max", text));
}

TitlMarsModel::TitlMarsModel(double intercept, std::vector<double> coeffs,
                             std::vector<BasisFunction> bases,
                             std::vector<VariableBound> bounds)
    : intercept_(intercept),
      coeffs_(std::move(coeffs)),
      bases_(std::move(bases)),
      bounds_(std::move(bounds)) {
  if (coeffs_.size() != bases_.size()) {
    throw ValidationError(fmt::format(
        "length mismatch: {} coefficients but {} basis functions",
        coeffs_.size(), bases_.size()));
  }
  if (bounds_.empty()) throw ValidationError("model must have at least one variable");
  if (!std::isfinite(intercept_)) throw ValidationError("intercept is not finite");
  for (std::size_t v = 0; v < bounds_.size(); ++v) {
    const auto& b = bounds_[v];
    if (!std::isfinite(b.lower) || !std::isfinite(b.upper) || !(b.lower < b.upper)) {
      throw ValidationError(fmt::format(
          "bounds: variable {} needs finite l < u, got [{}, {}]", v, b.lower, b.upper));
    }
    if (b.kind == VarKind::kInteger &&
        (std::floor(b.lower) != b.lower || std::floor(b.upper) != b.upper)) {
      throw ValidationError(fmt::format(
          "integer bounds: variable {} has non-integral bounds [{}, {}]", v,
          b.lower, b.upper));
    }
  }
  for (std::size_t m = 0; m < bases_.size(); ++m) {
    const auto& basis = bases_[m];
    if (!std::isfinite(coeffs_[m])) {
      throw ValidationError(fmt::format("coefficient of basis {} is not finite", m));
    }
    if (basis.order() < 1 || basis.order() > 2) {
      throw ValidationError(fmt::format(
          "interaction order: basis {} has {} terms, allowed 1 or 2", m,
          basis.order()));
    }
    for (const auto& term : basis.terms) {
      if (term.sign != 1 && term.sign != -1) {
        throw ValidationError(
            fmt::format("sign: basis {} has sign {}, expected +1 or -1", m, term.sign));
      }
      if (term.var >= bounds_.size()) {
        throw ValidationError(fmt::format(
            "variable index: basis {} references variable {} of {}", m, term.var,
            bounds_.size()));
      }
      const auto& b = bounds_[term.var];
      if (!std::isfinite(term.knot) || term.knot < b.lower || term.knot > b.upper) {
        throw ValidationError(fmt::format(
            "knot outside bounds: basis {} knot {} not in [{}, {}] of variable {}",
            m, term.knot, b.lower, b.upper, term.var));
      }
    }
    if (basis.order() == 2 && basis.terms[0].var == basis.terms[1].var) {
      throw ValidationError(fmt::format(
          "distinct variables: basis {} uses variable {} twice", m,
          basis.terms[0].var));
    }
  }
}

std::size_t TitlMarsModel::num_terms() const {
  std::size_t n = 0;
  for (const auto& b : bases_) n += b.order();
  return n;
}

double eval_term(const TruncatedTerm& term, std::span<const double> x) {
  if (term.var >= x.size()) {
    throw StructuralError(fmt::format("term variable {} out of range for point of length {}",
                                      term.var, x.size()));
  }
  return std::max(term.sign * (x[term.var] - term.knot), 0.0);
}

double eval_basis(const BasisFunction& basis, std::span<const double> x) {
  double product = 1.0;
  for (const auto& term : basis.terms) product *= eval_term(term, x);
  return product;
}

double eval_model(const TitlMarsModel& model, std::span<const double> x) {
  if (x.size() != model.dimension()) {
    throw StructuralError(fmt::format("point has length {}, model dimension is {}",
                                      x.size(), model.dimension()));
  }
  double value = model.intercept();
  const auto coeffs = model.coeffs();
  const auto bases = model.bases();
  for (std::size_t m = 0; m < bases.size(); ++m) {
    value += coeffs[m] * eval_basis(bases[m], x);
  }
  return value;
}

KnotGrid make_knot_grid(const TitlMarsModel& model) {
  KnotGrid grid;
  grid.breakpoints.resize(model.dimension());
  for (std::size_t v = 0; v < model.dimension(); ++v) {
    grid.breakpoints[v] = {model.bound(v).lower, model.bound(v).upper};
  }
  for (const auto& basis : model.bases()) {
    for (const auto& term : basis.terms) grid.breakpoints[term.var].push_back(term.knot);
  }
  for (auto& points : grid.breakpoints) {
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
  }
  return grid;
}

std::string serialize_model(const TitlMarsModel& model) {
  std::string out = "titl-mars v1\n";
  out += fmt::format("vars {}\n", model.dimension());
  for (std::size_t v = 0; v < model.dimension(); ++v) {
    const auto& b = model.bound(v);
    out += fmt::format("bound {} {:.17g} {:.17g} {}\n", v, b.lower, b.upper,
                       to_string(b.kind));
  }
  out += fmt::format("intercept {:.17g}\n", model.intercept());
  for (std::size_t m = 0; m < model.num_bases(); ++m) {
    const auto& basis = model.bases()[m];
    out += fmt::format("basis {:.17g} {}", model.coeffs()[m], basis.order());
    for (const auto& term : basis.terms) {
      out += fmt::format(" {:+d} {} {:.17g}", term.sign, term.var, term.knot);
    }
    out += '\n';
  }
  return out;
}

namespace {

struct LineCursor {
  std::size_t line_no;
  std::vector<std::string_view> fields;
};

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& msg) {
  throw ParseError(fmt::format("line {}: {}", line_no, msg));
}

double field_double(const LineCursor& line, std::size_t i, std::string_view name) {
  if (i >= line.fields.size()) parse_fail(line.line_no, fmt::format("missing field '{}'", name));
  auto value = detail::parse_double(line.fields[i]);
  if (!value) {
    parse_fail(line.line_no,
               fmt::format("field '{}' is not a number: '{}'", name, line.fields[i]));
  }
  return *value;
}

long long field_int(const LineCursor& line, std::size_t i, std::string_view name) {
  if (i >= line.fields.size()) parse_fail(line.line_no, fmt::format("missing field '{}'", name));
  auto value = detail::parse_int(line.fields[i]);
  if (!value) {
    parse_fail(line.line_no,
               fmt::format("field '{}' is not an integer: '{}'", name, line.fields[i]));
  }
  return *value;
}

}  // namespace

TitlMarsModel parse_model(std::string_view text) {
  std::vector<LineCursor> lines;
  std::size_t line_no = 0;
  for (auto raw : detail::split_char(text, '\n')) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    auto fields = detail::split_ws(detail::trim(raw));
    if (!fields.empty()) lines.push_back({line_no, std::move(fields)});
  }
  if (lines.empty()) throw ParseError("empty model document");
  if (lines[0].fields.size() != 2 || lines[0].fields[0] != "titl-mars" ||
      lines[0].fields[1] != "v1") {
    parse_fail(lines[0].line_no, "expected header 'titl-mars v1'");
  }
  std::size_t pos = 1;
  if (pos >= lines.size() || lines[pos].fields[0] != "vars") {
    parse_fail(pos < lines.size() ? lines[pos].line_no : line_no, "expected 'vars V'");
  }
  const long long dim = field_int(lines[pos], 1, "V");
  if (dim < 1) parse_fail(lines[pos].line_no, "V must be positive");
  ++pos;

  std::vector<VariableBound> bounds(static_cast<std::size_t>(dim));
  std::vector<bool> seen(bounds.size(), false);
  for (long long i = 0; i < dim; ++i, ++pos) {
    if (pos >= lines.size() || lines[pos].fields[0] != "bound") {
      parse_fail(pos < lines.size() ? lines[pos].line_no : line_no,
                 fmt::format("expected {} 'bound' lines", dim));
    }
    const auto& line = lines[pos];
    if (line.fields.size() != 5) parse_fail(line.line_no, "bound line needs 4 fields");
    const long long v = field_int(line, 1, "v");
    if (v < 0 || v >= dim || seen[static_cast<std::size_t>(v)]) {
      parse_fail(line.line_no, fmt::format("bad or repeated variable index {}", v));
    }
    seen[static_cast<std::size_t>(v)] = true;
    auto& b = bounds[static_cast<std::size_t>(v)];
    b.lower = field_double(line, 2, "l");
    b.upper = field_double(line, 3, "u");
    if (line.fields[4] == "real") {
      b.kind = VarKind::kReal;
    } else if (line.fields[4] == "int") {
      b.kind = VarKind::kInteger;
    } else {
      parse_fail(line.line_no, fmt::format("kind must be real or int, got '{}'", line.fields[4]));
    }
  }

  if (pos >= lines.size() || lines[pos].fields[0] != "intercept") {
    parse_fail(pos < lines.size() ? lines[pos].line_no : line_no, "expected 'intercept a0'");
  }
  if (lines[pos].fields.size() != 2) parse_fail(lines[pos].line_no, "intercept line needs 1 field");
  const double intercept = field_double(lines[pos], 1, "a0");
  ++pos;

  std::vector<double> coeffs;
  std::vector<BasisFunction> bases;
  for (; pos < lines.size(); ++pos) {
    const auto& line = lines[pos];
    if (line.fields[0] != "basis") {
      parse_fail(line.line_no, fmt::format("unexpected record '{}'", line.fields[0]));
    }
    const double coeff = field_double(line, 1, "a_m");
    const long long order = field_int(line, 2, "K_m");
    if (order < 0) parse_fail(line.line_no, "K_m must be non-negative");
    if (line.fields.size() != 3 + 3 * static_cast<std::size_t>(order)) {
      parse_fail(line.line_no,
                 fmt::format("basis with K_m={} needs {} term fields, got {}", order,
                             3 * order, line.fields.size() - 3));
    }
    BasisFunction basis;
    for (long long k = 0; k < order; ++k) {
      const std::size_t base = 3 + 3 * static_cast<std::size_t>(k);
      const long long sign = field_int(line, base, "s");
      const long long var = field_int(line, base + 1, "v");
      if (var < 0) parse_fail(line.line_no, "variable index must be non-negative");
      basis.terms.push_back({static_cast<int>(sign), static_cast<std::size_t>(var),
                             field_double(line, base + 2, "t")});
    }
    coeffs.push_back(coeff);
    bases.push_back(std::move(basis));
  }
  return TitlMarsModel(intercept, std::move(coeffs), std::move(bases), std::move(bounds));
}

TitlMarsModel load_model(const std::filesystem::path& path) {
  return parse_model(detail::read_file(path));
}

void save_model(const TitlMarsModel& model, const std::filesystem::path& path) {
  detail::write_file(path, serialize_model(model));
}

}  // namespace titlmars
