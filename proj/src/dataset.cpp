#include "titlmars/dataset.hpp"

#include <cmath>

#include <fmt/format.h>

#include "text_util.hpp"
#include "titlmars/errors.hpp"

namespace titlmars {

Dataset make_dataset(Eigen::MatrixXd x, Eigen::VectorXd y) {
  if (x.rows() != y.size()) {
    throw InputError(fmt::format("dataset has {} rows of x but {} responses", x.rows(), y.size()));
  }
  if (x.rows() < 2) throw InputError("dataset needs at least 2 rows");
  if (x.cols() < 1) throw InputError("dataset needs at least one input column");
  if (!x.allFinite() || !y.allFinite()) throw InputError("dataset contains non-finite values");
  Dataset d;
  d.lower.resize(static_cast<std::size_t>(x.cols()));
  d.upper.resize(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index v = 0; v < x.cols(); ++v) {
    d.lower[static_cast<std::size_t>(v)] = x.col(v).minCoeff();
    d.upper[static_cast<std::size_t>(v)] = x.col(v).maxCoeff();
  }
  d.x = std::move(x);
  d.y = std::move(y);
  return d;
}

Dataset parse_csv(std::string_view text) {
  auto lines = detail::split_char(text, '\n');
  std::size_t line_no = 0;
  std::vector<std::string_view> header;
  std::size_t pos = 0;
  for (; pos < lines.size(); ++pos) {
    if (!detail::trim(lines[pos]).empty()) break;
  }
  if (pos == lines.size()) throw ParseError("csv: empty document");
  line_no = pos + 1;
  header = detail::split_char(detail::trim(lines[pos]), ',');
  if (header.size() < 2) throw ParseError("csv line 1: need at least one x column and y");
  const std::size_t dim = header.size() - 1;
  for (std::size_t c = 0; c < dim; ++c) {
    if (detail::trim(header[c]) != fmt::format("x{}", c + 1)) {
      throw ParseError(fmt::format("csv line {}, column {}: expected header 'x{}', got '{}'",
                                   line_no, c + 1, c + 1, detail::trim(header[c])));
    }
  }
  if (detail::trim(header.back()) != "y") {
    throw ParseError(fmt::format("csv line {}, column {}: expected header 'y'", line_no,
                                 header.size()));
  }

  std::vector<double> values;
  std::size_t rows = 0;
  for (++pos; pos < lines.size(); ++pos) {
    const auto line = detail::trim(lines[pos]);
    if (line.empty()) continue;
    const auto cells = detail::split_char(line, ',');
    if (cells.size() != dim + 1) {
      throw ParseError(fmt::format("csv line {}: expected {} columns, got {}", pos + 1, dim + 1,
                                   cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      auto v = detail::parse_double(cells[c]);
      if (!v || !std::isfinite(*v)) {
        throw ParseError(fmt::format("csv line {}, column {}: not a finite number: '{}'", pos + 1,
                                     c + 1, detail::trim(cells[c])));
      }
      values.push_back(*v);
    }
    ++rows;
  }
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r * (dim + 1) + c];
    }
    y(static_cast<Eigen::Index>(r)) = values[r * (dim + 1) + dim];
  }
  return make_dataset(std::move(x), std::move(y));
}

Dataset read_csv(const std::filesystem::path& path) { return parse_csv(detail::read_file(path)); }

std::string to_csv(const Dataset& data) {
  std::string out;
  for (Eigen::Index c = 0; c < data.dimension(); ++c) out += fmt::format("x{},", c + 1);
  out += "y\n";
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.dimension(); ++c) out += fmt::format("{:.17g},", data.x(r, c));
    out += fmt::format("{:.17g}\n", data.y(r));
  }
  return out;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  detail::write_file(path, to_csv(data));
}

}  // namespace titlmars
