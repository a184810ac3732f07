#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace titlmars {

// Tabular samples (x_i, f(x_i)). Column bounds default to the sample range.
struct Dataset {
  Eigen::MatrixXd x;  // n x V
  Eigen::VectorXd y;  // n
  std::vector<double> lower;
  std::vector<double> upper;

  Eigen::Index rows() const { return x.rows(); }
  Eigen::Index dimension() const { return x.cols(); }
};

// Validates shape and finiteness and derives [min, max] bounds per column.
// Throws InputError on violations.
Dataset make_dataset(Eigen::MatrixXd x, Eigen::VectorXd y);

// CSV with header "x1,...,xV,y", decimal text, no missing values.
Dataset parse_csv(std::string_view text);
Dataset read_csv(const std::filesystem::path& path);
std::string to_csv(const Dataset& data);
void write_csv(const Dataset& data, const std::filesystem::path& path);

}  // namespace titlmars
