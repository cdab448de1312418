#pragma once

#include <string>

#include <Eigen/Dense>

namespace gplay {

// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

// Parses a decimal produced by format_double (or any strtod-compatible
// literal). Throws InputError on trailing garbage.
double parse_double(const std::string& text);

// Dense row-major CSV, one matrix row per line.
std::string matrix_to_csv(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_csv(const std::string& text);

}  // namespace gplay
