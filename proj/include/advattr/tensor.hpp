#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace advattr {

// Error taxonomy. The CLI maps ConfigError to exit code 2 and NumericError
// to exit code 3; everything else is a programming/contract error.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Vec = std::vector<double>;
using ImageVector = Vec;
using LatentCode = Vec;
using Embedding = Vec;
using FeatureVector = Vec;

/// Dense row-major tensor of doubles. Immutable once constructed; every
/// value is checked finite at construction.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::vector<std::size_t> shape, Vec data);

  static Tensor scalar(double v);
  static Tensor vector(Vec v);
  static Tensor matrix(std::size_t rows, std::size_t cols, Vec data);
  static Tensor zeros(std::vector<std::size_t> shape);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::span<const double> data() const { return data_; }
  const Vec& values() const { return data_; }
  std::size_t size() const { return data_.size(); }
  std::size_t rank() const { return shape_.size(); }
  bool is_scalar() const { return shape_.empty(); }

  double operator[](std::size_t i) const { return data_[i]; }
  double item() const;

  bool operator==(const Tensor&) const = default;

 private:
  std::vector<std::size_t> shape_;
  Vec data_;
};

std::string shape_string(const std::vector<std::size_t>& shape);

void require_finite(std::span<const double> values, const char* what);

}  // namespace advattr
