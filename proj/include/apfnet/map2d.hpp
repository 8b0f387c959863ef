#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace apfnet {

// Dense row-major 2-D scalar map.
class Map2d {
 public:
  Map2d() = default;
  Map2d(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool sameShape(const Map2d& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  bool operator==(const Map2d&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace apfnet
