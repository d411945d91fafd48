#pragma once

#include <cstddef>
#include <vector>

namespace randquant {

/// One half-open partition cell [left, right) of the unit interval.
struct Cell {
  std::size_t index = 1;  // 1-based
  double left = 0.0;
  double right = 1.0;

  double length() const { return right - left; }
};

/// A K-cell quantizer partition of [0,1): interior thresholds
/// 0 <= a_1 <= ... <= a_{K-1} < 1 plus the implicit endpoints a_0 = 0 and
/// a_K = 1. Cells are half-open, so a point equal to a threshold belongs to
/// the cell on its right. Duplicate thresholds are legal and produce
/// zero-length cells that carry no probability.
///
/// All members are const; instances are safe to share across threads.
class ThresholdSet {
 public:
  /// Single cell [0,1).
  ThresholdSet() = default;

  /// Takes the interior thresholds in any order and sorts them.
  /// Throws std::invalid_argument if any value is outside [0,1).
  explicit ThresholdSet(std::vector<double> interior);

  /// Number of cells K (= interior size + 1).
  std::size_t levels() const { return interior_.size() + 1; }

  const std::vector<double>& interior() const { return interior_; }

  /// Index in 1..K of the cell containing x. Throws std::domain_error
  /// unless 0 <= x < 1. O(log K).
  std::size_t encode(double x) const;

  /// Midpoint of cell `index`; the MSE-optimal reproduction value.
  /// Throws std::domain_error unless 1 <= index <= K.
  double decode(std::size_t index) const;

  Cell cell(std::size_t index) const;

  /// The K spacings a_k - a_{k-1}; they telescope to 1.
  std::vector<double> spacings() const;

  /// Exact MSE of encode+decode for a uniform source on [0,1):
  /// sum of spacing^3 / 12.
  double conditional_mse() const;

  /// Exact index entropy in bits for a uniform source:
  /// -sum spacing * log2(spacing), with 0 log 0 := 0.
  double conditional_entropy() const;

 private:
  double boundary(std::size_t i) const;

  std::vector<double> interior_;
};

}  // namespace randquant
