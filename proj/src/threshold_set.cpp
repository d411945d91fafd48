#include "randquant/threshold_set.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace randquant {

ThresholdSet::ThresholdSet(std::vector<double> interior) : interior_(std::move(interior)) {
  for (double a : interior_) {
    if (!(a >= 0.0 && a < 1.0)) {
      throw std::invalid_argument("ThresholdSet: interior thresholds must lie in [0,1)");
    }
  }
  std::sort(interior_.begin(), interior_.end());
}

double ThresholdSet::boundary(std::size_t i) const {
  if (i == 0) return 0.0;
  if (i == levels()) return 1.0;
  return interior_[i - 1];
}

std::size_t ThresholdSet::encode(double x) const {
  if (!(x >= 0.0 && x < 1.0)) {
    throw std::domain_error("encode: x must lie in [0,1)");
  }
  auto it = std::upper_bound(interior_.begin(), interior_.end(), x);
  return static_cast<std::size_t>(it - interior_.begin()) + 1;
}

double ThresholdSet::decode(std::size_t index) const {
  if (index < 1 || index > levels()) {
    throw std::domain_error("decode: cell index out of range");
  }
  return 0.5 * (boundary(index - 1) + boundary(index));
}

Cell ThresholdSet::cell(std::size_t index) const {
  if (index < 1 || index > levels()) {
    throw std::domain_error("cell: cell index out of range");
  }
  return Cell{index, boundary(index - 1), boundary(index)};
}

std::vector<double> ThresholdSet::spacings() const {
  std::vector<double> out;
  out.reserve(levels());
  double prev = 0.0;
  for (double a : interior_) {
    out.push_back(a - prev);
    prev = a;
  }
  out.push_back(1.0 - prev);
  return out;
}

double ThresholdSet::conditional_mse() const {
  double sum = 0.0;
  double prev = 0.0;
  auto add = [&](double edge) {
    const double len = edge - prev;
    sum += len * len * len;
    prev = edge;
  };
  for (double a : interior_) add(a);
  add(1.0);
  return sum / 12.0;
}

double ThresholdSet::conditional_entropy() const {
  double bits = 0.0;
  double prev = 0.0;
  auto add = [&](double edge) {
    const double len = edge - prev;
    if (len > 0.0) bits -= len * std::log2(len);
    prev = edge;
  };
  for (double a : interior_) add(a);
  add(1.0);
  return bits + 0.0;  // normalize -0.0 from the single-cell case
}

}  // namespace randquant
