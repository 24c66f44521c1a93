#include "cpn/design_space.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cpn/error.hpp"

namespace cpn {

DesignSpace::DesignSpace(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.empty()) throw ContractError("DesignSpace: dimension must be positive");
  if (lower_.size() != upper_.size()) throw ContractError("DesignSpace: bound vectors differ in length");
  for (std::size_t j = 0; j < lower_.size(); ++j) {
    if (!std::isfinite(lower_[j]) || !std::isfinite(upper_[j]) || !(lower_[j] < upper_[j])) {
      throw ContractError("DesignSpace: need finite lower < upper in dimension " + std::to_string(j));
    }
  }
}

bool DesignSpace::contains(std::span<const double> x) const {
  if (x.size() != dim()) return false;
  for (std::size_t j = 0; j < dim(); ++j) {
    if (!(x[j] >= lower_[j] && x[j] <= upper_[j])) return false;
  }
  return true;
}

std::vector<double> DesignSpace::midpoint() const {
  std::vector<double> mid(dim());
  for (std::size_t j = 0; j < dim(); ++j) mid[j] = 0.5 * (lower_[j] + upper_[j]);
  return mid;
}

std::vector<double> DesignSpace::to_unit(std::span<const double> x) const {
  std::vector<double> u(dim());
  for (std::size_t j = 0; j < dim(); ++j) u[j] = (x[j] - lower_[j]) / (upper_[j] - lower_[j]);
  return u;
}

std::vector<double> DesignSpace::from_unit(std::span<const double> u) const {
  std::vector<double> x(dim());
  for (std::size_t j = 0; j < dim(); ++j) x[j] = lower_[j] + u[j] * (upper_[j] - lower_[j]);
  return x;
}

DesignPoint::DesignPoint(const DesignSpace& space, std::vector<double> coords) : coords_(std::move(coords)) {
  if (coords_.size() != space.dim()) {
    throw ContractError("DesignPoint: expected " + std::to_string(space.dim()) + " coordinates, got " +
                        std::to_string(coords_.size()));
  }
  for (std::size_t j = 0; j < coords_.size(); ++j) {
    if (std::isnan(coords_[j])) throw ContractError("DesignPoint: NaN coordinate");
    coords_[j] = std::clamp(coords_[j], space.lower()[j], space.upper()[j]);
  }
}

void ObservationSet::append(DesignPoint point, double value) {
  points_.push_back(std::move(point));
  values_.push_back(value);
  if (values_.size() == 1 || value > values_[incumbent_]) incumbent_ = values_.size() - 1;
}

double ObservationSet::incumbent_value() const {
  if (empty()) throw ContractError("ObservationSet: no incumbent in an empty set");
  return values_[incumbent_];
}

std::size_t ObservationSet::incumbent_index() const {
  if (empty()) throw ContractError("ObservationSet: no incumbent in an empty set");
  return incumbent_;
}

}  // namespace cpn
