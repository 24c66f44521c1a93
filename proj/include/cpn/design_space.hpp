#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cpn {

/// Box-bounded continuous design space in the owning testbench's natural units.
class DesignSpace {
 public:
  DesignSpace(std::vector<double> lower, std::vector<double> upper);

  std::size_t dim() const { return lower_.size(); }
  std::span<const double> lower() const { return lower_; }
  std::span<const double> upper() const { return upper_; }

  bool contains(std::span<const double> x) const;
  std::vector<double> midpoint() const;

  /// Affine map onto [0,1]^D.
  std::vector<double> to_unit(std::span<const double> x) const;
  std::vector<double> from_unit(std::span<const double> u) const;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

/// A point of a DesignSpace. Out-of-bound coordinates are clamped at construction.
class DesignPoint {
 public:
  DesignPoint(const DesignSpace& space, std::vector<double> coords);

  std::span<const double> coords() const { return coords_; }
  std::size_t size() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }

  friend bool operator==(const DesignPoint&, const DesignPoint&) = default;

 private:
  std::vector<double> coords_;
};

// Append-only history of evaluated points and their scalar objective values.
class ObservationSet {
 public:
  void append(DesignPoint point, double value);

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  const std::vector<DesignPoint>& points() const { return points_; }
  const std::vector<double>& values() const { return values_; }

  /// Throws ContractError when empty.
  double incumbent_value() const;
  std::size_t incumbent_index() const;

 private:
  std::vector<DesignPoint> points_;
  std::vector<double> values_;
  std::size_t incumbent_ = 0;
};

}  // namespace cpn
