#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "cpn/design_space.hpp"
#include "cpn/rng.hpp"

namespace cpn {

std::vector<DesignPoint> uniform_sample(const DesignSpace& space, std::size_t n, Rng& rng);

/// One sample per equal-width stratum in every dimension, jittered inside the
/// stratum, with an independent stratum permutation per dimension.
std::vector<DesignPoint> latin_hypercube(const DesignSpace& space, std::size_t n, Rng& rng);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Rows of inputs with one scalar output each.
struct Dataset {
  std::vector<std::vector<double>> x;
  std::vector<double> y;

  std::size_t size() const { return y.size(); }
  Dataset subset(std::span<const std::size_t> rows) const;
};

/// Random partition of [0, n) with round(train_fraction * n) training indices.
/// Index order inside each side follows the shuffled order.
/// Throws ContractError when either side would be empty.
SplitIndices train_test_split(std::size_t n, double train_fraction, Rng& rng);

std::pair<Dataset, Dataset> train_test_split(const Dataset& data, double train_fraction, Rng& rng);

}  // namespace cpn
