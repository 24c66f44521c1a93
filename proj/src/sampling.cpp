#include "cpn/sampling.hpp"

#include <cmath>
#include <numeric>

#include "cpn/error.hpp"

namespace cpn {

std::vector<DesignPoint> uniform_sample(const DesignSpace& space, std::size_t n, Rng& rng) {
  if (n == 0) throw ContractError("uniform_sample: n must be at least 1");
  std::vector<DesignPoint> out;
  out.reserve(n);
  std::vector<double> x(space.dim());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < space.dim(); ++j) x[j] = rng.uniform(space.lower()[j], space.upper()[j]);
    out.emplace_back(space, x);
  }
  return out;
}

std::vector<DesignPoint> latin_hypercube(const DesignSpace& space, std::size_t n, Rng& rng) {
  if (n == 0) throw ContractError("latin_hypercube: n must be at least 1");
  const std::size_t d = space.dim();
  std::vector<std::vector<double>> unit(n, std::vector<double>(d));
  std::vector<std::size_t> strata(n);
  for (std::size_t j = 0; j < d; ++j) {
    std::iota(strata.begin(), strata.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(strata));
    for (std::size_t i = 0; i < n; ++i) {
      unit[i][j] = (static_cast<double>(strata[i]) + rng.uniform01()) / static_cast<double>(n);
    }
  }
  std::vector<DesignPoint> out;
  out.reserve(n);
  for (const auto& u : unit) out.emplace_back(space, space.from_unit(u));
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.x.reserve(rows.size());
  out.y.reserve(rows.size());
  for (auto r : rows) {
    out.x.push_back(x.at(r));
    out.y.push_back(y.at(r));
  }
  return out;
}

SplitIndices train_test_split(std::size_t n, double train_fraction, Rng& rng) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ContractError("train_test_split: train_fraction must lie in (0, 1)");
  }
  if (n < 2) throw ContractError("train_test_split: need at least 2 observations");
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train == n) throw ContractError("train_test_split: one side of the split would be empty");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  SplitIndices split;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return split;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& data, double train_fraction, Rng& rng) {
  if (data.x.size() != data.y.size()) throw ContractError("train_test_split: x and y differ in length");
  const auto split = train_test_split(data.size(), train_fraction, rng);
  return {data.subset(split.train), data.subset(split.test)};
}

}  // namespace cpn
