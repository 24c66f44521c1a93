#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cpn/posterior.hpp"
#include "cpn/sampling.hpp"
#include "cpn/surrogate.hpp"

namespace cpn {

enum class KernelKind { rbf, matern52, linear };

std::string to_string(KernelKind kind);

/// Constant added by the linear kernel.
inline constexpr double kLinearKernelBias = 1e-6;
inline constexpr double kMinNoiseVariance = 1e-8;

struct GpHyperparams {
  double log_lengthscale = 0.0;
  double log_signal_variance = 0.0;
  double log_noise_variance = -10.0;
  KernelKind kernel = KernelKind::matern52;

  double lengthscale() const;
  double signal_variance() const;
  double noise_variance() const;
};

/// Isotropic kernel value. Inputs are normalized coordinates.
double kernel_eval(const GpHyperparams& hp, std::span<const double> a, std::span<const double> b);

struct GpFitOptions {
  int restarts = 5;
  int evaluations_per_restart = 60;
  std::uint64_t seed = 0;
};

/// Log marginal likelihood of the standardized context outputs. -inf when the
/// covariance cannot be factorized.
double gp_log_marginal_likelihood(const Dataset& context, const GpHyperparams& hp);

/// Multi-start coordinate search over (log lengthscale, log signal std, log noise std).
/// Throws FitError when no start yields a factorizable covariance.
GpHyperparams gp_fit(const Dataset& context, KernelKind kernel, const GpFitOptions& options = {});

/// GP conditioned on a context with fixed hyperparameters.
class GpModel {
 public:
  /// Throws FitError if the Cholesky factorization fails after jitter escalation.
  GpModel(const Dataset& context, const GpHyperparams& hp);

  /// Latent-function posterior in raw output units.
  std::vector<GaussianPosterior> predict(std::span<const Query> queries) const;

  const GpHyperparams& hyperparams() const { return hp_; }
  double jitter() const { return jitter_; }
  const NormalizationState& normalization() const { return norm_; }

 private:
  Eigen::RowVectorXd prepare(std::span<const double> q) const;

  GpHyperparams hp_;
  NormalizationState norm_;
  Eigen::MatrixXd x_;
  Eigen::RowVectorXd center_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
};

std::vector<GaussianPosterior> gp_predict(const Dataset& context, const GpHyperparams& hp,
                                          std::span<const Query> queries);

/// gp_predict followed by per-query discretization (span 8 sigma, point mass for sigma = 0).
std::vector<DiscretePosterior> gp_backend_predict(const Dataset& context, const GpHyperparams& hp,
                                                  std::span<const Query> queries, std::size_t bins);

/// Refits hyperparameters on every set_context. A failed fit degrades to the
/// prior-mean posterior (context mean, context std).
class GpBackend : public SurrogateBackend {
 public:
  GpBackend(KernelKind kernel, std::size_t bins = kDefaultBins, std::uint64_t seed = 0);

  std::string name() const override;
  void set_context(const Dataset& context) override;
  std::vector<DiscretePosterior> predict_batch(std::span<const Query> queries) const override;

  std::vector<GaussianPosterior> predict_gaussian(std::span<const Query> queries) const;
  bool fit_failed() const { return !model_.has_value(); }

 private:
  KernelKind kernel_;
  std::size_t bins_;
  std::uint64_t seed_;
  std::optional<GpModel> model_;
  GaussianPosterior prior_;
};

}  // namespace cpn
