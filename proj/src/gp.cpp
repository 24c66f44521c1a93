#include "cpn/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cpn/error.hpp"
#include "cpn/sampling.hpp"

namespace cpn {

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::rbf: return "rbf";
    case KernelKind::matern52: return "matern52";
    case KernelKind::linear: return "linear";
  }
  return "unknown";
}

double GpHyperparams::lengthscale() const { return std::clamp(std::exp(log_lengthscale), 1e-3, 1e3); }
double GpHyperparams::signal_variance() const { return std::exp(log_signal_variance); }
double GpHyperparams::noise_variance() const { return std::max(std::exp(log_noise_variance), kMinNoiseVariance); }

namespace {

// Stationary kernels as a function of squared distance.
double stationary(KernelKind kind, double signal_var, double ell, double r2) {
  if (kind == KernelKind::rbf) return signal_var * std::exp(-0.5 * r2 / (ell * ell));
  const double r = std::sqrt(r2) / ell;
  const double s5r = std::sqrt(5.0) * r;
  return signal_var * (1.0 + s5r + 5.0 * r * r / 3.0) * std::exp(-s5r);
}

struct Prepared {
  Eigen::MatrixXd x;         // possibly centered inputs
  Eigen::RowVectorXd center;
  Eigen::MatrixXd gram;      // squared distances, or inner products for the linear kernel
  Eigen::VectorXd z;         // standardized outputs
  NormalizationState norm;
};

Prepared prepare_context(const Dataset& context, KernelKind kind) {
  const auto n = static_cast<Eigen::Index>(context.size());
  if (n == 0) throw FitError("GP: empty context");
  if (context.x.size() != context.y.size()) throw ContractError("GP: context x and y differ in length");
  const auto d = static_cast<Eigen::Index>(context.x.front().size());
  Prepared p;
  p.x.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = context.x[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != d) throw ContractError("GP: ragged context inputs");
    for (Eigen::Index j = 0; j < d; ++j) p.x(i, j) = row[static_cast<std::size_t>(j)];
  }
  // Linear kernel works on context-centred inputs so standardized outputs need no intercept.
  p.center = Eigen::RowVectorXd::Zero(d);
  if (kind == KernelKind::linear) {
    p.center = p.x.colwise().mean();
    p.x.rowwise() -= p.center;
    p.gram = p.x * p.x.transpose();
  } else {
    const Eigen::VectorXd sq = p.x.rowwise().squaredNorm();
    p.gram = (sq.replicate(1, n) + sq.transpose().replicate(n, 1) - 2.0 * p.x * p.x.transpose()).cwiseMax(0.0);
    p.gram.diagonal().setZero();
  }
  p.norm = NormalizationState::fit(context.y);
  p.z.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) p.z(i) = p.norm.standardize(context.y[static_cast<std::size_t>(i)]);
  return p;
}

Eigen::MatrixXd covariance(const Eigen::MatrixXd& gram, const GpHyperparams& hp) {
  const double sv = hp.signal_variance();
  if (hp.kernel == KernelKind::linear) {
    return (sv * gram.array() + kLinearKernelBias).matrix();
  }
  const double ell = hp.lengthscale();
  return gram.unaryExpr([&](double r2) { return stationary(hp.kernel, sv, ell, r2); });
}

constexpr double kFirstJitter = 1e-8;
constexpr double kLastJitter = 1e-2;

bool factorize(Eigen::MatrixXd k, double noise, Eigen::LLT<Eigen::MatrixXd>& chol, double& jitter_used) {
  const auto n = k.rows();
  k.diagonal().array() += noise;
  chol.compute(k);
  if (chol.info() == Eigen::Success && (chol.matrixLLT().diagonal().array() > 0.0).all()) {
    jitter_used = 0.0;
    return true;
  }
  for (double jitter = kFirstJitter; jitter <= kLastJitter * 1.0000001; jitter *= 10.0) {
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += jitter;
    chol.compute(kj);
    if (chol.info() == Eigen::Success && (chol.matrixLLT().diagonal().array() > 0.0).all()) {
      jitter_used = jitter;
      return true;
    }
  }
  (void)n;
  return false;
}

double log_likelihood(const Prepared& p, const GpHyperparams& hp) {
  Eigen::LLT<Eigen::MatrixXd> chol;
  double jitter = 0.0;
  if (!factorize(covariance(p.gram, hp), hp.noise_variance(), chol, jitter)) {
    return -std::numeric_limits<double>::infinity();
  }
  const Eigen::VectorXd alpha = chol.solve(p.z);
  const double log_det_half = chol.matrixLLT().diagonal().array().log().sum();
  const double n = static_cast<double>(p.z.size());
  const double value = -0.5 * p.z.dot(alpha) - log_det_half - 0.5 * n * std::log(2.0 * std::numbers::pi);
  return std::isfinite(value) ? value : -std::numeric_limits<double>::infinity();
}

// Search box in (log lengthscale, log signal std, log noise std).
constexpr double kLn10 = std::numbers::ln10;
const double kBoxLo[3] = {-3.0 * kLn10, -2.0 * kLn10, -8.0 * kLn10};
const double kBoxHi[3] = {3.0 * kLn10, 2.0 * kLn10, 0.0};

GpHyperparams from_theta(const double theta[3], KernelKind kind) {
  GpHyperparams hp;
  hp.kernel = kind;
  hp.log_lengthscale = theta[0];
  hp.log_signal_variance = 2.0 * theta[1];
  hp.log_noise_variance = std::max(2.0 * theta[2], std::log(kMinNoiseVariance));
  return hp;
}

}  // namespace

double kernel_eval(const GpHyperparams& hp, std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractError("kernel_eval: dimension mismatch");
  if (hp.kernel == KernelKind::linear) {
    double dot = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) dot += a[j] * b[j];
    return hp.signal_variance() * dot + kLinearKernelBias;
  }
  double r2 = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) r2 += (a[j] - b[j]) * (a[j] - b[j]);
  return stationary(hp.kernel, hp.signal_variance(), hp.lengthscale(), r2);
}

double gp_log_marginal_likelihood(const Dataset& context, const GpHyperparams& hp) {
  return log_likelihood(prepare_context(context, hp.kernel), hp);
}

GpHyperparams gp_fit(const Dataset& context, KernelKind kernel, const GpFitOptions& options) {
  if (context.size() < 2) throw FitError("gp_fit: context needs at least 2 observations");
  const Prepared p = prepare_context(context, kernel);

  const DesignSpace box({kBoxLo[0], kBoxLo[1], kBoxLo[2]}, {kBoxHi[0], kBoxHi[1], kBoxHi[2]});
  Rng rng(options.seed);
  const auto starts = latin_hypercube(box, static_cast<std::size_t>(std::max(options.restarts, 1)), rng);

  double best_value = -std::numeric_limits<double>::infinity();
  GpHyperparams best;
  for (const auto& start : starts) {
    double theta[3] = {start[0], start[1], start[2]};
    double step[3];
    for (int j = 0; j < 3; ++j) step[j] = 0.25 * (kBoxHi[j] - kBoxLo[j]);
    double current = log_likelihood(p, from_theta(theta, kernel));
    int evals = 1;
    while (evals < options.evaluations_per_restart) {
      for (int j = 0; j < 3 && evals < options.evaluations_per_restart; ++j) {
        bool moved = false;
        for (double sign : {1.0, -1.0}) {
          if (evals >= options.evaluations_per_restart) break;
          double trial[3] = {theta[0], theta[1], theta[2]};
          trial[j] = std::clamp(theta[j] + sign * step[j], kBoxLo[j], kBoxHi[j]);
          if (trial[j] == theta[j]) continue;
          const double value = log_likelihood(p, from_theta(trial, kernel));
          ++evals;
          if (value > current) {
            current = value;
            theta[j] = trial[j];
            moved = true;
            break;
          }
        }
        if (!moved) step[j] *= 0.5;
      }
    }
    if (current > best_value) {
      best_value = current;
      best = from_theta(theta, kernel);
    }
  }
  if (!std::isfinite(best_value)) throw FitError("gp_fit: covariance not factorizable at any start");
  return best;
}

GpModel::GpModel(const Dataset& context, const GpHyperparams& hp) : hp_(hp) {
  Prepared p = prepare_context(context, hp.kernel);
  if (!factorize(covariance(p.gram, hp), hp.noise_variance(), chol_, jitter_)) {
    throw FitError("GP: Cholesky failed after jitter escalation to 1e-2");
  }
  norm_ = p.norm;
  x_ = std::move(p.x);
  center_ = std::move(p.center);
  alpha_ = chol_.solve(p.z);
}

Eigen::RowVectorXd GpModel::prepare(std::span<const double> q) const {
  if (static_cast<Eigen::Index>(q.size()) != x_.cols()) throw ContractError("GP: query dimension mismatch");
  Eigen::RowVectorXd row(x_.cols());
  for (Eigen::Index j = 0; j < x_.cols(); ++j) row(j) = q[static_cast<std::size_t>(j)];
  return row - center_;
}

std::vector<GaussianPosterior> GpModel::predict(std::span<const Query> queries) const {
  const auto m = static_cast<Eigen::Index>(queries.size());
  const auto n = x_.rows();
  std::vector<GaussianPosterior> out;
  out.reserve(queries.size());
  if (m == 0) return out;
  Eigen::MatrixXd q(m, x_.cols());
  for (Eigen::Index i = 0; i < m; ++i) q.row(i) = prepare(queries[static_cast<std::size_t>(i)]);

  const double sv = hp_.signal_variance();
  Eigen::MatrixXd k_qx(m, n);
  Eigen::VectorXd prior_var(m);
  if (hp_.kernel == KernelKind::linear) {
    k_qx = (sv * (q * x_.transpose()).array() + kLinearKernelBias).matrix();
    prior_var = (sv * q.rowwise().squaredNorm().array() + kLinearKernelBias).matrix();
  } else {
    const double ell = hp_.lengthscale();
    const Eigen::VectorXd qsq = q.rowwise().squaredNorm();
    const Eigen::VectorXd xsq = x_.rowwise().squaredNorm();
    Eigen::MatrixXd r2 = (qsq.replicate(1, n) + xsq.transpose().replicate(m, 1) - 2.0 * q * x_.transpose()).cwiseMax(0.0);
    k_qx = r2.unaryExpr([&](double v) { return stationary(hp_.kernel, sv, ell, v); });
    prior_var.setConstant(sv);
  }
  const Eigen::VectorXd mean = k_qx * alpha_;
  const Eigen::MatrixXd v = chol_.matrixL().solve(k_qx.transpose());
  const Eigen::VectorXd reduction = v.colwise().squaredNorm().transpose();
  for (Eigen::Index i = 0; i < m; ++i) {
    const double var = std::max(prior_var(i) - reduction(i), 0.0);
    out.push_back({norm_.restore(mean(i)), norm_.y_std * std::sqrt(var)});
  }
  return out;
}

std::vector<GaussianPosterior> gp_predict(const Dataset& context, const GpHyperparams& hp,
                                          std::span<const Query> queries) {
  return GpModel(context, hp).predict(queries);
}

std::vector<DiscretePosterior> gp_backend_predict(const Dataset& context, const GpHyperparams& hp,
                                                  std::span<const Query> queries, std::size_t bins) {
  std::vector<DiscretePosterior> out;
  out.reserve(queries.size());
  for (const auto& g : gp_predict(context, hp, queries)) out.push_back(to_discrete(g, bins));
  return out;
}

GpBackend::GpBackend(KernelKind kernel, std::size_t bins, std::uint64_t seed)
    : kernel_(kernel), bins_(bins), seed_(seed) {}

std::string GpBackend::name() const { return "gp_" + to_string(kernel_); }

void GpBackend::set_context(const Dataset& context) {
  model_.reset();
  const auto norm = NormalizationState::fit(context.y);
  double var = 0.0;
  for (double y : context.y) var += (y - norm.y_mean) * (y - norm.y_mean);
  prior_ = {norm.y_mean, context.y.empty() ? 0.0 : std::sqrt(var / static_cast<double>(context.y.size()))};
  try {
    GpFitOptions options;
    options.seed = seed_;
    model_.emplace(context, gp_fit(context, kernel_, options));
  } catch (const FitError&) {
    model_.reset();
  }
}

std::vector<GaussianPosterior> GpBackend::predict_gaussian(std::span<const Query> queries) const {
  if (model_) return model_->predict(queries);
  return std::vector<GaussianPosterior>(queries.size(), prior_);
}

std::vector<DiscretePosterior> GpBackend::predict_batch(std::span<const Query> queries) const {
  std::vector<DiscretePosterior> out;
  out.reserve(queries.size());
  for (const auto& g : predict_gaussian(queries)) out.push_back(to_discrete(g, bins_));
  return out;
}

}  // namespace cpn
