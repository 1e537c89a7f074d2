// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#include "emostress/tuner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "emostress/io/atomic_file.hpp"

namespace emostress {

namespace {

using json = nlohmann::ordered_json;

double clamp01(double u) { return std::clamp(u, 0.0, 1.0); }

/// Gaussian-process surrogate with a Matern 5/2 kernel over the unit cube.
/// Targets are standardized; the length scale is picked from a small grid
/// by marginal likelihood.
class GaussianProcess {
 public:
  GaussianProcess(const std::vector<std::vector<double>>& x, const std::vector<double>& y) : x_(x) {
    const auto n = static_cast<Eigen::Index>(y.size());
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double var = 0.0;
    for (double v : y) var += (v - mean) * (v - mean);
    mean_ = mean;
    scale_ = y.size() > 1 ? std::sqrt(var / static_cast<double>(y.size() - 1)) : 1.0;
    if (!(scale_ > 1e-12)) scale_ = 1.0;
    Eigen::VectorXd t(n);
    for (Eigen::Index i = 0; i < n; ++i) t(i) = (y[static_cast<std::size_t>(i)] - mean_) / scale_;

    double best_lml = -std::numeric_limits<double>::infinity();
    for (double ell : {0.05, 0.1, 0.2, 0.35, 0.6, 1.0}) {
      Eigen::MatrixXd k = gram(ell);
      Eigen::LLT<Eigen::MatrixXd> llt(k);
      if (llt.info() != Eigen::Success) continue;
      Eigen::VectorXd alpha = llt.solve(t);
      const Eigen::MatrixXd l = llt.matrixL();
      const double lml = -0.5 * t.dot(alpha) - l.diagonal().array().log().sum();
      if (lml > best_lml) {
        best_lml = lml;
        ell_ = ell;
        alpha_ = alpha;
        llt_ = llt;
      }
    }
    if (!std::isfinite(best_lml)) throw TuningError("surrogate model is ill-conditioned");
  }

  /// Posterior mean and standard deviation in the original target units.
  std::pair<double, double> predict(const std::vector<double>& u) const {
    const auto n = static_cast<Eigen::Index>(x_.size());
    Eigen::VectorXd k(n);
    for (Eigen::Index i = 0; i < n; ++i) k(i) = kernel(u, x_[static_cast<std::size_t>(i)], ell_);
    const double mu = k.dot(alpha_);
    const Eigen::VectorXd v = llt_.matrixL().solve(k);
    const double var = std::max(1.0 - v.squaredNorm(), 1e-12);
    return {mean_ + scale_ * mu, scale_ * std::sqrt(var)};
  }

 private:
  static double kernel(const std::vector<double>& a, const std::vector<double>& b, double ell) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
    const double r = std::sqrt(5.0 * d2) / ell;
    return (1.0 + r + r * r / 3.0) * std::exp(-r);
  }

  Eigen::MatrixXd gram(double ell) const {
    const auto n = static_cast<Eigen::Index>(x_.size());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j <= i; ++j)
        k(i, j) = k(j, i) = kernel(x_[static_cast<std::size_t>(i)], x_[static_cast<std::size_t>(j)], ell);
    k.diagonal().array() += kNoise;
    return k;
  }

  static constexpr double kNoise = 1e-4;
  std::vector<std::vector<double>> x_;
  double mean_ = 0.0, scale_ = 1.0, ell_ = 0.2;
  Eigen::VectorXd alpha_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

double expected_improvement(double mu, double sigma, double best) {
  constexpr double xi = 0.01;
  if (sigma <= 0.0) return std::max(mu - best - xi, 0.0);
  const double z = (mu - best - xi) / sigma;
  const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
  return (mu - best - xi) * cdf + sigma * pdf;
}

Trial run_trial(std::size_t index, const ModelConfig& config, const Objective& objective) {
  Trial t;
  t.index = index;
  t.config = config;
  const auto start = std::chrono::steady_clock::now();
  try {
    t.criterion = objective(config);
    if (!std::isfinite(t.criterion)) throw TuningError("objective returned a non-finite value");
  } catch (const std::exception& e) {
    t.status = TrialStatus::Failed;
    t.error = e.what();
    t.criterion = 0.0;
    spdlog::warn("trial {} failed: {}", index, e.what());
  }
  t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return t;
}

}  // namespace

ModelConfig SearchSpace::decode(std::span<const double> unit, const ModelConfig& base) const {
  if (unit.size() != dimensions()) throw std::invalid_argument("search point has the wrong dimension");
  ModelConfig c = base;
  c.architecture = architecture;
  const double lo = std::log(kMinLearningRate), hi = std::log(kMaxLearningRate);
  c.learning_rate = std::clamp(std::exp(lo + clamp01(unit[0]) * (hi - lo)), kMinLearningRate,
                               kMaxLearningRate);
  c.dropout = kMinDropout + clamp01(unit[1]) * (kMaxDropout - kMinDropout);
  if (has_lambda())
    c.lambda = kMinLambda + clamp01(unit[2]) * (kMaxLambda - kMinLambda);
  else
    c.lambda.reset();
  return c;
}

std::vector<double> SearchSpace::encode(const ModelConfig& config) const {
  const double lo = std::log(kMinLearningRate), hi = std::log(kMaxLearningRate);
  std::vector<double> u = {clamp01((std::log(config.learning_rate) - lo) / (hi - lo)),
                           clamp01((config.dropout - kMinDropout) / (kMaxDropout - kMinDropout))};
  if (has_lambda()) u.push_back(clamp01((config.lambda.value_or(0.0) - kMinLambda) / (kMaxLambda - kMinLambda)));
  return u;
}

std::vector<double> SearchSpace::sample_unit(Rng& rng) const {
  std::vector<double> u(dimensions());
  for (double& x : u) x = rng.uniform();
  return u;
}

bool SearchSpace::contains(const ModelConfig& c) const {
  const bool lr = c.learning_rate >= kMinLearningRate && c.learning_rate <= kMaxLearningRate;
  const bool dp = c.dropout >= kMinDropout && c.dropout <= kMaxDropout;
  const bool lam = has_lambda() ? (c.lambda && *c.lambda >= kMinLambda && *c.lambda <= kMaxLambda)
                                : !c.lambda.has_value();
  return lr && dp && lam;
}

std::string Trial::to_json() const {
  json j;
  j["trial"] = index;
  j["status"] = status == TrialStatus::Ok ? "ok" : "failed";
  j["criterion"] = criterion;
  j["config"] = json::parse(config.to_json());
  if (!error.empty()) j["error"] = error;
  j["seconds"] = seconds;
  return j.dump();
}

std::string_view to_string(TunerStrategy s) { return s == TunerStrategy::Bayesian ? "bayesian" : "random"; }

TunerStrategy tuner_strategy_from_string(std::string_view s) {
  if (s == "bayesian") return TunerStrategy::Bayesian;
  if (s == "random") return TunerStrategy::Random;
  throw std::invalid_argument("unknown tuner strategy '" + std::string(s) + "'");
}

TuneResult tune(const ModelConfig& base, const Objective& objective, const TunerOptions& options) {
  if (options.budget == 0) throw std::invalid_argument("tuning budget must be at least 1");
  const SearchSpace space{base.architecture};
  Rng rng(options.seed, RngStream::Tuner);
  std::optional<io::AppendLog> log;
  if (options.log_path) log.emplace(*options.log_path);

  TuneResult result;
  result.trials.reserve(options.budget);
  auto record = [&](Trial t) {
    if (log) log->append(t.to_json());
    spdlog::info("trial {}/{} lr {:.3g} dropout {:.3f}{} -> {}", t.index + 1, options.budget,
                 t.config.learning_rate, t.config.dropout,
                 t.config.lambda ? " lambda " + std::to_string(*t.config.lambda) : std::string{},
                 t.status == TrialStatus::Ok ? std::to_string(t.criterion) : "failed");
    result.trials.push_back(std::move(t));
  };

  if (options.strategy == TunerStrategy::Random && options.workers > 1) {
    // Proposals are drawn up front so results do not depend on scheduling.
    std::vector<ModelConfig> configs;
    for (std::size_t i = 0; i < options.budget; ++i) configs.push_back(space.decode(space.sample_unit(rng), base));
    std::vector<Trial> done(options.budget);
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(options.workers, options.budget); ++w)
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < configs.size();) done[i] = run_trial(i, configs[i], objective);
      });
    pool.clear();
    for (auto& t : done) record(std::move(t));
  } else {
    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < options.budget; ++i) {
      std::vector<double> u;
      if (options.strategy == TunerStrategy::Bayesian && xs.size() >= std::max<std::size_t>(options.initial_random, 2)) {
        try {
          const GaussianProcess gp(xs, ys);
          const double best = *std::max_element(ys.begin(), ys.end());
          double best_ei = -1.0;
          for (std::size_t c = 0; c < options.candidates; ++c) {
            auto cand = space.sample_unit(rng);
            const auto [mu, sigma] = gp.predict(cand);
            const double ei = expected_improvement(mu, sigma, best);
            if (ei > best_ei) {
              best_ei = ei;
              u = std::move(cand);
            }
          }
        } catch (const TuningError& e) {
          spdlog::warn("falling back to a random proposal: {}", e.what());
          u.clear();
        }
      }
      if (u.empty()) u = space.sample_unit(rng);
      Trial t = run_trial(i, space.decode(u, base), objective);
      if (t.status == TrialStatus::Ok) {
        xs.push_back(space.encode(t.config));
        ys.push_back(t.criterion);
      }
      record(std::move(t));
    }
  }

  const Trial* best = nullptr;
  for (const auto& t : result.trials)
    if (t.status == TrialStatus::Ok && (best == nullptr || t.criterion > best->criterion)) best = &t;
  if (best == nullptr) throw TuningError("all " + std::to_string(result.trials.size()) + " trials failed");
  result.best_trial = *best;
  result.best = best->config;
  return result;
}

Objective make_training_objective(const TransformerEncoder& encoder, const ArchitectureData& data,
                                  TrainOptions options, std::uint64_t seed,
                                  const AssembledModel* labeler) {
  options.phase = "tune";
  return [&encoder, &data, options, seed, labeler](const ModelConfig& config) {
    return train_architecture(config, encoder, data, options, seed, labeler).result.best_dev;
  };
}

}  // namespace emostress
