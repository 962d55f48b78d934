// Copyright 2026 The VPT Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS-IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VPT_TRAIN_HPP_
#define VPT_TRAIN_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "vpt/data.hpp"
#include "vpt/estimator.hpp"
#include "vpt/optim.hpp"

namespace vpt {

struct TrainConfig {
  int levels = 3;
  PartitionMode partition = PartitionMode::kDyadic;
  PriorKind prior = PriorKind::kVpt;
  FlowConfig flow;
  int epochs = 1000;
  std::size_t batch_size = 128;
  double lr_flow = 1e-2;
  double lr_prior = 0.1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int patience = 100;
  std::uint64_t seed = 0;
  // Replace gradient steps on the tree with blended Beta-Binomial updates.
  bool conjugate = false;
  double conjugate_decay = 0.9;
  // Weight of sum_nodes KL(Beta(a_l, a_r) || Beta(1, 1)), spread over the
  // training set.
  double kl_weight = 0.0;
  bool smooth_base = false;
  bool freeze_flow = false;
  bool polyak = false;
  double polyak_decay = 0.999;
  // Halve the flow learning rate after lr_decay_patience epochs without
  // validation improvement; 0 disables.
  int lr_decay_patience = 0;
  double lr_decay_factor = 0.5;

  void validate() const {
    if (levels < 1) throw UsageError("levels must be >= 1");
    if (!(lr_flow > 0.0) || !(lr_prior > 0.0)) throw UsageError("learning rates must be > 0");
    if (epochs < 1) throw UsageError("epochs must be >= 1");
    if (batch_size < 1) throw UsageError("batch size must be >= 1");
    if (patience < 1) throw UsageError("patience must be >= 1");
    if (kl_weight < 0.0) throw UsageError("kl weight must be >= 0");
    if (!(conjugate_decay >= 0.0 && conjugate_decay < 1.0)) {
      throw UsageError("conjugate decay must lie in [0,1)");
    }
    if (flow.coupling_layers < 0) throw UsageError("flow layers must be >= 0");
    for (int h : flow.hidden) {
      if (h < 1) throw UsageError("hidden widths must be >= 1");
    }
  }
};

struct EpochRecord {
  int epoch = 0;
  double train_nll = 0.0;
  double val_nll = 0.0;
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_val_nll = std::numeric_limits<double>::infinity();
  double test_nll = std::numeric_limits<double>::quiet_NaN();
  double test_bpd = std::numeric_limits<double>::quiet_NaN();
  std::size_t prior_param_count = 0;
  std::size_t flow_param_count = 0;
  bool stopped_early = false;
};

class TrainingDiverged : public NumericError {
 public:
  TrainingDiverged(int epoch, std::size_t batch, double loss)
      : NumericError("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                     std::to_string(batch) + " (loss " + std::to_string(loss) + ")"),
        epoch_(epoch),
        batch_(batch) {}
  int epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }

 private:
  int epoch_;
  std::size_t batch_;
};

inline DensityEstimator build_estimator(const TrainConfig& config, std::size_t dims, Rng& rng) {
  FlowConfig flow = config.flow;
  flow.sigmoid = needs_unit_support(config.prior) && config.flow.sigmoid;
  FlowModel model = FlowModel::build(dims, flow, rng);
  const int d = static_cast<int>(dims);
  switch (config.prior) {
    case PriorKind::kVpt: return DensityEstimator(std::move(model), PolyaTree(config.levels, d, config.partition));
    case PriorKind::kHistogram:
      return DensityEstimator(std::move(model), LearnableHistogram::with_levels(config.levels, dims));
    case PriorKind::kGaussian:
      return DensityEstimator(std::move(model), FixedPrior(FixedKind::kGaussian, dims));
    case PriorKind::kLogistic:
      return DensityEstimator(std::move(model), FixedPrior(FixedKind::kLogistic, dims));
  }
  throw UsageError("unknown prior kind");
}

// ---- metrics ---------------------------------------------------------------

inline double avg_log_likelihood(const DensityEstimator& model, const Array& points) {
  if (points.rows() == 0) throw ContractViolation("avg_log_likelihood: empty split");
  const std::vector<double> ll = model.log_likelihood(points);
  return std::accumulate(ll.begin(), ll.end(), 0.0) / static_cast<double>(ll.size());
}

inline double bits_per_dim(const DensityEstimator& model, const Array& points) {
  return -avg_log_likelihood(model, points) / (static_cast<double>(points.cols()) * std::numbers::ln2);
}

struct Moments {
  std::vector<double> mean;
  std::vector<double> stddev;
};

// Per-dimension sample mean and (n-1)-normalized standard deviation.
inline Moments sample_moments(const Array& samples) {
  const std::size_t n = samples.rows(), dims = samples.cols();
  if (n < 2) throw ContractViolation("sample_moments: need at least two samples");
  Moments m{std::vector<double>(dims, 0.0), std::vector<double>(dims, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < dims; ++d) m.mean[d] += samples.at(i, d);
  }
  for (double& v : m.mean) v /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < dims; ++d) {
      const double r = samples.at(i, d) - m.mean[d];
      m.stddev[d] += r * r;
    }
  }
  for (double& v : m.stddev) v = std::sqrt(v / static_cast<double>(n - 1));
  return m;
}

// Mean squared z-score: 1 when the predictive spread is calibrated.
inline double sse_from_moments(const Array& points, const Moments& m) {
  const std::size_t n = points.rows(), dims = points.cols();
  if (m.mean.size() != dims || m.stddev.size() != dims) {
    throw ContractViolation("sse: moment dimension mismatch");
  }
  for (double s : m.stddev) {
    if (!(s > 0.0) || !std::isfinite(s)) throw NumericError("sse: zero or non-finite predictive sd");
  }
  if (n == 0) throw ContractViolation("sse: empty split");
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < dims; ++d) {
      const double z = (points.at(i, d) - m.mean[d]) / m.stddev[d];
      acc += z * z;
    }
  }
  return acc / static_cast<double>(n * dims);
}

inline constexpr std::size_t kCalibrationSamples = 10000;

// Predictive moments come from model samples since the flow has no closed
// form for them.
inline double sse_calibration(const DensityEstimator& model, const Array& points, Rng& rng,
                              std::size_t samples = kCalibrationSamples) {
  return sse_from_moments(points, sample_moments(model.sample(rng, samples)));
}

struct GridBounds {
  double x_min = -4.0, x_max = 4.0, y_min = -4.0, y_max = 4.0;
};

struct GridPoint {
  double x = 0.0, y = 0.0, density = 0.0;
};

// Density at the cell centres of a resolution x resolution lattice, rows
// ordered by y then x.
inline std::vector<GridPoint> density_grid(const DensityEstimator& model, const GridBounds& b,
                                           std::size_t resolution) {
  if (model.dims() != 2) throw UsageError("density_grid: model must be two-dimensional");
  if (resolution < 1) throw UsageError("density_grid: resolution must be >= 1");
  if (!(b.x_max > b.x_min) || !(b.y_max > b.y_min)) throw UsageError("density_grid: empty bounds");
  const double hx = (b.x_max - b.x_min) / static_cast<double>(resolution);
  const double hy = (b.y_max - b.y_min) / static_cast<double>(resolution);
  Array pts = Array::matrix(resolution * resolution, 2);
  for (std::size_t j = 0; j < resolution; ++j) {
    for (std::size_t i = 0; i < resolution; ++i) {
      pts.at(j * resolution + i, 0) = b.x_min + (static_cast<double>(i) + 0.5) * hx;
      pts.at(j * resolution + i, 1) = b.y_min + (static_cast<double>(j) + 0.5) * hy;
    }
  }
  const std::vector<double> ll = model.log_likelihood(pts);
  std::vector<GridPoint> out(ll.size());
  for (std::size_t k = 0; k < ll.size(); ++k) out[k] = GridPoint{pts.at(k, 0), pts.at(k, 1), std::exp(ll[k])};
  return out;
}

// ---- training --------------------------------------------------------------

namespace detail {

inline double split_nll(const DensityEstimator& model, const Array& points) {
  return -avg_log_likelihood(model, points);
}

// Swaps parameter values with a stored copy (Polyak evaluation).
inline void swap_values(const std::vector<Array*>& params, std::vector<Array>& stored) {
  for (std::size_t k = 0; k < params.size(); ++k) std::swap(params[k]->data(), stored[k].data());
}

}  // namespace detail

using EpochCallback = std::function<void(const EpochRecord&)>;

struct TrainResult {
  DensityEstimator model;
  TrainReport report;
};

// Minibatch maximum likelihood with Adam on flow and prior parameters,
// optional conjugate tree updates, and early stopping on validation NLL. The
// returned model holds the parameters of the best validation epoch.
inline TrainResult train(const TrainConfig& config, const Dataset& data, Rng& rng,
                         const EpochCallback& on_epoch = nullptr) {
  config.validate();
  if (data.train.empty()) throw UsageError("train: training split is empty");
  const std::size_t dims = data.dims();

  TrainResult result{build_estimator(config, dims, rng), TrainReport{}};
  DensityEstimator& model = result.model;
  TrainReport& report = result.report;
  report.prior_param_count = model.prior_parameter_count();
  report.flow_param_count = model.flow().parameter_count();

  const std::vector<Array*> flow_params = model.flow_parameters();
  const std::vector<Array*> prior_params =
      config.conjugate && model.tree() ? std::vector<Array*>{} : model.prior_parameters();
  Adam flow_opt(flow_params, AdamConfig{config.lr_flow, config.adam_beta1, config.adam_beta2,
                                        config.adam_epsilon});
  Adam prior_opt(prior_params, AdamConfig{config.lr_prior, config.adam_beta1, config.adam_beta2,
                                          config.adam_epsilon});
  std::vector<Array> averaged;
  if (config.polyak) {
    for (Array* p : flow_params) averaged.push_back(*p);
  }

  const Array val_points = data.rows(data.validation.empty() ? data.train : data.validation);
  std::vector<std::size_t> order = data.train;
  const double n_train = static_cast<double>(order.size());
  DensityEstimator best = model;
  int since_best = 0, since_decay = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_no) {
      const std::size_t n = std::min(config.batch_size, order.size() - start);
      const Array batch = data.rows(std::vector<std::size_t>(
          order.begin() + static_cast<std::ptrdiff_t>(start),
          order.begin() + static_cast<std::ptrdiff_t>(start + n)));
      ad::Tape tape;
      ad::Var ll = model.log_likelihood(tape, batch, config.smooth_base);
      ad::Var loss = -ad::mean(ll);
      const double nll = loss.item();
      if (config.kl_weight > 0.0 && model.tree()) {
        loss = loss + model.tree()->kl_to_uniform(tape) * (config.kl_weight / n_train);
      }
      if (!std::isfinite(loss.item())) throw TrainingDiverged(epoch, batch_no, loss.item());
      tape.backward(loss);
      if (!config.freeze_flow) flow_opt.step(tape);
      prior_opt.step(tape);
      if (config.polyak) {
        for (std::size_t k = 0; k < flow_params.size(); ++k) {
          for (std::size_t i = 0; i < averaged[k].size(); ++i) {
            averaged[k][i] = config.polyak_decay * averaged[k][i] +
                             (1.0 - config.polyak_decay) * (*flow_params[k])[i];
          }
        }
      }
      if (config.conjugate && model.tree()) {
        PolyaTree& tree = *model.tree();
        Array z = model.flow().forward(batch);
        if (model.flow().has_sigmoid()) {
          for (double& v : z.data()) v = std::clamp(v, kLatentClamp, 1.0 - kLatentClamp);
        }
        const Array fresh =
            tree.conjugate_update(z, BetaDist(1.0, 1.0), n_train / static_cast<double>(n)).alphas();
        Array blended = tree.alphas();
        for (std::size_t k = 0; k < blended.size(); ++k) {
          blended[k] = config.conjugate_decay * blended[k] + (1.0 - config.conjugate_decay) * fresh[k];
        }
        tree.set_alphas(blended);
      }
      loss_sum += nll * static_cast<double>(n);
    }

    if (config.polyak) detail::swap_values(flow_params, averaged);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_nll = loss_sum / n_train;
    rec.val_nll = detail::split_nll(model, val_points);
    if (!std::isfinite(rec.val_nll)) throw TrainingDiverged(epoch, batch_no, rec.val_nll);
    if (rec.val_nll < report.best_val_nll) {
      report.best_val_nll = rec.val_nll;
      report.best_epoch = epoch;
      best = model;
      since_best = 0;
      since_decay = 0;
    } else {
      ++since_best;
      ++since_decay;
    }
    if (config.polyak) detail::swap_values(flow_params, averaged);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    report.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (config.lr_decay_patience > 0 && since_decay >= config.lr_decay_patience) {
      flow_opt.set_learning_rate(flow_opt.learning_rate() * config.lr_decay_factor);
      since_decay = 0;
    }
    if (since_best >= config.patience) {
      report.stopped_early = epoch < config.epochs;
      break;
    }
  }

  model = std::move(best);
  if (!data.test.empty()) {
    const Array test = data.rows(data.test);
    report.test_nll = -avg_log_likelihood(model, test);
    report.test_bpd = report.test_nll / (static_cast<double>(dims) * std::numbers::ln2);
  }
  return result;
}

}  // namespace vpt

#endif  // VPT_TRAIN_HPP_
