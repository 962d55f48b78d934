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

// Command-line front end: train, eval, sample, grid and variance
// subcommands. Exit codes: 0 success, 1 runtime failure, 2 usage error.

#ifndef VPT_CLI_HPP_
#define VPT_CLI_HPP_

#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vpt/checkpoint.hpp"
#include "vpt/data.hpp"
#include "vpt/train.hpp"

namespace vpt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

inline constexpr std::string_view kSyntheticPrefix = "synthetic:";

struct DataOptions {
  std::string source;
  std::size_t n = 20000;
  std::string delimiter = ",";
  bool header = false;
  std::vector<double> fractions = default_split_fractions();
};

inline void add_data_options(CLI::App* cmd, DataOptions& opt, bool required) {
  auto* data = cmd->add_option("--data", opt.source,
                               "Delimited text file, or synthetic:eight_gaussians|two_spirals|checkerboard");
  if (required) data->required();
  cmd->add_option("--n", opt.n, "Number of synthetic points")->check(CLI::PositiveNumber);
  cmd->add_option("--delimiter", opt.delimiter, "Column delimiter (',' or 'tab')");
  cmd->add_flag("--header", opt.header, "Skip the first row of a delimited file");
  cmd->add_option("--splits", opt.fractions, "Train/validation/test fractions")->expected(3)->delimiter(',');
}

inline char delimiter_char(const std::string& s) {
  if (s == "tab" || s == "\\t" || s == "\t") return '\t';
  if (s.size() != 1) throw UsageError("delimiter must be a single character or 'tab'");
  return s[0];
}

// Raw (unstandardized) points with splits assigned from `seed`.
inline Dataset load_raw(const DataOptions& opt, std::uint64_t seed) {
  Rng rng(seed);
  if (opt.source.rfind(kSyntheticPrefix, 0) == 0) {
    return synth(opt.source.substr(kSyntheticPrefix.size()), opt.n, rng, opt.fractions);
  }
  return make_dataset(read_delimited(opt.source, delimiter_char(opt.delimiter), opt.header),
                      opt.fractions, rng, false);
}

class OutputTarget {
 public:
  OutputTarget(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::runtime_error("cannot write '" + path + "'");
      stream_ = file_.get();
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

inline std::vector<int> parse_hidden(const std::string& s) {
  std::vector<int> out;
  std::stringstream in(s);
  std::string part;
  while (std::getline(in, part, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(part, &used);
      if (used != part.size() || v < 1) throw std::invalid_argument(part);
      out.push_back(v);
    } catch (const std::exception&) {
      throw UsageError("--hidden expects comma-separated positive widths, got '" + s + "'");
    }
  }
  return out;
}

struct TrainOptions {
  DataOptions data;
  std::string prior = "vpt";
  std::string mode = "dyadic";
  std::string activation = "tanh";
  std::string hidden = "50,50";
  std::string out;
  std::string report;
  bool quiet = false;
  TrainConfig config;
};

struct ModelOptions {
  std::string model;
  std::string out;
  DataOptions data;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string split = "all";
  std::vector<std::string> metrics{"nll"};
  std::size_t samples = kCalibrationSamples;
  std::size_t n = 1000;
  std::string branch_mode = "mean";
  std::size_t resolution = 100;
  std::vector<double> bounds{-4.0, 4.0, -4.0, 4.0};
};

inline int cmd_train(TrainOptions& o, std::ostream& out) {
  TrainConfig& c = o.config;
  c.prior = parse_prior_kind(o.prior);
  c.partition = parse_partition_mode(o.mode);
  c.flow.activation = parse_activation(o.activation);
  c.flow.hidden = parse_hidden(o.hidden);
  c.validate();

  Dataset raw = load_raw(o.data, c.seed);
  Dataset data = raw;
  if (o.data.source.rfind(kSyntheticPrefix, 0) != 0) {
    data.standardization = fit_standardization(raw.points, raw.train);
    data.points = data.standardization.apply(raw.points);
  }

  Rng rng(c.seed + 1);
  const std::string report_path = o.report.empty() ? o.out + ".report.jsonl" : o.report;
  std::ofstream report_file(report_path);
  if (!report_file) throw std::runtime_error("cannot write '" + report_path + "'");
  auto on_epoch = [&](const EpochRecord& e) {
    const std::string line = io::epoch_to_json(e).dump();
    report_file << line << '\n';
    if (!o.quiet) out << line << '\n';
  };
  TrainResult result = train(c, data, rng, on_epoch);
  report_file << Json{{"summary", io::summary_to_json(result.report)}}.dump() << '\n';

  Checkpoint ckpt;
  ckpt.config = c;
  ckpt.model = std::move(result.model);
  ckpt.standardization = data.standardization;
  ckpt.data_source = o.data.source;
  ckpt.data_rows = data.size();
  ckpt.summary = result.report;
  save_checkpoint(ckpt, o.out);

  Json summary = io::summary_to_json(result.report);
  summary["checkpoint"] = o.out;
  summary["report"] = report_path;
  summary["dims"] = data.dims();
  out << Json{{"summary", summary}}.dump() << '\n';
  return kExitOk;
}

inline Array model_space(const Checkpoint& ckpt, const Dataset& raw, Split split) {
  if (raw.dims() != ckpt.standardization.input_dims()) {
    throw ContractViolation("data has " + std::to_string(raw.dims()) + " columns but the model expects " +
                            std::to_string(ckpt.standardization.input_dims()));
  }
  return ckpt.standardization.apply(raw.split(split));
}

inline int cmd_eval(ModelOptions& o, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(o.model);
  const std::uint64_t data_seed = o.seed_given ? o.seed : ckpt.config.seed;
  const Dataset raw = load_raw(o.data, data_seed);
  const Split split = parse_split(o.split);
  const Array points = model_space(ckpt, raw, split);
  if (points.rows() == 0) throw ContractViolation("selected split is empty");
  const double d = static_cast<double>(points.cols());
  for (const std::string& metric : o.metrics) {
    Json rec{{"metric", metric}, {"split", o.split}, {"rows", points.rows()}};
    if (metric == "nll") {
      rec["value"] = -avg_log_likelihood(ckpt.model, points);
    } else if (metric == "bpd") {
      rec["value"] = -avg_log_likelihood(ckpt.model, points) / (d * std::numbers::ln2);
    } else if (metric == "sse") {
      Rng rng(o.seed);
      rec["value"] = sse_calibration(ckpt.model, points, rng, o.samples);
      rec["samples"] = o.samples;
    } else {
      throw UsageError("unknown metric '" + metric + "' (expected nll, bpd or sse)");
    }
    out << rec.dump() << '\n';
  }
  return kExitOk;
}

inline void write_real(std::ostream& out, double v) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
}

inline int cmd_sample(ModelOptions& o, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(o.model);
  Rng rng(o.seed);
  const BranchMode mode = o.branch_mode == "sampled" ? BranchMode::kSampled : BranchMode::kPosteriorMean;
  const Array samples = ckpt.standardization.invert(ckpt.model.sample(rng, o.n, mode));
  OutputTarget target(o.out, out);
  std::ostream& os = target.get();
  for (std::size_t d = 0; d < samples.cols(); ++d) os << (d ? "," : "") << 'x' << d;
  os << '\n';
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    for (std::size_t d = 0; d < samples.cols(); ++d) {
      if (d) os << ',';
      write_real(os, samples.at(i, d));
    }
    os << '\n';
  }
  return kExitOk;
}

inline int cmd_grid(ModelOptions& o, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(o.model);
  if (ckpt.model.dims() != 2) throw UsageError("grid requires a two-dimensional model");
  const GridBounds b{o.bounds[0], o.bounds[1], o.bounds[2], o.bounds[3]};
  const std::vector<GridPoint> grid = density_grid(ckpt.model, b, o.resolution);
  OutputTarget target(o.out, out);
  std::ostream& os = target.get();
  os << "x,y,density\n";
  for (const GridPoint& p : grid) {
    write_real(os, p.x);
    os << ',';
    write_real(os, p.y);
    os << ',';
    write_real(os, p.density);
    os << '\n';
  }
  return kExitOk;
}

inline int cmd_variance(ModelOptions& o, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(o.model);
  const PolyaTree* tree = ckpt.model.tree();
  if (tree == nullptr) throw ContractViolation("variance maps are only defined for vpt priors");
  const std::vector<double> var = tree->variance_map();
  OutputTarget target(o.out, out);
  std::ostream& os = target.get();
  os << "dim,variance\n";
  for (std::size_t d = 0; d < var.size(); ++d) {
    os << d << ',';
    write_real(os, var[d]);
    os << '\n';
  }
  return kExitOk;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Variational Polya tree density estimation"};
  app.require_subcommand(1);

  TrainOptions train_opt;
  auto* train_cmd = app.add_subcommand("train", "Fit a density estimator and write a checkpoint");
  add_data_options(train_cmd, train_opt.data, true);
  TrainConfig& c = train_opt.config;
  train_cmd->add_option("--levels", c.levels, "Tree depth L (histogram uses 2^L bins)")
      ->check(CLI::Range(1, 20));
  train_cmd->add_option("--prior", train_opt.prior, "Base distribution")
      ->check(CLI::IsMember({"vpt", "gaussian", "logistic", "histogram"}));
  train_cmd->add_option("--mode", train_opt.mode, "Partition geometry")
      ->check(CLI::IsMember({"dyadic", "per-level", "per-node"}));
  train_cmd->add_option("--epochs", c.epochs, "Maximum epochs")->check(CLI::PositiveNumber);
  train_cmd->add_option("--batch", c.batch_size, "Minibatch size")->check(CLI::PositiveNumber);
  train_cmd->add_option("--lr-flow", c.lr_flow, "Adam learning rate for the flow")->check(CLI::PositiveNumber);
  train_cmd->add_option("--lr-prior", c.lr_prior, "Adam learning rate for the prior")->check(CLI::PositiveNumber);
  train_cmd->add_option("--patience", c.patience, "Early-stopping patience in epochs")->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", c.seed, "Seed for data splits, initialization and shuffling");
  train_cmd->add_option("--out", train_opt.out, "Checkpoint path")->required();
  train_cmd->add_option("--report", train_opt.report, "Per-epoch report path (default <out>.report.jsonl)");
  train_cmd->add_flag("--conjugate", c.conjugate, "Update the tree by blended conjugate updates");
  train_cmd->add_option("--conjugate-decay", c.conjugate_decay,
                        "Weight of the previous posterior when blending conjugate updates")
      ->check(CLI::Range(0.0, 0.999999));
  train_cmd->add_option("--kl-weight", c.kl_weight, "Weight of the KL(posterior || Beta(1,1)) term")
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_flag("--smooth-base", c.smooth_base, "Interpolate leaf log densities during training");
  train_cmd->add_option("--flow-layers", c.flow.coupling_layers, "Number of coupling layers")
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--hidden", train_opt.hidden, "Coupling net hidden widths, e.g. 50,50");
  train_cmd->add_option("--activation", train_opt.activation, "Coupling net nonlinearity")
      ->check(CLI::IsMember({"tanh", "relu"}));
  train_cmd->add_flag("--polyak", c.polyak, "Evaluate with Polyak-averaged flow parameters");
  train_cmd->add_option("--lr-decay-patience", c.lr_decay_patience,
                        "Halve the flow learning rate after this many epochs without improvement (0: off)")
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_flag("--quiet", train_opt.quiet, "Do not echo epoch records");

  ModelOptions eval_opt;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on data");
  eval_cmd->add_option("--model", eval_opt.model, "Checkpoint path")->required();
  add_data_options(eval_cmd, eval_opt.data, true);
  eval_cmd->add_option("--metric", eval_opt.metrics, "nll, bpd and/or sse")
      ->check(CLI::IsMember({"nll", "bpd", "sse"}));
  eval_cmd->add_option("--split", eval_opt.split, "all, train, validation or test")
      ->check(CLI::IsMember({"all", "train", "validation", "test"}));
  auto* eval_seed = eval_cmd->add_option("--seed", eval_opt.seed,
                                         "Data seed (default: the checkpoint's) and sampling seed for sse");
  eval_cmd->add_option("--samples", eval_opt.samples, "Model samples used for sse moments")
      ->check(CLI::PositiveNumber);

  ModelOptions sample_opt;
  auto* sample_cmd = app.add_subcommand("sample", "Draw samples from a checkpoint");
  sample_cmd->add_option("--model", sample_opt.model, "Checkpoint path")->required();
  sample_cmd->add_option("--n", sample_opt.n, "Number of samples")->check(CLI::PositiveNumber);
  sample_cmd->add_option("--seed", sample_opt.seed, "Sampling seed");
  sample_cmd->add_option("--out", sample_opt.out, "Output path (default stdout)");
  sample_cmd->add_option("--branch-mode", sample_opt.branch_mode, "mean or sampled branch probabilities")
      ->check(CLI::IsMember({"mean", "sampled"}));

  ModelOptions grid_opt;
  auto* grid_cmd = app.add_subcommand("grid", "Evaluate a 2D density on a lattice");
  grid_cmd->add_option("--model", grid_opt.model, "Checkpoint path")->required();
  grid_cmd->add_option("--res", grid_opt.resolution, "Cells per axis")->check(CLI::PositiveNumber);
  grid_cmd->add_option("--bounds", grid_opt.bounds, "xmin,xmax,ymin,ymax")->expected(4)->delimiter(',');
  grid_cmd->add_option("--out", grid_opt.out, "Output path (default stdout)");

  ModelOptions var_opt;
  auto* var_cmd = app.add_subcommand("variance", "Write the per-dimension posterior variance map");
  var_cmd->add_option("--model", var_opt.model, "Checkpoint path")->required();
  var_cmd->add_option("--out", var_opt.out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train_opt, out);
    if (*eval_cmd) {
      eval_opt.seed_given = eval_seed->count() > 0;
      return cmd_eval(eval_opt, out);
    }
    if (*sample_cmd) return cmd_sample(sample_opt, out);
    if (*grid_cmd) return cmd_grid(grid_opt, out);
    if (*var_cmd) return cmd_variance(var_opt, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  std::vector<const char*> argv{"vpt"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace vpt::cli

#endif  // VPT_CLI_HPP_
