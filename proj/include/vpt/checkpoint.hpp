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

// Versioned JSON checkpoints and line-delimited training reports. Reals are
// written in shortest round-trip form, so a save/load cycle restores every
// parameter bit for bit.

#ifndef VPT_CHECKPOINT_HPP_
#define VPT_CHECKPOINT_HPP_

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "vpt/train.hpp"

namespace vpt {

using Json = nlohmann::json;

inline constexpr int kCheckpointVersion = 1;
inline constexpr const char* kCheckpointFormat = "vpt-checkpoint";

struct Checkpoint {
  TrainConfig config;
  DensityEstimator model;
  Standardization standardization;
  std::string data_source;
  std::size_t data_rows = 0;
  TrainReport summary;  // epochs are not stored
};

namespace io {

inline Json real(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }
inline double real(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

inline Json array_to_json(const Array& a) { return Json{{"shape", a.shape()}, {"data", a.data()}}; }

inline Array array_from_json(const Json& j) {
  return Array(j.at("shape").get<Shape>(), j.at("data").get<std::vector<double>>());
}

inline Json config_to_json(const TrainConfig& c) {
  return Json{{"levels", c.levels},
              {"partition", std::string(to_string(c.partition))},
              {"prior", std::string(to_string(c.prior))},
              {"flow_layers", c.flow.coupling_layers},
              {"hidden", c.flow.hidden},
              {"activation", std::string(to_string(c.flow.activation))},
              {"scaling", c.flow.scaling},
              {"sigmoid", c.flow.sigmoid},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"lr_flow", c.lr_flow},
              {"lr_prior", c.lr_prior},
              {"adam_beta1", c.adam_beta1},
              {"adam_beta2", c.adam_beta2},
              {"adam_epsilon", c.adam_epsilon},
              {"patience", c.patience},
              {"seed", c.seed},
              {"conjugate", c.conjugate},
              {"conjugate_decay", c.conjugate_decay},
              {"kl_weight", c.kl_weight},
              {"smooth_base", c.smooth_base},
              {"freeze_flow", c.freeze_flow},
              {"polyak", c.polyak},
              {"polyak_decay", c.polyak_decay},
              {"lr_decay_patience", c.lr_decay_patience},
              {"lr_decay_factor", c.lr_decay_factor}};
}

inline TrainConfig config_from_json(const Json& j) {
  TrainConfig c;
  c.levels = j.at("levels").get<int>();
  c.partition = parse_partition_mode(j.at("partition").get<std::string>());
  c.prior = parse_prior_kind(j.at("prior").get<std::string>());
  c.flow.coupling_layers = j.at("flow_layers").get<int>();
  c.flow.hidden = j.at("hidden").get<std::vector<int>>();
  c.flow.activation = parse_activation(j.at("activation").get<std::string>());
  c.flow.scaling = j.at("scaling").get<bool>();
  c.flow.sigmoid = j.at("sigmoid").get<bool>();
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.lr_flow = j.at("lr_flow").get<double>();
  c.lr_prior = j.at("lr_prior").get<double>();
  c.adam_beta1 = j.at("adam_beta1").get<double>();
  c.adam_beta2 = j.at("adam_beta2").get<double>();
  c.adam_epsilon = j.at("adam_epsilon").get<double>();
  c.patience = j.at("patience").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.conjugate = j.at("conjugate").get<bool>();
  c.conjugate_decay = j.at("conjugate_decay").get<double>();
  c.kl_weight = j.at("kl_weight").get<double>();
  c.smooth_base = j.at("smooth_base").get<bool>();
  c.freeze_flow = j.at("freeze_flow").get<bool>();
  c.polyak = j.at("polyak").get<bool>();
  c.polyak_decay = j.at("polyak_decay").get<double>();
  c.lr_decay_patience = j.at("lr_decay_patience").get<int>();
  c.lr_decay_factor = j.at("lr_decay_factor").get<double>();
  return c;
}

inline Json flow_to_json(const FlowModel& flow) {
  Json layers = Json::array();
  for (const FlowLayer& layer : flow.layers()) {
    if (const auto* c = std::get_if<CouplingLayer>(&layer)) {
      Json weights = Json::array(), biases = Json::array();
      for (const Array& w : c->net().weights()) weights.push_back(array_to_json(w));
      for (const Array& b : c->net().biases()) biases.push_back(array_to_json(b));
      layers.push_back(Json{{"type", "coupling"},
                            {"pass", c->pass()},
                            {"shifted", c->shifted()},
                            {"activation", std::string(to_string(c->net().activation()))},
                            {"weights", weights},
                            {"biases", biases}});
    } else {
      layers.push_back(Json{{"type", "scaling"},
                            {"log_scale", std::get<ScalingLayer>(layer).log_scale().data()}});
    }
  }
  return Json{{"dims", flow.dims()}, {"sigmoid", flow.has_sigmoid()}, {"layers", layers}};
}

inline FlowModel flow_from_json(const Json& j) {
  const std::size_t dims = j.at("dims").get<std::size_t>();
  std::vector<FlowLayer> layers;
  for (const Json& l : j.at("layers")) {
    const std::string type = l.at("type").get<std::string>();
    if (type == "coupling") {
      Rng unused;
      const auto pass = l.at("pass").get<std::vector<std::size_t>>();
      const auto shifted = l.at("shifted").get<std::vector<std::size_t>>();
      const auto& ws = l.at("weights");
      const auto& bs = l.at("biases");
      if (ws.size() != bs.size() || ws.empty()) throw ParseError("checkpoint: malformed coupling net", 0, 0);
      std::vector<int> hidden;
      for (std::size_t k = 0; k + 1 < ws.size(); ++k) {
        hidden.push_back(static_cast<int>(ws[k].at("shape").at(1).get<std::size_t>()));
      }
      Mlp net(pass.size(), shifted.size(), hidden, parse_activation(l.at("activation").get<std::string>()),
              unused);
      for (std::size_t k = 0; k < ws.size(); ++k) {
        Array w = array_from_json(ws[k]);
        Array b = array_from_json(bs[k]);
        if (w.shape() != net.weights()[k].shape() || b.shape() != net.biases()[k].shape()) {
          throw ParseError("checkpoint: coupling weight shape mismatch", 0, 0);
        }
        net.weights()[k] = std::move(w);
        net.biases()[k] = std::move(b);
      }
      layers.emplace_back(CouplingLayer(pass, shifted, std::move(net)));
    } else if (type == "scaling") {
      ScalingLayer s(dims);
      const auto v = l.at("log_scale").get<std::vector<double>>();
      if (v.size() != dims) throw ParseError("checkpoint: scaling layer size mismatch", 0, 0);
      s.log_scale().data() = v;
      layers.emplace_back(std::move(s));
    } else {
      throw ParseError("checkpoint: unknown flow layer type '" + type + "'", 0, 0);
    }
  }
  return FlowModel(dims, std::move(layers), j.at("sigmoid").get<bool>());
}

inline Json prior_to_json(const Prior& prior) {
  if (const auto* t = std::get_if<PolyaTree>(&prior)) {
    // Effective alphas are included for inspection only; loading reads raw values.
    Json nodes = Json::array();
    for (std::size_t d = 0; d < t->dim_count(); ++d) {
      Json per_dim = Json::array();
      for (std::size_t n = 0; n < t->node_count(); ++n) {
        const BetaDist b = t->beta(d, n);
        per_dim.push_back(Json::array({b.alpha, b.beta}));
      }
      nodes.push_back(per_dim);
    }
    return Json{{"kind", "vpt"},
                {"levels", t->levels()},
                {"dims", t->dims()},
                {"mode", std::string(to_string(t->mode()))},
                {"raw_alpha", array_to_json(t->raw_alpha())},
                {"split_raw", array_to_json(t->split_raw())},
                {"alpha", nodes}};
  }
  if (const auto* h = std::get_if<LearnableHistogram>(&prior)) {
    return Json{{"kind", "histogram"},
                {"raw_widths", array_to_json(h->raw_widths())},
                {"raw_logits", array_to_json(h->raw_logits())}};
  }
  const auto& f = std::get<FixedPrior>(prior);
  return Json{{"kind", f.kind() == FixedKind::kGaussian ? "gaussian" : "logistic"}, {"dims", f.dims()}};
}

inline Prior prior_from_json(const Json& j) {
  const PriorKind kind = parse_prior_kind(j.at("kind").get<std::string>());
  switch (kind) {
    case PriorKind::kVpt: {
      PolyaTree t(j.at("levels").get<int>(), j.at("dims").get<int>(),
                  parse_partition_mode(j.at("mode").get<std::string>()));
      Array raw = array_from_json(j.at("raw_alpha"));
      Array split = array_from_json(j.at("split_raw"));
      if (raw.shape() != t.raw_alpha().shape() || split.shape() != t.split_raw().shape()) {
        throw ParseError("checkpoint: tree parameter shape mismatch", 0, 0);
      }
      t.raw_alpha() = std::move(raw);
      t.split_raw() = std::move(split);
      return t;
    }
    case PriorKind::kHistogram: {
      Array w = array_from_json(j.at("raw_widths"));
      Array l = array_from_json(j.at("raw_logits"));
      if (w.shape() != l.shape() || w.rank() != 2) {
        throw ParseError("checkpoint: histogram parameter shape mismatch", 0, 0);
      }
      LearnableHistogram h(w.cols(), w.rows());
      h.raw_widths() = std::move(w);
      h.raw_logits() = std::move(l);
      return h;
    }
    case PriorKind::kGaussian: return FixedPrior(FixedKind::kGaussian, j.at("dims").get<std::size_t>());
    case PriorKind::kLogistic: return FixedPrior(FixedKind::kLogistic, j.at("dims").get<std::size_t>());
  }
  throw ParseError("checkpoint: unknown prior", 0, 0);
}

inline Json summary_to_json(const TrainReport& r) {
  return Json{{"best_epoch", r.best_epoch},
              {"best_val_nll", real(r.best_val_nll)},
              {"test_nll", real(r.test_nll)},
              {"test_bpd", real(r.test_bpd)},
              {"prior_param_count", r.prior_param_count},
              {"flow_param_count", r.flow_param_count},
              {"epochs_run", r.epochs.size()},
              {"stopped_early", r.stopped_early}};
}

inline TrainReport summary_from_json(const Json& j) {
  TrainReport r;
  r.best_epoch = j.at("best_epoch").get<int>();
  r.best_val_nll = real(j.at("best_val_nll"));
  r.test_nll = real(j.at("test_nll"));
  r.test_bpd = real(j.at("test_bpd"));
  r.prior_param_count = j.at("prior_param_count").get<std::size_t>();
  r.flow_param_count = j.at("flow_param_count").get<std::size_t>();
  r.stopped_early = j.at("stopped_early").get<bool>();
  return r;
}

inline Json epoch_to_json(const EpochRecord& e) {
  return Json{{"epoch", e.epoch},
              {"train_nll", real(e.train_nll)},
              {"val_nll", real(e.val_nll)},
              {"seconds", e.seconds}};
}

}  // namespace io

inline Json checkpoint_to_json(const Checkpoint& c) {
  return Json{{"format", kCheckpointFormat},
              {"version", kCheckpointVersion},
              {"config", io::config_to_json(c.config)},
              {"seed", c.config.seed},
              {"flow", io::flow_to_json(c.model.flow())},
              {"prior", io::prior_to_json(c.model.prior())},
              {"standardization",
               Json{{"mean", c.standardization.mean},
                    {"stddev", c.standardization.stddev},
                    {"kept", c.standardization.kept}}},
              {"data", Json{{"source", c.data_source}, {"rows", c.data_rows}}},
              {"summary", io::summary_to_json(c.summary)}};
}

inline Checkpoint checkpoint_from_json(const Json& j) {
  if (j.value("format", std::string()) != kCheckpointFormat) {
    throw ParseError("not a vpt checkpoint", 0, 0);
  }
  const int version = j.at("version").get<int>();
  if (version != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version), 0, 0);
  }
  Checkpoint c;
  c.config = io::config_from_json(j.at("config"));
  c.model = DensityEstimator(io::flow_from_json(j.at("flow")), io::prior_from_json(j.at("prior")));
  const Json& s = j.at("standardization");
  c.standardization.mean = s.at("mean").get<std::vector<double>>();
  c.standardization.stddev = s.at("stddev").get<std::vector<double>>();
  c.standardization.kept = s.at("kept").get<std::vector<bool>>();
  c.data_source = j.at("data").at("source").get<std::string>();
  c.data_rows = j.at("data").at("rows").get<std::size_t>();
  c.summary = io::summary_from_json(j.at("summary"));
  if (c.standardization.output_dims() != c.model.dims()) {
    throw ParseError("checkpoint: standardization does not match model dimension", 0, 0);
  }
  return c;
}

inline void save_checkpoint(const Checkpoint& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << checkpoint_to_json(c).dump(1) << '\n';
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("checkpoint is not valid JSON: ") + e.what(), 0, 0);
  }
  return checkpoint_from_json(j);
}

inline void write_report(std::ostream& out, const TrainReport& report) {
  for (const EpochRecord& e : report.epochs) out << io::epoch_to_json(e).dump() << '\n';
  out << Json{{"summary", io::summary_to_json(report)}}.dump() << '\n';
}

}  // namespace vpt

#endif  // VPT_CHECKPOINT_HPP_
