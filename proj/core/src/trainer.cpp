/*
 * Copyright 2026 The PVAD Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "pvad/trainer.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <ostream>

#include "pvad/rng.hpp"

namespace pvad {

namespace {

// One utterance turned into supervised training arrays.
struct TrainItem {
  Eigen::MatrixXf inputs;   // input_dim x T
  std::vector<int> labels;  // T
};

TrainResult run_training(
    int input_dim, int num_classes, const TrainConfig& cfg,
    const std::vector<TrainItem>& items,
    const std::function<double(const NetworkParams<float>&)>& heldout_metric) {
  cfg.validate();
  if (items.empty()) throw DataError("training set is empty");

  Rng init_rng(hash_combine(cfg.seed, hash_str("init")));
  TrainResult result;
  result.params = init_network<float>(input_dim, num_classes, init_rng,
                                      cfg.hidden_dim, cfg.fc_dim);
  AdamState<float> adam;
  NetworkParams<float> best = result.params;
  double best_metric = -1.0;
  int since_best = 0;

  std::vector<size_t> order(items.size());
  std::iota(order.begin(), order.end(), size_t{0});

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(hash_combine(hash_combine(cfg.seed, hash_str("shuffle")),
                                 static_cast<uint64_t>(epoch)));
    for (size_t i = order.size(); i > 1; --i) {
      const auto j =
          static_cast<size_t>(shuffle_rng.uniform_int(0, static_cast<int64_t>(i) - 1));
      std::swap(order[i - 1], order[j]);
    }

    double epoch_loss_sum = 0.0;
    int64_t epoch_count = 0;
    size_t at = 0;
    while (at < order.size()) {
      const size_t batch_end =
          std::min(order.size(), at + static_cast<size_t>(cfg.batch_size));
      const auto batch_n = static_cast<float>(batch_end - at);
      GradientSet<float> grads = zeros_like(result.params);
      double batch_loss = 0.0;
      for (size_t k = at; k < batch_end; ++k) {
        const TrainItem& item = items[order[k]];
        const ForwardTrace<float> trace =
            forward_traced(result.params, item.inputs);
        const SequenceLossResult<float> sl = sequence_loss(
            trace.logits, item.labels, cfg.loss, cfg.weights, cfg.reduction);
        // dlogits already averages over frames; utterances in a batch get
        // equal weight regardless of length.
        Eigen::MatrixXf scaled = sl.dlogits / batch_n;
        backward_sequence(result.params, trace, scaled, grads);
        batch_loss += sl.loss;
        epoch_loss_sum += sl.loss;
        epoch_count += 1;
      }
      batch_loss /= batch_n;
      if (!std::isfinite(batch_loss)) {
        throw DataError("training diverged (non-finite loss) at epoch " +
                        std::to_string(epoch + 1));
      }
      clip_global_norm(grads, cfg.clip_norm);
      adam_update(result.params, grads, adam, cfg.adam);
      result.steps += 1;
      at = batch_end;
    }

    const double epoch_loss = epoch_loss_sum / static_cast<double>(epoch_count);
    result.epoch_train_loss.push_back(epoch_loss);

    double metric = std::nan("");
    if (heldout_metric) {
      metric = heldout_metric(result.params);
      result.epoch_heldout.push_back(metric);
      if (metric > best_metric) {
        best_metric = metric;
        best = result.params;
        result.best_epoch = epoch;
        since_best = 0;
      } else {
        since_best += 1;
      }
    }
    if (cfg.log != nullptr) {
      *cfg.log << "epoch " << (epoch + 1) << "  train loss " << epoch_loss;
      if (heldout_metric) *cfg.log << "  heldout " << metric;
      *cfg.log << '\n';
      cfg.log->flush();
    }
    if (heldout_metric && cfg.patience > 0 && since_best >= cfg.patience) {
      if (cfg.log != nullptr) {
        *cfg.log << "early stop after epoch " << (epoch + 1) << '\n';
      }
      break;
    }
  }

  if (heldout_metric) result.params = std::move(best);
  return result;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train: batch size must be >= 1");
  if (patience < 0) throw ConfigError("train: patience must be >= 0");
  if (!(adam.lr > 0.0)) throw ConfigError("train: learning rate must be > 0");
  if (!(clip_norm > 0.0)) throw ConfigError("train: clip norm must be > 0");
  if (hidden_dim < 1 || fc_dim < 1) throw ConfigError("train: bad layer dims");
}

TrainResult train_pvad(ArchitectureKind arch, const TrainConfig& cfg,
                       const std::vector<PreparedUtterance>& train,
                       const std::vector<PreparedUtterance>* heldout) {
  if (arch == ArchitectureKind::kSc) {
    throw UsageError(
        "SC is not trainable: it combines a standard VAD with the "
        "verification score (train the 2-class net instead)");
  }
  if (train.empty()) throw DataError("training set is empty");
  std::vector<TrainItem> items;
  items.reserve(train.size());
  for (const PreparedUtterance& u : train) {
    TrainItem item;
    item.inputs = build_inputs(arch, u.features, &u.target, &u.scores);
    item.labels.reserve(u.labels.size());
    for (PvadClass c : u.labels) item.labels.push_back(static_cast<int>(c));
    items.push_back(std::move(item));
  }

  std::function<double(const NetworkParams<float>&)> metric;
  if (heldout != nullptr) {
    metric = [arch, heldout](const NetworkParams<float>& p) {
      return map_micro(score_utterances(p, arch, *heldout));
    };
  }
  const int input_dim = static_cast<int>(items.front().inputs.rows());
  return run_training(input_dim, kNumPvadClasses, cfg, items, metric);
}

TrainResult train_vad(const TrainConfig& cfg,
                      const std::vector<PreparedUtterance>& train,
                      const std::vector<PreparedUtterance>* heldout) {
  if (train.empty()) throw DataError("training set is empty");
  std::vector<TrainItem> items;
  items.reserve(train.size());
  for (const PreparedUtterance& u : train) {
    TrainItem item;
    item.inputs = u.features;
    item.labels = collapse_to_vad_labels(u.labels);
    items.push_back(std::move(item));
  }

  std::function<double(const NetworkParams<float>&)> metric;
  if (heldout != nullptr) {
    metric = [heldout](const NetworkParams<float>& p) {
      return ap_speech(score_utterances_vad(p, *heldout));
    };
  }
  const int feature_dim = static_cast<int>(train.front().features.rows());
  return run_training(feature_dim, 2, cfg, items, metric);
}

}  // namespace pvad
