/*
 * SPDX-FileCopyrightText: Copyright 2026 The Mercury Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "mercury/dataset.hpp"
#include "mercury/eval.hpp"
#include "mercury/report.hpp"
#include "mercury/run_config.hpp"
#include "mercury/seq2seq/train.hpp"

#include <Eigen/Core>

#include <memory>
#include <string>
#include <vector>

namespace mercury {

/// Normalized network inputs for a set of manifest rows, with Example views
/// that point into the owned matrices. Movable, not copyable.
struct InputSet {
    std::vector<std::size_t> indices;
    std::vector<Eigen::MatrixXd> x;
    std::vector<seq2seq::Example> examples;

    InputSet() = default;
    InputSet(const InputSet &) = delete;
    InputSet &operator=(const InputSet &) = delete;
    InputSet(InputSet &&) = default;
    InputSet &operator=(InputSet &&) = default;
};

InputSet make_inputs(const Dataset &ds, std::vector<std::size_t> indices);

/// Training rows: Original-placement traces only, or every placement when
/// the dataset's augmentation traces are to be used.
std::vector<std::size_t> train_rows(const Dataset &ds, bool augmented);
/// Held-out Original-placement traces.
std::vector<std::size_t> test_rows(const Dataset &ds);

struct TrainedModel {
    std::unique_ptr<seq2seq::SequenceModel<float>> model; // holds the final-epoch parameters
    seq2seq::TrainResult result;
};

/// Builds, seeds and trains one extractor as described by `cfg`.
TrainedModel train_extractor(const RunConfig &cfg, seq2seq::ModelKind kind, const InputSet &train,
                             const InputSet &test, const seq2seq::EpochCallback &on_epoch = {});

/// Seed of the noise streams used by evaluation sweeps.
std::uint64_t eval_noise_seed(const RunConfig &cfg);

/// Localizes every row in `indices`; ground-truth windows come from the
/// schedule the simulator compiles for the row's architecture.
std::vector<Localization> localize_rows(const seq2seq::SequenceModel<float> &model, const Dataset &ds,
                                        std::span<const std::size_t> indices, const SimParams &sim,
                                        const LocalizeOptions &opt = {});

/// Ablation grid "key=a..b" or "key=v1,v2,...". Short names map to dotted
/// keys: conv-layers -> rnn.conv_layers, rnn-dim -> rnn.dim.
struct Grid {
    std::string key;
    std::string label;
    std::vector<std::string> values;
};
Grid parse_grid(const std::string &text);

/// Trains one model per grid value on the same data and reports the best
/// value of each curve column.
std::vector<AblationRow> run_ablation(const RunConfig &base, seq2seq::ModelKind kind, const Grid &grid,
                                      const InputSet &train, const InputSet &test,
                                      const seq2seq::EpochCallback &on_epoch = {});

} // namespace mercury
