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

#include "mercury/seq2seq/checkpoint.hpp"
#include "mercury/seq2seq/optim.hpp"

#include <functional>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace mercury::seq2seq {

class TrainingDiverged : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct TrainConfig {
    int epochs = 120;
    int batch_size = 32;
    std::uint64_t seed = 1;
    AdamConfig adam;
    OneCycle schedule;
    double grad_clip = 5.0;
    /// Training OER is measured on at most this many training examples.
    int train_eval_size = 256;

    void validate() const;
};

struct EpochStats {
    int epoch = 0;
    double lr = 0.0; // at the last step of the epoch
    double train_loss = 0.0;
    double test_loss = 0.0;
    double train_oer = 0.0;
    double test_oer = 0.0;
};

struct TrainResult {
    ExtractorParams final_params;
    ExtractorParams best_params; // lowest test OER, earliest epoch on ties
    int best_epoch = 0;
    std::vector<EpochStats> curves;
};

using EpochCallback = std::function<void(const EpochStats &)>;

/// Mean OER and mean loss of `model` over `examples`.
template <class T>
std::pair<double, double> evaluate_model(SequenceModel<T> &model, std::span<const Example> examples,
                                         int batch_size);

template <class T>
TrainResult train(SequenceModel<T> &model, std::span<const Example> train_set,
                  std::span<const Example> test_set, const TrainConfig &cfg,
                  const EpochCallback &on_epoch = {});

/// Builds a freshly initialized model of the given kind.
template <class T>
std::unique_ptr<SequenceModel<T>> make_model(ModelKind kind, const RnnCtcConfig &rnn,
                                             const TransformerConfig &tf, std::uint64_t seed);

/// One CSV row per epoch.
void write_curves_csv(std::ostream &os, const std::vector<EpochStats> &curves);

} // namespace mercury::seq2seq
