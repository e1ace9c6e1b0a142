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

#include "mercury/eval.hpp"
#include "mercury/seq2seq/model.hpp"
#include "mercury/seq2seq/train.hpp"

#include <Eigen/Core>

#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace mercury {

// Every real number in a report is printed with a fixed format so that two
// runs with the same seed produce identical bytes.
std::string format_real(double v);

/// "9 13 12" style rendering of a label sequence.
std::string format_labels(const LabelSeq &s);

/// Per-trace table of an evaluation.
void write_eval_csv(std::ostream &os, const Dataset &ds, const EvalReport &r);

/// "SNR(dB),OER,Loss"; the infinite-SNR row is written as "No noise".
void write_noise_csv(std::ostream &os, std::span<const NoiseRow> rows);

/// OER per TDC location, one column pair (w/o., w/.) per model kind. Kinds
/// missing from `by_kind` leave their columns empty.
void write_placement_csv(std::ostream &os,
                         const std::map<seq2seq::ModelKind, std::vector<PlacementRow>> &by_kind);

struct AblationRow {
    std::string value;
    double best_loss_train = 0.0;
    double best_loss_test = 0.0;
    double best_oer_train = 0.0;
    double best_oer_test = 0.0;
};

/// Best (minimum over epochs) of each training curve column.
AblationRow best_of(const std::string &value, const std::vector<seq2seq::EpochStats> &curves);

void write_ablation_csv(std::ostream &os, const std::string &param, std::span<const AblationRow> rows);

void write_localization_csv(std::ostream &os, const Dataset &ds, std::span<const std::size_t> indices,
                            std::span<const Localization> results);

/// Heat map of a window-averaged attention matrix: one row per decoded
/// layer, brighter cells carry more weight.
std::string attention_svg(const Eigen::MatrixXd &reduced, const LabelSeq &predicted,
                          const std::string &title);

/// Writes `text` to path, creating parent directories.
void write_text_file(const std::string &path, const std::string &text);

} // namespace mercury
