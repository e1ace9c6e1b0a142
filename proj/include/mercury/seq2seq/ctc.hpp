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

#include "mercury/seq2seq/tensor.hpp"

#include <span>
#include <stdexcept>
#include <vector>

namespace mercury::seq2seq {

class InfeasibleAlignment : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

struct CtcResult {
    double loss = 0.0;  // -log P(labels | log_probs)
    Mat<double> grad;   // d loss / d log_probs, T x V
};

/// Smallest number of frames that can emit `labels` (one blank between repeats).
int ctc_min_length(std::span<const int> labels);

/// CTC negative log-likelihood with analytic gradient. Rows of log_probs are
/// log-normalized distributions over V symbols, `blank` is one of them.
CtcResult ctc_loss(const Mat<double> &log_probs, std::span<const int> labels, int blank);

/// Argmax per frame, collapse repeats, drop blanks. Ties go to the lower index.
std::vector<int> ctc_greedy_decode(const Mat<double> &log_probs, int blank);

/// Prefix beam search. Beams are ranked by their best single alignment so that
/// width 1 reproduces greedy decoding; the returned prefix is the surviving one
/// with the highest total probability.
std::vector<int> ctc_beam_decode(const Mat<double> &log_probs, int beam_width, int blank);

/// Collapse a frame-level path.
std::vector<int> ctc_collapse(std::span<const int> path, int blank);

} // namespace mercury::seq2seq
