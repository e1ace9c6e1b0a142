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

#include <cstdint>
#include <vector>

namespace mercury::seq2seq {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    void validate() const;
};

template <class T> class Adam {
  public:
    Adam(const ParameterSet<T> &ps, const AdamConfig &cfg);

    /// One bias-corrected update at learning rate lr, using the stored grads.
    void step(ParameterSet<T> &ps, double lr);

    std::int64_t steps() const { return t_; }

  private:
    AdamConfig cfg_;
    std::int64_t t_ = 0;
    std::vector<Mat<T>> m_, v_;
};

/// Linear warmup from lr_min to lr_max over the first warmup_fraction of the
/// run, then cosine decay back to lr_min.
struct OneCycle {
    double lr_min = 4e-5;
    double lr_max = 1e-3;
    double warmup_fraction = 0.3;

    void validate() const;
    double lr(std::int64_t step, std::int64_t total_steps) const;
};

/// Scales all gradients so their joint L2 norm is at most max_norm. Returns
/// the norm before scaling. max_norm <= 0 disables scaling.
template <class T> double clip_grad_norm(ParameterSet<T> &ps, double max_norm);

} // namespace mercury::seq2seq
