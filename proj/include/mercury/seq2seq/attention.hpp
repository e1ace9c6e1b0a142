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

#include "mercury/seq2seq/layers.hpp"

#include <utility>
#include <vector>

namespace mercury::seq2seq {

/// Multi-head scaled dot-product attention over a single sequence.
template <class T> class MultiHeadAttention {
  public:
    /// Projected keys and values for one memory; reused across decode steps.
    struct KeyValue {
        Mat<T> k, v;
    };

    struct Cache {
        Mat<T> q_in, kv_in;
        Mat<T> q;
        KeyValue kv;
        std::vector<Mat<T>> probs; // one Tq x Tk matrix per head
        Mat<T> context;
    };

    MultiHeadAttention() = default;
    MultiHeadAttention(ParameterSet<T> &ps, const std::string &name, int d_model, int heads,
                       Rng &rng);

    KeyValue project_kv(const ParameterSet<T> &ps, const Mat<T> &kv_in) const;

    Mat<T> forward(const ParameterSet<T> &ps, const Mat<T> &q_in, const Mat<T> &kv_in,
                   bool causal, Cache *cache) const;
    Mat<T> forward(const ParameterSet<T> &ps, const Mat<T> &q_in, const KeyValue &kv,
                   bool causal, Cache *cache) const;

    /// Returns (d q_in, d kv_in). For self-attention add the two.
    std::pair<Mat<T>, Mat<T>> backward(ParameterSet<T> &ps, const Cache &cache,
                                       const Mat<T> &dy) const;

    int heads() const { return heads_; }
    int d_model() const { return d_model_; }

  private:
    int d_model_ = 0, heads_ = 1;
    Linear<T> wq_, wk_, wv_, wo_;
};

/// Mean over heads of the cached probabilities.
template <class T> Mat<T> head_mean(const std::vector<Mat<T>> &probs);

} // namespace mercury::seq2seq
