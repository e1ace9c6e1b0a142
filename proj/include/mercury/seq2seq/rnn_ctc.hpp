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
#include "mercury/seq2seq/model.hpp"

#include <vector>

namespace mercury::seq2seq {

struct RnnCtcConfig {
    int n_conv_layers = 3;
    int rnn_dim = 128;
    int n_rnn_layers = 2;
    int vocab = kCtcVocab;
    int blank = kBlankLabel;
    int input_channels = 3;
    int input_length = 1000;
    int conv_kernel = 5;
    int conv_stride = 2;
    std::vector<int> conv_channels{32, 64, 64, 64, 64};
    int beam_width = 8;

    void validate() const;
    int output_length() const;
};

std::int64_t parameter_count(const RnnCtcConfig &cfg);

/// Conv stack -> linear -> stacked BiGRU -> two linear layers -> log-softmax.
template <class T> class RnnCtc final : public SequenceModel<T> {
  public:
    struct Cache {
        int batch = 1;
        std::vector<Mat<T>> conv_in;
        std::vector<typename Conv1d<T>::Cache> conv;
        std::vector<Mat<T>> conv_out; // pre-activation
        Mat<T> proj_in, proj_out;
        std::vector<typename BiGru<T>::Cache> rnn;
        Mat<T> head_in, hidden_pre, hidden, logits, log_probs;
    };

    RnnCtc(const RnnCtcConfig &cfg, std::uint64_t seed);

    ModelKind kind() const override { return ModelKind::RnnCtc; }
    ParameterSet<T> &params() override { return ps_; }
    const ParameterSet<T> &params() const override { return ps_; }
    const RnnCtcConfig &config() const { return cfg_; }

    /// x: (input_length*B) x channels, time-major. Returns (T'*B) x vocab log-probs.
    Mat<T> forward(const Mat<T> &x, int batch, Cache *cache) const;
    /// Accumulates parameter gradients; returns d x.
    Mat<T> backward(const Cache &cache, const Mat<T> &d_log_probs);

    /// Log-probs for one input, T' x vocab, in double.
    Mat<double> log_probs(const Eigen::MatrixXd &x) const;

    double loss(std::span<const Example> batch, bool accumulate) override;
    LabelSeq predict(const Eigen::MatrixXd &x) const override;
    std::vector<LabelSeq> predict_batch(std::span<const Example> batch) const override;
    std::string config_text() const override;

  private:
    RnnCtcConfig cfg_;
    ParameterSet<T> ps_;
    std::vector<Conv1d<T>> convs_;
    Linear<T> proj_;
    std::vector<BiGru<T>> rnns_;
    Linear<T> hidden_, out_;
};

} // namespace mercury::seq2seq
