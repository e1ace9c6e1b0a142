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

#include "mercury/seq2seq/attention.hpp"
#include "mercury/seq2seq/layers.hpp"
#include "mercury/seq2seq/model.hpp"

#include <vector>

namespace mercury::seq2seq {

struct TransformerConfig {
    int d_model = 256;
    int n_heads = 8;
    int d_ff = 512;
    int n_encoder_layers = 1;
    int n_decoder_layers = 1;
    int input_channels = 3;
    int input_length = 1000;
    int front_kernel = 8;
    int front_stride = 8;
    int max_decode_len = 20;

    // Token ids: layer labels 0..15, 16 is the (unused) CTC blank.
    static constexpr int kBos = 17;
    static constexpr int kEos = 18;
    static constexpr int kVocab = 19;

    void validate() const;
    int encoder_length() const;
};

std::int64_t parameter_count(const TransformerConfig &cfg);

/// Conv front end, post-norm encoder/decoder, output projection tied to the
/// token embedding.
template <class T> class Transformer final : public SequenceModel<T> {
  public:
    struct FeedForward {
        Linear<T> in, out;
    };
    struct FfCache {
        Mat<T> x, pre, act;
    };
    struct EncoderLayer {
        MultiHeadAttention<T> self;
        LayerNorm<T> norm1, norm2;
        FeedForward ff;
    };
    struct EncoderCache {
        typename MultiHeadAttention<T>::Cache self;
        typename LayerNorm<T>::Cache norm1, norm2;
        FfCache ff;
    };
    struct DecoderLayer {
        MultiHeadAttention<T> self, cross;
        LayerNorm<T> norm1, norm2, norm3;
        FeedForward ff;
    };
    struct DecoderCache {
        typename MultiHeadAttention<T>::Cache self, cross;
        typename LayerNorm<T>::Cache norm1, norm2, norm3;
        FfCache ff;
    };
    struct Cache {
        typename Conv1d<T>::Cache front;
        Mat<T> front_pre;
        std::vector<EncoderCache> enc;
        std::vector<int> tokens;
        std::vector<DecoderCache> dec;
        Mat<T> dec_out;
    };

    struct Output {
        Mat<T> logits;                 // n x vocab
        std::vector<Mat<T>> attention; // per head, n x T_enc, last decoder layer
    };

    struct Decoded {
        LabelSeq labels;
        std::vector<Mat<double>> attention; // per head, one row per decoded token incl. EOS
    };

    Transformer(const TransformerConfig &cfg, std::uint64_t seed);

    ModelKind kind() const override { return ModelKind::Transformer; }
    ParameterSet<T> &params() override { return ps_; }
    const ParameterSet<T> &params() const override { return ps_; }
    const TransformerConfig &config() const { return cfg_; }

    /// Teacher-forced pass. x is channels x steps; tokens start with BOS.
    Output forward(const Eigen::MatrixXd &x, std::span<const int> tokens, Cache *cache) const;
    /// Accumulates parameter gradients for d logits.
    void backward(const Cache &cache, const Mat<T> &d_logits);

    Decoded decode(const Eigen::MatrixXd &x) const;

    double loss(std::span<const Example> batch, bool accumulate) override;
    LabelSeq predict(const Eigen::MatrixXd &x) const override;
    std::string config_text() const override;

    int embedding_index() const { return embed_.table_index(); }

  private:
    Mat<T> encode(const Eigen::MatrixXd &x, Cache *cache) const;
    Mat<T> ff_forward(const FeedForward &ff, const Mat<T> &x, FfCache *cache) const;
    Mat<T> ff_backward(const FeedForward &ff, const FfCache &cache, const Mat<T> &dy);
    Mat<T> decode_layers(const Mat<T> &memory,
                         const std::vector<typename MultiHeadAttention<T>::KeyValue> *kv,
                         std::span<const int> tokens, Cache *cache,
                         std::vector<Mat<T>> *attention) const;

    TransformerConfig cfg_;
    ParameterSet<T> ps_;
    Conv1d<T> front_;
    std::vector<EncoderLayer> enc_;
    Embedding<T> embed_;
    std::vector<DecoderLayer> dec_;
    Mat<T> pe_enc_, pe_dec_;
};

} // namespace mercury::seq2seq
