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

#include "mercury/seq2seq/transformer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mercury::seq2seq {

void TransformerConfig::validate() const {
    if (d_model <= 0 || n_heads <= 0 || d_model % n_heads != 0)
        throw std::invalid_argument("transformer: d_model must be divisible by n_heads");
    if (d_ff <= 0 || n_encoder_layers < 1 || n_decoder_layers < 1)
        throw std::invalid_argument("transformer: d_ff and layer counts must be positive");
    if (front_kernel <= 0 || front_stride <= 0 || input_channels <= 0)
        throw std::invalid_argument("transformer: front conv geometry must be positive");
    if (max_decode_len < 1)
        throw std::invalid_argument("transformer: max_decode_len must be positive");
    (void)encoder_length();
}

int TransformerConfig::encoder_length() const {
    if (input_length < front_kernel)
        throw std::invalid_argument("transformer: input shorter than front kernel");
    return (input_length - front_kernel) / front_stride + 1;
}

std::int64_t parameter_count(const TransformerConfig &cfg) {
    const std::int64_t d = cfg.d_model;
    const std::int64_t attn = 4 * (d * d + d);
    const std::int64_t norm = 2 * d;
    const std::int64_t ff = d * cfg.d_ff + cfg.d_ff + cfg.d_ff * d + d;
    std::int64_t n = static_cast<std::int64_t>(cfg.front_kernel) * cfg.input_channels * d + d;
    n += cfg.n_encoder_layers * (attn + 2 * norm + ff);
    n += TransformerConfig::kVocab * d;
    n += cfg.n_decoder_layers * (2 * attn + 3 * norm + ff);
    return n;
}

template <class T>
Transformer<T>::Transformer(const TransformerConfig &cfg, std::uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    Rng rng = make_rng(seed, "init");
    const int d = cfg_.d_model;
    front_ = Conv1d<T>(ps_, "front", cfg_.input_channels, d, cfg_.front_kernel, cfg_.front_stride, rng);
    for (int l = 0; l < cfg_.n_encoder_layers; ++l) {
        const std::string p = "enc" + std::to_string(l);
        EncoderLayer layer;
        layer.self = MultiHeadAttention<T>(ps_, p + ".self", d, cfg_.n_heads, rng);
        layer.norm1 = LayerNorm<T>(ps_, p + ".norm1", d);
        layer.ff.in = Linear<T>(ps_, p + ".ff1", d, cfg_.d_ff, rng);
        layer.ff.out = Linear<T>(ps_, p + ".ff2", cfg_.d_ff, d, rng);
        layer.norm2 = LayerNorm<T>(ps_, p + ".norm2", d);
        enc_.push_back(layer);
    }
    embed_ = Embedding<T>(ps_, "embed", TransformerConfig::kVocab, d, rng);
    for (int l = 0; l < cfg_.n_decoder_layers; ++l) {
        const std::string p = "dec" + std::to_string(l);
        DecoderLayer layer;
        layer.self = MultiHeadAttention<T>(ps_, p + ".self", d, cfg_.n_heads, rng);
        layer.norm1 = LayerNorm<T>(ps_, p + ".norm1", d);
        layer.cross = MultiHeadAttention<T>(ps_, p + ".cross", d, cfg_.n_heads, rng);
        layer.norm2 = LayerNorm<T>(ps_, p + ".norm2", d);
        layer.ff.in = Linear<T>(ps_, p + ".ff1", d, cfg_.d_ff, rng);
        layer.ff.out = Linear<T>(ps_, p + ".ff2", cfg_.d_ff, d, rng);
        layer.norm3 = LayerNorm<T>(ps_, p + ".norm3", d);
        dec_.push_back(layer);
    }
    pe_enc_ = positional_encoding<T>(cfg_.encoder_length(), d);
    pe_dec_ = positional_encoding<T>(cfg_.max_decode_len + 1, d);
}

template <class T>
Mat<T> Transformer<T>::ff_forward(const FeedForward &ff, const Mat<T> &x, FfCache *cache) const {
    Mat<T> pre = ff.in.forward(ps_, x);
    Mat<T> act = relu<T>(pre);
    Mat<T> y = ff.out.forward(ps_, act);
    if (cache) {
        cache->x = x;
        cache->pre = std::move(pre);
        cache->act = std::move(act);
    }
    return y;
}

template <class T>
Mat<T> Transformer<T>::ff_backward(const FeedForward &ff, const FfCache &c, const Mat<T> &dy) {
    Mat<T> d = ff.out.backward(ps_, c.act, dy);
    d = relu_backward<T>(c.pre, d);
    return ff.in.backward(ps_, c.x, d);
}

template <class T> Mat<T> Transformer<T>::encode(const Eigen::MatrixXd &x, Cache *cache) const {
    if (x.rows() != cfg_.input_channels || x.cols() != cfg_.input_length)
        throw ShapeError("transformer: input " + shape_str(x.rows(), x.cols()) + " vs " +
                         shape_str(cfg_.input_channels, cfg_.input_length));
    const Mat<T> xt = x.transpose().template cast<T>();
    Mat<T> pre = front_.forward(ps_, xt, 1, cache ? &cache->front : nullptr);
    Mat<T> h = relu<T>(pre) + pe_enc_;
    if (cache) {
        cache->front_pre = std::move(pre);
        cache->enc.assign(enc_.size(), {});
    }
    for (std::size_t l = 0; l < enc_.size(); ++l) {
        const EncoderLayer &L = enc_[l];
        EncoderCache *c = cache ? &cache->enc[l] : nullptr;
        Mat<T> a = h + L.self.forward(ps_, h, h, false, c ? &c->self : nullptr);
        a = L.norm1.forward(ps_, a, c ? &c->norm1 : nullptr);
        Mat<T> b = a + ff_forward(L.ff, a, c ? &c->ff : nullptr);
        h = L.norm2.forward(ps_, b, c ? &c->norm2 : nullptr);
    }
    return h;
}

template <class T>
Mat<T> Transformer<T>::decode_layers(const Mat<T> &memory,
                                     const std::vector<typename MultiHeadAttention<T>::KeyValue> *kv,
                                     std::span<const int> tokens, Cache *cache,
                                     std::vector<Mat<T>> *attention) const {
    if (tokens.empty() || static_cast<int>(tokens.size()) > cfg_.max_decode_len + 1)
        throw ShapeError("transformer: decoder input of " + std::to_string(tokens.size()) +
                         " tokens outside [1, " + std::to_string(cfg_.max_decode_len + 1) + "]");
    const auto n = static_cast<Eigen::Index>(tokens.size());
    const T scale = std::sqrt(static_cast<T>(cfg_.d_model));
    Mat<T> h = embed_.forward(ps_, tokens) * scale + pe_dec_.topRows(n);
    if (cache) {
        cache->tokens.assign(tokens.begin(), tokens.end());
        cache->dec.assign(dec_.size(), {});
    }
    for (std::size_t l = 0; l < dec_.size(); ++l) {
        const DecoderLayer &L = dec_[l];
        DecoderCache *c = cache ? &cache->dec[l] : nullptr;
        // Cross-attention probabilities are needed for the last layer even without a cache.
        typename MultiHeadAttention<T>::Cache cross_local;
        const bool want_attn = attention && l + 1 == dec_.size();
        auto *cross_cache = c ? &c->cross : (want_attn ? &cross_local : nullptr);

        Mat<T> a = h + L.self.forward(ps_, h, h, true, c ? &c->self : nullptr);
        a = L.norm1.forward(ps_, a, c ? &c->norm1 : nullptr);
        Mat<T> cross = kv ? L.cross.forward(ps_, a, (*kv)[l], false, cross_cache)
                          : L.cross.forward(ps_, a, memory, false, cross_cache);
        Mat<T> b = L.norm2.forward(ps_, a + cross, c ? &c->norm2 : nullptr);
        Mat<T> f = b + ff_forward(L.ff, b, c ? &c->ff : nullptr);
        h = L.norm3.forward(ps_, f, c ? &c->norm3 : nullptr);
        if (want_attn)
            *attention = cross_cache->probs;
    }
    if (cache)
        cache->dec_out = h;
    return h * ps_.value(embed_.table_index()).transpose();
}

template <class T>
typename Transformer<T>::Output Transformer<T>::forward(const Eigen::MatrixXd &x,
                                                        std::span<const int> tokens,
                                                        Cache *cache) const {
    const Mat<T> memory = encode(x, cache);
    Output out;
    out.logits = decode_layers(memory, nullptr, tokens, cache, &out.attention);
    return out;
}

template <class T> void Transformer<T>::backward(const Cache &c, const Mat<T> &d_logits) {
    const int table = embed_.table_index();
    ps_.grad(table).noalias() += d_logits.transpose() * c.dec_out;
    Mat<T> dh = d_logits * ps_.value(table);

    Mat<T> d_memory = Mat<T>::Zero(c.enc.empty() ? 0 : c.front_pre.rows(), cfg_.d_model);
    for (std::size_t l = dec_.size(); l-- > 0;) {
        const DecoderLayer &L = dec_[l];
        const DecoderCache &dc = c.dec[l];
        Mat<T> df = L.norm3.backward(ps_, dc.norm3, dh);
        Mat<T> db = df + ff_backward(L.ff, dc.ff, df);
        Mat<T> dsum = L.norm2.backward(ps_, dc.norm2, db);
        auto [dq, dkv] = L.cross.backward(ps_, dc.cross, dsum);
        d_memory += dkv;
        Mat<T> da = dsum + dq;
        Mat<T> dsum1 = L.norm1.backward(ps_, dc.norm1, da);
        auto [sq, skv] = L.self.backward(ps_, dc.self, dsum1);
        dh = dsum1 + sq + skv;
    }
    embed_.backward(ps_, c.tokens, dh * std::sqrt(static_cast<T>(cfg_.d_model)));

    Mat<T> de = std::move(d_memory);
    for (std::size_t l = enc_.size(); l-- > 0;) {
        const EncoderLayer &L = enc_[l];
        const EncoderCache &ec = c.enc[l];
        Mat<T> db = L.norm2.backward(ps_, ec.norm2, de);
        Mat<T> da = db + ff_backward(L.ff, ec.ff, db);
        Mat<T> dsum = L.norm1.backward(ps_, ec.norm1, da);
        auto [sq, skv] = L.self.backward(ps_, ec.self, dsum);
        de = dsum + sq + skv;
    }
    de = relu_backward<T>(c.front_pre, de);
    (void)front_.backward(ps_, c.front, de);
}

template <class T>
typename Transformer<T>::Decoded Transformer<T>::decode(const Eigen::MatrixXd &x) const {
    const Mat<T> memory = encode(x, nullptr);
    std::vector<typename MultiHeadAttention<T>::KeyValue> kv;
    kv.reserve(dec_.size());
    for (const auto &L : dec_)
        kv.push_back(L.cross.project_kv(ps_, memory));

    Decoded out;
    std::vector<int> tokens{TransformerConfig::kBos};
    std::vector<Mat<T>> attention;
    for (int step = 0; step < cfg_.max_decode_len; ++step) {
        const Mat<T> logits = decode_layers(memory, &kv, tokens, nullptr, &attention);
        auto last = logits.row(logits.rows() - 1).eval();
        last(TransformerConfig::kBos) = -std::numeric_limits<T>::infinity();
        last(kBlankLabel) = -std::numeric_limits<T>::infinity();
        Eigen::Index best = 0;
        last.maxCoeff(&best);
        if (best == TransformerConfig::kEos)
            break;
        out.labels.push_back(static_cast<int>(best));
        tokens.push_back(static_cast<int>(best));
    }
    for (const auto &a : attention)
        out.attention.push_back(a.template cast<double>());
    return out;
}

template <class T> double Transformer<T>::loss(std::span<const Example> batch, bool accumulate) {
    const auto B = static_cast<double>(batch.size());
    double total = 0.0;
    for (const Example &ex : batch) {
        std::vector<int> in{TransformerConfig::kBos};
        in.insert(in.end(), ex.labels->begin(), ex.labels->end());
        std::vector<int> target(ex.labels->begin(), ex.labels->end());
        target.push_back(TransformerConfig::kEos);

        Cache cache;
        const Output out = forward(*ex.x, in, accumulate ? &cache : nullptr);
        const Mat<T> lp = log_softmax_rows<T>(out.logits);
        const auto n = static_cast<double>(target.size());
        double sample = 0.0;
        for (std::size_t i = 0; i < target.size(); ++i)
            sample -= static_cast<double>(lp(static_cast<Eigen::Index>(i), target[i]));
        total += sample / n / B;
        if (accumulate) {
            Mat<T> d = lp.array().exp().matrix();
            for (std::size_t i = 0; i < target.size(); ++i)
                d(static_cast<Eigen::Index>(i), target[i]) -= T(1);
            d *= static_cast<T>(1.0 / (n * B));
            backward(cache, d);
        }
    }
    return total;
}

template <class T> LabelSeq Transformer<T>::predict(const Eigen::MatrixXd &x) const {
    return decode(x).labels;
}

template <class T> std::string Transformer<T>::config_text() const {
    std::ostringstream os;
    os << "model = transformer\n"
       << "d_model = " << cfg_.d_model << "\n"
       << "n_heads = " << cfg_.n_heads << "\n"
       << "d_ff = " << cfg_.d_ff << "\n"
       << "n_encoder_layers = " << cfg_.n_encoder_layers << "\n"
       << "n_decoder_layers = " << cfg_.n_decoder_layers << "\n"
       << "input_channels = " << cfg_.input_channels << "\n"
       << "input_length = " << cfg_.input_length << "\n"
       << "front_kernel = " << cfg_.front_kernel << "\n"
       << "front_stride = " << cfg_.front_stride << "\n"
       << "max_decode_len = " << cfg_.max_decode_len << "\n";
    return os.str();
}

template class Transformer<float>;
template class Transformer<double>;

} // namespace mercury::seq2seq
