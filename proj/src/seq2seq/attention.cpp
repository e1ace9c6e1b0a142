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

#include "mercury/seq2seq/attention.hpp"

#include <cmath>
#include <limits>

namespace mercury::seq2seq {

template <class T>
MultiHeadAttention<T>::MultiHeadAttention(ParameterSet<T> &ps, const std::string &name,
                                          int d_model, int heads, Rng &rng)
    : d_model_(d_model), heads_(heads) {
    if (heads <= 0 || d_model % heads != 0)
        throw std::invalid_argument("attention: d_model " + std::to_string(d_model) +
                                    " not divisible by " + std::to_string(heads) + " heads");
    wq_ = Linear<T>(ps, name + ".q", d_model, d_model, rng);
    wk_ = Linear<T>(ps, name + ".k", d_model, d_model, rng);
    wv_ = Linear<T>(ps, name + ".v", d_model, d_model, rng);
    wo_ = Linear<T>(ps, name + ".o", d_model, d_model, rng);
}

template <class T>
typename MultiHeadAttention<T>::KeyValue
MultiHeadAttention<T>::project_kv(const ParameterSet<T> &ps, const Mat<T> &kv_in) const {
    return {wk_.forward(ps, kv_in), wv_.forward(ps, kv_in)};
}

template <class T>
Mat<T> MultiHeadAttention<T>::forward(const ParameterSet<T> &ps, const Mat<T> &q_in,
                                      const Mat<T> &kv_in, bool causal, Cache *cache) const {
    Mat<T> y = forward(ps, q_in, project_kv(ps, kv_in), causal, cache);
    if (cache)
        cache->kv_in = kv_in;
    return y;
}

template <class T>
Mat<T> MultiHeadAttention<T>::forward(const ParameterSet<T> &ps, const Mat<T> &q_in,
                                      const KeyValue &kv, bool causal, Cache *cache) const {
    const Eigen::Index tq = q_in.rows();
    const Eigen::Index tk = kv.k.rows();
    if (kv.k.cols() != d_model_ || kv.v.rows() != tk)
        throw ShapeError("attention: memory " + shape_str(kv.k.rows(), kv.k.cols()) +
                         " vs d_model " + std::to_string(d_model_));
    const int dh = d_model_ / heads_;
    const T scale = T(1) / std::sqrt(static_cast<T>(dh));

    Mat<T> q = wq_.forward(ps, q_in);
    Mat<T> context(tq, d_model_);
    std::vector<Mat<T>> probs;
    if (cache)
        probs.reserve(static_cast<std::size_t>(heads_));
    for (int h = 0; h < heads_; ++h) {
        Mat<T> s = (q.middleCols(h * dh, dh) * kv.k.middleCols(h * dh, dh).transpose()) * scale;
        if (causal)
            for (Eigen::Index i = 0; i < tq; ++i)
                for (Eigen::Index j = i + 1; j < tk; ++j)
                    s(i, j) = -std::numeric_limits<T>::infinity();
        Mat<T> a = softmax_rows<T>(s);
        context.middleCols(h * dh, dh).noalias() = a * kv.v.middleCols(h * dh, dh);
        if (cache)
            probs.push_back(std::move(a));
    }
    Mat<T> y = wo_.forward(ps, context);
    if (cache) {
        cache->q_in = q_in;
        cache->q = std::move(q);
        cache->kv = kv;
        cache->probs = std::move(probs);
        cache->context = std::move(context);
    }
    return y;
}

template <class T>
std::pair<Mat<T>, Mat<T>> MultiHeadAttention<T>::backward(ParameterSet<T> &ps, const Cache &c,
                                                          const Mat<T> &dy) const {
    const int dh = d_model_ / heads_;
    const T scale = T(1) / std::sqrt(static_cast<T>(dh));
    const Mat<T> dcontext = wo_.backward(ps, c.context, dy);

    Mat<T> dq(c.q.rows(), d_model_);
    Mat<T> dk(c.kv.k.rows(), d_model_);
    Mat<T> dv(c.kv.v.rows(), d_model_);
    for (int h = 0; h < heads_; ++h) {
        const Mat<T> &a = c.probs[static_cast<std::size_t>(h)];
        const auto dctx = dcontext.middleCols(h * dh, dh);
        dv.middleCols(h * dh, dh).noalias() = a.transpose() * dctx;
        const Mat<T> da = dctx * c.kv.v.middleCols(h * dh, dh).transpose();
        const Mat<T> ds = softmax_rows_backward<T>(a, da) * scale;
        dq.middleCols(h * dh, dh).noalias() = ds * c.kv.k.middleCols(h * dh, dh);
        dk.middleCols(h * dh, dh).noalias() = ds.transpose() * c.q.middleCols(h * dh, dh);
    }
    Mat<T> dq_in = wq_.backward(ps, c.q_in, dq);
    Mat<T> dkv_in = wk_.backward(ps, c.kv_in, dk);
    dkv_in += wv_.backward(ps, c.kv_in, dv);
    return {std::move(dq_in), std::move(dkv_in)};
}

template <class T> Mat<T> head_mean(const std::vector<Mat<T>> &probs) {
    if (probs.empty())
        throw std::invalid_argument("head_mean: no heads");
    Mat<T> m = probs.front();
    for (std::size_t i = 1; i < probs.size(); ++i)
        m += probs[i];
    return m / static_cast<T>(probs.size());
}

template class MultiHeadAttention<float>;
template class MultiHeadAttention<double>;
template Mat<float> head_mean<float>(const std::vector<Mat<float>> &);
template Mat<double> head_mean<double>(const std::vector<Mat<double>> &);

} // namespace mercury::seq2seq
