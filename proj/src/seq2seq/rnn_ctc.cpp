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

#include "mercury/seq2seq/rnn_ctc.hpp"

#include "mercury/seq2seq/ctc.hpp"

#include <algorithm>
#include <sstream>

namespace mercury::seq2seq {

void RnnCtcConfig::validate() const {
    if (n_conv_layers < 1 || n_conv_layers > static_cast<int>(conv_channels.size()))
        throw std::invalid_argument("rnn-ctc: n_conv_layers must be in [1, " +
                                    std::to_string(conv_channels.size()) + "]");
    if (rnn_dim <= 0 || n_rnn_layers <= 0)
        throw std::invalid_argument("rnn-ctc: rnn_dim and n_rnn_layers must be positive");
    if (blank < 0 || blank >= vocab)
        throw std::invalid_argument("rnn-ctc: blank outside vocabulary");
    if (conv_kernel <= 0 || conv_stride <= 0 || input_channels <= 0)
        throw std::invalid_argument("rnn-ctc: conv geometry must be positive");
    if (beam_width < 1)
        throw std::invalid_argument("rnn-ctc: beam_width must be at least 1");
    (void)output_length();
}

int RnnCtcConfig::output_length() const {
    int len = input_length;
    for (int i = 0; i < n_conv_layers; ++i) {
        if (len < conv_kernel)
            throw std::invalid_argument("rnn-ctc: input too short for conv stack");
        len = (len - conv_kernel) / conv_stride + 1;
    }
    return len;
}

std::int64_t parameter_count(const RnnCtcConfig &cfg) {
    std::int64_t n = 0;
    std::int64_t c = cfg.input_channels;
    for (int i = 0; i < cfg.n_conv_layers; ++i) {
        const std::int64_t co = cfg.conv_channels[static_cast<std::size_t>(i)];
        n += c * cfg.conv_kernel * co + co;
        c = co;
    }
    const std::int64_t h = cfg.rnn_dim;
    n += c * h + h;
    std::int64_t in = h;
    for (int l = 0; l < cfg.n_rnn_layers; ++l) {
        n += 2 * (3 * h * (in + h) + 6 * h);
        in = 2 * h;
    }
    n += 2 * h * h + h;
    n += h * cfg.vocab + cfg.vocab;
    return n;
}

template <class T>
RnnCtc<T>::RnnCtc(const RnnCtcConfig &cfg, std::uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    Rng rng = make_rng(seed, "init");
    int c = cfg_.input_channels;
    for (int i = 0; i < cfg_.n_conv_layers; ++i) {
        const int co = cfg_.conv_channels[static_cast<std::size_t>(i)];
        convs_.emplace_back(ps_, "conv" + std::to_string(i), c, co, cfg_.conv_kernel,
                            cfg_.conv_stride, rng);
        c = co;
    }
    proj_ = Linear<T>(ps_, "proj", c, cfg_.rnn_dim, rng);
    int in = cfg_.rnn_dim;
    for (int l = 0; l < cfg_.n_rnn_layers; ++l) {
        rnns_.emplace_back(ps_, "rnn" + std::to_string(l), in, cfg_.rnn_dim, rng);
        in = 2 * cfg_.rnn_dim;
    }
    hidden_ = Linear<T>(ps_, "hidden", in, cfg_.rnn_dim, rng);
    out_ = Linear<T>(ps_, "out", cfg_.rnn_dim, cfg_.vocab, rng);
}

template <class T> Mat<T> RnnCtc<T>::forward(const Mat<T> &x, int batch, Cache *cache) const {
    if (x.cols() != cfg_.input_channels || x.rows() != static_cast<Eigen::Index>(cfg_.input_length) * batch)
        throw ShapeError("rnn-ctc: input " + shape_str(x.rows(), x.cols()) + " vs " +
                         shape_str(static_cast<Eigen::Index>(cfg_.input_length) * batch,
                                   cfg_.input_channels));
    Cache local;
    Cache &c = cache ? *cache : local;
    const bool keep = cache != nullptr;
    c.batch = batch;
    c.conv.assign(convs_.size(), {});
    c.conv_out.assign(convs_.size(), {});
    c.rnn.assign(rnns_.size(), {});

    Mat<T> h = x;
    for (std::size_t i = 0; i < convs_.size(); ++i) {
        Mat<T> pre = convs_[i].forward(ps_, h, batch, keep ? &c.conv[i] : nullptr);
        h = relu<T>(pre);
        if (keep)
            c.conv_out[i] = std::move(pre);
    }
    Mat<T> p = proj_.forward(ps_, h);
    if (keep) {
        c.proj_in = std::move(h);
        c.proj_out = p;
    }
    h = relu<T>(p);
    for (std::size_t l = 0; l < rnns_.size(); ++l)
        h = rnns_[l].forward(ps_, h, batch, keep ? &c.rnn[l] : nullptr);
    Mat<T> hp = hidden_.forward(ps_, h);
    Mat<T> ha = relu<T>(hp);
    Mat<T> logits = out_.forward(ps_, ha);
    Mat<T> lp = log_softmax_rows<T>(logits);
    if (keep) {
        c.head_in = std::move(h);
        c.hidden_pre = std::move(hp);
        c.hidden = std::move(ha);
        c.log_probs = lp;
    }
    return lp;
}

template <class T> Mat<T> RnnCtc<T>::backward(const Cache &c, const Mat<T> &d_log_probs) {
    Mat<T> d = log_softmax_rows_backward<T>(c.log_probs, d_log_probs);
    d = out_.backward(ps_, c.hidden, d);
    d = relu_backward<T>(c.hidden_pre, d);
    d = hidden_.backward(ps_, c.head_in, d);
    for (std::size_t l = rnns_.size(); l-- > 0;)
        d = rnns_[l].backward(ps_, c.rnn[l], d);
    d = relu_backward<T>(c.proj_out, d);
    d = proj_.backward(ps_, c.proj_in, d);
    for (std::size_t i = convs_.size(); i-- > 0;) {
        d = relu_backward<T>(c.conv_out[i], d);
        d = convs_[i].backward(ps_, c.conv[i], d);
    }
    return d;
}

template <class T> Mat<double> RnnCtc<T>::log_probs(const Eigen::MatrixXd &x) const {
    const LabelSeq none;
    const Example ex{&x, &none};
    return forward(pack_time_major<T>(std::span<const Example>(&ex, 1)), 1, nullptr).template cast<double>();
}

template <class T> double RnnCtc<T>::loss(std::span<const Example> batch, bool accumulate) {
    const int B = static_cast<int>(batch.size());
    Cache cache;
    const Mat<T> lp = forward(pack_time_major<T>(batch), B, accumulate ? &cache : nullptr);
    const int steps = static_cast<int>(lp.rows() / B);
    Mat<T> d_lp = Mat<T>::Zero(lp.rows(), lp.cols());
    double total = 0.0;
    for (int b = 0; b < B; ++b) {
        Mat<double> sample(steps, lp.cols());
        for (int t = 0; t < steps; ++t)
            sample.row(t) = lp.row(t * B + b).template cast<double>();
        const LabelSeq &y = *batch[static_cast<std::size_t>(b)].labels;
        const CtcResult r = ctc_loss(sample, y, cfg_.blank);
        const double norm = static_cast<double>(std::max<std::size_t>(1, y.size())) * B;
        total += r.loss / norm;
        if (accumulate)
            for (int t = 0; t < steps; ++t)
                d_lp.row(t * B + b) = (r.grad.row(t) / norm).template cast<T>();
    }
    if (accumulate)
        backward(cache, d_lp);
    return total;
}

template <class T> LabelSeq RnnCtc<T>::predict(const Eigen::MatrixXd &x) const {
    return ctc_beam_decode(log_probs(x), cfg_.beam_width, cfg_.blank);
}

template <class T>
std::vector<LabelSeq> RnnCtc<T>::predict_batch(std::span<const Example> batch) const {
    std::vector<LabelSeq> out;
    if (batch.empty())
        return out;
    const int B = static_cast<int>(batch.size());
    const Mat<T> lp = forward(pack_time_major<T>(batch), B, nullptr);
    const int steps = static_cast<int>(lp.rows() / B);
    for (int b = 0; b < B; ++b) {
        Mat<double> sample(steps, lp.cols());
        for (int t = 0; t < steps; ++t)
            sample.row(t) = lp.row(t * B + b).template cast<double>();
        out.push_back(ctc_beam_decode(sample, cfg_.beam_width, cfg_.blank));
    }
    return out;
}

template <class T> std::string RnnCtc<T>::config_text() const {
    std::ostringstream os;
    os << "model = rnn-ctc\n"
       << "n_conv_layers = " << cfg_.n_conv_layers << "\n"
       << "rnn_dim = " << cfg_.rnn_dim << "\n"
       << "n_rnn_layers = " << cfg_.n_rnn_layers << "\n"
       << "vocab = " << cfg_.vocab << "\n"
       << "blank = " << cfg_.blank << "\n"
       << "input_channels = " << cfg_.input_channels << "\n"
       << "input_length = " << cfg_.input_length << "\n"
       << "conv_kernel = " << cfg_.conv_kernel << "\n"
       << "conv_stride = " << cfg_.conv_stride << "\n"
       << "conv_channels = ";
    for (std::size_t i = 0; i < cfg_.conv_channels.size(); ++i)
        os << (i ? "," : "") << cfg_.conv_channels[i];
    os << "\nbeam_width = " << cfg_.beam_width << "\n";
    return os.str();
}

template class RnnCtc<float>;
template class RnnCtc<double>;

} // namespace mercury::seq2seq
