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

#include "mercury/seq2seq/layers.hpp"

#include <cmath>

namespace mercury::seq2seq {

std::string shape_str(Eigen::Index rows, Eigen::Index cols) {
    return "[" + std::to_string(rows) + " x " + std::to_string(cols) + "]";
}

template <class T> Mat<T> uniform_init(Eigen::Index rows, Eigen::Index cols, double bound, Rng &rng) {
    std::uniform_real_distribution<double> u(-bound, bound);
    Mat<T> m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i)
        m.data()[i] = static_cast<T>(u(rng));
    return m;
}

namespace {

template <class T> auto sigmoid(const Mat<T> &x) {
    return (T(1) / (T(1) + (-x.array()).exp())).matrix();
}

template <class T> void check_batch(const Mat<T> &x, int batch, const char *what) {
    if (batch <= 0 || x.rows() % batch != 0)
        throw ShapeError(std::string(what) + ": " + std::to_string(x.rows()) +
                         " rows do not split into batch " + std::to_string(batch));
}

} // namespace

// ---------------------------------------------------------------------------
// Linear

template <class T>
Linear<T>::Linear(ParameterSet<T> &ps, const std::string &name, int in, int out, Rng &rng,
                  bool bias)
    : in_(in), out_(out) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    w_ = ps.add(name + ".weight", uniform_init<T>(in, out, bound, rng));
    if (bias)
        b_ = ps.add(name + ".bias", uniform_init<T>(1, out, bound, rng));
}

template <class T> Mat<T> Linear<T>::forward(const ParameterSet<T> &ps, const Mat<T> &x) const {
    if (x.cols() != in_)
        throw ShapeError("linear: input " + shape_str(x.rows(), x.cols()) + " vs weight " +
                         shape_str(in_, out_));
    Mat<T> y = x * ps.value(w_);
    if (b_ >= 0)
        y.rowwise() += ps.value(b_).row(0);
    return y;
}

template <class T>
Mat<T> Linear<T>::backward(ParameterSet<T> &ps, const Mat<T> &x, const Mat<T> &dy) const {
    require_shape(dy, x.rows(), out_, "linear backward");
    ps.grad(w_).noalias() += x.transpose() * dy;
    if (b_ >= 0)
        ps.grad(b_) += dy.colwise().sum();
    return dy * ps.value(w_).transpose();
}

// ---------------------------------------------------------------------------
// Conv1d

template <class T>
Conv1d<T>::Conv1d(ParameterSet<T> &ps, const std::string &name, int in_channels,
                  int out_channels, int kernel, int stride, Rng &rng)
    : in_ch_(in_channels), out_ch_(out_channels), kernel_(kernel), stride_(stride) {
    if (kernel <= 0 || stride <= 0)
        throw std::invalid_argument("conv1d: kernel and stride must be positive");
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_channels * kernel));
    w_ = ps.add(name + ".weight", uniform_init<T>(kernel * in_channels, out_channels, bound, rng));
    b_ = ps.add(name + ".bias", uniform_init<T>(1, out_channels, bound, rng));
}

template <class T> int Conv1d<T>::output_length(int in_len) const {
    if (in_len < kernel_)
        throw ShapeError("conv1d: input length " + std::to_string(in_len) + " shorter than kernel " +
                         std::to_string(kernel_));
    return (in_len - kernel_) / stride_ + 1;
}

template <class T>
Mat<T> Conv1d<T>::forward(const ParameterSet<T> &ps, const Mat<T> &x, int batch,
                          Cache *cache) const {
    check_batch(x, batch, "conv1d");
    if (x.cols() != in_ch_)
        throw ShapeError("conv1d: input " + shape_str(x.rows(), x.cols()) + " vs " +
                         std::to_string(in_ch_) + " channels");
    const int in_len = static_cast<int>(x.rows() / batch);
    const int out_len = output_length(in_len);
    Mat<T> cols(static_cast<Eigen::Index>(out_len) * batch, kernel_ * in_ch_);
    for (int t = 0; t < out_len; ++t)
        for (int k = 0; k < kernel_; ++k)
            cols.block(t * batch, k * in_ch_, batch, in_ch_) =
                x.block((t * stride_ + k) * batch, 0, batch, in_ch_);
    Mat<T> y = cols * ps.value(w_);
    y.rowwise() += ps.value(b_).row(0);
    if (cache) {
        cache->columns = std::move(cols);
        cache->batch = batch;
        cache->in_len = in_len;
    }
    return y;
}

template <class T>
Mat<T> Conv1d<T>::backward(ParameterSet<T> &ps, const Cache &c, const Mat<T> &dy) const {
    require_shape(dy, c.columns.rows(), out_ch_, "conv1d backward");
    ps.grad(w_).noalias() += c.columns.transpose() * dy;
    ps.grad(b_) += dy.colwise().sum();
    const Mat<T> dcols = dy * ps.value(w_).transpose();
    const int out_len = static_cast<int>(c.columns.rows() / c.batch);
    Mat<T> dx = Mat<T>::Zero(static_cast<Eigen::Index>(c.in_len) * c.batch, in_ch_);
    for (int t = 0; t < out_len; ++t)
        for (int k = 0; k < kernel_; ++k)
            dx.block((t * stride_ + k) * c.batch, 0, c.batch, in_ch_) +=
                dcols.block(t * c.batch, k * in_ch_, c.batch, in_ch_);
    return dx;
}

// ---------------------------------------------------------------------------
// LayerNorm

template <class T>
LayerNorm<T>::LayerNorm(ParameterSet<T> &ps, const std::string &name, int dim, double eps)
    : dim_(dim), eps_(eps) {
    gamma_ = ps.add(name + ".gamma", Mat<T>::Ones(1, dim));
    beta_ = ps.add(name + ".beta", Mat<T>::Zero(1, dim));
}

template <class T>
Mat<T> LayerNorm<T>::forward(const ParameterSet<T> &ps, const Mat<T> &x, Cache *cache) const {
    if (x.cols() != dim_)
        throw ShapeError("layer_norm: input " + shape_str(x.rows(), x.cols()) + " vs dim " +
                         std::to_string(dim_));
    const T n = static_cast<T>(dim_);
    Mat<T> xhat(x.rows(), x.cols());
    Eigen::Matrix<T, Eigen::Dynamic, 1> inv_std(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const T mean = x.row(i).sum() / n;
        const auto centered = (x.row(i).array() - mean).eval();
        const T var = centered.square().sum() / n;
        inv_std(i) = T(1) / std::sqrt(var + static_cast<T>(eps_));
        xhat.row(i) = centered * inv_std(i);
    }
    Mat<T> y = (xhat.array().rowwise() * ps.value(gamma_).row(0).array()).matrix();
    y.rowwise() += ps.value(beta_).row(0);
    if (cache) {
        cache->xhat = std::move(xhat);
        cache->inv_std = std::move(inv_std);
    }
    return y;
}

template <class T>
Mat<T> LayerNorm<T>::backward(ParameterSet<T> &ps, const Cache &c, const Mat<T> &dy) const {
    require_shape(dy, c.xhat.rows(), dim_, "layer_norm backward");
    ps.grad(gamma_) += dy.cwiseProduct(c.xhat).colwise().sum();
    ps.grad(beta_) += dy.colwise().sum();
    const Mat<T> dxhat = (dy.array().rowwise() * ps.value(gamma_).row(0).array()).matrix();
    const T n = static_cast<T>(dim_);
    Mat<T> dx(dy.rows(), dy.cols());
    for (Eigen::Index i = 0; i < dy.rows(); ++i) {
        const T s1 = dxhat.row(i).sum();
        const T s2 = dxhat.row(i).dot(c.xhat.row(i));
        dx.row(i) = (c.inv_std(i) / n) *
                    (n * dxhat.row(i).array() - s1 - c.xhat.row(i).array() * s2).matrix();
    }
    return dx;
}

// ---------------------------------------------------------------------------
// GRU

template <class T>
Gru<T>::Gru(ParameterSet<T> &ps, const std::string &name, int in, int hidden, Rng &rng)
    : in_(in), hidden_(hidden) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    w_ih_ = ps.add(name + ".w_ih", uniform_init<T>(in, 3 * hidden, bound, rng));
    w_hh_ = ps.add(name + ".w_hh", uniform_init<T>(hidden, 3 * hidden, bound, rng));
    b_ih_ = ps.add(name + ".b_ih", uniform_init<T>(1, 3 * hidden, bound, rng));
    b_hh_ = ps.add(name + ".b_hh", uniform_init<T>(1, 3 * hidden, bound, rng));
}

template <class T>
Mat<T> Gru<T>::forward(const ParameterSet<T> &ps, const Mat<T> &x, int batch, bool reverse,
                       Cache *cache) const {
    check_batch(x, batch, "gru");
    if (x.cols() != in_)
        throw ShapeError("gru: input " + shape_str(x.rows(), x.cols()) + " vs " +
                         std::to_string(in_) + " features");
    const int H = hidden_;
    const int B = batch;
    const int steps = static_cast<int>(x.rows() / B);
    const auto &w_hh = ps.value(w_hh_);
    const auto b_hh = ps.value(b_hh_).row(0);

    Mat<T> xp = x * ps.value(w_ih_);
    xp.rowwise() += ps.value(b_ih_).row(0);

    Mat<T> out(x.rows(), H);
    Mat<T> r_all, z_all, n_all, hn_all;
    if (cache) {
        r_all.resize(x.rows(), H);
        z_all.resize(x.rows(), H);
        n_all.resize(x.rows(), H);
        hn_all.resize(x.rows(), H);
    }
    Mat<T> h = Mat<T>::Zero(B, H);
    Mat<T> hp(B, 3 * H);
    for (int s = 0; s < steps; ++s) {
        const int t = reverse ? steps - 1 - s : s;
        hp.noalias() = h * w_hh;
        hp.rowwise() += b_hh;
        const auto xblk = xp.middleRows(t * B, B);
        const Mat<T> r = sigmoid<T>(xblk.leftCols(H) + hp.leftCols(H));
        const Mat<T> z = sigmoid<T>(xblk.middleCols(H, H) + hp.middleCols(H, H));
        const Mat<T> hn = hp.rightCols(H);
        const Mat<T> n = (xblk.rightCols(H).array() + r.array() * hn.array()).tanh().matrix();
        h = ((T(1) - z.array()) * n.array() + z.array() * h.array()).matrix();
        out.middleRows(t * B, B) = h;
        if (cache) {
            r_all.middleRows(t * B, B) = r;
            z_all.middleRows(t * B, B) = z;
            n_all.middleRows(t * B, B) = n;
            hn_all.middleRows(t * B, B) = hn;
        }
    }
    if (cache) {
        cache->x = x;
        cache->r = std::move(r_all);
        cache->z = std::move(z_all);
        cache->n = std::move(n_all);
        cache->hn = std::move(hn_all);
        cache->h = out;
        cache->batch = B;
        cache->reverse = reverse;
    }
    return out;
}

template <class T>
Mat<T> Gru<T>::backward(ParameterSet<T> &ps, const Cache &c, const Mat<T> &dy) const {
    require_shape(dy, c.h.rows(), hidden_, "gru backward");
    const int H = hidden_;
    const int B = c.batch;
    const int steps = static_cast<int>(c.h.rows() / B);
    const auto &w_hh = ps.value(w_hh_);

    Mat<T> dxp(c.h.rows(), 3 * H);
    Mat<T> dhp(c.h.rows(), 3 * H);
    Mat<T> h_prev_all(c.h.rows(), H);
    Mat<T> dh = Mat<T>::Zero(B, H);
    for (int s = steps - 1; s >= 0; --s) {
        const int t = c.reverse ? steps - 1 - s : s;
        const int tp = c.reverse ? t + 1 : t - 1;
        const Mat<T> h_prev = s == 0 ? Mat<T>::Zero(B, H) : Mat<T>(c.h.middleRows(tp * B, B));
        dh += dy.middleRows(t * B, B);

        const auto r = c.r.middleRows(t * B, B).array();
        const auto z = c.z.middleRows(t * B, B).array();
        const auto n = c.n.middleRows(t * B, B).array();
        const auto hn = c.hn.middleRows(t * B, B).array();

        const auto dha = dh.array();
        const auto dn_pre = (dha * (T(1) - z) * (T(1) - n * n)).eval();
        const auto dz_pre = (dha * (h_prev.array() - n) * z * (T(1) - z)).eval();
        const auto dr_pre = (dn_pre * hn * r * (T(1) - r)).eval();

        dxp.block(t * B, 0, B, H) = dr_pre.matrix();
        dxp.block(t * B, H, B, H) = dz_pre.matrix();
        dxp.block(t * B, 2 * H, B, H) = dn_pre.matrix();
        dhp.block(t * B, 0, B, H) = dr_pre.matrix();
        dhp.block(t * B, H, B, H) = dz_pre.matrix();
        dhp.block(t * B, 2 * H, B, H) = (dn_pre * r).matrix();
        h_prev_all.middleRows(t * B, B) = h_prev;

        Mat<T> next = (dha * z).matrix();
        next.noalias() += dhp.middleRows(t * B, B) * w_hh.transpose();
        dh = std::move(next);
    }
    ps.grad(w_hh_).noalias() += h_prev_all.transpose() * dhp;
    ps.grad(b_hh_) += dhp.colwise().sum();
    ps.grad(w_ih_).noalias() += c.x.transpose() * dxp;
    ps.grad(b_ih_) += dxp.colwise().sum();
    return dxp * ps.value(w_ih_).transpose();
}

template <class T>
BiGru<T>::BiGru(ParameterSet<T> &ps, const std::string &name, int in, int hidden, Rng &rng)
    : fwd_(ps, name + ".fwd", in, hidden, rng), bwd_(ps, name + ".bwd", in, hidden, rng) {}

template <class T>
Mat<T> BiGru<T>::forward(const ParameterSet<T> &ps, const Mat<T> &x, int batch,
                         Cache *cache) const {
    const int H = fwd_.hidden();
    Mat<T> out(x.rows(), 2 * H);
    out.leftCols(H) = fwd_.forward(ps, x, batch, false, cache ? &cache->fwd : nullptr);
    out.rightCols(H) = bwd_.forward(ps, x, batch, true, cache ? &cache->bwd : nullptr);
    return out;
}

template <class T>
Mat<T> BiGru<T>::backward(ParameterSet<T> &ps, const Cache &c, const Mat<T> &dy) const {
    const int H = fwd_.hidden();
    require_shape(dy, c.fwd.h.rows(), 2 * H, "bigru backward");
    Mat<T> dx = fwd_.backward(ps, c.fwd, dy.leftCols(H));
    dx += bwd_.backward(ps, c.bwd, dy.rightCols(H));
    return dx;
}

// ---------------------------------------------------------------------------
// Embedding and positions

template <class T>
Embedding<T>::Embedding(ParameterSet<T> &ps, const std::string &name, int vocab, int dim,
                        Rng &rng)
    : vocab_(vocab), dim_(dim) {
    table_ = ps.add(name + ".table", uniform_init<T>(vocab, dim, 1.0 / std::sqrt(double(dim)), rng));
}

template <class T>
Mat<T> Embedding<T>::forward(const ParameterSet<T> &ps, std::span<const int> tokens) const {
    const auto &table = ps.value(table_);
    Mat<T> out(static_cast<Eigen::Index>(tokens.size()), dim_);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i] < 0 || tokens[i] >= vocab_)
            throw ShapeError("embedding: token " + std::to_string(tokens[i]) +
                             " outside vocabulary of " + std::to_string(vocab_));
        out.row(static_cast<Eigen::Index>(i)) = table.row(tokens[i]);
    }
    return out;
}

template <class T>
void Embedding<T>::backward(ParameterSet<T> &ps, std::span<const int> tokens,
                            const Mat<T> &dy) const {
    require_shape(dy, static_cast<Eigen::Index>(tokens.size()), dim_, "embedding backward");
    auto &g = ps.grad(table_);
    for (std::size_t i = 0; i < tokens.size(); ++i)
        g.row(tokens[i]) += dy.row(static_cast<Eigen::Index>(i));
}

template <class T> Mat<T> positional_encoding(int length, int dim) {
    Mat<T> pe(length, dim);
    for (int p = 0; p < length; ++p) {
        for (int i = 0; i < dim; i += 2) {
            const double angle = p / std::pow(10000.0, static_cast<double>(i) / dim);
            pe(p, i) = static_cast<T>(std::sin(angle));
            if (i + 1 < dim)
                pe(p, i + 1) = static_cast<T>(std::cos(angle));
        }
    }
    return pe;
}

// ---------------------------------------------------------------------------
// Elementwise

template <class T> Mat<T> relu(const Mat<T> &x) { return x.cwiseMax(T(0)); }

template <class T> Mat<T> relu_backward(const Mat<T> &x, const Mat<T> &dy) {
    return (x.array() > T(0)).select(dy.array(), T(0)).matrix();
}

template <class T> Mat<T> softmax_rows(const Mat<T> &x) {
    Mat<T> y(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const T m = x.row(i).maxCoeff();
        y.row(i) = (x.row(i).array() - m).exp();
        y.row(i) /= y.row(i).sum();
    }
    return y;
}

template <class T> Mat<T> softmax_rows_backward(const Mat<T> &y, const Mat<T> &dy) {
    const Eigen::Matrix<T, Eigen::Dynamic, 1> dots = y.cwiseProduct(dy).rowwise().sum();
    return (y.array() * (dy.array().colwise() - dots.array())).matrix();
}

template <class T> Mat<T> log_softmax_rows(const Mat<T> &x) {
    Mat<T> y(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const T m = x.row(i).maxCoeff();
        const T lse = m + std::log((x.row(i).array() - m).exp().sum());
        y.row(i) = x.row(i).array() - lse;
    }
    return y;
}

template <class T> Mat<T> log_softmax_rows_backward(const Mat<T> &y, const Mat<T> &dy) {
    const Eigen::Matrix<T, Eigen::Dynamic, 1> sums = dy.rowwise().sum();
    return dy - (y.array().exp().colwise() * sums.array()).matrix();
}

#define MERCURY_INSTANTIATE(T)                                                               \
    template Mat<T> uniform_init<T>(Eigen::Index, Eigen::Index, double, Rng &);               \
    template class Linear<T>;                                                                \
    template class Conv1d<T>;                                                                \
    template class LayerNorm<T>;                                                             \
    template class Gru<T>;                                                                   \
    template class BiGru<T>;                                                                 \
    template class Embedding<T>;                                                             \
    template Mat<T> positional_encoding<T>(int, int);                                        \
    template Mat<T> relu<T>(const Mat<T> &);                                                 \
    template Mat<T> relu_backward<T>(const Mat<T> &, const Mat<T> &);                        \
    template Mat<T> softmax_rows<T>(const Mat<T> &);                                         \
    template Mat<T> softmax_rows_backward<T>(const Mat<T> &, const Mat<T> &);                \
    template Mat<T> log_softmax_rows<T>(const Mat<T> &);                                     \
    template Mat<T> log_softmax_rows_backward<T>(const Mat<T> &, const Mat<T> &);

MERCURY_INSTANTIATE(float)
MERCURY_INSTANTIATE(double)

#undef MERCURY_INSTANTIATE

} // namespace mercury::seq2seq
