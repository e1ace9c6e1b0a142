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

#include "mercury/rng.hpp"
#include "mercury/seq2seq/tensor.hpp"

#include <span>
#include <string>

namespace mercury::seq2seq {

// Every layer keeps parameter indices into a ParameterSet it does not own.
// forward() fills an optional cache; backward() accumulates parameter
// gradients into the set and returns the gradient w.r.t. the input.

template <class T> Mat<T> uniform_init(Eigen::Index rows, Eigen::Index cols, double bound, Rng &rng);

template <class T> class Linear {
  public:
    Linear() = default;
    Linear(ParameterSet<T> &ps, const std::string &name, int in, int out, Rng &rng,
           bool bias = true);

    /// x: N x in -> N x out.
    Mat<T> forward(const ParameterSet<T> &ps, const Mat<T> &x) const;
    Mat<T> backward(ParameterSet<T> &ps, const Mat<T> &x, const Mat<T> &dy) const;

    int in_features() const { return in_; }
    int out_features() const { return out_; }
    int weight_index() const { return w_; }
    int bias_index() const { return b_; }

  private:
    int in_ = 0, out_ = 0;
    int w_ = -1, b_ = -1;
};

/// 1-D convolution over time-major batches, no padding.
template <class T> class Conv1d {
  public:
    struct Cache {
        Mat<T> columns; // (T_out*B) x (K*C_in)
        int batch = 1;
        int in_len = 0;
    };

    Conv1d() = default;
    Conv1d(ParameterSet<T> &ps, const std::string &name, int in_channels, int out_channels,
           int kernel, int stride, Rng &rng);

    int output_length(int in_len) const;

    /// x: (T_in*B) x C_in -> (T_out*B) x C_out.
    Mat<T> forward(const ParameterSet<T> &ps, const Mat<T> &x, int batch, Cache *cache) const;
    Mat<T> backward(ParameterSet<T> &ps, const Cache &cache, const Mat<T> &dy) const;

    int in_channels() const { return in_ch_; }
    int out_channels() const { return out_ch_; }
    int kernel() const { return kernel_; }
    int stride() const { return stride_; }

  private:
    int in_ch_ = 0, out_ch_ = 0, kernel_ = 1, stride_ = 1;
    int w_ = -1, b_ = -1;
};

/// Per-row normalization over the feature dimension with gain and bias.
template <class T> class LayerNorm {
  public:
    struct Cache {
        Mat<T> xhat;
        Eigen::Matrix<T, Eigen::Dynamic, 1> inv_std;
    };

    LayerNorm() = default;
    LayerNorm(ParameterSet<T> &ps, const std::string &name, int dim, double eps = 1e-5);

    Mat<T> forward(const ParameterSet<T> &ps, const Mat<T> &x, Cache *cache) const;
    Mat<T> backward(ParameterSet<T> &ps, const Cache &cache, const Mat<T> &dy) const;

  private:
    int dim_ = 0;
    double eps_ = 1e-5;
    int gamma_ = -1, beta_ = -1;
};

/// Single-direction GRU (gate order r, z, n) over a time-major batch.
///   r = s(x Wir + bir + h Whr + bhr), z = s(x Wiz + biz + h Whz + bhz)
///   n = tanh(x Win + bin + r*(h Whn + bhn)), h' = (1-z)*n + z*h
template <class T> class Gru {
  public:
    struct Cache {
        Mat<T> x;
        Mat<T> r, z, n, hn, h; // all (T*B) x H; hn = h_prev Whn + bhn
        int batch = 1;
        bool reverse = false;
    };

    Gru() = default;
    Gru(ParameterSet<T> &ps, const std::string &name, int in, int hidden, Rng &rng);

    Mat<T> forward(const ParameterSet<T> &ps, const Mat<T> &x, int batch, bool reverse,
                   Cache *cache) const;
    Mat<T> backward(ParameterSet<T> &ps, const Cache &cache, const Mat<T> &dy) const;

    int hidden() const { return hidden_; }

  private:
    int in_ = 0, hidden_ = 0;
    int w_ih_ = -1, w_hh_ = -1, b_ih_ = -1, b_hh_ = -1;
};

/// Forward and reverse GRU with concatenated [forward, reverse] outputs.
template <class T> class BiGru {
  public:
    struct Cache {
        typename Gru<T>::Cache fwd, bwd;
    };

    BiGru() = default;
    BiGru(ParameterSet<T> &ps, const std::string &name, int in, int hidden, Rng &rng);

    Mat<T> forward(const ParameterSet<T> &ps, const Mat<T> &x, int batch, Cache *cache) const;
    Mat<T> backward(ParameterSet<T> &ps, const Cache &cache, const Mat<T> &dy) const;

    int hidden() const { return fwd_.hidden(); }

  private:
    Gru<T> fwd_, bwd_;
};

template <class T> class Embedding {
  public:
    Embedding() = default;
    Embedding(ParameterSet<T> &ps, const std::string &name, int vocab, int dim, Rng &rng);

    Mat<T> forward(const ParameterSet<T> &ps, std::span<const int> tokens) const;
    void backward(ParameterSet<T> &ps, std::span<const int> tokens, const Mat<T> &dy) const;

    int table_index() const { return table_; }
    int vocab() const { return vocab_; }

  private:
    int vocab_ = 0, dim_ = 0;
    int table_ = -1;
};

/// Sinusoidal position table: PE(p, 2i) = sin(p / 10000^(2i/d)),
/// PE(p, 2i+1) = cos(p / 10000^(2i/d)). Added to activations, so its
/// backward pass is the identity.
template <class T> Mat<T> positional_encoding(int length, int dim);

template <class T> Mat<T> relu(const Mat<T> &x);
/// Gradient of relu given its input x.
template <class T> Mat<T> relu_backward(const Mat<T> &x, const Mat<T> &dy);

template <class T> Mat<T> softmax_rows(const Mat<T> &x);
/// Gradient of a row softmax given its output y.
template <class T> Mat<T> softmax_rows_backward(const Mat<T> &y, const Mat<T> &dy);

template <class T> Mat<T> log_softmax_rows(const Mat<T> &x);
/// Gradient of a row log-softmax given its output y.
template <class T> Mat<T> log_softmax_rows_backward(const Mat<T> &y, const Mat<T> &dy);

} // namespace mercury::seq2seq
