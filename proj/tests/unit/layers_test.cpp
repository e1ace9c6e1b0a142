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
#include "mercury/seq2seq/layers.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

namespace mercury::seq2seq {
namespace {

using oracle::max_fd_error;
using oracle::probe;
using oracle::random_matrix;
constexpr double kTol = 1e-4;

// Checks every parameter gradient accumulated in ps against finite
// differences of probe(forward(), r).
void expect_param_grads(ParameterSet<double> &ps, const std::function<Mat<double>()> &forward,
                        const Mat<double> &r) {
    for (auto &p : ps) {
        const Mat<double> g = p.grad;
        EXPECT_LT(max_fd_error([&] { return probe(forward(), r); }, p.value, g), kTol) << p.name;
    }
}

TEST(Linear, IdentityPassesThrough) {
    ParameterSet<double> ps;
    Rng rng(1);
    Linear<double> lin(ps, "l", 4, 4, rng);
    ps[lin.weight_index()].value = Mat<double>::Identity(4, 4);
    ps[lin.bias_index()].value.setZero();
    const Mat<double> x = random_matrix(3, 4, rng);
    EXPECT_EQ(lin.forward(ps, x), x);
}

TEST(Linear, Gradients) {
    ParameterSet<double> ps;
    Rng rng(2);
    Linear<double> lin(ps, "l", 5, 3, rng);
    Mat<double> x = random_matrix(4, 5, rng);
    const Mat<double> r = random_matrix(4, 3, rng);
    const Mat<double> dx = lin.backward(ps, x, r);
    auto fwd = [&] { return lin.forward(ps, x); };
    EXPECT_LT(max_fd_error([&] { return probe(fwd(), r); }, x, dx), kTol);
    expect_param_grads(ps, fwd, r);
    EXPECT_THROW(lin.forward(ps, random_matrix(4, 6, rng)), ShapeError);
}

TEST(Conv1d, Gradients) {
    ParameterSet<double> ps;
    Rng rng(3);
    const int B = 2, Tin = 11;
    Conv1d<double> conv(ps, "c", 3, 4, 3, 2, rng);
    EXPECT_EQ(conv.output_length(Tin), 5);
    Mat<double> x = random_matrix(Tin * B, 3, rng);
    typename Conv1d<double>::Cache cache;
    const Mat<double> y = conv.forward(ps, x, B, &cache);
    ASSERT_EQ(y.rows(), 5 * B);
    const Mat<double> r = random_matrix(y.rows(), y.cols(), rng);
    const Mat<double> dx = conv.backward(ps, cache, r);
    auto fwd = [&] { return conv.forward(ps, x, B, nullptr); };
    EXPECT_LT(max_fd_error([&] { return probe(fwd(), r); }, x, dx), kTol);
    expect_param_grads(ps, fwd, r);
}

TEST(LayerNorm, Gradients) {
    ParameterSet<double> ps;
    Rng rng(4);
    LayerNorm<double> ln(ps, "n", 6);
    ps[0].value = random_matrix(1, 6, rng);
    ps[1].value = random_matrix(1, 6, rng);
    Mat<double> x = random_matrix(5, 6, rng);
    typename LayerNorm<double>::Cache cache;
    const Mat<double> y = ln.forward(ps, x, &cache);
    const Mat<double> r = random_matrix(5, 6, rng);
    const Mat<double> dx = ln.backward(ps, cache, r);
    auto fwd = [&] { return ln.forward(ps, x, nullptr); };
    EXPECT_LT(max_fd_error([&] { return probe(fwd(), r); }, x, dx), kTol);
    expect_param_grads(ps, fwd, r);
}

class GruGrad : public ::testing::TestWithParam<bool> {};

TEST_P(GruGrad, Gradients) {
    ParameterSet<double> ps;
    Rng rng(5);
    const int B = 2, T = 5;
    Gru<double> gru(ps, "g", 3, 4, rng);
    Mat<double> x = random_matrix(T * B, 3, rng);
    typename Gru<double>::Cache cache;
    const Mat<double> y = gru.forward(ps, x, B, GetParam(), &cache);
    const Mat<double> r = random_matrix(y.rows(), y.cols(), rng);
    const Mat<double> dx = gru.backward(ps, cache, r);
    auto fwd = [&] { return gru.forward(ps, x, B, GetParam(), nullptr); };
    EXPECT_LT(max_fd_error([&] { return probe(fwd(), r); }, x, dx), kTol);
    expect_param_grads(ps, fwd, r);
}

INSTANTIATE_TEST_SUITE_P(Directions, GruGrad, ::testing::Values(false, true));

TEST(BiGru, Gradients) {
    ParameterSet<double> ps;
    Rng rng(6);
    const int B = 3, T = 4;
    BiGru<double> rnn(ps, "b", 2, 3, rng);
    Mat<double> x = random_matrix(T * B, 2, rng);
    typename BiGru<double>::Cache cache;
    const Mat<double> y = rnn.forward(ps, x, B, &cache);
    ASSERT_EQ(y.cols(), 6);
    const Mat<double> r = random_matrix(y.rows(), y.cols(), rng);
    const Mat<double> dx = rnn.backward(ps, cache, r);
    auto fwd = [&] { return rnn.forward(ps, x, B, nullptr); };
    EXPECT_LT(max_fd_error([&] { return probe(fwd(), r); }, x, dx), kTol);
    expect_param_grads(ps, fwd, r);
}

// Sequences in a batch never mix: perturbing one sequence leaves the
// other's output untouched.
TEST(BiGru, BatchEntriesIndependent) {
    ParameterSet<double> ps;
    Rng rng(7);
    BiGru<double> rnn(ps, "b", 2, 3, rng);
    Mat<double> x = random_matrix(6 * 2, 2, rng);
    const Mat<double> y0 = rnn.forward(ps, x, 2, nullptr);
    x(2 * 3 + 1, 0) += 1.0; // t = 3, b = 1
    const Mat<double> y1 = rnn.forward(ps, x, 2, nullptr);
    for (int t = 0; t < 6; ++t)
        EXPECT_EQ(y0.row(2 * t), y1.row(2 * t));
}

TEST(Embedding, Gradients) {
    ParameterSet<double> ps;
    Rng rng(8);
    Embedding<double> emb(ps, "e", 7, 4, rng);
    const std::vector<int> tokens{1, 3, 3, 6, 0};
    const Mat<double> r = random_matrix(5, 4, rng);
    emb.backward(ps, tokens, r);
    auto fwd = [&] { return emb.forward(ps, tokens); };
    expect_param_grads(ps, fwd, r);
    EXPECT_EQ(ps[0].grad.row(2).cwiseAbs().sum(), 0.0);
}

class AttentionGrad : public ::testing::TestWithParam<bool> {};

TEST_P(AttentionGrad, Gradients) {
    const bool causal = GetParam();
    ParameterSet<double> ps;
    Rng rng(9);
    MultiHeadAttention<double> att(ps, "a", 8, 2, rng);
    Mat<double> q = random_matrix(4, 8, rng);
    Mat<double> kv = random_matrix(causal ? 4 : 6, 8, rng);
    typename MultiHeadAttention<double>::Cache cache;
    const Mat<double> y = att.forward(ps, q, kv, causal, &cache);
    const Mat<double> r = random_matrix(y.rows(), y.cols(), rng);
    const auto [dq, dkv] = att.backward(ps, cache, r);
    auto fwd = [&] { return att.forward(ps, q, kv, causal, nullptr); };
    EXPECT_LT(max_fd_error([&] { return probe(fwd(), r); }, q, dq), kTol);
    EXPECT_LT(max_fd_error([&] { return probe(fwd(), r); }, kv, dkv), kTol);
    expect_param_grads(ps, fwd, r);

    for (const auto &p : cache.probs)
        for (Eigen::Index i = 0; i < p.rows(); ++i) {
            EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-9);
            if (causal) {
                for (Eigen::Index j = i + 1; j < p.cols(); ++j)
                    EXPECT_EQ(p(i, j), 0.0);
            }
        }
}

INSTANTIATE_TEST_SUITE_P(Masking, AttentionGrad, ::testing::Values(false, true));

TEST(Attention, CachedKeyValuesMatchDirectForward) {
    ParameterSet<double> ps;
    Rng rng(10);
    MultiHeadAttention<double> att(ps, "a", 8, 4, rng);
    const Mat<double> q = random_matrix(3, 8, rng), kv = random_matrix(5, 8, rng);
    const auto pre = att.project_kv(ps, kv);
    EXPECT_LT((att.forward(ps, q, kv, false, nullptr) - att.forward(ps, q, pre, false, nullptr))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-12);
}

TEST(Activations, SoftmaxRowsAndGradients) {
    Rng rng(11);
    Mat<double> x = random_matrix(4, 6, rng, 3.0);
    const Mat<double> y = softmax_rows(x);
    for (Eigen::Index i = 0; i < y.rows(); ++i)
        EXPECT_NEAR(y.row(i).sum(), 1.0, 1e-12);
    const Mat<double> r = random_matrix(4, 6, rng);
    EXPECT_LT(max_fd_error([&] { return probe(softmax_rows(x), r); }, x, softmax_rows_backward(y, r)), kTol);
    const Mat<double> ly = log_softmax_rows(x);
    for (Eigen::Index i = 0; i < ly.rows(); ++i)
        EXPECT_NEAR(std::log(ly.row(i).array().exp().sum()), 0.0, 1e-12);
    EXPECT_LT(max_fd_error([&] { return probe(log_softmax_rows(x), r); }, x, log_softmax_rows_backward(ly, r)),
              kTol);
    // Keep away from the kink for relu.
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (std::abs(x.data()[i]) < 1e-3)
            x.data()[i] = 0.5;
    EXPECT_LT(max_fd_error([&] { return probe(relu(x), r); }, x, relu_backward(x, r)), kTol);
}

TEST(PositionalEncoding, Formula) {
    const Mat<double> pe = positional_encoding<double>(10, 8);
    EXPECT_DOUBLE_EQ(pe(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(pe(0, 1), 1.0);
    EXPECT_NEAR(pe(3, 2), std::sin(3.0 / std::pow(10000.0, 2.0 / 8)), 1e-12);
    EXPECT_NEAR(pe(5, 5), std::cos(5.0 / std::pow(10000.0, 4.0 / 8)), 1e-12);
}

} // namespace
} // namespace mercury::seq2seq
