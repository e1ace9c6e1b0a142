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

#include "mercury/eval.hpp"
#include "mercury/metrics.hpp"
#include "mercury/seq2seq/rnn_ctc.hpp"
#include "mercury/seq2seq/transformer.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

namespace mercury {
namespace {

TEST(Levenshtein, Examples) {
    EXPECT_EQ(levenshtein(LabelSeq{}, LabelSeq{9, 13, 12}), 3);
    const LabelSeq x{4, 1, 1, 7};
    EXPECT_EQ(levenshtein(x, x), 0);
    EXPECT_EQ(levenshtein(LabelSeq{1, 2, 3}, LabelSeq{2, 3, 4}), 2);
}

TEST(Levenshtein, MatchesNaiveRecursionOnAllShortPairs) {
    const auto seqs = oracle::all_sequences(6, 3);
    // Every pair of lengths <= 6 over 3 symbols; sampled stride keeps the
    // naive recursion affordable while touching every length combination.
    for (std::size_t i = 0; i < seqs.size(); i += 7)
        for (std::size_t j = 0; j < seqs.size(); j += 11)
            ASSERT_EQ(levenshtein(seqs[i], seqs[j]), oracle::levenshtein_naive(seqs[i], seqs[j]));
}

TEST(Levenshtein, MetricProperties) {
    Rng rng(5);
    std::uniform_int_distribution<int> len(0, 8), sym(0, 4);
    auto draw = [&] {
        LabelSeq s(static_cast<std::size_t>(len(rng)));
        for (auto &v : s)
            v = sym(rng);
        return s;
    };
    for (int k = 0; k < 2000; ++k) {
        const LabelSeq a = draw(), b = draw(), c = draw();
        EXPECT_EQ(levenshtein(a, b), levenshtein(b, a));
        EXPECT_LE(levenshtein(a, c), levenshtein(a, b) + levenshtein(b, c));
        // Relabeling both sides with the same bijection keeps OER.
        if (!b.empty()) {
            auto relabel = [](LabelSeq s) {
                for (auto &v : s)
                    v = (v * 3 + 1) % 5;
                return s;
            };
            EXPECT_DOUBLE_EQ(oer(a, b), oer(relabel(a), relabel(b)));
        }
    }
}

TEST(Oer, Examples) {
    EXPECT_DOUBLE_EQ(oer(LabelSeq{9, 13}, LabelSeq{9, 13}), 0.0);
    EXPECT_DOUBLE_EQ(oer(LabelSeq{9}, LabelSeq{9, 13}), 0.5);
    EXPECT_DOUBLE_EQ(oer(LabelSeq{1, 2, 3, 4}, LabelSeq{9}), 4.0);
    EXPECT_THROW(oer(LabelSeq{9}, LabelSeq{}), std::invalid_argument);
}

TEST(Noise, PowerFormula) {
    EXPECT_DOUBLE_EQ(noise_power(1.0, 10.0), 0.1);
    EXPECT_DOUBLE_EQ(noise_power(2.5, 0.0), 2.5);
    EXPECT_EQ(noise_power(2.5, kNoNoise), 0.0);
    const std::vector<double> x{1, -1, 3};
    EXPECT_DOUBLE_EQ(signal_power(x), 11.0 / 3.0);
}

TEST(Noise, InfiniteSnrIsBitExact) {
    Rng rng(1);
    std::vector<double> x(1000);
    for (auto &v : x)
        v = std::normal_distribution<double>()(rng);
    Rng a(2), b(2);
    EXPECT_EQ(add_noise(x, kNoNoise, a), x);
    EXPECT_EQ(a, b); // nothing drawn
}

TEST(Noise, EmpiricalPowerNearTarget) {
    std::vector<double> x(1000000);
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = std::sin(0.001 * static_cast<double>(i)) + 0.5;
    Rng rng(3);
    const auto y = add_noise(x, 20.0, rng);
    double pn = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        pn += (y[i] - x[i]) * (y[i] - x[i]);
    pn /= static_cast<double>(x.size());
    const double target = noise_power(signal_power(x), 20.0);
    EXPECT_NEAR(pn, target, 0.05 * target);
    Rng r1(4), r2(4);
    EXPECT_EQ(add_noise(x, 10.0, r1), add_noise(x, 10.0, r2));
}

TEST(Windows, MassIsPreserved) {
    Rng rng(6);
    Eigen::MatrixXd a(4, 124);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            a(i, j) = std::uniform_real_distribution<double>(0, 1)(rng);
        a.row(i) /= a.row(i).sum();
    }
    const Eigen::MatrixXd r = window_average(a, 25);
    EXPECT_EQ(r.cols(), 5);
    for (Eigen::Index i = 0; i < r.rows(); ++i)
        EXPECT_NEAR(r.row(i).sum(), 1.0, 1e-6);
    EXPECT_NEAR(r(1, 4), a.row(1).tail(24).sum(), 1e-12);
    EXPECT_EQ(window_average(a, 200).cols(), 1);
    EXPECT_THROW(window_average(a, 0), std::invalid_argument);
}

TEST(Windows, BackProjectionCoversReceptiveField) {
    // Encoder steps 0..24 with kernel 8 / stride 8 read reduced steps
    // [0, 200) of each row.
    const auto iv = window_to_raw(0, 25, 8, 8, 124);
    ASSERT_EQ(iv.size(), 3u);
    EXPECT_EQ(iv[0].begin, kCropBegin);
    EXPECT_EQ(iv[0].end, kCropBegin + 200 * 50);
    EXPECT_EQ(iv[2].begin, kCropBegin + 2 * kRowLen);
    // Last window is clipped at the end of the reduced row.
    const auto last = window_to_raw(4, 25, 8, 8, 124);
    EXPECT_EQ(last[0].end, kCropBegin + kRowLen - 8 * 50);
    EXPECT_THROW(window_to_raw(5, 25, 8, 8, 124), std::invalid_argument);
}

// A small in-memory dataset: reduced traces and manifest rows only.
Dataset fake_dataset(int n, std::uint64_t seed) {
    Dataset ds;
    Rng rng(seed);
    std::normal_distribution<double> g(10.0, 2.0);
    ds.archs.push_back({0, ArchSpec{{LayerSpec::conv(3, 10), LayerSpec::relu()}}});
    for (int i = 0; i < n; ++i) {
        ReducedTrace r(3, kReducedSteps);
        for (Eigen::Index k = 0; k < r.size(); ++k)
            r.data()[k] = g(rng);
        ds.reduced.push_back(r);
        ManifestEntry e;
        e.trace_path = "traces/" + std::to_string(i);
        e.labels = {0, 14};
        e.split = Split::Test;
        e.placement = i % 2 ? PlacementName::Center : PlacementName::Original;
        ds.manifest.entries.push_back(e);
    }
    return ds;
}

seq2seq::RnnCtcConfig small_rnn() {
    seq2seq::RnnCtcConfig c;
    c.rnn_dim = 8;
    c.conv_channels = {4, 4, 4, 4, 4};
    return c;
}

TEST(Evaluate, MeanIsAverageOfTraces) {
    const Dataset ds = fake_dataset(6, 1);
    seq2seq::RnnCtc<float> m(small_rnn(), 2);
    std::vector<std::size_t> rows(6);
    std::iota(rows.begin(), rows.end(), 0);
    const EvalReport r = evaluate(m, ds, rows, {}, 4);
    ASSERT_EQ(r.per_trace_oer.size(), 6u);
    EXPECT_NEAR(r.mean_oer, std::accumulate(r.per_trace_oer.begin(), r.per_trace_oer.end(), 0.0) / 6, 1e-12);
    for (std::size_t k = 0; k < rows.size(); ++k)
        EXPECT_DOUBLE_EQ(r.per_trace_oer[k], oer(r.predictions[k], ds.manifest.entries[k].labels));
}

TEST(Evaluate, ModelInputNoiseIsStableAndNormalized) {
    const Dataset ds = fake_dataset(2, 2);
    const Eigen::MatrixXd clean = model_input(ds, 0, {});
    EXPECT_EQ(clean, normalize(ds.reduced[0]));
    const Eigen::MatrixXd a = model_input(ds, 0, {10.0, 5}), b = model_input(ds, 0, {10.0, 5});
    EXPECT_EQ(a, b);
    EXPECT_NE(a, clean);
    EXPECT_NE(model_input(ds, 0, {10.0, 6}), a);
    EXPECT_LT(std::abs(a.mean()), 1e-9);
}

TEST(NoiseSweep, OrderedAndCleanRowEqualsEvaluation) {
    const Dataset ds = fake_dataset(4, 3);
    seq2seq::RnnCtc<float> m(small_rnn(), 3);
    const std::vector<std::size_t> rows{0, 1, 2, 3};
    const auto table = noise_sweep(m, ds, rows, {10, 50, kNoNoise, 30, 50}, 9);
    ASSERT_EQ(table.size(), 4u);
    EXPECT_TRUE(std::isinf(table[0].snr_db));
    for (std::size_t i = 1; i < table.size(); ++i)
        EXPECT_GT(table[i - 1].snr_db, table[i].snr_db);
    const EvalReport clean = evaluate(m, ds, rows);
    EXPECT_EQ(table[0].oer, clean.mean_oer);
    EXPECT_EQ(table[0].loss, clean.mean_loss);
    const auto again = noise_sweep(m, ds, rows, default_snr_levels(), 9);
    EXPECT_EQ(again.size(), 6u);
}

TEST(PlacementSweep, RowsPerPlacementAndMissingThrows) {
    const Dataset ds = fake_dataset(6, 4);
    seq2seq::RnnCtc<float> a(small_rnn(), 4), b(small_rnn(), 5);
    const PlacementName present[] = {PlacementName::Original, PlacementName::Center};
    const auto rows = placement_sweep(a, &b, ds, present);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].traces, 3u);
    EXPECT_TRUE(rows[1].oer_with.has_value());
    const PlacementName missing[] = {PlacementName::TopLeft};
    EXPECT_THROW(placement_sweep<float>(a, nullptr, ds, missing), DatasetError);
}

TEST(Localize, RejectsCtcModelAndReportsWindows) {
    const Dataset ds = fake_dataset(1, 5);
    const Schedule sched = compile_schedule(ds.archs[0].arch, SimParams{});
    seq2seq::RnnCtc<float> rnn(small_rnn(), 1);
    EXPECT_THROW(localize(rnn, model_input(ds, 0, {}), sched), UnsupportedModel);

    seq2seq::TransformerConfig c;
    c.d_model = 16;
    c.n_heads = 2;
    c.d_ff = 16;
    c.max_decode_len = 4;
    seq2seq::Transformer<float> tf(c, 2);
    const Localization l = localize(tf, model_input(ds, 0, {}), sched);
    EXPECT_EQ(l.reduced.cols(), (c.encoder_length() + 24) / 25);
    EXPECT_EQ(l.checks, 3 * l.label_rows);
    EXPECT_LE(l.hits, l.checks);
    for (Eigen::Index i = 0; i < l.reduced.rows(); ++i)
        EXPECT_NEAR(l.reduced.row(i).sum(), 1.0, 1e-6);
    const Localization ls[] = {l, l};
    EXPECT_DOUBLE_EQ(summarize(ls).mean_hit_rate, l.hit_rate);
}

} // namespace
} // namespace mercury
