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

// Slow, obviously-correct reference implementations used by unit tests and
// by the acceptance runner.

#pragma once

#include "mercury/rng.hpp"
#include "mercury/seq2seq/ctc.hpp"
#include "mercury/seq2seq/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <vector>

namespace mercury::oracle {

using seq2seq::Mat;

/// Random T x V matrix of log-normalized rows.
inline Mat<double> random_log_probs(int T, int V, Rng &rng, double scale = 2.0) {
    std::normal_distribution<double> n(0.0, scale);
    Mat<double> m(T, V);
    for (int t = 0; t < T; ++t) {
        double mx = -INFINITY;
        for (int v = 0; v < V; ++v) {
            m(t, v) = n(rng);
            mx = std::max(mx, m(t, v));
        }
        double s = 0;
        for (int v = 0; v < V; ++v)
            s += std::exp(m(t, v) - mx);
        const double lse = mx + std::log(s);
        for (int v = 0; v < V; ++v)
            m(t, v) -= lse;
    }
    return m;
}

/// Calls f(path) for every length-T path over V symbols.
inline void for_each_path(int T, int V, const std::function<void(const std::vector<int> &)> &f) {
    std::vector<int> path(static_cast<std::size_t>(T), 0);
    while (true) {
        f(path);
        int i = T - 1;
        while (i >= 0 && ++path[static_cast<std::size_t>(i)] == V)
            path[static_cast<std::size_t>(i--)] = 0;
        if (i < 0)
            return;
    }
}

inline double path_log_prob(const Mat<double> &lp, const std::vector<int> &path) {
    double s = 0;
    for (std::size_t t = 0; t < path.size(); ++t)
        s += lp(static_cast<Eigen::Index>(t), path[t]);
    return s;
}

/// P(labels) as the sum over every alignment that collapses to labels.
inline double ctc_prob_brute(const Mat<double> &lp, std::span<const int> labels, int blank) {
    double p = 0;
    const std::vector<int> want(labels.begin(), labels.end());
    for_each_path(static_cast<int>(lp.rows()), static_cast<int>(lp.cols()), [&](const std::vector<int> &path) {
        if (seq2seq::ctc_collapse(path, blank) == want)
            p += std::exp(path_log_prob(lp, path));
    });
    return p;
}

/// Total probability of every collapsed sequence.
inline std::map<std::vector<int>, double> collapsed_totals(const Mat<double> &lp, int blank) {
    std::map<std::vector<int>, double> total;
    for_each_path(static_cast<int>(lp.rows()), static_cast<int>(lp.cols()), [&](const std::vector<int> &path) {
        total[seq2seq::ctc_collapse(path, blank)] += std::exp(path_log_prob(lp, path));
    });
    return total;
}

/// Best collapsed sequence and the gap to the runner-up (to skip near ties).
inline std::pair<std::vector<int>, double> best_collapsed(const Mat<double> &lp, int blank) {
    const auto totals = collapsed_totals(lp, blank);
    std::vector<int> best;
    double p1 = -1, p2 = -1;
    for (const auto &[seq, p] : totals) {
        if (p > p1) {
            p2 = p1;
            p1 = p;
            best = seq;
        } else if (p > p2) {
            p2 = p;
        }
    }
    return {best, p1 - std::max(p2, 0.0)};
}

/// Unit-cost edit distance by plain recursion.
inline int levenshtein_naive(std::span<const int> a, std::span<const int> b) {
    if (a.empty())
        return static_cast<int>(b.size());
    if (b.empty())
        return static_cast<int>(a.size());
    const int sub = levenshtein_naive(a.subspan(1), b.subspan(1)) + (a[0] != b[0]);
    const int del = levenshtein_naive(a.subspan(1), b) + 1;
    const int ins = levenshtein_naive(a, b.subspan(1)) + 1;
    return std::min({sub, del, ins});
}

/// All sequences of length 0..max_len over {0..alphabet-1}.
inline std::vector<std::vector<int>> all_sequences(int max_len, int alphabet) {
    std::vector<std::vector<int>> out{{}};
    std::size_t begin = 0;
    for (int len = 1; len <= max_len; ++len) {
        const std::size_t end = out.size();
        for (std::size_t i = begin; i < end; ++i)
            for (int s = 0; s < alphabet; ++s) {
                auto next = out[i];
                next.push_back(s);
                out.push_back(std::move(next));
            }
        begin = end;
    }
    return out;
}

/// Relative error used by the gradient checks. Entries whose gradients are
/// both below `floor` in magnitude are compared on an absolute scale.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Central finite differences of `loss` with respect to every entry of
/// `wrt` (perturbed in place and restored), compared with `analytic`.
inline double max_fd_error(const std::function<double()> &loss, Mat<double> &wrt, const Mat<double> &analytic,
                           double eps = 1e-5) {
    double worst = 0;
    for (Eigen::Index i = 0; i < wrt.size(); ++i) {
        double &w = wrt.data()[i];
        const double keep = w;
        w = keep + eps;
        const double up = loss();
        w = keep - eps;
        const double down = loss();
        w = keep;
        worst = std::max(worst, relative_error(analytic.data()[i], (up - down) / (2 * eps)));
    }
    return worst;
}

inline Mat<double> random_matrix(Eigen::Index rows, Eigen::Index cols, Rng &rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Mat<double> m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i)
        m.data()[i] = n(rng);
    return m;
}

/// sum(y .* r): a scalar probe whose gradient w.r.t. y is r.
inline double probe(const Mat<double> &y, const Mat<double> &r) { return y.cwiseProduct(r).sum(); }

} // namespace mercury::oracle
