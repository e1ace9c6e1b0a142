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

#include "mercury/seq2seq/ctc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace mercury::seq2seq {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
    if (a == kNegInf)
        return b;
    if (b == kNegInf)
        return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

void check_labels(std::span<const int> labels, Eigen::Index vocab, int blank) {
    if (blank < 0 || blank >= vocab)
        throw std::invalid_argument("ctc: blank index " + std::to_string(blank) +
                                    " outside vocabulary of " + std::to_string(vocab));
    for (int l : labels)
        if (l < 0 || l >= vocab || l == blank)
            throw std::invalid_argument("ctc: label " + std::to_string(l) + " is not a symbol");
}

} // namespace

int ctc_min_length(std::span<const int> labels) {
    int n = static_cast<int>(labels.size());
    for (std::size_t i = 1; i < labels.size(); ++i)
        if (labels[i] == labels[i - 1])
            ++n;
    return n;
}

CtcResult ctc_loss(const Mat<double> &log_probs, std::span<const int> labels, int blank) {
    const Eigen::Index T = log_probs.rows();
    const Eigen::Index V = log_probs.cols();
    check_labels(labels, V, blank);
    if (T < ctc_min_length(labels))
        throw InfeasibleAlignment("ctc: " + std::to_string(T) + " frames cannot emit " +
                                  std::to_string(labels.size()) + " labels");

    const int S = 2 * static_cast<int>(labels.size()) + 1;
    auto sym = [&](int s) { return s % 2 == 0 ? blank : labels[static_cast<std::size_t>(s / 2)]; };
    auto can_skip = [&](int s) { return s >= 2 && s % 2 == 1 && sym(s) != sym(s - 2); };

    Mat<double> alpha = Mat<double>::Constant(T, S, kNegInf);
    Mat<double> beta = Mat<double>::Constant(T, S, kNegInf);
    alpha(0, 0) = log_probs(0, blank);
    if (S > 1)
        alpha(0, 1) = log_probs(0, sym(1));
    for (Eigen::Index t = 1; t < T; ++t) {
        for (int s = 0; s < S; ++s) {
            double a = alpha(t - 1, s);
            if (s >= 1)
                a = log_add(a, alpha(t - 1, s - 1));
            if (can_skip(s))
                a = log_add(a, alpha(t - 1, s - 2));
            alpha(t, s) = a == kNegInf ? kNegInf : a + log_probs(t, sym(s));
        }
    }
    beta(T - 1, S - 1) = 0.0;
    if (S > 1)
        beta(T - 1, S - 2) = 0.0;
    for (Eigen::Index t = T - 2; t >= 0; --t) {
        for (int s = 0; s < S; ++s) {
            double b = beta(t + 1, s) + log_probs(t + 1, sym(s));
            if (s + 1 < S)
                b = log_add(b, beta(t + 1, s + 1) + log_probs(t + 1, sym(s + 1)));
            if (s + 2 < S && can_skip(s + 2))
                b = log_add(b, beta(t + 1, s + 2) + log_probs(t + 1, sym(s + 2)));
            beta(t, s) = b;
        }
    }

    double log_p = alpha(T - 1, S - 1);
    if (S > 1)
        log_p = log_add(log_p, alpha(T - 1, S - 2));
    if (std::isnan(log_p)) {
        CtcResult bad;
        bad.loss = log_p;
        bad.grad = Mat<double>::Constant(T, log_probs.cols(), log_p);
        return bad;
    }
    if (!std::isfinite(log_p))
        throw InfeasibleAlignment("ctc: labels have zero probability under log_probs");

    CtcResult out;
    out.loss = -log_p;
    out.grad = Mat<double>::Zero(T, V);
    for (Eigen::Index t = 0; t < T; ++t)
        for (int s = 0; s < S; ++s) {
            const double occ = alpha(t, s) + beta(t, s);
            if (occ != kNegInf)
                out.grad(t, sym(s)) -= std::exp(occ - log_p);
        }
    return out;
}

std::vector<int> ctc_collapse(std::span<const int> path, int blank) {
    std::vector<int> out;
    int prev = -1;
    for (int k : path) {
        if (k != prev && k != blank)
            out.push_back(k);
        prev = k;
    }
    return out;
}

std::vector<int> ctc_greedy_decode(const Mat<double> &log_probs, int blank) {
    std::vector<int> path(static_cast<std::size_t>(log_probs.rows()));
    for (Eigen::Index t = 0; t < log_probs.rows(); ++t) {
        Eigen::Index k = 0;
        log_probs.row(t).maxCoeff(&k);
        path[static_cast<std::size_t>(t)] = static_cast<int>(k);
    }
    return ctc_collapse(path, blank);
}

std::vector<int> ctc_beam_decode(const Mat<double> &log_probs, int beam_width, int blank) {
    if (beam_width < 1)
        throw std::invalid_argument("ctc: beam width must be at least 1");
    const Eigen::Index V = log_probs.cols();
    if (blank < 0 || blank >= V)
        throw std::invalid_argument("ctc: blank index outside vocabulary");

    struct Beam {
        double pb = kNegInf, pnb = kNegInf; // total probability ending in blank / symbol
        double vb = kNegInf, vnb = kNegInf; // best single alignment, same split
        double total() const { return log_add(pb, pnb); }
        double best() const { return std::max(vb, vnb); }
    };
    using Prefix = std::vector<int>;

    std::vector<std::pair<Prefix, Beam>> beams;
    beams.push_back({Prefix{}, Beam{0.0, kNegInf, 0.0, kNegInf}});

    for (Eigen::Index t = 0; t < log_probs.rows(); ++t) {
        std::map<Prefix, Beam> next;
        for (const auto &[prefix, b] : beams) {
            const double lb = log_probs(t, blank);
            Beam &same = next[prefix];
            same.pb = log_add(same.pb, b.total() + lb);
            same.vb = std::max(same.vb, b.best() + lb);
            if (!prefix.empty()) {
                const double lr = log_probs(t, prefix.back());
                same.pnb = log_add(same.pnb, b.pnb + lr);
                same.vnb = std::max(same.vnb, b.vnb + lr);
            }
            for (Eigen::Index k = 0; k < V; ++k) {
                if (k == blank)
                    continue;
                const double lk = log_probs(t, k);
                Prefix ext = prefix;
                ext.push_back(static_cast<int>(k));
                Beam &e = next[ext];
                if (!prefix.empty() && prefix.back() == k) {
                    e.pnb = log_add(e.pnb, b.pb + lk);
                    e.vnb = std::max(e.vnb, b.vb + lk);
                } else {
                    e.pnb = log_add(e.pnb, b.total() + lk);
                    e.vnb = std::max(e.vnb, b.best() + lk);
                }
            }
        }
        beams.assign(next.begin(), next.end());
        auto rank = [](const auto &a, const auto &b) {
            if (a.second.best() != b.second.best())
                return a.second.best() > b.second.best();
            if (a.second.total() != b.second.total())
                return a.second.total() > b.second.total();
            return a.first < b.first;
        };
        const std::size_t keep = std::min<std::size_t>(beams.size(), static_cast<std::size_t>(beam_width));
        std::partial_sort(beams.begin(), beams.begin() + static_cast<std::ptrdiff_t>(keep), beams.end(), rank);
        beams.resize(keep);
    }

    const auto best = std::min_element(beams.begin(), beams.end(), [](const auto &a, const auto &b) {
        if (a.second.total() != b.second.total())
            return a.second.total() > b.second.total();
        return a.first < b.first;
    });
    return best->first;
}

} // namespace mercury::seq2seq
