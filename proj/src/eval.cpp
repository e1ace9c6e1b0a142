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

#include "mercury/seq2seq/attention.hpp"
#include "mercury/seq2seq/transformer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace mercury {

double signal_power(std::span<const double> x) {
    if (x.empty())
        throw std::invalid_argument("signal_power: empty signal");
    double s = 0.0;
    for (double v : x)
        s += v * v;
    return s / static_cast<double>(x.size());
}

double signal_power(const Eigen::MatrixXd &x) {
    return signal_power(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

double noise_power(double p_signal, double snr_db) {
    if (std::isinf(snr_db) && snr_db > 0)
        return 0.0;
    return p_signal / std::pow(10.0, snr_db / 10.0);
}

std::vector<double> add_noise(std::span<const double> x, double snr_db, Rng &rng) {
    std::vector<double> out(x.begin(), x.end());
    const double pn = noise_power(signal_power(x), snr_db);
    if (pn == 0.0)
        return out;
    std::normal_distribution<double> n(0.0, std::sqrt(pn));
    for (double &v : out)
        v += n(rng);
    return out;
}

Eigen::MatrixXd add_noise(const Eigen::MatrixXd &x, double snr_db, Rng &rng) {
    const auto v = add_noise(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                             snr_db, rng);
    return Eigen::Map<const Eigen::MatrixXd>(v.data(), x.rows(), x.cols());
}

Eigen::MatrixXd model_input(const Dataset &ds, std::size_t i, const NoiseSpec &noise) {
    const ReducedTrace &r = ds.reduced.at(i);
    if (std::isinf(noise.snr_db) && noise.snr_db > 0)
        return normalize(r);
    Rng rng = make_rng(noise.seed, "noise", i);
    return normalize(add_noise(r, noise.snr_db, rng));
}

template <class T>
EvalReport evaluate(seq2seq::SequenceModel<T> &model, const Dataset &ds,
                    std::span<const std::size_t> indices, const NoiseSpec &noise, int batch_size) {
    if (indices.empty())
        throw std::invalid_argument("evaluate: no traces selected");
    EvalReport rep;
    rep.snr_db = noise.snr_db;
    rep.indices.assign(indices.begin(), indices.end());
    double loss_sum = 0.0;
    for (std::size_t s = 0; s < indices.size(); s += static_cast<std::size_t>(batch_size)) {
        const std::size_t e = std::min(indices.size(), s + static_cast<std::size_t>(batch_size));
        std::vector<Eigen::MatrixXd> xs;
        xs.reserve(e - s);
        for (std::size_t k = s; k < e; ++k)
            xs.push_back(model_input(ds, indices[k], noise));
        std::vector<seq2seq::Example> batch;
        for (std::size_t k = s; k < e; ++k)
            batch.push_back({&xs[k - s], &ds.manifest.entries.at(indices[k]).labels});
        loss_sum += model.loss(batch, false) * static_cast<double>(batch.size());
        auto preds = model.predict_batch(batch);
        for (std::size_t k = 0; k < batch.size(); ++k) {
            rep.per_trace_oer.push_back(oer(preds[k], *batch[k].labels));
            rep.predictions.push_back(std::move(preds[k]));
        }
    }
    const auto n = static_cast<double>(indices.size());
    rep.mean_oer = std::accumulate(rep.per_trace_oer.begin(), rep.per_trace_oer.end(), 0.0) / n;
    rep.mean_loss = loss_sum / n;
    return rep;
}

std::vector<double> default_snr_levels() { return {kNoNoise, 50, 40, 30, 25, 10}; }

template <class T>
std::vector<NoiseRow> noise_sweep(seq2seq::SequenceModel<T> &model, const Dataset &ds,
                                  std::span<const std::size_t> indices, std::vector<double> snrs,
                                  std::uint64_t seed) {
    std::sort(snrs.begin(), snrs.end(), std::greater<>());
    snrs.erase(std::unique(snrs.begin(), snrs.end()), snrs.end());
    std::vector<NoiseRow> rows;
    for (double snr : snrs) {
        const EvalReport r = evaluate(model, ds, indices, NoiseSpec{snr, seed});
        rows.push_back({snr, r.mean_oer, r.mean_loss});
    }
    return rows;
}

template <class T>
std::vector<PlacementRow> placement_sweep(seq2seq::SequenceModel<T> &without,
                                          seq2seq::SequenceModel<T> *with, const Dataset &ds,
                                          std::span<const PlacementName> placements) {
    std::vector<PlacementRow> rows;
    for (PlacementName p : placements) {
        const PlacementName one[] = {p};
        const auto idx = ds.select(Split::Test, one);
        if (idx.empty())
            throw DatasetError("placement_sweep: no test traces for placement " +
                               std::string(to_string(p)));
        PlacementRow row;
        row.placement = p;
        row.traces = idx.size();
        row.oer_without = evaluate(without, ds, idx).mean_oer;
        if (with)
            row.oer_with = evaluate(*with, ds, idx).mean_oer;
        rows.push_back(row);
    }
    return rows;
}

Eigen::MatrixXd window_average(const Eigen::MatrixXd &attention, int window) {
    if (window < 1)
        throw std::invalid_argument("window_average: window must be positive");
    const Eigen::Index cols = attention.cols();
    const Eigen::Index n = (cols + window - 1) / window;
    Eigen::MatrixXd out(attention.rows(), n);
    for (Eigen::Index w = 0; w < n; ++w) {
        const Eigen::Index b = w * window;
        const Eigen::Index len = std::min<Eigen::Index>(window, cols - b);
        out.col(w) = attention.middleCols(b, len).rowwise().sum();
    }
    return out;
}

std::vector<RawInterval> window_to_raw(int w, int window, int enc_kernel, int enc_stride,
                                       int enc_length) {
    const int first = w * window;
    const int last = std::min(enc_length, first + window) - 1;
    if (first < 0 || last < first)
        throw std::invalid_argument("window_to_raw: window outside encoder length");
    const int step_begin = first * enc_stride;
    const int step_end = std::min(kReducedSteps, last * enc_stride + enc_kernel);
    std::vector<RawInterval> out;
    for (int row = 0; row < kReshapeRows; ++row)
        out.push_back(reduced_to_raw(row, step_begin, step_end));
    return out;
}

namespace {

bool intersects(const RawInterval &a, std::int64_t b, std::int64_t e) {
    return a.begin < e && b < a.end;
}

} // namespace

template <class T>
Localization localize(const seq2seq::SequenceModel<T> &model, const Eigen::MatrixXd &x,
                      const Schedule &schedule, const LocalizeOptions &opt) {
    const auto *tf = dynamic_cast<const seq2seq::Transformer<T> *>(&model);
    if (!tf)
        throw UnsupportedModel("localize: attention maps need a transformer model");
    const auto &cfg = tf->config();
    const auto decoded = tf->decode(x);

    Localization out;
    out.predicted = decoded.labels;
    out.attention = seq2seq::head_mean<double>(decoded.attention);
    out.reduced = window_average(out.attention, opt.window);
    out.label_rows = std::min<int>(static_cast<int>(decoded.labels.size()),
                                   static_cast<int>(out.attention.rows()));
    const int n_windows = static_cast<int>(out.reduced.cols());
    const int k = std::min(opt.top_k, n_windows);
    const int enc_len = cfg.encoder_length();

    auto window_hits_config = [&](int w) {
        for (const RawInterval &r : window_to_raw(w, opt.window, cfg.front_kernel, cfg.front_stride, enc_len))
            for (const LayerWindow &lw : schedule.windows)
                if (intersects(r, lw.config_start, lw.config_end))
                    return true;
        return false;
    };

    for (int row = 0; row < out.label_rows; ++row) {
        std::vector<int> order(static_cast<std::size_t>(n_windows));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return out.reduced(row, a) > out.reduced(row, b);
        });
        for (int j = 0; j < k; ++j) {
            ++out.checks;
            if (window_hits_config(order[static_cast<std::size_t>(j)]))
                ++out.hits;
        }
    }
    out.hit_rate = out.checks ? static_cast<double>(out.hits) / out.checks : 0.0;

    if (out.label_rows > 0) {
        Eigen::Index w = 0;
        out.reduced.row(0).maxCoeff(&w);
        out.first_argmax_window = static_cast<int>(w);
        const std::int64_t b = schedule.active_begin();
        const std::int64_t len = schedule.active_end() - b;
        const auto e = b + static_cast<std::int64_t>(std::ceil(opt.early_fraction * static_cast<double>(len)));
        for (const RawInterval &r : window_to_raw(out.first_argmax_window, opt.window, cfg.front_kernel,
                                                  cfg.front_stride, enc_len))
            if (intersects(r, b, e))
                out.first_is_early = true;
    }
    return out;
}

LocalizationSummary summarize(std::span<const Localization> results) {
    LocalizationSummary s;
    s.traces = results.size();
    if (results.empty())
        return s;
    for (const auto &r : results) {
        s.mean_hit_rate += r.hit_rate;
        s.first_early_fraction += r.first_is_early ? 1.0 : 0.0;
    }
    s.mean_hit_rate /= static_cast<double>(results.size());
    s.first_early_fraction /= static_cast<double>(results.size());
    return s;
}

#define MERCURY_INSTANTIATE(T)                                                                     \
    template EvalReport evaluate<T>(seq2seq::SequenceModel<T> &, const Dataset &,                 \
                                    std::span<const std::size_t>, const NoiseSpec &, int);        \
    template std::vector<NoiseRow> noise_sweep<T>(seq2seq::SequenceModel<T> &, const Dataset &,   \
                                                  std::span<const std::size_t>,                   \
                                                  std::vector<double>, std::uint64_t);            \
    template std::vector<PlacementRow> placement_sweep<T>(                                         \
        seq2seq::SequenceModel<T> &, seq2seq::SequenceModel<T> *, const Dataset &,                 \
        std::span<const PlacementName>);                                                           \
    template Localization localize<T>(const seq2seq::SequenceModel<T> &, const Eigen::MatrixXd &, \
                                      const Schedule &, const LocalizeOptions &);

MERCURY_INSTANTIATE(float)
MERCURY_INSTANTIATE(double)

#undef MERCURY_INSTANTIATE

} // namespace mercury
