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

#include "mercury/seq2seq/train.hpp"

#include "mercury/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <tuple>
#include <numeric>
#include <random>

namespace mercury::seq2seq {

void TrainConfig::validate() const {
    if (epochs < 1 || batch_size < 1)
        throw std::invalid_argument("train: epochs and batch_size must be positive");
    if (train_eval_size < 0)
        throw std::invalid_argument("train: train_eval_size must be non-negative");
    adam.validate();
    schedule.validate();
}

template <class T>
std::pair<double, double> evaluate_model(SequenceModel<T> &model, std::span<const Example> examples,
                                         int batch_size) {
    if (examples.empty())
        return {0.0, 0.0};
    double oer_sum = 0.0;
    double loss_sum = 0.0;
    for (std::size_t i = 0; i < examples.size(); i += static_cast<std::size_t>(batch_size)) {
        const auto chunk = examples.subspan(i, std::min<std::size_t>(batch_size, examples.size() - i));
        loss_sum += model.loss(chunk, false) * static_cast<double>(chunk.size());
        const auto preds = model.predict_batch(chunk);
        for (std::size_t k = 0; k < chunk.size(); ++k)
            oer_sum += oer(preds[k], *chunk[k].labels);
    }
    const auto n = static_cast<double>(examples.size());
    return {oer_sum / n, loss_sum / n};
}

template <class T>
TrainResult train(SequenceModel<T> &model, std::span<const Example> train_set,
                  std::span<const Example> test_set, const TrainConfig &cfg,
                  const EpochCallback &on_epoch) {
    cfg.validate();
    if (train_set.empty())
        throw std::invalid_argument("train: empty training split");

    const std::size_t n = train_set.size();
    const auto bs = static_cast<std::size_t>(cfg.batch_size);
    const std::int64_t steps_per_epoch = static_cast<std::int64_t>((n + bs - 1) / bs);
    const std::int64_t total_steps = steps_per_epoch * cfg.epochs;

    std::vector<Example> monitor;
    {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        Rng rng = make_rng(cfg.seed, "train-eval");
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(std::min<std::size_t>(n, static_cast<std::size_t>(cfg.train_eval_size)));
        std::sort(idx.begin(), idx.end());
        for (std::size_t i : idx)
            monitor.push_back(train_set[i]);
    }

    Adam<T> opt(model.params(), cfg.adam);
    TrainResult result;
    double best_oer = std::numeric_limits<double>::infinity();
    std::int64_t step = 0;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<Example> batch;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Rng rng = make_rng(cfg.seed, "shuffle", static_cast<std::uint64_t>(epoch));
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        EpochStats stats;
        stats.epoch = epoch;
        for (std::size_t i = 0; i < n; i += bs) {
            batch.clear();
            for (std::size_t k = i; k < std::min(n, i + bs); ++k)
                batch.push_back(train_set[order[k]]);
            model.params().zero_grad();
            const double loss = model.loss(batch, true);
            if (!std::isfinite(loss))
                throw TrainingDiverged("train: non-finite loss at epoch " + std::to_string(epoch) +
                                       ", step " + std::to_string(step));
            if (!std::isfinite(clip_grad_norm(model.params(), cfg.grad_clip)))
                throw TrainingDiverged("train: non-finite gradient at epoch " + std::to_string(epoch) +
                                       ", step " + std::to_string(step));
            stats.lr = cfg.schedule.lr(step, total_steps);
            opt.step(model.params(), stats.lr);
            ++step;
            loss_sum += loss * static_cast<double>(batch.size());
        }
        stats.train_loss = loss_sum / static_cast<double>(n);
        stats.train_oer = evaluate_model(model, monitor, cfg.batch_size).first;
        if (!test_set.empty())
            std::tie(stats.test_oer, stats.test_loss) = evaluate_model(model, test_set, cfg.batch_size);
        result.curves.push_back(stats);
        if (stats.test_oer < best_oer) {
            best_oer = stats.test_oer;
            result.best_epoch = epoch;
            result.best_params = snapshot(model);
        }
        if (on_epoch)
            on_epoch(stats);
    }
    result.final_params = snapshot(model);
    return result;
}

template <class T>
std::unique_ptr<SequenceModel<T>> make_model(ModelKind kind, const RnnCtcConfig &rnn,
                                             const TransformerConfig &tf, std::uint64_t seed) {
    if (kind == ModelKind::RnnCtc)
        return std::make_unique<RnnCtc<T>>(rnn, seed);
    return std::make_unique<Transformer<T>>(tf, seed);
}

void write_curves_csv(std::ostream &os, const std::vector<EpochStats> &curves) {
    os << "epoch,lr,train_loss,test_loss,train_oer,test_oer\n";
    os << std::setprecision(10);
    for (const auto &s : curves)
        os << s.epoch << ',' << s.lr << ',' << s.train_loss << ',' << s.test_loss << ','
           << s.train_oer << ',' << s.test_oer << '\n';
}

template std::pair<double, double> evaluate_model<float>(SequenceModel<float> &, std::span<const Example>, int);
template std::pair<double, double> evaluate_model<double>(SequenceModel<double> &, std::span<const Example>, int);
template TrainResult train<float>(SequenceModel<float> &, std::span<const Example>,
                                  std::span<const Example>, const TrainConfig &, const EpochCallback &);
template TrainResult train<double>(SequenceModel<double> &, std::span<const Example>,
                                   std::span<const Example>, const TrainConfig &, const EpochCallback &);
template std::unique_ptr<SequenceModel<float>> make_model<float>(ModelKind, const RnnCtcConfig &,
                                                                 const TransformerConfig &, std::uint64_t);
template std::unique_ptr<SequenceModel<double>> make_model<double>(ModelKind, const RnnCtcConfig &,
                                                                   const TransformerConfig &, std::uint64_t);

} // namespace mercury::seq2seq
