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

#include "mercury/dataset.hpp"
#include "mercury/metrics.hpp"
#include "mercury/nvdla_sim.hpp"
#include "mercury/seq2seq/model.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mercury {

inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

struct NoiseSpec {
    double snr_db = kNoNoise;
    std::uint64_t seed = 0;
};

/// Mean square of all entries.
double signal_power(std::span<const double> x);
double signal_power(const Eigen::MatrixXd &x);

/// Noise power for a given signal power: P_s / 10^(snr/10). Zero for infinite SNR.
double noise_power(double p_signal, double snr_db);

/// x + N(0, P_n) i.i.d. An infinite SNR returns x unchanged and draws nothing.
std::vector<double> add_noise(std::span<const double> x, double snr_db, Rng &rng);
Eigen::MatrixXd add_noise(const Eigen::MatrixXd &x, double snr_db, Rng &rng);

class UnsupportedModel : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

struct EvalReport {
    std::vector<std::size_t> indices; // manifest rows evaluated
    std::vector<LabelSeq> predictions;
    std::vector<double> per_trace_oer;
    double mean_oer = 0.0;
    double mean_loss = 0.0;
    double snr_db = kNoNoise;
};

/// Network input for manifest row i: optional noise on the reduced trace,
/// then normalization. Noise for row i always comes from the same stream.
Eigen::MatrixXd model_input(const Dataset &ds, std::size_t i, const NoiseSpec &noise);

template <class T>
EvalReport evaluate(seq2seq::SequenceModel<T> &model, const Dataset &ds,
                    std::span<const std::size_t> indices, const NoiseSpec &noise = {},
                    int batch_size = 32);

/// Default sweep levels, descending, clean first.
std::vector<double> default_snr_levels();

struct NoiseRow {
    double snr_db = kNoNoise;
    double oer = 0.0;
    double loss = 0.0;
};

/// One row per SNR, sorted by SNR descending.
template <class T>
std::vector<NoiseRow> noise_sweep(seq2seq::SequenceModel<T> &model, const Dataset &ds,
                                  std::span<const std::size_t> indices, std::vector<double> snrs,
                                  std::uint64_t seed);

struct PlacementRow {
    PlacementName placement = PlacementName::Original;
    std::size_t traces = 0;
    double oer_without = 0.0;
    std::optional<double> oer_with;
};

/// OER on the test traces of each placement, for a model trained without
/// augmentation and optionally one trained with it.
template <class T>
std::vector<PlacementRow> placement_sweep(seq2seq::SequenceModel<T> &without,
                                          seq2seq::SequenceModel<T> *with, const Dataset &ds,
                                          std::span<const PlacementName> placements);

struct Localization {
    LabelSeq predicted;
    Eigen::MatrixXd attention; // decoded rows x encoder steps, mean over heads
    Eigen::MatrixXd reduced;   // decoded rows x ceil(encoder steps / window), window mass
    int label_rows = 0;        // rows that predicted a layer (EOS row excluded)
    int hits = 0;
    int checks = 0;
    double hit_rate = 0.0;
    int first_argmax_window = -1;
    bool first_is_early = false;
};

struct LocalizeOptions {
    int window = 25;
    int top_k = 3;
    double early_fraction = 0.2;
};

/// Attention mass of each non-overlapping column window (window length times
/// the window mean), so every reduced row keeps the unit sum of its input
/// row. The last window may be short.
Eigen::MatrixXd window_average(const Eigen::MatrixXd &attention, int window);

/// Raw sample intervals (one per reshape row) feeding encoder-window w.
std::vector<RawInterval> window_to_raw(int w, int window, int enc_kernel, int enc_stride,
                                       int enc_length);

template <class T>
Localization localize(const seq2seq::SequenceModel<T> &model, const Eigen::MatrixXd &x,
                      const Schedule &schedule, const LocalizeOptions &opt = {});

struct LocalizationSummary {
    std::size_t traces = 0;
    double mean_hit_rate = 0.0;
    double first_early_fraction = 0.0;
};

LocalizationSummary summarize(std::span<const Localization> results);

} // namespace mercury
