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

#include "mercury/pdn_tdc.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace mercury {

void PdnParams::validate() const {
    if (!(resistance > 0 && inductance > 0 && capacitance > 0 && dt > 0))
        throw std::invalid_argument("PdnParams: R, L, C and dt must be positive");
    if (!(v_nominal > 0))
        throw std::invalid_argument("PdnParams: v_nominal must be positive");
}

std::vector<double> pdn_response(std::span<const double> current, const PdnParams &p) {
    std::vector<double> v(current.size());
    if (current.empty())
        return v;
    const double tau = p.resistance * p.capacitance;
    const double alpha = p.dt / (tau + p.dt);
    const double l_over_dt = p.inductance / p.dt;

    double prev_i = current[0];
    double y = current[0] * p.resistance;
    for (std::size_t t = 0; t < current.size(); ++t) {
        const double i = current[t];
        const double u = i * p.resistance + l_over_dt * (i - prev_i);
        y = t == 0 ? u : y + alpha * (u - y);
        v[t] = y;
        prev_i = i;
    }
    return v;
}

DelayResult delay_of(double voltage_drop, double base_delay, double v_nominal) {
    if (voltage_drop >= v_nominal)
        return {std::numeric_limits<double>::max(), true};
    return {base_delay * v_nominal / (v_nominal - voltage_drop), false};
}

void TdcConfig::validate() const {
    if (tap_count <= 0 || tap_count % 4 != 0)
        throw std::invalid_argument("TdcConfig: tap_count must be a positive multiple of 4");
    if (!(coarse_unit > fine_unit && fine_unit > tap_unit && tap_unit > 0))
        throw std::invalid_argument("TdcConfig: need coarse_unit > fine_unit > tap_unit > 0");
    if (coarse_max < 0 || fine_max < 0 || coarse_len < 0 || fine_len < 0 ||
        coarse_len > coarse_max || fine_len > fine_max)
        throw std::invalid_argument("TdcConfig: delay line lengths outside search bounds");
    if (!(clock_period > 0) || base_delay < 0)
        throw std::invalid_argument("TdcConfig: clock_period must be positive");
}

int taps_reached(double total_delay, const TdcConfig &cfg, double clock_period) {
    const double initial =
        cfg.coarse_len * cfg.coarse_unit + cfg.fine_len * cfg.fine_unit + total_delay;
    const double reach = std::floor((clock_period - initial) / cfg.tap_unit);
    if (!(reach > 0))
        return 0;
    if (reach >= cfg.tap_count)
        return cfg.tap_count;
    return static_cast<int>(reach);
}

std::uint64_t popcount(const ThermometerCode &code) {
    std::uint64_t n = 0;
    for (bool b : code)
        n += b ? 1 : 0;
    return n;
}

std::uint64_t exp_sum(const ThermometerCode &code) {
    std::uint64_t acc = 0;
    const std::size_t groups = code.size() / 4;
    for (std::size_t g = 0; g < groups && g < 64; ++g) {
        if (code[4 * g] || code[4 * g + 1] || code[4 * g + 2] || code[4 * g + 3])
            acc += std::uint64_t{1} << g;
    }
    return acc;
}

RawSample tdc_readout(double total_delay, const TdcConfig &cfg, double clock_period) {
    const int taps = taps_reached(total_delay, cfg, clock_period);
    if (cfg.output_mode == TdcOutputMode::Sum)
        return static_cast<std::uint64_t>(taps);
    ThermometerCode code(static_cast<std::size_t>(cfg.tap_count), false);
    for (int i = 0; i < taps; ++i)
        code[static_cast<std::size_t>(i)] = true;
    if (cfg.output_mode == TdcOutputMode::Raw)
        return code;
    return exp_sum(code);
}

std::pair<int, int> calibrate(const TdcConfig &cfg, double idle_delay, double clock_period) {
    if (cfg.coarse_max < 0 || cfg.fine_max < 0)
        throw std::invalid_argument("calibrate: empty search bounds");
    const double target = cfg.tap_count / 2.0;
    TdcConfig probe = cfg;
    std::optional<std::pair<int, int>> best;
    double best_err = std::numeric_limits<double>::infinity();
    for (int c = 0; c <= cfg.coarse_max; ++c) {
        for (int f = 0; f <= cfg.fine_max; ++f) {
            probe.coarse_len = c;
            probe.fine_len = f;
            const int sum = taps_reached(idle_delay, probe, clock_period);
            if (sum <= 0 || sum >= cfg.tap_count)
                continue;
            const double err = std::abs(sum - target);
            if (err < best_err) {
                best_err = err;
                best = {c, f};
            }
        }
    }
    if (!best)
        throw CalibrationInfeasible("no coarse/fine setting puts the idle readout inside (0, " +
                                    std::to_string(cfg.tap_count) + ")");
    return *best;
}

TdcConfig calibrated(TdcConfig cfg, double idle_delay) {
    auto [c, f] = calibrate(cfg, idle_delay, cfg.clock_period);
    cfg.coarse_len = c;
    cfg.fine_len = f;
    return cfg;
}

namespace {
constexpr std::array<std::string_view, 6> kPlacementNames = {
    "original", "center", "top-left", "top-right", "bottom-left", "bottom-right"};
}

std::string_view to_string(PlacementName name) {
    return kPlacementNames[static_cast<std::size_t>(name)];
}

std::optional<PlacementName> parse_placement(std::string_view name) {
    for (std::size_t i = 0; i < kPlacementNames.size(); ++i)
        if (kPlacementNames[i] == name)
            return static_cast<PlacementName>(i);
    return std::nullopt;
}

void PlacementId::validate() const {
    if (!(gain > 0))
        throw std::invalid_argument("placement gain must be positive");
    if (!(noise_std >= 0))
        throw std::invalid_argument("placement noise_std must be non-negative");
    if (name == PlacementName::Original && (gain != 1.0 || offset != 0.0))
        throw std::invalid_argument("original placement must have gain 1 and offset 0");
}

PlacementId default_placement(PlacementName name) {
    switch (name) {
    case PlacementName::Original:
        return {name, 1.0, 0.0, 0.0};
    case PlacementName::Center:
        return {name, 0.55, 0.004, 0.054};
    case PlacementName::TopLeft:
        return {name, 1.20, -0.003, 0.124};
    case PlacementName::TopRight:
        return {name, 0.70, 0.006, 0.075};
    case PlacementName::BottomLeft:
        return {name, 1.10, -0.002, 0.112};
    case PlacementName::BottomRight:
        return {name, 0.85, 0.002, 0.090};
    }
    return {};
}

std::vector<double> apply_placement(std::span<const double> v, const PlacementId &pl, Rng &rng) {
    std::vector<double> out(v.size());
    if (pl.noise_std > 0) {
        std::normal_distribution<double> noise(0.0, pl.noise_std);
        for (std::size_t t = 0; t < v.size(); ++t)
            out[t] = pl.gain * v[t] + pl.offset + noise(rng);
    } else {
        for (std::size_t t = 0; t < v.size(); ++t)
            out[t] = pl.gain * v[t] + pl.offset;
    }
    return out;
}

} // namespace mercury
