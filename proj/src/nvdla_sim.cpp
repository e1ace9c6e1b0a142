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

#include "mercury/nvdla_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mercury {

void SimParams::validate() const {
    if (!(baseline >= 0))
        throw std::invalid_argument("SimParams: baseline must be non-negative");
    if (!(throughput > 0 && config_unit > 0 && config_base >= 0))
        throw std::invalid_argument("SimParams: throughput and config_unit must be positive");
    if (!(burst_gain >= 0 && plateau_gain >= 0 && bg_noise_std >= 0))
        throw std::invalid_argument("SimParams: gains and noise must be non-negative");
    if (!(bg_ar >= 0 && bg_ar < 1))
        throw std::invalid_argument("SimParams: bg_ar must lie in [0,1)");
    if (lead_in < 0 || lead_out < 0 || trace_len <= 0 || min_compute <= 0 ||
        pingpong_offset < 0 || lanes <= 0)
        throw std::invalid_argument("SimParams: invalid durations");
}

std::int64_t Schedule::active_begin() const {
    return windows.empty() ? lead_in : windows.front().config_start;
}

std::int64_t Schedule::active_end() const {
    return windows.empty() ? lead_in : windows.back().compute_end;
}

OpsEstimate ops_estimate(const LayerSpec &layer, const Shape &in_shape) {
    ArchSpec single{{layer}, in_shape};
    const Shape out = infer_shapes(single).front();
    std::int64_t ops = 0;
    const std::int64_t k2 = std::int64_t{layer.kernel} * layer.kernel;
    switch (layer.kind) {
    case LayerKind::Conv:
        ops = k2 * in_shape.channels * out.channels * out.height * out.width;
        break;
    case LayerKind::Pool:
        ops = k2 * out.channels * out.height * out.width;
        break;
    case LayerKind::FullyConnected:
        ops = in_shape.elements() * layer.out_features;
        break;
    case LayerKind::Relu:
    case LayerKind::Softmax:
        ops = in_shape.elements();
        break;
    }
    return {ops, out};
}

int register_fields(LayerKind kind) {
    switch (kind) {
    case LayerKind::Conv:
        return 12;
    case LayerKind::Pool:
        return 8;
    case LayerKind::FullyConnected:
        return 10;
    case LayerKind::Relu:
        return 4;
    case LayerKind::Softmax:
        return 6;
    }
    return 0;
}

double raw_compute_duration(std::int64_t ops, const SimParams &sim) {
    return static_cast<double>(ops) / sim.throughput;
}

BurstSignature burst_signature(const LayerSpec &layer, const SimParams &sim) {
    const int label = label_of(layer);
    const double amplitude = sim.burst_gain * (0.6 + 0.2 * label);
    const auto width = static_cast<std::int64_t>(
        std::llround(sim.config_base + sim.config_unit * register_fields(layer.kind)));
    return {amplitude, width};
}

double lane_utilization(const LayerSpec &layer, const Shape &in_shape, const SimParams &sim) {
    const double lanes = sim.lanes;
    switch (layer.kind) {
    case LayerKind::Conv:
        return std::min(1.0, layer.out_channels / lanes);
    case LayerKind::Pool:
        return std::min(1.0, in_shape.channels / lanes);
    case LayerKind::FullyConnected:
        return std::min(1.0, layer.out_features / 512.0);
    case LayerKind::Relu:
    case LayerKind::Softmax:
        return 0.25;
    }
    return 0.0;
}

Schedule compile_schedule(const ArchSpec &arch, const SimParams &sim) {
    sim.validate();
    Schedule s;
    s.lead_in = sim.lead_in;
    s.lead_out = sim.lead_out;
    Shape in = arch.input_shape;
    std::int64_t prev_compute_start = 0;
    std::int64_t prev_compute_end = sim.lead_in;
    for (std::size_t i = 0; i < arch.layers.size(); ++i) {
        const auto &layer = arch.layers[i];
        const auto est = ops_estimate(layer, in);
        const auto cfg_len = burst_signature(layer, sim).width;
        const auto compute_len = std::max<std::int64_t>(
            sim.min_compute, std::llround(raw_compute_duration(est.ops, sim)));

        LayerWindow w;
        w.layer_index = static_cast<int>(i);
        // The shadow register group of layer i+1 is programmed while layer i
        // computes.
        w.config_start = i == 0 ? sim.lead_in : prev_compute_start + sim.pingpong_offset;
        w.config_end = w.config_start + cfg_len;
        w.compute_start = std::max(w.config_end, prev_compute_end);
        w.compute_end = w.compute_start + compute_len;
        s.windows.push_back(w);

        prev_compute_start = w.compute_start;
        prev_compute_end = w.compute_end;
        in = est.out_shape;
    }
    s.total_len = std::max(sim.trace_len, s.active_end() + sim.lead_out);
    return s;
}

std::vector<double> synthesize_current(const Schedule &schedule, const ArchSpec &arch,
                                       const SimParams &sim, Rng &rng) {
    if (schedule.windows.size() != arch.layers.size())
        throw std::invalid_argument("schedule does not match architecture (" +
                                    std::to_string(schedule.windows.size()) + " windows, " +
                                    std::to_string(arch.layers.size()) + " layers)");
    const auto n = static_cast<std::size_t>(schedule.total_len);
    std::vector<double> current(n, sim.baseline);

    Shape in = arch.input_shape;
    for (std::size_t i = 0; i < arch.layers.size(); ++i) {
        const auto &layer = arch.layers[i];
        const auto &w = schedule.windows[i];
        const auto burst = burst_signature(layer, sim);
        for (auto t = w.config_start; t < w.config_end; ++t)
            current[static_cast<std::size_t>(t)] += burst.amplitude;
        const double plateau = sim.plateau_gain * lane_utilization(layer, in, sim);
        for (auto t = w.compute_start; t < w.compute_end; ++t)
            current[static_cast<std::size_t>(t)] += plateau;
        in = ops_estimate(layer, in).out_shape;
    }

    if (sim.bg_noise_std > 0) {
        std::normal_distribution<double> eps(0.0, 1.0);
        const double innov = sim.bg_noise_std * std::sqrt(1.0 - sim.bg_ar * sim.bg_ar);
        double b = sim.bg_noise_std * eps(rng);
        for (std::size_t t = 0; t < n; ++t) {
            if (t > 0)
                b = sim.bg_ar * b + innov * eps(rng);
            current[t] = std::max(0.0, current[t] + b);
        }
    }
    return current;
}

double idle_voltage_drop(const SimParams &sim, const PdnParams &pdn) {
    return sim.baseline * pdn.resistance;
}

TdcConfig calibrate_sensor(TdcConfig tdc, const SimParams &sim, const PdnParams &pdn) {
    const auto idle = delay_of(idle_voltage_drop(sim, pdn), tdc.base_delay, pdn.v_nominal);
    if (idle.saturated)
        throw SensorSaturated("idle operating point saturates the sensor");
    return calibrated(tdc, idle.delay);
}

RawTrace simulate_trace(const ArchSpec &arch, const TdcConfig &tdc, const PdnParams &pdn,
                        const PlacementId &placement, std::uint64_t seed,
                        const SimParams &sim) {
    return simulate_trace(arch, tdc, pdn, placement, seed, sim, nullptr);
}

RawTrace simulate_trace(const ArchSpec &arch, const TdcConfig &tdc, const PdnParams &pdn,
                        const PlacementId &placement, std::uint64_t seed,
                        const SimParams &sim, Schedule *schedule_out) {
    tdc.validate();
    pdn.validate();
    placement.validate();
    const Schedule schedule = compile_schedule(arch, sim);
    Rng bg_rng = make_rng(seed, "background");
    Rng pl_rng = make_rng(seed, "placement");
    const auto current = synthesize_current(schedule, arch, sim, bg_rng);
    const auto drop = pdn_response(current, pdn);
    const auto seen = apply_placement(drop, placement, pl_rng);

    RawTrace trace;
    trace.tap_count = tdc.tap_count;
    trace.sample_period = pdn.dt;
    trace.seed = seed;
    trace.placement = placement.name;
    trace.samples.resize(seen.size());
    for (std::size_t t = 0; t < seen.size(); ++t) {
        const auto d = delay_of(seen[t], tdc.base_delay, pdn.v_nominal);
        if (d.saturated)
            throw SensorSaturated("supply drop reached nominal voltage at sample " +
                                  std::to_string(t));
        trace.samples[t] = static_cast<std::uint16_t>(taps_reached(d.delay, tdc, tdc.clock_period));
    }
    if (schedule_out)
        *schedule_out = schedule;
    return trace;
}

} // namespace mercury
