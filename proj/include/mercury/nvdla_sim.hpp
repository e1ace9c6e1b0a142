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

#include "mercury/archmodel.hpp"
#include "mercury/pdn_tdc.hpp"
#include "mercury/rng.hpp"
#include "mercury/trace.hpp"

#include <cstdint>
#include <vector>

namespace mercury {

/// Power-envelope model of the accelerator. Durations are in sensor
/// samples, currents in the PDN's normalized activity units.
struct SimParams {
    double baseline = 2.0;        // idle current of the whole fabric
    double throughput = 1150.0;   // MACs (or element ops) per sample
    double config_unit = 525.0;   // samples per configuration register field
    double config_base = 2100.0;  // fixed cost of a register programming pass
    double burst_gain = 1.0;      // scale of the configuration burst
    double plateau_gain = 1.5;    // compute current at full lane utilization
    double bg_noise_std = 0.3;    // stationary std of the background process
    double bg_ar = 0.98;          // AR(1) coefficient of the background
    std::int64_t lead_in = 50000;
    std::int64_t lead_out = 20000;
    std::int64_t trace_len = 310000;
    std::int64_t min_compute = 3150;
    std::int64_t pingpong_offset = 20;
    int lanes = 32;
    std::uint64_t seed = 1;

    void validate() const;
};

struct LayerWindow {
    int layer_index = 0;
    std::int64_t config_start = 0;
    std::int64_t config_end = 0;
    std::int64_t compute_start = 0;
    std::int64_t compute_end = 0;
};

struct Schedule {
    std::vector<LayerWindow> windows;
    std::int64_t total_len = 0;
    std::int64_t lead_in = 0;
    std::int64_t lead_out = 0;

    /// [first config_start, last compute_end); empty schedule -> {lead_in, lead_in}.
    std::int64_t active_begin() const;
    std::int64_t active_end() const;
};

struct OpsEstimate {
    std::int64_t ops = 0;
    Shape out_shape;
};

/// Conv: k^2*Cin*Cout*Hout*Wout MACs; Pool: k^2*C*Hout*Wout compares;
/// FC: in*out MACs; Relu/Softmax: one op per element.
OpsEstimate ops_estimate(const LayerSpec &layer, const Shape &in_shape);

/// Number of configuration register fields programmed for a layer kind.
int register_fields(LayerKind kind);

/// Unclamped, unrounded compute duration in samples.
double raw_compute_duration(std::int64_t ops, const SimParams &sim);

struct BurstSignature {
    double amplitude = 0.0;
    std::int64_t width = 0;

    bool operator==(const BurstSignature &) const = default;
};

/// Configuration burst of a layer; pairwise distinct across label classes.
BurstSignature burst_signature(const LayerSpec &layer, const SimParams &sim);

/// Fraction of the MAC/elementwise lanes a layer keeps busy.
double lane_utilization(const LayerSpec &layer, const Shape &in_shape, const SimParams &sim);

Schedule compile_schedule(const ArchSpec &arch, const SimParams &sim);

/// Baseline + per-layer configuration burst and compute plateau + AR(1)
/// background. The rng drives only the background.
std::vector<double> synthesize_current(const Schedule &schedule, const ArchSpec &arch,
                                       const SimParams &sim, Rng &rng);

/// Idle (pre-inference) drop at the sensor's original location.
double idle_voltage_drop(const SimParams &sim, const PdnParams &pdn);

/// TDC config calibrated at the idle operating point.
TdcConfig calibrate_sensor(TdcConfig tdc, const SimParams &sim, const PdnParams &pdn);

/// Full chain: schedule, current, PDN, placement, gate delay, TDC Sum readout.
/// Throws SensorSaturated if the drop reaches the nominal supply.
RawTrace simulate_trace(const ArchSpec &arch, const TdcConfig &tdc, const PdnParams &pdn,
                        const PlacementId &placement, std::uint64_t seed,
                        const SimParams &sim);

/// Same chain, also returning the schedule used (ground truth for leakage
/// localization).
RawTrace simulate_trace(const ArchSpec &arch, const TdcConfig &tdc, const PdnParams &pdn,
                        const PlacementId &placement, std::uint64_t seed,
                        const SimParams &sim, Schedule *schedule_out);

} // namespace mercury
