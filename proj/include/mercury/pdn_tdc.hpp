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

#include "mercury/rng.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace mercury {

/// Lumped RLC model of the shared supply, in normalized units: current in
/// arbitrary activity units, voltage as a fraction of nominal supply.
struct PdnParams {
    double resistance = 0.01;
    double inductance = 3.3e-11;
    double capacitance = 2.0e-6;
    double dt = 1.0 / 150e6; // one TDC sample at 150 MHz
    double v_nominal = 1.0;

    void validate() const;
};

/// Voltage drop seen by the sensor for a current waveform sampled every dt.
/// v[t] = lowpass(I[t]*R + L*(I[t]-I[t-1])/dt), with a single-pole low-pass
/// of time constant R*C seeded at its input (v[0] has zero di/dt).
std::vector<double> pdn_response(std::span<const double> current, const PdnParams &p);

struct DelayResult {
    double delay = 0.0;
    bool saturated = false;
};

/// Gate delay under a supply drop: base * v_nom / (v_nom - drop). A drop at
/// or above nominal saturates to the largest finite delay.
DelayResult delay_of(double voltage_drop, double base_delay, double v_nominal = 1.0);

enum class TdcOutputMode { Raw, Sum, ExpSum };

/// Coarse/fine initial delay line followed by a tapped carry chain. Delays
/// are in the same time unit as base_delay and clock_period.
struct TdcConfig {
    int tap_count = 128;
    int coarse_len = 0;
    int fine_len = 0;
    int coarse_max = 32;
    int fine_max = 16;
    double coarse_unit = 24.0;
    double fine_unit = 4.0;
    double tap_unit = 1.0;
    TdcOutputMode output_mode = TdcOutputMode::Sum;
    // Unloaded clock path delay through the sensed logic and the sampling
    // clock period.
    double base_delay = 500.0;
    double clock_period = 1000.0;

    void validate() const;
};

class CalibrationInfeasible : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class SensorSaturated : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Number of taps the clock edge reaches before the capture edge.
int taps_reached(double total_delay, const TdcConfig &cfg, double clock_period);

using ThermometerCode = std::vector<bool>;
/// Raw mode yields the thermometer code; Sum and ExpSum yield an integer.
using RawSample = std::variant<ThermometerCode, std::uint64_t>;

RawSample tdc_readout(double total_delay, const TdcConfig &cfg, double clock_period);

/// Hamming weight of a thermometer code.
std::uint64_t popcount(const ThermometerCode &code);
/// Sum of 2^g over 4-tap groups g with at least one tap set.
std::uint64_t exp_sum(const ThermometerCode &code);

/// Exhaustive search over (coarse_len, fine_len), coarse outer, returning
/// the first pair whose idle Sum readout is closest to tap_count/2.
std::pair<int, int> calibrate(const TdcConfig &cfg, double idle_delay, double clock_period);

/// Returns cfg with coarse/fine lengths set by calibrate().
TdcConfig calibrated(TdcConfig cfg, double idle_delay);

enum class PlacementName { Original, Center, TopLeft, TopRight, BottomLeft, BottomRight };

std::string_view to_string(PlacementName name);
std::optional<PlacementName> parse_placement(std::string_view name);

inline constexpr PlacementName kAllPlacements[] = {
    PlacementName::Original, PlacementName::Center, PlacementName::TopLeft,
    PlacementName::TopRight, PlacementName::BottomLeft, PlacementName::BottomRight};

/// Location-dependent affine distortion of the drop seen by the sensor.
struct PlacementId {
    PlacementName name = PlacementName::Original;
    double gain = 1.0;
    double offset = 0.0;
    double noise_std = 0.0;

    void validate() const;
};

/// Built-in transfer function for each location; Original is the identity.
PlacementId default_placement(PlacementName name);

/// v'[t] = gain*v[t] + offset + N(0, noise_std^2).
std::vector<double> apply_placement(std::span<const double> v, const PlacementId &pl, Rng &rng);

} // namespace mercury
