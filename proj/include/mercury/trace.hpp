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

#include "mercury/pdn_tdc.hpp"

#include <cstdint>
#include <vector>

namespace mercury {

/// TDC Sum readouts for one inference, one entry per sensor sample.
struct RawTrace {
    std::vector<std::uint16_t> samples;
    int tap_count = 128;
    double sample_period = 1.0 / 150e6;
    std::uint64_t seed = 0;
    PlacementName placement = PlacementName::Original;

    bool operator==(const RawTrace &) const = default;
};

} // namespace mercury
