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

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mercury {

enum class LayerKind { Conv, Pool, FullyConnected, Relu, Softmax };

std::string_view to_string(LayerKind kind);
std::optional<LayerKind> parse_layer_kind(std::string_view name);

/// One layer of a victim network. Only the fields relevant to `kind` are
/// meaningful; the rest stay zero.
struct LayerSpec {
    LayerKind kind = LayerKind::Relu;
    int kernel = 0;
    int out_channels = 0;
    int out_features = 0;

    static LayerSpec conv(int kernel, int out_channels) {
        return {LayerKind::Conv, kernel, out_channels, 0};
    }
    static LayerSpec pool(int kernel) { return {LayerKind::Pool, kernel, 0, 0}; }
    static LayerSpec fc(int out_features) {
        return {LayerKind::FullyConnected, 0, 0, out_features};
    }
    static LayerSpec relu() { return {LayerKind::Relu, 0, 0, 0}; }
    static LayerSpec softmax() { return {LayerKind::Softmax, 0, 0, 0}; }

    bool operator==(const LayerSpec &) const = default;
};

struct Shape {
    int channels = 0;
    int height = 0;
    int width = 0;

    std::int64_t elements() const {
        return std::int64_t{channels} * height * width;
    }
    auto operator<=>(const Shape &) const = default;
};

std::ostream &operator<<(std::ostream &os, const Shape &s);

struct ArchSpec {
    std::vector<LayerSpec> layers;
    Shape input_shape{1, 28, 28};

    bool operator==(const ArchSpec &) const = default;
};

using LabelSeq = std::vector<int>;

/// Layer classes 0..15, plus the decoder-internal CTC blank.
inline constexpr int kNumLayerClasses = 16;
inline constexpr int kBlankLabel = 16;
inline constexpr int kCtcVocab = 17;

inline constexpr int kMinDepth = 2;
inline constexpr int kMaxDepth = 16;

class InvalidArchitecture : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Throws InvalidArchitecture when the layer's parameters fall outside the
/// label vocabulary (conv kernel 2..5 with 10/20/30 channels, pool kernel
/// 2..5, fc width 100..500 in steps of 100).
void check_vocabulary(const LayerSpec &layer);

int label_of(const LayerSpec &layer);
LabelSeq labels_of(const ArchSpec &arch);

/// Canonical layer for a label. Exact for conv kind/kernel/channels; pool
/// and fc collapse to kernel 2 and width 100.
LayerSpec layer_of_label(int label);

/// Output shape after each layer. Conv is stride 1 without padding, pooling
/// is non-overlapping with stride = kernel, fc flattens its input.
std::vector<Shape> infer_shapes(const ArchSpec &arch);

/// Full invariant check: depth, vocabulary and shape validity.
void validate(const ArchSpec &arch);

std::string describe(const LayerSpec &layer);

/// One line of the architecture manifest (JSON-lines):
/// {"id":..,"input_shape":[c,h,w],"layers":[{"kind":..,...}],"labels":[..]}
struct ArchRecord {
    int id = 0;
    ArchSpec arch;
};

std::string to_manifest_line(const ArchRecord &rec);
/// Parses and validates one manifest line; a "labels" field that disagrees
/// with the layers is rejected.
ArchRecord parse_manifest_line(std::string_view line);

void write_arch_manifest(const std::string &path, const std::vector<ArchRecord> &recs);
std::vector<ArchRecord> read_arch_manifest(const std::string &path);

} // namespace mercury
