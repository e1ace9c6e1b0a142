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
#include "mercury/nvdla_sim.hpp"
#include "mercury/pdn_tdc.hpp"
#include "mercury/rng.hpp"
#include "mercury/trace.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mercury {

// Preprocessing window and reduction constants.
inline constexpr std::int64_t kCropBegin = 50000;
inline constexpr std::int64_t kCropEnd = 200000;
inline constexpr std::int64_t kCropLen = kCropEnd - kCropBegin;
inline constexpr int kReshapeRows = 3;
inline constexpr std::int64_t kRowLen = kCropLen / kReshapeRows;
inline constexpr int kReduceFactor = 50;
inline constexpr int kReducedSteps = static_cast<int>(kRowLen / kReduceFactor);

/// Reduced trace: kReshapeRows x kReducedSteps, rows are channels.
using ReducedTrace = Eigen::MatrixXd;

/// Network input plus target: x is 3 x 1000 with zero mean, unit std.
struct PreparedSample {
    Eigen::MatrixXd x;
    LabelSeq y;
};

class DatasetError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Random architecture grammar: a feature phase of Conv/Pool/Relu (Pool
/// never first), then 0-3 classifier layers (FC first, then FC/Relu), then
/// an optional trailing Softmax.
struct GenGrammar {
    int min_depth = kMinDepth;
    int max_depth = kMaxDepth;
    double p_softmax = 0.5;
    int max_classifier = 3;
    double w_conv = 0.55;
    double w_pool = 0.15;
    double w_relu = 0.30;
    Shape input_shape{1, 28, 28};
    int max_retries = 100;
};

ArchSpec random_arch(Rng &rng, const GenGrammar &g = {});

std::vector<double> crop(const RawTrace &t);
ReducedTrace shape_and_reduce(std::span<const double> x);
Eigen::MatrixXd normalize(const Eigen::MatrixXd &m);

inline ReducedTrace preprocess(const RawTrace &t) { return shape_and_reduce(crop(t)); }

/// Raw sample range [begin, end) covered by reduced steps [step_begin,
/// step_end) of one reshape row.
struct RawInterval {
    std::int64_t begin = 0;
    std::int64_t end = 0;
};
RawInterval reduced_to_raw(int row, int step_begin, int step_end);

// Binary trace file: "MTRC", u16 version, u16 tap_count, u32 sample_count,
// then u16 samples, all little-endian.
void write_trace(const std::string &path, const RawTrace &t);
RawTrace read_trace(const std::string &path);

enum class Split { Train, Test };
std::string_view to_string(Split s);

struct ManifestEntry {
    std::string trace_path; // relative to the dataset directory
    int arch_id = 0;
    LabelSeq labels;
    Split split = Split::Train;
    PlacementName placement = PlacementName::Original;
    std::uint64_t seed = 0;

    bool operator==(const ManifestEntry &) const = default;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
};

std::string to_manifest_line(const ManifestEntry &e);
ManifestEntry parse_manifest_entry(std::string_view line);
void write_manifest(const std::string &path, const DatasetManifest &m);
DatasetManifest read_manifest(const std::string &path);

enum class SplitMode { ByTrace, ByArchitecture };

struct SensorSetup {
    SimParams sim;
    PdnParams pdn;
    TdcConfig tdc;
    std::vector<PlacementId> placements; // overrides for default_placement()

    PlacementId placement(PlacementName name) const;
};

struct DatasetSpec {
    int n_arch = 40;
    int traces_per_arch = 30;
    double test_fraction = 0.1;
    /// Extra training traces per non-Original placement, as a fraction of
    /// the base count.
    double augment_fraction = 0.0;
    std::vector<PlacementName> augment_placements;
    /// Held-out traces per augmentation placement, for placement sweeps.
    int placement_test_traces = 0;
    SplitMode split_mode = SplitMode::ByTrace;
    std::uint64_t seed = 1;
    GenGrammar grammar;
    SensorSetup sensor;
    unsigned threads = 0; // 0: MERCURY_THREADS or hardware concurrency
};

/// Number of base, augmentation and placement test traces build_dataset() produces.
std::size_t planned_trace_count(const DatasetSpec &spec);

/// Generates architectures, simulates and preprocesses every trace, and
/// writes archs.jsonl, manifest.jsonl, traces/*.mtrc and prepared.bin
/// into out_dir.
DatasetManifest build_dataset(const DatasetSpec &spec, const std::string &out_dir);

/// In-memory view of a built dataset. reduced[i] belongs to entries[i].
struct Dataset {
    std::vector<ArchRecord> archs;
    DatasetManifest manifest;
    std::vector<ReducedTrace> reduced;

    const ArchRecord &arch(int id) const;
    std::vector<std::size_t> select(Split split, std::span<const PlacementName> placements) const;
};

Dataset load_dataset(const std::string &dir);

// prepared.bin: "MPRP", u16 version, u16 rows, u32 steps, u32 count, then
// count*rows*steps little-endian doubles in row-major order.
void write_prepared(const std::string &path, std::span<const ReducedTrace> reduced);
std::vector<ReducedTrace> read_prepared(const std::string &path);

/// Worker count: MERCURY_THREADS if set, else hardware concurrency.
unsigned worker_threads(unsigned requested = 0);

} // namespace mercury
