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

#include "mercury/dataset.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

namespace fs = std::filesystem;

namespace mercury {

// ---------------------------------------------------------------------------
// Architecture generator

namespace {

int pick_weighted(Rng &rng, std::span<const double> weights) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::uniform_real_distribution<double> u(0.0, total);
    double r = u(rng);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (r < weights[i])
            return static_cast<int>(i);
        r -= weights[i];
    }
    return static_cast<int>(weights.size()) - 1;
}

int uniform_int(Rng &rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

ArchSpec draw_arch(Rng &rng, const GenGrammar &g) {
    ArchSpec arch;
    arch.input_shape = g.input_shape;
    const int depth = uniform_int(rng, g.min_depth, g.max_depth);
    const bool softmax = std::bernoulli_distribution(g.p_softmax)(rng);
    const int n_cls = uniform_int(rng, 0, std::min(g.max_classifier, depth - int{softmax}));
    const int n_feat = depth - int{softmax} - n_cls;

    static constexpr int kConvChannels[] = {10, 20, 30};
    Shape cur = g.input_shape;
    for (int i = 0; i < n_feat; ++i) {
        const int spatial = std::min(cur.height, cur.width);
        const int max_kernel = std::min(5, spatial);
        const bool prev_relu = !arch.layers.empty() && arch.layers.back().kind == LayerKind::Relu;
        double w[3] = {max_kernel >= 2 ? g.w_conv : 0.0,
                       (max_kernel >= 2 && i > 0) ? g.w_pool : 0.0,
                       prev_relu ? 0.0 : g.w_relu};
        if (w[0] + w[1] + w[2] == 0.0)
            w[2] = 1.0; // nothing else fits
        LayerSpec layer;
        switch (pick_weighted(rng, w)) {
        case 0:
            layer = LayerSpec::conv(uniform_int(rng, 2, max_kernel),
                                    kConvChannels[uniform_int(rng, 0, 2)]);
            break;
        case 1:
            layer = LayerSpec::pool(uniform_int(rng, 2, max_kernel));
            break;
        default:
            layer = LayerSpec::relu();
            break;
        }
        arch.layers.push_back(layer);
        cur = infer_shapes(ArchSpec{{layer}, cur}).front();
    }
    for (int i = 0; i < n_cls; ++i) {
        const bool prev_relu = !arch.layers.empty() && arch.layers.back().kind == LayerKind::Relu;
        if (i == 0 || prev_relu || std::bernoulli_distribution(0.5)(rng))
            arch.layers.push_back(LayerSpec::fc(100 * uniform_int(rng, 1, 5)));
        else
            arch.layers.push_back(LayerSpec::relu());
    }
    if (softmax)
        arch.layers.push_back(LayerSpec::softmax());
    return arch;
}

} // namespace

ArchSpec random_arch(Rng &rng, const GenGrammar &g) {
    if (g.min_depth < kMinDepth || g.max_depth > kMaxDepth || g.min_depth > g.max_depth)
        throw std::invalid_argument("GenGrammar: depth range must lie within [2,16]");
    for (int attempt = 0; attempt < g.max_retries; ++attempt) {
        ArchSpec arch = draw_arch(rng, g);
        try {
            validate(arch);
            return arch;
        } catch (const InvalidArchitecture &) {
        }
    }
    throw InvalidArchitecture("random_arch: no valid architecture after " +
                              std::to_string(g.max_retries) + " attempts");
}

// ---------------------------------------------------------------------------
// Preprocessing

std::vector<double> crop(const RawTrace &t) {
    if (static_cast<std::int64_t>(t.samples.size()) < kCropEnd)
        throw DatasetError("trace has " + std::to_string(t.samples.size()) +
                           " samples, crop needs at least " + std::to_string(kCropEnd));
    return {t.samples.begin() + kCropBegin, t.samples.begin() + kCropEnd};
}

ReducedTrace shape_and_reduce(std::span<const double> x) {
    if (static_cast<std::int64_t>(x.size()) != kCropLen)
        throw DatasetError("shape_and_reduce expects " + std::to_string(kCropLen) +
                           " samples, got " + std::to_string(x.size()));
    ReducedTrace out(kReshapeRows, kReducedSteps);
    for (int r = 0; r < kReshapeRows; ++r) {
        const double *row = x.data() + r * kRowLen;
        for (int j = 0; j < kReducedSteps; ++j) {
            double s = 0.0;
            for (int k = 0; k < kReduceFactor; ++k)
                s += row[j * kReduceFactor + k];
            out(r, j) = s / kReduceFactor;
        }
    }
    return out;
}

Eigen::MatrixXd normalize(const Eigen::MatrixXd &m) {
    const double n = static_cast<double>(m.size());
    if (n == 0)
        throw DatasetError("normalize: empty matrix");
    const double mean = m.sum() / n;
    const double var = (m.array() - mean).square().sum() / n;
    if (!(var > 0))
        throw DatasetError("normalize: zero variance input");
    return (m.array() - mean) / std::sqrt(var);
}

RawInterval reduced_to_raw(int row, int step_begin, int step_end) {
    const std::int64_t base = kCropBegin + std::int64_t{row} * kRowLen;
    return {base + std::int64_t{step_begin} * kReduceFactor,
            base + std::int64_t{step_end} * kReduceFactor};
}

// ---------------------------------------------------------------------------
// Binary formats

namespace {

template <class T> void put_le(std::ostream &os, T v) {
    static_assert(std::is_integral_v<T>);
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i)
        buf[i] = static_cast<unsigned char>((static_cast<std::make_unsigned_t<T>>(v) >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char *>(buf), sizeof(T));
}

template <class T> T get_le(std::istream &is, const std::string &path) {
    unsigned char buf[sizeof(T)];
    if (!is.read(reinterpret_cast<char *>(buf), sizeof(T)))
        throw DatasetError("truncated file: " + path);
    std::make_unsigned_t<T> v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        v |= static_cast<std::make_unsigned_t<T>>(buf[i]) << (8 * i);
    return static_cast<T>(v);
}

void put_f64(std::ostream &os, double d) { put_le(os, std::bit_cast<std::uint64_t>(d)); }
double get_f64(std::istream &is, const std::string &path) {
    return std::bit_cast<double>(get_le<std::uint64_t>(is, path));
}

constexpr char kTraceMagic[4] = {'M', 'T', 'R', 'C'};
constexpr char kPreparedMagic[4] = {'M', 'P', 'R', 'P'};
constexpr std::uint16_t kFormatVersion = 1;

void expect_magic(std::istream &in, const char (&magic)[4], const std::string &path) {
    char m[4];
    if (!in.read(m, 4) || std::memcmp(m, magic, 4) != 0)
        throw DatasetError("bad magic in " + path);
    if (auto v = get_le<std::uint16_t>(in, path); v != kFormatVersion)
        throw DatasetError("unsupported version " + std::to_string(v) + " in " + path);
}

} // namespace

void write_trace(const std::string &path, const RawTrace &t) {
    if (t.tap_count < 0 || t.tap_count > 0xffff)
        throw DatasetError("tap_count does not fit the trace format: " + path);
    if (t.samples.size() > 0xffffffffULL)
        throw DatasetError("too many samples for the trace format: " + path);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DatasetError("cannot open " + path + " for writing");
    out.write(kTraceMagic, 4);
    put_le<std::uint16_t>(out, kFormatVersion);
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(t.tap_count));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.samples.size()));
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char *>(t.samples.data()),
                  static_cast<std::streamsize>(t.samples.size() * sizeof(std::uint16_t)));
    } else {
        for (auto s : t.samples)
            put_le(out, s);
    }
    if (!out)
        throw DatasetError("write failed: " + path);
}

RawTrace read_trace(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DatasetError("cannot open " + path);
    expect_magic(in, kTraceMagic, path);
    RawTrace t;
    t.tap_count = get_le<std::uint16_t>(in, path);
    const auto n = get_le<std::uint32_t>(in, path);
    t.samples.resize(n);
    if constexpr (std::endian::native == std::endian::little) {
        if (!in.read(reinterpret_cast<char *>(t.samples.data()),
                     static_cast<std::streamsize>(n * sizeof(std::uint16_t))))
            throw DatasetError("truncated file: " + path);
    } else {
        for (auto &s : t.samples)
            s = get_le<std::uint16_t>(in, path);
    }
    for (auto s : t.samples)
        if (s > t.tap_count)
            throw DatasetError("sample exceeds tap_count in " + path);
    return t;
}

void write_prepared(const std::string &path, std::span<const ReducedTrace> reduced) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DatasetError("cannot open " + path + " for writing");
    out.write(kPreparedMagic, 4);
    put_le<std::uint16_t>(out, kFormatVersion);
    put_le<std::uint16_t>(out, kReshapeRows);
    put_le<std::uint32_t>(out, kReducedSteps);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(reduced.size()));
    for (const auto &m : reduced) {
        if (m.rows() != kReshapeRows || m.cols() != kReducedSteps)
            throw DatasetError("prepared matrix has wrong shape");
        for (int r = 0; r < kReshapeRows; ++r)
            for (int j = 0; j < kReducedSteps; ++j)
                put_f64(out, m(r, j));
    }
    if (!out)
        throw DatasetError("write failed: " + path);
}

std::vector<ReducedTrace> read_prepared(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DatasetError("cannot open " + path);
    expect_magic(in, kPreparedMagic, path);
    const auto rows = get_le<std::uint16_t>(in, path);
    const auto steps = get_le<std::uint32_t>(in, path);
    const auto count = get_le<std::uint32_t>(in, path);
    if (rows != kReshapeRows || steps != static_cast<std::uint32_t>(kReducedSteps))
        throw DatasetError("unexpected prepared shape in " + path);
    std::vector<ReducedTrace> out(count, ReducedTrace(rows, steps));
    for (auto &m : out)
        for (int r = 0; r < rows; ++r)
            for (std::uint32_t j = 0; j < steps; ++j)
                m(r, j) = get_f64(in, path);
    return out;
}

// ---------------------------------------------------------------------------
// Manifest

std::string_view to_string(Split s) { return s == Split::Train ? "train" : "test"; }

std::string to_manifest_line(const ManifestEntry &e) {
    nlohmann::ordered_json j;
    j["trace"] = e.trace_path;
    j["arch_id"] = e.arch_id;
    j["labels"] = e.labels;
    j["split"] = std::string(to_string(e.split));
    j["placement"] = std::string(to_string(e.placement));
    j["seed"] = e.seed;
    return j.dump();
}

ManifestEntry parse_manifest_entry(std::string_view line) {
    try {
        auto j = nlohmann::json::parse(line);
        ManifestEntry e;
        e.trace_path = j.at("trace").get<std::string>();
        e.arch_id = j.at("arch_id").get<int>();
        e.labels = j.at("labels").get<LabelSeq>();
        const auto split = j.at("split").get<std::string>();
        if (split != "train" && split != "test")
            throw DatasetError("unknown split '" + split + "'");
        e.split = split == "train" ? Split::Train : Split::Test;
        auto pl = parse_placement(j.at("placement").get<std::string>());
        if (!pl)
            throw DatasetError("unknown placement in manifest line");
        e.placement = *pl;
        e.seed = j.at("seed").get<std::uint64_t>();
        for (int l : e.labels)
            if (l < 0 || l >= kNumLayerClasses)
                throw DatasetError("label " + std::to_string(l) + " outside [0,15]");
        return e;
    } catch (const nlohmann::json::exception &ex) {
        throw DatasetError(std::string("bad manifest line: ") + ex.what());
    }
}

void write_manifest(const std::string &path, const DatasetManifest &m) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DatasetError("cannot open " + path + " for writing");
    for (const auto &e : m.entries)
        out << to_manifest_line(e) << '\n';
    if (!out)
        throw DatasetError("write failed: " + path);
}

DatasetManifest read_manifest(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DatasetError("cannot open " + path);
    DatasetManifest m;
    std::string line;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        auto e = parse_manifest_entry(line);
        if (!seen.insert(e.trace_path).second)
            throw DatasetError("duplicate trace path " + e.trace_path + " in " + path);
        m.entries.push_back(std::move(e));
    }
    return m;
}

// ---------------------------------------------------------------------------
// Dataset assembly

PlacementId SensorSetup::placement(PlacementName name) const {
    for (const auto &p : placements)
        if (p.name == name)
            return p;
    return default_placement(name);
}

unsigned worker_threads(unsigned requested) {
    unsigned n = requested;
    if (n == 0) {
        if (const char *env = std::getenv("MERCURY_THREADS")) {
            const long v = std::strtol(env, nullptr, 10);
            if (v > 0)
                n = static_cast<unsigned>(v);
        }
    }
    if (n == 0)
        n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

namespace {

std::size_t augment_count(const DatasetSpec &spec) {
    const auto base = static_cast<double>(spec.n_arch) * spec.traces_per_arch;
    return static_cast<std::size_t>(std::llround(spec.augment_fraction * base));
}

/// Marks round(n*fraction) of the given entries as Test using a seeded shuffle.
void assign_test(std::vector<ManifestEntry> &entries, std::vector<std::size_t> idx,
                 double fraction, Rng &rng) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_test = static_cast<std::size_t>(std::llround(fraction * idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
        entries[idx[i]].split = i < n_test ? Split::Test : Split::Train;
}

template <class Fn> void parallel_for(std::size_t n, unsigned threads, Fn fn) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mu);
                    if (!error)
                        error = std::current_exception();
                }
            }
        });
    }
    for (auto &t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace

std::size_t planned_trace_count(const DatasetSpec &spec) {
    return static_cast<std::size_t>(spec.n_arch) * spec.traces_per_arch +
           (augment_count(spec) + static_cast<std::size_t>(spec.placement_test_traces)) *
               spec.augment_placements.size();
}

DatasetManifest build_dataset(const DatasetSpec &spec, const std::string &out_dir) {
    if (spec.n_arch < 1 || spec.traces_per_arch < 1)
        throw std::invalid_argument("build_dataset: n_arch and traces_per_arch must be >= 1");
    if (!(spec.test_fraction >= 0 && spec.test_fraction < 1))
        throw std::invalid_argument("build_dataset: test_fraction must lie in [0,1)");
    if (spec.augment_fraction < 0)
        throw std::invalid_argument("build_dataset: augment_fraction must be >= 0");
    if (spec.placement_test_traces < 0)
        throw std::invalid_argument("build_dataset: placement_test_traces must be >= 0");
    for (auto p : spec.augment_placements)
        if (p == PlacementName::Original)
            throw std::invalid_argument("build_dataset: augmentation needs non-original placements");

    std::error_code ec;
    fs::create_directories(fs::path(out_dir) / "traces", ec);
    if (ec)
        throw DatasetError("cannot create " + out_dir + ": " + ec.message());

    // Architectures.
    std::vector<ArchRecord> archs;
    for (int i = 0; i < spec.n_arch; ++i) {
        Rng rng = make_rng(spec.seed, "arch", static_cast<std::uint64_t>(i));
        archs.push_back({i, random_arch(rng, spec.grammar)});
    }
    write_arch_manifest((fs::path(out_dir) / "archs.jsonl").string(), archs);

    // Plan entries: base traces, then per-placement augmentation.
    DatasetManifest manifest;
    auto &entries = manifest.entries;
    auto add_entry = [&](int arch_id, PlacementName pl) {
        ManifestEntry e;
        const auto index = entries.size();
        char name[32];
        std::snprintf(name, sizeof name, "traces/%06zu.mtrc", index);
        e.trace_path = name;
        e.arch_id = arch_id;
        e.labels = labels_of(archs[static_cast<std::size_t>(arch_id)].arch);
        e.placement = pl;
        e.seed = derive_seed(spec.seed, "trace", index);
        entries.push_back(std::move(e));
    };

    Rng split_rng = make_rng(spec.seed, "split");
    for (int a = 0; a < spec.n_arch; ++a)
        for (int k = 0; k < spec.traces_per_arch; ++k)
            add_entry(a, PlacementName::Original);
    if (spec.split_mode == SplitMode::ByTrace) {
        for (int a = 0; a < spec.n_arch; ++a) {
            std::vector<std::size_t> idx(static_cast<std::size_t>(spec.traces_per_arch));
            std::iota(idx.begin(), idx.end(), static_cast<std::size_t>(a) * spec.traces_per_arch);
            assign_test(entries, idx, spec.test_fraction, split_rng);
        }
    } else {
        const auto n_test_arch = static_cast<int>(std::llround(spec.test_fraction * spec.n_arch));
        for (auto &e : entries)
            e.split = e.arch_id >= spec.n_arch - n_test_arch ? Split::Test : Split::Train;
    }

    // Augmentation traces only ever train. Each augmentation placement also
    // gets its own held-out traces for placement sweeps. In by-architecture
    // mode both draw from the matching side of the architecture split.
    std::vector<int> train_archs, test_archs;
    for (int a = 0; a < spec.n_arch; ++a) {
        const bool held_out = spec.split_mode == SplitMode::ByArchitecture &&
                              a >= spec.n_arch - static_cast<int>(std::llround(spec.test_fraction * spec.n_arch));
        (held_out ? test_archs : train_archs).push_back(a);
        if (spec.split_mode == SplitMode::ByTrace)
            test_archs.push_back(a);
    }
    auto add_block = [&](PlacementName pl, std::size_t count, const std::vector<int> &pool, Split split) {
        if (count > 0 && pool.empty())
            throw std::invalid_argument("build_dataset: no architectures on the " + std::string(to_string(split)) +
                                        " side for placement traces");
        for (std::size_t k = 0; k < count; ++k) {
            add_entry(pool[k % pool.size()], pl);
            entries.back().split = split;
        }
    };
    for (auto pl : spec.augment_placements) {
        add_block(pl, augment_count(spec), train_archs, Split::Train);
        add_block(pl, static_cast<std::size_t>(spec.placement_test_traces), test_archs, Split::Test);
    }
    // Simulate, store and preprocess.
    const TdcConfig tdc = calibrate_sensor(spec.sensor.tdc, spec.sensor.sim, spec.sensor.pdn);
    std::vector<ReducedTrace> reduced(entries.size());
    parallel_for(entries.size(), worker_threads(spec.threads), [&](std::size_t i) {
        const auto &e = entries[i];
        const auto trace = simulate_trace(archs[static_cast<std::size_t>(e.arch_id)].arch, tdc,
                                          spec.sensor.pdn, spec.sensor.placement(e.placement),
                                          e.seed, spec.sensor.sim);
        const auto path = (fs::path(out_dir) / e.trace_path).string();
        write_trace(path, trace);
        reduced[i] = preprocess(trace);
    });

    write_manifest((fs::path(out_dir) / "manifest.jsonl").string(), manifest);
    write_prepared((fs::path(out_dir) / "prepared.bin").string(), reduced);
    return manifest;
}

const ArchRecord &Dataset::arch(int id) const {
    for (const auto &a : archs)
        if (a.id == id)
            return a;
    throw DatasetError("unknown arch id " + std::to_string(id));
}

std::vector<std::size_t> Dataset::select(Split split,
                                         std::span<const PlacementName> placements) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        const auto &e = manifest.entries[i];
        if (e.split != split)
            continue;
        if (!placements.empty() &&
            std::find(placements.begin(), placements.end(), e.placement) == placements.end())
            continue;
        out.push_back(i);
    }
    return out;
}

Dataset load_dataset(const std::string &dir) {
    Dataset ds;
    ds.archs = read_arch_manifest((fs::path(dir) / "archs.jsonl").string());
    ds.manifest = read_manifest((fs::path(dir) / "manifest.jsonl").string());
    for (const auto &e : ds.manifest.entries) {
        const auto &a = ds.arch(e.arch_id);
        if (labels_of(a.arch) != e.labels)
            throw DatasetError("manifest labels disagree with architecture " +
                               std::to_string(e.arch_id) + " for " + e.trace_path);
    }
    const auto prepared = fs::path(dir) / "prepared.bin";
    if (fs::exists(prepared)) {
        ds.reduced = read_prepared(prepared.string());
        if (ds.reduced.size() != ds.manifest.entries.size())
            throw DatasetError("prepared.bin has " + std::to_string(ds.reduced.size()) +
                               " entries, manifest has " +
                               std::to_string(ds.manifest.entries.size()));
    } else {
        for (const auto &e : ds.manifest.entries)
            ds.reduced.push_back(preprocess(read_trace((fs::path(dir) / e.trace_path).string())));
    }
    return ds;
}

} // namespace mercury
