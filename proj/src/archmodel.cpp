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

#include "mercury/archmodel.hpp"

#include <array>
#include <ostream>

namespace mercury {

namespace {

constexpr std::array<std::string_view, 5> kKindNames = {"conv", "pool", "fc",
                                                        "relu", "softmax"};

bool in_range(int v, int lo, int hi) { return v >= lo && v <= hi; }

} // namespace

std::string_view to_string(LayerKind kind) {
    return kKindNames[static_cast<std::size_t>(kind)];
}

std::optional<LayerKind> parse_layer_kind(std::string_view name) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i)
        if (kKindNames[i] == name)
            return static_cast<LayerKind>(i);
    return std::nullopt;
}

std::ostream &operator<<(std::ostream &os, const Shape &s) {
    return os << '(' << s.channels << ',' << s.height << ',' << s.width << ')';
}

void check_vocabulary(const LayerSpec &layer) {
    switch (layer.kind) {
    case LayerKind::Conv:
        if (!in_range(layer.kernel, 2, 5))
            throw InvalidArchitecture("conv kernel " + std::to_string(layer.kernel) +
                                      " outside [2,5]");
        if (layer.out_channels != 10 && layer.out_channels != 20 &&
            layer.out_channels != 30)
            throw InvalidArchitecture("conv out_channels " +
                                      std::to_string(layer.out_channels) +
                                      " not in {10,20,30}");
        break;
    case LayerKind::Pool:
        if (!in_range(layer.kernel, 2, 5))
            throw InvalidArchitecture("pool kernel " + std::to_string(layer.kernel) +
                                      " outside [2,5]");
        break;
    case LayerKind::FullyConnected:
        if (!in_range(layer.out_features, 100, 500) || layer.out_features % 100 != 0)
            throw InvalidArchitecture("fc out_features " +
                                      std::to_string(layer.out_features) +
                                      " not in {100,...,500}");
        break;
    case LayerKind::Relu:
    case LayerKind::Softmax:
        break;
    }
}

int label_of(const LayerSpec &layer) {
    check_vocabulary(layer);
    switch (layer.kind) {
    case LayerKind::Conv:
        return 3 * (layer.kernel - 2) + (layer.out_channels / 10 - 1);
    case LayerKind::Pool:
        return 12;
    case LayerKind::FullyConnected:
        return 13;
    case LayerKind::Relu:
        return 14;
    case LayerKind::Softmax:
        return 15;
    }
    return -1;
}

LabelSeq labels_of(const ArchSpec &arch) {
    LabelSeq out;
    out.reserve(arch.layers.size());
    for (const auto &l : arch.layers)
        out.push_back(label_of(l));
    return out;
}

LayerSpec layer_of_label(int label) {
    if (label >= 0 && label < 12)
        return LayerSpec::conv(2 + label / 3, 10 * (label % 3 + 1));
    switch (label) {
    case 12:
        return LayerSpec::pool(2);
    case 13:
        return LayerSpec::fc(100);
    case 14:
        return LayerSpec::relu();
    case 15:
        return LayerSpec::softmax();
    default:
        throw InvalidArchitecture("label " + std::to_string(label) +
                                  " is not a layer class");
    }
}

std::vector<Shape> infer_shapes(const ArchSpec &arch) {
    std::vector<Shape> shapes;
    shapes.reserve(arch.layers.size());
    Shape cur = arch.input_shape;
    if (cur.channels <= 0 || cur.height <= 0 || cur.width <= 0)
        throw InvalidArchitecture("input shape must be positive");
    for (std::size_t i = 0; i < arch.layers.size(); ++i) {
        const auto &l = arch.layers[i];
        switch (l.kind) {
        case LayerKind::Conv:
        case LayerKind::Pool:
            if (l.kernel <= 0 || cur.height < l.kernel || cur.width < l.kernel) {
                throw InvalidArchitecture(
                    "layer " + std::to_string(i) + " (" + describe(l) +
                    "): kernel larger than input " + std::to_string(cur.height) +
                    "x" + std::to_string(cur.width));
            }
            if (l.kind == LayerKind::Conv)
                cur = {l.out_channels, cur.height - l.kernel + 1,
                       cur.width - l.kernel + 1};
            else
                cur = {cur.channels, cur.height / l.kernel, cur.width / l.kernel};
            break;
        case LayerKind::FullyConnected:
            cur = {l.out_features, 1, 1};
            break;
        case LayerKind::Relu:
        case LayerKind::Softmax:
            break;
        }
        shapes.push_back(cur);
    }
    return shapes;
}

void validate(const ArchSpec &arch) {
    const auto n = arch.layers.size();
    if (n < static_cast<std::size_t>(kMinDepth) || n > static_cast<std::size_t>(kMaxDepth))
        throw InvalidArchitecture("depth " + std::to_string(n) + " outside [2,16]");
    for (const auto &l : arch.layers)
        check_vocabulary(l);
    infer_shapes(arch);
}

std::string describe(const LayerSpec &layer) {
    std::string s(to_string(layer.kind));
    switch (layer.kind) {
    case LayerKind::Conv:
        return s + "_" + std::to_string(layer.kernel) + "*" +
               std::to_string(layer.kernel) + "-" + std::to_string(layer.out_channels);
    case LayerKind::Pool:
        return s + "_" + std::to_string(layer.kernel);
    case LayerKind::FullyConnected:
        return s + "-" + std::to_string(layer.out_features);
    default:
        return s;
    }
}

} // namespace mercury

// Manifest I/O lives here so the JSON dependency stays out of the header.
#include "json.hpp"

#include <fstream>

namespace mercury {

std::string to_manifest_line(const ArchRecord &rec) {
    nlohmann::ordered_json j;
    j["id"] = rec.id;
    j["input_shape"] = {rec.arch.input_shape.channels, rec.arch.input_shape.height,
                        rec.arch.input_shape.width};
    auto layers = nlohmann::ordered_json::array();
    for (const auto &l : rec.arch.layers) {
        nlohmann::ordered_json lj;
        lj["kind"] = std::string(to_string(l.kind));
        if (l.kind == LayerKind::Conv || l.kind == LayerKind::Pool)
            lj["kernel"] = l.kernel;
        if (l.kind == LayerKind::Conv)
            lj["out_channels"] = l.out_channels;
        if (l.kind == LayerKind::FullyConnected)
            lj["out_features"] = l.out_features;
        layers.push_back(std::move(lj));
    }
    j["layers"] = std::move(layers);
    j["labels"] = labels_of(rec.arch);
    return j.dump();
}

ArchRecord parse_manifest_line(std::string_view line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error &e) {
        throw InvalidArchitecture(std::string("malformed manifest line: ") + e.what());
    }
    try {
        ArchRecord rec;
        rec.id = j.at("id").get<int>();
        const auto &shape = j.at("input_shape");
        if (shape.size() != 3)
            throw InvalidArchitecture("input_shape must have 3 entries");
        rec.arch.input_shape = {shape[0].get<int>(), shape[1].get<int>(),
                                shape[2].get<int>()};
        for (const auto &lj : j.at("layers")) {
            auto kind = parse_layer_kind(lj.at("kind").get<std::string>());
            if (!kind)
                throw InvalidArchitecture("unknown layer kind " + lj.at("kind").dump());
            LayerSpec l;
            l.kind = *kind;
            l.kernel = lj.value("kernel", 0);
            l.out_channels = lj.value("out_channels", 0);
            l.out_features = lj.value("out_features", 0);
            rec.arch.layers.push_back(l);
        }
        validate(rec.arch);
        if (j.contains("labels") && j["labels"].get<LabelSeq>() != labels_of(rec.arch))
            throw InvalidArchitecture("labels disagree with layers for id " +
                                      std::to_string(rec.id));
        return rec;
    } catch (const nlohmann::json::exception &e) {
        throw InvalidArchitecture(std::string("bad manifest record: ") + e.what());
    }
}

void write_arch_manifest(const std::string &path, const std::vector<ArchRecord> &recs) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open " + path + " for writing");
    for (const auto &r : recs)
        out << to_manifest_line(r) << '\n';
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

std::vector<ArchRecord> read_arch_manifest(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::vector<ArchRecord> recs;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty())
            recs.push_back(parse_manifest_line(line));
    return recs;
}

} // namespace mercury
