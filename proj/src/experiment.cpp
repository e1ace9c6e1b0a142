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

#include "mercury/experiment.hpp"

#include <algorithm>
#include <sstream>

namespace mercury {

InputSet make_inputs(const Dataset &ds, std::vector<std::size_t> indices) {
    InputSet s;
    s.indices = std::move(indices);
    s.x.reserve(s.indices.size());
    for (std::size_t i : s.indices)
        s.x.push_back(model_input(ds, i, {}));
    s.examples.reserve(s.indices.size());
    for (std::size_t k = 0; k < s.indices.size(); ++k)
        s.examples.push_back({&s.x[k], &ds.manifest.entries[s.indices[k]].labels});
    return s;
}

std::vector<std::size_t> train_rows(const Dataset &ds, bool augmented) {
    if (augmented)
        return ds.select(Split::Train, {});
    const PlacementName original[] = {PlacementName::Original};
    return ds.select(Split::Train, original);
}

std::vector<std::size_t> test_rows(const Dataset &ds) {
    const PlacementName original[] = {PlacementName::Original};
    return ds.select(Split::Test, original);
}

TrainedModel train_extractor(const RunConfig &cfg, seq2seq::ModelKind kind, const InputSet &train,
                             const InputSet &test, const seq2seq::EpochCallback &on_epoch) {
    if (train.examples.empty())
        throw DatasetError("no training traces");
    TrainedModel t;
    t.model = seq2seq::make_model<float>(kind, cfg.rnn(), cfg.transformer(),
                                         derive_seed(cfg.seed(), "init"));
    t.result = seq2seq::train(*t.model, train.examples, test.examples, cfg.train(kind), on_epoch);
    return t;
}

std::uint64_t eval_noise_seed(const RunConfig &cfg) { return derive_seed(cfg.seed(), "eval-noise"); }

std::vector<Localization> localize_rows(const seq2seq::SequenceModel<float> &model, const Dataset &ds,
                                        std::span<const std::size_t> indices, const SimParams &sim,
                                        const LocalizeOptions &opt) {
    std::vector<Localization> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) {
        const ManifestEntry &e = ds.manifest.entries[i];
        const Schedule sched = compile_schedule(ds.arch(e.arch_id).arch, sim);
        out.push_back(localize(model, model_input(ds, i, {}), sched, opt));
    }
    return out;
}

Grid parse_grid(const std::string &text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == text.size())
        throw ConfigError("grid must look like key=a..b or key=v1,v2");
    Grid g;
    g.label = text.substr(0, eq);
    if (g.label == "conv-layers")
        g.key = "rnn.conv_layers";
    else if (g.label == "rnn-dim")
        g.key = "rnn.dim";
    else
        g.key = g.label;
    const std::string spec = text.substr(eq + 1);
    if (const auto dots = spec.find(".."); dots != std::string::npos) {
        int lo = 0, hi = 0;
        try {
            std::size_t a = 0, b = 0;
            lo = std::stoi(spec.substr(0, dots), &a);
            hi = std::stoi(spec.substr(dots + 2), &b);
            if (a != dots || b != spec.size() - dots - 2)
                throw ConfigError("");
        } catch (const std::exception &) {
            throw ConfigError("bad grid range '" + spec + "'");
        }
        if (hi < lo)
            throw ConfigError("empty grid range '" + spec + "'");
        for (int v = lo; v <= hi; ++v)
            g.values.push_back(std::to_string(v));
    } else {
        std::istringstream in(spec);
        std::string item;
        while (std::getline(in, item, ','))
            if (!item.empty())
                g.values.push_back(item);
    }
    if (g.values.empty())
        throw ConfigError("grid has no values");
    RunConfig probe;
    for (const auto &v : g.values)
        probe.set(g.key, v); // rejects unknown keys and malformed values up front
    return g;
}

std::vector<AblationRow> run_ablation(const RunConfig &base, seq2seq::ModelKind kind, const Grid &grid,
                                      const InputSet &train, const InputSet &test,
                                      const seq2seq::EpochCallback &on_epoch) {
    std::vector<AblationRow> rows;
    for (const auto &v : grid.values) {
        RunConfig cfg = base;
        cfg.set(grid.key, v);
        const TrainedModel t = train_extractor(cfg, kind, train, test, on_epoch);
        rows.push_back(best_of(v, t.result.curves));
    }
    return rows;
}

} // namespace mercury
