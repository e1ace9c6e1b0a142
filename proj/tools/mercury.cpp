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

// mercury: command-line driver for dataset generation, training, evaluation
// sweeps and attention localization.

#include "mercury/experiment.hpp"
#include "mercury/seq2seq/checkpoint.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace mercury;
using seq2seq::ModelKind;

namespace {

// Options shared by every subcommand.
struct Common {
    std::string config_file;
    std::vector<std::string> sets;
    std::optional<std::int64_t> seed;
    std::string data;
    std::string out;
};

void add_common(CLI::App *cmd, Common &c, bool needs_data) {
    cmd->add_option("--config", c.config_file, "key = value config file")->check(CLI::ExistingFile);
    cmd->add_option("--set", c.sets, "override one key, e.g. --set train.lr_max=2e-3");
    cmd->add_option("--seed", c.seed, "experiment seed")->check(CLI::NonNegativeNumber);
    cmd->add_option("--out", c.out, "output directory")->required();
    if (needs_data)
        cmd->add_option("--data", c.data, "dataset directory")->required()->check(CLI::ExistingDirectory);
}

// Layers: defaults, then the config echoed by `generate` into the dataset,
// then --config, then flags.
RunConfig resolve(const Common &c, const std::vector<std::pair<std::string, std::string>> &flags) {
    RunConfig cfg;
    if (!c.data.empty() && fs::exists(fs::path(c.data) / "config.txt"))
        cfg.load_file((fs::path(c.data) / "config.txt").string());
    if (!c.config_file.empty())
        cfg.load_file(c.config_file);
    for (const auto &s : c.sets)
        cfg.set_assignment(s);
    if (c.seed)
        cfg.set("seed", std::to_string(*c.seed));
    for (const auto &[k, v] : flags)
        cfg.set(k, v);
    return cfg;
}

template <class V> void flag(std::vector<std::pair<std::string, std::string>> &f, const std::string &key,
                             const std::optional<V> &v) {
    if (v) {
        std::ostringstream os;
        os << *v;
        f.emplace_back(key, os.str());
    }
}

std::string join(const std::string &dir, const std::string &name) { return (fs::path(dir) / name).string(); }

void write_csv(const std::string &path, const std::function<void(std::ostream &)> &body) {
    std::ostringstream os;
    body(os);
    write_text_file(path, os.str());
}

std::vector<std::size_t> rows_for(const Dataset &ds, const std::string &placement) {
    if (placement == "all")
        return ds.select(Split::Test, {});
    const auto p = parse_placement(placement);
    if (!p)
        throw ConfigError("unknown placement '" + placement + "'");
    const PlacementName one[] = {*p};
    auto rows = ds.select(Split::Test, one);
    if (rows.empty())
        throw DatasetError("dataset has no test traces for placement " + placement);
    return rows;
}

std::unique_ptr<seq2seq::SequenceModel<float>> load_model(const std::string &path) {
    return seq2seq::instantiate<float>(seq2seq::load_checkpoint(path));
}

seq2seq::EpochCallback progress() {
    return [](const seq2seq::EpochStats &s) {
        std::cerr << "epoch " << s.epoch << " lr " << format_real(s.lr) << " train_loss "
                  << format_real(s.train_loss) << " test_loss " << format_real(s.test_loss)
                  << " train_oer " << format_real(s.train_oer) << " test_oer "
                  << format_real(s.test_oer) << '\n';
    };
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Deep-learning architecture extraction from simulated TDC power traces"};
    app.require_subcommand(1);

    // generate
    Common gen;
    std::optional<int> n_arch, traces_per_arch;
    std::optional<std::string> augment;
    auto *cmd_gen = app.add_subcommand("generate", "simulate and preprocess a dataset");
    add_common(cmd_gen, gen, false);
    cmd_gen->add_option("--n-arch", n_arch, "random architectures")->check(CLI::PositiveNumber);
    cmd_gen->add_option("--traces-per-arch", traces_per_arch, "traces per architecture")
        ->check(CLI::PositiveNumber);
    cmd_gen->add_option("--augment", augment, "augmentation placements: comma list, 'all' or 'none'");

    // train
    Common tr;
    std::string model_name = "rnn-ctc";
    std::optional<int> conv_layers, rnn_dim, epochs;
    bool augmented = false;
    auto *cmd_train = app.add_subcommand("train", "train an extractor");
    add_common(cmd_train, tr, true);
    cmd_train->add_option("--model", model_name, "rnn-ctc or transformer")
        ->check(CLI::IsMember({"rnn-ctc", "transformer"}));
    cmd_train->add_option("--conv-layers", conv_layers, "RNN-CTC conv layers")->check(CLI::Range(1, 5));
    cmd_train->add_option("--rnn-dim", rnn_dim, "RNN-CTC hidden size")->check(CLI::PositiveNumber);
    cmd_train->add_option("--epochs", epochs, "training epochs")->check(CLI::PositiveNumber);
    cmd_train->add_flag("--augmented", augmented, "also train on non-Original placement traces");

    // eval
    Common ev;
    std::string checkpoint, placement = "original";
    auto *cmd_eval = app.add_subcommand("eval", "per-trace OER of a checkpoint");
    add_common(cmd_eval, ev, true);
    cmd_eval->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
    cmd_eval->add_option("--placement", placement, "test placement or 'all'");

    // sweep-noise
    Common sn;
    std::string sn_ckpt;
    std::optional<std::string> snr;
    auto *cmd_noise = app.add_subcommand("sweep-noise", "OER and loss under injected Gaussian noise");
    add_common(cmd_noise, sn, true);
    cmd_noise->add_option("--checkpoint", sn_ckpt)->required()->check(CLI::ExistingFile);
    cmd_noise->add_option("--snr", snr, "comma-separated SNR levels in dB; the clean row is always added");

    // sweep-placement
    Common sp;
    std::vector<std::string> without, with;
    auto *cmd_place = app.add_subcommand("sweep-placement", "OER per TDC location");
    add_common(cmd_place, sp, true);
    cmd_place->add_option("--without", without, "checkpoints trained without augmentation")
        ->required()->check(CLI::ExistingFile);
    cmd_place->add_option("--with", with, "checkpoints trained with augmentation")->check(CLI::ExistingFile);

    // ablate
    Common ab;
    std::string grid, ab_model = "rnn-ctc";
    auto *cmd_ablate = app.add_subcommand("ablate", "train one model per grid value");
    add_common(cmd_ablate, ab, true);
    cmd_ablate->add_option("--grid", grid, "e.g. conv-layers=1..5 or rnn-dim=32,64,128,256")->required();
    cmd_ablate->add_option("--model", ab_model)->check(CLI::IsMember({"rnn-ctc", "transformer"}));

    // localize
    Common lo;
    std::string lo_ckpt;
    std::optional<std::string> trace;
    auto *cmd_loc = app.add_subcommand("localize", "attention heat maps and leakage hit rate");
    add_common(cmd_loc, lo, true);
    cmd_loc->add_option("--checkpoint", lo_ckpt)->required()->check(CLI::ExistingFile);
    cmd_loc->add_option("--trace", trace, "trace path from the manifest or manifest row; default: all test traces");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmd_gen) {
            std::vector<std::pair<std::string, std::string>> f;
            flag(f, "data.n_arch", n_arch);
            flag(f, "data.traces_per_arch", traces_per_arch);
            flag(f, "data.augment_placements", augment);
            const RunConfig cfg = resolve(gen, f);
            const DatasetSpec spec = cfg.dataset();
            const DatasetManifest m = build_dataset(spec, gen.out);
            cfg.write_echo(gen.out);
            std::cout << "wrote " << m.entries.size() << " traces to " << gen.out << '\n';
        } else if (*cmd_train) {
            std::vector<std::pair<std::string, std::string>> f{{"model.kind", model_name}};
            flag(f, "rnn.conv_layers", conv_layers);
            flag(f, "rnn.dim", rnn_dim);
            flag(f, "train.epochs", epochs);
            const RunConfig cfg = resolve(tr, f);
            const ModelKind kind = seq2seq::parse_model_kind(cfg.get("model.kind"));
            const Dataset ds = load_dataset(tr.data);
            const InputSet train_set = make_inputs(ds, train_rows(ds, augmented));
            const InputSet test_set = make_inputs(ds, test_rows(ds));
            const TrainedModel t = train_extractor(cfg, kind, train_set, test_set, progress());
            cfg.write_echo(tr.out);
            seq2seq::save_checkpoint(join(tr.out, "model.ckpt"), t.result.final_params);
            seq2seq::save_checkpoint(join(tr.out, "best.ckpt"), t.result.best_params);
            write_csv(join(tr.out, "curves.csv"),
                      [&](std::ostream &os) { seq2seq::write_curves_csv(os, t.result.curves); });
            std::cout << "final test OER " << format_real(t.result.curves.back().test_oer) << " (best "
                      << format_real(t.result.curves[t.result.best_epoch - 1].test_oer) << " at epoch "
                      << t.result.best_epoch << ")\n";
        } else if (*cmd_eval) {
            const RunConfig cfg = resolve(ev, {});
            const Dataset ds = load_dataset(ev.data);
            auto model = load_model(checkpoint);
            const auto rows = rows_for(ds, placement);
            const EvalReport r = evaluate(*model, ds, rows);
            cfg.write_echo(ev.out);
            write_csv(join(ev.out, "eval.csv"), [&](std::ostream &os) { write_eval_csv(os, ds, r); });
            std::cout << "traces " << rows.size() << " OER " << format_real(r.mean_oer) << " loss "
                      << format_real(r.mean_loss) << '\n';
        } else if (*cmd_noise) {
            std::vector<std::pair<std::string, std::string>> f;
            if (snr)
                f.emplace_back("eval.snr", "inf," + *snr);
            const RunConfig cfg = resolve(sn, f);
            const Dataset ds = load_dataset(sn.data);
            auto model = load_model(sn_ckpt);
            const auto rows = test_rows(ds);
            const auto table = noise_sweep(*model, ds, rows, cfg.snr_levels(), eval_noise_seed(cfg));
            cfg.write_echo(sn.out);
            write_csv(join(sn.out, "noise.csv"), [&](std::ostream &os) { write_noise_csv(os, table); });
            write_noise_csv(std::cout, table);
        } else if (*cmd_place) {
            const RunConfig cfg = resolve(sp, {});
            const Dataset ds = load_dataset(sp.data);
            std::map<ModelKind, std::unique_ptr<seq2seq::SequenceModel<float>>> wo, wi;
            for (const auto &p : without) {
                auto m = load_model(p);
                const ModelKind k = m->kind();
                if (!wo.emplace(k, std::move(m)).second)
                    throw ConfigError("two --without checkpoints of the same model kind");
            }
            for (const auto &p : with) {
                auto m = load_model(p);
                const ModelKind k = m->kind();
                if (!wo.count(k))
                    throw ConfigError("--with checkpoint has no --without counterpart of kind " +
                                      seq2seq::to_string(k));
                if (!wi.emplace(k, std::move(m)).second)
                    throw ConfigError("two --with checkpoints of the same model kind");
            }
            std::vector<PlacementName> placements;
            for (PlacementName p : kAllPlacements) {
                const PlacementName one[] = {p};
                if (!ds.select(Split::Test, one).empty())
                    placements.push_back(p);
            }
            std::map<ModelKind, std::vector<PlacementRow>> table;
            for (auto &[k, m] : wo) {
                auto it = wi.find(k);
                table[k] = placement_sweep(*m, it == wi.end() ? nullptr : it->second.get(), ds, placements);
            }
            cfg.write_echo(sp.out);
            write_csv(join(sp.out, "placement.csv"), [&](std::ostream &os) { write_placement_csv(os, table); });
            write_placement_csv(std::cout, table);
        } else if (*cmd_ablate) {
            const RunConfig cfg = resolve(ab, {{"model.kind", ab_model}});
            const Grid g = parse_grid(grid);
            const Dataset ds = load_dataset(ab.data);
            const InputSet train_set = make_inputs(ds, train_rows(ds, false));
            const InputSet test_set = make_inputs(ds, test_rows(ds));
            const auto rows = run_ablation(cfg, seq2seq::parse_model_kind(ab_model), g, train_set, test_set,
                                           progress());
            cfg.write_echo(ab.out);
            write_csv(join(ab.out, "ablation.csv"),
                      [&](std::ostream &os) { write_ablation_csv(os, g.label, rows); });
            write_ablation_csv(std::cout, g.label, rows);
        } else if (*cmd_loc) {
            const RunConfig cfg = resolve(lo, {});
            const Dataset ds = load_dataset(lo.data);
            auto model = load_model(lo_ckpt);
            if (model->kind() != ModelKind::Transformer)
                throw UnsupportedModel("localization needs a Transformer checkpoint");
            std::vector<std::size_t> rows;
            if (trace) {
                std::optional<std::size_t> found;
                for (std::size_t i = 0; i < ds.manifest.entries.size(); ++i)
                    if (ds.manifest.entries[i].trace_path == *trace || std::to_string(i) == *trace)
                        found = i;
                if (!found)
                    throw DatasetError("no trace '" + *trace + "' in the manifest");
                rows.push_back(*found);
            } else {
                rows = test_rows(ds);
            }
            const SimParams sim = cfg.sensor().sim;
            const auto results = localize_rows(*model, ds, rows, sim);
            cfg.write_echo(lo.out);
            write_csv(join(lo.out, "localization.csv"),
                      [&](std::ostream &os) { write_localization_csv(os, ds, rows, results); });
            for (std::size_t k = 0; k < rows.size(); ++k) {
                const std::string name = fs::path(ds.manifest.entries[rows[k]].trace_path).stem().string();
                write_text_file(join(lo.out, "attention_" + name + ".svg"),
                                attention_svg(results[k].reduced, results[k].predicted, name));
            }
            const LocalizationSummary s = summarize(results);
            std::cout << "traces " << s.traces << " hit_rate " << format_real(s.mean_hit_rate)
                      << " first_early_fraction " << format_real(s.first_early_fraction) << '\n';
        }
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
