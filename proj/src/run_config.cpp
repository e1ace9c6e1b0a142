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

#include "mercury/run_config.hpp"

#include "mercury/eval.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace mercury {

namespace {

std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string &s, char sep) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, sep))
        out.push_back(trim(item));
    return out;
}

bool parse_int(const std::string &s, std::int64_t &out) {
    try {
        std::size_t used = 0;
        out = std::stoll(s, &used);
        return used == s.size();
    } catch (const std::exception &) {
        return false;
    }
}

bool parse_real(const std::string &s, double &out) {
    if (s == "inf" || s == "clean") {
        out = kNoNoise;
        return true;
    }
    try {
        std::size_t used = 0;
        out = std::stod(s, &used);
        return used == s.size() && !std::isnan(out);
    } catch (const std::exception &) {
        return false;
    }
}

std::string fmt_real(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::vector<KeySpec> build_keys() {
    const SimParams sim;
    const PdnParams pdn;
    const TdcConfig tdc;
    const DatasetSpec data;
    const seq2seq::RnnCtcConfig rnn;
    const seq2seq::TransformerConfig tf;
    const seq2seq::TrainConfig train;
    const auto I = KeyType::Int;
    const auto R = KeyType::Real;
    const auto S = KeyType::Text;
    auto i = [](std::int64_t v) { return std::to_string(v); };

    std::vector<KeySpec> k = {
        {"seed", I, "1", "experiment seed; every random stream derives from it"},
        {"sim.baseline", R, fmt_real(sim.baseline), "idle current"},
        {"sim.throughput", R, fmt_real(sim.throughput), "ops per sample"},
        {"sim.config_unit", R, fmt_real(sim.config_unit), "samples per register field"},
        {"sim.config_base", R, fmt_real(sim.config_base), "fixed samples per config pass"},
        {"sim.burst_gain", R, fmt_real(sim.burst_gain), "config burst scale"},
        {"sim.plateau_gain", R, fmt_real(sim.plateau_gain), "compute current at full utilization"},
        {"sim.bg_noise_std", R, fmt_real(sim.bg_noise_std), "background process std"},
        {"sim.bg_ar", R, fmt_real(sim.bg_ar), "background AR(1) coefficient"},
        {"sim.lead_in", I, i(sim.lead_in), "idle samples before the first layer"},
        {"sim.lead_out", I, i(sim.lead_out), "idle samples after the last layer"},
        {"sim.trace_len", I, i(sim.trace_len), "minimum trace length"},
        {"sim.min_compute", I, i(sim.min_compute), "shortest compute phase"},
        {"sim.pingpong_offset", I, i(sim.pingpong_offset), "delay of the next config after compute start"},
        {"sim.lanes", I, i(sim.lanes), "parallel compute lanes"},
        {"pdn.resistance", R, fmt_real(pdn.resistance), "ohms"},
        {"pdn.inductance", R, fmt_real(pdn.inductance), "henries"},
        {"pdn.capacitance", R, fmt_real(pdn.capacitance), "farads"},
        {"pdn.dt", R, fmt_real(pdn.dt), "seconds per sample"},
        {"pdn.v_nominal", R, fmt_real(pdn.v_nominal), "volts"},
        {"tdc.tap_count", I, i(tdc.tap_count), "taps in the delay line"},
        {"tdc.coarse_max", I, i(tdc.coarse_max), "coarse calibration range"},
        {"tdc.fine_max", I, i(tdc.fine_max), "fine calibration range"},
        {"tdc.coarse_unit", R, fmt_real(tdc.coarse_unit), "delay per coarse element"},
        {"tdc.fine_unit", R, fmt_real(tdc.fine_unit), "delay per fine element"},
        {"tdc.tap_unit", R, fmt_real(tdc.tap_unit), "delay per tap"},
        {"tdc.base_delay", R, fmt_real(tdc.base_delay), "unloaded sensed path delay"},
        {"tdc.clock_period", R, fmt_real(tdc.clock_period), "sampling clock period"},
        {"tdc.output_mode", S, "sum", "raw, sum or exp-sum (traces use sum)"},
        {"data.n_arch", I, i(data.n_arch), "random architectures"},
        {"data.traces_per_arch", I, i(data.traces_per_arch), "traces per architecture"},
        {"data.test_fraction", R, fmt_real(data.test_fraction), "held-out share of each architecture's traces"},
        {"data.augment_fraction", R, "0.1", "extra traces per augmentation placement, relative to the base count"},
        {"data.augment_placements", S, "none", "comma list of placements, 'all' or 'none'"},
        {"data.placement_test_traces", I, "auto",
         "held-out traces per augmentation placement; auto = the Original test count"},
        {"data.split_mode", S, "by-trace", "by-trace or by-architecture"},
        {"model.kind", S, "rnn-ctc", "rnn-ctc or transformer"},
        {"rnn.conv_layers", I, i(rnn.n_conv_layers), "conv front-end depth, 1-5"},
        {"rnn.dim", I, i(rnn.rnn_dim), "GRU hidden size"},
        {"rnn.layers", I, i(rnn.n_rnn_layers), "stacked BiGRU layers"},
        {"rnn.beam_width", I, i(rnn.beam_width), "CTC beam width"},
        {"tf.d_model", I, i(tf.d_model), "model width"},
        {"tf.heads", I, i(tf.n_heads), "attention heads"},
        {"tf.d_ff", I, i(tf.d_ff), "feed-forward width"},
        {"tf.encoder_layers", I, i(tf.n_encoder_layers), "encoder layers"},
        {"tf.decoder_layers", I, i(tf.n_decoder_layers), "decoder layers"},
        {"tf.front_kernel", I, i(tf.front_kernel), "front conv kernel"},
        {"tf.front_stride", I, i(tf.front_stride), "front conv stride"},
        {"tf.max_decode_len", I, i(tf.max_decode_len), "greedy decoding limit"},
        {"train.epochs", S, "auto", "epochs; auto = 120 for rnn-ctc, 100 for transformer"},
        {"train.batch_size", I, i(train.batch_size), "examples per step"},
        {"train.lr_max", R, fmt_real(train.schedule.lr_max), "one-cycle peak learning rate"},
        {"train.lr_min", R, fmt_real(train.schedule.lr_min), "one-cycle start and end learning rate"},
        {"train.warmup", R, fmt_real(train.schedule.warmup_fraction), "warmup share of all steps"},
        {"train.beta1", R, fmt_real(train.adam.beta1), "Adam beta1"},
        {"train.beta2", R, "auto", "Adam beta2; auto = 0.999 for rnn-ctc, 0.98 for transformer"},
        {"train.eps", R, "auto", "Adam epsilon; auto = 1e-8 for rnn-ctc, 1e-9 for transformer"},
        {"train.grad_clip", R, fmt_real(train.grad_clip), "gradient norm limit, 0 disables"},
        {"train.train_eval_size", I, i(train.train_eval_size), "training examples scored each epoch"},
        {"eval.snr", KeyType::RealList, "inf,50,40,30,25,10", "noise sweep levels in dB"},
        {"eval.noise_stage", S, "reduced", "informational: noise is added to reduced traces before normalization"},
    };
    for (PlacementName p : kAllPlacements) {
        if (p == PlacementName::Original)
            continue;
        const PlacementId d = default_placement(p);
        const std::string base = "placement." + std::string(to_string(p)) + ".";
        k.push_back({base + "gain", R, fmt_real(d.gain), "voltage-drop gain"});
        k.push_back({base + "offset", R, fmt_real(d.offset), "voltage-drop offset"});
        k.push_back({base + "noise_std", R, fmt_real(d.noise_std), "white noise std"});
    }
    std::sort(k.begin(), k.end(), [](const KeySpec &a, const KeySpec &b) { return a.name < b.name; });
    return k;
}

const KeySpec *find_key(const std::string &name) {
    for (const auto &k : RunConfig::keys())
        if (k.name == name)
            return &k;
    return nullptr;
}

} // namespace

const std::vector<KeySpec> &RunConfig::keys() {
    static const std::vector<KeySpec> k = build_keys();
    return k;
}

RunConfig::RunConfig() {
    for (const auto &k : keys())
        values_[k.name] = k.default_value;
}

void RunConfig::set(const std::string &key, const std::string &raw) {
    const KeySpec *spec = find_key(key);
    if (!spec)
        throw ConfigError("unknown config key '" + key + "'");
    const std::string value = trim(raw);
    bool ok = true;
    if (value != "auto" || spec->default_value != "auto") {
        std::int64_t iv = 0;
        double rv = 0;
        switch (spec->type) {
        case KeyType::Int:
            ok = parse_int(value, iv);
            break;
        case KeyType::Real:
            ok = parse_real(value, rv);
            break;
        case KeyType::RealList:
            for (const auto &item : split(value, ','))
                ok = ok && parse_real(item, rv);
            break;
        case KeyType::Text:
            ok = !value.empty();
            break;
        }
    }
    if (!ok)
        throw ConfigError("bad value '" + value + "' for config key '" + key + "'");
    values_[key] = value;
}

void RunConfig::set_assignment(const std::string &assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("expected key=value, got '" + assignment + "'");
    set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

void RunConfig::load_text(const std::string &text, const std::string &origin) {
    std::istringstream in(text);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(n) + ": expected 'key = value'");
        try {
            set(trim(line.substr(0, eq)), line.substr(eq + 1));
        } catch (const ConfigError &e) {
            throw ConfigError(origin + ":" + std::to_string(n) + ": " + e.what());
        }
    }
}

void RunConfig::load_file(const std::string &path) {
    std::ifstream f(path);
    if (!f)
        throw ConfigError("cannot read config file " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    load_text(ss.str(), path);
}

const std::string &RunConfig::get(const std::string &key) const {
    const auto it = values_.find(key);
    if (it == values_.end())
        throw ConfigError("unknown config key '" + key + "'");
    return it->second;
}

std::int64_t RunConfig::get_int(const std::string &key) const {
    std::int64_t v = 0;
    if (!parse_int(get(key), v))
        throw ConfigError("config key '" + key + "' is not an integer");
    return v;
}

double RunConfig::get_real(const std::string &key) const {
    double v = 0;
    if (!parse_real(get(key), v))
        throw ConfigError("config key '" + key + "' is not a number");
    return v;
}

std::vector<double> RunConfig::get_real_list(const std::string &key) const {
    std::vector<double> out;
    for (const auto &item : split(get(key), ',')) {
        double v = 0;
        if (!parse_real(item, v))
            throw ConfigError("config key '" + key + "' has a bad list item '" + item + "'");
        out.push_back(v);
    }
    return out;
}

std::string RunConfig::echo() const {
    std::ostringstream os;
    for (const auto &[k, v] : values_)
        os << k << " = " << v << "\n";
    return os.str();
}

void RunConfig::write_echo(const std::string &dir) const {
    std::filesystem::create_directories(dir);
    std::ofstream f(std::filesystem::path(dir) / "config.txt");
    if (!f)
        throw ConfigError("cannot write config echo into " + dir);
    f << echo();
}

std::uint64_t RunConfig::seed() const {
    const std::int64_t s = get_int("seed");
    if (s < 0)
        throw ConfigError("seed must be non-negative");
    return static_cast<std::uint64_t>(s);
}

SensorSetup RunConfig::sensor() const {
    SensorSetup s;
    s.sim.baseline = get_real("sim.baseline");
    s.sim.throughput = get_real("sim.throughput");
    s.sim.config_unit = get_real("sim.config_unit");
    s.sim.config_base = get_real("sim.config_base");
    s.sim.burst_gain = get_real("sim.burst_gain");
    s.sim.plateau_gain = get_real("sim.plateau_gain");
    s.sim.bg_noise_std = get_real("sim.bg_noise_std");
    s.sim.bg_ar = get_real("sim.bg_ar");
    s.sim.lead_in = get_int("sim.lead_in");
    s.sim.lead_out = get_int("sim.lead_out");
    s.sim.trace_len = get_int("sim.trace_len");
    s.sim.min_compute = get_int("sim.min_compute");
    s.sim.pingpong_offset = get_int("sim.pingpong_offset");
    s.sim.lanes = static_cast<int>(get_int("sim.lanes"));
    s.sim.seed = seed();
    s.sim.validate();

    s.pdn.resistance = get_real("pdn.resistance");
    s.pdn.inductance = get_real("pdn.inductance");
    s.pdn.capacitance = get_real("pdn.capacitance");
    s.pdn.dt = get_real("pdn.dt");
    s.pdn.v_nominal = get_real("pdn.v_nominal");
    s.pdn.validate();

    s.tdc.tap_count = static_cast<int>(get_int("tdc.tap_count"));
    s.tdc.coarse_max = static_cast<int>(get_int("tdc.coarse_max"));
    s.tdc.fine_max = static_cast<int>(get_int("tdc.fine_max"));
    s.tdc.coarse_unit = get_real("tdc.coarse_unit");
    s.tdc.fine_unit = get_real("tdc.fine_unit");
    s.tdc.tap_unit = get_real("tdc.tap_unit");
    s.tdc.base_delay = get_real("tdc.base_delay");
    s.tdc.clock_period = get_real("tdc.clock_period");
    const std::string &mode = get("tdc.output_mode");
    if (mode == "raw")
        s.tdc.output_mode = TdcOutputMode::Raw;
    else if (mode == "sum")
        s.tdc.output_mode = TdcOutputMode::Sum;
    else if (mode == "exp-sum")
        s.tdc.output_mode = TdcOutputMode::ExpSum;
    else
        throw ConfigError("tdc.output_mode must be raw, sum or exp-sum");
    if (s.tdc.output_mode != TdcOutputMode::Sum)
        throw ConfigError("traces store Sum readouts; tdc.output_mode must be sum for generation");

    for (PlacementName p : kAllPlacements) {
        if (p == PlacementName::Original)
            continue;
        const std::string base = "placement." + std::string(to_string(p)) + ".";
        PlacementId id{p, get_real(base + "gain"), get_real(base + "offset"), get_real(base + "noise_std")};
        id.validate();
        s.placements.push_back(id);
    }
    return s;
}

DatasetSpec RunConfig::dataset() const {
    DatasetSpec d;
    d.n_arch = static_cast<int>(get_int("data.n_arch"));
    d.traces_per_arch = static_cast<int>(get_int("data.traces_per_arch"));
    d.test_fraction = get_real("data.test_fraction");
    d.augment_fraction = get_real("data.augment_fraction");
    const std::string &pl = get("data.augment_placements");
    if (pl == "all") {
        for (PlacementName p : kAllPlacements)
            if (p != PlacementName::Original)
                d.augment_placements.push_back(p);
    } else if (pl != "none") {
        for (const auto &name : split(pl, ',')) {
            const auto p = parse_placement(name);
            if (!p || *p == PlacementName::Original)
                throw ConfigError("data.augment_placements: bad placement '" + name + "'");
            d.augment_placements.push_back(*p);
        }
    }
    if (d.augment_placements.empty())
        d.augment_fraction = 0.0;
    if (get("data.placement_test_traces") == "auto") {
        const auto per_arch = std::llround(d.test_fraction * d.traces_per_arch);
        d.placement_test_traces = static_cast<int>(per_arch * d.n_arch);
    } else {
        d.placement_test_traces = static_cast<int>(get_int("data.placement_test_traces"));
    }
    const std::string &mode = get("data.split_mode");
    if (mode == "by-trace")
        d.split_mode = SplitMode::ByTrace;
    else if (mode == "by-architecture")
        d.split_mode = SplitMode::ByArchitecture;
    else
        throw ConfigError("data.split_mode must be by-trace or by-architecture");
    d.seed = seed();
    d.sensor = sensor();
    if (d.n_arch < 1 || d.traces_per_arch < 1)
        throw ConfigError("data.n_arch and data.traces_per_arch must be at least 1");
    if (!(d.test_fraction >= 0 && d.test_fraction < 1))
        throw ConfigError("data.test_fraction must be in [0, 1)");
    return d;
}

seq2seq::RnnCtcConfig RunConfig::rnn() const {
    seq2seq::RnnCtcConfig c;
    c.n_conv_layers = static_cast<int>(get_int("rnn.conv_layers"));
    c.rnn_dim = static_cast<int>(get_int("rnn.dim"));
    c.n_rnn_layers = static_cast<int>(get_int("rnn.layers"));
    c.beam_width = static_cast<int>(get_int("rnn.beam_width"));
    try {
        c.validate();
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
    return c;
}

seq2seq::TransformerConfig RunConfig::transformer() const {
    seq2seq::TransformerConfig c;
    c.d_model = static_cast<int>(get_int("tf.d_model"));
    c.n_heads = static_cast<int>(get_int("tf.heads"));
    c.d_ff = static_cast<int>(get_int("tf.d_ff"));
    c.n_encoder_layers = static_cast<int>(get_int("tf.encoder_layers"));
    c.n_decoder_layers = static_cast<int>(get_int("tf.decoder_layers"));
    c.front_kernel = static_cast<int>(get_int("tf.front_kernel"));
    c.front_stride = static_cast<int>(get_int("tf.front_stride"));
    c.max_decode_len = static_cast<int>(get_int("tf.max_decode_len"));
    try {
        c.validate();
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
    return c;
}

seq2seq::TrainConfig RunConfig::train(seq2seq::ModelKind kind) const {
    const bool tf = kind == seq2seq::ModelKind::Transformer;
    seq2seq::TrainConfig t;
    t.epochs = get("train.epochs") == "auto" ? (tf ? 100 : 120) : static_cast<int>(get_int("train.epochs"));
    t.batch_size = static_cast<int>(get_int("train.batch_size"));
    t.seed = derive_seed(seed(), "train");
    t.schedule.lr_max = get_real("train.lr_max");
    t.schedule.lr_min = get_real("train.lr_min");
    t.schedule.warmup_fraction = get_real("train.warmup");
    t.adam.beta1 = get_real("train.beta1");
    t.adam.beta2 = get("train.beta2") == "auto" ? (tf ? 0.98 : 0.999) : get_real("train.beta2");
    t.adam.eps = get("train.eps") == "auto" ? (tf ? 1e-9 : 1e-8) : get_real("train.eps");
    t.grad_clip = get_real("train.grad_clip");
    t.train_eval_size = static_cast<int>(get_int("train.train_eval_size"));
    try {
        t.validate();
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
    return t;
}

std::vector<double> RunConfig::snr_levels() const { return get_real_list("eval.snr"); }

} // namespace mercury
