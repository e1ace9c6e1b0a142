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

#include "mercury/seq2seq/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mercury::seq2seq {

namespace {

constexpr char kMagic[4] = {'M', 'C', 'K', 'P'};
constexpr std::uint16_t kVersion = 1;

void put_u(std::string &out, std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
  public:
    explicit Reader(const std::string &b) : b_(b) {}

    std::uint64_t u(int bytes) {
        need(static_cast<std::size_t>(bytes));
        std::uint64_t v = 0;
        for (int i = 0; i < bytes; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b_[pos_++])) << (8 * i);
        return v;
    }
    std::string str(std::size_t n) {
        need(n);
        std::string s = b_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == b_.size(); }

  private:
    void need(std::size_t n) const {
        if (b_.size() - pos_ < n)
            throw CheckpointError("checkpoint: truncated data");
    }
    const std::string &b_;
    std::size_t pos_ = 0;
};

int get_int(const std::map<std::string, std::string> &kv, const std::string &key, int fallback) {
    const auto it = kv.find(key);
    if (it == kv.end())
        return fallback;
    try {
        std::size_t used = 0;
        const int v = std::stoi(it->second, &used);
        if (used != it->second.size())
            throw std::invalid_argument(key);
        return v;
    } catch (const std::exception &) {
        throw CheckpointError("checkpoint: bad integer for " + key + ": '" + it->second + "'");
    }
}

} // namespace

std::int64_t ExtractorParams::parameter_count() const {
    std::int64_t n = 0;
    for (const auto &t : tensors)
        n += t.value.size();
    return n;
}

template <class T> ExtractorParams snapshot(const SequenceModel<T> &model) {
    ExtractorParams p;
    p.kind = model.kind();
    p.config = model.config_text();
    for (const auto &param : model.params())
        p.tensors.push_back({param.name, param.value.template cast<double>()});
    return p;
}

template <class T> void restore(SequenceModel<T> &model, const ExtractorParams &p) {
    if (p.kind != model.kind())
        throw CheckpointError("checkpoint: model kind mismatch");
    auto &ps = model.params();
    if (ps.size() != p.tensors.size())
        throw CheckpointError("checkpoint: expected " + std::to_string(ps.size()) +
                              " tensors, found " + std::to_string(p.tensors.size()));
    for (const auto &t : p.tensors) {
        const int i = ps.find(t.name);
        if (i < 0)
            throw CheckpointError("checkpoint: unknown tensor " + t.name);
        auto &dst = ps[i].value;
        if (dst.rows() != t.value.rows() || dst.cols() != t.value.cols())
            throw CheckpointError("checkpoint: tensor " + t.name + " is " +
                                  shape_str(t.value.rows(), t.value.cols()) + ", model expects " +
                                  shape_str(dst.rows(), dst.cols()));
        dst = t.value.template cast<T>();
    }
}

std::map<std::string, std::string> parse_config_text(const std::string &text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

RnnCtcConfig rnn_ctc_config_from(const std::map<std::string, std::string> &kv) {
    RnnCtcConfig c;
    c.n_conv_layers = get_int(kv, "n_conv_layers", c.n_conv_layers);
    c.rnn_dim = get_int(kv, "rnn_dim", c.rnn_dim);
    c.n_rnn_layers = get_int(kv, "n_rnn_layers", c.n_rnn_layers);
    c.vocab = get_int(kv, "vocab", c.vocab);
    c.blank = get_int(kv, "blank", c.blank);
    c.input_channels = get_int(kv, "input_channels", c.input_channels);
    c.input_length = get_int(kv, "input_length", c.input_length);
    c.conv_kernel = get_int(kv, "conv_kernel", c.conv_kernel);
    c.conv_stride = get_int(kv, "conv_stride", c.conv_stride);
    c.beam_width = get_int(kv, "beam_width", c.beam_width);
    if (const auto it = kv.find("conv_channels"); it != kv.end()) {
        c.conv_channels.clear();
        std::istringstream in(it->second);
        std::string item;
        while (std::getline(in, item, ','))
            c.conv_channels.push_back(get_int({{"conv_channels", item}}, "conv_channels", 0));
    }
    return c;
}

TransformerConfig transformer_config_from(const std::map<std::string, std::string> &kv) {
    TransformerConfig c;
    c.d_model = get_int(kv, "d_model", c.d_model);
    c.n_heads = get_int(kv, "n_heads", c.n_heads);
    c.d_ff = get_int(kv, "d_ff", c.d_ff);
    c.n_encoder_layers = get_int(kv, "n_encoder_layers", c.n_encoder_layers);
    c.n_decoder_layers = get_int(kv, "n_decoder_layers", c.n_decoder_layers);
    c.input_channels = get_int(kv, "input_channels", c.input_channels);
    c.input_length = get_int(kv, "input_length", c.input_length);
    c.front_kernel = get_int(kv, "front_kernel", c.front_kernel);
    c.front_stride = get_int(kv, "front_stride", c.front_stride);
    c.max_decode_len = get_int(kv, "max_decode_len", c.max_decode_len);
    return c;
}

template <class T> std::unique_ptr<SequenceModel<T>> instantiate(const ExtractorParams &p) {
    const auto kv = parse_config_text(p.config);
    std::unique_ptr<SequenceModel<T>> m;
    if (p.kind == ModelKind::RnnCtc)
        m = std::make_unique<RnnCtc<T>>(rnn_ctc_config_from(kv), 0);
    else
        m = std::make_unique<Transformer<T>>(transformer_config_from(kv), 0);
    restore(*m, p);
    return m;
}

std::string serialize(const ExtractorParams &p) {
    std::string out(kMagic, 4);
    put_u(out, kVersion, 2);
    put_u(out, p.kind == ModelKind::RnnCtc ? 0 : 1, 1);
    put_u(out, p.config.size(), 4);
    out += p.config;
    put_u(out, p.tensors.size(), 4);
    for (const auto &t : p.tensors) {
        put_u(out, t.name.size(), 4);
        out += t.name;
        put_u(out, static_cast<std::uint64_t>(t.value.rows()), 4);
        put_u(out, static_cast<std::uint64_t>(t.value.cols()), 4);
        for (Eigen::Index i = 0; i < t.value.size(); ++i)
            put_u(out, std::bit_cast<std::uint64_t>(t.value.data()[i]), 8);
    }
    return out;
}

ExtractorParams deserialize(const std::string &bytes) {
    Reader r(bytes);
    if (r.str(4) != std::string(kMagic, 4))
        throw CheckpointError("checkpoint: bad magic");
    if (const auto v = r.u(2); v != kVersion)
        throw CheckpointError("checkpoint: unsupported version " + std::to_string(v));
    ExtractorParams p;
    const auto kind = r.u(1);
    if (kind > 1)
        throw CheckpointError("checkpoint: unknown model kind " + std::to_string(kind));
    p.kind = kind == 0 ? ModelKind::RnnCtc : ModelKind::Transformer;
    p.config = r.str(r.u(4));
    const auto count = r.u(4);
    for (std::uint64_t k = 0; k < count; ++k) {
        NamedTensor t;
        t.name = r.str(r.u(4));
        const auto rows = static_cast<Eigen::Index>(r.u(4));
        const auto cols = static_cast<Eigen::Index>(r.u(4));
        t.value.resize(rows, cols);
        for (Eigen::Index i = 0; i < t.value.size(); ++i)
            t.value.data()[i] = std::bit_cast<double>(r.u(8));
        p.tensors.push_back(std::move(t));
    }
    if (!r.done())
        throw CheckpointError("checkpoint: trailing bytes");
    return p;
}

void save_checkpoint(const std::string &path, const ExtractorParams &p) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw CheckpointError("checkpoint: cannot write " + path);
    const std::string bytes = serialize(p);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f)
        throw CheckpointError("checkpoint: write failed for " + path);
}

ExtractorParams load_checkpoint(const std::string &path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw CheckpointError("checkpoint: cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return deserialize(ss.str());
}

template ExtractorParams snapshot<float>(const SequenceModel<float> &);
template ExtractorParams snapshot<double>(const SequenceModel<double> &);
template void restore<float>(SequenceModel<float> &, const ExtractorParams &);
template void restore<double>(SequenceModel<double> &, const ExtractorParams &);
template std::unique_ptr<SequenceModel<float>> instantiate<float>(const ExtractorParams &);
template std::unique_ptr<SequenceModel<double>> instantiate<double>(const ExtractorParams &);

} // namespace mercury::seq2seq
