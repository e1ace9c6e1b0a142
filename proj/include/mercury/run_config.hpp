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

#include "mercury/dataset.hpp"
#include "mercury/seq2seq/rnn_ctc.hpp"
#include "mercury/seq2seq/train.hpp"
#include "mercury/seq2seq/transformer.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace mercury {

class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

enum class KeyType { Int, Real, Text, RealList };

struct KeySpec {
    std::string name;
    KeyType type;
    std::string default_value;
    std::string help;
};

/// Flat experiment configuration with dotted keys ("sim.throughput",
/// "train.lr_max", ...). Values start at their defaults, then a config file
/// and then command-line overrides are applied on top.
class RunConfig {
  public:
    RunConfig();

    static const std::vector<KeySpec> &keys();

    /// Parses "key = value" lines; '#' starts a comment.
    void load_text(const std::string &text, const std::string &origin = "<text>");
    void load_file(const std::string &path);
    void set(const std::string &key, const std::string &value);
    /// "key=value" form used by --set.
    void set_assignment(const std::string &assignment);

    const std::string &get(const std::string &key) const;
    std::int64_t get_int(const std::string &key) const;
    double get_real(const std::string &key) const;
    std::vector<double> get_real_list(const std::string &key) const;

    /// Every key in sorted order, one "key = value" per line.
    std::string echo() const;
    /// Writes echo() to dir/config.txt.
    void write_echo(const std::string &dir) const;

    std::uint64_t seed() const;
    SensorSetup sensor() const;
    DatasetSpec dataset() const;
    seq2seq::RnnCtcConfig rnn() const;
    seq2seq::TransformerConfig transformer() const;
    seq2seq::TrainConfig train(seq2seq::ModelKind kind) const;
    std::vector<double> snr_levels() const;

  private:
    std::map<std::string, std::string> values_;
};

} // namespace mercury
