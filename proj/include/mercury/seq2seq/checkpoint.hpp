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

#include "mercury/seq2seq/model.hpp"
#include "mercury/seq2seq/rnn_ctc.hpp"
#include "mercury/seq2seq/transformer.hpp"

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace mercury::seq2seq {

class CheckpointError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct NamedTensor {
    std::string name;
    Mat<double> value;
};

/// Model-independent parameter snapshot.
struct ExtractorParams {
    ModelKind kind = ModelKind::RnnCtc;
    std::string config; // key = value lines from SequenceModel::config_text
    std::vector<NamedTensor> tensors;

    std::int64_t parameter_count() const;
};

template <class T> ExtractorParams snapshot(const SequenceModel<T> &model);

/// Copies tensors into a model with the same architecture.
template <class T> void restore(SequenceModel<T> &model, const ExtractorParams &p);

/// Builds a model from the snapshot's config and loads its tensors.
template <class T> std::unique_ptr<SequenceModel<T>> instantiate(const ExtractorParams &p);

std::map<std::string, std::string> parse_config_text(const std::string &text);
RnnCtcConfig rnn_ctc_config_from(const std::map<std::string, std::string> &kv);
TransformerConfig transformer_config_from(const std::map<std::string, std::string> &kv);

// File layout, all integers little-endian:
//   "MCKP", u16 version, u8 kind (0 rnn-ctc, 1 transformer),
//   u32 config length, config bytes, u32 tensor count, then per tensor
//   u32 name length, name bytes, u32 rows, u32 cols, rows*cols f64 row-major.
std::string serialize(const ExtractorParams &p);
ExtractorParams deserialize(const std::string &bytes);
void save_checkpoint(const std::string &path, const ExtractorParams &p);
ExtractorParams load_checkpoint(const std::string &path);

} // namespace mercury::seq2seq
