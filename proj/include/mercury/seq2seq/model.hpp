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
#include "mercury/seq2seq/tensor.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mercury::seq2seq {

enum class ModelKind { RnnCtc, Transformer };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string &name);

/// One training or evaluation example: a channels x steps input and its labels.
struct Example {
    const Eigen::MatrixXd *x = nullptr;
    const LabelSeq *labels = nullptr;
};

/// Packs inputs into the time-major layout used by the layers: row t*B + b.
template <class T> Mat<T> pack_time_major(std::span<const Example> batch);

/// Common surface of the two extractors, used by training and evaluation.
template <class T> class SequenceModel {
  public:
    virtual ~SequenceModel() = default;

    virtual ModelKind kind() const = 0;
    virtual ParameterSet<T> &params() = 0;
    virtual const ParameterSet<T> &params() const = 0;

    /// Mean loss over the batch. With `accumulate` set, parameter gradients
    /// of that mean are added to params().
    virtual double loss(std::span<const Example> batch, bool accumulate) = 0;

    virtual LabelSeq predict(const Eigen::MatrixXd &x) const = 0;

    virtual std::vector<LabelSeq> predict_batch(std::span<const Example> batch) const {
        std::vector<LabelSeq> out;
        out.reserve(batch.size());
        for (const Example &ex : batch)
            out.push_back(predict(*ex.x));
        return out;
    }

    /// key=value lines describing the architecture.
    virtual std::string config_text() const = 0;
};

} // namespace mercury::seq2seq
