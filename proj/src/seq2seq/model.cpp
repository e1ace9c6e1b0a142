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

#include "mercury/seq2seq/model.hpp"

#include <stdexcept>

namespace mercury::seq2seq {

std::string to_string(ModelKind kind) {
    return kind == ModelKind::RnnCtc ? "rnn-ctc" : "transformer";
}

ModelKind parse_model_kind(const std::string &name) {
    if (name == "rnn-ctc")
        return ModelKind::RnnCtc;
    if (name == "transformer")
        return ModelKind::Transformer;
    throw std::invalid_argument("unknown model '" + name + "' (expected rnn-ctc or transformer)");
}

template <class T> Mat<T> pack_time_major(std::span<const Example> batch) {
    if (batch.empty())
        throw std::invalid_argument("pack_time_major: empty batch");
    const Eigen::Index channels = batch.front().x->rows();
    const Eigen::Index steps = batch.front().x->cols();
    const auto B = static_cast<Eigen::Index>(batch.size());
    Mat<T> out(steps * B, channels);
    for (Eigen::Index b = 0; b < B; ++b) {
        const Eigen::MatrixXd &x = *batch[static_cast<std::size_t>(b)].x;
        if (x.rows() != channels || x.cols() != steps)
            throw ShapeError("pack_time_major: input " + shape_str(x.rows(), x.cols()) +
                             " vs " + shape_str(channels, steps));
        for (Eigen::Index t = 0; t < steps; ++t)
            for (Eigen::Index c = 0; c < channels; ++c)
                out(t * B + b, c) = static_cast<T>(x(c, t));
    }
    return out;
}

template Mat<float> pack_time_major<float>(std::span<const Example>);
template Mat<double> pack_time_major<double>(std::span<const Example>);

} // namespace mercury::seq2seq
