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

#include "mercury/seq2seq/optim.hpp"

#include <cmath>
#include <algorithm>
#include <numbers>
#include <stdexcept>

namespace mercury::seq2seq {

void AdamConfig::validate() const {
    if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1) || !(eps > 0))
        throw std::invalid_argument("adam: betas must be in [0,1) and eps positive");
}

template <class T> Adam<T>::Adam(const ParameterSet<T> &ps, const AdamConfig &cfg) : cfg_(cfg) {
    cfg_.validate();
    for (const auto &p : ps) {
        m_.push_back(Mat<T>::Zero(p.value.rows(), p.value.cols()));
        v_.push_back(Mat<T>::Zero(p.value.rows(), p.value.cols()));
    }
}

template <class T> void Adam<T>::step(ParameterSet<T> &ps, double lr) {
    if (ps.size() != m_.size())
        throw std::invalid_argument("adam: parameter set changed since construction");
    ++t_;
    const T b1 = static_cast<T>(cfg_.beta1);
    const T b2 = static_cast<T>(cfg_.beta2);
    const T c1 = static_cast<T>(1.0 - std::pow(cfg_.beta1, static_cast<double>(t_)));
    const T c2 = static_cast<T>(1.0 - std::pow(cfg_.beta2, static_cast<double>(t_)));
    const T step = static_cast<T>(lr);
    const T eps = static_cast<T>(cfg_.eps);
    for (std::size_t i = 0; i < m_.size(); ++i) {
        auto &p = ps[static_cast<int>(i)];
        auto m = m_[i].array();
        auto v = v_[i].array();
        const auto g = p.grad.array();
        m = b1 * m + (T(1) - b1) * g;
        v = b2 * v + (T(1) - b2) * g.square();
        p.value.array() -= step * (m / c1) / ((v / c2).sqrt() + eps);
    }
}

void OneCycle::validate() const {
    if (!(warmup_fraction > 0 && warmup_fraction < 1))
        throw std::invalid_argument("one-cycle: warmup fraction must be in (0,1)");
    if (!(lr_min >= 0 && lr_max >= lr_min))
        throw std::invalid_argument("one-cycle: need 0 <= lr_min <= lr_max");
}

double OneCycle::lr(std::int64_t step, std::int64_t total_steps) const {
    if (total_steps <= 0)
        throw std::invalid_argument("one-cycle: total_steps must be positive");
    const double t = static_cast<double>(step);
    const double warm = warmup_fraction * static_cast<double>(total_steps);
    if (t <= warm)
        return lr_min + (lr_max - lr_min) * t / warm;
    const double span = static_cast<double>(total_steps) - warm;
    const double progress = std::min(1.0, (t - warm) / span);
    return lr_min + (lr_max - lr_min) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

template <class T> double clip_grad_norm(ParameterSet<T> &ps, double max_norm) {
    double sq = 0.0;
    for (const auto &p : ps)
        sq += p.grad.template cast<double>().squaredNorm();
    const double norm = std::sqrt(sq);
    if (max_norm > 0 && norm > max_norm) {
        const T s = static_cast<T>(max_norm / norm);
        for (auto &p : ps)
            p.grad *= s;
    }
    return norm;
}

template class Adam<float>;
template class Adam<double>;
template double clip_grad_norm<float>(ParameterSet<float> &, double);
template double clip_grad_norm<double>(ParameterSet<double> &, double);

} // namespace mercury::seq2seq
