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

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mercury::seq2seq {

/// Row-major dense matrix. Sequences are laid out one time step per row;
/// batched sequences are time-major (row t*B + b).
template <class T> using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T> using RowVec = Eigen::Matrix<T, 1, Eigen::Dynamic>;

class ShapeError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

std::string shape_str(Eigen::Index rows, Eigen::Index cols);

template <class A>
void require_shape(const A &got, Eigen::Index rows, Eigen::Index cols, const char *what) {
    if (got.rows() != rows || got.cols() != cols)
        throw ShapeError(std::string(what) + ": expected " + shape_str(rows, cols) + ", got " +
                         shape_str(got.rows(), got.cols()));
}

template <class T> struct Param {
    std::string name;
    Mat<T> value;
    Mat<T> grad;
};

/// Named, ordered parameter storage shared by the layers of one model.
template <class T> class ParameterSet {
  public:
    int add(std::string name, Mat<T> init) {
        for (const auto &p : params_)
            if (p.name == name)
                throw std::invalid_argument("duplicate parameter " + name);
        Mat<T> grad = Mat<T>::Zero(init.rows(), init.cols());
        params_.push_back({std::move(name), std::move(init), std::move(grad)});
        return static_cast<int>(params_.size()) - 1;
    }

    Param<T> &operator[](int i) { return params_[static_cast<std::size_t>(i)]; }
    const Param<T> &operator[](int i) const { return params_[static_cast<std::size_t>(i)]; }
    const Mat<T> &value(int i) const { return params_[static_cast<std::size_t>(i)].value; }
    Mat<T> &grad(int i) { return params_[static_cast<std::size_t>(i)].grad; }

    std::size_t size() const { return params_.size(); }
    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

    int find(const std::string &name) const {
        for (std::size_t i = 0; i < params_.size(); ++i)
            if (params_[i].name == name)
                return static_cast<int>(i);
        return -1;
    }

    std::int64_t count() const {
        std::int64_t n = 0;
        for (const auto &p : params_)
            n += p.value.size();
        return n;
    }

    void zero_grad() {
        for (auto &p : params_)
            p.grad.setZero();
    }

  private:
    std::vector<Param<T>> params_;
};

} // namespace mercury::seq2seq
