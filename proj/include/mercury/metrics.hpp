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

#include <span>

namespace mercury {

/// Unit-cost edit distance.
int levenshtein(std::span<const int> a, std::span<const int> b);

/// Operation error rate: levenshtein(pred, truth) / |truth|. Can exceed 1.
double oer(std::span<const int> pred, std::span<const int> truth);

} // namespace mercury
