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

#include "mercury/archmodel.hpp"
#include "mercury/dataset.hpp"

#include <gtest/gtest.h>

#include <set>

namespace mercury {
namespace {

TEST(Labels, ConvFcPair) {
    ArchSpec a{{LayerSpec::conv(5, 10), LayerSpec::fc(100)}};
    EXPECT_EQ(labels_of(a), (LabelSeq{9, 13}));
}

TEST(Labels, PoolReluSoftmax) {
    ArchSpec a{{LayerSpec::pool(3), LayerSpec::relu(), LayerSpec::softmax()}};
    EXPECT_EQ(labels_of(a), (LabelSeq{12, 14, 15}));
}

TEST(Labels, Empty) { EXPECT_TRUE(labels_of(ArchSpec{}).empty()); }

TEST(Labels, ConvFormulaCoversAllTwelveClasses) {
    std::set<int> seen;
    for (int k = 2; k <= 5; ++k)
        for (int c = 10; c <= 30; c += 10) {
            const int l = label_of(LayerSpec::conv(k, c));
            EXPECT_EQ(l, 3 * (k - 2) + (c / 10 - 1));
            seen.insert(l);
        }
    EXPECT_EQ(seen.size(), 12u);
}

TEST(Labels, RejectsOutOfVocabulary) {
    EXPECT_THROW(label_of(LayerSpec::conv(6, 10)), InvalidArchitecture);
    EXPECT_THROW(label_of(LayerSpec::conv(3, 15)), InvalidArchitecture);
    EXPECT_THROW(label_of(LayerSpec::pool(1)), InvalidArchitecture);
    EXPECT_THROW(label_of(LayerSpec::fc(250)), InvalidArchitecture);
}

TEST(Labels, RoundTripThroughCanonicalLayer) {
    for (int l = 0; l < kNumLayerClasses; ++l) {
        const LayerSpec s = layer_of_label(l);
        EXPECT_EQ(label_of(s), l);
        if (s.kind == LayerKind::Conv) {
            EXPECT_EQ(s.kernel, l / 3 + 2);
            EXPECT_EQ(s.out_channels, (l % 3 + 1) * 10);
        }
    }
    EXPECT_THROW(layer_of_label(kBlankLabel), std::exception);
}

TEST(Shapes, ConvPoolRelu) {
    ArchSpec a{{LayerSpec::conv(3, 10), LayerSpec::pool(2), LayerSpec::relu()}};
    const auto s = infer_shapes(a);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s[0], (Shape{10, 26, 26}));
    EXPECT_EQ(s[1], (Shape{10, 13, 13}));
    EXPECT_EQ(s[2], (Shape{10, 13, 13}));
}

TEST(Shapes, FcFlattens) {
    ArchSpec a{{LayerSpec::conv(3, 10), LayerSpec::fc(200)}};
    EXPECT_EQ(infer_shapes(a).back(), (Shape{200, 1, 1}));
}

TEST(Shapes, UnderflowThrows) {
    ArchSpec a{{LayerSpec::conv(5, 10), LayerSpec::pool(5), LayerSpec::pool(5), LayerSpec::conv(2, 10)}};
    EXPECT_THROW(infer_shapes(a), InvalidArchitecture);
}

TEST(Manifest, LineRoundTrip) {
    ArchRecord r{7, {{LayerSpec::conv(4, 20), LayerSpec::relu(), LayerSpec::pool(2), LayerSpec::fc(300),
                      LayerSpec::softmax()}}};
    const ArchRecord back = parse_manifest_line(to_manifest_line(r));
    EXPECT_EQ(back.id, 7);
    EXPECT_EQ(back.arch, r.arch);
}

TEST(Manifest, RejectsInconsistentLabels) {
    ArchRecord r{1, {{LayerSpec::conv(2, 10), LayerSpec::relu()}}};
    std::string line = to_manifest_line(r);
    const auto pos = line.find("\"labels\":[0,14]");
    ASSERT_NE(pos, std::string::npos) << line;
    line.replace(pos, 15, "\"labels\":[1,14]");
    EXPECT_THROW(parse_manifest_line(line), std::exception);
}

// Every architecture the generator emits must be valid; the depth range is
// fully covered.
TEST(Generator, DrawsAreValidAndCoverAllDepths) {
    Rng rng = make_rng(5, "arch-test");
    std::set<std::size_t> depths;
    std::set<int> labels;
    for (int i = 0; i < 10000; ++i) {
        const ArchSpec a = random_arch(rng);
        ASSERT_NO_THROW(validate(a));
        depths.insert(a.layers.size());
        for (int l : labels_of(a))
            labels.insert(l);
        // Pool never first, Softmax only last.
        EXPECT_NE(a.layers.front().kind, LayerKind::Pool);
        for (std::size_t j = 0; j + 1 < a.layers.size(); ++j)
            EXPECT_NE(a.layers[j].kind, LayerKind::Softmax);
    }
    EXPECT_EQ(depths.size(), static_cast<std::size_t>(kMaxDepth - kMinDepth + 1));
    EXPECT_EQ(*depths.begin(), static_cast<std::size_t>(kMinDepth));
    EXPECT_EQ(*depths.rbegin(), static_cast<std::size_t>(kMaxDepth));
    EXPECT_EQ(labels.size(), static_cast<std::size_t>(kNumLayerClasses));
}

TEST(Generator, Deterministic) {
    Rng a = make_rng(11, "arch"), b = make_rng(11, "arch");
    for (int i = 0; i < 50; ++i)
        EXPECT_EQ(random_arch(a), random_arch(b));
}

} // namespace
} // namespace mercury
