// Copyright 2026-present the fercnn project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "fer/labels.hpp"
#include "fer/metrics.hpp"
#include "support/oracles.hpp"

using namespace fer;

TEST(Labels, FixedOrder) {
    EXPECT_EQ(kExpressionLabels[0], "neutral");
    EXPECT_EQ(kExpressionLabels[4], "happiness");
    EXPECT_EQ(kExpressionLabels[6], "surprise");
    EXPECT_EQ(label_index("fear"), 3);
}

TEST(Confusion, AccumulateAndCount) {
    ConfusionMatrix cm;
    cm.accumulate(3, 3);
    EXPECT_EQ(cm.count(3, 3), 1u);
    EXPECT_EQ(cm.total(), 1u);
    EXPECT_THROW(cm.accumulate(7, 0), DataError);
    EXPECT_THROW(cm.accumulate(0, -1), DataError);
}

TEST(Confusion, EmptyIsRejected) {
    ConfusionMatrix cm;
    EXPECT_THROW((void)cm.accuracy(), DataError);
    EXPECT_THROW((void)cm.macro_f1(), DataError);
}

TEST(Confusion, DiagonalAndZeroDiagonal) {
    ConfusionMatrix diag, off;
    for (int k = 0; k < 7; ++k) {
        diag.accumulate(k, k);
        off.accumulate(k, (k + 1) % 7);
    }
    EXPECT_EQ(diag.accuracy(), 1.0);
    EXPECT_EQ(diag.macro_f1(), 1.0);
    EXPECT_EQ(off.accuracy(), 0.0);
    EXPECT_EQ(off.macro_f1(), 0.0);
}

TEST(Confusion, TwoActiveClassesHandComputed) {
    // class 0: P = 1/1, R = 1/2, F1 = 2/3; class 1: P = 1/2, R = 1/1, F1 = 2/3;
    // classes 2..6 absent and score 0, so macro-F1 = (4/3)/7
    ConfusionMatrix cm;
    cm.accumulate(0, 0);
    cm.accumulate(0, 1);
    cm.accumulate(1, 1);
    EXPECT_NEAR(cm.macro_f1(), (4.0 / 3.0) / 7.0, 1e-15);
    EXPECT_NEAR(cm.accuracy(), 2.0 / 3.0, 1e-15);
    const auto s = cm.per_class();
    EXPECT_DOUBLE_EQ(s[0].precision, 1.0);
    EXPECT_DOUBLE_EQ(s[0].recall, 0.5);
    EXPECT_DOUBLE_EQ(s[1].precision, 0.5);
    EXPECT_EQ(s[5].f1, 0.0);
    EXPECT_EQ(s[5].support, 0u);
}

TEST(Confusion, RandomPairsMatchRecount) {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> label(0, 6);
    ConfusionMatrix cm;
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < 1000; ++i) {
        pairs.emplace_back(label(rng), label(rng));
        cm.accumulate(pairs.back().first, pairs.back().second);
    }
    EXPECT_EQ(cm.total(), 1000u);
    const auto ref = fer::check::recount(pairs, 7);
    EXPECT_EQ(cm.accuracy(), ref.accuracy);
    EXPECT_NEAR(cm.macro_f1(), ref.macro_f1, 1e-15);

    std::shuffle(pairs.begin(), pairs.end(), rng);
    ConfusionMatrix again;
    for (auto [t, p] : pairs) again.accumulate(t, p);
    EXPECT_EQ(again, cm);
}

TEST(Confusion, MergeEqualsSequential) {
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> label(0, 6);
    ConfusionMatrix all, a, b;
    for (int i = 0; i < 300; ++i) {
        const int t = label(rng), p = label(rng);
        all.accumulate(t, p);
        (i % 2 ? a : b).accumulate(t, p);
    }
    a.merge(b);
    EXPECT_EQ(a, all);
}

TEST(Confusion, PermutationInvariance) {
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> label(0, 6);
    std::vector<int> perm{3, 0, 6, 1, 5, 2, 4};
    ConfusionMatrix cm, permuted;
    for (int i = 0; i < 200; ++i) {
        const int t = label(rng), p = rng() % 3 ? t : label(rng);
        cm.accumulate(t, p);
        permuted.accumulate(perm[static_cast<std::size_t>(t)], perm[static_cast<std::size_t>(p)]);
    }
    EXPECT_NEAR(cm.macro_f1(), permuted.macro_f1(), 1e-15);
    EXPECT_EQ(cm.accuracy(), permuted.accuracy());
    EXPECT_GE(cm.macro_f1(), 0.0);
    EXPECT_LE(cm.macro_f1(), 1.0);
}

TEST(Reports, TextAndCsv) {
    ConfusionMatrix cm;
    cm.accumulate(0, 0);
    cm.accumulate(0, 1);
    cm.accumulate(1, 1);
    std::vector<std::string_view> names(kExpressionLabels.begin(), kExpressionLabels.end());
    std::ostringstream text, csv, conf;
    write_metrics_text(text, cm, names);
    write_metrics_csv(csv, cm, names);
    write_confusion_csv(conf, cm, names);
    EXPECT_NE(text.str().find("macro"), std::string::npos);
    EXPECT_NE(csv.str().find("macro_f1,"), std::string::npos);
    EXPECT_NE(csv.str().find("happiness"), std::string::npos);
    EXPECT_EQ(conf.str().substr(0, conf.str().find('\n')),
              "true\\predicted,neutral,anger,disgust,fear,happiness,sadness,surprise");
}
