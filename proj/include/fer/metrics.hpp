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

#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fer/labels.hpp"

namespace fer {

struct ClassScores {
    double precision;
    double recall;
    double f1;
    std::uint64_t support;    ///< row sum: samples whose true class is this one
    std::uint64_t predicted;  ///< column sum
};

/// Square count matrix, rows = true class, columns = predicted class.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t classes = kNumExpressions);

    /// Throws DataError if either label is outside [0, classes).
    void accumulate(int true_label, int predicted_label);

    /// Elementwise addition; shards of an evaluation merge this way.
    void merge(const ConfusionMatrix& other);

    [[nodiscard]] std::size_t classes() const { return classes_; }
    [[nodiscard]] std::uint64_t count(std::size_t true_label, std::size_t predicted_label) const {
        return counts_[true_label * classes_ + predicted_label];
    }
    [[nodiscard]] std::uint64_t total() const { return total_; }
    [[nodiscard]] std::uint64_t trace() const;

    /// trace / total. Throws DataError on an empty matrix.
    [[nodiscard]] double accuracy() const;

    /// Per-class precision, recall and F1. A 0/0 ratio scores 0, and so does a
    /// class whose precision + recall is 0.
    [[nodiscard]] std::vector<ClassScores> per_class() const;

    /// Unweighted mean of the per-class F1 over all classes, including classes
    /// absent from both truth and predictions. Throws DataError when empty.
    [[nodiscard]] double macro_f1() const;

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    void require_nonempty(std::string_view what) const;

    std::size_t classes_;
    std::vector<std::uint64_t> counts_;
    std::uint64_t total_ = 0;
};

/// Human-readable report: aggregates, per-class table, and the matrix.
void write_metrics_text(std::ostream& out, const ConfusionMatrix& cm,
                        std::span<const std::string_view> names);

/// CSV with one row per class (precision, recall, f1, support) followed by
/// accuracy and macro_f1 rows.
void write_metrics_csv(std::ostream& out, const ConfusionMatrix& cm,
                       std::span<const std::string_view> names);

/// CSV of raw counts with a header of predicted class names.
void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm,
                         std::span<const std::string_view> names);

}  // namespace fer
