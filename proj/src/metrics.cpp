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

#include "fer/metrics.hpp"

#include <cstdio>
#include <iomanip>

#include "fer/error.hpp"

namespace fer {

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string_view class_name(std::span<const std::string_view> names, std::size_t k) {
    return k < names.size() ? names[k] : std::string_view("?");
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::size_t classes)
    : classes_(classes), counts_(classes * classes, 0) {}

void ConfusionMatrix::accumulate(int true_label, int predicted_label) {
    const auto in_range = [this](int label) {
        return label >= 0 && static_cast<std::size_t>(label) < classes_;
    };
    if (!in_range(true_label) || !in_range(predicted_label)) {
        throw DataError("confusion matrix label pair (" + std::to_string(true_label) + ", " +
                        std::to_string(predicted_label) + ") outside [0," +
                        std::to_string(classes_ - 1) + "]");
    }
    ++counts_[static_cast<std::size_t>(true_label) * classes_ + static_cast<std::size_t>(predicted_label)];
    ++total_;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
    if (other.classes_ != classes_) {
        throw DataError("cannot merge confusion matrices of " + std::to_string(classes_) + " and " +
                        std::to_string(other.classes_) + " classes");
    }
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    total_ += other.total_;
}

std::uint64_t ConfusionMatrix::trace() const {
    std::uint64_t t = 0;
    for (std::size_t k = 0; k < classes_; ++k) t += count(k, k);
    return t;
}

void ConfusionMatrix::require_nonempty(std::string_view what) const {
    if (total_ == 0) throw DataError(std::string(what) + " of an empty confusion matrix");
}

double ConfusionMatrix::accuracy() const {
    require_nonempty("accuracy");
    return ratio(trace(), total_);
}

std::vector<ClassScores> ConfusionMatrix::per_class() const {
    std::vector<ClassScores> scores(classes_);
    for (std::size_t k = 0; k < classes_; ++k) {
        std::uint64_t row = 0, col = 0;
        for (std::size_t j = 0; j < classes_; ++j) {
            row += count(k, j);
            col += count(j, k);
        }
        const double p = ratio(count(k, k), col);
        const double r = ratio(count(k, k), row);
        const double f1 = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
        scores[k] = {p, r, f1, row, col};
    }
    return scores;
}

double ConfusionMatrix::macro_f1() const {
    require_nonempty("macro_f1");
    double sum = 0.0;
    for (const auto& s : per_class()) sum += s.f1;
    return sum / static_cast<double>(classes_);
}

void write_metrics_text(std::ostream& out, const ConfusionMatrix& cm,
                        std::span<const std::string_view> names) {
    const auto flags = out.flags();
    out << "samples:  " << cm.total() << "\n";
    out << std::fixed << std::setprecision(4);
    out << "accuracy: " << cm.accuracy() << "\n";
    out << "macro_f1: " << cm.macro_f1() << "  (unweighted mean over " << cm.classes()
        << " classes)\n\n";
    out << std::left << std::setw(12) << "class" << std::right << std::setw(10) << "precision"
        << std::setw(10) << "recall" << std::setw(10) << "f1" << std::setw(10) << "support" << "\n";
    const auto scores = cm.per_class();
    for (std::size_t k = 0; k < scores.size(); ++k) {
        out << std::left << std::setw(12) << class_name(names, k) << std::right << std::setw(10)
            << scores[k].precision << std::setw(10) << scores[k].recall << std::setw(10)
            << scores[k].f1 << std::setw(10) << scores[k].support << "\n";
    }
    out << "\nconfusion (rows = true, columns = predicted)\n";
    out << std::setw(12) << "";
    for (std::size_t j = 0; j < cm.classes(); ++j) out << std::setw(10) << class_name(names, j);
    out << "\n";
    for (std::size_t i = 0; i < cm.classes(); ++i) {
        out << std::left << std::setw(12) << class_name(names, i) << std::right;
        for (std::size_t j = 0; j < cm.classes(); ++j) out << std::setw(10) << cm.count(i, j);
        out << "\n";
    }
    out.flags(flags);
}

void write_metrics_csv(std::ostream& out, const ConfusionMatrix& cm,
                       std::span<const std::string_view> names) {
    char buf[160];
    out << "class,precision,recall,f1,support\n";
    const auto scores = cm.per_class();
    for (std::size_t k = 0; k < scores.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.*s,%.9f,%.9f,%.9f,%llu\n",
                      static_cast<int>(class_name(names, k).size()), class_name(names, k).data(),
                      scores[k].precision, scores[k].recall, scores[k].f1,
                      static_cast<unsigned long long>(scores[k].support));
        out << buf;
    }
    std::snprintf(buf, sizeof buf, "accuracy,,,%.9f,%llu\nmacro_f1,,,%.9f,%llu\n", cm.accuracy(),
                  static_cast<unsigned long long>(cm.total()), cm.macro_f1(),
                  static_cast<unsigned long long>(cm.total()));
    out << buf;
}

void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm,
                         std::span<const std::string_view> names) {
    out << "true\\predicted";
    for (std::size_t j = 0; j < cm.classes(); ++j) out << ',' << class_name(names, j);
    out << '\n';
    for (std::size_t i = 0; i < cm.classes(); ++i) {
        out << class_name(names, i);
        for (std::size_t j = 0; j < cm.classes(); ++j) out << ',' << cm.count(i, j);
        out << '\n';
    }
}

}  // namespace fer
