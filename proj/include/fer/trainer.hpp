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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "fer/data.hpp"
#include "fer/metrics.hpp"
#include "fer/model.hpp"
#include "fer/optim.hpp"

namespace fer {

struct TrainOptions {
    std::size_t epochs = 100;
    std::size_t batch_size = 512;
    AdamConfig adam{};
    std::uint64_t seed = 0;
    /// Batches between progress lines; 0 logs only once per epoch.
    std::size_t log_interval = 0;
    /// Latest checkpoint path, rewritten every epoch. The best epoch (by
    /// validation accuracy, or training accuracy without a validation set)
    /// goes to best_checkpoint_path(*checkpoint).
    std::optional<std::filesystem::path> checkpoint;
};

struct EpochStats {
    std::size_t epoch = 0;
    double mean_loss = 0.0;         ///< sample-weighted over the epoch
    double first_batch_loss = 0.0;  ///< loss of the first batch, before its update
    double train_accuracy = 0.0;    ///< from the Train-mode forward passes
    std::optional<double> val_accuracy;
    std::optional<double> val_macro_f1;
    std::size_t batches = 0;
    std::size_t samples = 0;
    std::size_t dropped = 0;
    double seconds = 0.0;
};

/// Returning false stops training after the current epoch.
using EpochCallback = std::function<bool(const EpochStats&)>;

/// "<stem>.best<ext>" next to the latest checkpoint.
std::filesystem::path best_checkpoint_path(const std::filesystem::path& latest);

/// Minibatch Adam training with softmax cross-entropy. Each epoch reshuffles
/// by (seed, epoch), logs one line, evaluates on validation when given, and
/// writes checkpoints if configured. Throws NumericError naming the epoch and
/// batch when the loss or any parameter becomes non-finite.
template <typename T>
std::vector<EpochStats> train_model(FerModel<T>& model, const ImageDataset& train,
                                    const ImageDataset* validation, const TrainOptions& options,
                                    std::ostream& log, const EpochCallback& on_epoch = {});

template <typename T>
struct EvalResult {
    ConfusionMatrix confusion;
    std::vector<int> predictions;
    Tensor<T> probabilities;  ///< [N, classes], dataset order
};

/// Infer-mode predictions over the whole dataset, in dataset order.
template <typename T>
EvalResult<T> evaluate(FerModel<T>& model, const ImageDataset& data, std::size_t batch_size = 256);

// ---------------------------------------------------------------------------
// Command-level workflows behind the CLI.

enum class Precision { f32, f64 };

struct TrainConfig {
    std::size_t epochs = 100;
    std::size_t batch_size = 512;
    double lr = 0.001;
    double weight_decay = 0.000001;
    std::uint64_t seed = 0;
    std::vector<std::filesystem::path> manifests;
    /// When empty, the merged manifests are split train_fraction : rest.
    std::vector<std::filesystem::path> validation_manifests;
    std::filesystem::path images_dir = ".";
    std::filesystem::path checkpoint = "fer.ckpt";
    std::size_t log_interval = 0;
    std::size_t threads = 1;
    double train_fraction = 0.8;
    bool cache_images = true;
    Precision precision = Precision::f32;
};

/// Throws std::invalid_argument for non-positive or missing settings.
void validate(const TrainConfig& config);

struct TrainReport {
    std::vector<EpochStats> epochs;
    std::size_t train_samples = 0;
    std::size_t validation_samples = 0;
    std::size_t skipped_rows = 0;
};

TrainReport cmd_train(const TrainConfig& config, std::ostream& log);

struct EvalConfig {
    std::filesystem::path checkpoint;
    std::vector<std::filesystem::path> manifests;
    std::filesystem::path images_dir = ".";
    /// Directory for metrics.txt, metrics.csv, confusion.csv and predictions.csv.
    std::filesystem::path out_dir = ".";
    std::size_t batch_size = 256;
    Precision precision = Precision::f32;
};

/// Evaluates, prints the text report to out and writes the report files.
ConfusionMatrix cmd_eval(const EvalConfig& config, std::ostream& out);

struct PredictResult {
    int label;
    std::vector<double> probabilities;
};

/// Classifies one image file and prints the class name and probability row.
PredictResult cmd_predict(const std::filesystem::path& checkpoint,
                          const std::filesystem::path& image, Precision precision,
                          std::ostream& out);

}  // namespace fer
