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

#include "fer/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "fer/checkpoint.hpp"
#include "fer/error.hpp"
#include "fer/parallel.hpp"

namespace fer {

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

template <typename T>
void check_finite(std::span<const ParamSlot<T>> params, std::size_t epoch, std::size_t batch) {
    for (const auto& p : params) {
        for (T v : p.value->values()) {
            if (!std::isfinite(v)) {
                throw NumericError("parameter " + p.name + " became non-finite at epoch " +
                                   std::to_string(epoch) + ", batch " + std::to_string(batch));
            }
        }
    }
}

std::vector<std::string_view> name_views(const std::vector<std::string>& names) {
    return {names.begin(), names.end()};
}

}  // namespace

std::filesystem::path best_checkpoint_path(const std::filesystem::path& latest) {
    std::filesystem::path best = latest.parent_path() / latest.stem();
    best += ".best";
    best += latest.extension();
    return best;
}

template <typename T>
std::vector<EpochStats> train_model(FerModel<T>& model, const ImageDataset& train,
                                    const ImageDataset* validation, const TrainOptions& options,
                                    std::ostream& log, const EpochCallback& on_epoch) {
    if (train.size() < 2) {
        throw DataError("training needs at least 2 samples, got " + std::to_string(train.size()));
    }
    auto params = model.params();
    Adam<T> optimizer(params, options.adam);
    std::vector<EpochStats> history;
    double best_score = -1.0;

    for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
        const auto started = std::chrono::steady_clock::now();
        EpochStats stats;
        stats.epoch = epoch;
        const auto plan = batch_plan(train.size(), options.batch_size, options.seed, epoch, &stats.dropped);
        if (stats.dropped != 0) {
            log << "warning: epoch " << epoch << " dropped " << stats.dropped
                << " sample left alone in the final batch\n";
        }

        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t b = 0; b < plan.size(); ++b) {
            Batch<T> batch = train.make_batch<T>(plan[b]);
            const Tensor<T> logits = model.forward_logits(std::move(batch.images), Mode::train);
            LossResult<T> loss = softmax_cross_entropy(logits, batch.labels);
            if (!std::isfinite(loss.loss)) {
                throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                   std::to_string(b + 1));
            }
            const auto predicted = argmax_rows(logits);
            for (std::size_t r = 0; r < predicted.size(); ++r) correct += predicted[r] == batch.labels[r];
            if (b == 0) stats.first_batch_loss = loss.loss;
            loss_sum += loss.loss * static_cast<double>(batch.labels.size());
            stats.samples += batch.labels.size();

            model.backward(loss.grad_logits);
            optimizer.step(params);
            check_finite<T>(params, epoch, b + 1);

            if (options.log_interval != 0 && (b + 1) % options.log_interval == 0) {
                log << "  epoch " << epoch << " batch " << (b + 1) << "/" << plan.size()
                    << " loss=" << fixed(loss.loss, 6) << "\n";
            }
        }
        stats.batches = plan.size();
        stats.mean_loss = loss_sum / static_cast<double>(stats.samples);
        stats.train_accuracy = static_cast<double>(correct) / static_cast<double>(stats.samples);

        if (validation != nullptr && validation->size() > 0) {
            const auto eval = evaluate(model, *validation, options.batch_size);
            stats.val_accuracy = eval.confusion.accuracy();
            stats.val_macro_f1 = eval.confusion.macro_f1();
        }
        stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

        log << "epoch " << epoch << "/" << options.epochs << " loss=" << fixed(stats.mean_loss, 6)
            << " first_batch_loss=" << fixed(stats.first_batch_loss, 6)
            << " train_acc=" << fixed(stats.train_accuracy, 4);
        if (stats.val_accuracy) {
            log << " val_acc=" << fixed(*stats.val_accuracy, 4)
                << " val_macro_f1=" << fixed(*stats.val_macro_f1, 4);
        }
        log << " batches=" << stats.batches << " time=" << fixed(stats.seconds, 1) << "s\n";
        log.flush();

        if (options.checkpoint) {
            const CheckpointMeta meta{static_cast<std::uint32_t>(epoch), options.seed};
            save_checkpoint(model, *options.checkpoint, meta);
            const double score = stats.val_accuracy.value_or(stats.train_accuracy);
            if (score > best_score) {
                best_score = score;
                save_checkpoint(model, best_checkpoint_path(*options.checkpoint), meta);
            }
        }

        history.push_back(stats);
        if (on_epoch && !on_epoch(stats)) break;
    }
    return history;
}

template <typename T>
EvalResult<T> evaluate(FerModel<T>& model, const ImageDataset& data, std::size_t batch_size) {
    if (data.size() == 0) throw DataError("cannot evaluate an empty dataset");
    if (batch_size == 0) throw std::invalid_argument("batch size must be at least 1");
    const std::size_t classes = model.config().num_classes;
    EvalResult<T> result{ConfusionMatrix(classes), {}, Tensor<T>({data.size(), classes})};
    result.predictions.reserve(data.size());

    std::vector<std::size_t> indices;
    for (std::size_t start = 0; start < data.size(); start += batch_size) {
        const std::size_t end = std::min(data.size(), start + batch_size);
        indices.clear();
        for (std::size_t i = start; i < end; ++i) indices.push_back(i);
        Batch<T> batch = data.make_batch<T>(indices);
        const Tensor<T> probs = model.forward(std::move(batch.images), Mode::infer);
        const auto predicted = argmax_rows(probs);
        for (std::size_t r = 0; r < predicted.size(); ++r) {
            result.confusion.accumulate(batch.labels[r], predicted[r]);
            result.predictions.push_back(predicted[r]);
        }
        std::copy(probs.data(), probs.data() + probs.size(), result.probabilities.data() + start * classes);
    }
    return result;
}

// ---------------------------------------------------------------------------

void validate(const TrainConfig& c) {
    if (c.epochs == 0) throw std::invalid_argument("--epochs must be positive");
    if (c.batch_size < 2) throw std::invalid_argument("--batch-size must be at least 2");
    if (!(c.lr > 0.0)) throw std::invalid_argument("--lr must be positive");
    if (!(c.weight_decay >= 0.0)) throw std::invalid_argument("--weight-decay must be non-negative");
    if (c.threads == 0) throw std::invalid_argument("--threads must be positive");
    if (c.manifests.empty()) throw std::invalid_argument("at least one --manifest is required");
    if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0)) {
        throw std::invalid_argument("--train-fraction must lie strictly between 0 and 1");
    }
    if (c.checkpoint.empty()) throw std::invalid_argument("--checkpoint must not be empty");
}

namespace {

std::vector<ManifestEntry> merge_manifests(const std::vector<std::filesystem::path>& paths,
                                           std::size_t& skipped, std::ostream& log) {
    std::vector<ManifestEntry> merged;
    for (const auto& p : paths) {
        Manifest m = load_manifest(p);
        log << "manifest " << p.string() << ": " << m.entries.size() << " samples, " << m.skipped
            << " rows skipped (label outside 0..6)\n";
        skipped += m.skipped;
        merged.insert(merged.end(), m.entries.begin(), m.entries.end());
    }
    return merged;
}

template <typename T>
TrainReport run_train(const TrainConfig& config, std::ostream& log) {
    TrainReport report;
    std::vector<ManifestEntry> all = merge_manifests(config.manifests, report.skipped_rows, log);
    DataSplit parts;
    if (config.validation_manifests.empty()) {
        parts = split(std::move(all), SplitConfig{config.train_fraction, config.seed});
    } else {
        parts.train = std::move(all);
        parts.validation = merge_manifests(config.validation_manifests, report.skipped_rows, log);
    }
    if (parts.train.size() < 2) {
        throw DataError("training split has " + std::to_string(parts.train.size()) +
                        " usable samples; need at least 2");
    }
    report.train_samples = parts.train.size();
    report.validation_samples = parts.validation.size();
    log << "train samples: " << report.train_samples
        << ", validation samples: " << report.validation_samples << "\n";

    ImageDataset train(std::move(parts.train), config.images_dir, config.cache_images);
    ImageDataset val(std::move(parts.validation), config.images_dir, config.cache_images);

    const auto parent = config.checkpoint.parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);

    FerModel<T> model(fer_architecture(), config.seed);
    TrainOptions options;
    options.epochs = config.epochs;
    options.batch_size = config.batch_size;
    options.adam.lr = config.lr;
    options.adam.weight_decay = config.weight_decay;
    options.seed = config.seed;
    options.log_interval = config.log_interval;
    options.checkpoint = config.checkpoint;
    report.epochs = train_model(model, train, val.size() > 0 ? &val : nullptr, options, log);
    return report;
}

template <typename T>
ConfusionMatrix run_eval(const EvalConfig& config, std::ostream& out) {
    std::size_t skipped = 0;
    std::vector<ManifestEntry> entries;
    for (const auto& p : config.manifests) {
        Manifest m = load_manifest(p);
        skipped += m.skipped;
        entries.insert(entries.end(), m.entries.begin(), m.entries.end());
    }
    if (entries.empty()) throw DataError("no usable samples in the evaluation manifests");

    FerModel<T> model = load_checkpoint<T>(config.checkpoint);
    ImageDataset data(entries, config.images_dir, false);
    const EvalResult<T> result = evaluate(model, data, config.batch_size);
    const auto names = name_views(model.config().label_names);

    std::filesystem::create_directories(config.out_dir);
    const auto open = [&](const char* name) {
        std::ofstream f(config.out_dir / name);
        if (!f) throw DataError("cannot write " + (config.out_dir / name).string());
        return f;
    };
    {
        auto f = open("metrics.txt");
        write_metrics_text(f, result.confusion, names);
    }
    {
        auto f = open("metrics.csv");
        write_metrics_csv(f, result.confusion, names);
    }
    {
        auto f = open("confusion.csv");
        write_confusion_csv(f, result.confusion, names);
    }
    {
        auto f = open("predictions.csv");
        f << "path,true,pred";
        for (auto n : names) f << ",p_" << n;
        f << '\n';
        const std::size_t k = names.size();
        char buf[32];
        for (std::size_t i = 0; i < entries.size(); ++i) {
            f << entries[i].image_path << ',' << entries[i].label << ',' << result.predictions[i];
            for (std::size_t j = 0; j < k; ++j) {
                std::snprintf(buf, sizeof buf, ",%.9g", static_cast<double>(result.probabilities[i * k + j]));
                f << buf;
            }
            f << '\n';
        }
    }

    if (skipped != 0) out << "rows skipped (label outside 0..6): " << skipped << "\n";
    write_metrics_text(out, result.confusion, names);
    return result.confusion;
}

template <typename T>
PredictResult run_predict(const std::filesystem::path& checkpoint, const std::filesystem::path& image,
                          std::ostream& out) {
    FerModel<T> model = load_checkpoint<T>(checkpoint);
    Tensor<float> gray = load_grayscale(image);
    if (gray.dim(0) != kImageSide || gray.dim(1) != kImageSide) gray = resize_bilinear(gray);
    Tensor<T> input({1, kImageSide, kImageSide, 1});
    for (std::size_t i = 0; i < gray.size(); ++i) input[i] = static_cast<T>(gray[i] / 255.0f);

    const Tensor<T> probs = model.forward(std::move(input), Mode::infer);
    PredictResult result{argmax_rows(probs)[0], {}};
    const auto& names = model.config().label_names;
    out << "prediction: " << names[static_cast<std::size_t>(result.label)] << "\n";
    char buf[64];
    for (std::size_t j = 0; j < probs.size(); ++j) {
        result.probabilities.push_back(static_cast<double>(probs[j]));
        std::snprintf(buf, sizeof buf, "%-10s %.9f\n", names[j].c_str(), static_cast<double>(probs[j]));
        out << buf;
    }
    return result;
}

}  // namespace

TrainReport cmd_train(const TrainConfig& config, std::ostream& log) {
    validate(config);
    set_num_threads(config.threads);
    return config.precision == Precision::f64 ? run_train<double>(config, log)
                                              : run_train<float>(config, log);
}

ConfusionMatrix cmd_eval(const EvalConfig& config, std::ostream& out) {
    if (config.manifests.empty()) throw std::invalid_argument("at least one --manifest is required");
    if (config.batch_size == 0) throw std::invalid_argument("--batch-size must be positive");
    return config.precision == Precision::f64 ? run_eval<double>(config, out)
                                              : run_eval<float>(config, out);
}

PredictResult cmd_predict(const std::filesystem::path& checkpoint, const std::filesystem::path& image,
                          Precision precision, std::ostream& out) {
    return precision == Precision::f64 ? run_predict<double>(checkpoint, image, out)
                                       : run_predict<float>(checkpoint, image, out);
}

template std::vector<EpochStats> train_model(FerModel<float>&, const ImageDataset&, const ImageDataset*,
                                             const TrainOptions&, std::ostream&, const EpochCallback&);
template std::vector<EpochStats> train_model(FerModel<double>&, const ImageDataset&, const ImageDataset*,
                                             const TrainOptions&, std::ostream&, const EpochCallback&);
template EvalResult<float> evaluate(FerModel<float>&, const ImageDataset&, std::size_t);
template EvalResult<double> evaluate(FerModel<double>&, const ImageDataset&, std::size_t);

}  // namespace fer
