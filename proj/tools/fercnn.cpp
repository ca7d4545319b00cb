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

// fercnn: train, evaluate and query the expression classifier.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "fer/annotations.hpp"
#include "fer/error.hpp"
#include "fer/parallel.hpp"
#include "fer/simd/isa.hpp"
#include "fer/synthetic.hpp"
#include "fer/trainer.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

const std::map<std::string, fer::Precision> kPrecisions{{"f32", fer::Precision::f32},
                                                        {"f64", fer::Precision::f64}};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Facial expression CNN: training, evaluation and prediction"};
    app.require_subcommand(1);
    std::string kernels = "auto";
    app.add_option("--kernels", kernels, "Kernel set: auto, generic or avx2")
        ->check(CLI::IsMember({"auto", "generic", "scalar", "avx2"}));

    fer::TrainConfig train;
    auto* train_cmd = app.add_subcommand("train", "Train a model and write checkpoints");
    train_cmd->add_option("--manifest", train.manifests, "Manifest CSV (path,label); repeatable")->required();
    train_cmd->add_option("--val-manifest", train.validation_manifests,
                          "Validation manifest; repeatable. Without it the data is split 80/20");
    train_cmd->add_option("--images-dir", train.images_dir, "Root that manifest paths are relative to");
    train_cmd->add_option("--epochs", train.epochs)->capture_default_str();
    train_cmd->add_option("--batch-size", train.batch_size)->capture_default_str();
    train_cmd->add_option("--lr", train.lr)->capture_default_str();
    train_cmd->add_option("--weight-decay", train.weight_decay)->capture_default_str();
    train_cmd->add_option("--seed", train.seed)->capture_default_str();
    train_cmd->add_option("--checkpoint", train.checkpoint, "Latest checkpoint; best goes to <stem>.best<ext>")
        ->capture_default_str();
    train_cmd->add_option("--log-interval", train.log_interval, "Batches between progress lines (0: per epoch)");
    train_cmd->add_option("--train-fraction", train.train_fraction)->capture_default_str();
    train_cmd->add_option("--threads", train.threads)->capture_default_str();
    train_cmd->add_flag("!--no-cache", train.cache_images, "Decode images on every access");
    train_cmd->add_option("--precision", train.precision)->transform(CLI::CheckedTransformer(kPrecisions));

    fer::EvalConfig eval;
    std::size_t eval_threads = 1;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on labeled data");
    eval_cmd->add_option("--checkpoint", eval.checkpoint)->required();
    eval_cmd->add_option("--manifest", eval.manifests)->required();
    eval_cmd->add_option("--images-dir", eval.images_dir);
    eval_cmd->add_option("--out", eval.out_dir, "Directory for metrics and predictions")->capture_default_str();
    eval_cmd->add_option("--batch-size", eval.batch_size)->capture_default_str();
    eval_cmd->add_option("--threads", eval_threads)->capture_default_str();
    eval_cmd->add_option("--precision", eval.precision)->transform(CLI::CheckedTransformer(kPrecisions));

    std::filesystem::path predict_ckpt;
    std::filesystem::path predict_image;
    fer::Precision predict_precision = fer::Precision::f32;
    auto* predict_cmd = app.add_subcommand("predict", "Classify one image");
    predict_cmd->add_option("--checkpoint", predict_ckpt)->required();
    predict_cmd->add_option("image", predict_image, "PGM, PNG or JPEG image")->required();
    predict_cmd->add_option("--precision", predict_precision)->transform(CLI::CheckedTransformer(kPrecisions));

    std::filesystem::path ann_dir;
    std::filesystem::path ann_out;
    fer::AnnotationOptions ann;
    std::filesystem::path ann_images;
    auto* manifest_cmd = app.add_subcommand("make-manifest", "Convert per-video annotation files to a manifest");
    manifest_cmd->add_option("annotations", ann_dir, "Directory of <video>.txt files")->required();
    manifest_cmd->add_option("--out", ann_out, "Output CSV")->required();
    manifest_cmd->add_option("--images-dir", ann_images, "Skip frames without an image under this root");
    manifest_cmd->add_option("--extension", ann.frame_extension)->capture_default_str();
    manifest_cmd->add_option("--digits", ann.frame_digits)->capture_default_str();

    fer::SyntheticConfig synth;
    std::filesystem::path synth_out;
    auto* synth_cmd = app.add_subcommand("make-synthetic", "Write the seeded 7-class pattern dataset");
    synth_cmd->add_option("--out", synth_out)->required();
    synth_cmd->add_option("--per-class", synth.per_class)->capture_default_str();
    synth_cmd->add_option("--size", synth.image_size)->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
    synth_cmd->add_option("--noise", synth.noise_std)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        const fer::simd::Isa isa = fer::simd::parse_isa(kernels);
        if (!fer::simd::isa_supported(isa)) {
            std::cerr << "error: kernel set " << kernels << " is not available on this machine\n";
            return kUsage;
        }
        fer::simd::set_active_isa(isa);

        if (*train_cmd) {
            std::cerr << "kernels: " << fer::simd::isa_name(fer::simd::active_isa()) << "\n";
            fer::cmd_train(train, std::cout);
            std::cout << "checkpoint: " << train.checkpoint.string() << "\n";
        } else if (*eval_cmd) {
            if (eval_threads == 0) throw std::invalid_argument("--threads must be positive");
            fer::set_num_threads(eval_threads);
            fer::cmd_eval(eval, std::cout);
            std::cout << "wrote " << (eval.out_dir / "metrics.txt").string() << ", metrics.csv, confusion.csv, "
                      << "predictions.csv\n";
        } else if (*predict_cmd) {
            fer::cmd_predict(predict_ckpt, predict_image, predict_precision, std::cout);
        } else if (*manifest_cmd) {
            if (!ann_images.empty()) ann.images_root = ann_images;
            const auto result = fer::convert_annotations(ann_dir, ann);
            std::ofstream out(ann_out);
            if (!out) throw fer::DataError("cannot write " + ann_out.string());
            fer::write_manifest(out, result.entries);
            std::cout << result.files << " annotation files, " << result.entries.size() << " frames written, "
                      << result.skipped_labels << " frames with labels outside 0..6 skipped, "
                      << result.missing_images << " frames without images skipped\n";
        } else if (*synth_cmd) {
            const auto entries = fer::write_synthetic_dataset(synth_out, synth);
            std::cout << "wrote " << entries.size() << " images and "
                      << (synth_out / "manifest.csv").string() << "\n";
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const fer::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumeric;
    } catch (const fer::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    } catch (const std::exception& e) {
        // filesystem and I/O failures land here
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    }
    return kOk;
}
