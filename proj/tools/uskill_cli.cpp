// Copyright 2026 The uskill Authors
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

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "uskill/adaptation.hpp"
#include "uskill/eval.hpp"
#include "uskill/gmm.hpp"
#include "uskill/gmr.hpp"
#include "uskill/image.hpp"
#include "uskill/io.hpp"
#include "uskill/mc_baseline.hpp"
#include "uskill/stability.hpp"
#include "uskill/synth.hpp"

namespace fs = std::filesystem;
using namespace uskill;

namespace {

Eigen::VectorXd read_feature_vector(const std::string& path) {
  std::istream* in = &std::cin;
  std::ifstream file;
  if (path != "-") {
    file.open(path);
    if (!file) throw ParseError("cannot open feature file " + path);
    in = &file;
  }
  std::vector<double> vals;
  double x;
  while (*in >> x) vals.push_back(x);
  if (vals.size() != kFeatureDim) {
    throw ParseError("feature input must hold exactly 40 numbers, got " +
                     std::to_string(vals.size()));
  }
  Eigen::VectorXd v(kFeatureDim);
  for (int i = 0; i < kFeatureDim; ++i) v[i] = vals[i];
  return v;
}

void print_control(const ControlVariable& cv) {
  const Eigen::VectorXd w = cv.flatten();
  std::cout.precision(12);
  for (long i = 0; i < w.size(); ++i) {
    std::cout << w[i] << (i + 1 < w.size() ? ' ' : '\n');
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scanning-skill model toolkit: learn, predict, evaluate"};
  app.require_subcommand(1);

  unsigned seed = 0;
  std::string config_path;
  app.add_option("--seed", seed, "Global random seed")->capture_default_str();
  app.add_option("--config", config_path, "key=value config file");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
  GenConfig gen_cfg;
  std::string gen_out = "dataset";
  gen->add_option("--subjects", gen_cfg.subjects)->capture_default_str();
  gen->add_option("--demos", gen_cfg.demos_per_subject)->capture_default_str();
  gen->add_option("--duration", gen_cfg.duration_s)->capture_default_str();
  gen->add_option("--rate", gen_cfg.rate_hz)->capture_default_str();
  gen->add_flag("--with-images", gen_cfg.with_images,
                "Render phantom images instead of direct features");
  gen->add_option("--out", gen_out, "Output dataset directory")
      ->capture_default_str();

  // encode
  auto* encode = app.add_subcommand(
      "encode", "Train or apply the patch encoder to dataset images");
  std::string enc_data, enc_model_out = "encoder.model", enc_model_in,
              enc_out;
  EncoderConfig enc_cfg;
  encode->add_option("--data", enc_data, "Dataset directory")->required();
  encode->add_option("--encoder", enc_model_in,
                     "Existing encoder model to apply");
  encode->add_option("--train-out", enc_model_out,
                     "Where to write the trained encoder")
      ->capture_default_str();
  encode->add_option("--epochs", enc_cfg.epochs)->capture_default_str();
  encode->add_option("--latent", enc_cfg.latent_width)->capture_default_str();
  encode->add_option("--lr", enc_cfg.learning_rate)->capture_default_str();
  encode->add_option("--out", enc_out,
                     "Write a copy of the dataset with feature vectors");

  // train-gmm
  auto* train_gmm = app.add_subcommand("train-gmm",
                                       "Fit the mixture model by EM");
  std::string gmm_data, gmm_out = "gmm.model";
  int gmm_k = 16;
  EmConfig em_cfg;
  bool gmm_summary = false;
  train_gmm->add_option("--data", gmm_data, "Dataset directory")->required();
  train_gmm->add_option("--components", gmm_k)->capture_default_str();
  train_gmm->add_option("--max-iter", em_cfg.max_iter)->capture_default_str();
  train_gmm->add_option("--tol", em_cfg.tol)->capture_default_str();
  train_gmm->add_option("--reg", em_cfg.reg)->capture_default_str();
  train_gmm->add_option("--out", gmm_out)->capture_default_str();
  train_gmm->add_flag("--summary", gmm_summary,
                      "Print a per-component cluster summary");

  // train-mc
  auto* train_mc = app.add_subcommand(
      "train-mc", "Train the Monte-Carlo baseline score network");
  std::string mc_data, mc_out = "mlp.model";
  MlpConfig mlp_cfg;
  train_mc->add_option("--data", mc_data, "Dataset directory")->required();
  train_mc->add_option("--epochs", mlp_cfg.epochs)->capture_default_str();
  train_mc->add_option("--lr", mlp_cfg.learning_rate)->capture_default_str();
  train_mc->add_option("--out", mc_out)->capture_default_str();

  // predict
  auto* predict_cmd = app.add_subcommand(
      "predict", "Predict the control variable for one feature vector");
  std::string pr_method = "gmm", pr_gmm, pr_mlp, pr_input = "-";
  double pr_sigma = 3.0;
  int pr_samples = 1000;
  bool pr_no_adapt = false;
  predict_cmd->add_option("--method", pr_method, "gmm or mc")
      ->check(CLI::IsMember({"gmm", "mc"}))
      ->capture_default_str();
  predict_cmd->add_option("--model", pr_gmm, "GMM model file");
  predict_cmd->add_option("--mlp", pr_mlp, "MLP model file (mc method)");
  predict_cmd->add_option("--sigma", pr_sigma, "Stability sigma level")
      ->capture_default_str();
  predict_cmd->add_option("--samples", pr_samples, "MC candidate count")
      ->capture_default_str();
  predict_cmd->add_flag("--no-adapt", pr_no_adapt,
                        "Disable adaptation of unstable predictions");
  predict_cmd->add_option("--input", pr_input,
                          "File with 40 feature values ('-' = stdin)")
      ->capture_default_str();

  // eval
  auto* eval_cmd = app.add_subcommand("eval",
                                      "Evaluate one method on a dataset");
  std::string ev_method = "gmm", ev_gmm, ev_mlp, ev_data, ev_encoder,
              ev_out_dir, ev_task = "eval";
  double ev_sigma = 3.0;
  int ev_samples = 1000;
  std::size_t ev_max_frames = 0;
  bool ev_no_adapt = false;
  eval_cmd->add_option("--method", ev_method)->check(
      CLI::IsMember({"gmm", "mc"}));
  eval_cmd->add_option("--model", ev_gmm, "GMM model file");
  eval_cmd->add_option("--mlp", ev_mlp, "MLP model file");
  eval_cmd->add_option("--data", ev_data, "Test dataset directory")
      ->required();
  eval_cmd->add_option("--encoder", ev_encoder,
                       "Encoder model for image-only frames");
  eval_cmd->add_option("--sigma", ev_sigma)->capture_default_str();
  eval_cmd->add_option("--samples", ev_samples)->capture_default_str();
  eval_cmd->add_option("--max-frames", ev_max_frames,
                       "Evaluate at most this many frames (0 = all)");
  eval_cmd->add_flag("--no-adapt", ev_no_adapt);
  eval_cmd->add_option("--task", ev_task, "Task label for the report");
  eval_cmd->add_option("--out", ev_out_dir, "Report output directory");

  // experiment
  auto* exp_cmd = app.add_subcommand(
      "experiment", "Run the full method-by-task evaluation matrix");
  std::string exp_out = "experiment_out", exp_tasks;
  exp_cmd->add_option("--out", exp_out)->capture_default_str();
  exp_cmd->add_option("--tasks", exp_tasks,
                      "Comma-separated task subset (default: all five)");

  CLI11_PARSE(app, argc, argv);

  try {
    Config file_cfg;
    if (!config_path.empty()) file_cfg = Config::from_file(config_path);

    if (*gen) {
      gen_cfg.seed = seed;
      const Dataset ds = generate_dataset(gen_cfg);
      save_dataset(ds, gen_out);
      std::cout << "wrote " << ds.subjects.size() << " subjects, "
                << ds.frame_count() << " frames to " << gen_out << '\n';
    } else if (*encode) {
      Dataset ds = load_dataset(enc_data);
      EncoderModel model;
      if (!enc_model_in.empty()) {
        model = load_encoder(enc_model_in);
      } else {
        enc_cfg.seed = seed;
        EncoderTrace trace;
        model = train_encoder(ds, enc_cfg, &trace);
        save_encoder(model, enc_model_out);
        std::cout << "trained encoder: loss " << trace.loss.front() << " -> "
                  << trace.final_loss << ", saved to " << enc_model_out
                  << '\n';
      }
      if (!enc_out.empty()) {
        for (auto& s : ds.subjects) {
          for (auto& d : s.demos) {
            for (auto& fr : d) {
              if (fr.image) fr.features = encode_features(*fr.image, model);
            }
          }
        }
        save_dataset(ds, enc_out);
        std::cout << "wrote encoded dataset to " << enc_out << '\n';
      }
    } else if (*train_gmm) {
      const Dataset ds = load_dataset(gmm_data);
      const auto nodes = collect_nodes(ds);
      if (nodes.empty()) {
        throw std::invalid_argument(
            "dataset has no feature vectors; run 'encode' first");
      }
      em_cfg.seed = seed;
      EmTrace trace;
      const GmmModel model = fit_em(nodes, gmm_k, em_cfg, &trace);
      save_gmm(model, gmm_out);
      std::cout << "fitted " << gmm_k << "-component model on "
                << nodes.size() << " nodes in " << trace.iterations
                << " iterations, saved to " << gmm_out << '\n';
      if (gmm_summary) std::cout << cluster_summary(model);
    } else if (*train_mc) {
      const Dataset ds = load_dataset(mc_data);
      const auto nodes = collect_nodes(ds);
      mlp_cfg.seed = seed;
      MlpTrace trace;
      auto [mlp, bounds] = train_mlp(nodes, mlp_cfg, &trace);
      save_mlp(mlp, bounds, mc_out);
      std::cout << "trained score network on " << nodes.size()
                << " nodes: loss " << trace.loss.front() << " -> "
                << trace.final_loss << ", saved to " << mc_out << '\n';
    } else if (*predict_cmd) {
      const Eigen::VectorXd v = read_feature_vector(pr_input);
      if (pr_method == "gmm") {
        if (pr_gmm.empty()) throw std::invalid_argument("--model is required");
        const GmmModel model = load_gmm(pr_gmm);
        GmmPredictor p(model, pr_sigma, !pr_no_adapt);
        bool stable = true;
        const ControlVariable cv = p.predict_frame(v, 0, &stable);
        print_control(cv);
        std::cout << (stable ? "stable" : "unstable") << '\n';
      } else {
        if (pr_mlp.empty()) throw std::invalid_argument("--mlp is required");
        auto [mlp, bounds] = load_mlp(pr_mlp);
        print_control(mc_predict(mlp, bounds, v, pr_samples, seed));
      }
    } else if (*eval_cmd) {
      const Dataset test = load_dataset(ev_data);
      std::unique_ptr<EncoderModel> encoder;
      if (!ev_encoder.empty()) {
        encoder = std::make_unique<EncoderModel>(load_encoder(ev_encoder));
      }
      std::unique_ptr<Predictor> method;
      if (ev_method == "gmm") {
        if (ev_gmm.empty()) throw std::invalid_argument("--model is required");
        method = std::make_unique<GmmPredictor>(load_gmm(ev_gmm), ev_sigma,
                                                !ev_no_adapt);
      } else {
        if (ev_mlp.empty()) throw std::invalid_argument("--mlp is required");
        auto [mlp, bounds] = load_mlp(ev_mlp);
        method = std::make_unique<McPredictor>(std::move(mlp),
                                               std::move(bounds), ev_samples,
                                               seed);
      }
      const EvalReport rep = evaluate(*method, test, ev_task, encoder.get(),
                                      ev_max_frames);
      std::cout << report_human_summary({rep});
      if (!ev_out_dir.empty()) write_reports({rep}, ev_out_dir);
    } else if (*exp_cmd) {
      if (seed != 0) file_cfg.set("seed", std::to_string(seed));
      if (!exp_tasks.empty()) file_cfg.set("tasks", exp_tasks);
      const ExperimentConfig cfg = ExperimentConfig::from_config(file_cfg);
      const auto reports = run_experiment(cfg, &std::cout);
      write_reports(reports, exp_out);
      std::cout << report_human_summary(reports);
      std::cout << "reports written to " << exp_out << '\n';
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
