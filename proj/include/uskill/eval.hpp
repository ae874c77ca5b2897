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

#ifndef USKILL_EVAL_HPP_
#define USKILL_EVAL_HPP_

#include <Eigen/Core>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "uskill/adaptation.hpp"
#include "uskill/gmm.hpp"
#include "uskill/gmr.hpp"
#include "uskill/image.hpp"
#include "uskill/mc_baseline.hpp"
#include "uskill/stability.hpp"
#include "uskill/synth.hpp"
#include "uskill/types.hpp"

namespace uskill {

// ---------------------------------------------------------------------------
// Flat key=value config files
// ---------------------------------------------------------------------------

class Config {
 public:
  Config() = default;

  static Config from_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open config " + path.string());
    Config cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      const auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
      };
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ParseError(path.filename().string() + ":" +
                         std::to_string(line_no) + ": expected key=value");
      }
      cfg.values_[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return cfg;
  }

  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_str(const std::string& key, const std::string& dflt) const {
    const auto it = values_.find(key);
    return it == values_.end() ? dflt : it->second;
  }

  double get_num(const std::string& key, double dflt) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("");
      return v;
    } catch (...) {
      throw ParseError("config field '" + key + "': bad number '" +
                       it->second + "'");
    }
  }

  int get_int(const std::string& key, int dflt) const {
    return static_cast<int>(get_num(key, dflt));
  }

  /// Comma-separated list of numbers.
  std::vector<double> get_list(const std::string& key,
                               const std::vector<double>& dflt) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        out.push_back(std::stod(tok));
      } catch (...) {
        throw ParseError("config field '" + key + "': bad list entry '" + tok +
                         "'");
      }
    }
    return out;
  }

  std::vector<std::string> get_str_list(
      const std::string& key, const std::vector<std::string>& dflt) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    std::vector<std::string> out;
    std::stringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      const auto b = tok.find_first_not_of(" \t");
      if (b == std::string::npos) continue;
      out.push_back(tok.substr(b, tok.find_last_not_of(" \t") - b + 1));
    }
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
};

// ---------------------------------------------------------------------------
// Predictors
// ---------------------------------------------------------------------------

/// One online prediction method under evaluation.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual ControlVariable predict_frame(const Eigen::VectorXd& v,
                                        std::size_t frame_idx,
                                        bool* stable) = 0;
  virtual std::string name() const = 0;
};

class GmmPredictor : public Predictor {
 public:
  GmmPredictor(const GmmModel& model, double sigma, bool adapt_enabled = true)
      : engine_(model),
        bounds_(likelihood_bounds(model, sigma)),
        sigma_(sigma),
        adapt_(adapt_enabled) {}

  ControlVariable predict_frame(const Eigen::VectorXd& v, std::size_t,
                                bool* stable) override {
    const GmrPrediction pred = engine_.predict(v);
    const ControlVariable raw = prediction_to_control(pred);
    const LatentNode node(v, raw);
    const StabilityVerdict verdict = classify(engine_.model(), bounds_, node);
    if (stable) *stable = verdict.stable;
    return adapt_ ? adapt(engine_.model(), node, verdict) : raw;
  }

  std::string name() const override {
    std::ostringstream os;
    os << "gmm_" << sigma_ << "sigma";
    if (!adapt_) os << "_noadapt";
    return os.str();
  }

 private:
  GmrEngine engine_;
  LikelihoodBounds bounds_;
  double sigma_;
  bool adapt_;
};

class McPredictor : public Predictor {
 public:
  McPredictor(MlpModel mlp, SampleBounds bounds, int n_samples, unsigned seed)
      : mlp_(std::move(mlp)),
        bounds_(std::move(bounds)),
        n_samples_(n_samples),
        seed_(seed) {}

  ControlVariable predict_frame(const Eigen::VectorXd& v,
                                std::size_t frame_idx, bool* stable) override {
    if (stable) *stable = true;  // no stability notion for this method
    return mc_predict(mlp_, bounds_, v, n_samples_,
                      seed_ + static_cast<unsigned>(frame_idx));
  }

  std::string name() const override {
    return "mc_" + std::to_string(n_samples_);
  }

 private:
  MlpModel mlp_;
  SampleBounds bounds_;
  int n_samples_;
  unsigned seed_;
};

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct FrameError {
  std::size_t frame = 0;
  double pose_deg = 0.0;
  double force_n = 0.0;
  double torque_nm = 0.0;
  bool stable = true;
};

struct EvalReport {
  std::string method;
  std::string task;
  std::size_t frames = 0;
  double pose_mean = 0, pose_std = 0;
  double force_mean = 0, force_std = 0;
  double torque_mean = 0, torque_std = 0;
  double stable_rate = 1.0;
  double fps = 0.0;
  std::vector<FrameError> records;  // filled only when requested
};

inline std::pair<double, double> mean_std(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / n)};  // population std
}

/// Feature vector of a frame: stored features win, otherwise the image is
/// encoded through the given model.
inline Eigen::VectorXd frame_features(const Frame& fr,
                                      const EncoderModel* encoder) {
  if (fr.features) return *fr.features;
  if (fr.image) {
    if (!encoder) {
      throw std::invalid_argument(
          "frame carries only an image but no encoder was provided");
    }
    return encode_features(*fr.image, *encoder);
  }
  throw std::invalid_argument("frame carries neither features nor image");
}

/// Test frames in deterministic order, optionally subsampled to at most
/// max_frames evenly spaced frames (0 = all).
inline std::vector<const Frame*> test_frames(const Dataset& ds,
                                             std::size_t max_frames) {
  std::vector<const Frame*> frames;
  for (const auto& s : ds.subjects) {
    for (const auto& d : s.demos) {
      for (const auto& fr : d) frames.push_back(&fr);
    }
  }
  if (max_frames == 0 || frames.size() <= max_frames) return frames;
  std::vector<const Frame*> picked;
  picked.reserve(max_frames);
  for (std::size_t i = 0; i < max_frames; ++i) {
    picked.push_back(frames[i * frames.size() / max_frames]);
  }
  return picked;
}

/// Runs one method over a test set. Error metrics compare the prediction
/// for each frame against that frame's recorded control variable. FPS
/// covers the prediction call only; feature encoding is excluded.
inline EvalReport evaluate(Predictor& method, const Dataset& test,
                           const std::string& task_name,
                           const EncoderModel* encoder = nullptr,
                           std::size_t max_frames = 0,
                           bool keep_records = false) {
  const auto frames = test_frames(test, max_frames);
  if (frames.empty()) throw std::invalid_argument("evaluate: empty test set");

  std::vector<Eigen::VectorXd> features;
  features.reserve(frames.size());
  for (const Frame* fr : frames) features.push_back(frame_features(*fr, encoder));

  std::vector<double> pose, force, torque;
  pose.reserve(frames.size());
  std::size_t stable_count = 0;
  EvalReport rep;
  rep.method = method.name();
  rep.task = task_name;
  rep.frames = frames.size();

  std::chrono::nanoseconds predict_time{0};
  for (std::size_t i = 0; i < frames.size(); ++i) {
    bool stable = true;
    const auto t0 = std::chrono::steady_clock::now();
    const ControlVariable pred = method.predict_frame(features[i], i, &stable);
    predict_time += std::chrono::steady_clock::now() - t0;

    const ControlVariable& truth = frames[i]->w;
    const double pe = quat_angle_deg(pred.p, truth.p);
    const auto [fe, te] = wrench_errors(pred.f, truth.f);
    pose.push_back(pe);
    force.push_back(fe);
    torque.push_back(te);
    if (stable) ++stable_count;
    if (keep_records) {
      rep.records.push_back({i, pe, fe, te, stable});
    }
  }

  std::tie(rep.pose_mean, rep.pose_std) = mean_std(pose);
  std::tie(rep.force_mean, rep.force_std) = mean_std(force);
  std::tie(rep.torque_mean, rep.torque_std) = mean_std(torque);
  rep.stable_rate = static_cast<double>(stable_count) / frames.size();
  const double secs = std::chrono::duration<double>(predict_time).count();
  rep.fps = frames.size() / std::max(secs, 1e-12);
  return rep;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline std::string report_csv_header(bool with_fps = true) {
  std::string h =
      "method,task,frames,pose_mean,pose_std,force_mean,force_std,"
      "torque_mean,torque_std,stable_rate";
  if (with_fps) h += ",fps";
  return h + "\n";
}

inline std::string report_csv_row(const EvalReport& r, bool with_fps = true) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << r.method << ',' << r.task << ',' << r.frames << ',' << r.pose_mean
     << ',' << r.pose_std << ',' << r.force_mean << ',' << r.force_std << ','
     << r.torque_mean << ',' << r.torque_std << ',' << r.stable_rate;
  if (with_fps) os << ',' << r.fps;
  os << '\n';
  return os.str();
}

inline EvalReport report_from_csv_row(const std::string& line) {
  std::stringstream ss(line);
  std::string tok;
  std::vector<std::string> toks;
  while (std::getline(ss, tok, ',')) toks.push_back(tok);
  if (toks.size() < 10) throw ParseError("bad report row: " + line);
  EvalReport r;
  r.method = toks[0];
  r.task = toks[1];
  r.frames = std::stoul(toks[2]);
  r.pose_mean = std::stod(toks[3]);
  r.pose_std = std::stod(toks[4]);
  r.force_mean = std::stod(toks[5]);
  r.force_std = std::stod(toks[6]);
  r.torque_mean = std::stod(toks[7]);
  r.torque_std = std::stod(toks[8]);
  r.stable_rate = std::stod(toks[9]);
  if (toks.size() > 10) r.fps = std::stod(toks[10]);
  return r;
}

inline std::string report_human_summary(const std::vector<EvalReport>& reps) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  std::string task;
  for (const auto& r : reps) {
    if (r.task != task) {
      task = r.task;
      os << "== task: " << task << " ==\n";
    }
    os << "  " << std::setw(14) << std::left << r.method << " pose "
       << r.pose_mean << " +- " << r.pose_std << " deg | force "
       << r.force_mean << " +- " << r.force_std << " N | torque "
       << r.torque_mean << " +- " << r.torque_std << " Nm | stable "
       << 100.0 * r.stable_rate << "% | " << r.fps << " fps\n";
  }
  return os.str();
}

/// Per-component digest of a fitted mixture (weight, output-mean force
/// magnitude, covariance spread); the numeric stand-in for an embedding
/// scatter plot.
inline std::string cluster_summary(const GmmModel& m) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "components " << m.K() << " dim " << m.dim() << " (input "
     << m.input_dim << " / output " << m.output_dim << ")\n";
  for (int k = 0; k < m.K(); ++k) {
    const auto& c = m.components[k];
    const Eigen::VectorXd w_mean = c.mean().tail(m.output_dim);
    os << "  k=" << std::setw(2) << k << " weight " << m.weights[k]
       << " |mean_v| " << c.mean().head(m.input_dim).norm() << " force_n "
       << w_mean.segment(4, 3).norm() << " cov_trace "
       << c.covariance().trace() << " logdet " << c.log_det() << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Experiment runner
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  GenConfig gen;
  EmConfig em;
  int gmm_components = 16;
  std::vector<double> sigma_levels = {1.0, 2.0, 3.0};
  std::vector<int> mc_samples = {50, 100, 200, 500, 1000, 2000, 5000, 10000};
  MlpConfig mlp;
  std::vector<SplitTask> tasks = {SplitTask::kIntra, SplitTask::kInterPatient,
                                  SplitTask::kInterGender,
                                  SplitTask::kInterAge, SplitTask::kInterBmi};
  std::size_t max_eval_frames = 0;  // 0 = whole test set
  bool adapt_enabled = true;
  unsigned seed = 0;

  static ExperimentConfig from_config(const Config& c) {
    ExperimentConfig ec;
    ec.seed = static_cast<unsigned>(c.get_num("seed", 0));
    ec.gen.subjects = c.get_int("gen.subjects", 24);
    ec.gen.demos_per_subject = c.get_int("gen.demos", 5);
    ec.gen.duration_s = c.get_num("gen.duration", 40.0);
    ec.gen.rate_hz = c.get_num("gen.rate", 10.0);
    ec.gen.with_images = c.get_int("gen.with_images", 0) != 0;
    ec.gen.seed = ec.seed;
    ec.gmm_components = c.get_int("gmm.components", 16);
    ec.em.max_iter = c.get_int("gmm.max_iter", 80);
    ec.em.tol = c.get_num("gmm.tol", 1e-6);
    ec.em.reg = c.get_num("gmm.reg", 1e-6);
    ec.em.seed = ec.seed;
    for (double s : c.get_list("gmm.sigmas", {1.0, 2.0, 3.0})) {
      if (s <= 0) throw ParseError("config field 'gmm.sigmas': must be > 0");
    }
    ec.sigma_levels = c.get_list("gmm.sigmas", {1.0, 2.0, 3.0});
    ec.mc_samples.clear();
    for (double s : c.get_list(
             "mc.samples", {50, 100, 200, 500, 1000, 2000, 5000, 10000})) {
      ec.mc_samples.push_back(static_cast<int>(s));
    }
    ec.mlp.learning_rate = c.get_num("mlp.lr", 1e-2);
    ec.mlp.epochs = c.get_int("mlp.epochs", 300);
    ec.mlp.seed = ec.seed;
    ec.tasks.clear();
    for (const auto& t : c.get_str_list(
             "tasks",
             {"intra", "inter_patient", "inter_gender", "inter_age",
              "inter_bmi"})) {
      ec.tasks.push_back(split_task_from_name(t));
    }
    ec.max_eval_frames =
        static_cast<std::size_t>(c.get_num("eval.max_frames", 0));
    ec.adapt_enabled = c.get_int("eval.adapt", 1) != 0;
    return ec;
  }
};

/// Runs the full method-by-task matrix on one generated corpus. Reports
/// come back grouped by task, MC rows first, then GMM rows, mirroring the
/// summary-table layout.
inline std::vector<EvalReport> run_experiment(const ExperimentConfig& cfg,
                                              std::ostream* log = nullptr) {
  const Dataset corpus = generate_dataset(cfg.gen);
  std::vector<EvalReport> reports;
  for (SplitTask task : cfg.tasks) {
    const auto [train, test] = make_split(corpus, task);
    const auto nodes = collect_nodes(train);
    if (log) {
      *log << "[task " << split_task_name(task) << "] train nodes "
           << nodes.size() << ", test frames " << test.frame_count() << '\n';
    }

    auto [mlp, bounds] = train_mlp(nodes, cfg.mlp);
    for (int n : cfg.mc_samples) {
      McPredictor mc(mlp, bounds, n, cfg.seed);
      reports.push_back(evaluate(mc, test, split_task_name(task), nullptr,
                                 cfg.max_eval_frames));
      if (log) *log << "  done " << reports.back().method << '\n';
    }

    const GmmModel gmm = fit_em(nodes, cfg.gmm_components, cfg.em);
    for (double sigma : cfg.sigma_levels) {
      GmmPredictor gp(gmm, sigma, cfg.adapt_enabled);
      reports.push_back(evaluate(gp, test, split_task_name(task), nullptr,
                                 cfg.max_eval_frames));
      if (log) *log << "  done " << reports.back().method << '\n';
    }
  }
  return reports;
}

/// Writes report.csv (with FPS), errors.csv (timing-free, byte-stable
/// across reruns with the same seeds), and summary.txt.
inline void write_reports(const std::vector<EvalReport>& reports,
                          const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::ofstream full(out_dir / "report.csv");
  std::ofstream errors(out_dir / "errors.csv");
  full << report_csv_header(true);
  errors << report_csv_header(false);
  for (const auto& r : reports) {
    full << report_csv_row(r, true);
    errors << report_csv_row(r, false);
  }
  std::ofstream summary(out_dir / "summary.txt");
  summary << report_human_summary(reports);
}

}  // namespace uskill

#endif  // USKILL_EVAL_HPP_
