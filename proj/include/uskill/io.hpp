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

#ifndef USKILL_IO_HPP_
#define USKILL_IO_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "uskill/gmm.hpp"
#include "uskill/image.hpp"
#include "uskill/mc_baseline.hpp"
#include "uskill/types.hpp"

namespace uskill {

namespace io_detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline void write_values(std::ostream& os, const double* data, long n) {
  for (long i = 0; i < n; ++i) {
    if (i) os << ' ';
    os << fmt(data[i]);
  }
  os << '\n';
}

class LineReader {
 public:
  LineReader(std::istream& is, std::string name)
      : is_(is), name_(std::move(name)) {}

  /// Next non-empty line split into whitespace tokens.
  std::vector<std::string> next() {
    std::string line;
    while (std::getline(is_, line)) {
      ++line_no_;
      std::istringstream ls(line);
      std::vector<std::string> toks;
      std::string t;
      while (ls >> t) toks.push_back(t);
      if (!toks.empty()) return toks;
    }
    throw ParseError(name_ + ": unexpected end of file after line " +
                     std::to_string(line_no_));
  }

  bool eof() {
    while (is_.peek() != EOF) {
      if (!std::isspace(is_.peek())) return false;
      is_.get();
    }
    return true;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(name_ + ":" + std::to_string(line_no_) + ": " + what);
  }

  double num(const std::string& tok) const {
    try {
      std::size_t pos = 0;
      const double v = std::stod(tok, &pos);
      if (pos != tok.size()) fail("bad number '" + tok + "'");
      return v;
    } catch (const std::invalid_argument&) {
      fail("bad number '" + tok + "'");
    } catch (const std::out_of_range&) {
      fail("number out of range '" + tok + "'");
    }
  }

  int line_no() const { return line_no_; }

 private:
  std::istream& is_;
  std::string name_;
  int line_no_ = 0;
};

/// Reads exactly n doubles spread over one or more lines.
inline Eigen::VectorXd read_values(LineReader& lr, long n) {
  Eigen::VectorXd out(n);
  long i = 0;
  while (i < n) {
    for (const auto& tok : lr.next()) {
      if (i >= n) lr.fail("too many values on line");
      out[i++] = lr.num(tok);
    }
  }
  return out;
}

}  // namespace io_detail

// ---------------------------------------------------------------------------
// Dataset trajectory format: one text file per subject, image sidecars as
// raw 224*224 byte grids (row-major, one byte per pixel).
// ---------------------------------------------------------------------------

inline void save_image_sidecar(const Image& img,
                               const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  std::vector<std::uint8_t> bytes(kImageSize * kImageSize);
  for (int r = 0; r < kImageSize; ++r) {
    for (int c = 0; c < kImageSize; ++c) {
      const double v = std::clamp(static_cast<double>(img(r, c)), 0.0, 1.0);
      bytes[r * kImageSize + c] =
          static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
  }
  os.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

inline Image load_image_sidecar(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("cannot read image sidecar " + path.string());
  std::vector<std::uint8_t> bytes(kImageSize * kImageSize);
  is.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (is.gcount() != static_cast<long>(bytes.size())) {
    throw ParseError("image sidecar " + path.string() + " truncated");
  }
  Image img(kImageSize, kImageSize);
  for (int r = 0; r < kImageSize; ++r) {
    for (int c = 0; c < kImageSize; ++c) {
      img(r, c) = static_cast<float>(bytes[r * kImageSize + c] / 255.0);
    }
  }
  return img;
}

/// Writes the dataset into a directory: subject_<id>.traj per subject plus
/// binary image sidecars for frames that carry images.
inline void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  validate_dataset(ds);
  std::filesystem::create_directories(dir);
  for (const auto& s : ds.subjects) {
    const std::string stem = "subject_" + std::to_string(s.meta.id);
    std::ofstream os(dir / (stem + ".traj"));
    if (!os) {
      throw std::runtime_error("cannot write " + (dir / stem).string());
    }
    os << "uskill-trajectory v1\n";
    os << "subject " << s.meta.id << ' ' << s.meta.age << ' '
       << (s.meta.gender == Gender::kMale ? "male" : "female") << ' '
       << io_detail::fmt(s.meta.height_m) << ' '
       << io_detail::fmt(s.meta.weight_kg) << '\n';
    for (std::size_t j = 0; j < s.demos.size(); ++j) {
      const auto& demo = s.demos[j];
      os << "demo " << demo.size() << '\n';
      for (std::size_t i = 0; i < demo.size(); ++i) {
        const Frame& fr = demo[i];
        const Eigen::VectorXd w = fr.w.flatten();
        os << io_detail::fmt(fr.timestamp);
        for (long k = 0; k < w.size(); ++k) os << ' ' << io_detail::fmt(w[k]);
        if (fr.image) {
          const std::string ref =
              stem + "_d" + std::to_string(j) + "_f" + std::to_string(i) +
              ".img";
          save_image_sidecar(*fr.image, dir / ref);
          os << " img " << ref;
        }
        if (fr.features) {
          os << " v";
          for (long k = 0; k < fr.features->size(); ++k) {
            os << ' ' << io_detail::fmt((*fr.features)[k]);
          }
        }
        os << '\n';
      }
    }
  }
}

inline Subject load_subject_file(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw ParseError("cannot open " + file.string());
  io_detail::LineReader lr(is, file.filename().string());

  auto header = lr.next();
  if (header.size() < 2 || header[0] != "uskill-trajectory" ||
      header[1] != "v1") {
    lr.fail("not a uskill-trajectory v1 file");
  }
  auto meta_toks = lr.next();
  if (meta_toks.size() != 6 || meta_toks[0] != "subject") {
    lr.fail("expected 'subject <id> <age> <gender> <height> <weight>'");
  }
  Subject subj;
  subj.meta.id = static_cast<int>(lr.num(meta_toks[1]));
  subj.meta.age = static_cast<int>(lr.num(meta_toks[2]));
  if (meta_toks[3] == "male") {
    subj.meta.gender = Gender::kMale;
  } else if (meta_toks[3] == "female") {
    subj.meta.gender = Gender::kFemale;
  } else {
    lr.fail("gender must be 'male' or 'female'");
  }
  subj.meta.height_m = lr.num(meta_toks[4]);
  subj.meta.weight_kg = lr.num(meta_toks[5]);

  while (!lr.eof()) {
    auto demo_toks = lr.next();
    if (demo_toks.size() != 2 || demo_toks[0] != "demo") {
      lr.fail("expected 'demo <frame_count>'");
    }
    const long count = static_cast<long>(lr.num(demo_toks[1]));
    Demonstration demo;
    demo.reserve(count);
    for (long i = 0; i < count; ++i) {
      auto toks = lr.next();
      if (toks.size() < 11) lr.fail("frame record needs >= 11 fields");
      Frame fr;
      fr.timestamp = lr.num(toks[0]);
      Eigen::VectorXd w(kControlDim);
      for (int k = 0; k < kControlDim; ++k) w[k] = lr.num(toks[1 + k]);
      fr.w = ControlVariable::unflatten(w);
      std::size_t pos = 11;
      while (pos < toks.size()) {
        if (toks[pos] == "img") {
          if (pos + 1 >= toks.size()) lr.fail("'img' without a file name");
          fr.image = load_image_sidecar(file.parent_path() / toks[pos + 1]);
          pos += 2;
        } else if (toks[pos] == "v") {
          const std::size_t n = toks.size() - pos - 1;
          Eigen::VectorXd v(n);
          for (std::size_t k = 0; k < n; ++k) v[k] = lr.num(toks[pos + 1 + k]);
          fr.features = v;
          pos = toks.size();
        } else {
          lr.fail("unexpected token '" + toks[pos] + "'");
        }
      }
      demo.push_back(std::move(fr));
    }
    subj.demos.push_back(std::move(demo));
  }
  return subj;
}

/// Loads every subject_*.traj in the directory; validates invariants.
inline Dataset load_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ParseError("dataset path is not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".traj") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  Dataset ds;
  for (const auto& f : files) ds.subjects.push_back(load_subject_file(f));
  std::sort(ds.subjects.begin(), ds.subjects.end(),
            [](const Subject& a, const Subject& b) {
              return a.meta.id < b.meta.id;
            });
  if (ds.subjects.empty()) {
    throw ParseError("no subject_*.traj files in " + dir.string());
  }
  validate_dataset(ds);
  return ds;
}

// ---------------------------------------------------------------------------
// Model files (versioned text documents)
// ---------------------------------------------------------------------------

inline void save_gmm(const GmmModel& m, const std::filesystem::path& path) {
  m.validate();
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "uskill-gmm v1\n";
  os << "K " << m.K() << " dims " << m.input_dim << ' ' << m.output_dim
     << '\n';
  os << "weights\n";
  io_detail::write_values(os, m.weights.data(), m.weights.size());
  const int d = m.dim();
  for (int k = 0; k < m.K(); ++k) {
    os << "component " << k << '\n';
    io_detail::write_values(os, m.components[k].mean().data(), d);
    const Eigen::MatrixXd& cov = m.components[k].covariance();
    std::vector<double> lower;
    lower.reserve(d * (d + 1) / 2);
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c <= r; ++c) lower.push_back(cov(r, c));
    }
    io_detail::write_values(os, lower.data(), lower.size());
  }
}

inline GmmModel load_gmm(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open " + path.string());
  io_detail::LineReader lr(is, path.filename().string());
  auto header = lr.next();
  if (header.size() < 2 || header[0] != "uskill-gmm" || header[1] != "v1") {
    lr.fail("not a uskill-gmm v1 file");
  }
  auto dims = lr.next();
  if (dims.size() != 5 || dims[0] != "K" || dims[2] != "dims") {
    lr.fail("expected 'K <k> dims <in> <out>'");
  }
  GmmModel m;
  const int K = static_cast<int>(lr.num(dims[1]));
  m.input_dim = static_cast<int>(lr.num(dims[3]));
  m.output_dim = static_cast<int>(lr.num(dims[4]));
  const int d = m.input_dim + m.output_dim;
  if (lr.next() != std::vector<std::string>{"weights"}) lr.fail("'weights'");
  m.weights = io_detail::read_values(lr, K);
  m.components.resize(K);
  for (int k = 0; k < K; ++k) {
    auto comp = lr.next();
    if (comp.size() != 2 || comp[0] != "component") lr.fail("'component <k>'");
    Eigen::VectorXd mean = io_detail::read_values(lr, d);
    Eigen::VectorXd lower = io_detail::read_values(lr, d * (d + 1) / 2);
    Eigen::MatrixXd cov(d, d);
    int i = 0;
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c <= r; ++c) {
        cov(r, c) = cov(c, r) = lower[i++];
      }
    }
    try {
      m.components[k].set(std::move(mean), cov);
    } catch (const std::invalid_argument& e) {
      throw SchemaError(path.filename().string() + ": component " +
                        std::to_string(k) + ": " + e.what());
    }
  }
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(path.filename().string() + ": " + e.what());
  }
  return m;
}

inline void save_encoder(const EncoderModel& m,
                         const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "uskill-encoder v1\n";
  os << "latent " << m.latent_width() << '\n';
  os << "mask_seed " << m.mask.seed << "\nkept";
  for (int idx : m.mask.kept) os << ' ' << idx;
  os << '\n';
  os << "train lr " << io_detail::fmt(m.config.learning_rate) << " epochs "
     << m.config.epochs << " seed " << m.config.seed << '\n';
  os << "enc_weight\n";
  io_detail::write_values(os, m.enc_weight.data(), m.enc_weight.size());
  os << "enc_bias\n";
  io_detail::write_values(os, m.enc_bias.data(), m.enc_bias.size());
  os << "dec_weight\n";
  io_detail::write_values(os, m.dec_weight.data(), m.dec_weight.size());
  os << "dec_bias\n";
  io_detail::write_values(os, m.dec_bias.data(), m.dec_bias.size());
}

inline EncoderModel load_encoder(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open " + path.string());
  io_detail::LineReader lr(is, path.filename().string());
  auto header = lr.next();
  if (header.size() < 2 || header[0] != "uskill-encoder" ||
      header[1] != "v1") {
    lr.fail("not a uskill-encoder v1 file");
  }
  EncoderModel m;
  auto latent = lr.next();
  if (latent.size() != 2 || latent[0] != "latent") lr.fail("'latent <h>'");
  const int h = static_cast<int>(lr.num(latent[1]));
  m.config.latent_width = h;
  auto seed = lr.next();
  if (seed.size() != 2 || seed[0] != "mask_seed") lr.fail("'mask_seed <s>'");
  m.mask.seed = static_cast<unsigned>(lr.num(seed[1]));
  auto kept = lr.next();
  if (kept.empty() || kept[0] != "kept") lr.fail("'kept <indices>'");
  for (std::size_t i = 1; i < kept.size(); ++i) {
    m.mask.kept.push_back(static_cast<int>(lr.num(kept[i])));
  }
  if (m.mask.kept.size() != kKeptPatches) {
    throw SchemaError(path.filename().string() + ": mask must keep 40 patches");
  }
  auto train = lr.next();
  if (train.size() != 7 || train[0] != "train") lr.fail("'train ...'");
  m.config.learning_rate = lr.num(train[2]);
  m.config.epochs = static_cast<int>(lr.num(train[4]));
  m.config.seed = static_cast<unsigned>(lr.num(train[6]));
  auto expect = [&](const char* tag) {
    auto t = lr.next();
    if (t.size() != 1 || t[0] != tag) lr.fail(std::string("'") + tag + "'");
  };
  expect("enc_weight");
  Eigen::VectorXd ew = io_detail::read_values(lr, h * kPatchDim);
  m.enc_weight = Eigen::Map<Eigen::MatrixXd>(ew.data(), h, kPatchDim);
  expect("enc_bias");
  m.enc_bias = io_detail::read_values(lr, h);
  expect("dec_weight");
  Eigen::VectorXd dw = io_detail::read_values(lr, kPatchDim * h);
  m.dec_weight = Eigen::Map<Eigen::MatrixXd>(dw.data(), kPatchDim, h);
  expect("dec_bias");
  m.dec_bias = io_detail::read_values(lr, kPatchDim);
  return m;
}

inline void save_mlp(const MlpModel& m, const SampleBounds& bounds,
                     const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "uskill-mlp v1\n";
  os << "layers " << m.layer_count() << '\n';
  os << "train lr " << io_detail::fmt(m.config.learning_rate) << " epochs "
     << m.config.epochs << " seed " << m.config.seed << '\n';
  for (int l = 0; l < m.layer_count(); ++l) {
    os << "layer " << l << ' ' << m.weights[l].rows() << ' '
       << m.weights[l].cols() << '\n';
    io_detail::write_values(os, m.weights[l].data(), m.weights[l].size());
    io_detail::write_values(os, m.biases[l].data(), m.biases[l].size());
  }
  os << "bounds\n";
  io_detail::write_values(os, bounds.lo.data(), bounds.lo.size());
  io_detail::write_values(os, bounds.hi.data(), bounds.hi.size());
}

inline std::pair<MlpModel, SampleBounds> load_mlp(
    const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open " + path.string());
  io_detail::LineReader lr(is, path.filename().string());
  auto header = lr.next();
  if (header.size() < 2 || header[0] != "uskill-mlp" || header[1] != "v1") {
    lr.fail("not a uskill-mlp v1 file");
  }
  auto layers = lr.next();
  if (layers.size() != 2 || layers[0] != "layers") lr.fail("'layers <n>'");
  const int L = static_cast<int>(lr.num(layers[1]));
  MlpModel m;
  auto train = lr.next();
  if (train.size() != 7 || train[0] != "train") lr.fail("'train ...'");
  m.config.learning_rate = lr.num(train[2]);
  m.config.epochs = static_cast<int>(lr.num(train[4]));
  m.config.seed = static_cast<unsigned>(lr.num(train[6]));
  m.config.hidden.clear();
  for (int l = 0; l < L; ++l) {
    auto lay = lr.next();
    if (lay.size() != 4 || lay[0] != "layer") lr.fail("'layer <l> <r> <c>'");
    const int rows = static_cast<int>(lr.num(lay[2]));
    const int cols = static_cast<int>(lr.num(lay[3]));
    Eigen::VectorXd w = io_detail::read_values(lr, rows * cols);
    m.weights.push_back(Eigen::Map<Eigen::MatrixXd>(w.data(), rows, cols));
    m.biases.push_back(io_detail::read_values(lr, rows));
    if (l + 1 < L) m.config.hidden.push_back(rows);
  }
  SampleBounds bounds;
  if (lr.next() != std::vector<std::string>{"bounds"}) lr.fail("'bounds'");
  bounds.lo = io_detail::read_values(lr, kControlDim);
  bounds.hi = io_detail::read_values(lr, kControlDim);
  return {std::move(m), std::move(bounds)};
}

}  // namespace uskill

#endif  // USKILL_IO_HPP_
