/*
 * Copyright 2026 The Persona Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "persona/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

namespace persona {

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32)};
  return std::mt19937_64(seq);
}

constexpr std::uint64_t kBasisStream = 0xba5e;
constexpr std::uint64_t kSplitStream = 0x5b1f;
constexpr std::uint64_t kPersonStreamBase = 0x10000;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Alternates between the PSD cone (eigenvalues floored slightly above zero)
// and the affine set {unit diagonal, Big Five x HEXACO block unchanged}.
// Only within-inventory entries move.
Eigen::MatrixXd refine_holding_cross(Eigen::MatrixXd m) {
  const Eigen::Matrix<double, 5, 6> cross = m.topRightCorner<5, 6>();
  for (int it = 0; it < 1000; ++it) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.eigenvalues().minCoeff() >= 1e-4) break;
    Eigen::VectorXd lifted = es.eigenvalues().cwiseMax(1e-3);
    m = es.eigenvectors() * lifted.asDiagonal() * es.eigenvectors().transpose();
    m = 0.5 * (m + m.transpose());
    m.diagonal().setOnes();
    m.topRightCorner<5, 6>() = cross;
    m.bottomLeftCorner<6, 5>() = cross.transpose();
  }
  return m;
}

Eigen::MatrixXd gaussian_factor(const Eigen::MatrixXd& uniform_corr) {
  // Pearson correlation of Phi(Z) for bivariate normal Z with correlation r
  // is (6/pi) asin(r/2); invert it entrywise.
  Eigen::MatrixXd g = uniform_corr.unaryExpr(
      [](double r) { return 2.0 * std::sin(std::numbers::pi * r / 6.0); });
  g = nearest_psd(refine_holding_cross(std::move(g)));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

std::size_t draw_length(const LengthRange& r, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> d(r.min, r.max);
  return d(rng);
}

Tensor render_frames(const Eigen::MatrixXd& projection, const Eigen::VectorXd& phase,
                     const Eigen::VectorXd& centered, std::size_t length, double drift,
                     double noise, std::mt19937_64& rng) {
  const Eigen::VectorXd signal = projection * centered;
  const auto width = static_cast<std::size_t>(signal.size());
  std::normal_distribution<double> eps(0.0, 1.0);
  std::vector<double> v(length * width);
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t i = 0; i < width; ++i) {
      double x = signal(static_cast<Eigen::Index>(i));
      if (drift != 0.0) {
        x += drift * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 8.0 +
                              phase(static_cast<Eigen::Index>(i)));
      }
      if (noise != 0.0) x += noise * eps(rng);
      v[t * width + i] = x;
    }
  }
  return round_to_float32(Tensor::from({length, width}, std::move(v)));
}

void check_range(const LengthRange& r, const char* name) {
  if (r.min == 0 || r.max < r.min) {
    throw ConfigError(std::string("data.") + name + " length range must satisfy 1 <= min <= max");
  }
}

}  // namespace

Eigen::Matrix<double, 5, 6> reference_cross_block() {
  Eigen::Matrix<double, 5, 6> c;
  // clang-format off
  c <<  0.134, -0.155, 0.479, 0.378,  0.539, 0.797,
        0.432,  0.066, 0.170, 0.464,  0.837, 0.518,
       -0.363, -0.301, 0.937, 0.114, -0.05,  0.355,
        0.362,  0.179, 0.462, 0.7621, 0.430, 0.558,
        0.078, -0.517, 0.643, 0.424,  0.266, 0.438;
  // clang-format on
  return c;
}

Eigen::MatrixXd nearest_psd(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw ConfigError("nearest_psd: matrix is not square");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ConfigError("nearest_psd: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.eigenvalues().minCoeff() >= 0.0) {
    Eigen::VectorXd d = m.diagonal().cwiseSqrt();
    if (d.minCoeff() <= 0.0) throw ConfigError("nearest_psd: zero diagonal entry");
    Eigen::MatrixXd scaled = d.cwiseInverse().asDiagonal() * m * d.cwiseInverse().asDiagonal();
    return scaled;
  }
  Eigen::VectorXd clamped = es.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd r = es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().transpose();
  Eigen::VectorXd d = r.diagonal().cwiseSqrt();
  if (d.minCoeff() <= 0.0) throw ConfigError("nearest_psd: degenerate reconstruction");
  Eigen::MatrixXd out = d.cwiseInverse().asDiagonal() * r * d.cwiseInverse().asDiagonal();
  out = 0.5 * (out + out.transpose());
  out.diagonal().setOnes();
  return out;
}

Eigen::MatrixXd complete_correlation(const Eigen::Matrix<double, 5, 6>& cross) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector2d s = svd.singularValues().head<2>().cwiseSqrt();
  const Eigen::MatrixXd lb = svd.matrixU().leftCols<2>() * s.asDiagonal();
  const Eigen::MatrixXd lh = svd.matrixV().leftCols<2>() * s.asDiagonal();

  Eigen::MatrixXd m(kAllTraits, kAllTraits);
  m.topLeftCorner<5, 5>() = (lb * lb.transpose()).cwiseMax(-1.0).cwiseMin(1.0);
  m.bottomRightCorner<6, 6>() = (lh * lh.transpose()).cwiseMax(-1.0).cwiseMin(1.0);
  m.topRightCorner<5, 6>() = cross;
  m.bottomLeftCorner<6, 5>() = cross.transpose();
  m.diagonal().setOnes();

  m = refine_holding_cross(std::move(m));
  return nearest_psd(m);
}

void GeneratorConfig::validate() const {
  if (persons == 0 || videos_per_person == 0) throw ConfigError("data.persons and data.videos_per_person must be positive");
  const double total = train_fraction + val_fraction + test_fraction;
  if (std::fabs(total - 1.0) > 1e-9 || train_fraction < 0 || val_fraction < 0 || test_fraction < 0) {
    throw ConfigError("data split fractions must be non-negative and sum to 1");
  }
  if (audio_noise < 0 || visual_noise < 0 || text_noise < 0 || jitter < 0) {
    throw ConfigError("data noise and jitter levels must be non-negative");
  }
  check_range(audio_length, "audio");
  check_range(visual_length, "visual");
  check_range(text_length, "text");
  if (vocab_size < 2) throw ConfigError("data.vocab_size must be at least 2");
  if (audio_dim == 0 || visual_dim == 0) throw ConfigError("data feature widths must be positive");
  if (modalities.empty()) throw ConfigError("data.modalities must name at least one modality");
  if (target.size() != 0) {
    if (target.rows() != static_cast<Eigen::Index>(kAllTraits) || target.cols() != target.rows()) {
      throw ConfigError("data target correlation must be 11x11");
    }
    if ((target - target.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw ConfigError("data target correlation must be symmetric");
    }
    if ((target.diagonal().array() - 1.0).abs().maxCoeff() > 1e-12) {
      throw ConfigError("data target correlation must have a unit diagonal");
    }
  }
}

Eigen::MatrixXd GeneratorConfig::resolved_target() const {
  if (target.size() != 0) return target;
  return complete_correlation(reference_cross_block());
}

RenderBasis RenderBasis::make(const GeneratorConfig& cfg) {
  auto rng = stream(cfg.seed, kBasisStream);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  auto gaussian = [&](std::size_t rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(kAllTraits));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = n01(rng);
    return m;
  };
  auto phases = [&](std::size_t n) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = phase(rng);
    return v;
  };
  RenderBasis b;
  b.audio = gaussian(cfg.audio_dim);
  b.visual = gaussian(cfg.visual_dim);
  b.text = gaussian(cfg.text_length.max);
  b.audio_phase = phases(cfg.audio_dim);
  b.visual_phase = phases(cfg.visual_dim);
  return b;
}

Eigen::MatrixXd sample_traits(const GeneratorConfig& cfg, std::size_t n, std::mt19937_64& rng) {
  const Eigen::MatrixXd factor = gaussian_factor(cfg.resolved_target());
  std::normal_distribution<double> n01(0.0, 1.0);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(kAllTraits));
  Eigen::VectorXd z(static_cast<Eigen::Index>(kAllTraits));
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = n01(rng);
    const Eigen::VectorXd g = factor * z;
    for (Eigen::Index j = 0; j < z.size(); ++j) out(r, j) = normal_cdf(g(j));
  }
  return out;
}

ModalityFeatures render_modalities(const Eigen::VectorXd& traits, const GeneratorConfig& cfg,
                                   const RenderBasis& basis, std::mt19937_64& rng) {
  if (traits.size() != static_cast<Eigen::Index>(kAllTraits)) {
    throw ShapeError("render_modalities: expected 11 trait values");
  }
  for (Eigen::Index i = 0; i < traits.size(); ++i) {
    if (!(traits(i) >= 0.0 && traits(i) <= 1.0)) throw RangeError("render_modalities: trait outside [0, 1]");
  }
  const Eigen::VectorXd centered = traits.array() - 0.5;
  ModalityFeatures f;
  if (cfg.modalities.audio) {
    const auto len = draw_length(cfg.audio_length, rng);
    f.audio = render_frames(basis.audio, basis.audio_phase, centered, len, cfg.drift, cfg.audio_noise, rng);
  }
  if (cfg.modalities.text) {
    const auto len = draw_length(cfg.text_length, rng);
    std::normal_distribution<double> eps(0.0, 1.0);
    std::vector<std::size_t> ids(len);
    for (std::size_t t = 0; t < len; ++t) {
      const auto row = static_cast<Eigen::Index>(t % static_cast<std::size_t>(basis.text.rows()));
      double s = basis.text.row(row).dot(centered);
      if (cfg.text_noise != 0.0) s += cfg.text_noise * eps(rng);
      const double u = 0.5 * (std::tanh(s) + 1.0);
      ids[t] = std::min(cfg.vocab_size - 1, static_cast<std::size_t>(u * static_cast<double>(cfg.vocab_size)));
    }
    f.text = std::move(ids);
  }
  if (cfg.modalities.visual) {
    const auto len = draw_length(cfg.visual_length, rng);
    f.visual = render_frames(basis.visual, basis.visual_phase, centered, len, cfg.drift, cfg.visual_noise, rng);
  }
  return f;
}

std::vector<Sample> generate_dataset(const GeneratorConfig& cfg_in) {
  cfg_in.validate();
  GeneratorConfig cfg = cfg_in;
  cfg.target = cfg_in.resolved_target();
  const RenderBasis basis = RenderBasis::make(cfg);

  const std::size_t n = cfg.persons;
  const auto n_train = static_cast<std::size_t>(std::llround(cfg.train_fraction * static_cast<double>(n)));
  const auto n_val = std::min(n - std::min(n, n_train),
                              static_cast<std::size_t>(std::llround(cfg.val_fraction * static_cast<double>(n))));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto split_rng = stream(cfg.seed, kSplitStream);
  std::shuffle(order.begin(), order.end(), split_rng);
  std::vector<Split> split_of(n, Split::test);
  for (std::size_t i = 0; i < n; ++i) {
    if (i < n_train) {
      split_of[order[i]] = Split::train;
    } else if (i < n_train + n_val) {
      split_of[order[i]] = Split::val;
    }
  }

  std::vector<Sample> samples;
  samples.reserve(n * cfg.videos_per_person);
  std::normal_distribution<double> jitter(0.0, 1.0);
  for (std::size_t p = 0; p < n; ++p) {
    auto rng = stream(cfg.seed, kPersonStreamBase + p);
    const Eigen::VectorXd base = sample_traits(cfg, 1, rng).row(0).transpose();
    char person[32];
    std::snprintf(person, sizeof person, "p%04zu", p);
    for (std::size_t v = 0; v < cfg.videos_per_person; ++v) {
      Eigen::VectorXd traits = base;
      for (Eigen::Index j = 0; j < traits.size(); ++j) {
        traits(j) = std::clamp(traits(j) + cfg.jitter * jitter(rng), 0.0, 1.0);
      }
      Sample s;
      char id[48];
      std::snprintf(id, sizeof id, "%s_v%02zu", person, v);
      s.id = id;
      s.person = person;
      s.split = split_of[p];
      s.features = render_modalities(traits, cfg, basis, rng);
      for (std::size_t j = 0; j < kBigFiveTraits; ++j) s.bigfive[j] = traits(static_cast<Eigen::Index>(j));
      for (std::size_t j = 0; j < kHexacoTraits; ++j)
        s.hexaco[j] = traits(static_cast<Eigen::Index>(kBigFiveTraits + j));
      samples.push_back(std::move(s));
    }
  }
  return samples;
}

void write_dataset(const std::filesystem::path& out, std::span<const Sample> samples) {
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());
  for (auto s : {Split::train, Split::val, Split::test}) {
    std::filesystem::create_directories(out / split_name(s), ec);
    if (ec) throw IoError("cannot create " + (out / split_name(s)).string() + ": " + ec.message());
  }
  std::vector<ManifestRecord> records;
  records.reserve(samples.size());
  for (const auto& s : samples) {
    ManifestRecord r;
    r.id = s.id;
    r.person = s.person;
    r.split = s.split;
    r.bigfive = s.bigfive;
    r.hexaco = s.hexaco;
    const std::string dir = std::string(split_name(s.split)) + "/";
    if (s.features.audio) {
      r.audio_path = dir + s.id + ".audio.mmpt";
      write_feature_file(out / r.audio_path, *s.features.audio);
    }
    if (s.features.text) {
      r.text_path = dir + s.id + ".text.mmpt";
      std::vector<double> ids(s.features.text->begin(), s.features.text->end());
      write_feature_file(out / r.text_path, Tensor::from({ids.size()}, ids));
    }
    if (s.features.visual) {
      r.visual_path = dir + s.id + ".visual.mmpt";
      write_feature_file(out / r.visual_path, *s.features.visual);
    }
    records.push_back(std::move(r));
  }
  write_manifest(out / "manifest.jsonl", records);
}

Eigen::Matrix<double, 5, 6> empirical_cross_block(const Eigen::MatrixXd& traits) {
  if (traits.cols() != static_cast<Eigen::Index>(kAllTraits) || traits.rows() < 2) {
    throw ShapeError("empirical_cross_block: need an N x 11 matrix with N >= 2");
  }
  const Eigen::MatrixXd centered = traits.rowwise() - traits.colwise().mean();
  const Eigen::VectorXd norms = centered.colwise().norm();
  Eigen::Matrix<double, 5, 6> out;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 6; ++j)
      out(i, j) = centered.col(i).dot(centered.col(5 + j)) / (norms(i) * norms(5 + j));
  return out;
}

}  // namespace persona
