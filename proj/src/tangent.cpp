#include "mssl/tangent.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <iostream>

#include "mssl/linalg.hpp"

namespace mssl {

namespace {

constexpr double kRankTolerance = 1e-10;

void normalize_rows(Tensor& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double n2 = 0.0;
    for (double v : m.row(r)) n2 += v * v;
    const double n = std::sqrt(n2);
    if (n == 0.0) continue;
    for (double& v : m.row(r)) v /= n;
  }
}

std::size_t numerical_rank(const Eigen::VectorXd& sv) {
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > kRankTolerance * sv(0)) ++rank;
  }
  return rank;
}

std::size_t usable_rank(const Eigen::VectorXd& sv, std::size_t d_p, const char* who) {
  const std::size_t rank = numerical_rank(sv);
  if (rank < d_p) {
    std::cerr << "warning: " << who << ": Jacobian rank " << rank << " < requested " << d_p
              << " tangents; returning " << rank << "\n";
    return rank;
  }
  return d_p;
}

Tensor as_row(const Tensor& x) { return Tensor({1, x.size()}, x.storage()); }

}  // namespace

const char* tangent_source_name(TangentSource s) {
  switch (s) {
    case TangentSource::encoder_svd: return "svd-encoder";
    case TangentSource::generator_svd: return "svd-generator";
    case TangentSource::projector_composed: return "projector";
    case TangentSource::ground_truth: return "ground-truth";
  }
  return "?";
}

TangentSource parse_tangent_source(const std::string& name) {
  if (name == "svd-encoder") return TangentSource::encoder_svd;
  if (name == "svd-generator") return TangentSource::generator_svd;
  if (name == "projector") return TangentSource::projector_composed;
  if (name == "ground-truth") return TangentSource::ground_truth;
  throw std::invalid_argument("unknown tangent source '" + name +
                              "' (expected svd-encoder, svd-generator, projector, ground-truth)");
}

Subspace tangent_subspace(const TangentBasis& basis) {
  return Subspace::orthonormalize(to_eigen(basis.directions).transpose());
}

TangentBasis encoder_tangents(const TapeFn& encoder, const Tensor& x, std::size_t d_p) {
  const Tensor jac = jacobian(encoder, x);  // d x D
  const Svd svd = thin_svd(to_eigen(jac));
  const std::size_t r = usable_rank(svd.singular_values, d_p, "encoder_tangents");
  TangentBasis basis;
  basis.base_point = as_row(x);
  basis.source = TangentSource::encoder_svd;
  basis.directions = from_eigen(svd.v.leftCols(static_cast<Eigen::Index>(r)).transpose());
  normalize_rows(basis.directions);
  return basis;
}

TangentBasis generator_tangents(const TapeFn& generator, const Tensor& z, std::size_t d_p) {
  const Tensor jac = jacobian(generator, z);  // D x d
  const Svd svd = thin_svd(to_eigen(jac));
  const std::size_t r = usable_rank(svd.singular_values, d_p, "generator_tangents");
  TangentBasis basis;
  basis.base_point = evaluate(generator, as_row(z));
  basis.source = TangentSource::generator_svd;
  basis.directions = from_eigen(svd.u.leftCols(static_cast<Eigen::Index>(r)).transpose());
  normalize_rows(basis.directions);
  return basis;
}

double lemma1_identity(const TapeFn& generator, const TapeFn& encoder, const Tensor& z) {
  const Tensor x = evaluate(generator, as_row(z));
  const Tensor product = matmul(jacobian(encoder, x), jacobian(generator, z));
  Tensor residual = product;
  for (std::size_t i = 0; i < residual.rows(); ++i) residual(i, i) -= 1.0;
  return frobenius_norm(residual);
}

TangentBasis composed_tangents(const ProjectorPair& pair, const TapeFn& encoder,
                               const Tensor& x) {
  return composed_tangents(pair, encoder, as_row(x), TangentSource::projector_composed).front();
}

std::vector<TangentBasis> composed_tangents(const ProjectorPair& pair, const TapeFn& encoder,
                                            const Tensor& points, TangentSource tag) {
  TapeFn composed = [&](Tape& tape, Var x) {
    tape.freeze(pair.params());
    return pair.project(tape, encoder(tape, x));
  };
  auto jacs = jacobians(composed, points);
  std::vector<TangentBasis> out;
  out.reserve(jacs.size());
  for (std::size_t r = 0; r < jacs.size(); ++r) {
    TangentBasis b;
    b.base_point = points.row_copy(r);
    b.directions = std::move(jacs[r]);
    b.source = tag;
    normalize_rows(b.directions);
    out.push_back(std::move(b));
  }
  return out;
}

TangentBasis ground_truth_tangents(const GroundTruthChart& chart, std::span<const double> t,
                                   std::size_t component) {
  const Tensor jac = chart.jacobian(t, component);  // D x k
  const Subspace s = Subspace::orthonormalize(to_eigen(jac));
  TangentBasis b;
  b.base_point = chart.point(t, component);
  b.directions = from_eigen(s.basis().transpose());
  b.source = TangentSource::ground_truth;
  return b;
}

namespace {

struct ProjectorTargets {
  Var latent;           // h(x)
  Var reconstruction;   // g(h(x))
  Var recon_features;   // fX(g(h(x)))
};

Var projector_loss(Tape& tape, const ProjectorPair& pair, const Mlp& generator,
                   const Mlp& encoder, const DualDiscriminator& discriminator, const Tensor& x,
                   FeatureNorm norm) {
  tape.freeze(generator.params());
  tape.freeze(encoder.params());
  tape.freeze(discriminator.params());
  Var in = tape.constant(x);
  ProjectorTargets t;
  t.latent = encoder.forward(tape, in);
  t.reconstruction = generator.forward(tape, t.latent);
  t.recon_features = discriminator.x_features(tape, t.reconstruction);

  Var bottleneck_recon = generator.forward(tape, pair.roundtrip(tape, t.latent));
  Var pixel = sum_cols(abs(sub(t.reconstruction, bottleneck_recon)));
  Var feat_diff = sub(t.recon_features, discriminator.x_features(tape, bottleneck_recon));
  Var feature = norm == FeatureNorm::l2 ? row_norm(feat_diff) : sum_cols(abs(feat_diff));
  return mean_all(add(pixel, feature));
}

}  // namespace

double projector_objective(const ProjectorPair& pair, const Mlp& generator, const Mlp& encoder,
                           const DualDiscriminator& discriminator, const Tensor& data,
                           FeatureNorm norm) {
  Tape tape;
  tape.freeze(pair.params());
  return projector_loss(tape, pair, generator, encoder, discriminator, data, norm).value()[0];
}

ProjectorTrainResult train_projector(ProjectorPair& pair, const Mlp& generator,
                                     const Mlp& encoder, const DualDiscriminator& discriminator,
                                     const Tensor& data, const ProjectorTrainConfig& config) {
  if (data.rows() == 0) throw std::invalid_argument("train_projector: empty data");
  ProjectorTrainResult result;
  Rng rng = Rng(config.seed).split("projector-batches");
  AdamState state;
  const std::size_t batch = std::min(config.batch_size, data.rows());
  const std::size_t dim = data.cols();
  auto record = [&](std::size_t step) {
    result.curve.emplace_back(
        step, projector_objective(pair, generator, encoder, discriminator, data,
                                  config.feature_norm));
  };
  if (config.record_every) record(0);
  for (std::size_t step = 1; step <= config.steps; ++step) {
    Tensor x({batch, dim});
    for (std::size_t r = 0; r < batch; ++r) {
      const auto src = data.row(rng.below(data.rows()));
      std::copy(src.begin(), src.end(), x.row(r).begin());
    }
    Tape tape;
    Var loss = projector_loss(tape, pair, generator, encoder, discriminator, x,
                              config.feature_norm);
    tape.backward(loss);
    adam_step(pair.params(), tape.gradient(pair.params()), state, config.adam);
    if (config.record_every && (step % config.record_every == 0 || step == config.steps)) {
      record(step);
    }
  }
  return result;
}

void save_tangents_csv(std::span<const TangentBasis> bases, const std::filesystem::path& path) {
  if (bases.empty()) throw std::invalid_argument("save_tangents_csv: no tangent bases");
  const std::size_t dim = bases.front().ambient_dim();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TangentFileError("cannot open '" + path.string() + "' for writing");
  out << "point,source,row";
  for (std::size_t j = 0; j < dim; ++j) out << ",t" << j + 1;
  out << "\n";
  char buf[32];
  for (std::size_t p = 0; p < bases.size(); ++p) {
    const TangentBasis& b = bases[p];
    if (b.ambient_dim() != dim) throw DimensionError("save_tangents_csv: mixed ambient dimensions");
    for (std::size_t r = 0; r < b.count(); ++r) {
      out << p << "," << tangent_source_name(b.source) << "," << r;
      for (double v : b.directions.row(r)) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << "," << buf;
      }
      out << "\n";
    }
  }
  if (!out) throw TangentFileError("write failed for '" + path.string() + "'");
}

std::vector<TangentBasis> load_tangents_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TangentFileError("cannot open '" + path.string() + "'");
  const auto fail = [&](std::size_t line, const std::string& msg) -> TangentFileError {
    return TangentFileError(path.string() + ": line " + std::to_string(line) + ": " + msg);
  };
  const auto fields_of = [](const std::string& line) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    return f;
  };
  std::string line;
  if (!std::getline(in, line)) throw fail(1, "empty file");
  const auto header = fields_of(line);
  if (header.size() < 4 || header[0] != "point" || header[1] != "source" || header[2] != "row") {
    throw fail(1, "expected header point,source,row,t1..tD");
  }
  const std::size_t dim = header.size() - 3;
  std::vector<TangentBasis> out;
  std::vector<std::vector<double>> rows;
  const auto finish = [&] {
    if (rows.empty()) return;
    Tensor d({rows.size(), dim});
    for (std::size_t r = 0; r < rows.size(); ++r) std::copy(rows[r].begin(), rows[r].end(), d.row(r).begin());
    out.back().directions = std::move(d);
    rows.clear();
  };
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = fields_of(line);
    if (f.size() != header.size()) {
      throw fail(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                              std::to_string(f.size()));
    }
    std::size_t point = 0, row = 0;
    std::vector<double> values(dim);
    try {
      std::size_t used = 0;
      point = std::stoul(f[0], &used);
      if (used != f[0].size()) throw std::invalid_argument(f[0]);
      row = std::stoul(f[2], &used);
      if (used != f[2].size()) throw std::invalid_argument(f[2]);
      for (std::size_t j = 0; j < dim; ++j) {
        values[j] = std::stod(f[3 + j], &used);
        if (used != f[3 + j].size()) throw std::invalid_argument(f[3 + j]);
      }
    } catch (const std::logic_error&) {
      throw fail(line_no, "unparsable number");
    }
    TangentSource source;
    try {
      source = parse_tangent_source(f[1]);
    } catch (const std::invalid_argument& e) {
      throw fail(line_no, e.what());
    }
    if (out.empty() || point != out.size() - 1) {
      if (point != out.size()) throw fail(line_no, "point indices must be consecutive from 0");
      finish();
      out.emplace_back();
      out.back().source = source;
    }
    if (row != rows.size()) throw fail(line_no, "row indices must be consecutive from 0");
    if (source != out.back().source) throw fail(line_no, "mixed sources for one point");
    rows.push_back(std::move(values));
  }
  finish();
  if (out.empty()) throw fail(line_no, "no tangent rows");
  return out;
}

}  // namespace mssl
