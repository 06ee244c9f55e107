#include "mssl/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "mssl/linalg.hpp"

namespace mssl {

namespace {

constexpr double kPi = std::numbers::pi;

// Swiss roll angle range, split in half between the two components.
constexpr double kSwissStart = 1.5 * kPi;
constexpr double kSwissEnd = 4.5 * kPi;
constexpr double kSwissMid = 0.5 * (kSwissStart + kSwissEnd);

void check_component(std::size_t c) {
  if (c > 1) throw std::invalid_argument("chart component must be 0 or 1");
}

std::vector<double> draw_intrinsic(ManifoldKind kind, std::size_t component, Rng& rng) {
  switch (kind) {
    case ManifoldKind::circle_pair: return {rng.uniform(0.0, 2.0 * kPi)};
    case ManifoldKind::two_arcs: return {rng.uniform(0.0, kPi)};
    case ManifoldKind::swiss_embed: {
      const double t = component == 0 ? rng.uniform(kSwissStart, kSwissMid)
                                      : rng.uniform(kSwissMid, kSwissEnd);
      return {t, rng.uniform(-1.0, 1.0)};
    }
  }
  return {};
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  const auto last = s.find_last_not_of(" \t\r");
  if (first == std::string::npos) return "";
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& field, std::size_t line_no, std::size_t col) {
  const std::string f = trim(field);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (f.empty() || ec != std::errc() || ptr != f.data() + f.size()) {
    throw DataError("line " + std::to_string(line_no) + ": column " + std::to_string(col + 1) +
                    ": cannot parse '" + f + "' as a number");
  }
  return v;
}

}  // namespace

const char* manifold_kind_name(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::circle_pair: return "circle_pair";
    case ManifoldKind::two_arcs: return "two_arcs";
    case ManifoldKind::swiss_embed: return "swiss_embed";
  }
  return "?";
}

ManifoldKind parse_manifold_kind(const std::string& name) {
  if (name == "circle_pair") return ManifoldKind::circle_pair;
  if (name == "two_arcs") return ManifoldKind::two_arcs;
  if (name == "swiss_embed") return ManifoldKind::swiss_embed;
  throw std::invalid_argument("unknown manifold kind '" + name +
                              "' (expected circle_pair, two_arcs, swiss_embed)");
}

EmbeddedChart::EmbeddedChart(ManifoldKind kind, std::size_t ambient_dim, std::uint64_t seed)
    : kind_(kind), ambient_dim_(ambient_dim) {
  if (ambient_dim < 3) throw std::invalid_argument("embedded manifold: D must be >= 3");
  Rng rng = Rng(seed).split("frame");
  Eigen::MatrixXd raw(static_cast<Eigen::Index>(ambient_dim), 3);
  for (Eigen::Index j = 0; j < raw.cols(); ++j)
    for (Eigen::Index i = 0; i < raw.rows(); ++i) raw(i, j) = rng.normal();
  frame_ = from_eigen(Subspace::orthonormalize(raw).basis());
}

std::size_t EmbeddedChart::intrinsic_dim() const {
  return kind_ == ManifoldKind::swiss_embed ? 2 : 1;
}

std::vector<double> EmbeddedChart::planar(std::span<const double> t,
                                          std::size_t component) const {
  check_component(component);
  if (t.size() != intrinsic_dim()) throw DimensionError("chart: wrong intrinsic dimension");
  switch (kind_) {
    case ManifoldKind::circle_pair: {
      const double r = component == 0 ? 1.0 : 2.0;
      return {r * std::cos(t[0]), r * std::sin(t[0])};
    }
    case ManifoldKind::two_arcs:
      if (component == 0) return {std::cos(t[0]), std::sin(t[0])};
      return {1.0 - std::cos(t[0]), 0.5 - std::sin(t[0])};
    case ManifoldKind::swiss_embed:
      return {t[0] * std::cos(t[0]) / kPi, 3.0 * t[1] / kPi, t[0] * std::sin(t[0]) / kPi};
  }
  return {};
}

Tensor EmbeddedChart::embed(std::span<const double> local) const {
  Tensor x({1, ambient_dim_});
  for (std::size_t i = 0; i < ambient_dim_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < local.size(); ++j) s += frame_(i, j) * local[j];
    x[i] = s;
  }
  return x;
}

Tensor EmbeddedChart::point(std::span<const double> t, std::size_t component) const {
  return embed(planar(t, component));
}

Tensor EmbeddedChart::jacobian(std::span<const double> t, std::size_t component) const {
  check_component(component);
  if (t.size() != intrinsic_dim()) throw DimensionError("chart: wrong intrinsic dimension");
  std::vector<std::vector<double>> cols;  // local-space partial derivatives
  switch (kind_) {
    case ManifoldKind::circle_pair: {
      const double r = component == 0 ? 1.0 : 2.0;
      cols.push_back({-r * std::sin(t[0]), r * std::cos(t[0])});
      break;
    }
    case ManifoldKind::two_arcs:
      if (component == 0) {
        cols.push_back({-std::sin(t[0]), std::cos(t[0])});
      } else {
        cols.push_back({std::sin(t[0]), -std::cos(t[0])});
      }
      break;
    case ManifoldKind::swiss_embed:
      cols.push_back({(std::cos(t[0]) - t[0] * std::sin(t[0])) / kPi, 0.0,
                      (std::sin(t[0]) + t[0] * std::cos(t[0])) / kPi});
      cols.push_back({0.0, 3.0 / kPi, 0.0});
      break;
  }
  Tensor jac({ambient_dim_, cols.size()});
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const Tensor col = embed(cols[k]);
    for (std::size_t i = 0; i < ambient_dim_; ++i) jac(i, k) = col[i];
  }
  return jac;
}

Tensor Dataset::rows(std::span<const std::size_t> ids) const {
  Tensor out({ids.size(), dim()});
  for (std::size_t r = 0; r < ids.size(); ++r) {
    const auto src = x.row(ids[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

std::vector<std::size_t> Dataset::labels_of(std::span<const std::size_t> ids) const {
  if (labels.empty()) throw DataError("dataset has no labels");
  std::vector<std::size_t> out;
  out.reserve(ids.size());
  for (auto id : ids) out.push_back(labels.at(id));
  return out;
}

TangentBasis Dataset::ground_truth_tangents(std::size_t id) const {
  if (!chart) throw DataError("dataset has no ground-truth chart");
  return mssl::ground_truth_tangents(*chart, intrinsic.row(id), components.at(id));
}

Dataset make_embedded_manifold(ManifoldKind kind, std::size_t dim, std::size_t n,
                               double noise_sigma, std::uint64_t seed) {
  if (dim < 3) throw std::invalid_argument("make_embedded_manifold: D must be >= 3");
  if (n < 10) throw std::invalid_argument("make_embedded_manifold: N must be >= 10");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw std::invalid_argument("make_embedded_manifold: noise sigma must be finite and >= 0");
  }
  Dataset ds;
  auto chart = std::make_shared<EmbeddedChart>(kind, dim, seed);
  ds.num_classes = chart->num_components();
  ds.x = Tensor({n, dim});
  ds.intrinsic = Tensor({n, chart->intrinsic_dim()});
  ds.labels.resize(n);
  ds.components.resize(n);

  Rng sample_rng = Rng(seed).split("samples");
  Rng noise_rng = Rng(seed).split("noise");
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = sample_rng.below(ds.num_classes);
    const auto t = draw_intrinsic(kind, c, sample_rng);
    const Tensor p = chart->point(t, c);
    for (std::size_t j = 0; j < dim; ++j) {
      const double eps = noise_sigma > 0.0 ? noise_sigma * noise_rng.normal() : 0.0;
      ds.x(i, j) = p[j] + eps;
    }
    std::copy(t.begin(), t.end(), ds.intrinsic.row(i).begin());
    ds.labels[i] = c;
    ds.components[i] = c;
  }
  ds.chart = std::move(chart);
  ds.manifest.kind = manifold_kind_name(kind);
  ds.manifest.dim = dim;
  ds.manifest.n = n;
  ds.manifest.noise = noise_sigma;
  ds.manifest.seed = seed;
  ds.manifest.num_classes = ds.num_classes;
  ds.split.unlabeled.resize(n);
  for (std::size_t i = 0; i < n; ++i) ds.split.unlabeled[i] = i;
  ds.manifest.n_unlabeled = n;
  return ds;
}

void split_semi_supervised(Dataset& ds, std::size_t n_labeled, std::uint64_t seed,
                           double test_fraction) {
  const std::size_t n = ds.size();
  const std::size_t k = ds.num_classes;
  if (ds.labels.size() != n) throw DataError("split: dataset has no labels");
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("split: test fraction must be in [0, 1)");
  }
  if (n_labeled < k) {
    throw std::invalid_argument("split: N_l = " + std::to_string(n_labeled) + " < " +
                                std::to_string(k) + " classes");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng = Rng(seed).split("split");
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  if (n_labeled > n - n_test) {
    throw std::invalid_argument("split: N_l = " + std::to_string(n_labeled) + " exceeds the " +
                                std::to_string(n - n_test) + " non-test points");
  }
  Split split;
  split.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));

  std::vector<std::vector<std::size_t>> by_class(k);
  for (std::size_t i = n_test; i < n; ++i) by_class.at(ds.labels[order[i]]).push_back(order[i]);
  for (std::size_t c = 0; c < k; ++c) {
    if (by_class[c].empty()) {
      throw DataError("split: class " + std::to_string(c + 1) + " has no training points");
    }
  }
  // Round robin over classes keeps counts within one of each other.
  std::vector<std::size_t> taken(k, 0);
  std::vector<char> is_labeled(n, 0);
  while (split.labeled.size() < n_labeled) {
    for (std::size_t c = 0; c < k && split.labeled.size() < n_labeled; ++c) {
      if (taken[c] == by_class[c].size()) continue;
      const std::size_t id = by_class[c][taken[c]++];
      split.labeled.push_back(id);
      is_labeled[id] = 1;
    }
  }
  for (std::size_t i = n_test; i < n; ++i) {
    if (!is_labeled[order[i]]) split.unlabeled.push_back(order[i]);
  }
  std::sort(split.labeled.begin(), split.labeled.end());
  std::sort(split.unlabeled.begin(), split.unlabeled.end());
  std::sort(split.test.begin(), split.test.end());
  ds.split = std::move(split);
  ds.manifest.n_labeled = ds.split.labeled.size();
  ds.manifest.n_unlabeled = ds.split.unlabeled.size();
  ds.manifest.n_test = ds.split.test.size();
  ds.manifest.split_seed = seed;
  ds.manifest.test_fraction = test_fraction;
}

void save_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  const bool labeled = !ds.labels.empty();
  for (std::size_t j = 0; j < ds.dim(); ++j) out << (j ? "," : "") << "x" << j + 1;
  if (labeled) out << ",label";
  out << "\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < ds.dim(); ++j) out << (j ? "," : "") << format_double(ds.x(i, j));
    if (labeled) out << "," << ds.labels[i] + 1;
    out << "\n";
  }
  if (!out) throw DataError("write to '" + path.string() + "' failed");
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) {
    throw DataError("line 1: empty file, expected header x1..xD[,label]");
  }
  const auto header = split_fields(trim(line));
  bool labeled = false;
  std::size_t dim = header.size();
  if (!header.empty() && trim(header.back()) == "label") {
    labeled = true;
    --dim;
  }
  if (dim == 0) throw DataError("line 1: header names no feature columns");
  for (std::size_t j = 0; j < dim; ++j) {
    if (trim(header[j]) != "x" + std::to_string(j + 1)) {
      throw DataError("line 1: column " + std::to_string(j + 1) + " is '" + trim(header[j]) +
                      "', expected 'x" + std::to_string(j + 1) + "'");
    }
  }

  std::vector<double> values;
  std::vector<std::size_t> labels;
  std::size_t line_no = 1;
  std::size_t max_label = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < dim; ++j) values.push_back(parse_double(fields[j], line_no, j));
    if (labeled) {
      const std::string f = trim(fields.back());
      std::size_t lab = 0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), lab);
      if (f.empty() || ec != std::errc() || ptr != f.data() + f.size() || lab == 0) {
        throw DataError("line " + std::to_string(line_no) + ": label '" + f +
                        "' is not an integer in 1..k");
      }
      labels.push_back(lab - 1);
      max_label = std::max(max_label, lab);
    }
  }
  const std::size_t n = values.size() / dim;
  if (n == 0) throw DataError("'" + path.string() + "' has a header but no data rows");

  Dataset ds;
  ds.x = Tensor({n, dim}, std::move(values));
  ds.labels = std::move(labels);
  ds.num_classes = max_label;
  ds.manifest.kind = "csv";
  ds.manifest.dim = dim;
  ds.manifest.n = n;
  ds.manifest.num_classes = max_label;
  ds.split.unlabeled.resize(n);
  for (std::size_t i = 0; i < n; ++i) ds.split.unlabeled[i] = i;
  ds.manifest.n_unlabeled = n;
  return ds;
}

std::string manifest_json(const DatasetManifest& m) {
  nlohmann::ordered_json j;
  j["kind"] = m.kind;
  j["D"] = m.dim;
  j["N"] = m.n;
  j["seed"] = m.seed;
  j["noise"] = m.noise;
  j["num_classes"] = m.num_classes;
  j["split"] = {{"labeled", m.n_labeled},
                {"unlabeled", m.n_unlabeled},
                {"test", m.n_test},
                {"seed", m.split_seed},
                {"test_fraction", m.test_fraction}};
  return j.dump(2) + "\n";
}

DatasetManifest parse_manifest_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    DatasetManifest m;
    m.kind = j.at("kind").get<std::string>();
    m.dim = j.at("D").get<std::size_t>();
    m.n = j.at("N").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.noise = j.at("noise").get<double>();
    m.num_classes = j.at("num_classes").get<std::size_t>();
    const auto& s = j.at("split");
    m.n_labeled = s.at("labeled").get<std::size_t>();
    m.n_unlabeled = s.at("unlabeled").get<std::size_t>();
    m.n_test = s.at("test").get<std::size_t>();
    m.split_seed = s.at("seed").get<std::uint64_t>();
    m.test_fraction = s.at("test_fraction").get<double>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("manifest: ") + e.what());
  }
}

void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create '" + dir.string() + "': " + ec.message());
  save_csv(ds, dir / "data.csv");
  std::ofstream out(dir / "manifest.json");
  if (!out) throw DataError("cannot open '" + (dir / "manifest.json").string() + "' for writing");
  out << manifest_json(ds.manifest);
}

Dataset load_dataset(const std::filesystem::path& path) {
  const bool is_dir = std::filesystem::is_directory(path);
  const auto csv = is_dir ? path / "data.csv" : path;
  const auto manifest_path = csv.parent_path() / "manifest.json";
  Dataset ds = load_csv(csv);
  if (!std::filesystem::exists(manifest_path)) return ds;
  std::ifstream in(manifest_path);
  std::stringstream text;
  text << in.rdbuf();
  const DatasetManifest m = parse_manifest_json(text.str());
  if (m.dim != ds.dim() || m.n != ds.size()) {
    throw DataError("'" + manifest_path.string() + "' describes " + std::to_string(m.n) + " x " +
                    std::to_string(m.dim) + " data, the CSV holds " + std::to_string(ds.size()) +
                    " x " + std::to_string(ds.dim()));
  }
  if (m.kind != "csv") {
    Dataset gen = make_embedded_manifold(parse_manifold_kind(m.kind), m.dim, m.n, m.noise, m.seed);
    if (gen.x == ds.x && gen.labels == ds.labels) ds = std::move(gen);
  }
  if (m.n_labeled > 0) split_semi_supervised(ds, m.n_labeled, m.split_seed, m.test_fraction);
  return ds;
}

}  // namespace mssl
