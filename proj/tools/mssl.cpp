// Command-line driver: data generation, GAN/encoder training, tangent
// extraction, semi-supervised training and diagnostics.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "mssl/analysis.hpp"
#include "mssl/data.hpp"
#include "mssl/gradcheck.hpp"
#include "mssl/losses.hpp"
#include "mssl/serialize.hpp"
#include "mssl/subspace.hpp"
#include "mssl/tangent.hpp"
#include "mssl/train.hpp"

namespace fs = std::filesystem;
using namespace mssl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

/// Raised for bad flag combinations detected after parsing.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

fs::path default_out(const std::string& command) {
  const char* root = std::getenv("MSSL_OUT_ROOT");
  return fs::path(root && *root ? root : "runs") / command;
}

fs::path resolve_out(const std::string& out, const std::string& command) {
  return out.empty() ? default_out(command) : fs::path(out);
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
}

Dataset load_data(const std::string& path) {
  if (!fs::exists(path)) throw IoError("data '" + path + "' does not exist");
  try {
    return load_dataset(path);
  } catch (const DataError& e) {
    throw IoError("'" + path + "': " + e.what());
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// A `run.json` next to the outputs with every resolved parameter.
void write_run(const fs::path& dir, const std::string& command, Json params) {
  write_json(dir / "run.json", Json{{"command", command}, {"params", std::move(params)}});
}

GanModels load_gan(const std::string& dir) {
  const fs::path d(dir);
  GanModels m;
  m.generator = mlp_from_json(read_json(d / "generator.json"));
  m.encoder = mlp_from_json(read_json(d / "encoder.json"));
  m.discriminator = discriminator_from_json(read_json(d / "discriminator.json"));
  return m;
}

std::vector<TangentBasis> load_tangents(const std::string& path) {
  const fs::path p = fs::is_directory(path) ? fs::path(path) / "tangents.csv" : fs::path(path);
  return load_tangents_csv(p);
}

/// Shared training overrides; unset flags leave the config file value.
struct TrainOverrides {
  std::string config;
  std::optional<std::size_t> epochs, batch_size, latent_dim, hidden_width, hidden_layers;
  std::optional<std::uint64_t> seed;
  std::optional<double> lr;

  void add(CLI::App* cmd) {
    cmd->add_option("--config", config, "JSON training configuration")->check(CLI::ExistingFile);
    cmd->add_option("--epochs", epochs, "training epochs")->check(CLI::PositiveNumber);
    cmd->add_option("--batch-size", batch_size, "minibatch size")->check(CLI::PositiveNumber);
    cmd->add_option("--latent-dim", latent_dim, "latent dimension d")->check(CLI::PositiveNumber);
    cmd->add_option("--hidden-width", hidden_width, "hidden layer width")->check(CLI::PositiveNumber);
    cmd->add_option("--hidden-layers", hidden_layers, "hidden layers per network")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("--lr", lr, "Adam learning rate")->check(CLI::PositiveNumber);
  }

  TrainConfig resolve() const {
    TrainConfig c = config.empty() ? TrainConfig{} : config_from_json(read_json(config));
    if (epochs) c.epochs = *epochs;
    if (batch_size) c.batch_size = *batch_size;
    if (latent_dim) c.latent_dim = *latent_dim;
    if (hidden_width) c.hidden_width = *hidden_width;
    if (hidden_layers) c.hidden_layers = *hidden_layers;
    if (seed) c.seed = *seed;
    if (lr) c.adam.lr = *lr;
    c.validate();
    return c;
  }
};

struct RunFlags {
  bool resume = false;
  std::size_t checkpoint_every = 0;
  std::size_t max_steps = 0;

  void add(CLI::App* cmd) {
    cmd->add_flag("--resume", resume, "continue from the checkpoint in --out");
    cmd->add_option("--checkpoint-every", checkpoint_every, "checkpoint period in steps");
    cmd->add_option("--max-steps", max_steps, "stop after this many steps in this invocation");
  }
};

// ---- gen-data ----

struct GenDataArgs {
  std::string kind = "circle_pair";
  std::size_t dim = 20;
  std::size_t n = 1000;
  double noise = 0.01;
  std::uint64_t seed = 0;
  std::size_t n_labeled = 8;
  std::optional<std::uint64_t> split_seed;
  double test_fraction = 0.2;
  std::string out;
};

int gen_data(const GenDataArgs& a) {
  Dataset ds = make_embedded_manifold(parse_manifold_kind(a.kind), a.dim, a.n, a.noise, a.seed);
  const std::uint64_t split_seed = a.split_seed.value_or(a.seed);
  split_semi_supervised(ds, a.n_labeled, split_seed, a.test_fraction);
  const fs::path out = resolve_out(a.out, "gen-data");
  try {
    save_dataset(ds, out);
  } catch (const DataError& e) {
    throw IoError(e.what());
  }
  write_run(out, "gen-data",
            Json{{"kind", a.kind}, {"dim", a.dim}, {"n", a.n}, {"noise", a.noise},
                 {"seed", a.seed}, {"n_labeled", a.n_labeled}, {"split_seed", split_seed},
                 {"test_fraction", a.test_fraction}, {"out", out.string()}});
  std::cout << "wrote " << (out / "data.csv").string() << " (" << ds.size() << " x " << ds.dim()
            << ", " << ds.split.labeled.size() << " labeled, " << ds.split.test.size()
            << " test)\n";
  return kExitOk;
}

// ---- train-gan ----

struct TrainGanArgs {
  std::string variant;
  std::string data;
  std::string out;
  std::size_t oracle_steps = 1500;
  TrainOverrides train;
  RunFlags run;
};

int train_gan(const TrainGanArgs& a) {
  TrainConfig cfg = a.train.resolve();
  cfg.variant = parse_train_variant(a.variant);
  const Dataset ds = load_data(a.data);
  const fs::path out = resolve_out(a.out, "train-gan");
  const GanRunResult r =
      train_encoder_variant(cfg, ds, RunOptions{out, a.run.checkpoint_every, a.run.resume,
                                                a.run.max_steps});
  write_run(out, "train-gan",
            Json{{"variant", train_variant_name(cfg.variant)}, {"data", a.data},
                 {"out", out.string()}, {"oracle_steps", a.oracle_steps},
                 {"config", config_to_json(cfg)}});
  if (!r.finished) {
    std::cout << "stopped at step " << r.steps << "; continue with --resume\n";
    return kExitOk;
  }
  const auto eval_ids = evaluation_rows(ds);
  const Tensor x_eval = ds.rows(eval_ids);
  Json result{{"variant", train_variant_name(cfg.variant)},
              {"steps", r.steps},
              {"recon_heldout", reconstruction_error(r.models, x_eval)}};
  if (a.oracle_steps > 0 && !ds.labels.empty()) {
    OracleConfig oc;
    oc.steps = a.oracle_steps;
    oc.seed = cfg.seed;
    const Classifier oracle = train_oracle(ds, training_pool(ds), oc);
    const auto labels = ds.labels_of(eval_ids);
    result["oracle_error"] = classification_error(oracle, x_eval, labels);
    result["class_switch_error"] = class_preservation_error(oracle, r.models, x_eval, labels);
  }
  write_json(out / "result.json", result);
  std::cout << result.dump() << "\n";
  return kExitOk;
}

// ---- train-projector ----

struct TrainProjectorArgs {
  std::string gan;
  std::string data;
  std::string out;
  std::optional<std::size_t> d_p;
  ProjectorTrainConfig cfg;
  std::string feature_norm = "l2";
};

std::size_t default_dp(std::size_t latent_dim) {
  return std::max<std::size_t>(1, std::min<std::size_t>(10, latent_dim - 1));
}

int train_projector_cmd(TrainProjectorArgs a) {
  const GanModels m = load_gan(a.gan);
  const Dataset ds = load_data(a.data);
  const std::size_t d = m.encoder.output_dim();
  const std::size_t d_p = a.d_p.value_or(default_dp(d));
  if (d_p >= d && d > 1) {
    throw UsageError("--d-p must be below the latent dimension " + std::to_string(d));
  }
  if (a.feature_norm != "l1" && a.feature_norm != "l2") {
    throw UsageError("--feature-norm must be l1 or l2");
  }
  a.cfg.feature_norm = a.feature_norm == "l1" ? FeatureNorm::l1 : FeatureNorm::l2;
  ProjectorPair pair(ProjectorSpec{d, d_p, true, a.cfg.seed});
  const auto result = train_projector(pair, m.generator, m.encoder, m.discriminator,
                                      ds.rows(training_pool(ds)), a.cfg);
  const fs::path out = resolve_out(a.out, "train-projector");
  make_dir(out);
  write_json(out / "projector.json", model_to_json(pair));
  std::ostringstream curve;
  curve << "step,objective\n";
  for (const auto& [step, v] : result.curve) curve << step << "," << fmt(v) << "\n";
  write_text(out / "curve.csv", curve.str());
  write_run(out, "train-projector",
            Json{{"gan", a.gan}, {"data", a.data}, {"out", out.string()}, {"d_p", d_p},
                 {"steps", a.cfg.steps}, {"batch_size", a.cfg.batch_size},
                 {"adam", adam_config_to_json(a.cfg.adam)}, {"feature_norm", a.feature_norm},
                 {"seed", a.cfg.seed}, {"record_every", a.cfg.record_every}});
  if (!result.curve.empty()) {
    std::cout << "objective " << fmt(result.curve.front().second) << " -> "
              << fmt(result.curve.back().second) << "\n";
  }
  return kExitOk;
}

// ---- extract-tangents ----

struct ExtractArgs {
  std::string source;
  std::string data;
  std::string gan;
  std::string projector;
  std::optional<std::size_t> d_p;
  std::string out;
};

int extract_tangents(const ExtractArgs& a) {
  const TangentSource source = parse_tangent_source(a.source);
  const Dataset ds = load_data(a.data);
  std::optional<GanModels> gan;
  std::optional<ProjectorPair> pair;
  std::size_t d_p = a.d_p.value_or(1);
  if (source == TangentSource::ground_truth) {
    if (!ds.chart) {
      throw UsageError("source ground-truth needs data generated by gen-data with its "
                       "manifest.json (chart information); '" + a.data + "' has none");
    }
  } else {
    if (a.gan.empty()) throw UsageError("source " + a.source + " needs --gan");
    gan = load_gan(a.gan);
    if (!a.d_p) d_p = default_dp(gan->encoder.output_dim());
    if (source == TangentSource::projector_composed) {
      if (a.projector.empty()) throw UsageError("source projector needs --projector");
      const fs::path p = fs::is_directory(a.projector) ? fs::path(a.projector) / "projector.json"
                                                       : fs::path(a.projector);
      pair = projector_from_json(read_json(p));
      d_p = pair->spec().bottleneck_dim;
    }
  }
  const auto bases = dataset_tangents(ds, source, d_p, gan ? &*gan : nullptr,
                                      pair ? &*pair : nullptr);
  const fs::path out = resolve_out(a.out, "extract-tangents");
  make_dir(out);
  save_tangents_csv(bases, out / "tangents.csv");
  write_run(out, "extract-tangents",
            Json{{"source", tangent_source_name(source)}, {"data", a.data}, {"gan", a.gan},
                 {"projector", a.projector}, {"d_p", d_p}, {"out", out.string()}});
  std::cout << "wrote " << bases.size() << " tangent bases to " << (out / "tangents.csv").string()
            << "\n";
  return kExitOk;
}

// ---- train-ssl ----

struct TrainSslArgs {
  std::string data;
  std::string variant = "fm-gan-ssl";
  std::optional<std::size_t> n_labeled;
  std::optional<std::uint64_t> split_seed;
  double test_fraction = 0.2;
  std::optional<double> lambda1, lambda2, sigma;
  std::optional<std::size_t> freeze_step, probe_every;
  std::string tangents;
  std::string out;
  TrainOverrides train;
  RunFlags run;
};

int train_ssl_cmd(const TrainSslArgs& a) {
  TrainConfig cfg = a.train.resolve();
  cfg.variant = parse_train_variant(a.variant);
  if (is_gan_variant(cfg.variant)) {
    throw UsageError("train-ssl --variant must be fm-gan-ssl, regular-gan-ssl or supervised-only");
  }
  if (a.lambda1) cfg.lambda1 = *a.lambda1;
  if (a.lambda2) cfg.lambda2 = *a.lambda2;
  if (a.sigma) cfg.sigma = *a.sigma;
  if (a.freeze_step) cfg.freeze_generator_step = *a.freeze_step;
  if (a.probe_every) cfg.probe_every = *a.probe_every;
  cfg.validate();
  const bool needs_tangents = cfg.lambda1 > 0.0 && cfg.variant != TrainVariant::supervised_only;
  if (needs_tangents && a.tangents.empty()) {
    throw UsageError("--lambda1 > 0 needs --tangents (see extract-tangents), or pass --lambda1 0");
  }
  Dataset ds = load_data(a.data);
  if (a.n_labeled) {
    split_semi_supervised(ds, *a.n_labeled, a.split_seed.value_or(cfg.seed), a.test_fraction);
  }
  std::vector<TangentBasis> tangents;
  if (needs_tangents) {
    tangents = load_tangents(a.tangents);
    if (tangents.size() != ds.size()) {
      throw UsageError("--tangents holds " + std::to_string(tangents.size()) +
                       " bases for " + std::to_string(ds.size()) + " data rows");
    }
  }
  const fs::path out = resolve_out(a.out, "train-ssl");
  const SslRunResult r = train_ssl(cfg, ds, std::move(tangents),
                                   RunOptions{out, a.run.checkpoint_every, a.run.resume,
                                              a.run.max_steps});
  write_run(out, "train-ssl",
            Json{{"data", a.data}, {"tangents", needs_tangents ? a.tangents : ""},
                 {"n_labeled", ds.split.labeled.size()}, {"n_test", ds.split.test.size()},
                 {"split_seed", ds.manifest.split_seed}, {"test_fraction", ds.manifest.test_fraction},
                 {"out", out.string()}, {"config", config_to_json(cfg)}});
  if (!r.finished) {
    std::cout << "stopped at step " << r.steps << "; continue with --resume\n";
    return kExitOk;
  }
  std::cout << "test error " << fmt(r.test_error) << " after " << r.steps << " steps\n";
  return kExitOk;
}

// ---- analyze-fakes ----

struct AnalyzeArgs {
  std::string ssl;
  std::string data;
  std::size_t n_fakes = 256;
  std::uint64_t seed = 0;
  std::string out;
};

/// Summary of a training probe stream: rows, regime counts and the first
/// weak-regime step.
Json summarize_probe_stream(const std::string& text, const fs::path& path) {
  std::ostringstream header;
  write_probe_header(header);
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0, rows = 0;
  std::map<std::string, std::size_t> counts{{"weak", 0}, {"moderate", 0}, {"strong", 0}};
  Json first_weak = nullptr;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line + "\n" != header.str()) {
        throw IoError("'" + path.string() + "' line 1: unexpected probe header");
      }
      continue;
    }
    if (line.empty()) continue;
    const std::size_t comma = line.find(','), last = line.rfind(',');
    const std::string regime = last == std::string::npos ? "" : line.substr(last + 1);
    if (comma == std::string::npos || !counts.count(regime)) {
      throw IoError("'" + path.string() + "' line " + std::to_string(line_no) +
                    ": malformed probe row");
    }
    ++counts[regime];
    ++rows;
    if (regime == "weak" && first_weak.is_null()) {
      first_weak = std::stoull(line.substr(0, comma));
    }
  }
  return Json{{"rows", rows}, {"regime_counts", counts}, {"first_weak_step", first_weak}};
}

int analyze_fakes(const AnalyzeArgs& a) {
  const fs::path dir(a.ssl);
  const Classifier c = classifier_from_json(read_json(dir / "classifier.json"));
  const Mlp g = mlp_from_json(read_json(dir / "generator.json"));
  const std::size_t step = read_json(dir / "state.json").value("step", std::size_t{0});
  const Dataset ds = load_data(a.data);
  if (ds.labels.empty()) throw UsageError("analyze-fakes needs labeled data");
  Rng rng = Rng(a.seed).split("analyze-fakes");
  Tensor z({a.n_fakes, g.input_dim()});
  for (auto& v : z.storage()) v = rng.normal();
  const Tensor fakes = g(z);
  const auto ids = evaluation_rows(ds);
  const Tensor reals = ds.rows(ids);
  const auto labels = ds.labels_of(ids);
  const ProbeRecord p = probe_step(c, fakes, reals, labels, step);
  const GradDecomposition dec = unsup_grad_decomposition(logit_model(c), fakes, reals);

  const fs::path out = resolve_out(a.out, "analyze-fakes");
  make_dir(out);
  // The training probe stream is replayed as is; the fresh evaluation of the
  // checkpoint goes to its own file.
  Json stream = nullptr;
  if (fs::exists(dir / "probes.csv")) {
    const std::string text = read_text(dir / "probes.csv");
    stream = summarize_probe_stream(text, dir / "probes.csv");
    write_text(out / "probes.csv", text);
  }
  std::ostringstream csv;
  write_probe_header(csv);
  write_probe_row(csv, p);
  write_text(out / "final_probe.csv", csv.str());
  write_json(out / "analysis.json",
             Json{{"checkpoint_step", step},
                  {"final",
                   Json{{"regime", fake_regime_name(p.regime)},
                        {"p_fake_on_fakes", p.p_fake_on_fakes},
                        {"p_fake_on_reals", p.p_fake_on_reals},
                        {"a_imax_mean", p.a_imax_mean},
                        {"a_other_mean", p.a_other_mean},
                        {"b_true_mean", p.b_true_mean},
                        {"entropy_real", p.entropy_real},
                        {"l_unsup", p.l_unsup},
                        {"decomposition_max_rel_err", dec.max_rel_err}}},
                  {"stream", stream}});
  write_run(out, "analyze-fakes",
            Json{{"ssl", a.ssl}, {"data", a.data}, {"n_fakes", a.n_fakes}, {"seed", a.seed},
                 {"out", out.string()}});
  std::cout << "step " << step << ": regime " << fake_regime_name(p.regime) << ", p(fake|x_g) "
            << fmt(p.p_fake_on_fakes) << ", p(fake|x) " << fmt(p.p_fake_on_reals) << "\n";
  return kExitOk;
}

// ---- subspace-metrics ----

struct SubspaceArgs {
  std::string a, b;
  bool random = false;
  std::size_t ambient = 3072;
  std::size_t rank = 10;
  std::size_t pairs = 10;
  std::string kind = "uniform01";
  std::uint64_t seed = 0;
  std::string out;
};

Json comparison_json(const SubspaceComparison& c) {
  return Json{{"angles_deg", c.angles_deg}, {"geodesic", c.geodesic}};
}

int subspace_metrics(const SubspaceArgs& a) {
  const fs::path out = resolve_out(a.out, "subspace-metrics");
  Json result;
  if (a.random) {
    RandomSubspaceKind kind;
    if (a.kind == "uniform01") {
      kind = RandomSubspaceKind::uniform01;
    } else if (a.kind == "gaussian") {
      kind = RandomSubspaceKind::gaussian;
    } else {
      throw UsageError("--kind must be uniform01 or gaussian");
    }
    if (a.rank == 0 || a.rank > a.ambient) throw UsageError("--rank must be in [1, --ambient]");
    result = comparison_json(average_random_comparison(a.ambient, a.rank, a.pairs, kind,
                                                       Rng(a.seed).split("subspace-metrics")));
    result["pairs"] = a.pairs;
  } else {
    if (a.a.empty() || a.b.empty()) throw UsageError("pass --a and --b tangent files, or --random");
    const auto ta = load_tangents(a.a), tb = load_tangents(a.b);
    if (ta.size() != tb.size()) {
      throw UsageError("tangent files hold " + std::to_string(ta.size()) + " and " +
                       std::to_string(tb.size()) + " points");
    }
    std::vector<double> mean_angles;
    double mean_geo = 0.0;
    bool equal_ranks = true;
    Json per_point = Json::array();
    for (std::size_t i = 0; i < ta.size(); ++i) {
      const Subspace sa = tangent_subspace(ta[i]), sb = tangent_subspace(tb[i]);
      std::vector<double> ang = principal_angles(sa, sb);
      for (auto& t : ang) t = degrees(t);
      if (mean_angles.size() < ang.size()) mean_angles.resize(ang.size(), 0.0);
      for (std::size_t j = 0; j < ang.size(); ++j) {
        mean_angles[j] += ang[j] / static_cast<double>(ta.size());
      }
      Json row{{"point", i}, {"angles_deg", ang}};
      if (sa.rank() == sb.rank()) {
        const double geo = geodesic_distance(sa, sb);
        mean_geo += geo / static_cast<double>(ta.size());
        row["geodesic"] = geo;
      } else {
        equal_ranks = false;
      }
      per_point.push_back(std::move(row));
    }
    result = Json{{"points", ta.size()}, {"mean_angles_deg", mean_angles}};
    result["mean_geodesic"] = equal_ranks ? Json(mean_geo) : Json(nullptr);
    result["per_point"] = std::move(per_point);
  }
  make_dir(out);
  write_json(out / "subspace.json", result);
  write_run(out, "subspace-metrics",
            Json{{"a", a.a}, {"b", a.b}, {"random", a.random}, {"ambient", a.ambient},
                 {"rank", a.rank}, {"pairs", a.pairs}, {"kind", a.kind}, {"seed", a.seed},
                 {"out", out.string()}});
  std::cout << (a.random ? result.dump() : result["mean_angles_deg"].dump()) << "\n";
  return kExitOk;
}

// ---- grad-check ----

struct GradCheckArgs {
  std::size_t probes = 100;
  double tolerance = 1e-5;
  double eps = 1e-4;
  std::uint64_t seed = 0;
  bool inject_bug = false;
  std::string out;
};

int grad_check(const GradCheckArgs& a) {
  const GradCheckOptions opt{a.eps, a.tolerance, a.probes};
  std::vector<GradCheckCase> cases = op_gradcheck_cases();
  for (auto& c : loss_gradcheck_cases()) cases.push_back(std::move(c));
  if (a.inject_bug) cases.push_back(faulty_gradcheck_case());
  const Rng root = Rng(a.seed).split("grad-check");
  std::vector<GradCheckResult> results;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    results.push_back(run_gradcheck(cases[i], opt, root.split(cases[i].name)));
  }
  for (auto& r : model_loss_gradchecks(opt, root.split("models"))) results.push_back(std::move(r));

  std::ostringstream report;
  bool all = true;
  Json rows = Json::array();
  for (const auto& r : results) {
    all = all && r.passed();
    report << (r.passed() ? "PASS " : "FAIL ") << r.name << " probes=" << r.probes
           << " max_err=" << fmt(r.max_error) << " tol=" << fmt(r.tolerance) << "\n";
    rows.push_back(Json{{"name", r.name}, {"probes", r.probes}, {"max_error", r.max_error},
                        {"tolerance", r.tolerance}, {"passed", r.passed()}});
  }
  const fs::path out = resolve_out(a.out, "grad-check");
  make_dir(out);
  write_text(out / "report.txt", report.str());
  write_json(out / "report.json", Json{{"passed", all}, {"cases", rows}});
  write_run(out, "grad-check",
            Json{{"probes", a.probes}, {"tolerance", a.tolerance}, {"eps", a.eps},
                 {"seed", a.seed}, {"inject_bug", a.inject_bug}, {"out", out.string()}});
  std::cout << report.str() << (all ? "all gradient checks passed\n" : "gradient check FAILED\n");
  return all ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Manifold-tangent semi-supervised GAN toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "mssl 1.0");

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "generate a toy manifold dataset");
  gen_cmd->add_option("--kind", gen.kind, "circle_pair, two_arcs or swiss_embed")
      ->check(CLI::IsMember({"circle_pair", "two_arcs", "swiss_embed"}));
  gen_cmd->add_option("--dim", gen.dim, "ambient dimension D")->check(CLI::Range(3, 1 << 20));
  gen_cmd->add_option("--n", gen.n, "number of points")->check(CLI::Range(10, 1 << 26));
  gen_cmd->add_option("--noise", gen.noise, "isotropic noise sigma")->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--seed", gen.seed, "random seed");
  gen_cmd->add_option("--n-labeled", gen.n_labeled, "labeled points in the split");
  gen_cmd->add_option("--split-seed", gen.split_seed, "split seed (default: --seed)");
  gen_cmd->add_option("--test-fraction", gen.test_fraction, "held-out fraction")
      ->check(CLI::Range(0.0, 0.99));
  gen_cmd->add_option("--out", gen.out, "output directory");

  TrainGanArgs tg;
  auto* tg_cmd = app.add_subcommand("train-gan", "train generator, encoder and discriminator");
  tg_cmd->add_option("--variant", tg.variant, "decoupled, bigan or aug-bigan")
      ->required()
      ->check(CLI::IsMember({"decoupled", "bigan", "aug-bigan"}));
  tg_cmd->add_option("--data", tg.data, "dataset directory or CSV")->required();
  tg_cmd->add_option("--out", tg.out, "checkpoint directory");
  tg_cmd->add_option("--oracle-steps", tg.oracle_steps,
                     "steps of the supervised oracle scoring g(h(x)) (0 = skip)");
  tg.train.add(tg_cmd);
  tg.run.add(tg_cmd);

  TrainProjectorArgs tp;
  tp.cfg.record_every = 100;
  auto* tp_cmd = app.add_subcommand("train-projector", "fit the bottleneck pair (p, pbar)");
  tp_cmd->add_option("--gan", tp.gan, "train-gan output directory")->required();
  tp_cmd->add_option("--data", tp.data, "dataset directory or CSV")->required();
  tp_cmd->add_option("--d-p", tp.d_p, "bottleneck width (default min(10, d-1))")
      ->check(CLI::PositiveNumber);
  tp_cmd->add_option("--steps", tp.cfg.steps, "optimizer steps");
  tp_cmd->add_option("--batch-size", tp.cfg.batch_size, "minibatch size")->check(CLI::PositiveNumber);
  tp_cmd->add_option("--lr", tp.cfg.adam.lr, "Adam learning rate")->check(CLI::PositiveNumber);
  tp_cmd->add_option("--record-every", tp.cfg.record_every, "objective curve period in steps");
  tp_cmd->add_option("--feature-norm", tp.feature_norm, "l1 or l2");
  tp_cmd->add_option("--seed", tp.cfg.seed, "random seed");
  tp_cmd->add_option("--out", tp.out, "output directory");

  ExtractArgs ex;
  auto* ex_cmd = app.add_subcommand("extract-tangents", "tangent bases at every data point");
  ex_cmd->add_option("--source", ex.source, "svd-encoder, svd-generator, projector or ground-truth")
      ->required()
      ->check(CLI::IsMember({"svd-encoder", "svd-generator", "projector", "ground-truth"}));
  ex_cmd->add_option("--data", ex.data, "dataset directory or CSV")->required();
  ex_cmd->add_option("--gan", ex.gan, "train-gan output directory");
  ex_cmd->add_option("--projector", ex.projector, "train-projector output directory");
  ex_cmd->add_option("--d-p", ex.d_p, "number of tangents for the svd sources")
      ->check(CLI::PositiveNumber);
  ex_cmd->add_option("--out", ex.out, "output directory");

  TrainSslArgs ts;
  auto* ts_cmd = app.add_subcommand("train-ssl", "semi-supervised (k+1)-class training");
  ts_cmd->add_option("--data", ts.data, "dataset directory or CSV")->required();
  ts_cmd->add_option("--variant", ts.variant, "fm-gan-ssl, regular-gan-ssl or supervised-only")
      ->check(CLI::IsMember({"fm-gan-ssl", "regular-gan-ssl", "supervised-only"}));
  ts_cmd->add_option("--nl", ts.n_labeled, "re-split with this many labeled points");
  ts_cmd->add_option("--split-seed", ts.split_seed, "seed of the re-split (default: --seed)");
  ts_cmd->add_option("--test-fraction", ts.test_fraction, "held-out fraction of the re-split")
      ->check(CLI::Range(0.0, 0.99));
  ts_cmd->add_option("--lambda1", ts.lambda1, "tangent penalty weight")->check(CLI::NonNegativeNumber);
  ts_cmd->add_option("--lambda2", ts.lambda2, "Jacobian penalty weight")
      ->check(CLI::NonNegativeNumber);
  ts_cmd->add_option("--sigma", ts.sigma, "Jacobian perturbation scale")->check(CLI::PositiveNumber);
  ts_cmd->add_option("--tangents", ts.tangents, "extract-tangents output");
  ts_cmd->add_option("--freeze-generator-step", ts.freeze_step,
                     "stop generator updates from this step on");
  ts_cmd->add_option("--probe-every", ts.probe_every, "probe period in steps");
  ts_cmd->add_option("--out", ts.out, "checkpoint directory");
  ts.train.add(ts_cmd);
  ts.run.add(ts_cmd);

  AnalyzeArgs an;
  auto* an_cmd = app.add_subcommand("analyze-fakes", "probe the fake-example regime");
  an_cmd->add_option("--ssl", an.ssl, "train-ssl output directory")->required();
  an_cmd->add_option("--data", an.data, "dataset directory or CSV")->required();
  an_cmd->add_option("--n-fakes", an.n_fakes, "generated samples")->check(CLI::PositiveNumber);
  an_cmd->add_option("--seed", an.seed, "random seed");
  an_cmd->add_option("--out", an.out, "output directory");

  SubspaceArgs ss;
  auto* ss_cmd = app.add_subcommand("subspace-metrics", "principal angles and geodesic distance");
  ss_cmd->add_option("--a", ss.a, "tangent file");
  ss_cmd->add_option("--b", ss.b, "tangent file");
  ss_cmd->add_flag("--random", ss.random, "compare pairs of random subspaces instead");
  ss_cmd->add_option("--ambient", ss.ambient, "ambient dimension for --random")
      ->check(CLI::PositiveNumber);
  ss_cmd->add_option("--rank", ss.rank, "subspace dimension for --random");
  ss_cmd->add_option("--pairs", ss.pairs, "number of pairs for --random")->check(CLI::PositiveNumber);
  ss_cmd->add_option("--kind", ss.kind, "uniform01 or gaussian");
  ss_cmd->add_option("--seed", ss.seed, "random seed");
  ss_cmd->add_option("--out", ss.out, "output directory");

  GradCheckArgs gc;
  auto* gc_cmd = app.add_subcommand("grad-check", "reverse mode vs central differences");
  gc_cmd->add_option("--probes", gc.probes, "random probes per case")->check(CLI::PositiveNumber);
  gc_cmd->add_option("--tolerance", gc.tolerance, "maximum scaled error")->check(CLI::PositiveNumber);
  gc_cmd->add_option("--eps", gc.eps, "finite-difference step")->check(CLI::PositiveNumber);
  gc_cmd->add_option("--seed", gc.seed, "random seed");
  gc_cmd->add_flag("--inject-bug", gc.inject_bug, "add a case with a wrong derivative");
  gc_cmd->add_option("--out", gc.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen_cmd) return gen_data(gen);
    if (*tg_cmd) return train_gan(tg);
    if (*tp_cmd) return train_projector_cmd(tp);
    if (*ex_cmd) return extract_tangents(ex);
    if (*ts_cmd) return train_ssl_cmd(ts);
    if (*an_cmd) return analyze_fakes(an);
    if (*ss_cmd) return subspace_metrics(ss);
    if (*gc_cmd) return grad_check(gc);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const DataError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const TangentFileError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
