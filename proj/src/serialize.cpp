#include "mssl/serialize.hpp"

#include <fstream>
#include <sstream>

namespace mssl {

namespace {

Json mlp_spec_json(const MlpSpec& s) {
  return Json{{"layer_sizes", s.layer_sizes},
              {"hidden", activation_name(s.hidden)},
              {"output", activation_name(s.output)},
              {"weight_norm", s.weight_norm},
              {"seed", s.seed}};
}

MlpSpec mlp_spec_from(const Json& j) {
  MlpSpec s;
  s.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
  s.hidden = parse_activation(j.at("hidden").get<std::string>());
  s.output = parse_activation(j.at("output").get<std::string>());
  s.weight_norm = j.at("weight_norm").get<bool>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

Json envelope(const char* kind, Json spec, const ParamStore& params) {
  return Json{{"format_version", kModelFormatVersion},
              {"kind", kind},
              {"spec", std::move(spec)},
              {"params", params_to_json(params)}};
}

const Json& open_envelope(const Json& j, const char* kind) {
  try {
    if (j.at("format_version").get<int>() != kModelFormatVersion) {
      throw IoError("model file: unsupported format version " + j.at("format_version").dump());
    }
    if (j.at("kind").get<std::string>() != kind) {
      throw IoError("model file: expected kind '" + std::string(kind) + "', got '" +
                    j.at("kind").get<std::string>() + "'");
    }
    return j.at("spec");
  } catch (const Json::exception& e) {
    throw IoError(std::string("model file: ") + e.what());
  }
}

template <class Model, class Build>
Model load_model(const Json& j, const char* kind, Build build) {
  const Json& spec = open_envelope(j, kind);
  try {
    Model m = build(spec);
    params_from_json(j.at("params"), m.params());
    return m;
  } catch (const Json::exception& e) {
    throw IoError(std::string("model file: ") + e.what());
  }
}

}  // namespace

Json params_to_json(const ParamStore& store) {
  Json out = Json::array();
  for (const auto& p : store) {
    out.push_back(Json{{"name", p.name}, {"shape", p.value.shape()}, {"values", p.value.storage()}});
  }
  return out;
}

void params_from_json(const Json& j, ParamStore& store) {
  if (!j.is_array() || j.size() != store.size()) {
    throw IoError("parameter list: expected " + std::to_string(store.size()) + " tensors");
  }
  for (std::size_t i = 0; i < store.size(); ++i) {
    const Json& e = j[i];
    Param& p = store[i];
    if (e.at("name").get<std::string>() != p.name ||
        e.at("shape").get<std::vector<std::size_t>>() != p.value.shape()) {
      throw IoError("parameter list: entry " + std::to_string(i) + " does not match '" + p.name +
                    "' " + p.value.shape_string());
    }
    auto values = e.at("values").get<std::vector<double>>();
    if (values.size() != p.value.size()) {
      throw IoError("parameter list: wrong value count for '" + p.name + "'");
    }
    p.value.storage() = std::move(values);
  }
}

Json model_to_json(const Mlp& m) { return envelope("mlp", mlp_spec_json(m.spec()), m.params()); }

Json model_to_json(const DualDiscriminator& m) {
  const auto& s = m.spec();
  return envelope("dual_discriminator",
                  Json{{"latent_dim", s.latent_dim},
                       {"data_dim", s.data_dim},
                       {"num_classes", s.num_classes},
                       {"z_hidden", s.z_hidden},
                       {"x_hidden", s.x_hidden},
                       {"trunk_hidden", s.trunk_hidden},
                       {"weight_norm", s.weight_norm},
                       {"seed", s.seed}},
                  m.params());
}

Json model_to_json(const Classifier& m) {
  const auto& s = m.spec();
  return envelope("classifier",
                  Json{{"data_dim", s.data_dim},
                       {"num_classes", s.num_classes},
                       {"hidden", s.hidden},
                       {"weight_norm", s.weight_norm},
                       {"seed", s.seed}},
                  m.params());
}

Json model_to_json(const ProjectorPair& m) {
  const auto& s = m.spec();
  return envelope("projector",
                  Json{{"latent_dim", s.latent_dim},
                       {"bottleneck_dim", s.bottleneck_dim},
                       {"weight_norm", s.weight_norm},
                       {"seed", s.seed}},
                  m.params());
}

Mlp mlp_from_json(const Json& j) {
  return load_model<Mlp>(j, "mlp", [](const Json& s) { return Mlp(mlp_spec_from(s)); });
}

DualDiscriminator discriminator_from_json(const Json& j) {
  return load_model<DualDiscriminator>(j, "dual_discriminator", [](const Json& s) {
    DualDiscriminatorSpec spec;
    spec.latent_dim = s.at("latent_dim").get<std::size_t>();
    spec.data_dim = s.at("data_dim").get<std::size_t>();
    spec.num_classes = s.at("num_classes").get<std::size_t>();
    spec.z_hidden = s.at("z_hidden").get<std::vector<std::size_t>>();
    spec.x_hidden = s.at("x_hidden").get<std::vector<std::size_t>>();
    spec.trunk_hidden = s.at("trunk_hidden").get<std::vector<std::size_t>>();
    spec.weight_norm = s.at("weight_norm").get<bool>();
    spec.seed = s.at("seed").get<std::uint64_t>();
    return DualDiscriminator(spec);
  });
}

Classifier classifier_from_json(const Json& j) {
  return load_model<Classifier>(j, "classifier", [](const Json& s) {
    ClassifierSpec spec;
    spec.data_dim = s.at("data_dim").get<std::size_t>();
    spec.num_classes = s.at("num_classes").get<std::size_t>();
    spec.hidden = s.at("hidden").get<std::vector<std::size_t>>();
    spec.weight_norm = s.at("weight_norm").get<bool>();
    spec.seed = s.at("seed").get<std::uint64_t>();
    return Classifier(spec);
  });
}

ProjectorPair projector_from_json(const Json& j) {
  return load_model<ProjectorPair>(j, "projector", [](const Json& s) {
    ProjectorSpec spec;
    spec.latent_dim = s.at("latent_dim").get<std::size_t>();
    spec.bottleneck_dim = s.at("bottleneck_dim").get<std::size_t>();
    spec.weight_norm = s.at("weight_norm").get<bool>();
    spec.seed = s.at("seed").get<std::uint64_t>();
    return ProjectorPair(spec);
  });
}

Json adam_state_to_json(const AdamState& s) {
  return Json{{"step", s.step}, {"m", s.m}, {"v", s.v}};
}

AdamState adam_state_from_json(const Json& j) {
  AdamState s;
  s.step = j.at("step").get<std::uint64_t>();
  s.m = j.at("m").get<std::vector<double>>();
  s.v = j.at("v").get<std::vector<double>>();
  return s;
}

Json adam_config_to_json(const AdamConfig& c) {
  return Json{{"lr", c.lr}, {"beta1", c.beta1}, {"beta2", c.beta2}, {"epsilon", c.epsilon}};
}

AdamConfig adam_config_from_json(const Json& j) {
  AdamConfig c;
  c.lr = j.value("lr", c.lr);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.epsilon = j.value("epsilon", c.epsilon);
  return c;
}

Json rng_to_json(const Rng& r) { return Json{{"key", r.key()}, {"counter", r.counter()}}; }

Rng rng_from_json(const Json& j) {
  return Rng(j.at("key").get<std::uint64_t>(), j.at("counter").get<std::uint64_t>());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Json read_json(const std::filesystem::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw IoError("'" + path.string() + "': " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) {
  write_text(path, j.dump(2) + "\n");
}

}  // namespace mssl
