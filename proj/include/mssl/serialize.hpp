#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "mssl/models.hpp"
#include "mssl/optim.hpp"
#include "mssl/rng.hpp"

namespace mssl {

using Json = nlohmann::ordered_json;

inline constexpr int kModelFormatVersion = 1;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Named parameter tensors with shapes and full-precision values.
Json params_to_json(const ParamStore& store);
/// Overwrites the values of `store`; names and shapes must match.
void params_from_json(const Json& j, ParamStore& store);

/// Self-describing model documents: format version, kind, spec, parameters.
Json model_to_json(const Mlp& m);
Json model_to_json(const DualDiscriminator& m);
Json model_to_json(const Classifier& m);
Json model_to_json(const ProjectorPair& m);
Mlp mlp_from_json(const Json& j);
DualDiscriminator discriminator_from_json(const Json& j);
Classifier classifier_from_json(const Json& j);
ProjectorPair projector_from_json(const Json& j);

Json adam_state_to_json(const AdamState& s);
AdamState adam_state_from_json(const Json& j);
Json adam_config_to_json(const AdamConfig& c);
AdamConfig adam_config_from_json(const Json& j);
Json rng_to_json(const Rng& r);
Rng rng_from_json(const Json& j);

/// Whole-file helpers; failures raise IoError naming the path.
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace mssl
