#include "cvflock/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace cvflock {

namespace {

constexpr int kFormatVersion = 1;

// FNV-1a 64 over the model identity and the IEEE-754 bytes of every
// parameter, little-endian, so corruption of any coordinate is caught.
std::uint64_t checksum(const std::string& kind,
                       const std::vector<std::pair<std::string, std::string>>&
                           arch,
                       const std::vector<double>& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto eat = [&h](const void* data, std::size_t len) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  eat(kind.data(), kind.size());
  for (const auto& [k, v] : arch) {
    eat(k.data(), k.size());
    eat(v.data(), v.size());
  }
  for (double d : params) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof(bits));
    for (int i = 0; i < 8; ++i) {
      const unsigned char byte = static_cast<unsigned char>(bits >> (8 * i));
      eat(&byte, 1);
    }
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

int arch_int(const nlohmann::json& arch, const char* key) {
  if (!arch.contains(key))
    throw ConfigError(std::string("checkpoint: missing arch field ") + key);
  return std::stoi(arch.at(key).get<std::string>());
}

}  // namespace

void save_checkpoint(const Policy& policy, const std::string& path) {
  const auto params = policy.params_flat();
  const auto arch = policy.arch_fields();

  nlohmann::json j;
  j["format"] = "cvflock-checkpoint";
  j["version"] = kFormatVersion;
  j["kind"] = policy.kind();
  nlohmann::json ja = nlohmann::json::object();
  for (const auto& [k, v] : arch) ja[k] = v;
  j["arch"] = ja;
  j["params"] = params;
  j["checksum"] = hex64(checksum(policy.kind(), arch, params));

  std::ofstream out(path);
  if (!out) throw ConfigError("checkpoint: cannot write " + path);
  out << j.dump(2) << "\n";
}

std::unique_ptr<Policy> load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("checkpoint: cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("checkpoint: malformed JSON in " + path + ": " +
                      e.what());
  }
  if (j.value("format", "") != "cvflock-checkpoint" ||
      j.value("version", -1) != kFormatVersion)
    throw ConfigError("checkpoint: unrecognized format/version in " + path);

  const std::string kind = j.at("kind").get<std::string>();
  const auto& arch = j.at("arch");
  std::vector<double> params = j.at("params").get<std::vector<double>>();

  // a zero-seed rng; parameters are overwritten below
  Rng rng(0);
  std::unique_ptr<Policy> policy;
  if (kind == "invariant") {
    GnnArch a;
    a.input_width = arch_int(arch, "input_width");
    a.hidden_layers = arch_int(arch, "hidden_layers");
    a.width = arch_int(arch, "width");
    policy = make_invariant_policy(a, rng);
  } else if (kind == "baseline") {
    BaselineArch a;
    a.input_width = arch_int(arch, "input_width");
    a.hidden_layers = arch_int(arch, "hidden_layers");
    a.width = arch_int(arch, "width");
    a.output_width = arch_int(arch, "output_width");
    const std::string enc = arch.at("angle_encoding").get<std::string>();
    if (enc == "raw")
      a.encoding = AngleEncoding::kRaw;
    else if (enc == "cossin")
      a.encoding = AngleEncoding::kCosSin;
    else
      throw ConfigError("checkpoint: unknown angle_encoding " + enc);
    policy = make_baseline_policy(a, rng);
  } else {
    throw ConfigError("checkpoint: unknown model kind " + kind);
  }

  if (params.size() != policy->param_count())
    throw ConfigError("checkpoint: " + path + " has " +
                      std::to_string(params.size()) + " parameters, model " +
                      kind + " expects " +
                      std::to_string(policy->param_count()));

  const std::string want = j.at("checksum").get<std::string>();
  const std::string got = hex64(checksum(kind, policy->arch_fields(), params));
  if (want != got)
    throw ConfigError("checkpoint: checksum mismatch in " + path +
                      " (stored " + want + ", computed " + got + ")");

  policy->set_params_flat(params);
  return policy;
}

}  // namespace cvflock
