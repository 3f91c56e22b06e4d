#include "rfet/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "rfet/errors.hpp"

namespace rfet {
namespace {

using nlohmann::json;

constexpr std::uint64_t kTypeStream = 0x7479706573ULL;   // "types"
constexpr std::uint64_t kGammaStream = 0x67616d6d61ULL;  // "gamma"
constexpr int kMaxTieResamples = 64;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double draw(const Range& r, std::uint64_t seed, std::uint64_t stream,
            std::uint64_t counter) {
  return r.first + (r.second - r.first) * counter_uniform(seed, stream, counter);
}

void check_range(const Range& r, const char* name, bool positive) {
  if (!std::isfinite(r.first) || !std::isfinite(r.second) || r.first > r.second ||
      (positive && !(r.first > 0.0))) {
    throw ConfigError(std::string("invalid range for ") + name);
  }
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known,
                    const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find_if(known.begin(), known.end(),
                     [&](const char* k) { return key == k; }) == known.end()) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

Range read_range(const json& j, const char* name) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(std::string(name) + " must be a [lo, hi] pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

template <class T>
T read(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  const std::uint64_t key = splitmix64(seed ^ splitmix64(stream));
  const std::uint64_t bits = splitmix64(key ^ splitmix64(counter + 0x632be59bd9b4e019ULL));
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

void ScenarioConfig::validate() const {
  if (n_eaps < 1) throw ConfigError("n_eaps must be >= 1");
  if (n_types < 1) throw ConfigError("n_types must be >= 1");
  if (gamma.has_value() == physical.has_value()) {
    throw ConfigError("exactly one of 'gamma' and 'physical' must be given");
  }
  if (type_gen.has_value() == types.has_value()) {
    throw ConfigError("exactly one of 'type_gen' and 'types' must be given");
  }
  if (gamma && !(*gamma > 0.0 && std::isfinite(*gamma))) {
    throw ConfigError("gamma must be positive");
  }
  if (physical) {
    if (!(physical->eta > 0.0 && physical->eta < 1.0)) throw ConfigError("eta must lie in (0, 1)");
    if (!(physical->noise_n0 > 0.0)) throw ConfigError("noise_n0 must be positive");
    check_range(physical->d_as, "d_as", true);
  }
  if (type_gen) {
    check_range(type_gen->a, "a", true);
    check_range(type_gen->d_ms, "d_ms", true);
  }
  if (types) {
    if (static_cast<int>(types->size()) != n_types) {
      throw ConfigError("'types' must list n_types values");
    }
    for (std::size_t k = 0; k < types->size(); ++k) {
      if (!((*types)[k] > 0.0)) throw ConfigError("types must be positive");
      if (k > 0 && !((*types)[k - 1] < (*types)[k])) {
        throw ConfigError("types must be strictly increasing");
      }
    }
  }
  if (!(bandwidth_w > 0.0)) throw ConfigError("bandwidth_w must be positive");
  if (mc_draws < 1) throw ConfigError("mc_draws must be >= 1");
}

ScenarioConfig parse_scenario(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(root,
                 {"n_eaps", "n_types", "gamma", "physical", "type_gen", "types",
                  "bandwidth_w", "mc_draws", "seed"},
                 "config");
  ScenarioConfig cfg;
  cfg.n_eaps = read<int>(root, "n_eaps", cfg.n_eaps);
  cfg.n_types = read<int>(root, "n_types", cfg.n_types);
  if (root.contains("gamma")) cfg.gamma = read<double>(root, "gamma", 0.0);
  if (root.contains("physical")) {
    const json& p = root.at("physical");
    reject_unknown(p, {"eta", "noise_n0", "d_as", "attenuation", "path_loss_alpha"},
                   "physical");
    PhysicalGammaConfig phys;
    phys.eta = read<double>(p, "eta", phys.eta);
    phys.noise_n0 = read<double>(p, "noise_n0", phys.noise_n0);
    if (p.contains("d_as")) phys.d_as = read_range(p.at("d_as"), "d_as");
    phys.attenuation = read<double>(p, "attenuation", phys.attenuation);
    phys.path_loss_alpha = read<double>(p, "path_loss_alpha", phys.path_loss_alpha);
    cfg.physical = phys;
  }
  if (root.contains("type_gen")) {
    const json& t = root.at("type_gen");
    reject_unknown(t, {"a", "d_ms", "attenuation", "path_loss_alpha", "normalization", "seed"},
                   "type_gen");
    TypeGenConfig gen;
    if (t.contains("a")) gen.a = read_range(t.at("a"), "a");
    if (t.contains("d_ms")) gen.d_ms = read_range(t.at("d_ms"), "d_ms");
    gen.attenuation = read<double>(t, "attenuation", gen.attenuation);
    gen.path_loss_alpha = read<double>(t, "path_loss_alpha", gen.path_loss_alpha);
    const std::string mode = read<std::string>(t, "normalization", "unit");
    if (mode == "unit") {
      gen.normalization = TypeNormalization::kUnit;
    } else if (mode == "raw") {
      gen.normalization = TypeNormalization::kRaw;
    } else {
      throw ConfigError("normalization must be 'unit' or 'raw'");
    }
    gen.seed = read<std::uint64_t>(t, "seed", gen.seed);
    cfg.type_gen = gen;
  }
  if (root.contains("types")) cfg.types = read<std::vector<double>>(root, "types", {});
  cfg.bandwidth_w = read<double>(root, "bandwidth_w", cfg.bandwidth_w);
  cfg.mc_draws = read<std::int64_t>(root, "mc_draws", cfg.mc_draws);
  cfg.seed = read<std::uint64_t>(root, "seed", cfg.seed);
  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string to_json(const ScenarioConfig& cfg) {
  json root;
  root["n_eaps"] = cfg.n_eaps;
  root["n_types"] = cfg.n_types;
  if (cfg.gamma) root["gamma"] = *cfg.gamma;
  if (cfg.physical) {
    const auto& p = *cfg.physical;
    root["physical"] = {{"eta", p.eta},
                        {"noise_n0", p.noise_n0},
                        {"d_as", {p.d_as.first, p.d_as.second}},
                        {"attenuation", p.attenuation},
                        {"path_loss_alpha", p.path_loss_alpha}};
  }
  if (cfg.type_gen) {
    const auto& t = *cfg.type_gen;
    root["type_gen"] = {
        {"a", {t.a.first, t.a.second}},
        {"d_ms", {t.d_ms.first, t.d_ms.second}},
        {"attenuation", t.attenuation},
        {"path_loss_alpha", t.path_loss_alpha},
        {"normalization", t.normalization == TypeNormalization::kUnit ? "unit" : "raw"},
        {"seed", t.seed}};
  }
  if (cfg.types) root["types"] = *cfg.types;
  root["bandwidth_w"] = cfg.bandwidth_w;
  root["mc_draws"] = cfg.mc_draws;
  root["seed"] = cfg.seed;
  return root.dump(2);
}

double path_gain(double distance, double attenuation_db, double alpha) {
  if (!(distance > 0.0)) throw DomainError("distance must be positive");
  return std::pow(10.0, -attenuation_db / 10.0) * std::pow(distance, -alpha);
}

std::vector<double> sample_raw_types(const TypeGenConfig& gen, int n_types) {
  check_range(gen.a, "a", true);
  check_range(gen.d_ms, "d_ms", true);
  std::uint64_t counter = 0;
  auto sample_one = [&] {
    const double a = draw(gen.a, gen.seed, kTypeStream, counter++);
    const double d = draw(gen.d_ms, gen.seed, kTypeStream, counter++);
    const double g = path_gain(d, gen.attenuation, gen.path_loss_alpha);
    return EapPhysical{a, g}.type().value();
  };

  std::vector<double> thetas;
  for (int k = 0; k < n_types; ++k) thetas.push_back(sample_one());
  std::sort(thetas.begin(), thetas.end());
  for (int attempt = 0;; ++attempt) {
    auto dup = std::adjacent_find(thetas.begin(), thetas.end());
    if (dup == thetas.end()) return thetas;
    if (attempt == kMaxTieResamples) {
      throw ConfigError("could not draw distinct types from the given ranges");
    }
    *dup = sample_one();
    std::sort(thetas.begin(), thetas.end());
  }
}

Market generate_market(const ScenarioConfig& cfg) {
  cfg.validate();
  std::vector<double> thetas;
  if (cfg.types) {
    thetas = *cfg.types;
  } else {
    thetas = sample_raw_types(*cfg.type_gen, cfg.n_types);
    if (cfg.type_gen->normalization == TypeNormalization::kUnit) {
      const double top = thetas.back();
      for (double& t : thetas) t /= top;
      if (std::adjacent_find(thetas.begin(), thetas.end()) != thetas.end()) {
        throw ConfigError("types collapsed under normalization");
      }
    }
  }

  if (cfg.gamma) return Market(cfg.n_eaps, std::move(thetas), *cfg.gamma, cfg.bandwidth_w);

  const auto& p = *cfg.physical;
  PhysicalParams params;
  params.eta = p.eta;
  params.noise_n0 = p.noise_n0;
  params.bandwidth_w = cfg.bandwidth_w;
  params.gain_das = path_gain(draw(p.d_as, cfg.seed, kGammaStream, 0), p.attenuation,
                              p.path_loss_alpha);
  return Market::FromPhysical(cfg.n_eaps, std::move(thetas), params);
}

}  // namespace rfet
