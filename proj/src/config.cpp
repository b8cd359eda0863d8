#include "hbm/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <type_traits>

#include "hbm/errors.hpp"

namespace hbm {

namespace {

using nlohmann::json;

void reject_unknown(const json& section, const std::string& name, const std::set<std::string>& allowed) {
  if (!section.is_object()) throw ConfigError(name, "expected an object");
  for (const auto& [key, value] : section.items()) {
    if (!allowed.count(key)) throw ConfigError(name + "." + key, "unknown field");
  }
}

template <class T>
void read_field(const json& section, const std::string& section_name, const std::string& key, T& out) {
  if (!section.contains(key)) return;
  const auto& v = section.at(key);
  const std::string field = section_name + "." + key;
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ConfigError(field, "expected true or false");
    out = v.get<bool>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw ConfigError(field, "expected a string");
    out = v.get<std::string>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw ConfigError(field, "expected an integer");
    if (std::is_unsigned_v<T> && !v.is_number_unsigned() && v.get<long long>() < 0) throw ConfigError(field, "must be >= 0");
    out = v.get<T>();
  } else {
    if (!v.is_number()) throw ConfigError(field, "expected a number");
    out = v.get<T>();
  }
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
  reject_unknown(j, "config", {"model", "schedule", "io"});
  RunConfig cfg;
  Hyperparameters& h = cfg.hyper;

  const json empty = json::object();
  const json& model = j.contains("model") ? j.at("model") : empty;
  reject_unknown(model, "model", {"gamma", "mu", "sigma", "lambda", "eta", "depth", "level_prior_mode", "alpha"});
  read_field(model, "model", "gamma", h.gamma);
  read_field(model, "model", "mu", h.mu);
  read_field(model, "model", "sigma", h.sigma);
  read_field(model, "model", "lambda", h.lambda);
  read_field(model, "model", "eta", h.eta);
  read_field(model, "model", "depth", h.depth);
  std::string mode = to_string(h.mode);
  read_field(model, "model", "level_prior_mode", mode);
  h.mode = level_prior_mode_from_string(mode);
  if (model.contains("alpha")) {
    const auto& a = model.at("alpha");
    if (!a.is_array()) throw ConfigError("model.alpha", "expected an array of numbers");
    h.alpha.clear();
    for (const auto& x : a) {
      if (!x.is_number()) throw ConfigError("model.alpha", "expected an array of numbers");
      h.alpha.push_back(x.get<double>());
    }
  }

  const json& sched = j.contains("schedule") ? j.at("schedule") : empty;
  reject_unknown(sched, "schedule", {"iterations", "burn_in", "lag", "final_samples", "chains", "seed", "subsample"});
  if (!sched.contains("seed")) throw ConfigError("schedule.seed", "required");
  Schedule& s = h.schedule;
  read_field(sched, "schedule", "iterations", s.iterations);
  read_field(sched, "schedule", "burn_in", s.burn_in);
  read_field(sched, "schedule", "lag", s.lag);
  read_field(sched, "schedule", "final_samples", s.final_samples);
  read_field(sched, "schedule", "chains", s.chains);
  read_field(sched, "schedule", "seed", s.seed);
  read_field(sched, "schedule", "subsample", s.subsample);

  const json& io = j.contains("io") ? j.at("io") : empty;
  reject_unknown(io, "io", {"input", "output"});
  std::string input;
  std::string output;
  read_field(io, "io", "input", input);
  read_field(io, "io", "output", output);
  if (input.empty()) throw ConfigError("io.input", "required");
  if (output.empty()) throw ConfigError("io.output", "required");
  cfg.input = input;
  cfg.output_dir = output;

  h.validate();
  return cfg;
}

json RunConfig::to_json() const {
  const Hyperparameters& h = hyper;
  json model{{"gamma", h.gamma},
             {"mu", h.mu},
             {"sigma", h.sigma},
             {"lambda", h.lambda},
             {"eta", h.eta},
             {"depth", h.depth},
             {"level_prior_mode", to_string(h.mode)}};
  if (!h.alpha.empty()) model["alpha"] = h.alpha;
  const Schedule& s = h.schedule;
  json sched{{"iterations", s.iterations}, {"burn_in", s.burn_in},       {"lag", s.lag},
             {"final_samples", s.final_samples}, {"chains", s.chains}, {"seed", s.seed},
             {"subsample", s.subsample}};
  return {{"model", model}, {"schedule", sched}, {"io", {{"input", input.string()}, {"output", output_dir.string()}}}};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string(), 0, e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  json j;
  try {
    j = read_json_file(path);
  } catch (const ParseError& e) {
    throw ConfigError("config", e.what());
  }
  return RunConfig::from_json(j);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace hbm
