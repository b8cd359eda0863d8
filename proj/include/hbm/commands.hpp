#pragma once

// Implementations behind the hbm subcommands. Each writes its files and
// reports a short summary on `log`.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "hbm/config.hpp"
#include "hbm/sampler.hpp"
#include "hbm/synth.hpp"

namespace hbm {

struct GenSbtOptions {
  SbtConfig sbt;
  std::uint64_t seed = 1;
  std::filesystem::path out;
};

// triples.tsv, truth.tsv, manifest.json
void cmd_gen_sbt(const GenSbtOptions& opts, std::ostream& log);

// Per chain k: trace_chain<k>.csv, sample_chain<k>_iter<t>.json,
// point_chain<k>.json, consensus_chain<k>_level<l>.csv. Plus point.json (best
// over all chains) and manifest.json.
void cmd_fit(const RunConfig& cfg, std::ostream& log);

struct EvalOptions {
  std::filesystem::path sample;
  std::filesystem::path truth;
  std::filesystem::path out;  // empty: print only
  bool truncate_at_level = false;
};

void cmd_eval(const EvalOptions& opts, std::ostream& log);

std::string render_tree(const PosteriorSample& sample, std::size_t max_members);
std::string relations_csv(const PosteriorSample& sample);

const char* version();

PosteriorSample load_sample(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace hbm
