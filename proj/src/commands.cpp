#include "hbm/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "hbm/errors.hpp"
#include "hbm/eval.hpp"
#include "hbm/ground_truth.hpp"
#include "hbm/kgraph.hpp"

#ifndef HBM_VERSION
#define HBM_VERSION "unknown"
#endif

namespace hbm {

using nlohmann::json;

const char* version() { return HBM_VERSION; }

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failure on " + path.string());
}

namespace {

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

std::string consensus_csv(const std::vector<std::string>& labels, const std::vector<double>& m) {
  const std::size_t n = labels.size();
  std::string out = "entity";
  for (const auto& l : labels) out += "," + l;
  out += "\n";
  char buf[32];
  for (std::size_t i = 0; i < n; ++i) {
    out += labels[i];
    for (std::size_t j = 0; j < n; ++j) {
      std::snprintf(buf, sizeof buf, ",%.6g", m[i * n + j]);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

std::string chain_name(const std::string& stem, int chain, const std::string& ext) {
  return stem + "_chain" + std::to_string(chain) + ext;
}

}  // namespace

void cmd_gen_sbt(const GenSbtOptions& opts, std::ostream& log) {
  opts.sbt.validate();
  ensure_dir(opts.out);
  Rng rng(opts.seed);
  const auto res = generate_sbt(opts.sbt, rng);
  save_triples(res.graph, opts.out / "triples.tsv");
  save_ground_truth(res.truth, opts.out / "truth.tsv");
  json manifest{{"generator", "sbt"},
                {"version", HBM_VERSION},
                {"depth", opts.sbt.depth},
                {"entities_per_leaf", opts.sbt.entities_per_leaf},
                {"level_probs", opts.sbt.level_probs},
                {"predicates", opts.sbt.num_predicates},
                {"seed", opts.seed},
                {"entities", res.graph.num_entities()},
                {"triples", res.graph.num_triples()},
                {"expected_triples", sbt_expected_triples(opts.sbt)},
                {"triples_sd", std::sqrt(sbt_triple_variance(opts.sbt))}};
  write_text_file(opts.out / "manifest.json", manifest.dump(2) + "\n");
  log << "wrote " << res.graph.num_entities() << " entities, " << res.graph.num_triples() << " triples to "
      << opts.out.string() << "\n";
}

void cmd_fit(const RunConfig& cfg, std::ostream& log) {
  cfg.hyper.validate();
  const KnowledgeGraph kg = load_triples(cfg.input);
  if (kg.num_entities() == 0) throw ArgumentError("input " + cfg.input.string() + " contains no triples");
  ensure_dir(cfg.output_dir);
  log << "fitting " << kg.num_entities() << " entities, " << kg.num_predicates() << " predicates, "
      << kg.num_triples() << " triples; " << cfg.hyper.schedule.chains << " chain(s)\n";

  const auto results = run_chains(kg, cfg.hyper);
  const json config_json = cfg.to_json();
  const std::string config_text = config_json.dump();
  json chains = json::array();
  std::vector<PosteriorSample> all;
  for (std::size_t c = 0; c < results.size(); ++c) {
    const int ci = static_cast<int>(c);
    const auto& res = results[c];
    const std::string trace_file = chain_name("trace", ci, ".csv");
    write_text_file(cfg.output_dir / trace_file, res.trace.to_csv());
    json sample_files = json::array();
    for (const auto& smp : res.samples) {
      char name[64];
      std::snprintf(name, sizeof name, "sample_chain%d_iter%05d.json", ci, smp.iteration);
      write_text_file(cfg.output_dir / name, smp.to_json().dump(1) + "\n");
      sample_files.push_back(name);
      all.push_back(smp);
    }
    const auto agg = aggregate(res.samples);
    const std::string point_file = chain_name("point", ci, ".json");
    write_text_file(cfg.output_dir / point_file, agg.point.to_json().dump(1) + "\n");
    json consensus_files = json::array();
    for (std::size_t l = 0; l < agg.consensus.size(); ++l) {
      const std::string f = "consensus_chain" + std::to_string(ci) + "_level" + std::to_string(l + 1) + ".csv";
      write_text_file(cfg.output_dir / f, consensus_csv(agg.point.entity_labels, agg.consensus[l]));
      consensus_files.push_back(f);
    }
    chains.push_back({{"chain", ci},
                      {"seed", cfg.hyper.schedule.seed + c},
                      {"trace", trace_file},
                      {"samples", sample_files},
                      {"point", point_file},
                      {"point_log_likelihood", agg.point.log_likelihood},
                      {"consensus", consensus_files}});
    log << "chain " << ci << ": final log-likelihood "
        << (res.trace.entries.empty() ? res.trace.initial : res.trace.entries.back().log_likelihood)
        << ", point estimate at iteration " << agg.point.iteration << "\n";
  }
  const auto overall = aggregate(all);
  write_text_file(cfg.output_dir / "point.json", overall.point.to_json().dump(1) + "\n");

  json manifest{{"version", HBM_VERSION},
                {"config", config_json},
                {"config_hash", hex64(fnv1a64(config_text))},
                {"input", {{"entities", kg.num_entities()}, {"predicates", kg.num_predicates()}, {"triples", kg.num_triples()}}},
                {"chains", chains},
                {"point", "point.json"}};
  write_text_file(cfg.output_dir / "manifest.json", manifest.dump(2) + "\n");
  log << "wrote results to " << cfg.output_dir.string() << "\n";
}

PosteriorSample load_sample(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  try {
    return PosteriorSample::from_json(j);
  } catch (const ParseError& e) {
    throw ParseError(path.string(), 0, e.what());
  }
}

void cmd_eval(const EvalOptions& opts, std::ostream& log) {
  const auto sample = load_sample(opts.sample);
  const auto truth = load_ground_truth(opts.truth);
  const auto ev = evaluate_sample(sample, truth, opts.truncate_at_level);
  if (!opts.out.empty()) {
    ensure_dir(opts.out);
    write_text_file(opts.out / "metrics.json", ev.to_json().dump(2) + "\n");
    write_text_file(opts.out / "metrics.txt", ev.to_table());
  }
  log << ev.to_table();
}

std::string render_tree(const PosteriorSample& sample, std::size_t max_members) {
  std::map<CommunityId, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < sample.num_entities(); ++i) {
    const int l = i < sample.levels.size() ? sample.levels[i] : sample.depth();
    members[sample.paths[i].at_level(l)].push_back(i);
  }
  std::ostringstream out;
  auto visit = [&](auto&& self, CommunityId id, int indent) -> void {
    const Community& c = sample.tree.node(id);
    out << std::string(static_cast<std::size_t>(indent) * 2, ' ') << (id == kRootId ? "root" : std::to_string(id))
        << " (" << c.pass_count << ")";
    const auto it = members.find(id);
    if (max_members > 0 && it != members.end()) {
      out << ":";
      const auto& m = it->second;
      for (std::size_t k = 0; k < m.size() && k < max_members; ++k) {
        out << (k == 0 ? " " : ", ") << sample.entity_labels[m[k]];
      }
      if (m.size() > max_members) out << " +" << (m.size() - max_members) << " more";
    }
    out << "\n";
    for (auto ch : c.children) self(self, ch, indent + 1);
  };
  visit(visit, kRootId, 0);
  return out.str();
}

std::string relations_csv(const PosteriorSample& sample) {
  std::string out = "from_community,to_community,predicate,posterior_mean\n";
  char buf[64];
  for (const auto& est : recover_community_relations(sample.relation_counts, sample.lambda, sample.eta)) {
    if (est.counts.empty()) continue;
    std::snprintf(buf, sizeof buf, ",%.10g\n", est.mean);
    out += std::to_string(est.key.from) + "," + std::to_string(est.key.to) + "," +
           sample.predicate_labels.at(est.key.predicate) + buf;
  }
  return out;
}

}  // namespace hbm
