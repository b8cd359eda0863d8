#include "hbm/synth.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "hbm/errors.hpp"

namespace hbm {

std::size_t sample_crp_table(std::span<const std::size_t> counts, double gamma, Rng& rng) {
  if (!(gamma > 0)) throw ArgumentError("sample_crp_table: gamma must be > 0");
  std::vector<double> w(counts.size() + 1);
  for (std::size_t k = 0; k < counts.size(); ++k) w[k] = static_cast<double>(counts[k]);
  w.back() = gamma;
  return sample_categorical(w, rng);
}

BranchSpec draw_ncrp_branch(const Hierarchy& h, double gamma, Rng& rng) {
  if (!(gamma > 0)) throw ArgumentError("sample_ncrp_path: gamma must be > 0");
  BranchSpec spec;
  const Community* cur = &h.root();
  std::vector<std::size_t> counts;
  while (cur->level < h.depth()) {
    counts.clear();
    for (auto ch : cur->children) counts.push_back(h.node(ch).pass_count);
    const auto k = sample_crp_table(counts, gamma, rng);
    if (k == counts.size()) break;
    spec.prefix.push_back(cur->children[k]);
    cur = &h.node(cur->children[k]);
  }
  return spec;
}

Path sample_ncrp_path(Hierarchy& h, double gamma, Rng& rng) {
  return h.add_path(draw_ncrp_branch(h, gamma, rng));
}

StickDraw stick_from_breaks(std::span<const double> breaks) {
  if (breaks.empty()) throw ArgumentError("stick_from_breaks: need at least one level");
  StickDraw d;
  d.breaks.assign(breaks.begin(), breaks.end());
  double remaining = 1;
  double total = 0;
  for (double v : breaks) {
    if (!(v > 0 && v <= 1)) throw ArgumentError("stick_from_breaks: break outside (0,1]");
    d.raw_weights.push_back(v * remaining);
    remaining *= 1 - v;
    total += d.raw_weights.back();
  }
  d.weights = d.raw_weights;
  for (auto& w : d.weights) w /= total;
  return d;
}

StickDraw sample_stick(double mu, double sigma, int depth, Rng& rng) {
  if (!(mu > 0 && mu < 1) || !(sigma > 0)) throw ArgumentError("sample_stick: need 0<mu<1, sigma>0");
  if (depth < 1) throw ArgumentError("sample_stick: depth must be >= 1");
  std::vector<double> v(depth);
  for (auto& x : v) {
    x = sample_beta(mu * sigma, (1 - mu) * sigma, rng);
    if (x <= 0) x = std::numeric_limits<double>::min();
  }
  return stick_from_breaks(v);
}

nlohmann::json LatentState::to_json(const KnowledgeGraph& kg) const {
  using nlohmann::json;
  const std::size_t n = paths.size();
  json ents = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    json e{{"label", kg.entities().label(static_cast<EntityId>(i))}, {"path", paths[i].communities}};
    if (i < level_memberships.size()) {
      e["stick"] = {{"breaks", level_memberships[i].breaks}, {"weights", level_memberships[i].weights}};
    }
    ents.push_back(e);
  }
  json snd = json::array();
  json rcv = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    snd.push_back(std::vector<int>(sender.begin() + i * n, sender.begin() + (i + 1) * n));
    rcv.push_back(std::vector<int>(receiver.begin() + i * n, receiver.begin() + (i + 1) * n));
  }
  json rel = json::array();
  for (const auto& [k, v] : community_relations) {
    rel.push_back({{"from", k.from}, {"to", k.to}, {"predicate", kg.predicates().label(k.predicate)}, {"value", v}});
  }
  return {{"tree", hierarchy.to_json()},
          {"entities", ents},
          {"indicators", {{"sender", snd}, {"receiver", rcv}}},
          {"community_relations", rel}};
}

ForwardResult forward_generate(const Hyperparameters& hyper, std::size_t num_entities,
                               std::size_t num_predicates, Rng& rng) {
  hyper.validate();
  if (num_entities < 1 || num_predicates < 1) {
    throw ArgumentError("forward_generate: need at least one entity and one predicate");
  }
  const int depth = hyper.depth;
  ForwardResult out{KnowledgeGraph{}, LatentState{Hierarchy(depth), {}, {}, {}, {}, {}}};
  auto& kg = out.graph;
  auto& lat = out.latent;
  for (std::size_t i = 0; i < num_entities; ++i) kg.add_entity("e" + std::to_string(i));
  for (std::size_t r = 0; r < num_predicates; ++r) kg.add_predicate("p" + std::to_string(r));

  for (std::size_t i = 0; i < num_entities; ++i) lat.paths.push_back(sample_ncrp_path(lat.hierarchy, hyper.gamma, rng));
  for (std::size_t i = 0; i < num_entities; ++i) {
    if (hyper.mode == LevelPriorMode::kStick) {
      lat.level_memberships.push_back(sample_stick(hyper.mu, hyper.sigma, depth, rng));
    } else {
      // finite Dirichlet variant: normalized gamma draws
      std::vector<double> lg(depth);
      double mx = -std::numeric_limits<double>::infinity();
      for (int l = 0; l < depth; ++l) {
        lg[l] = sample_log_gamma(hyper.alpha[l], rng);
        mx = std::max(mx, lg[l]);
      }
      StickDraw d;
      double total = 0;
      for (int l = 0; l < depth; ++l) {
        d.weights.push_back(std::exp(lg[l] - mx));
        total += d.weights.back();
      }
      for (auto& w : d.weights) w /= total;
      d.raw_weights = d.weights;
      lat.level_memberships.push_back(d);
    }
  }

  for (const auto& [id, c] : lat.hierarchy.nodes()) {
    for (auto p : c.children) {
      for (auto q : c.children) {
        for (std::size_t r = 0; r < num_predicates; ++r) {
          lat.community_relations[SiblingKey{p, q, static_cast<PredicateId>(r)}] =
              sample_beta(hyper.lambda, hyper.eta, rng);
        }
      }
    }
  }

  lat.sender.resize(num_entities * num_entities);
  lat.receiver.resize(num_entities * num_entities);
  for (std::size_t i = 0; i < num_entities; ++i) {
    for (std::size_t j = 0; j < num_entities; ++j) {
      const int zs = static_cast<int>(sample_categorical(lat.level_memberships[i].weights, rng)) + 1;
      const int zr = static_cast<int>(sample_categorical(lat.level_memberships[j].weights, rng)) + 1;
      lat.sender[i * num_entities + j] = zs;
      lat.receiver[i * num_entities + j] = zr;
      const auto [p, q] = coarsen_pair(lat.paths[i], zs, lat.paths[j], zr);
      for (std::size_t r = 0; r < num_predicates; ++r) {
        const double c = lat.community_relations.at(SiblingKey{p, q, static_cast<PredicateId>(r)});
        if (bernoulli(c, rng)) {
          kg.add_triple(Triple{static_cast<EntityId>(i), static_cast<EntityId>(j), static_cast<PredicateId>(r)});
        }
      }
    }
  }
  return out;
}

void SbtConfig::validate() const {
  if (depth < 1 || depth > 20) throw ArgumentError("generate_sbt: depth must be in 1..20");
  if (entities_per_leaf < 1) throw ArgumentError("generate_sbt: entities_per_leaf must be >= 1");
  if (num_predicates < 1) throw ArgumentError("generate_sbt: need at least one predicate");
  if (level_probs.size() != static_cast<std::size_t>(depth)) {
    throw ArgumentError("generate_sbt: level_probs needs " + std::to_string(depth) + " entries, got " +
                        std::to_string(level_probs.size()));
  }
  for (double p : level_probs) {
    if (!(p >= 0 && p <= 1)) throw ArgumentError("generate_sbt: level probabilities must lie in [0,1]");
  }
}

namespace {

// Ordered entity pairs whose leaves have their lowest common ancestor at level
// 0..depth-1, plus same-leaf pairs at index depth.
std::vector<double> sbt_pair_counts(const SbtConfig& cfg) {
  const double leaves = std::ldexp(1.0, cfg.depth);
  const double per = static_cast<double>(cfg.entities_per_leaf);
  std::vector<double> counts(cfg.depth + 1);
  for (int l = 0; l < cfg.depth; ++l) {
    // each leaf has 2^(depth-l-1) partners whose LCA is at level l
    counts[l] = leaves * std::ldexp(1.0, cfg.depth - l - 1) * per * per;
  }
  counts[cfg.depth] = leaves * per * per;
  return counts;
}

}  // namespace

double sbt_expected_triples(const SbtConfig& cfg) {
  cfg.validate();
  const auto counts = sbt_pair_counts(cfg);
  double e = counts[cfg.depth];
  for (int l = 0; l < cfg.depth; ++l) e += counts[l] * cfg.level_probs[l];
  return e * static_cast<double>(cfg.num_predicates);
}

double sbt_triple_variance(const SbtConfig& cfg) {
  cfg.validate();
  const auto counts = sbt_pair_counts(cfg);
  double v = 0;
  for (int l = 0; l < cfg.depth; ++l) v += counts[l] * cfg.level_probs[l] * (1 - cfg.level_probs[l]);
  return v * static_cast<double>(cfg.num_predicates);
}

SbtResult generate_sbt(const SbtConfig& cfg, Rng& rng) {
  cfg.validate();
  const std::size_t leaves = std::size_t{1} << cfg.depth;
  const std::size_t n = leaves * cfg.entities_per_leaf;
  SbtResult out;
  auto& kg = out.graph;
  for (std::size_t i = 0; i < n; ++i) kg.add_entity("e" + std::to_string(i));
  for (std::size_t r = 0; r < cfg.num_predicates; ++r) kg.add_predicate("p" + std::to_string(r));

  std::vector<std::size_t> leaf(n);
  for (std::size_t i = 0; i < n; ++i) leaf[i] = i / cfg.entities_per_leaf;

  for (std::size_t r = 0; r < cfg.num_predicates; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t x = leaf[i] ^ leaf[j];
        bool edge = true;
        if (x != 0) {
          const int lca = cfg.depth - static_cast<int>(std::bit_width(x));
          const double p = cfg.level_probs[lca];
          edge = uniform01(rng) < p;
        }
        if (edge) {
          kg.add_triple(Triple{static_cast<EntityId>(i), static_cast<EntityId>(j), static_cast<PredicateId>(r)});
        }
      }
    }
  }

  auto& truth = out.truth;
  truth.depth = cfg.depth;
  for (std::size_t i = 0; i < n; ++i) {
    truth.entities.push_back(kg.entities().label(static_cast<EntityId>(i)));
    std::vector<std::string> row;
    for (int l = 1; l <= cfg.depth; ++l) {
      row.push_back("c" + std::to_string(l) + "_" + std::to_string(leaf[i] >> (cfg.depth - l)));
    }
    truth.labels.push_back(std::move(row));
  }
  return out;
}

}  // namespace hbm
