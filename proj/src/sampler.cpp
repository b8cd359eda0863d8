#include "hbm/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

#include "hbm/errors.hpp"
#include "hbm/synth.hpp"

namespace hbm {

void SamplerState::pair_edges(std::size_t i, std::size_t j, std::vector<std::uint8_t>& out) const {
  out.assign(num_predicates(), 0);
  const std::size_t k = pair_index(i, j);
  for (auto p = edge_offsets[k]; p < edge_offsets[k + 1]; ++p) out[edge_predicates[p]] = 1;
}

namespace {

void build_edge_index(SamplerState& s) {
  const KnowledgeGraph& kg = *s.kg;
  const std::size_t n = kg.num_entities();
  std::vector<Triple> sorted = kg.triples();
  std::sort(sorted.begin(), sorted.end(), [](const Triple& a, const Triple& b) {
    return std::tie(a.subject, a.object, a.predicate) < std::tie(b.subject, b.object, b.predicate);
  });
  s.edge_offsets.assign(n * n + 1, 0);
  s.edge_predicates.clear();
  std::size_t t = 0;
  for (std::size_t k = 0; k < n * n; ++k) {
    s.edge_offsets[k] = static_cast<std::uint32_t>(s.edge_predicates.size());
    while (t < sorted.size() && std::size_t{sorted[t].subject} * n + sorted[t].object == k) {
      s.edge_predicates.push_back(sorted[t].predicate);
      ++t;
    }
  }
  s.edge_offsets[n * n] = static_cast<std::uint32_t>(s.edge_predicates.size());
}

void rebuild_counts(SamplerState& s) {
  s.relation_counts = recount_relations(s);
  s.level_counts = recount_levels(s);
  s.stick_log_mass = 0;
  if (s.hyper.mode == LevelPriorMode::kStick) {
    s.stick_log_mass = stick_truncation_log_mass(s.hyper.mu, s.hyper.sigma, s.hyper.depth,
                                                 static_cast<std::int64_t>(2 * s.num_entities()));
  }
}

SamplerState empty_state(const KnowledgeGraph& kg, const Hyperparameters& hyper, std::uint64_t seed) {
  hyper.validate();
  if (kg.num_entities() == 0) throw ArgumentError("sampler: graph has no entities");
  SamplerState s;
  s.kg = &kg;
  s.hyper = hyper;
  s.h = Hierarchy(hyper.depth);
  s.rng = Rng(seed);
  s.relation_counts = RelationCounts(kg.num_predicates());
  s.path_draws.assign(kg.num_entities(), 0);
  s.level_draws.assign(kg.num_entities(), 0);
  build_edge_index(s);
  return s;
}

std::vector<double> level_prior(const SamplerState& s, std::span<const std::int64_t> hist) {
  if (s.hyper.mode == LevelPriorMode::kStick) {
    return stick_level_prior(hist, s.hyper.mu, s.hyper.sigma, s.hyper.depth);
  }
  return dirichlet_level_prior(hist, s.hyper.alpha);
}

}  // namespace

SamplerState init_state(const KnowledgeGraph& kg, const Hyperparameters& hyper, std::uint64_t seed) {
  SamplerState s = empty_state(kg, hyper, seed);
  const std::size_t n = kg.num_entities();
  for (std::size_t i = 0; i < n; ++i) s.paths.push_back(sample_ncrp_path(s.h, hyper.gamma, s.rng));
  const std::vector<std::int64_t> zeros(hyper.depth, 0);
  const auto prior = level_prior(s, zeros);
  s.sender.resize(n * n);
  s.receiver.resize(n * n);
  for (std::size_t k = 0; k < n * n; ++k) {
    s.sender[k] = static_cast<int>(sample_categorical(prior, s.rng)) + 1;
    s.receiver[k] = static_cast<int>(sample_categorical(prior, s.rng)) + 1;
  }
  rebuild_counts(s);
  return s;
}

SamplerState from_assignment(const KnowledgeGraph& kg, const Hyperparameters& hyper,
                             const std::vector<std::vector<int>>& path_labels,
                             const std::vector<int>& sender, const std::vector<int>& receiver,
                             std::uint64_t seed) {
  SamplerState s = empty_state(kg, hyper, seed);
  const std::size_t n = kg.num_entities();
  if (path_labels.size() != n || sender.size() != n * n || receiver.size() != n * n) {
    throw ArgumentError("from_assignment: dimension mismatch");
  }
  std::map<std::vector<int>, CommunityId> made;
  for (const auto& labels : path_labels) {
    if (labels.size() != static_cast<std::size_t>(hyper.depth)) {
      throw ArgumentError("from_assignment: path label length differs from depth");
    }
    BranchSpec spec;
    std::vector<int> prefix;
    for (int lab : labels) {
      prefix.push_back(lab);
      auto it = made.find(prefix);
      if (it == made.end()) break;
      spec.prefix.push_back(it->second);
    }
    Path p = s.h.add_path(spec);
    prefix.clear();
    for (std::size_t l = 0; l < labels.size(); ++l) {
      prefix.push_back(labels[l]);
      made.emplace(prefix, p.communities[l]);
    }
    s.paths.push_back(std::move(p));
  }
  for (std::size_t k = 0; k < n * n; ++k) {
    if (sender[k] < 1 || sender[k] > hyper.depth || receiver[k] < 1 || receiver[k] > hyper.depth) {
      throw ArgumentError("from_assignment: level indicator out of range");
    }
  }
  s.sender = sender;
  s.receiver = receiver;
  rebuild_counts(s);
  return s;
}

RelationCounts recount_relations(const SamplerState& s) {
  const std::size_t n = s.num_entities();
  RelationCounts rc(s.kg->num_predicates());
  std::vector<std::uint8_t> g;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t k = s.pair_index(i, j);
      s.pair_edges(i, j, g);
      const auto [p, q] = coarsen_pair(s.paths[i], s.sender[k], s.paths[j], s.receiver[k]);
      rc.add_pair(p, q, g, 1);
    }
  }
  return rc;
}

LevelCounts recount_levels(const SamplerState& s) {
  const std::size_t n = s.num_entities();
  LevelCounts lc(n, s.hyper.depth);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t k = s.pair_index(i, j);
      lc.add(i, s.sender[k], Direction::kSender);
      lc.add(j, s.receiver[k], Direction::kReceiver);
    }
  }
  return lc;
}

// --- level indicators

std::vector<double> level_conditional(const SamplerState& s, std::size_t i, std::size_t j, Direction dir) {
  const std::size_t n = s.num_entities();
  if (i >= n || j >= n) throw ArgumentError("level_conditional: entity out of range");
  const int depth = s.depth();
  const std::size_t k = s.pair_index(i, j);
  const int cur_s = s.sender[k];
  const int cur_r = s.receiver[k];
  const bool sending = dir == Direction::kSender;
  const std::size_t owner = sending ? i : j;
  const int cur = sending ? cur_s : cur_r;

  const auto row = s.level_counts.row(owner);
  std::vector<std::int64_t> hist(row.begin(), row.end());
  --hist[cur - 1];
  const auto prior = level_prior(s, hist);

  std::vector<std::uint8_t> g;
  s.pair_edges(i, j, g);
  const auto home = coarsen_pair(s.paths[i], cur_s, s.paths[j], cur_r);
  const double lambda = s.hyper.lambda;
  const double eta = s.hyper.eta;

  std::vector<double> logw(depth);
  for (int l = 1; l <= depth; ++l) {
    const auto key = sending ? coarsen_pair(s.paths[i], l, s.paths[j], cur_r)
                             : coarsen_pair(s.paths[i], cur_s, s.paths[j], l);
    const auto* tallies = s.relation_counts.find(key.first, key.second);
    const bool is_home = key == home;
    double ll = 0;
    for (std::size_t r = 0; r < g.size(); ++r) {
      double ones = tallies ? static_cast<double>((*tallies)[r].ones) : 0.0;
      double zeros = tallies ? static_cast<double>((*tallies)[r].zeros) : 0.0;
      if (is_home) (g[r] ? ones : zeros) -= 1;
      ll += std::log((g[r] ? ones + lambda : zeros + eta) / (ones + zeros + lambda + eta));
    }
    logw[l - 1] = std::log(prior[l - 1]) + ll;
  }
  const double norm = log_sum_exp(logw);
  std::vector<double> p(depth);
  for (int l = 0; l < depth; ++l) p[l] = std::exp(logw[l] - norm);
  return p;
}

void sample_level_indicator(SamplerState& s, std::size_t i, std::size_t j, Direction dir) {
  const auto cond = level_conditional(s, i, j, dir);
  const int next = static_cast<int>(sample_categorical(cond, s.rng)) + 1;
  const std::size_t k = s.pair_index(i, j);
  const bool sending = dir == Direction::kSender;
  int& slot = sending ? s.sender[k] : s.receiver[k];
  if (next == slot) return;
  const auto old_key = coarsen_pair(s.paths[i], s.sender[k], s.paths[j], s.receiver[k]);
  const std::size_t owner = sending ? i : j;
  s.level_counts.add(owner, slot, dir, -1);
  s.level_counts.add(owner, next, dir, 1);
  slot = next;
  const auto new_key = coarsen_pair(s.paths[i], s.sender[k], s.paths[j], s.receiver[k]);
  if (new_key != old_key) {
    std::vector<std::uint8_t> g;
    s.pair_edges(i, j, g);
    s.relation_counts.add_pair(old_key.first, old_key.second, g, -1);
    s.relation_counts.add_pair(new_key.first, new_key.second, g, 1);
  }
}

// --- paths

namespace {

// Edge vectors for every pair touching entity i: out_edges[j] = g_{ij.},
// in_edges[j] = g_{ji.}.
struct EntityPairs {
  std::vector<std::vector<std::uint8_t>> out_edges;
  std::vector<std::vector<std::uint8_t>> in_edges;
};

EntityPairs collect_pairs(const SamplerState& s, std::size_t i) {
  const std::size_t n = s.num_entities();
  EntityPairs ep;
  ep.out_edges.resize(n);
  ep.in_edges.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    s.pair_edges(i, j, ep.out_edges[j]);
    s.pair_edges(j, i, ep.in_edges[j]);
  }
  return ep;
}

// Routes every pair touching i as if i sat on `pi`, adding delta to rc.
void route_entity(const SamplerState& s, std::size_t i, const Path& pi, const EntityPairs& ep,
                  RelationCounts& rc, std::int64_t delta) {
  const std::size_t n = s.num_entities();
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t out = s.pair_index(i, j);
    if (j == i) {
      const auto [p, q] = coarsen_pair(pi, s.sender[out], pi, s.receiver[out]);
      rc.add_pair(p, q, ep.out_edges[j], delta);
      continue;
    }
    {
      const auto [p, q] = coarsen_pair(pi, s.sender[out], s.paths[j], s.receiver[out]);
      rc.add_pair(p, q, ep.out_edges[j], delta);
    }
    const std::size_t in = s.pair_index(j, i);
    const auto [p, q] = coarsen_pair(s.paths[j], s.sender[in], pi, s.receiver[in]);
    rc.add_pair(p, q, ep.in_edges[j], delta);
  }
}

// Assumes i's pairs are already subtracted from s.relation_counts.
std::vector<PathCandidate> scored_candidates(const SamplerState& s, std::size_t i, const EntityPairs& ep) {
  auto cands = ncrp_path_prior(s.h, s.hyper.gamma, &s.paths[i]);
  RelationCounts contrib(s.num_predicates());
  std::vector<double> logw(cands.size());
  Path cand_path;
  for (std::size_t c = 0; c < cands.size(); ++c) {
    cand_path.communities = cands[c].branch.prefix;
    CommunityId fresh = s.h.next_id();
    while (cand_path.depth() < s.depth()) cand_path.communities.push_back(fresh++);
    contrib.clear();
    route_entity(s, i, cand_path, ep, contrib, 1);
    logw[c] = cands[c].log_prob +
              path_log_likelihood_delta(s.relation_counts, contrib, s.hyper.lambda, s.hyper.eta);
  }
  const double norm = log_sum_exp(logw);
  for (std::size_t c = 0; c < cands.size(); ++c) cands[c].log_prob = logw[c] - norm;
  return cands;
}

}  // namespace

std::vector<PathCandidate> path_posterior(SamplerState& s, std::size_t i) {
  if (i >= s.num_entities()) throw ArgumentError("path_posterior: entity out of range");
  const auto ep = collect_pairs(s, i);
  route_entity(s, i, s.paths[i], ep, s.relation_counts, -1);
  auto cands = scored_candidates(s, i, ep);
  route_entity(s, i, s.paths[i], ep, s.relation_counts, 1);
  return cands;
}

void sample_path(SamplerState& s, std::size_t i) {
  if (i >= s.num_entities()) throw ArgumentError("sample_path: entity out of range");
  const auto ep = collect_pairs(s, i);
  route_entity(s, i, s.paths[i], ep, s.relation_counts, -1);
  const auto cands = scored_candidates(s, i, ep);
  std::vector<double> logw(cands.size());
  for (std::size_t c = 0; c < cands.size(); ++c) logw[c] = cands[c].log_prob;
  const auto pick = sample_log_categorical(logw, s.rng);
  s.h.remove_path(s.paths[i]);
  s.paths[i] = s.h.add_path(cands[pick].branch);
  route_entity(s, i, s.paths[i], ep, s.relation_counts, 1);
}

void gibbs_iteration(SamplerState& s, std::span<const double> sampling_prob) {
  const std::size_t n = s.num_entities();
  if (sampling_prob.size() != n) throw ArgumentError("gibbs_iteration: sampling_prob size mismatch");
  auto gate = [&](std::size_t e) { return sampling_prob[e] >= 1.0 || bernoulli(sampling_prob[e], s.rng); };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (gate(i)) {
        sample_level_indicator(s, i, j, Direction::kSender);
        ++s.level_draws[i];
      }
      if (gate(j)) {
        sample_level_indicator(s, i, j, Direction::kReceiver);
        ++s.level_draws[j];
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (gate(i)) {
      sample_path(s, i);
      ++s.path_draws[i];
    }
  }
  ++s.iter;
}

void gibbs_iteration(SamplerState& s, const DegreeTable& degrees) {
  gibbs_iteration(s, std::span<const double>(degrees.sampling_prob));
}

// --- likelihood

LikelihoodTerms likelihood_terms(const SamplerState& s) {
  LikelihoodTerms t;
  const double lambda = s.hyper.lambda;
  const double eta = s.hyper.eta;
  const double lb0 = log_beta_fn(lambda, eta);
  for (const auto& [key, tallies] : s.relation_counts.pairs()) {
    for (const auto& tl : tallies) {
      if (tl.empty()) continue;
      t.relations += log_beta_fn(static_cast<double>(tl.ones) + lambda, static_cast<double>(tl.zeros) + eta) - lb0;
    }
  }
  t.paths = ncrp_log_prob(s.h, s.hyper.gamma);
  for (std::size_t e = 0; e < s.num_entities(); ++e) {
    const auto row = s.level_counts.row(e);
    t.levels += s.hyper.mode == LevelPriorMode::kStick
                    ? stick_histogram_log_prob(row, s.hyper.mu, s.hyper.sigma, s.stick_log_mass)
                    : dirichlet_histogram_log_prob(row, s.hyper.alpha);
  }
  return t;
}

double complete_log_likelihood(const SamplerState& s) { return likelihood_terms(s).total(); }

// --- audit

AuditReport audit_counts(const SamplerState& s) {
  AuditReport rep;
  auto fail = [&](std::string msg) {
    if (rep.ok) {
      rep.ok = false;
      rep.first_discrepancy = std::move(msg);
    }
  };
  try {
    s.h.validate();
  } catch (const StateError& e) {
    fail(e.what());
    return rep;
  }

  std::map<CommunityId, std::size_t> through;
  for (const auto& p : s.paths) {
    CommunityId parent = kRootId;
    for (auto id : p.communities) {
      if (!s.h.contains(id) || s.h.node(id).parent != parent) {
        fail("path through missing community " + std::to_string(id));
        return rep;
      }
      ++through[id];
      parent = id;
    }
  }
  for (const auto& [id, c] : s.h.nodes()) {
    if (id == kRootId) continue;
    if (through[id] != c.pass_count) {
      fail("community " + std::to_string(id) + " pass_count " + std::to_string(c.pass_count) + " but " +
           std::to_string(through[id]) + " paths pass through it");
      return rep;
    }
  }

  const RelationCounts fresh = recount_relations(s);
  auto describe = [&](std::uint64_t key, std::size_t r, const Tally& inc, const Tally& ref) {
    return "relation key (" + std::to_string(RelationCounts::unpack_from(key)) + ", " +
           std::to_string(RelationCounts::unpack_to(key)) + ", " + std::to_string(r) + "): incremental " +
           std::to_string(inc.ones) + "/" + std::to_string(inc.zeros) + ", recount " + std::to_string(ref.ones) +
           "/" + std::to_string(ref.zeros);
  };
  std::vector<std::uint64_t> keys;
  for (const auto& [k, v] : fresh.pairs()) keys.push_back(k);
  for (const auto& [k, v] : s.relation_counts.pairs()) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  const std::vector<Tally> none(s.num_predicates());
  for (auto k : keys) {
    const auto* a = s.relation_counts.find(RelationCounts::unpack_from(k), RelationCounts::unpack_to(k));
    const auto* b = fresh.find(RelationCounts::unpack_from(k), RelationCounts::unpack_to(k));
    const auto& va = a ? *a : none;
    const auto& vb = b ? *b : none;
    for (std::size_t r = 0; r < none.size(); ++r) {
      if (!(va[r] == vb[r])) {
        fail(describe(k, r, va[r], vb[r]));
        return rep;
      }
    }
  }

  const LevelCounts lv = recount_levels(s);
  for (std::size_t e = 0; e < s.num_entities(); ++e) {
    for (int l = 1; l <= s.depth(); ++l) {
      if (lv.at(e, l) != s.level_counts.at(e, l)) {
        fail("level histogram entity " + std::to_string(e) + " level " + std::to_string(l) + ": incremental " +
             std::to_string(s.level_counts.at(e, l)) + ", recount " + std::to_string(lv.at(e, l)));
        return rep;
      }
    }
  }
  for (auto dir : {Direction::kSender, Direction::kReceiver}) {
    const auto a = s.level_counts.totals(dir);
    const auto b = lv.totals(dir);
    if (!std::equal(a.begin(), a.end(), b.begin(), b.end())) {
      fail(std::string(dir == Direction::kSender ? "sender" : "receiver") + " level totals differ");
      return rep;
    }
  }
  return rep;
}

int entity_level_mode(const SamplerState& s, std::size_t i) {
  if (i >= s.num_entities()) throw ArgumentError("entity_level_mode: entity out of range");
  const auto row = s.level_counts.row(i);
  int best = 1;
  for (int l = 2; l <= s.depth(); ++l) {
    if (row[l - 1] > row[best - 1]) best = l;
  }
  return best;
}

std::vector<RelationEstimate> recover_community_relations(const RelationCounts& counts, double lambda, double eta) {
  std::vector<RelationEstimate> out;
  for (const auto& [key, tallies] : counts.pairs()) {
    for (std::size_t r = 0; r < tallies.size(); ++r) {
      const Tally& t = tallies[r];
      RelationEstimate e;
      e.key = SiblingKey{RelationCounts::unpack_from(key), RelationCounts::unpack_to(key), static_cast<PredicateId>(r)};
      e.counts = t;
      e.mean = beta_posterior(static_cast<double>(t.ones), static_cast<double>(t.zeros), lambda, eta).mean;
      out.push_back(e);
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
  return out;
}

std::vector<RelationEstimate> recover_community_relations(const SamplerState& s, double lambda, double eta) {
  return recover_community_relations(s.relation_counts, lambda, eta);
}

// --- samples

PosteriorSample snapshot(const SamplerState& s) {
  PosteriorSample ps;
  ps.iteration = s.iter;
  ps.log_likelihood = complete_log_likelihood(s);
  ps.tree = s.h;
  ps.entity_labels = s.kg->entities().labels();
  ps.predicate_labels = s.kg->predicates().labels();
  ps.paths = s.paths;
  for (std::size_t i = 0; i < s.num_entities(); ++i) ps.levels.push_back(entity_level_mode(s, i));
  ps.relation_counts = s.relation_counts;
  ps.lambda = s.hyper.lambda;
  ps.eta = s.hyper.eta;
  return ps;
}

nlohmann::json PosteriorSample::to_json() const {
  using nlohmann::json;
  json ents = json::array();
  for (std::size_t i = 0; i < paths.size(); ++i) {
    ents.push_back({{"label", entity_labels[i]}, {"path", paths[i].communities}, {"level", levels[i]}});
  }
  json counts = json::array();
  for (const auto& est : recover_community_relations(relation_counts, lambda, eta)) {
    if (est.counts.empty()) continue;
    counts.push_back({{"from", est.key.from},
                      {"to", est.key.to},
                      {"predicate", predicate_labels.at(est.key.predicate)},
                      {"ones", est.counts.ones},
                      {"zeros", est.counts.zeros}});
  }
  return {{"iteration", iteration},
          {"log_likelihood", log_likelihood},
          {"tree", tree.to_json()},
          {"entities", ents},
          {"predicates", predicate_labels},
          {"relations", {{"lambda", lambda}, {"eta", eta}, {"counts", counts}}}};
}

PosteriorSample PosteriorSample::from_json(const nlohmann::json& j) {
  try {
    PosteriorSample ps;
    ps.iteration = j.at("iteration").get<int>();
    ps.log_likelihood = j.at("log_likelihood").get<double>();
    ps.tree = Hierarchy::from_json(j.at("tree"));
    for (const auto& e : j.at("entities")) {
      ps.entity_labels.push_back(e.at("label").get<std::string>());
      Path p;
      p.communities = e.at("path").get<std::vector<CommunityId>>();
      if (p.depth() != ps.tree.depth()) throw ParseError("sample", 0, "path length differs from tree depth");
      ps.paths.push_back(std::move(p));
      ps.levels.push_back(e.value("level", 1));
    }
    ps.predicate_labels = j.value("predicates", std::vector<std::string>{});
    ps.relation_counts = RelationCounts(ps.predicate_labels.size());
    if (j.contains("relations")) {
      const auto& rel = j.at("relations");
      ps.lambda = rel.value("lambda", 1.0);
      ps.eta = rel.value("eta", 1.0);
      std::map<std::string, PredicateId> pred_index;
      for (std::size_t r = 0; r < ps.predicate_labels.size(); ++r) {
        pred_index[ps.predicate_labels[r]] = static_cast<PredicateId>(r);
      }
      for (const auto& c : rel.value("counts", nlohmann::json::array())) {
        const auto it = pred_index.find(c.at("predicate").get<std::string>());
        if (it == pred_index.end()) throw ParseError("sample", 0, "relation names an unknown predicate");
        auto& slot = ps.relation_counts.raw_slot(c.at("from").get<CommunityId>(), c.at("to").get<CommunityId>());
        slot[it->second] = Tally{c.at("ones").get<std::int64_t>(), c.at("zeros").get<std::int64_t>()};
      }
    }
    return ps;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("sample", 0, e.what());
  }
}

std::string Trace::to_csv() const {
  std::string out = "iter,log_likelihood\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "0,%.17g\n", initial);
  out += buf;
  for (const auto& e : entries) {
    std::snprintf(buf, sizeof buf, "%d,%.17g\n", e.iteration, e.log_likelihood);
    out += buf;
  }
  return out;
}

ChainResult run(const KnowledgeGraph& kg, const Hyperparameters& hyper, std::uint64_t seed) {
  hyper.validate();
  SamplerState s = init_state(kg, hyper, seed);
  std::vector<double> probs(kg.num_entities(), 1.0);
  if (hyper.schedule.subsample) probs = degree_table(kg).sampling_prob;

  const Schedule& sch = hyper.schedule;
  ChainResult res;
  res.trace.initial = complete_log_likelihood(s);
  for (int t = 1; t <= sch.iterations; ++t) {
    gibbs_iteration(s, probs);
    const double ll = complete_log_likelihood(s);
    res.trace.entries.push_back({t, ll});
    if (t > sch.burn_in && (t - sch.burn_in) % sch.lag == 0 &&
        static_cast<int>(res.samples.size()) < sch.final_samples) {
      res.samples.push_back(snapshot(s));
    }
  }
  return res;
}

std::vector<ChainResult> run_chains(const KnowledgeGraph& kg, const Hyperparameters& hyper) {
  hyper.validate();
  const int chains = hyper.schedule.chains;
  std::vector<ChainResult> results(chains);
  std::vector<std::exception_ptr> errors(chains);
  std::vector<std::thread> workers;
  for (int c = 0; c < chains; ++c) {
    workers.emplace_back([&, c] {
      try {
        results[c] = run(kg, hyper, hyper.schedule.seed + static_cast<std::uint64_t>(c));
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

Aggregate aggregate(const std::vector<PosteriorSample>& samples) {
  if (samples.empty()) throw ArgumentError("aggregate: no samples");
  const std::size_t n = samples.front().num_entities();
  const int depth = samples.front().depth();
  std::size_t best = 0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (samples[k].num_entities() != n || samples[k].depth() != depth) {
      throw ArgumentError("aggregate: samples disagree on entities or depth");
    }
    if (samples[k].log_likelihood > samples[best].log_likelihood) best = k;
  }
  Aggregate agg;
  agg.point = samples[best];
  std::vector<std::vector<std::size_t>> shared(depth, std::vector<std::size_t>(n * n, 0));
  for (const auto& smp : samples) {
    for (int l = 1; l <= depth; ++l) {
      auto& m = shared[l - 1];
      for (std::size_t i = 0; i < n; ++i) {
        const auto ci = smp.paths[i].at_level(l);
        for (std::size_t j = 0; j < n; ++j) {
          if (smp.paths[j].at_level(l) == ci) ++m[i * n + j];
        }
      }
    }
  }
  const auto total = static_cast<double>(samples.size());
  agg.consensus.assign(depth, std::vector<double>(n * n, 0.0));
  for (int l = 0; l < depth; ++l) {
    for (std::size_t k = 0; k < n * n; ++k) agg.consensus[l][k] = static_cast<double>(shared[l][k]) / total;
  }
  return agg;
}

}  // namespace hbm
