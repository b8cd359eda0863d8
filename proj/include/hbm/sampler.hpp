#pragma once

// Collapsed Gibbs sampler over entity paths and pairwise level indicators.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "hbm/hierarchy.hpp"
#include "hbm/kgraph.hpp"
#include "hbm/random.hpp"
#include "hbm/stats.hpp"

namespace hbm {

struct SamplerState {
  const KnowledgeGraph* kg = nullptr;
  Hyperparameters hyper;
  Hierarchy h;
  std::vector<Path> paths;
  // sender[i*N+j] = z_{i->j}; receiver[i*N+j] = z_{i<-j}
  std::vector<int> sender;
  std::vector<int> receiver;
  RelationCounts relation_counts;
  LevelCounts level_counts;
  Rng rng;
  int iter = 0;

  // CSR of predicates present per ordered pair
  std::vector<std::uint32_t> edge_offsets;
  std::vector<PredicateId> edge_predicates;
  double stick_log_mass = 0;

  // resample tallies per entity, kept by gibbs_iteration
  std::vector<std::uint64_t> path_draws;
  std::vector<std::uint64_t> level_draws;  // owned indicators

  std::size_t num_entities() const noexcept { return paths.size(); }
  std::size_t num_predicates() const noexcept { return relation_counts.num_predicates(); }
  int depth() const noexcept { return h.depth(); }
  std::size_t pair_index(std::size_t i, std::size_t j) const noexcept { return i * paths.size() + j; }
  // Writes g_{ij.} into out (size R).
  void pair_edges(std::size_t i, std::size_t j, std::vector<std::uint8_t>& out) const;
};

// Paths from the nCRP prior, indicators from the zero-count level prior.
SamplerState init_state(const KnowledgeGraph& kg, const Hyperparameters& hyper, std::uint64_t seed);

// Builds a state from explicit assignments. path_labels[i][l-1] names entity
// i's community at level l; entities sharing a label prefix share communities.
// sender/receiver are N*N row-major, levels 1..L.
SamplerState from_assignment(const KnowledgeGraph& kg, const Hyperparameters& hyper,
                             const std::vector<std::vector<int>>& path_labels,
                             const std::vector<int>& sender, const std::vector<int>& receiver,
                             std::uint64_t seed = 0);

// From-scratch tallies implied by (kg, paths, Z).
RelationCounts recount_relations(const SamplerState& s);
LevelCounts recount_levels(const SamplerState& s);

// Normalized full conditional over levels 1..L for z_{i->j} (kSender) or
// z_{i<-j} (kReceiver).
std::vector<double> level_conditional(const SamplerState& s, std::size_t i, std::size_t j, Direction dir);
void sample_level_indicator(SamplerState& s, std::size_t i, std::size_t j, Direction dir);

// Candidates with normalized log posterior probabilities. The state is
// restored before returning.
std::vector<PathCandidate> path_posterior(SamplerState& s, std::size_t i);
void sample_path(SamplerState& s, std::size_t i);

// s_i per entity; all ones disables subsampling.
void gibbs_iteration(SamplerState& s, std::span<const double> sampling_prob);
void gibbs_iteration(SamplerState& s, const DegreeTable& degrees);

struct LikelihoodTerms {
  double relations = 0;
  double paths = 0;
  double levels = 0;
  double total() const { return relations + paths + levels; }
};

LikelihoodTerms likelihood_terms(const SamplerState& s);
double complete_log_likelihood(const SamplerState& s);

struct AuditReport {
  bool ok = true;
  std::string first_discrepancy;
};

AuditReport audit_counts(const SamplerState& s);

// Mode of entity i's owned indicators, ties to the shallower level.
int entity_level_mode(const SamplerState& s, std::size_t i);

struct RelationEstimate {
  SiblingKey key;
  Tally counts;
  double mean = 0;
};

std::vector<RelationEstimate> recover_community_relations(const RelationCounts& counts, double lambda, double eta);
std::vector<RelationEstimate> recover_community_relations(const SamplerState& s, double lambda, double eta);

struct PosteriorSample {
  int iteration = 0;
  double log_likelihood = 0;
  Hierarchy tree;
  std::vector<std::string> entity_labels;
  std::vector<std::string> predicate_labels;
  std::vector<Path> paths;
  std::vector<int> levels;
  RelationCounts relation_counts;
  double lambda = 1;
  double eta = 1;

  std::size_t num_entities() const noexcept { return paths.size(); }
  int depth() const noexcept { return tree.depth(); }
  nlohmann::json to_json() const;
  static PosteriorSample from_json(const nlohmann::json& j);
};

PosteriorSample snapshot(const SamplerState& s);

struct TraceEntry {
  int iteration = 0;
  double log_likelihood = 0;
};

struct Trace {
  double initial = 0;  // before the first iteration
  std::vector<TraceEntry> entries;

  // Header plus row 0 for the initial state, then one row per iteration.
  std::string to_csv() const;
};

struct ChainResult {
  std::vector<PosteriorSample> samples;
  Trace trace;
};

// One chain. Samples are taken after iterations burn_in + k*lag, k = 1..final_samples.
ChainResult run(const KnowledgeGraph& kg, const Hyperparameters& hyper, std::uint64_t seed);
// schedule.chains chains with seeds seed + chain index, run on separate threads.
std::vector<ChainResult> run_chains(const KnowledgeGraph& kg, const Hyperparameters& hyper);

struct Aggregate {
  PosteriorSample point;
  // consensus[l-1][i*N+j]: fraction of samples where i and j share the level-l prefix
  std::vector<std::vector<double>> consensus;
};

Aggregate aggregate(const std::vector<PosteriorSample>& samples);

}  // namespace hbm
