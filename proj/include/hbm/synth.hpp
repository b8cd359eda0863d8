#pragma once

// Forward simulation of the generative model and the synthetic binary tree
// benchmark.

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "json.hpp"

#include "hbm/ground_truth.hpp"
#include "hbm/hierarchy.hpp"
#include "hbm/kgraph.hpp"
#include "hbm/random.hpp"
#include "hbm/stats.hpp"

namespace hbm {

// Returns an existing index, or counts.size() for a new table.
std::size_t sample_crp_table(std::span<const std::size_t> counts, double gamma, Rng& rng);

// Picks a branch under the current tree without modifying it.
BranchSpec draw_ncrp_branch(const Hierarchy& h, double gamma, Rng& rng);
// Draws and registers a path.
Path sample_ncrp_path(Hierarchy& h, double gamma, Rng& rng);

struct StickDraw {
  std::vector<double> breaks;
  std::vector<double> raw_weights;  // before truncation
  std::vector<double> weights;      // renormalized over levels 1..L
};

StickDraw stick_from_breaks(std::span<const double> breaks);
StickDraw sample_stick(double mu, double sigma, int depth, Rng& rng);

struct LatentState {
  Hierarchy hierarchy;
  std::vector<Path> paths;
  std::vector<StickDraw> level_memberships;
  // sender[i*N+j] = z_{i->j}, receiver[i*N+j] = z_{i<-j}
  std::vector<int> sender;
  std::vector<int> receiver;
  std::map<SiblingKey, double> community_relations;

  nlohmann::json to_json(const KnowledgeGraph& kg) const;
};

struct ForwardResult {
  KnowledgeGraph graph;
  LatentState latent;
};

ForwardResult forward_generate(const Hyperparameters& hyper, std::size_t num_entities,
                               std::size_t num_predicates, Rng& rng);

struct SbtConfig {
  int depth = 4;
  std::size_t entities_per_leaf = 25;
  std::vector<double> level_probs{0.0, 0.1, 0.4, 0.6};  // by LCA level 0..depth-1
  std::size_t num_predicates = 2;

  void validate() const;
};

struct SbtResult {
  KnowledgeGraph graph;
  GroundTruth truth;
};

SbtResult generate_sbt(const SbtConfig& cfg, Rng& rng);
double sbt_expected_triples(const SbtConfig& cfg);
double sbt_triple_variance(const SbtConfig& cfg);

}  // namespace hbm
