#pragma once

// Per-level clusterings and pair-counting / information-theoretic agreement.

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "hbm/ground_truth.hpp"
#include "hbm/sampler.hpp"

namespace hbm {

// Dense cluster ids 0..k-1 in first-appearance order.
struct Clustering {
  std::vector<std::size_t> labels;

  template <class Label>
  static Clustering from_labels(const std::vector<Label>& raw) {
    Clustering c;
    std::unordered_map<Label, std::size_t> ids;
    for (const auto& x : raw) c.labels.push_back(ids.try_emplace(x, ids.size()).first->second);
    return c;
  }

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t num_clusters() const;
};

// With truncate_at_level, an entity whose level mode is shallower than l keeps
// its community at that shallower level.
Clustering clusters_at_level(const PosteriorSample& sample, int level, bool truncate_at_level = false);

double ari(const Clustering& a, const Clustering& b);
double nmi(const Clustering& a, const Clustering& b);

struct LevelScore {
  int level = 0;
  double ari = 0;
  double nmi = 0;
};

struct Evaluation {
  std::vector<LevelScore> levels;
  LevelScore overall;  // unweighted mean over levels, level field 0

  nlohmann::json to_json() const;
  std::string to_table() const;
};

// Levels 1..min(sample depth, truth depth). Truth must cover every sample entity.
Evaluation evaluate_sample(const PosteriorSample& sample, const GroundTruth& truth, bool truncate_at_level = false);

}  // namespace hbm
