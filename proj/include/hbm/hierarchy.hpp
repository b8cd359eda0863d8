#pragma once

// The nCRP tree. Paths omit the root; level 0 is the root, levels 1..L are
// stored in Path::communities[0..L-1].

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hbm/kgraph.hpp"

namespace hbm {

using CommunityId = std::uint32_t;
inline constexpr CommunityId kRootId = 0;

struct Community {
  CommunityId id = kRootId;
  std::optional<CommunityId> parent;
  int level = 0;
  std::size_t pass_count = 0;
  std::vector<CommunityId> children;  // creation order
};

struct Path {
  std::vector<CommunityId> communities;

  int depth() const noexcept { return static_cast<int>(communities.size()); }
  // 1-based; at_level(0) is the root.
  CommunityId at_level(int l) const { return l == 0 ? kRootId : communities.at(static_cast<std::size_t>(l - 1)); }
  bool operator==(const Path&) const = default;
};

// Existing communities for levels 1..prefix.size(); every deeper level is new.
struct BranchSpec {
  std::vector<CommunityId> prefix;
  bool operator==(const BranchSpec&) const = default;
};

class Hierarchy {
 public:
  explicit Hierarchy(int depth = 1);

  int depth() const noexcept { return depth_; }
  const Community& root() const { return nodes_.at(kRootId); }
  const Community& node(CommunityId id) const;
  bool contains(CommunityId id) const { return nodes_.count(id) != 0; }
  const std::map<CommunityId, Community>& nodes() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t num_paths() const { return root().pass_count; }
  // Id the next materialized community will receive.
  CommunityId next_id() const noexcept { return next_id_; }

  Path add_path(const BranchSpec& spec);
  // Path must already be fully present in the tree.
  void add_existing(const Path& path);
  // Decrements along the path and prunes emptied communities.
  void remove_path(const Path& path);

  // Throws StateError describing the first violation found.
  void validate() const;

  nlohmann::json to_json() const;
  static Hierarchy from_json(const nlohmann::json& j);

 private:
  void check_registered(const Path& path) const;

  int depth_;
  CommunityId next_id_ = 1;
  std::map<CommunityId, Community> nodes_;
};

// min{l : pi[l] != pj[l]}, or L+1 for identical paths.
int divergence_level(const Path& pi, const Path& pj);

struct SiblingKey {
  CommunityId from = 0;
  CommunityId to = 0;
  PredicateId predicate = 0;
  auto operator<=>(const SiblingKey&) const = default;
};

// Walks both paths downward from the root until they split or the shallower
// of the two indicated levels is reached: the level used is
// min(zi, zj, divergence_level). Both returned communities share a parent.
std::pair<CommunityId, CommunityId> coarsen_pair(const Path& pi, int zi, const Path& pj, int zj);
SiblingKey coarsen(const Path& pi, int zi, const Path& pj, int zj, PredicateId r);

}  // namespace hbm
