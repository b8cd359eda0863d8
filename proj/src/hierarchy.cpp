#include "hbm/hierarchy.hpp"

#include <algorithm>
#include <string>

#include "hbm/errors.hpp"

namespace hbm {

Hierarchy::Hierarchy(int depth) : depth_(depth) {
  if (depth < 1) throw ArgumentError("hierarchy depth must be >= 1");
  Community root;
  root.id = kRootId;
  root.level = 0;
  nodes_.emplace(kRootId, root);
}

const Community& Hierarchy::node(CommunityId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw ArgumentError("unknown community " + std::to_string(id));
  return it->second;
}

Path Hierarchy::add_path(const BranchSpec& spec) {
  if (spec.prefix.size() > static_cast<std::size_t>(depth_)) {
    throw ArgumentError("branch prefix longer than hierarchy depth");
  }
  CommunityId parent = kRootId;
  for (std::size_t k = 0; k < spec.prefix.size(); ++k) {
    auto it = nodes_.find(spec.prefix[k]);
    if (it == nodes_.end() || it->second.parent != parent) {
      throw ArgumentError("branch prefix community " + std::to_string(spec.prefix[k]) +
                          " is not a child of " + std::to_string(parent));
    }
    parent = spec.prefix[k];
  }

  Path path;
  path.communities = spec.prefix;
  for (int l = static_cast<int>(spec.prefix.size()) + 1; l <= depth_; ++l) {
    Community c;
    c.id = next_id_++;
    c.parent = parent;
    c.level = l;
    nodes_.at(parent).children.push_back(c.id);
    nodes_.emplace(c.id, c);
    path.communities.push_back(c.id);
    parent = c.id;
  }

  ++nodes_.at(kRootId).pass_count;
  for (auto id : path.communities) ++nodes_.at(id).pass_count;
  return path;
}

void Hierarchy::add_existing(const Path& path) {
  if (path.depth() != depth_) throw ArgumentError("path length differs from hierarchy depth");
  CommunityId parent = kRootId;
  for (auto id : path.communities) {
    auto it = nodes_.find(id);
    if (it == nodes_.end() || it->second.parent != parent) {
      throw ArgumentError("path community " + std::to_string(id) + " not in tree");
    }
    parent = id;
  }
  ++nodes_.at(kRootId).pass_count;
  for (auto id : path.communities) ++nodes_.at(id).pass_count;
}

void Hierarchy::check_registered(const Path& path) const {
  if (path.depth() != depth_) throw StateError("path length differs from hierarchy depth");
  CommunityId parent = kRootId;
  for (auto id : path.communities) {
    auto it = nodes_.find(id);
    if (it == nodes_.end() || it->second.parent != parent || it->second.pass_count == 0) {
      throw StateError("path through community " + std::to_string(id) + " is not registered");
    }
    parent = id;
  }
  if (root().pass_count == 0) throw StateError("no registered paths");
}

void Hierarchy::remove_path(const Path& path) {
  check_registered(path);
  --nodes_.at(kRootId).pass_count;
  for (auto id : path.communities) --nodes_.at(id).pass_count;

  // The shallowest emptied community takes its (empty) subtree with it.
  for (auto id : path.communities) {
    auto& c = nodes_.at(id);
    if (c.pass_count != 0) continue;
    auto& siblings = nodes_.at(*c.parent).children;
    siblings.erase(std::find(siblings.begin(), siblings.end(), id));
    std::vector<CommunityId> stack{id};
    while (!stack.empty()) {
      const auto cur = stack.back();
      stack.pop_back();
      auto it = nodes_.find(cur);
      for (auto ch : it->second.children) stack.push_back(ch);
      nodes_.erase(it);
    }
    break;
  }
}

void Hierarchy::validate() const {
  auto fail = [](const std::string& msg) { throw StateError("hierarchy invalid: " + msg); };
  const Community& r = root();
  if (r.parent || r.level != 0) fail("root malformed");
  std::size_t leaf_total = 0;
  std::size_t seen = 0;
  std::vector<CommunityId> stack{kRootId};
  while (!stack.empty()) {
    const auto id = stack.back();
    stack.pop_back();
    ++seen;
    const Community& c = node(id);
    if (id != kRootId && c.pass_count == 0) fail("empty community " + std::to_string(id));
    if (id >= next_id_ && id != kRootId) fail("id beyond allocator " + std::to_string(id));
    if (c.level == depth_) {
      if (!c.children.empty()) fail("leaf with children " + std::to_string(id));
      leaf_total += c.pass_count;
      continue;
    }
    std::size_t sum = 0;
    for (auto ch : c.children) {
      auto it = nodes_.find(ch);
      if (it == nodes_.end()) fail("dangling child " + std::to_string(ch));
      const Community& child = it->second;
      if (child.parent != id) fail("parent link mismatch at " + std::to_string(ch));
      if (child.level != c.level + 1) fail("level mismatch at " + std::to_string(ch));
      sum += child.pass_count;
      stack.push_back(ch);
    }
    if (sum != c.pass_count) fail("pass count mismatch at " + std::to_string(id));
  }
  if (seen != nodes_.size()) fail("unreachable communities");
  if (leaf_total != r.pass_count) fail("leaf totals differ from root count");
}

nlohmann::json Hierarchy::to_json() const {
  auto build = [this](auto&& self, CommunityId id) -> nlohmann::json {
    const Community& c = nodes_.at(id);
    nlohmann::json children = nlohmann::json::array();
    for (auto ch : c.children) children.push_back(self(self, ch));
    return {{"id", c.id}, {"level", c.level}, {"pass_count", c.pass_count}, {"children", children}};
  };
  return {{"depth", depth_}, {"next_id", next_id_}, {"root", build(build, kRootId)}};
}

Hierarchy Hierarchy::from_json(const nlohmann::json& j) {
  try {
    Hierarchy h(j.at("depth").get<int>());
    h.nodes_.clear();
    CommunityId max_id = 0;
    auto load = [&](auto&& self, const nlohmann::json& jn, std::optional<CommunityId> parent) -> CommunityId {
      Community c;
      c.id = jn.at("id").get<CommunityId>();
      c.level = jn.at("level").get<int>();
      c.pass_count = jn.at("pass_count").get<std::size_t>();
      c.parent = parent;
      if (h.nodes_.count(c.id)) throw ParseError("hierarchy", 0, "duplicate community id");
      max_id = std::max(max_id, c.id);
      h.nodes_.emplace(c.id, c);
      for (const auto& ch : jn.at("children")) {
        const auto cid = self(self, ch, c.id);
        h.nodes_.at(c.id).children.push_back(cid);
      }
      return c.id;
    };
    if (load(load, j.at("root"), std::nullopt) != kRootId) {
      throw ParseError("hierarchy", 0, "root id must be 0");
    }
    h.next_id_ = std::max<CommunityId>(max_id + 1, j.value("next_id", CommunityId{1}));
    h.validate();
    return h;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("hierarchy", 0, e.what());
  } catch (const StateError& e) {
    throw ParseError("hierarchy", 0, e.what());
  }
}

int divergence_level(const Path& pi, const Path& pj) {
  if (pi.depth() != pj.depth()) throw ArgumentError("divergence_level: path lengths differ");
  for (int l = 1; l <= pi.depth(); ++l) {
    if (pi.communities[l - 1] != pj.communities[l - 1]) return l;
  }
  return pi.depth() + 1;
}

std::pair<CommunityId, CommunityId> coarsen_pair(const Path& pi, int zi, const Path& pj, int zj) {
  const int depth = pi.depth();
  if (pj.depth() != depth) throw ArgumentError("coarsen: path lengths differ");
  if (zi < 1 || zi > depth || zj < 1 || zj > depth) throw ArgumentError("coarsen: level out of range");
  const int limit = std::min(zi, zj);
  const CommunityId* a = pi.communities.data();
  const CommunityId* b = pj.communities.data();
  int l = 0;
  while (l + 1 < limit && a[l] == b[l]) ++l;
  return {a[l], b[l]};
}

SiblingKey coarsen(const Path& pi, int zi, const Path& pj, int zj, PredicateId r) {
  const auto [p, q] = coarsen_pair(pi, zi, pj, zj);
  return SiblingKey{p, q, r};
}

}  // namespace hbm
