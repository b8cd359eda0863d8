#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hbm/hierarchy.hpp"
#include "hbm/kgraph.hpp"

namespace fixture {

// Eight entities, three predicates; r0 holds e7->e6, e6->e7, e5->e6.
inline hbm::KnowledgeGraph toy_graph() {
  hbm::KnowledgeGraph kg;
  for (int i = 0; i < 8; ++i) kg.add_entity("e" + std::to_string(i));
  for (int r = 0; r < 3; ++r) kg.add_predicate("r" + std::to_string(r));
  const char* edges[][3] = {{"e7", "r0", "e6"}, {"e6", "r0", "e7"}, {"e5", "r0", "e6"},
                            {"e7", "r1", "e0"}, {"e6", "r1", "e1"}, {"e5", "r1", "e2"},
                            {"e5", "r1", "e4"}, {"e0", "r2", "e4"}, {"e2", "r2", "e3"},
                            {"e3", "r2", "e4"}};
  for (const auto& e : edges) kg.add_triple(e[0], e[1], e[2]);
  return kg;
}

// Depth-2 tree with six patrons: t1 -> t2 {e0, e4}; t3 -> t4 {e1, e2, e3}, t3 -> t5 {e5}.
// Paths are indexed by entity.
struct ToyTree {
  hbm::Hierarchy h{2};
  std::vector<hbm::Path> paths;
};

inline ToyTree toy_tree() {
  ToyTree t;
  t.paths.push_back(t.h.add_path({}));
  t.paths.push_back(t.h.add_path({}));
  t.paths.push_back(t.h.add_path({{3, 4}}));
  t.paths.push_back(t.h.add_path({{3, 4}}));
  t.paths.push_back(t.h.add_path({{1, 2}}));
  t.paths.push_back(t.h.add_path({{3}}));
  return t;
}

inline std::filesystem::path temp_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  auto dir = std::filesystem::temp_directory_path() /
             ("hbm_" + tag + "_" + std::to_string(stamp) + "_" + std::to_string(counter++));
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace fixture
