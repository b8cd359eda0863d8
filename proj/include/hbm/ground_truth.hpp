#pragma once

// Reference cluster labels per entity and level, as used for evaluation.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace hbm {

struct GroundTruth {
  int depth = 0;
  std::vector<std::string> entities;
  // labels[e][l-1] is entity e's cluster at level l
  std::vector<std::vector<std::string>> labels;

  std::optional<std::size_t> index_of(const std::string& entity) const;
  // Throws ArgumentError if some level-l cluster spans two level-(l-1) clusters.
  void check_refinement() const;
};

// Lines: entity<TAB>level<TAB>label. Every entity must list levels 1..depth.
GroundTruth parse_ground_truth(std::istream& in, const std::string& source = "<stream>");
GroundTruth load_ground_truth(const std::filesystem::path& path);
void write_ground_truth(const GroundTruth& truth, std::ostream& out);
void save_ground_truth(const GroundTruth& truth, const std::filesystem::path& path);

}  // namespace hbm
