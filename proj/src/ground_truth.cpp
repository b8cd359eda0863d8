#include "hbm/ground_truth.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "hbm/errors.hpp"

namespace hbm {

std::optional<std::size_t> GroundTruth::index_of(const std::string& entity) const {
  for (std::size_t i = 0; i < entities.size(); ++i) {
    if (entities[i] == entity) return i;
  }
  return std::nullopt;
}

void GroundTruth::check_refinement() const {
  for (int l = 2; l <= depth; ++l) {
    std::unordered_map<std::string, std::string> parent_of;
    for (const auto& row : labels) {
      auto [it, inserted] = parent_of.emplace(row[l - 1], row[l - 2]);
      if (!inserted && it->second != row[l - 2]) {
        throw ArgumentError("ground truth: level " + std::to_string(l) + " cluster '" + row[l - 1] +
                            "' spans several level " + std::to_string(l - 1) + " clusters");
      }
    }
  }
}

GroundTruth parse_ground_truth(std::istream& in, const std::string& source) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::map<int, std::string>> rows;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos || line.find('\t', t2 + 1) != std::string_view::npos) {
      throw ParseError(source, line_no, "expected entity<TAB>level<TAB>label");
    }
    const auto entity = std::string(line.substr(0, t1));
    const auto level_s = line.substr(t1 + 1, t2 - t1 - 1);
    const auto label = std::string(line.substr(t2 + 1));
    int level = 0;
    auto [ptr, ec] = std::from_chars(level_s.data(), level_s.data() + level_s.size(), level);
    if (ec != std::errc() || ptr != level_s.data() + level_s.size() || level < 1) {
      throw ParseError(source, line_no, "level must be an integer >= 1");
    }
    if (entity.empty() || label.empty()) throw ParseError(source, line_no, "empty field");
    auto [it, fresh] = rows.try_emplace(entity);
    if (fresh) order.push_back(entity);
    if (!it->second.emplace(level, label).second) {
      throw ParseError(source, line_no, "duplicate level " + std::to_string(level) + " for " + entity);
    }
  }
  GroundTruth truth;
  for (const auto& [e, levels] : rows) truth.depth = std::max(truth.depth, levels.rbegin()->first);
  for (const auto& e : order) {
    const auto& levels = rows.at(e);
    if (static_cast<int>(levels.size()) != truth.depth) {
      throw ParseError(source, 0, "entity " + e + " does not cover levels 1.." + std::to_string(truth.depth));
    }
    std::vector<std::string> row;
    for (const auto& [l, lab] : levels) row.push_back(lab);
    truth.entities.push_back(e);
    truth.labels.push_back(std::move(row));
  }
  return truth;
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_ground_truth(in, path.string());
}

void write_ground_truth(const GroundTruth& truth, std::ostream& out) {
  for (std::size_t e = 0; e < truth.entities.size(); ++e) {
    for (int l = 1; l <= truth.depth; ++l) {
      out << truth.entities[e] << '\t' << l << '\t' << truth.labels[e][l - 1] << '\n';
    }
  }
}

void save_ground_truth(const GroundTruth& truth, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_ground_truth(truth, out);
  if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace hbm
