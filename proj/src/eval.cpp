#include "hbm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "hbm/errors.hpp"

namespace hbm {

std::size_t Clustering::num_clusters() const {
  std::size_t k = 0;
  for (auto l : labels) k = std::max(k, l + 1);
  return k;
}

Clustering clusters_at_level(const PosteriorSample& sample, int level, bool truncate_at_level) {
  if (level < 1 || level > sample.depth()) throw ArgumentError("clusters_at_level: level out of range");
  std::vector<CommunityId> raw;
  raw.reserve(sample.num_entities());
  for (std::size_t i = 0; i < sample.num_entities(); ++i) {
    int l = level;
    if (truncate_at_level && i < sample.levels.size()) l = std::min(l, sample.levels[i]);
    raw.push_back(sample.paths[i].at_level(l));
  }
  return Clustering::from_labels(raw);
}

namespace {

struct Contingency {
  std::map<std::pair<std::size_t, std::size_t>, double> cells;
  std::vector<double> rows;
  std::vector<double> cols;
  double n = 0;
};

Contingency contingency(const Clustering& a, const Clustering& b) {
  if (a.size() != b.size()) throw ArgumentError("clusterings cover different numbers of entities");
  Contingency t;
  t.rows.assign(a.num_clusters(), 0);
  t.cols.assign(b.num_clusters(), 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    t.cells[{a.labels[i], b.labels[i]}] += 1;
    t.rows[a.labels[i]] += 1;
    t.cols[b.labels[i]] += 1;
  }
  t.n = static_cast<double>(a.size());
  return t;
}

bool same_partition(const Clustering& a, const Clustering& b) {
  std::vector<std::size_t> fwd(a.num_clusters(), SIZE_MAX);
  std::vector<std::size_t> back(b.num_clusters(), SIZE_MAX);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto x = a.labels[i];
    const auto y = b.labels[i];
    if (fwd[x] == SIZE_MAX && back[y] == SIZE_MAX) {
      fwd[x] = y;
      back[y] = x;
    } else if (fwd[x] != y || back[y] != x) {
      return false;
    }
  }
  return true;
}

double choose2(double x) { return x * (x - 1) / 2; }

}  // namespace

double ari(const Clustering& a, const Clustering& b) {
  const auto t = contingency(a, b);
  if (t.n < 2 || same_partition(a, b)) return 1.0;
  double index = 0;
  for (const auto& [cell, v] : t.cells) index += choose2(v);
  double sa = 0;
  double sb = 0;
  for (double v : t.rows) sa += choose2(v);
  for (double v : t.cols) sb += choose2(v);
  const double expected = sa * sb / choose2(t.n);
  const double maximum = (sa + sb) / 2;
  const double denom = maximum - expected;
  if (denom == 0) return 1.0;
  return (index - expected) / denom;
}

double nmi(const Clustering& a, const Clustering& b) {
  const auto t = contingency(a, b);
  if (t.n == 0) throw ArgumentError("nmi: empty clustering");
  auto entropy = [&](const std::vector<double>& m) {
    double h = 0;
    for (double v : m) {
      if (v > 0) h -= v / t.n * std::log(v / t.n);
    }
    return h;
  };
  const double ha = entropy(t.rows);
  const double hb = entropy(t.cols);
  if (ha == 0 && hb == 0) return 0.0;
  if (same_partition(a, b)) return 1.0;
  double mi = 0;
  for (const auto& [cell, v] : t.cells) {
    mi += v / t.n * std::log(t.n * v / (t.rows[cell.first] * t.cols[cell.second]));
  }
  const double value = mi / ((ha + hb) / 2);
  return std::clamp(value, 0.0, 1.0);
}

Evaluation evaluate_sample(const PosteriorSample& sample, const GroundTruth& truth, bool truncate_at_level) {
  std::unordered_map<std::string, std::size_t> where;
  for (std::size_t e = 0; e < truth.entities.size(); ++e) where.emplace(truth.entities[e], e);
  std::vector<std::size_t> rows;
  std::string missing;
  std::size_t num_missing = 0;
  for (const auto& label : sample.entity_labels) {
    auto it = where.find(label);
    if (it == where.end()) {
      if (num_missing < 20) missing += (missing.empty() ? "" : ", ") + label;
      ++num_missing;
      continue;
    }
    rows.push_back(it->second);
  }
  if (num_missing > 0) {
    throw ArgumentError("ground truth lacks " + std::to_string(num_missing) + " entities: " + missing +
                        (num_missing > 20 ? ", ..." : ""));
  }

  Evaluation ev;
  const int levels = std::min(sample.depth(), truth.depth);
  if (levels < 1) throw ArgumentError("evaluate_sample: no common levels");
  for (int l = 1; l <= levels; ++l) {
    std::vector<std::string> ref;
    ref.reserve(rows.size());
    for (auto r : rows) ref.push_back(truth.labels[r][l - 1]);
    const auto found = clusters_at_level(sample, l, truncate_at_level);
    const auto expected = Clustering::from_labels(ref);
    ev.levels.push_back({l, ari(found, expected), nmi(found, expected)});
  }
  for (const auto& s : ev.levels) {
    ev.overall.ari += s.ari;
    ev.overall.nmi += s.nmi;
  }
  ev.overall.ari /= static_cast<double>(ev.levels.size());
  ev.overall.nmi /= static_cast<double>(ev.levels.size());
  return ev;
}

nlohmann::json Evaluation::to_json() const {
  nlohmann::json lv = nlohmann::json::array();
  for (const auto& s : levels) lv.push_back({{"level", s.level}, {"ari", s.ari}, {"nmi", s.nmi}});
  return {{"levels", lv}, {"overall", {{"ari", overall.ari}, {"nmi", overall.nmi}}}};
}

std::string Evaluation::to_table() const {
  std::string out = "level        ARI       NMI\n";
  char buf[96];
  for (const auto& s : levels) {
    std::snprintf(buf, sizeof buf, "%-7d %9.4f %9.4f\n", s.level, s.ari, s.nmi);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%-7s %9.4f %9.4f\n", "overall", overall.ari, overall.nmi);
  out += buf;
  return out;
}

}  // namespace hbm
