#include "hbm/kgraph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "hbm/errors.hpp"

namespace hbm {

std::uint32_t Dictionary::intern(std::string_view label) {
  auto it = index_.find(std::string(label));
  if (it != index_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(labels_.size());
  labels_.emplace_back(label);
  index_.emplace(labels_.back(), id);
  return id;
}

std::optional<std::uint32_t> Dictionary::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& Dictionary::label(std::uint32_t id) const {
  if (id >= labels_.size()) throw ArgumentError("dictionary id " + std::to_string(id) + " out of range");
  return labels_[id];
}

bool KnowledgeGraph::add_triple(std::string_view subject, std::string_view predicate,
                                std::string_view object) {
  const EntityId s = entities_.intern(subject);
  const PredicateId p = predicates_.intern(predicate);
  const EntityId o = entities_.intern(object);
  return add_triple(Triple{s, o, p});
}

bool KnowledgeGraph::add_triple(Triple t) {
  if (t.subject >= entities_.size() || t.object >= entities_.size() ||
      t.predicate >= predicates_.size()) {
    throw ArgumentError("triple references an unknown entity or predicate id");
  }
  if (!index_.insert(t).second) return false;
  triples_.push_back(t);
  return true;
}

int adjacency_value(const KnowledgeGraph& kg, EntityId i, EntityId j, PredicateId r) {
  if (i >= kg.num_entities() || j >= kg.num_entities() || r >= kg.num_predicates()) {
    throw ArgumentError("adjacency_value: id out of bounds");
  }
  return kg.contains(i, j, r) ? 1 : 0;
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

}  // namespace

KnowledgeGraph parse_triples(std::istream& in, const std::string& source) {
  KnowledgeGraph kg;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 3) {
      throw ParseError(source, line_no,
                       "expected 3 tab-separated fields, found " + std::to_string(fields.size()));
    }
    for (const auto& f : fields) {
      if (f.empty()) throw ParseError(source, line_no, "empty field");
    }
    kg.add_triple(fields[0], fields[1], fields[2]);
  }
  if (in.bad()) throw IoError("read failure on " + source);
  return kg;
}

KnowledgeGraph load_triples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_triples(in, path.string());
}

void write_triples(const KnowledgeGraph& kg, std::ostream& out) {
  const auto& ents = kg.entities();
  const auto& preds = kg.predicates();
  for (const auto& t : kg.triples()) {
    out << ents.label(t.subject) << '\t' << preds.label(t.predicate) << '\t'
        << ents.label(t.object) << '\n';
  }
}

void save_triples(const KnowledgeGraph& kg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_triples(kg, out);
  if (!out) throw IoError("write failure on " + path.string());
}

std::vector<double> sampling_probabilities(const std::vector<std::size_t>& degree) {
  const std::size_t n = degree.size();
  if (n == 0) throw ArgumentError("sampling_probabilities: no entities");
  std::vector<std::size_t> sorted = degree;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto fewer = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), degree[i]) - sorted.begin());
    out[i] = static_cast<double>(fewer + 1) / static_cast<double>(n);
  }
  return out;
}

DegreeTable degree_table(const KnowledgeGraph& kg) {
  const std::size_t n = kg.num_entities();
  if (n == 0) throw ArgumentError("degree_table: graph has no entities");
  DegreeTable table;
  table.degree.assign(n, 0);
  for (const auto& t : kg.triples()) {
    ++table.degree[t.subject];
    ++table.degree[t.object];
  }
  table.sampling_prob = sampling_probabilities(table.degree);
  return table;
}

KnowledgeGraph filter_triples(const KnowledgeGraph& kg,
                              const std::optional<std::set<std::string>>& keep_predicates,
                              const std::optional<std::set<std::string>>& keep_subjects) {
  KnowledgeGraph out;
  const auto& ents = kg.entities();
  const auto& preds = kg.predicates();
  for (const auto& t : kg.triples()) {
    const auto& p = preds.label(t.predicate);
    const auto& s = ents.label(t.subject);
    if (keep_predicates && keep_predicates->count(p) == 0) continue;
    if (keep_subjects && keep_subjects->count(s) == 0) continue;
    out.add_triple(s, p, ents.label(t.object));
  }
  return out;
}

}  // namespace hbm
