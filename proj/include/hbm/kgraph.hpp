#pragma once

// Knowledge graph storage: label dictionaries plus a set of directed,
// predicate-labelled triples. The binary adjacency tensor is implicit;
// absent triples are zeros.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace hbm {

using EntityId = std::uint32_t;
using PredicateId = std::uint32_t;

struct Triple {
  EntityId subject = 0;
  EntityId object = 0;
  PredicateId predicate = 0;

  auto operator<=>(const Triple&) const = default;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept {
    std::uint64_t h = (std::uint64_t{t.subject} << 32) ^ t.object;
    h ^= std::uint64_t{t.predicate} * 0x9e3779b97f4a7c15ULL;
    h ^= h >> 31;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 29;
    return static_cast<std::size_t>(h);
  }
};

// Label -> dense id, ids handed out in first-appearance order.
class Dictionary {
 public:
  std::uint32_t intern(std::string_view label);
  std::optional<std::uint32_t> find(std::string_view label) const;
  const std::string& label(std::uint32_t id) const;
  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

class KnowledgeGraph {
 public:
  EntityId add_entity(std::string_view label) { return entities_.intern(label); }
  PredicateId add_predicate(std::string_view label) { return predicates_.intern(label); }

  // Returns false when the triple was already present.
  bool add_triple(std::string_view subject, std::string_view predicate, std::string_view object);
  bool add_triple(Triple t);

  bool contains(EntityId subject, EntityId object, PredicateId predicate) const {
    return index_.count(Triple{subject, object, predicate}) != 0;
  }

  std::size_t num_entities() const noexcept { return entities_.size(); }
  std::size_t num_predicates() const noexcept { return predicates_.size(); }
  std::size_t num_triples() const noexcept { return triples_.size(); }

  const Dictionary& entities() const noexcept { return entities_; }
  const Dictionary& predicates() const noexcept { return predicates_; }
  // Insertion order.
  const std::vector<Triple>& triples() const noexcept { return triples_; }

 private:
  Dictionary entities_;
  Dictionary predicates_;
  std::vector<Triple> triples_;
  std::unordered_set<Triple, TripleHash> index_;
};

// g_ijr as 0/1. Throws ArgumentError on out-of-range ids.
int adjacency_value(const KnowledgeGraph& kg, EntityId i, EntityId j, PredicateId r);

// Tab separated "subject<TAB>predicate<TAB>object" lines; '#' comments and
// blank lines are skipped. A trailing '\r' is tolerated.
KnowledgeGraph parse_triples(std::istream& in, const std::string& source = "<stream>");
KnowledgeGraph load_triples(const std::filesystem::path& path);
void write_triples(const KnowledgeGraph& kg, std::ostream& out);
void save_triples(const KnowledgeGraph& kg, const std::filesystem::path& path);

struct DegreeTable {
  std::vector<std::size_t> degree;
  // Resampling probability per entity: (#entities with strictly smaller
  // degree + 1) / |E|.
  std::vector<double> sampling_prob;
};

DegreeTable degree_table(const KnowledgeGraph& kg);
std::vector<double> sampling_probabilities(const std::vector<std::size_t>& degree);

// Keeps triples whose predicate is in keep_predicates (when given) and whose
// subject is in keep_subjects (when given), then re-densifies ids so that
// only entities/predicates that still occur remain.
KnowledgeGraph filter_triples(const KnowledgeGraph& kg,
                              const std::optional<std::set<std::string>>& keep_predicates,
                              const std::optional<std::set<std::string>>& keep_subjects);

}  // namespace hbm
