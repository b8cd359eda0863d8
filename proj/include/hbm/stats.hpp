#pragma once

// Closed-form collapsed quantities and the count tables they read.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hbm/hierarchy.hpp"

namespace hbm {

struct Tally {
  std::int64_t ones = 0;
  std::int64_t zeros = 0;
  bool operator==(const Tally&) const = default;
  bool empty() const noexcept { return ones == 0 && zeros == 0; }
};

struct BetaPosterior {
  double shape1 = 0;
  double shape2 = 0;
  double mean = 0;
};

BetaPosterior beta_posterior(double ones, double zeros, double lambda, double eta);

double log_beta_fn(double a, double b);
double bernoulli_pmf(double p, int x);
double beta_log_pdf(double x, double a, double b);
double multinomial_pmf(std::span<const std::int64_t> counts, std::span<const double> probs);
double log_sum_exp(std::span<const double> v);

// Per ordered community pair, one tally per predicate. Pairs whose tallies are
// all zero are dropped so iteration only sees occupied keys.
class RelationCounts {
 public:
  explicit RelationCounts(std::size_t num_predicates = 0) : num_predicates_(num_predicates) {}

  static std::uint64_t pack(CommunityId p, CommunityId q) noexcept {
    return (std::uint64_t{p} << 32) | q;
  }
  static CommunityId unpack_from(std::uint64_t k) noexcept { return static_cast<CommunityId>(k >> 32); }
  static CommunityId unpack_to(std::uint64_t k) noexcept { return static_cast<CommunityId>(k & 0xffffffffu); }

  std::size_t num_predicates() const noexcept { return num_predicates_; }

  void add(const SiblingKey& key, bool edge, std::int64_t delta = 1);
  // Adds one pair's worth of observations to (p, q): edge[r] selects ones/zeros.
  void add_pair(CommunityId p, CommunityId q, std::span<const std::uint8_t> edge, std::int64_t delta);

  Tally get(const SiblingKey& key) const;
  // nullptr when (p, q) is unoccupied.
  const std::vector<Tally>* find(CommunityId p, CommunityId q) const;

  const std::unordered_map<std::uint64_t, std::vector<Tally>>& pairs() const noexcept { return pairs_; }
  // Raw mutable access, meant for fault injection in tests.
  std::vector<Tally>& raw_slot(CommunityId p, CommunityId q);

  std::size_t num_occupied() const noexcept { return pairs_.size(); }
  void clear() noexcept { pairs_.clear(); }
  bool operator==(const RelationCounts& o) const;

 private:
  std::size_t num_predicates_;
  std::unordered_map<std::uint64_t, std::vector<Tally>> pairs_;
};

// sum over keys of contrib of log B(base1+c1+lambda, base0+c0+eta) - log B(base1+lambda, base0+eta)
double path_log_likelihood_delta(const RelationCounts& base, const RelationCounts& contrib,
                                 double lambda, double eta);

// Product over predicates of the one-observation predictive.
double level_likelihood(std::span<const std::uint8_t> g, std::span<const Tally> counts_minus,
                        double lambda, double eta);
double log_level_likelihood(std::span<const std::uint8_t> g, std::span<const Tally> counts_minus,
                            double lambda, double eta);

// hist[l-1] = number of indicators at level l. Returned vectors sum to 1.
std::vector<double> stick_level_prior(std::span<const std::int64_t> hist, double mu, double sigma, int depth);
std::vector<double> dirichlet_level_prior(std::span<const std::int64_t> hist, std::span<const double> alpha);

struct PathCandidate {
  BranchSpec branch;
  double log_prob = 0;
};

// Every existing leaf plus a "new child" option under every community above
// the leaves, with nCRP probabilities. `excluded` (when given) is treated as
// removed before enumeration.
std::vector<PathCandidate> ncrp_path_prior(const Hierarchy& h, double gamma, const Path* excluded = nullptr);

// log P(all paths) under the sequential nCRP; exchangeable, so only counts matter.
double ncrp_log_prob(const Hierarchy& h, double gamma);

enum class Direction { kSender, kReceiver };

// Per-entity histogram of owned level indicators. Entity i owns z_{i->j} and
// z_{j<-i} for every j (its sender side and receiver side).
class LevelCounts {
 public:
  LevelCounts() = default;
  LevelCounts(std::size_t num_entities, int depth);

  void add(std::size_t entity, int level, Direction dir, std::int64_t delta = 1);
  std::int64_t at(std::size_t entity, int level) const { return hist_[entity * depth_ + (level - 1)]; }
  std::span<const std::int64_t> row(std::size_t entity) const {
    return {hist_.data() + entity * depth_, static_cast<std::size_t>(depth_)};
  }
  std::span<const std::int64_t> totals(Direction dir) const {
    return dir == Direction::kSender ? std::span<const std::int64_t>(sender_totals_)
                                     : std::span<const std::int64_t>(receiver_totals_);
  }
  std::size_t num_entities() const noexcept { return num_entities_; }
  int depth() const noexcept { return depth_; }
  std::vector<std::int64_t>& raw() noexcept { return hist_; }
  bool operator==(const LevelCounts&) const = default;

 private:
  std::size_t num_entities_ = 0;
  int depth_ = 1;
  std::vector<std::int64_t> hist_;
  std::vector<std::int64_t> sender_totals_;
  std::vector<std::int64_t> receiver_totals_;
};

// log P(n indicators all land at levels <= depth) under the untruncated
// stick-breaking predictive.
double stick_truncation_log_mass(double mu, double sigma, int depth, std::int64_t n);

// Collapsed log P(one entity's indicators) with the truncated stick prior;
// `log_mass` is stick_truncation_log_mass for the histogram's total.
double stick_histogram_log_prob(std::span<const std::int64_t> hist, double mu, double sigma, double log_mass);
double dirichlet_histogram_log_prob(std::span<const std::int64_t> hist, std::span<const double> alpha);

enum class LevelPriorMode { kStick, kDirichlet };

struct Schedule {
  int iterations = 230;
  int burn_in = 200;
  int lag = 3;
  int final_samples = 10;
  int chains = 1;
  std::uint64_t seed = 1;
  bool subsample = true;  // degree-proportional resampling
};

struct Hyperparameters {
  double gamma = 1.0;
  double mu = 0.5;
  double sigma = 1.0;
  double lambda = 1.0;
  double eta = 1.0;
  int depth = 4;
  LevelPriorMode mode = LevelPriorMode::kStick;
  std::vector<double> alpha;
  Schedule schedule;

  // Throws ConfigError naming the first offending field.
  void validate() const;
};

std::string to_string(LevelPriorMode m);
LevelPriorMode level_prior_mode_from_string(const std::string& s);

}  // namespace hbm
