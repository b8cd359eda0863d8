#include "hbm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hbm/errors.hpp"

namespace hbm {

BetaPosterior beta_posterior(double ones, double zeros, double lambda, double eta) {
  if (ones < 0 || zeros < 0) throw ArgumentError("beta_posterior: negative count");
  if (!(lambda > 0) || !(eta > 0)) throw ArgumentError("beta_posterior: prior shapes must be > 0");
  BetaPosterior b;
  b.shape1 = ones + lambda;
  b.shape2 = zeros + eta;
  b.mean = b.shape1 / (b.shape1 + b.shape2);
  return b;
}

double log_beta_fn(double a, double b) {
  if (!(a > 0) || !(b > 0)) throw ArgumentError("log_beta_fn: arguments must be > 0");
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double bernoulli_pmf(double p, int x) {
  if (!(p >= 0 && p <= 1)) throw ArgumentError("bernoulli_pmf: p outside [0,1]");
  if (x != 0 && x != 1) throw ArgumentError("bernoulli_pmf: x must be 0 or 1");
  return x == 1 ? p : 1 - p;
}

double beta_log_pdf(double x, double a, double b) {
  if (!(x > 0 && x < 1)) throw ArgumentError("beta_log_pdf: x outside (0,1)");
  return (a - 1) * std::log(x) + (b - 1) * std::log1p(-x) - log_beta_fn(a, b);
}

double multinomial_pmf(std::span<const std::int64_t> counts, std::span<const double> probs) {
  if (counts.size() != probs.size() || counts.empty()) {
    throw ArgumentError("multinomial_pmf: size mismatch");
  }
  double total_p = 0;
  for (double p : probs) {
    if (!(p >= 0 && p <= 1)) throw ArgumentError("multinomial_pmf: probability outside [0,1]");
    total_p += p;
  }
  if (std::abs(total_p - 1) > 1e-9) throw ArgumentError("multinomial_pmf: probabilities do not sum to 1");
  std::int64_t n = 0;
  double log_p = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] < 0) throw ArgumentError("multinomial_pmf: negative count");
    n += counts[k];
    log_p -= std::lgamma(static_cast<double>(counts[k]) + 1);
    if (counts[k] > 0) {
      if (probs[k] == 0) return 0;
      log_p += static_cast<double>(counts[k]) * std::log(probs[k]);
    }
  }
  log_p += std::lgamma(static_cast<double>(n) + 1);
  return std::exp(log_p);
}

double log_sum_exp(std::span<const double> v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double s = 0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

// --- RelationCounts

void RelationCounts::add(const SiblingKey& key, bool edge, std::int64_t delta) {
  if (key.predicate >= num_predicates_) throw ArgumentError("RelationCounts: predicate out of range");
  auto it = pairs_.try_emplace(pack(key.from, key.to), num_predicates_).first;
  Tally& t = it->second[key.predicate];
  (edge ? t.ones : t.zeros) += delta;
  if (delta < 0 && t.empty() &&
      std::all_of(it->second.begin(), it->second.end(), [](const Tally& x) { return x.empty(); })) {
    pairs_.erase(it);
  }
}

void RelationCounts::add_pair(CommunityId p, CommunityId q, std::span<const std::uint8_t> edge,
                              std::int64_t delta) {
  auto it = pairs_.try_emplace(pack(p, q), num_predicates_).first;
  auto& slot = it->second;
  bool all_empty = true;
  for (std::size_t r = 0; r < num_predicates_; ++r) {
    Tally& t = slot[r];
    (edge[r] ? t.ones : t.zeros) += delta;
    all_empty = all_empty && t.empty();
  }
  if (all_empty) pairs_.erase(it);
}

Tally RelationCounts::get(const SiblingKey& key) const {
  auto it = pairs_.find(pack(key.from, key.to));
  if (it == pairs_.end() || key.predicate >= num_predicates_) return {};
  return it->second[key.predicate];
}

const std::vector<Tally>* RelationCounts::find(CommunityId p, CommunityId q) const {
  auto it = pairs_.find(pack(p, q));
  return it == pairs_.end() ? nullptr : &it->second;
}

std::vector<Tally>& RelationCounts::raw_slot(CommunityId p, CommunityId q) {
  return pairs_.try_emplace(pack(p, q), num_predicates_).first->second;
}

bool RelationCounts::operator==(const RelationCounts& o) const {
  return num_predicates_ == o.num_predicates_ && pairs_ == o.pairs_;
}

// --- likelihood kernels

double path_log_likelihood_delta(const RelationCounts& base, const RelationCounts& contrib,
                                 double lambda, double eta) {
  double total = 0;
  for (const auto& [key, tallies] : contrib.pairs()) {
    const auto* b = base.find(RelationCounts::unpack_from(key), RelationCounts::unpack_to(key));
    for (std::size_t r = 0; r < tallies.size(); ++r) {
      const Tally& c = tallies[r];
      if (c.empty()) continue;
      const double b1 = b ? static_cast<double>((*b)[r].ones) : 0.0;
      const double b0 = b ? static_cast<double>((*b)[r].zeros) : 0.0;
      total += log_beta_fn(b1 + static_cast<double>(c.ones) + lambda, b0 + static_cast<double>(c.zeros) + eta) -
               log_beta_fn(b1 + lambda, b0 + eta);
    }
  }
  return total;
}

double log_level_likelihood(std::span<const std::uint8_t> g, std::span<const Tally> counts_minus,
                            double lambda, double eta) {
  if (g.size() != counts_minus.size()) throw ArgumentError("level_likelihood: size mismatch");
  double total = 0;
  for (std::size_t r = 0; r < g.size(); ++r) {
    const double ones = static_cast<double>(counts_minus[r].ones);
    const double zeros = static_cast<double>(counts_minus[r].zeros);
    if (ones < 0 || zeros < 0) throw ArgumentError("level_likelihood: negative count");
    total += std::log((g[r] ? ones + lambda : zeros + eta) / (ones + zeros + lambda + eta));
  }
  return total;
}

double level_likelihood(std::span<const std::uint8_t> g, std::span<const Tally> counts_minus,
                        double lambda, double eta) {
  return std::exp(log_level_likelihood(g, counts_minus, lambda, eta));
}

std::vector<double> stick_level_prior(std::span<const std::int64_t> hist, double mu, double sigma, int depth) {
  if (!(mu > 0 && mu < 1) || !(sigma > 0)) throw ArgumentError("stick_level_prior: mu in (0,1), sigma > 0");
  if (depth < 1 || hist.size() != static_cast<std::size_t>(depth)) {
    throw ArgumentError("stick_level_prior: histogram size must equal depth");
  }
  const double a = mu * sigma;
  const double b = (1 - mu) * sigma;
  std::vector<double> deeper(depth, 0.0);
  double acc = 0;
  for (int l = depth - 1; l >= 0; --l) {
    if (hist[l] < 0) throw ArgumentError("stick_level_prior: negative count");
    deeper[l] = acc;
    acc += static_cast<double>(hist[l]);
  }
  std::vector<double> p(depth);
  double reach = 1;
  double total = 0;
  for (int l = 0; l < depth; ++l) {
    const double n = static_cast<double>(hist[l]);
    const double denom = sigma + n + deeper[l];
    p[l] = reach * (a + n) / denom;
    reach *= (b + deeper[l]) / denom;
    total += p[l];
  }
  for (auto& x : p) x /= total;
  return p;
}

std::vector<double> dirichlet_level_prior(std::span<const std::int64_t> hist, std::span<const double> alpha) {
  if (hist.size() != alpha.size() || hist.empty()) throw ArgumentError("dirichlet_level_prior: size mismatch");
  std::vector<double> p(hist.size());
  double total = 0;
  for (std::size_t l = 0; l < hist.size(); ++l) {
    if (!(alpha[l] > 0)) throw ArgumentError("dirichlet_level_prior: alpha must be > 0");
    if (hist[l] < 0) throw ArgumentError("dirichlet_level_prior: negative count");
    p[l] = alpha[l] + static_cast<double>(hist[l]);
    total += p[l];
  }
  for (auto& x : p) x /= total;
  return p;
}

// --- nCRP

std::vector<PathCandidate> ncrp_path_prior(const Hierarchy& h, double gamma, const Path* excluded) {
  if (!(gamma > 0)) throw ArgumentError("ncrp_path_prior: gamma must be > 0");
  const int depth = h.depth();
  auto count = [&](const Community& c) -> double {
    double n = static_cast<double>(c.pass_count);
    if (excluded && (c.id == kRootId || excluded->at_level(c.level) == c.id)) n -= 1;
    return n;
  };

  std::vector<PathCandidate> out;
  std::vector<CommunityId> prefix;
  auto visit = [&](auto&& self, const Community& c, double log_p) -> void {
    if (c.level == depth) {
      out.push_back({BranchSpec{prefix}, log_p});
      return;
    }
    const double n = count(c);
    const double denom = std::log(n + gamma);
    out.push_back({BranchSpec{prefix}, log_p + std::log(gamma) - denom});
    for (auto ch : c.children) {
      const Community& child = h.node(ch);
      const double nc = count(child);
      if (nc <= 0) continue;
      prefix.push_back(ch);
      self(self, child, log_p + std::log(nc) - denom);
      prefix.pop_back();
    }
  };
  visit(visit, h.root(), 0.0);
  return out;
}

double ncrp_log_prob(const Hierarchy& h, double gamma) {
  if (!(gamma > 0)) throw ArgumentError("ncrp_log_prob: gamma must be > 0");
  const double lg_gamma = std::lgamma(gamma);
  const double log_gamma = std::log(gamma);
  double total = 0;
  for (const auto& [id, c] : h.nodes()) {
    if (c.level == h.depth() || c.children.empty()) continue;
    total += lg_gamma - std::lgamma(static_cast<double>(c.pass_count) + gamma);
    for (auto ch : c.children) {
      total += log_gamma + std::lgamma(static_cast<double>(h.node(ch).pass_count));
    }
  }
  return total;
}

// --- LevelCounts

LevelCounts::LevelCounts(std::size_t num_entities, int depth)
    : num_entities_(num_entities),
      depth_(depth),
      hist_(num_entities * static_cast<std::size_t>(depth), 0),
      sender_totals_(depth, 0),
      receiver_totals_(depth, 0) {
  if (depth < 1) throw ArgumentError("LevelCounts: depth must be >= 1");
}

void LevelCounts::add(std::size_t entity, int level, Direction dir, std::int64_t delta) {
  if (entity >= num_entities_ || level < 1 || level > depth_) throw ArgumentError("LevelCounts: out of range");
  hist_[entity * depth_ + (level - 1)] += delta;
  (dir == Direction::kSender ? sender_totals_ : receiver_totals_)[level - 1] += delta;
}

// --- collapsed indicator terms

double stick_truncation_log_mass(double mu, double sigma, int depth, std::int64_t n) {
  if (!(mu > 0 && mu < 1) || !(sigma > 0) || depth < 1 || n < 0) {
    throw ArgumentError("stick_truncation_log_mass: bad arguments");
  }
  const double a = mu * sigma;
  const double b = (1 - mu) * sigma;
  const double lb0 = log_beta_fn(a, b);
  const auto size = static_cast<std::size_t>(n) + 1;
  std::vector<double> lfact(size);
  for (std::size_t m = 0; m < size; ++m) lfact[m] = std::lgamma(static_cast<double>(m) + 1);

  // f[m] = log P(m indicators that reach level l all stop at or above depth)
  std::vector<double> f(size);
  for (std::size_t m = 0; m < size; ++m) f[m] = log_beta_fn(a + static_cast<double>(m), b) - lb0;
  std::vector<double> next(size);
  std::vector<double> terms;
  for (int l = depth - 1; l >= 1; --l) {
    for (std::size_t m = 0; m < size; ++m) {
      terms.assign(m + 1, 0.0);
      for (std::size_t k = 0; k <= m; ++k) {
        terms[k] = lfact[m] - lfact[k] - lfact[m - k] +
                   log_beta_fn(a + static_cast<double>(m - k), b + static_cast<double>(k)) - lb0 + f[k];
      }
      next[m] = log_sum_exp(terms);
    }
    f.swap(next);
  }
  return f[static_cast<std::size_t>(n)];
}

double stick_histogram_log_prob(std::span<const std::int64_t> hist, double mu, double sigma, double log_mass) {
  const double a = mu * sigma;
  const double b = (1 - mu) * sigma;
  const double lb0 = log_beta_fn(a, b);
  double deeper = 0;
  double total = 0;
  for (std::size_t l = hist.size(); l-- > 0;) {
    const double n = static_cast<double>(hist[l]);
    total += log_beta_fn(a + n, b + deeper) - lb0;
    deeper += n;
  }
  return total - log_mass;
}

double dirichlet_histogram_log_prob(std::span<const std::int64_t> hist, std::span<const double> alpha) {
  if (hist.size() != alpha.size()) throw ArgumentError("dirichlet_histogram_log_prob: size mismatch");
  double a_sum = 0;
  double n_sum = 0;
  double total = 0;
  for (std::size_t l = 0; l < hist.size(); ++l) {
    const double n = static_cast<double>(hist[l]);
    total += std::lgamma(alpha[l] + n) - std::lgamma(alpha[l]);
    a_sum += alpha[l];
    n_sum += n;
  }
  return total + std::lgamma(a_sum) - std::lgamma(a_sum + n_sum);
}

// --- hyperparameters

void Hyperparameters::validate() const {
  if (!(gamma > 0)) throw ConfigError("model.gamma", "must be > 0");
  if (!(mu > 0 && mu < 1)) throw ConfigError("model.mu", "must lie in (0, 1)");
  if (!(sigma > 0)) throw ConfigError("model.sigma", "must be > 0");
  if (!(lambda > 0)) throw ConfigError("model.lambda", "must be > 0");
  if (!(eta > 0)) throw ConfigError("model.eta", "must be > 0");
  if (depth < 1) throw ConfigError("model.depth", "must be >= 1");
  if (mode == LevelPriorMode::kDirichlet) {
    if (alpha.size() != static_cast<std::size_t>(depth)) {
      throw ConfigError("model.alpha", "needs one entry per level (" + std::to_string(depth) + ")");
    }
    for (double a : alpha) {
      if (!(a > 0)) throw ConfigError("model.alpha", "entries must be > 0");
    }
  }
  const Schedule& s = schedule;
  if (s.iterations < 1) throw ConfigError("schedule.iterations", "must be >= 1");
  if (s.burn_in < 0) throw ConfigError("schedule.burn_in", "must be >= 0");
  if (s.lag < 1) throw ConfigError("schedule.lag", "must be >= 1");
  if (s.final_samples < 1) throw ConfigError("schedule.final_samples", "must be >= 1");
  if (s.chains < 1) throw ConfigError("schedule.chains", "must be >= 1");
  if (static_cast<long long>(s.burn_in) + static_cast<long long>(s.lag) * s.final_samples > s.iterations) {
    throw ConfigError("schedule.burn_in",
                      "burn_in + lag * final_samples must not exceed iterations (" +
                          std::to_string(s.burn_in) + " + " + std::to_string(s.lag) + " * " +
                          std::to_string(s.final_samples) + " > " + std::to_string(s.iterations) + ")");
  }
}

std::string to_string(LevelPriorMode m) {
  return m == LevelPriorMode::kStick ? "stick" : "dirichlet";
}

LevelPriorMode level_prior_mode_from_string(const std::string& s) {
  if (s == "stick") return LevelPriorMode::kStick;
  if (s == "dirichlet") return LevelPriorMode::kDirichlet;
  throw ConfigError("model.level_prior_mode", "expected 'stick' or 'dirichlet', got '" + s + "'");
}

}  // namespace hbm
