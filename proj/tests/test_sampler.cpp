#include <cmath>
#include <random>

#include "brute_force.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "hbm/errors.hpp"
#include "hbm/sampler.hpp"
#include "hbm/synth.hpp"

using namespace hbm;
using doctest::Approx;

namespace {

KnowledgeGraph random_graph(std::mt19937_64& rng, int n, int r, double density) {
  KnowledgeGraph kg;
  for (int i = 0; i < n; ++i) kg.add_entity("x" + std::to_string(i));
  for (int k = 0; k < r; ++k) kg.add_predicate("p" + std::to_string(k));
  std::bernoulli_distribution coin(density);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < r; ++k)
        if (coin(rng)) kg.add_triple(Triple{EntityId(i), EntityId(j), PredicateId(k)});
  return kg;
}

Hyperparameters random_hyper(std::mt19937_64& rng, int depth) {
  std::uniform_real_distribution<double> u(0.2, 3.0);
  Hyperparameters h;
  h.depth = depth;
  h.gamma = u(rng);
  h.mu = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
  h.sigma = u(rng);
  h.lambda = u(rng);
  h.eta = u(rng);
  if (rng() % 4 == 0) {
    h.mode = LevelPriorMode::kDirichlet;
    for (int l = 0; l < depth; ++l) h.alpha.push_back(u(rng));
  }
  return h;
}

std::vector<double> ones(std::size_t n) { return std::vector<double>(n, 1.0); }

void require_audit(const SamplerState& s) {
  const auto rep = audit_counts(s);
  INFO(rep.first_discrepancy);
  REQUIRE(rep.ok);
}

}  // namespace

TEST_CASE("init: single entity") {
  KnowledgeGraph kg;
  kg.add_triple("a", "p", "a");
  Hyperparameters h;
  h.depth = 2;
  const auto s = init_state(kg, h, 1);
  CHECK(s.paths.size() == 1);
  CHECK(s.sender.size() == 1);
  CHECK(s.receiver.size() == 1);
  CHECK(s.h.size() == 3);
  require_audit(s);
}

TEST_CASE("init: tiny gamma puts everyone on one path") {
  std::mt19937_64 rng(1);
  const auto kg = random_graph(rng, 12, 1, 0.3);
  Hyperparameters h;
  h.gamma = 1e-12;
  h.depth = 3;
  const auto s = init_state(kg, h, 2);
  for (const auto& p : s.paths) CHECK(p == s.paths[0]);
  require_audit(s);
}

TEST_CASE("init: audit passes on random graphs") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    const auto kg = random_graph(rng, 2 + t % 7, 1 + t % 3, 0.25);
    const auto s = init_state(kg, random_hyper(rng, 1 + t % 4), t);
    require_audit(s);
    for (std::size_t e = 0; e < s.num_entities(); ++e) {
      std::int64_t total = 0;
      for (auto x : s.level_counts.row(e)) total += x;
      CHECK(total == static_cast<std::int64_t>(2 * s.num_entities()));
    }
  }
}

TEST_CASE("from_assignment rejects bad shapes") {
  std::mt19937_64 rng(3);
  const auto kg = random_graph(rng, 2, 1, 0.5);
  Hyperparameters h;
  h.depth = 2;
  CHECK_THROWS_AS(from_assignment(kg, h, {{0, 0}}, {1, 1, 1, 1}, {1, 1, 1, 1}), ArgumentError);
  CHECK_THROWS_AS(from_assignment(kg, h, {{0, 0}, {0}}, {1, 1, 1, 1}, {1, 1, 1, 1}), ArgumentError);
  CHECK_THROWS_AS(from_assignment(kg, h, {{0, 0}, {0, 1}}, {1, 3, 1, 1}, {1, 1, 1, 1}), ArgumentError);
}

TEST_CASE("level indicator with one level never moves") {
  std::mt19937_64 rng(4);
  const auto kg = random_graph(rng, 3, 2, 0.5);
  Hyperparameters h;
  h.depth = 1;
  auto s = init_state(kg, h, 5);
  const auto cond = level_conditional(s, 0, 1, Direction::kSender);
  REQUIRE(cond.size() == 1);
  CHECK(cond[0] == 1.0);
  const auto before = s.relation_counts;
  for (int k = 0; k < 20; ++k) sample_level_indicator(s, k % 3, (k + 1) % 3, Direction::kReceiver);
  CHECK(s.relation_counts == before);
  CHECK(std::all_of(s.sender.begin(), s.sender.end(), [](int z) { return z == 1; }));
}

TEST_CASE("level indicator draws follow the exact conditional") {
  // two entities on one path, complete graph: the leaf key is heavily loaded
  KnowledgeGraph kg;
  for (const char* a : {"u", "v"})
    for (const char* b : {"u", "v"}) kg.add_triple(a, "p", b);
  Hyperparameters h;
  h.depth = 3;
  auto s = from_assignment(kg, h, {{0, 0, 0}, {0, 0, 0}}, {3, 3, 3, 2}, {3, 3, 1, 3}, 6);
  const auto cond = level_conditional(s, 0, 1, Direction::kSender);
  CHECK(oracle::level_conditional_error(s, 0, 1, Direction::kSender) < 1e-9);
  std::vector<double> hits(3, 0);
  const int trials = 100000;
  for (int t = 0; t < trials; ++t) {
    sample_level_indicator(s, 0, 1, Direction::kSender);
    hits[s.sender[1] - 1] += 1;
  }
  for (int l = 0; l < 3; ++l) {
    const double se = std::sqrt(cond[l] * (1 - cond[l]) / trials);
    CHECK(std::abs(hits[l] / trials - cond[l]) <= 3 * se + 1e-12);
  }
  require_audit(s);
}

TEST_CASE("level conditional matches enumeration of the joint on a 3-entity graph") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 30; ++t) {
    const auto kg = random_graph(rng, 3, 1 + t % 2, 0.4);
    const auto h = random_hyper(rng, 2 + t % 2);
    auto s = init_state(kg, h, t);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        for (auto dir : {Direction::kSender, Direction::kReceiver})
          CHECK(oracle::level_conditional_error(s, i, j, dir) < 1e-9);
  }
}

TEST_CASE("path posterior matches enumeration of the joint on a 3-entity graph") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 30; ++t) {
    const auto kg = random_graph(rng, 3, 1, 0.4);
    const auto h = random_hyper(rng, 2);
    auto s = init_state(kg, h, 100 + t);
    for (int sweep = 0; sweep < 3; ++sweep) {
      for (std::size_t i = 0; i < 3; ++i) {
        CHECK(oracle::path_posterior_error(s, i) < 1e-9);
        sample_path(s, i);
        require_audit(s);
      }
    }
  }
}

TEST_CASE("path posterior for a lone entity is the prior") {
  KnowledgeGraph kg;
  kg.add_triple("a", "p", "a");
  Hyperparameters h;
  h.depth = 1;
  auto s = init_state(kg, h, 1);
  const auto c = path_posterior(s, 0);
  REQUIRE(c.size() == 1);
  CHECK(c[0].log_prob == Approx(0));
  sample_path(s, 0);
  require_audit(s);
}

TEST_CASE("path posterior leaves the state untouched") {
  std::mt19937_64 rng(9);
  const auto kg = random_graph(rng, 6, 2, 0.3);
  auto s = init_state(kg, random_hyper(rng, 3), 9);
  const auto rc = s.relation_counts;
  const auto tree = s.h.to_json();
  for (std::size_t i = 0; i < 6; ++i) path_posterior(s, i);
  CHECK(s.relation_counts == rc);
  CHECK(s.h.to_json() == tree);
}

TEST_CASE("property: audit passes after randomized interleavings") {
  std::mt19937_64 rng(10);
  for (int t = 0; t < 10; ++t) {
    const int n = 3 + t % 6;
    const auto kg = random_graph(rng, n, 1 + t % 3, 0.3);
    auto s = init_state(kg, random_hyper(rng, 1 + t % 4), t);
    for (int step = 0; step < 200; ++step) {
      const std::size_t i = rng() % n, j = rng() % n;
      switch (rng() % 3) {
        case 0: sample_level_indicator(s, i, j, Direction::kSender); break;
        case 1: sample_level_indicator(s, i, j, Direction::kReceiver); break;
        default: sample_path(s, i); break;
      }
      if (step % 20 == 0) require_audit(s);
    }
    require_audit(s);
  }
}

TEST_CASE("audit catches injected faults") {
  std::mt19937_64 rng(11);
  const auto kg = random_graph(rng, 4, 2, 0.5);
  Hyperparameters h;
  h.depth = 2;
  auto s = init_state(kg, h, 3);
  require_audit(s);
  const auto key = s.relation_counts.pairs().begin()->first;
  const auto p = RelationCounts::unpack_from(key), q = RelationCounts::unpack_to(key);
  s.relation_counts.raw_slot(p, q)[0].ones += 1;
  auto rep = audit_counts(s);
  CHECK_FALSE(rep.ok);
  CHECK(rep.first_discrepancy.find("(" + std::to_string(p) + ", " + std::to_string(q) + ", 0)") !=
        std::string::npos);
  s.relation_counts.raw_slot(p, q)[0].ones -= 1;
  require_audit(s);
  s.level_counts.raw()[0] += 1;
  CHECK_FALSE(audit_counts(s).ok);
}

TEST_CASE("gibbs iteration: full resampling and zero gates") {
  std::mt19937_64 rng(12);
  const auto kg = random_graph(rng, 5, 1, 0.3);
  auto s = init_state(kg, random_hyper(rng, 3), 4);
  for (int t = 0; t < 3; ++t) gibbs_iteration(s, ones(5));
  for (std::size_t e = 0; e < 5; ++e) {
    CHECK(s.path_draws[e] == 3);
    CHECK(s.level_draws[e] == 3 * 10);
  }
  CHECK(s.iter == 3);
  require_audit(s);

  const auto tree = s.h.to_json();
  const auto sender = s.sender;
  const std::vector<double> zeros(5, 0.0);
  gibbs_iteration(s, zeros);
  CHECK(s.h.to_json() == tree);
  CHECK(s.sender == sender);
  CHECK(s.path_draws[0] == 3);
  CHECK_THROWS_AS(gibbs_iteration(s, ones(4)), ArgumentError);
}

TEST_CASE("gibbs iteration: per-entity resample rate follows s_i") {
  std::mt19937_64 rng(13);
  const auto kg = random_graph(rng, 4, 1, 0.4);
  Hyperparameters h;
  h.depth = 2;
  auto s = init_state(kg, h, 5);
  const std::vector<double> prob{0.1, 0.25, 0.6, 1.0};
  const int iters = 4000;
  for (int t = 0; t < iters; ++t) gibbs_iteration(s, prob);
  for (std::size_t e = 0; e < 4; ++e) {
    const double p = prob[e];
    const double se_path = std::sqrt(p * (1 - p) / iters);
    CHECK(std::abs(static_cast<double>(s.path_draws[e]) / iters - p) <= 3 * se_path + 1e-12);
    const double trials = iters * 8.0;
    const double se_lvl = std::sqrt(p * (1 - p) / trials);
    CHECK(std::abs(static_cast<double>(s.level_draws[e]) / trials - p) <= 3 * se_lvl + 1e-12);
  }
  require_audit(s);
}

TEST_CASE("degree-table overload") {
  std::mt19937_64 rng(14);
  const auto kg = random_graph(rng, 6, 2, 0.3);
  auto s = init_state(kg, random_hyper(rng, 2), 6);
  const auto deg = degree_table(kg);
  for (int t = 0; t < 5; ++t) gibbs_iteration(s, deg);
  require_audit(s);
}

TEST_CASE("complete log-likelihood: one entity, empty graph, one level") {
  KnowledgeGraph kg;
  kg.add_entity("a");
  kg.add_predicate("p");
  kg.add_predicate("q");
  Hyperparameters h;
  h.depth = 1;
  h.lambda = 2;
  h.eta = 3;
  const auto s = init_state(kg, h, 1);
  const auto t = likelihood_terms(s);
  CHECK(t.paths == Approx(0));
  CHECK(t.levels == Approx(0));
  CHECK(t.relations == Approx(2 * (log_beta_fn(2, 4) - log_beta_fn(2, 3))));
}

TEST_CASE("complete log-likelihood equals from-scratch recomputation") {
  std::mt19937_64 rng(15);
  for (int t = 0; t < 60; ++t) {
    const auto kg = random_graph(rng, 4, 1 + t % 2, 0.35);
    const auto h = random_hyper(rng, 1 + t % 3);
    auto s = init_state(kg, h, t);
    for (int k = 0; k < t % 4; ++k) gibbs_iteration(s, ones(4));
    const auto a = oracle::from_state(s);
    const auto terms = likelihood_terms(s);
    CHECK(terms.relations == Approx(oracle::relation_term(a, h.lambda, h.eta)).epsilon(1e-12));
    CHECK(terms.paths == Approx(oracle::ncrp_term(a, h.gamma)).epsilon(1e-12));
    CHECK(std::abs(complete_log_likelihood(s) - oracle::joint(a, h)) < 1e-9);
  }
}

TEST_CASE("complete log-likelihood ignores community ids") {
  std::mt19937_64 rng(16);
  const auto kg = random_graph(rng, 4, 2, 0.4);
  Hyperparameters h;
  h.depth = 2;
  const std::vector<int> zs{1, 2, 2, 1, 2, 2, 1, 1, 2, 1, 2, 2, 1, 1, 1, 2};
  const std::vector<int> zr{2, 2, 1, 1, 1, 2, 2, 1, 2, 1, 1, 2, 2, 1, 2, 2};
  const auto a = from_assignment(kg, h, {{0, 0}, {0, 1}, {1, 0}, {0, 0}}, zs, zr);
  // same partition, labels permuted and a different creation order
  const auto b = from_assignment(kg, h, {{7, 3}, {7, 9}, {2, 8}, {7, 3}}, zs, zr);
  auto c_labels = std::vector<std::vector<int>>{{5, 5}, {5, 4}, {6, 6}, {5, 5}};
  const auto c = from_assignment(kg, h, c_labels, zs, zr);
  CHECK(complete_log_likelihood(a) == Approx(complete_log_likelihood(b)).epsilon(1e-14));
  CHECK(complete_log_likelihood(a) == Approx(complete_log_likelihood(c)).epsilon(1e-14));
}

TEST_CASE("entity level mode") {
  KnowledgeGraph kg;
  kg.add_triple("a", "p", "a");
  Hyperparameters h;
  h.depth = 3;
  CHECK(entity_level_mode(from_assignment(kg, h, {{0, 0, 0}}, {2}, {2}), 0) == 2);
  CHECK(entity_level_mode(from_assignment(kg, h, {{0, 0, 0}}, {1}, {3}), 0) == 1);
  CHECK(entity_level_mode(from_assignment(kg, h, {{0, 0, 0}}, {3}, {1}), 0) == 1);
  kg.add_triple("b", "p", "a");
  // entity a owns sender (a,a),(a,b) and receiver (a,a),(b,a)
  const auto s = from_assignment(kg, h, {{0, 0, 0}, {0, 0, 0}}, {2, 2, 3, 1}, {2, 1, 2, 1});
  CHECK(entity_level_mode(s, 0) == 2);
}

TEST_CASE("recovered relations are posterior means") {
  RelationCounts rc(1);
  rc.add({4, 5, 0}, true, 8);
  rc.add({4, 5, 0}, false, 2);
  rc.raw_slot(6, 6);
  const auto est = recover_community_relations(rc, 1, 1);
  REQUIRE(est.size() == 2);
  CHECK(est[0].key == SiblingKey{4, 5, 0});
  CHECK(est[0].mean == Approx(0.75));
  CHECK(est[1].mean == Approx(0.5));
  const auto est2 = recover_community_relations(rc, 3, 1);
  CHECK(est2[1].mean == Approx(0.75));
}

TEST_CASE("run: schedule arithmetic and trace length") {
  std::mt19937_64 rng(17);
  const auto kg = random_graph(rng, 3, 1, 0.4);
  Hyperparameters h;
  h.depth = 2;
  h.schedule = {4, 0, 1, 2, 1, 1, true};
  auto res = run(kg, h, 3);
  REQUIRE(res.samples.size() == 2);
  CHECK(res.samples[0].iteration == 1);
  CHECK(res.samples[1].iteration == 2);
  CHECK(res.trace.entries.size() == 4);

  h.schedule = Schedule{};
  res = run(kg, h, 3);
  REQUIRE(res.samples.size() == 10);
  CHECK(res.samples.back().iteration == 230);
  CHECK(res.samples.front().iteration == 203);
  CHECK(res.trace.entries.size() == 230);
  for (std::size_t k = 0; k < res.trace.entries.size(); ++k) CHECK(res.trace.entries[k].iteration == int(k) + 1);
}

TEST_CASE("run: identical seeds give identical chains; run_chains offsets seeds") {
  std::mt19937_64 rng(18);
  const auto kg = random_graph(rng, 6, 2, 0.3);
  Hyperparameters h;
  h.depth = 3;
  h.schedule = {12, 6, 2, 3, 3, 40, true};
  const auto a = run(kg, h, 41);
  const auto b = run(kg, h, 41);
  CHECK(a.trace.to_csv() == b.trace.to_csv());
  for (std::size_t k = 0; k < a.samples.size(); ++k) CHECK(a.samples[k].to_json() == b.samples[k].to_json());
  const auto chains = run_chains(kg, h);
  REQUIRE(chains.size() == 3);
  CHECK(chains[1].trace.to_csv() == a.trace.to_csv());
  CHECK(chains[0].trace.to_csv() != a.trace.to_csv());
}

TEST_CASE("trace csv layout") {
  Trace t;
  t.initial = -10.5;
  t.entries = {{1, -9.25}, {2, -8}};
  const auto csv = t.to_csv();
  CHECK(csv == "iter,log_likelihood\n0,-10.5\n1,-9.25\n2,-8\n");
}

TEST_CASE("posterior sample json round trip") {
  std::mt19937_64 rng(19);
  const auto kg = random_graph(rng, 5, 2, 0.3);
  auto s = init_state(kg, random_hyper(rng, 3), 2);
  gibbs_iteration(s, ones(5));
  const auto smp = snapshot(s);
  CHECK(smp.iteration == 1);
  CHECK(smp.log_likelihood == complete_log_likelihood(s));
  const auto j = smp.to_json();
  CHECK(j.contains("entities"));
  CHECK(j["entities"][0].contains("path"));
  CHECK(j["entities"][0].contains("level"));
  const auto back = PosteriorSample::from_json(j);
  CHECK(back.to_json() == j);
  CHECK(back.relation_counts == smp.relation_counts);
  CHECK_THROWS_AS(PosteriorSample::from_json(nlohmann::json::object()), ParseError);
}

TEST_CASE("aggregate: point estimate and consensus") {
  std::mt19937_64 rng(20);
  const auto kg = random_graph(rng, 3, 1, 0.5);
  Hyperparameters h;
  h.depth = 2;
  const std::vector<int> z(9, 2);
  auto s1 = snapshot(from_assignment(kg, h, {{0, 0}, {0, 0}, {1, 0}}, z, z));
  auto s2 = snapshot(from_assignment(kg, h, {{0, 0}, {0, 1}, {1, 0}}, z, z));
  CHECK_THROWS_AS(aggregate({}), ArgumentError);

  const auto one = aggregate({s1});
  CHECK(one.point.to_json() == s1.to_json());
  for (const auto& lvl : one.consensus)
    for (double x : lvl) CHECK((x == 0.0 || x == 1.0));

  const auto same = aggregate({s1, s1});
  CHECK(same.consensus[1][0 * 3 + 1] == 1.0);
  CHECK(same.consensus[0][0 * 3 + 2] == 0.0);

  s1.log_likelihood = -5;
  s2.log_likelihood = -3;
  const auto two = aggregate({s1, s2});
  CHECK(two.point.log_likelihood == -3);
  CHECK(two.consensus[0][0 * 3 + 1] == 1.0);
  CHECK(two.consensus[1][0 * 3 + 1] == 0.5);
  CHECK(two.consensus[1][1 * 3 + 0] == 0.5);
  CHECK(two.consensus[1][1 * 3 + 1] == 1.0);
}
