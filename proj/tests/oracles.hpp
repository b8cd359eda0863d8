#pragma once

// Reference computations written without the library's count tables. They are
// slow on purpose: plain loops over every pair and every entity.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <utility>
#include <vector>

namespace oracle {

inline double lbeta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Log of the integral of exp(log_f) over [0,1]. Trapezoid rule on n+1 points
// after the tanh-sinh substitution c = (1 + tanh(pi/2 sinh t)) / 2, which
// copes with the endpoint behaviour of Beta kernels near shape 1.
inline double log_integral01(const std::function<double(double)>& log_f, int n = 10000) {
  const double T = 3.0, h = 2 * T / n, pi = std::acos(-1.0);
  std::vector<double> v(n + 1);
  double mx = -INFINITY;
  for (int k = 0; k <= n; ++k) {
    const double t = -T + h * k;
    const double u = pi / 2 * std::sinh(t);
    const double c = 1 / (1 + std::exp(-2 * u));
    const double log_cosh_u = std::abs(u) + std::log1p(std::exp(-2 * std::abs(u))) - std::log(2.0);
    const double log_w = std::log(pi / 4) + std::log(std::cosh(t)) - 2 * log_cosh_u;
    v[k] = (c > 0 && c < 1) ? log_f(c) + log_w : -INFINITY;
    mx = std::max(mx, v[k]);
  }
  double s = 0;
  for (int k = 0; k <= n; ++k)
    if (std::isfinite(v[k])) s += (k == 0 || k == n ? 0.5 : 1.0) * std::exp(v[k] - mx);
  return mx + std::log(s * h);
}

// log of c^(a-1) (1-c)^(b-1), -inf at an endpoint where it vanishes
inline double log_beta_kernel(double c, double a, double b) {
  double out = 0;
  if (a != 1) out += c > 0 ? (a - 1) * std::log(c) : (a > 1 ? -INFINITY : INFINITY);
  if (b != 1) out += c < 1 ? (b - 1) * std::log1p(-c) : (b > 1 ? -INFINITY : INFINITY);
  return out;
}

struct Assignment {
  int depth = 1;
  int n = 0;
  int r = 0;
  // labels[i][l-1]; equal prefixes mean the same community
  std::vector<std::vector<int>> labels;
  std::vector<int> sender;    // z_{i->j}
  std::vector<int> receiver;  // z_{i<-j}
  std::vector<std::uint8_t> g;  // g[(i*n+j)*r + k]
};

using Prefix = std::vector<int>;

inline Prefix prefix_of(const Assignment& a, int i, int l) {
  return Prefix(a.labels[i].begin(), a.labels[i].begin() + l);
}

// The pair's coarsened communities as prefixes: go down while the paths agree,
// stopping at the shallower indicated level.
inline std::pair<Prefix, Prefix> route(const Assignment& a, int i, int j) {
  const int zi = a.sender[i * a.n + j];
  const int zj = a.receiver[i * a.n + j];
  int l = 1;
  while (l < std::min(zi, zj) && a.labels[i][l - 1] == a.labels[j][l - 1]) ++l;
  return {prefix_of(a, i, l), prefix_of(a, j, l)};
}

inline double relation_term(const Assignment& a, double lambda, double eta) {
  std::map<std::tuple<Prefix, Prefix, int>, std::pair<int, int>> tally;
  for (int i = 0; i < a.n; ++i) {
    for (int j = 0; j < a.n; ++j) {
      const auto [p, q] = route(a, i, j);
      for (int k = 0; k < a.r; ++k) {
        auto& t = tally[{p, q, k}];
        (a.g[(i * a.n + j) * a.r + k] ? t.first : t.second) += 1;
      }
    }
  }
  double out = 0;
  for (const auto& [key, t] : tally) out += lbeta(t.first + lambda, t.second + eta) - lbeta(lambda, eta);
  return out;
}

// Seats entities one at a time, multiplying the nested CRP factors.
inline double ncrp_term(const Assignment& a, double gamma) {
  std::map<Prefix, int> count;
  double out = 0;
  for (int i = 0; i < a.n; ++i) {
    bool fresh = false;
    for (int l = 1; l <= a.depth && !fresh; ++l) {
      const Prefix parent = prefix_of(a, i, l - 1);
      const Prefix self = prefix_of(a, i, l);
      const double np = i == 0 && l == 1 ? 0 : count[parent];
      const double nc = count.count(self) ? count[self] : 0;
      if (nc > 0) {
        out += std::log(nc / (np + gamma));
      } else {
        out += std::log(gamma / (np + gamma));
        fresh = true;
      }
    }
    count[Prefix{}] += 1;
    for (int l = 1; l <= a.depth; ++l) count[prefix_of(a, i, l)] += 1;
  }
  return out;
}

// Owned indicators of entity e in a fixed order: sender side then receiver side.
inline std::vector<int> owned_levels(const Assignment& a, int e) {
  std::vector<int> z;
  for (int j = 0; j < a.n; ++j) z.push_back(a.sender[e * a.n + j]);
  for (int j = 0; j < a.n; ++j) z.push_back(a.receiver[j * a.n + e]);
  return z;
}

// P(every one of m indicators stops at a level <= depth), by inclusion-exclusion
// over E[prod (1-v)^k]. Fine for small m only.
inline double stick_mass(double mu, double sigma, int depth, int m) {
  const double a = mu * sigma;
  const double b = (1 - mu) * sigma;
  long double s = 0;
  for (int k = 0; k <= m; ++k) {
    const long double binom = std::exp(std::lgamma(m + 1.0) - std::lgamma(k + 1.0) - std::lgamma(m - k + 1.0));
    const long double pass = std::exp(depth * (lbeta(a, b + k) - lbeta(a, b)));
    s += (k % 2 ? -1 : 1) * binom * pass;
  }
  return static_cast<double>(s);
}

// Sequential untruncated urn over one entity's indicators, conditioned on
// staying within depth.
inline double stick_term(const Assignment& a, double mu, double sigma) {
  double out = 0;
  for (int e = 0; e < a.n; ++e) {
    std::vector<double> at(a.depth + 1, 0), deeper(a.depth + 1, 0);
    double lp = 0;
    for (int z : owned_levels(a, e)) {
      double reach = 1;
      for (int k = 1; k < z; ++k) reach *= ((1 - mu) * sigma + deeper[k]) / (sigma + at[k] + deeper[k]);
      lp += std::log(reach * (mu * sigma + at[z]) / (sigma + at[z] + deeper[z]));
      at[z] += 1;
      for (int k = 1; k < z; ++k) deeper[k] += 1;
    }
    out += lp - std::log(stick_mass(mu, sigma, a.depth, 2 * a.n));
  }
  return out;
}

inline double dirichlet_term(const Assignment& a, const std::vector<double>& alpha) {
  double out = 0;
  double asum = 0;
  for (double x : alpha) asum += x;
  for (int e = 0; e < a.n; ++e) {
    std::vector<double> at(a.depth + 1, 0);
    double seen = 0;
    for (int z : owned_levels(a, e)) {
      out += std::log((alpha[z - 1] + at[z]) / (asum + seen));
      at[z] += 1;
      seen += 1;
    }
  }
  return out;
}

// Pair counting over all i<j, Hubert-Arabie form.
inline double ari_pairs(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  double n11 = 0, n10 = 0, n01 = 0, n00 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const bool sa = a[i] == a[j], sb = b[i] == b[j];
      if (sa && sb) n11 += 1;
      else if (sa) n10 += 1;
      else if (sb) n01 += 1;
      else n00 += 1;
    }
  }
  const double den = (n00 + n01) * (n01 + n11) + (n00 + n10) * (n10 + n11);
  if (den == 0) return 1.0;
  return 2 * (n00 * n11 - n01 * n10) / den;
}

inline double nmi_table(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  const std::size_t ka = *std::max_element(a.begin(), a.end()) + 1;
  const std::size_t kb = *std::max_element(b.begin(), b.end()) + 1;
  std::vector<double> t(ka * kb, 0), ra(ka, 0), cb(kb, 0);
  const double n = static_cast<double>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    t[a[i] * kb + b[i]] += 1;
    ra[a[i]] += 1;
    cb[b[i]] += 1;
  }
  double ha = 0, hb = 0, mi = 0;
  for (double x : ra)
    if (x > 0) ha -= x / n * std::log(x / n);
  for (double x : cb)
    if (x > 0) hb -= x / n * std::log(x / n);
  for (std::size_t x = 0; x < ka; ++x)
    for (std::size_t y = 0; y < kb; ++y)
      if (t[x * kb + y] > 0) mi += t[x * kb + y] / n * std::log(t[x * kb + y] * n / (ra[x] * cb[y]));
  if (ha == 0 && hb == 0) return 0.0;
  return mi / ((ha + hb) / 2);
}

// All set partitions of n items as restricted growth strings.
inline std::vector<std::vector<std::size_t>> all_partitions(std::size_t n) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur(n, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t blocks) {
    if (i == n) {
      out.push_back(cur);
      return;
    }
    for (std::size_t b = 0; b <= blocks; ++b) {
      cur[i] = b;
      rec(i + 1, std::max(blocks, b + 1));
    }
  };
  if (n == 0) return {{}};
  cur[0] = 0;
  rec(1, 1);
  return out;
}

}  // namespace oracle
