#include "doctest.h"

#include <cmath>
#include <random>

#include "tical/consistency.hpp"
#include "tical/errors.hpp"
#include "tical/metrics.hpp"

using namespace tical;

namespace {

struct Oracle {
  double war, uar, f1w, f1m;
  std::optional<double> acc2;
};

// Straight counting over the label lists, no confusion-matrix class involved.
Oracle brute(const std::vector<std::size_t>& t, const std::vector<std::size_t>& p, std::size_t k,
             const std::vector<double>& scale) {
  Oracle o{};
  std::size_t correct = 0;
  for (std::size_t i = 0; i < t.size(); ++i) correct += t[i] == p[i];
  o.war = static_cast<double>(correct) / static_cast<double>(t.size());
  double rsum = 0, f1w = 0, f1m = 0;
  std::size_t supported = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t tp = 0, sup = 0, prd = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      tp += t[i] == c && p[i] == c;
      sup += t[i] == c;
      prd += p[i] == c;
    }
    if (sup == 0) continue;
    ++supported;
    const double rec = static_cast<double>(tp) / static_cast<double>(sup);
    const double pre = prd ? static_cast<double>(tp) / static_cast<double>(prd) : 0.0;
    const double f1 = pre + rec > 0 ? 2 * pre * rec / (pre + rec) : 0.0;
    rsum += rec;
    f1w += f1 * static_cast<double>(sup) / static_cast<double>(t.size());
    f1m += f1;
  }
  o.uar = rsum / static_cast<double>(supported);
  o.f1w = f1w;
  o.f1m = f1m / static_cast<double>(supported);
  std::size_t n2 = 0, ok2 = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (scale[t[i]] == 0) continue;
    ++n2;
    ok2 += (scale[t[i]] > 0) == (scale[p[i]] > 0) && scale[p[i]] != 0;
  }
  if (n2) o.acc2 = static_cast<double>(ok2) / static_cast<double>(n2);
  return o;
}

}  // namespace

TEST_CASE("worked UAR example") {
  // confusion [[3,1],[2,4]]
  std::vector<std::size_t> t{0, 0, 0, 0, 1, 1, 1, 1, 1, 1};
  std::vector<std::size_t> p{0, 0, 0, 1, 0, 0, 1, 1, 1, 1};
  const auto m = compute_metrics(t, p, 2, TaskKind::kCategorical, {});
  CHECK(m.war == 0.7);
  CHECK(m.uar == (0.75 + 4.0 / 6.0) / 2.0);
  CHECK(std::abs(m.uar - 0.70833) < 5e-6);
  CHECK_FALSE(m.acc2.has_value());
}

TEST_CASE("perfect predictions") {
  std::vector<std::size_t> t{0, 1, 2, 3, 4, 5, 6, 6};
  const auto m = compute_metrics(t, t, 7, TaskKind::kOrdinal, ordinal_label_scale(7));
  CHECK(m.war == 1.0);
  CHECK(m.uar == 1.0);
  CHECK(m.f1_weighted == 1.0);
  CHECK(m.f1_macro == 1.0);
  CHECK(m.acc2 == 1.0);
}

TEST_CASE("Acc-2 is absent when every true score is neutral") {
  std::vector<std::size_t> t{3, 3, 3}, p{0, 3, 6};
  const auto m = compute_metrics(t, p, 7, TaskKind::kOrdinal, ordinal_label_scale(7));
  CHECK_FALSE(m.acc2.has_value());
  CHECK(format_metrics(m).find("acc2") == std::string::npos);
}

TEST_CASE("Acc-2 counts a neutral prediction as wrong") {
  std::vector<std::size_t> t{0, 6, 5}, p{3, 6, 1};
  const auto m = compute_metrics(t, p, 7, TaskKind::kOrdinal, ordinal_label_scale(7));
  CHECK(*m.acc2 == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("input validation") {
  std::vector<std::size_t> a{0, 1}, b{0};
  CHECK_THROWS_AS(compute_metrics(a, b, 2, TaskKind::kCategorical, {}), InvalidInput);
  CHECK_THROWS_AS(compute_metrics({}, {}, 2, TaskKind::kCategorical, {}), InvalidInput);
  std::vector<std::size_t> c{0, 5};
  CHECK_THROWS_AS(compute_metrics(a, c, 2, TaskKind::kCategorical, {}), InvalidInput);
}

TEST_CASE("record format") {
  std::vector<std::size_t> t{0, 1}, p{0, 0};
  const auto s = format_metrics(compute_metrics(t, p, 2, TaskKind::kCategorical, {}));
  for (const char* key : {"war=", "uar=", "f1_weighted=", "acc_k=", "f1_macro=", "n="})
    CHECK(s.find(key) != std::string::npos);
}

TEST_CASE("property: agrees with brute-force counting on random cases") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 2 + rng() % 7;
    const std::size_t n = 1 + rng() % 200;
    std::vector<std::size_t> t(n), p(n);
    for (auto& x : t) x = rng() % k;
    for (auto& x : p) x = rng() % k;
    const auto scale = ordinal_label_scale(k);
    const auto m = compute_metrics(t, p, k, TaskKind::kOrdinal, scale);
    const auto o = brute(t, p, k, scale);
    CHECK(std::abs(m.war - o.war) <= 1e-12);
    CHECK(m.acc_k == m.war);
    CHECK(std::abs(m.uar - o.uar) <= 1e-12);
    CHECK(std::abs(m.f1_weighted - o.f1w) <= 1e-12);
    CHECK(std::abs(m.f1_macro - o.f1m) <= 1e-12);
    CHECK(m.acc2.has_value() == o.acc2.has_value());
    if (o.acc2) CHECK(std::abs(*m.acc2 - *o.acc2) <= 1e-12);
    ConfusionMatrix cm(t, p, k);
    CHECK(m.war == static_cast<double>(cm.trace()) / static_cast<double>(cm.total()));
    for (double v : {m.war, m.uar, m.f1_weighted, m.f1_macro}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("property: UAR unchanged by duplicating one class") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::size_t> t(50), p(50);
    for (auto& x : t) x = rng() % 4;
    for (auto& x : p) x = rng() % 4;
    auto t2 = t, p2 = p;
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t[i] == 2) {
        t2.push_back(t[i]);
        p2.push_back(p[i]);
      }
    CHECK(compute_metrics(t, p, 4, TaskKind::kCategorical, {}).uar ==
          doctest::Approx(compute_metrics(t2, p2, 4, TaskKind::kCategorical, {}).uar).epsilon(1e-14));
  }
}
