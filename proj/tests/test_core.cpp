#include "doctest.h"

#include "crsom/core.hpp"

#include <set>
#include <vector>

using namespace crsom;

TEST_CASE("grid_distance examples") {
  const GridSpec g{10, 10};
  CHECK(grid_distance(0, 0, g) == 0.0);
  CHECK(grid_distance(0, 3, g) == 9.0);
  CHECK(grid_distance(21, 55, g) == 25.0);
  CHECK_THROWS_AS(grid_distance(0, 100, g), ArgumentError);
  CHECK_THROWS_AS(grid_distance(100, 0, g), ArgumentError);
}

TEST_CASE("grid_distance matches coordinate arithmetic and is a squared metric") {
  const GridSpec g{4, 7};
  for (std::size_t a = 0; a < g.size(); ++a) {
    for (std::size_t b = 0; b < g.size(); ++b) {
      const double dr = double(a / 7) - double(b / 7);
      const double dc = double(a % 7) - double(b % 7);
      CHECK(grid_distance(a, b, g) == dr * dr + dc * dc);
      CHECK(grid_distance(a, b, g) == grid_distance(b, a, g));
      CHECK((grid_distance(a, b, g) == 0.0) == (a == b));
    }
  }
}

TEST_CASE("grid coordinates are a bijection") {
  const GridSpec g{3, 5};
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const auto rc = g.coords(j);
    CHECK(rc.first == j / 5);
    CHECK(rc.second == j % 5);
    CHECK(g.index(rc.first, rc.second) == j);
    seen.insert(rc);
  }
  CHECK(seen.size() == g.size());
  CHECK_THROWS_AS(g.coords(15), ArgumentError);
  CHECK_THROWS_AS(GridSpec({0, 3}).validate(), ArgumentError);
}

TEST_CASE("one_hot examples and argmax round trip") {
  CHECK(one_hot(0, 3) == Vector::Unit(3, 0));
  const Vector v = one_hot(2, 3);
  CHECK(v[0] == 0.0);
  CHECK(v[1] == 0.0);
  CHECK(v[2] == 1.0);
  CHECK_THROWS_AS(one_hot(3, 3), ArgumentError);
  for (std::size_t k = 1; k < 12; ++k) {
    for (std::size_t label = 0; label < k; ++label) {
      const Vector h = one_hot(label, k);
      CHECK(h.sum() == 1.0);
      CHECK(argmax(h) == label);
    }
  }
}

TEST_CASE("argmax picks the lowest index on ties") {
  const std::vector<double> tied{0.3, 0.9, 0.9, 0.1};
  CHECK(argmax(tied) == 1);
  const std::vector<double> out{0.2, 0.9, 0.1};
  CHECK(argmax(out) == 1);
  CHECK_THROWS_AS(argmax(std::span<const double>{}), ArgumentError);
}

TEST_CASE("schedule validation") {
  Schedule s;
  CHECK_NOTHROW(s.validate());
  s.t_end = 0;
  CHECK_THROWS_AS(s.validate(), ArgumentError);
  s = Schedule{};
  s.s_end = 60.0;
  CHECK_THROWS_AS(s.validate(), ArgumentError);
  s = Schedule{};
  s.s_end = 0.0;
  CHECK_THROWS_AS(s.validate(), ArgumentError);
  s = Schedule{};
  s.eta = 0.0;
  CHECK_THROWS_AS(s.validate(), ArgumentError);
}

TEST_CASE("equal seeds give equal streams") {
  RngStream a(42), b(42), c(43);
  bool any_diff = false;
  for (int i = 0; i < 10000; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    any_diff = any_diff || x != c.next_u64();
  }
  CHECK(any_diff);
}

TEST_CASE("stream values are fixed across platforms") {
  // Frozen first outputs of seed 0 and 1; any change to the generator breaks replay.
  RngStream zero(0);
  RngStream one(1);
  const auto z0 = zero.next_u64();
  const auto o0 = one.next_u64();
  CHECK(z0 == 0xE220A8397B1DCDAFULL);
  CHECK(o0 != z0);
}

TEST_CASE("uniform draws stay in range and below() is unbiased enough") {
  RngStream rng(7);
  std::vector<int> counts(6, 0);
  for (int i = 0; i < 60000; ++i) {
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    ++counts[rng.below(6)];
  }
  for (const int c : counts) CHECK(std::abs(c - 10000) < 500);
  CHECK_THROWS_AS(rng.below(0), ArgumentError);
}

TEST_CASE("shuffle is a permutation and seed-determined") {
  std::vector<int> a(50), b(50);
  for (int i = 0; i < 50; ++i) a[i] = b[i] = i;
  RngStream r1(3), r2(3);
  r1.shuffle(std::span<int>(a));
  r2.shuffle(std::span<int>(b));
  CHECK(a == b);
  std::vector<int> sorted = a;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) CHECK(sorted[i] == i);
}

TEST_CASE("derived streams differ by stream id and are stable") {
  CHECK(RngStream::derive(1, 0) == RngStream::derive(1, 0));
  std::set<std::uint64_t> seeds;
  for (std::uint64_t f = 0; f < 100; ++f) seeds.insert(RngStream::derive(1, f));
  CHECK(seeds.size() == 100);
}

TEST_CASE("dataset validation") {
  LabeledDataset d;
  d.name = "t";
  d.num_classes = 2;
  d.features = Matrix::Zero(3, 2);
  d.labels = {0, 1, 1};
  CHECK_NOTHROW(d.validate());
  d.labels = {0, 0, 0};
  CHECK_THROWS_AS(d.validate(), DataError);
  d.labels = {0, 1, 2};
  CHECK_THROWS_AS(d.validate(), DataError);
  d.labels = {0, 1, 1};
  d.features(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(d.validate(), DataError);
}

TEST_CASE("subset keeps order and metadata") {
  LabeledDataset d;
  d.num_classes = 2;
  d.class_names = {"a", "b"};
  d.features.resize(4, 1);
  d.features << 10, 11, 12, 13;
  d.labels = {0, 1, 0, 1};
  const std::vector<std::size_t> idx{3, 0};
  const auto s = d.subset(idx);
  CHECK(s.size() == 2);
  CHECK(s.features(0, 0) == 13);
  CHECK(s.features(1, 0) == 10);
  CHECK(s.labels == std::vector<std::size_t>{1, 0});
  CHECK(s.class_names == d.class_names);
  const std::vector<std::size_t> bad{9};
  CHECK_THROWS_AS(d.subset(bad), ArgumentError);
}
