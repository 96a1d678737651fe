#include <doctest.h>

#include <cmath>

#include "prefpol/envs.hpp"
#include "prefpol/teachers.hpp"
#include "support.hpp"

using namespace prefpol;

namespace {

// Two-episode dataset whose segment return sums are fully controlled.
EpisodeDataset reward_dataset(double per_step_a, double per_step_b, int horizon = 16) {
  EpisodeDataset d;
  d.meta.env = "synthetic";
  d.meta.state_dim = 1;
  d.meta.action_dim = 1;
  d.meta.horizon = horizon;
  d.episodes.resize(2);
  for (int e = 0; e < 2; ++e) {
    auto& tr = d.episodes[e];
    const double r = e == 0 ? per_step_a : per_step_b;
    for (int t = 0; t < horizon; ++t) {
      tr.states.push_back(static_cast<float>(e + t));
      tr.actions.push_back(0.0f);
      tr.true_rewards.push_back(static_cast<float>(r));
    }
  }
  return d;
}

}  // namespace

TEST_CASE("oracle decision rule") {
  SUBCASE("identical segments are equal preference") {
    auto d = reward_dataset(-0.5, -0.5);
    auto a = slice_segment(d, 0, 0, 16);
    CHECK(oracle_label(a, a, 0.0) == 0.5);
  }
  SUBCASE("clear margin prefers the higher return") {
    auto d = reward_dataset(1.0 / 16, 0.0);
    auto a = slice_segment(d, 0, 0, 16);
    auto b = slice_segment(d, 1, 0, 16);
    CHECK(oracle_label(a, b, 0.1) == 0.0);  // first preferred
    CHECK(oracle_label(b, a, 0.1) == 1.0);
  }
  SUBCASE("exact tie with zero threshold is equal") {
    auto d = reward_dataset(0.25, 0.25);
    auto a = slice_segment(d, 0, 0, 16);
    auto b = slice_segment(d, 1, 0, 16);
    CHECK(oracle_label(a, b, 0.0) == 0.5);
  }
}

TEST_CASE("oracle labels depend only on true-reward sums") {
  auto d = reward_dataset(0.5, 0.1);
  auto mutated = d;
  Rng rng(8);
  for (auto& e : mutated.episodes) {
    for (auto& v : e.states) v = static_cast<float>(rng.uniform(-9, 9));
    for (auto& v : e.actions) v = static_cast<float>(rng.uniform(-9, 9));
  }
  for (int start = 0; start <= 8; ++start) {
    auto a0 = slice_segment(d, 0, start, 8);
    auto b0 = slice_segment(d, 1, start, 8);
    auto a1 = slice_segment(mutated, 0, start, 8);
    auto b1 = slice_segment(mutated, 1, start, 8);
    CHECK(oracle_label(a0, b0, 0.2) == oracle_label(a1, b1, 0.2));
  }
}

TEST_CASE("noisy teacher") {
  auto d = reward_dataset(1.0, 0.0);
  auto a = slice_segment(d, 0, 0, 16);
  auto b = slice_segment(d, 1, 0, 16);

  SUBCASE("p_flip = 0 reduces to the oracle") {
    Rng rng(5);
    for (int i = 0; i < 50; ++i)
      CHECK(noisy_label(a, b, 0.1, 0.0, rng) == oracle_label(a, b, 0.1));
  }

  SUBCASE("equal labels are never flipped") {
    auto de = reward_dataset(0.3, 0.3);
    auto ea = slice_segment(de, 0, 0, 16);
    auto eb = slice_segment(de, 1, 0, 16);
    Rng rng(6);
    for (int i = 0; i < 200; ++i)
      CHECK(noisy_label(ea, eb, 0.1, 0.5, rng) == 0.5);
  }

  SUBCASE("flip rate 0.3 yields 70% +/- 2pp oracle agreement over 10k pairs") {
    Rng rng(123);
    int agree = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i)
      agree += noisy_label(a, b, 0.1, 0.3, rng) == 0.0 ? 1 : 0;
    const double acc = static_cast<double>(agree) / n;
    CHECK(acc > 0.68);
    CHECK(acc < 0.72);
  }

  SUBCASE("label symmetry under a fixed rng transcript") {
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
      Rng r1(seed), r2(seed);
      const double y_ab = noisy_label(a, b, 0.1, 0.4, r1);
      const double y_ba = noisy_label(b, a, 0.1, 0.4, r2);
      CHECK(y_ba == 1.0 - y_ab);
    }
  }
}

TEST_CASE("frame selection picks first, middle, last") {
  auto d = reward_dataset(0, 0, 20);
  d.meta.frames_available = true;

  auto idx16 = select_frames(slice_segment(d, 0, 2, 16));
  CHECK(idx16 == std::array<int, 3>{0, 8, 15});

  auto idx1 = select_frames(slice_segment(d, 0, 5, 1));
  CHECK(idx1 == std::array<int, 3>{0, 0, 0});

  auto idx2 = select_frames(slice_segment(d, 0, 5, 2));
  CHECK(idx2 == std::array<int, 3>{0, 1, 1});
}

TEST_CASE("frame selection demands a renderable dataset") {
  auto d = reward_dataset(0, 0);
  d.meta.frames_available = false;
  try {
    select_frames(slice_segment(d, 0, 0, 8));
    FAIL("expected TeacherError");
  } catch (const TeacherError& e) {
    CHECK(std::string(e.what()).find("re-collect") != std::string::npos);
  }
  CHECK_THROWS_AS(FrameStore{d}, TeacherError);
}

TEST_CASE("frame store renders deterministic frames keyed by (episode, t)") {
  auto env = make_env("point_reach");
  CollectOptions opt;
  opt.episodes = 3;
  opt.seed = 1;
  opt.render_frames = true;
  auto d = scripted_collect(*env, opt);
  FrameStore store(d);
  Image f1 = store.frame(1, 7);
  Image f2 = store.frame(1, 7);
  CHECK(f1 == f2);
  std::vector<double> state(d.state(1, 7), d.state(1, 7) + 4);
  CHECK(f1 == env->render(state));
}

TEST_CASE("measure_accuracy") {
  auto env = make_env("point_reach");
  CollectOptions opt;
  opt.episodes = 300;
  opt.failure_rate = 0.5;
  opt.seed = 21;
  auto d = scripted_collect(*env, opt);
  const double eps = default_epsilon("point_reach");
  auto refs = sample_pairs(d, 3000, 16, 5);

  auto label_all = [&](double p_flip, std::uint64_t seed) {
    PreferenceDataset p;
    p.meta.env = d.meta.env;
    p.meta.segment_len = 16;
    p.meta.seed = seed;
    Rng rng(seed);
    std::uint64_t qid = 0;
    for (const auto& [a, b] : refs) {
      PreferencePair pair;
      pair.query_id = qid++;
      pair.episode_a = a.episode;
      pair.start_a = a.start;
      pair.episode_b = b.episode;
      pair.start_b = b.start;
      auto sa = slice_segment(d, a.episode, a.start, 16);
      auto sb = slice_segment(d, b.episode, b.start, 16);
      pair.label = p_flip == 0 ? oracle_label(sa, sb, eps)
                               : noisy_label(sa, sb, eps, p_flip, rng);
      pair.teacher =
          p_flip == 0 ? TeacherKind::oracle : TeacherKind::noisy_oracle;
      p.pairs.push_back(pair);
    }
    p.meta.pair_count = p.pairs.size();
    return p;
  };

  SUBCASE("oracle agrees with itself") {
    auto rep = measure_accuracy(label_all(0.0, 3), d, eps);
    REQUIRE(rep.accuracy.has_value());
    CHECK(*rep.accuracy == 1.0);
    CHECK(rep.equal_fraction > 0.0);
  }

  SUBCASE("flip-0.3 teacher measures near 70%") {
    auto rep = measure_accuracy(label_all(0.3, 3), d, eps);
    REQUIRE(rep.accuracy.has_value());
    CHECK(*rep.accuracy > 0.67);
    CHECK(*rep.accuracy < 0.73);
  }

  SUBCASE("all-equal teacher reports not-applicable accuracy") {
    PreferenceDataset p;
    p.meta.env = d.meta.env;
    p.meta.segment_len = 16;
    for (std::uint64_t i = 0; i < 50; ++i) {
      const auto& [a, b] = refs[i];
      p.pairs.push_back({i, a.episode, a.start, b.episode, b.start, 0.5,
                         TeacherKind::oracle, ""});
    }
    p.meta.pair_count = p.pairs.size();
    // an infinite band makes every oracle label equal as well
    auto rep = measure_accuracy(p, d, 1e18);
    CHECK_FALSE(rep.accuracy.has_value());
    CHECK(rep.equal_fraction == 1.0);
    CHECK(rep.non_equal_pairs == 0);
  }

  SUBCASE("empty dataset is a metric error") {
    PreferenceDataset p;
    CHECK_THROWS_AS(measure_accuracy(p, d, eps), MetricError);
  }
}

TEST_CASE("default epsilon lands in the 5-35% equal-label band") {
  for (const auto& name : env_names()) {
    auto env = make_env(name);
    CollectOptions opt;
    opt.episodes = 500;
    opt.failure_rate = 0.5;
    opt.seed = 40;
    auto d = scripted_collect(*env, opt);
    auto refs = sample_pairs(d, 2000, 16, 8);
    const double eps = default_epsilon(name);
    int equal = 0;
    for (const auto& [a, b] : refs) {
      auto sa = slice_segment(d, a.episode, a.start, 16);
      auto sb = slice_segment(d, b.episode, b.start, 16);
      if (oracle_label(sa, sb, eps) == 0.5) ++equal;
    }
    const double frac = equal / 2000.0;
    INFO(name << " equal fraction " << frac);
    CHECK(frac > 0.05);
    CHECK(frac < 0.35);
  }
}

TEST_CASE("teacher config validation") {
  TeacherConfig tc;
  tc.epsilon = 0.1;
  tc.p_flip = 0.6;
  CHECK_THROWS_AS(tc.validate(), ConfigError);
  tc.p_flip = 0.3;
  CHECK_NOTHROW(tc.validate());
  tc.kind = TeacherKind::vlm;
  CHECK_THROWS_AS(tc.validate(), ConfigError);  // endpoint required
  tc.endpoint = "http://127.0.0.1:1/v1/chat";
  CHECK_NOTHROW(tc.validate());
  CHECK(tc.hash() == tc.hash());
  TeacherConfig other = tc;
  other.epsilon = 0.2;
  CHECK(tc.hash() != other.hash());
}
