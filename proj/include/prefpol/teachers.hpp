#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>

#include "prefpol/core_model.hpp"
#include "prefpol/envs.hpp"
#include "prefpol/image.hpp"
#include "prefpol/rng.hpp"

namespace prefpol {

struct TeacherConfig {
  TeacherKind kind = TeacherKind::oracle;
  double epsilon = -1.0;  // < 0 resolves to the env default
  double p_flip = 0.0;
  std::string endpoint;  // e.g. http://127.0.0.1:8080/v1/chat
  std::string model = "mock-vlm";
  double timeout_s = 30.0;
  int max_retries = 3;
  int max_concurrency = 4;
  std::string prompt_dir;         // empty uses built-in templates
  std::string task_description;   // empty uses the env default

  void validate() const;
  std::string hash() const;  // stable across runs with equal settings
};

// Equal-label band on segment return difference, calibrated per env so the
// oracle emits 10-35% equal labels on a 50%-success dataset at L = 16.
double default_epsilon(const std::string& env_name);

// y = 0 if sum(r_a) > sum(r_b) + eps, 1 if the reverse, else 0.5.
double oracle_label(const Segment& a, const Segment& b, double eps);

// Oracle label with symmetric flipping of non-equal labels; equal labels
// are never flipped.
double noisy_label(const Segment& a, const Segment& b, double eps,
                   double p_flip, Rng& rng);

// Segment-relative frame indices {0, floor(L/2), L-1}.
std::array<int, 3> select_frames(const Segment& seg);

// Lazily renders frames for a dataset collected with rendering enabled.
class FrameStore {
 public:
  explicit FrameStore(const EpisodeDataset& data);
  Image frame(int episode, int t) const;
  const EpisodeDataset& dataset() const { return *data_; }

 private:
  const EpisodeDataset* data_;
  std::unique_ptr<Env> env_;
};

struct AccuracyReport {
  // Agreement with the oracle's hard labels over pairs the oracle labels
  // non-equal; absent when no such pair exists.
  std::optional<double> accuracy;
  double equal_fraction = 0.0;
  std::size_t non_equal_pairs = 0;
};

AccuracyReport measure_accuracy(const PreferenceDataset& prefs,
                                const EpisodeDataset& episodes, double eps);

}  // namespace prefpol
