#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "prefpol/errors.hpp"

namespace prefpol {

// One fixed-horizon episode. Payload is float32 end to end: the on-disk
// container stores f32, and keeping the in-memory copy at the same width
// makes save/load lossless.
struct Trajectory {
  std::vector<float> states;        // horizon * state_dim, one row per step
  std::vector<float> actions;       // horizon * action_dim
  std::vector<float> true_rewards;  // horizon; oracle/eval only, hidden from learners
  bool success = false;

  bool operator==(const Trajectory&) const = default;
};

struct DatasetMeta {
  std::string env;
  int state_dim = 0;
  int action_dim = 0;
  int horizon = 0;
  int segment_len = 16;  // default L used when slicing this dataset
  std::uint64_t seed = 0;
  bool frames_available = false;
  double action_low = -0.1;
  double action_high = 0.1;

  bool operator==(const DatasetMeta&) const = default;
};

struct EpisodeDataset {
  DatasetMeta meta;
  std::vector<Trajectory> episodes;

  const float* state(int episode, int t) const {
    return episodes[episode].states.data() +
           static_cast<std::size_t>(t) * meta.state_dim;
  }
  const float* action(int episode, int t) const {
    return episodes[episode].actions.data() +
           static_cast<std::size_t>(t) * meta.action_dim;
  }

  double success_rate() const;

  bool operator==(const EpisodeDataset&) const = default;
};

// Contiguous view over steps [start, start+length) of one episode.
struct Segment {
  const EpisodeDataset* data = nullptr;
  int episode = 0;
  int start = 0;
  int length = 0;

  const float* state(int t) const { return data->state(episode, start + t); }
  const float* action(int t) const { return data->action(episode, start + t); }
  double true_reward(int t) const {
    return data->episodes[episode].true_rewards[start + t];
  }
  // Undiscounted return over the slice.
  double reward_sum() const;
};

Segment slice_segment(const EpisodeDataset& data, int episode, int start,
                      int length);

enum class TeacherKind { oracle, noisy_oracle, vlm, vlm_mock };

std::string to_string(TeacherKind k);
TeacherKind teacher_kind_from(const std::string& s);

struct PreferencePair {
  std::uint64_t query_id = 0;
  int episode_a = 0;
  int start_a = 0;
  int episode_b = 0;
  int start_b = 0;
  double label = 0.5;  // one of {0, 0.5, 1}
  TeacherKind teacher = TeacherKind::oracle;
  std::string raw_response;  // stage-2 VLM reply, empty for rule teachers

  bool operator==(const PreferencePair&) const = default;
};

struct PrefMeta {
  std::string env;
  int segment_len = 0;
  std::uint64_t pair_count = 0;
  std::uint64_t seed = 0;
  std::string teacher_hash;

  bool operator==(const PrefMeta&) const = default;
};

struct PreferenceDataset {
  PrefMeta meta;
  std::vector<PreferencePair> pairs;

  Segment seg_a(const EpisodeDataset& d, std::size_t i) const {
    const auto& p = pairs[i];
    return slice_segment(d, p.episode_a, p.start_a, meta.segment_len);
  }
  Segment seg_b(const EpisodeDataset& d, std::size_t i) const {
    const auto& p = pairs[i];
    return slice_segment(d, p.episode_b, p.start_b, meta.segment_len);
  }

  bool operator==(const PreferenceDataset&) const = default;
};

struct SegmentRef {
  int episode = 0;
  int start = 0;
  bool operator==(const SegmentRef&) const = default;
};

// Uniform over (episode, valid start); the two slices of a pair are never
// identical. Pure function of (data, n, length, seed).
std::vector<std::pair<SegmentRef, SegmentRef>> sample_pairs(
    const EpisodeDataset& data, int n, int length, std::uint64_t seed);

// Binary container, magic "PPD1": text header, little-endian f32 payload,
// trailing CRC32.
void save_dataset(const EpisodeDataset& data, const std::string& path);
EpisodeDataset load_dataset(const std::string& path);

// Line-oriented text format, magic "PPT1": one record per pair, metadata
// comments up front, trailing CRC32 comment.
void save_pref(const PreferenceDataset& data, const std::string& path);
PreferenceDataset load_pref(const std::string& path);

}  // namespace prefpol
