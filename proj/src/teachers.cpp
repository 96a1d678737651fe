#include "prefpol/teachers.hpp"

#include <sstream>

#include "prefpol/errors.hpp"
#include "prefpol/hash.hpp"

namespace prefpol {

void TeacherConfig::validate() const {
  if (epsilon < 0)
    throw ConfigError("teacher: epsilon must be resolved and >= 0");
  if (p_flip < 0 || p_flip > 0.5)
    throw ConfigError("teacher: p_flip must be in [0, 0.5]");
  if ((kind == TeacherKind::vlm) && endpoint.empty())
    throw ConfigError("teacher: vlm kind requires an endpoint");
  if (max_retries < 0 || max_concurrency < 1)
    throw ConfigError("teacher: bad retry/concurrency settings");
}

std::string TeacherConfig::hash() const {
  std::ostringstream ss;
  ss << to_string(kind) << '|' << epsilon << '|' << p_flip << '|' << endpoint
     << '|' << model << '|' << task_description;
  return to_hex(fnv1a64(ss.str()));
}

double default_epsilon(const std::string& env_name) {
  // Values measured on 50%-success scripted datasets; both land in the
  // 10-35% equal-label band.
  if (env_name == "point_reach") return 1.0;
  if (env_name == "drawer_pull") return 1.5;
  throw ConfigError("no default epsilon for env: " + env_name);
}

double oracle_label(const Segment& a, const Segment& b, double eps) {
  if (a.data == nullptr || b.data == nullptr)
    throw TeacherError("oracle: segment carries no data");
  if (a.data->episodes[a.episode].true_rewards.empty() ||
      b.data->episodes[b.episode].true_rewards.empty())
    throw TeacherError("oracle: segments carry no true rewards");
  const double ra = a.reward_sum();
  const double rb = b.reward_sum();
  if (ra > rb + eps) return 0.0;
  if (rb > ra + eps) return 1.0;
  return 0.5;
}

double noisy_label(const Segment& a, const Segment& b, double eps,
                   double p_flip, Rng& rng) {
  const double y = oracle_label(a, b, eps);
  // One draw per pair regardless of the label keeps the stream position
  // independent of content.
  const bool flip = rng.uniform() < p_flip;
  if (y == 0.5) return y;
  return flip ? 1.0 - y : y;
}

std::array<int, 3> select_frames(const Segment& seg) {
  if (seg.data == nullptr || !seg.data->meta.frames_available)
    throw TeacherError(
        "segment has no frames; re-collect the dataset with rendering "
        "enabled (collect --render)");
  if (seg.length < 1) throw TeacherError("select_frames: empty segment");
  return {0, seg.length / 2, seg.length - 1};
}

FrameStore::FrameStore(const EpisodeDataset& data) : data_(&data) {
  if (!data.meta.frames_available)
    throw TeacherError(
        "dataset was collected without rendering; re-collect with rendering "
        "enabled (collect --render)");
  env_ = make_env(data.meta.env);
}

Image FrameStore::frame(int episode, int t) const {
  const float* s = data_->state(episode, t);
  std::vector<double> state(s, s + data_->meta.state_dim);
  return env_->render(state);
}

AccuracyReport measure_accuracy(const PreferenceDataset& prefs,
                                const EpisodeDataset& episodes, double eps) {
  if (prefs.pairs.empty())
    throw MetricError("measure_accuracy: empty preference dataset");

  AccuracyReport rep;
  std::size_t equal = 0, agree = 0, non_equal = 0;
  for (std::size_t i = 0; i < prefs.pairs.size(); ++i) {
    const auto& p = prefs.pairs[i];
    if (p.label == 0.5) ++equal;
    const double oy =
        oracle_label(prefs.seg_a(episodes, i), prefs.seg_b(episodes, i), eps);
    if (oy == 0.5) continue;
    ++non_equal;
    if (p.label == oy) ++agree;
  }
  rep.equal_fraction = static_cast<double>(equal) / prefs.pairs.size();
  rep.non_equal_pairs = non_equal;
  if (non_equal > 0)
    rep.accuracy = static_cast<double>(agree) / non_equal;
  return rep;
}

}  // namespace prefpol
