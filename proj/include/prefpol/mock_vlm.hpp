#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "prefpol/core_model.hpp"
#include "prefpol/teachers.hpp"

namespace prefpol {

struct MockVlmOptions {
  enum class Mode { oracle, scripted, garbage };
  Mode mode = Mode::oracle;
  // Stage-2 replies, cycled, for scripted mode.
  std::vector<std::string> scripted_stage2;
  double epsilon = 0.0;
};

// Speaks the exact VLM wire contract and answers from the hidden oracle.
// Stage-1 requests are matched to pairs by the bytes of their six images
// (the renderer is deterministic, so the server can precompute them); the
// pair index rides back to stage 2 inside the stage-1 analysis text.
class MockVlmServer {
 public:
  MockVlmServer(const EpisodeDataset& data,
                std::vector<std::pair<SegmentRef, SegmentRef>> pairs,
                int segment_len, MockVlmOptions opt = {});
  ~MockVlmServer();

  MockVlmServer(const MockVlmServer&) = delete;
  MockVlmServer& operator=(const MockVlmServer&) = delete;

  void start();  // binds 127.0.0.1 on an ephemeral port
  void stop();

  int port() const { return port_; }
  std::string endpoint() const;
  std::size_t requests_served() const { return requests_.load(); }

 private:
  struct Impl;

  const EpisodeDataset* data_;
  std::vector<std::pair<SegmentRef, SegmentRef>> pairs_;
  int segment_len_;
  MockVlmOptions opt_;
  std::unordered_map<std::uint64_t, std::size_t> frame_index_;
  std::atomic<std::size_t> requests_{0};
  std::atomic<std::size_t> scripted_cursor_{0};
  int port_ = 0;
  std::unique_ptr<Impl> impl_;
};

}  // namespace prefpol
