#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "prefpol/core_model.hpp"
#include "prefpol/teachers.hpp"

namespace prefpol {

std::string base64_encode(const std::string& bytes);

// The six stage-1 images for a pair: first/middle/last of segment a, then
// of segment b, each a base64 PNG. The mock server indexes pairs by these
// exact bytes, so client and server must share this function.
std::vector<std::string> pair_frames_b64(const FrameStore& store,
                                         SegmentRef a, SegmentRef b,
                                         int segment_len);

struct PromptTemplates {
  std::string stage1;  // placeholder: {task_description}
  std::string stage2;  // placeholders: {task_description}, {stage1_response}

  static PromptTemplates builtin();
  // Reads stage1.txt / stage2.txt from a directory.
  static PromptTemplates load(const std::string& dir);
};

std::string fill_placeholder(std::string text, const std::string& key,
                             const std::string& value);

struct VlmResult {
  double label = 0.5;
  bool valid = false;
  std::string stage1_response;
  std::string stage2_response;
};

// Two-stage querying client. Stage 1 sends the six frames plus an analysis
// prompt; stage 2 sends the stage-1 reply and asks for a single token of
// {0, 1, -1}, mapped to y = {0, 1, 0.5}. A pair whose replies stay
// unparseable after max_retries attempts comes back invalid.
class VlmClient {
 public:
  VlmClient(TeacherConfig cfg, PromptTemplates prompts);

  VlmResult label_pair(const FrameStore& store, SegmentRef a, SegmentRef b,
                       int segment_len);

  // Labels every pair with up to max_concurrency requests in flight.
  // Results are indexed by query order, so output is deterministic
  // regardless of completion order. Throws NetworkError if the endpoint
  // cannot be reached at all.
  std::vector<VlmResult> label_all(
      const FrameStore& store,
      const std::vector<std::pair<SegmentRef, SegmentRef>>& pairs,
      int segment_len,
      const std::function<void(std::size_t)>& progress = {});

 private:
  struct Attempt {
    bool http_ok = false;
    bool connected = false;
    std::string reply;
  };

  Attempt post_chat(const std::string& body) const;

  TeacherConfig cfg_;
  PromptTemplates prompts_;
  std::string host_;
  int port_ = 0;
  std::string path_;
  std::string task_;
};

}  // namespace prefpol
