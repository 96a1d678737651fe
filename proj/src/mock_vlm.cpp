#include "prefpol/mock_vlm.hpp"

#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "prefpol/errors.hpp"
#include "prefpol/hash.hpp"
#include "prefpol/vlm_client.hpp"

namespace prefpol {

using nlohmann::json;

struct MockVlmServer::Impl {
  httplib::Server server;
  std::thread thread;
};

namespace {

std::uint64_t digest_frames(const std::vector<std::string>& frames_b64) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& f : frames_b64) h = fnv1a64(f.data(), f.size(), h);
  return h;
}

}  // namespace

MockVlmServer::MockVlmServer(const EpisodeDataset& data,
                             std::vector<std::pair<SegmentRef, SegmentRef>> pairs,
                             int segment_len, MockVlmOptions opt)
    : data_(&data),
      pairs_(std::move(pairs)),
      segment_len_(segment_len),
      opt_(opt),
      impl_(std::make_unique<Impl>()) {
  if (opt_.mode == MockVlmOptions::Mode::scripted &&
      opt_.scripted_stage2.empty())
    throw ConfigError("mock vlm: scripted mode needs at least one reply");
  if (opt_.mode == MockVlmOptions::Mode::oracle) {
    FrameStore store(data);
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
      const auto frames =
          pair_frames_b64(store, pairs_[i].first, pairs_[i].second, segment_len_);
      frame_index_[digest_frames(frames)] = i;
    }
  }
}

MockVlmServer::~MockVlmServer() { stop(); }

std::string MockVlmServer::endpoint() const {
  return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat";
}

void MockVlmServer::start() {
  auto& svr = impl_->server;
  svr.Post("/v1/chat", [this](const httplib::Request& req,
                              httplib::Response& res) {
    requests_.fetch_add(1);
    json reply;
    try {
      const json body = json::parse(req.body);
      const auto& content = body.at("messages").at(0).at("content");
      std::vector<std::string> images;
      std::string text;
      for (const auto& item : content) {
        const std::string type = item.at("type").get<std::string>();
        if (type == "image")
          images.push_back(item.at("image").get<std::string>());
        else if (type == "text")
          text += item.at("text").get<std::string>();
      }

      if (!images.empty()) {
        // stage 1: identify the pair from its frames and embed the index
        // in the analysis so stage 2 can recover it.
        switch (opt_.mode) {
          case MockVlmOptions::Mode::oracle: {
            auto it = frame_index_.find(digest_frames(images));
            if (it == frame_index_.end()) {
              reply["content"] = "These frames do not match any known pair.";
            } else {
              reply["content"] =
                  "Sequence analysis [q=" + std::to_string(it->second) +
                  "]: the first sequence shows the agent acting over three "
                  "frames; the second sequence shows an alternative "
                  "attempt. One of them tracks the task goal more closely.";
            }
            break;
          }
          case MockVlmOptions::Mode::scripted:
          case MockVlmOptions::Mode::garbage:
            reply["content"] = "Sequence analysis [q=0]: canned analysis.";
            break;
        }
      } else {
        // stage 2: answer with a single preference token.
        switch (opt_.mode) {
          case MockVlmOptions::Mode::oracle: {
            const auto marker = text.find("[q=");
            const auto end = text.find(']', marker);
            if (marker == std::string::npos || end == std::string::npos) {
              reply["content"] = "no marker found";
              break;
            }
            const std::size_t idx = std::stoull(
                text.substr(marker + 3, end - marker - 3));
            if (idx >= pairs_.size()) {
              reply["content"] = "bad pair index";
              break;
            }
            const auto& [a, b] = pairs_[idx];
            Segment sa = slice_segment(*data_, a.episode, a.start, segment_len_);
            Segment sb = slice_segment(*data_, b.episode, b.start, segment_len_);
            const double y = oracle_label(sa, sb, opt_.epsilon);
            reply["content"] = y == 0.0 ? "0" : y == 1.0 ? "1" : "-1";
            break;
          }
          case MockVlmOptions::Mode::scripted: {
            const std::size_t i =
                scripted_cursor_.fetch_add(1) % opt_.scripted_stage2.size();
            reply["content"] = opt_.scripted_stage2[i];
            break;
          }
          case MockVlmOptions::Mode::garbage:
            reply["content"] = "purple monkey dishwasher";
            break;
        }
      }
    } catch (const std::exception& e) {
      res.status = 400;
      reply["content"] = std::string("bad request: ") + e.what();
    }
    res.set_content(reply.dump(), "application/json");
  });

  port_ = svr.bind_to_any_port("127.0.0.1");
  if (port_ <= 0) throw NetworkError("mock vlm server failed to bind");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  svr.wait_until_ready();
}

void MockVlmServer::stop() {
  if (impl_ && impl_->thread.joinable()) {
    impl_->server.stop();
    impl_->thread.join();
  }
}

}  // namespace prefpol
