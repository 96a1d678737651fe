#include "prefpol/vlm_client.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "prefpol/errors.hpp"
#include "prefpol/image.hpp"

namespace prefpol {

using nlohmann::json;

std::string base64_encode(const std::string& bytes) {
  static const char* alphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 3 <= bytes.size()) {
    std::uint32_t v = (static_cast<unsigned char>(bytes[i]) << 16) |
                      (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                      static_cast<unsigned char>(bytes[i + 2]);
    out += alphabet[(v >> 18) & 63];
    out += alphabet[(v >> 12) & 63];
    out += alphabet[(v >> 6) & 63];
    out += alphabet[v & 63];
    i += 3;
  }
  const std::size_t rem = bytes.size() - i;
  if (rem == 1) {
    std::uint32_t v = static_cast<unsigned char>(bytes[i]) << 16;
    out += alphabet[(v >> 18) & 63];
    out += alphabet[(v >> 12) & 63];
    out += "==";
  } else if (rem == 2) {
    std::uint32_t v = (static_cast<unsigned char>(bytes[i]) << 16) |
                      (static_cast<unsigned char>(bytes[i + 1]) << 8);
    out += alphabet[(v >> 18) & 63];
    out += alphabet[(v >> 12) & 63];
    out += alphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::vector<std::string> pair_frames_b64(const FrameStore& store,
                                         SegmentRef a, SegmentRef b,
                                         int segment_len) {
  std::vector<std::string> out;
  out.reserve(6);
  for (const SegmentRef& ref : {a, b}) {
    Segment seg =
        slice_segment(store.dataset(), ref.episode, ref.start, segment_len);
    for (int idx : select_frames(seg))
      out.push_back(
          base64_encode(to_png(store.frame(ref.episode, ref.start + idx))));
  }
  return out;
}

PromptTemplates PromptTemplates::builtin() {
  PromptTemplates t;
  t.stage1 =
      "You are shown two behavior sequences, three images each, in time "
      "order. Images 1-3 are the first sequence and images 4-6 are the "
      "second sequence. The task is {task_description}.\n"
      "1. Describe what happens in the first sequence.\n"
      "2. Describe what happens in the second sequence.\n"
      "3. Compare how well each sequence performs the task.";
  t.stage2 =
      "Based on the analysis below, decide which sequence performs the task "
      "({task_description}) better. Reply with exactly one token and "
      "nothing else: 0 if the first sequence is better, 1 if the second "
      "sequence is better, -1 if they are equally good.\n\nAnalysis:\n"
      "{stage1_response}";
  return t;
}

PromptTemplates PromptTemplates::load(const std::string& dir) {
  auto slurp = [&](const std::string& name) {
    std::ifstream in(dir + "/" + name);
    if (!in) throw ConfigError("cannot read prompt template " + dir + "/" + name);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  PromptTemplates t;
  t.stage1 = slurp("stage1.txt");
  t.stage2 = slurp("stage2.txt");
  return t;
}

std::string fill_placeholder(std::string text, const std::string& key,
                             const std::string& value) {
  const std::string tag = "{" + key + "}";
  std::size_t pos = 0;
  while ((pos = text.find(tag, pos)) != std::string::npos) {
    text.replace(pos, tag.size(), value);
    pos += value.size();
  }
  return text;
}

namespace {

void parse_endpoint(const std::string& url, std::string& host, int& port,
                    std::string& path) {
  const std::string prefix = "http://";
  if (url.rfind(prefix, 0) != 0)
    throw ConfigError("vlm endpoint must be an http:// URL: " + url);
  const std::string rest = url.substr(prefix.size());
  const auto slash = rest.find('/');
  const std::string hostport = rest.substr(0, slash);
  path = slash == std::string::npos ? "/" : rest.substr(slash);
  const auto colon = hostport.find(':');
  host = hostport.substr(0, colon);
  port = colon == std::string::npos
             ? 80
             : std::stoi(hostport.substr(colon + 1));
  if (host.empty()) throw ConfigError("vlm endpoint has no host: " + url);
}

// Strictly one of the three accepted tokens, surrounded by whitespace only.
bool parse_token(const std::string& reply, double& label) {
  std::string t = reply;
  const auto begin = t.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return false;
  const auto end = t.find_last_not_of(" \t\r\n");
  t = t.substr(begin, end - begin + 1);
  if (t == "0") label = 0.0;
  else if (t == "1") label = 1.0;
  else if (t == "-1") label = 0.5;
  else return false;
  return true;
}

}  // namespace

VlmClient::VlmClient(TeacherConfig cfg, PromptTemplates prompts)
    : cfg_(std::move(cfg)), prompts_(std::move(prompts)) {
  parse_endpoint(cfg_.endpoint, host_, port_, path_);
  task_ = cfg_.task_description;
}

VlmClient::Attempt VlmClient::post_chat(const std::string& body) const {
  httplib::Client cli(host_, port_);
  const auto sec = static_cast<time_t>(cfg_.timeout_s);
  const auto usec =
      static_cast<time_t>((cfg_.timeout_s - static_cast<double>(sec)) * 1e6);
  cli.set_connection_timeout(sec, usec);
  cli.set_read_timeout(sec, usec);
  cli.set_write_timeout(sec, usec);
  if (const char* key = std::getenv("PREFPOL_VLM_API_KEY"))
    cli.set_bearer_token_auth(key);

  Attempt at;
  auto res = cli.Post(path_, body, "application/json");
  if (!res) {
    at.connected = res.error() != httplib::Error::Connection;
    return at;
  }
  at.connected = true;
  if (res->status != 200) return at;
  try {
    json j = json::parse(res->body);
    at.reply = j.at("content").get<std::string>();
    at.http_ok = true;
  } catch (const json::exception&) {
    at.http_ok = false;
  }
  return at;
}

VlmResult VlmClient::label_pair(const FrameStore& store, SegmentRef a,
                                SegmentRef b, int segment_len) {
  const auto frames = pair_frames_b64(store, a, b, segment_len);
  const std::string stage1_prompt =
      fill_placeholder(prompts_.stage1, "task_description", task_);

  const int attempts = std::max(1, cfg_.max_retries);
  bool ever_connected = false;
  VlmResult result;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    json content = json::array();
    content.push_back({{"type", "text"}, {"text", stage1_prompt}});
    for (const auto& f : frames)
      content.push_back({{"type", "image"}, {"image", f}});
    json body1 = {{"model", cfg_.model},
                  {"messages",
                   json::array({{{"role", "user"}, {"content", content}}})}};
    Attempt s1 = post_chat(body1.dump());
    ever_connected = ever_connected || s1.connected;
    if (!s1.http_ok) continue;

    std::string stage2_prompt =
        fill_placeholder(prompts_.stage2, "task_description", task_);
    stage2_prompt =
        fill_placeholder(stage2_prompt, "stage1_response", s1.reply);
    json body2 = {
        {"model", cfg_.model},
        {"messages",
         json::array(
             {{{"role", "user"},
               {"content", json::array({{{"type", "text"},
                                         {"text", stage2_prompt}}})}}})}};
    Attempt s2 = post_chat(body2.dump());
    ever_connected = ever_connected || s2.connected;
    if (!s2.http_ok) continue;

    result.stage1_response = s1.reply;
    result.stage2_response = s2.reply;
    if (parse_token(s2.reply, result.label)) {
      result.valid = true;
      return result;
    }
  }
  if (!ever_connected)
    throw NetworkError("vlm endpoint unreachable: " + cfg_.endpoint);
  return result;  // invalid record: excluded by the caller
}

std::vector<VlmResult> VlmClient::label_all(
    const FrameStore& store,
    const std::vector<std::pair<SegmentRef, SegmentRef>>& pairs,
    int segment_len, const std::function<void(std::size_t)>& progress) {
  std::vector<VlmResult> results(pairs.size());
  if (pairs.empty()) return results;

  // First query runs alone: a dead endpoint surfaces as one clean error
  // instead of one per worker.
  results[0] = label_pair(store, pairs[0].first, pairs[0].second, segment_len);
  std::atomic<std::size_t> next{1};
  std::atomic<std::size_t> done{1};
  if (progress) progress(1);

  const int workers = std::max(
      1, std::min<int>(cfg_.max_concurrency,
                       static_cast<int>(pairs.size()) - 1));
  std::vector<std::thread> pool;
  std::mutex progress_mu;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= pairs.size()) return;
        try {
          results[i] =
              label_pair(store, pairs[i].first, pairs[i].second, segment_len);
        } catch (const NetworkError&) {
          results[i] = VlmResult{};  // endpoint died mid-run: invalid record
        }
        const std::size_t d = done.fetch_add(1) + 1;
        if (progress) {
          std::lock_guard<std::mutex> lock(progress_mu);
          progress(d);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  return results;
}

}  // namespace prefpol
