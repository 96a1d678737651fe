#include "prefpol/core_model.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "prefpol/hash.hpp"
#include "prefpol/rng.hpp"

namespace prefpol {

double EpisodeDataset::success_rate() const {
  if (episodes.empty()) return 0.0;
  std::size_t n = 0;
  for (const auto& e : episodes) n += e.success ? 1 : 0;
  return static_cast<double>(n) / episodes.size();
}

double Segment::reward_sum() const {
  double s = 0;
  for (int t = 0; t < length; ++t) s += true_reward(t);
  return s;
}

Segment slice_segment(const EpisodeDataset& data, int episode, int start,
                      int length) {
  if (episode < 0 || episode >= static_cast<int>(data.episodes.size()))
    throw ConfigError("slice_segment: episode " + std::to_string(episode) +
                      " out of range");
  const int horizon = data.meta.horizon;
  if (length < 1 || start < 0 || start + length > horizon)
    throw ConfigError("slice_segment: slice [" + std::to_string(start) + ", " +
                      std::to_string(start + length) + ") out of bounds in episode " +
                      std::to_string(episode) + " (horizon " +
                      std::to_string(horizon) + ")");
  return Segment{&data, episode, start, length};
}

std::string to_string(TeacherKind k) {
  switch (k) {
    case TeacherKind::oracle: return "oracle";
    case TeacherKind::noisy_oracle: return "noisy_oracle";
    case TeacherKind::vlm: return "vlm";
    case TeacherKind::vlm_mock: return "vlm_mock";
  }
  return "oracle";
}

TeacherKind teacher_kind_from(const std::string& s) {
  if (s == "oracle") return TeacherKind::oracle;
  if (s == "noisy_oracle") return TeacherKind::noisy_oracle;
  if (s == "vlm") return TeacherKind::vlm;
  if (s == "vlm_mock") return TeacherKind::vlm_mock;
  throw ConfigError("unknown teacher kind: " + s);
}

std::vector<std::pair<SegmentRef, SegmentRef>> sample_pairs(
    const EpisodeDataset& data, int n, int length, std::uint64_t seed) {
  if (n <= 0) throw ConfigError("sample_pairs: n must be positive");
  if (length < 1) throw ConfigError("sample_pairs: segment length must be >= 1");
  if (data.episodes.empty()) throw ConfigError("sample_pairs: empty dataset");

  const int starts_per_episode = data.meta.horizon - length + 1;
  if (starts_per_episode < 1)
    throw ConfigError("sample_pairs: no episode long enough for L=" +
                      std::to_string(length));
  const std::uint64_t total_slots =
      static_cast<std::uint64_t>(data.episodes.size()) * starts_per_episode;
  if (total_slots < 2)
    throw ConfigError(
        "sample_pairs: only one valid slice exists; cannot avoid identical "
        "pairs");

  Rng rng(seed);
  auto draw = [&]() -> SegmentRef {
    std::uint64_t slot = rng.below(total_slots);
    return SegmentRef{static_cast<int>(slot / starts_per_episode),
                      static_cast<int>(slot % starts_per_episode)};
  };

  std::vector<std::pair<SegmentRef, SegmentRef>> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    SegmentRef a = draw();
    SegmentRef b = draw();
    while (b == a) b = draw();
    out.emplace_back(a, b);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Binary episode container.
// ---------------------------------------------------------------------------

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  char b[4];
  b[0] = static_cast<char>(v & 0xff);
  b[1] = static_cast<char>((v >> 8) & 0xff);
  b[2] = static_cast<char>((v >> 16) & 0xff);
  b[3] = static_cast<char>((v >> 24) & 0xff);
  out.append(b, 4);
}

void put_f32(std::string& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

// Bounds-checked read cursor; premature end is a truncation.
struct Cursor {
  const unsigned char* p;
  std::size_t len;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > len) throw TruncatedError("file ends inside a record");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = static_cast<std::uint32_t>(p[pos]) |
                      (static_cast<std::uint32_t>(p[pos + 1]) << 8) |
                      (static_cast<std::uint32_t>(p[pos + 2]) << 16) |
                      (static_cast<std::uint32_t>(p[pos + 3]) << 24);
    pos += 4;
    return v;
  }
  float f32() {
    std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  unsigned char u8() {
    need(1);
    return p[pos++];
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(p + pos), n);
    pos += n;
    return s;
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("short write to " + path);
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

std::string require(const std::map<std::string, std::string>& kv,
                    const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw DataError("header missing key: " + key);
  return it->second;
}

std::string format_label(double y) {
  if (y == 0.0) return "0";
  if (y == 1.0) return "1";
  if (y == 0.5) return "0.5";
  throw DataError("label must be one of {0, 0.5, 1}");
}

double parse_label(const std::string& s) {
  if (s == "0") return 0.0;
  if (s == "1") return 1.0;
  if (s == "0.5") return 0.5;
  throw DataError("invalid label in preference file: " + s);
}

std::string escape_field(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case ',': out += "\\c"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_field(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out += s[i];
      continue;
    }
    switch (s[++i]) {
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      case 'c': out += ','; break;
      default: out += s[i];
    }
  }
  return out;
}

}  // namespace

void save_dataset(const EpisodeDataset& data, const std::string& path) {
  const auto& m = data.meta;
  std::ostringstream hdr;
  hdr << "env=" << m.env << "\n"
      << "state_dim=" << m.state_dim << "\n"
      << "action_dim=" << m.action_dim << "\n"
      << "horizon=" << m.horizon << "\n"
      << "segment_len=" << m.segment_len << "\n"
      << "seed=" << m.seed << "\n"
      << "frames=" << (m.frames_available ? 1 : 0) << "\n"
      << "action_low=" << m.action_low << "\n"
      << "action_high=" << m.action_high << "\n";
  const std::string header = hdr.str();

  std::string out;
  out.reserve(64 + header.size() +
              data.episodes.size() *
                  (1 + 4 * static_cast<std::size_t>(m.horizon) *
                           (m.state_dim + m.action_dim + 1)));
  out += "PPD1";
  put_u32(out, static_cast<std::uint32_t>(header.size()));
  out += header;
  put_u32(out, static_cast<std::uint32_t>(data.episodes.size()));
  for (const auto& e : data.episodes) {
    out += static_cast<char>(e.success ? 1 : 0);
    for (float v : e.states) put_f32(out, v);
    for (float v : e.actions) put_f32(out, v);
    for (float v : e.true_rewards) put_f32(out, v);
  }
  put_u32(out, crc32(out.data(), out.size()));
  write_file(path, out);
}

static EpisodeDataset load_dataset_impl(const std::string& path);

EpisodeDataset load_dataset(const std::string& path) {
  try {
    return load_dataset_impl(path);
  } catch (const std::invalid_argument&) {
    throw DataError("malformed header in " + path);
  } catch (const std::out_of_range&) {
    throw DataError("malformed header in " + path);
  }
}

static EpisodeDataset load_dataset_impl(const std::string& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 4 || bytes.compare(0, 4, "PPD1") != 0)
    throw VersionError("not a PPD1 dataset: " + path);
  if (bytes.size() < 8) throw TruncatedError("file too short: " + path);

  Cursor cur{reinterpret_cast<const unsigned char*>(bytes.data()),
             bytes.size() - 4, 4};

  EpisodeDataset data;
  const std::uint32_t hlen = cur.u32();
  auto kv = parse_kv(cur.bytes(hlen));
  auto& m = data.meta;
  m.env = require(kv, "env");
  m.state_dim = std::stoi(require(kv, "state_dim"));
  m.action_dim = std::stoi(require(kv, "action_dim"));
  m.horizon = std::stoi(require(kv, "horizon"));
  m.segment_len = std::stoi(require(kv, "segment_len"));
  m.seed = std::stoull(require(kv, "seed"));
  m.frames_available = require(kv, "frames") == "1";
  m.action_low = std::stod(require(kv, "action_low"));
  m.action_high = std::stod(require(kv, "action_high"));

  const std::uint32_t count = cur.u32();
  data.episodes.resize(count);
  const std::size_t hs = static_cast<std::size_t>(m.horizon);
  for (auto& e : data.episodes) {
    e.success = cur.u8() != 0;
    e.states.resize(hs * m.state_dim);
    for (auto& v : e.states) v = cur.f32();
    e.actions.resize(hs * m.action_dim);
    for (auto& v : e.actions) v = cur.f32();
    e.true_rewards.resize(hs);
    for (auto& v : e.true_rewards) v = cur.f32();
  }
  if (cur.pos != bytes.size() - 4)
    throw DataError("trailing bytes after payload: " + path);

  Cursor tail{reinterpret_cast<const unsigned char*>(bytes.data()),
              bytes.size(), bytes.size() - 4};
  const std::uint32_t want = tail.u32();
  const std::uint32_t got = crc32(bytes.data(), bytes.size() - 4);
  if (want != got) throw ChecksumError("checksum mismatch: " + path);
  return data;
}

void save_pref(const PreferenceDataset& data, const std::string& path) {
  std::ostringstream body;
  body << "PPT1\n"
       << "# env " << data.meta.env << "\n"
       << "# segment_len " << data.meta.segment_len << "\n"
       << "# pairs " << data.meta.pair_count << "\n"
       << "# seed " << data.meta.seed << "\n"
       << "# teacher_hash " << data.meta.teacher_hash << "\n";
  for (const auto& p : data.pairs) {
    body << p.query_id << ',' << p.episode_a << ',' << p.start_a << ','
         << p.episode_b << ',' << p.start_b << ',' << format_label(p.label)
         << ',' << to_string(p.teacher) << ',' << escape_field(p.raw_response)
         << "\n";
  }
  std::string s = body.str();
  char crc_line[32];
  std::snprintf(crc_line, sizeof(crc_line), "# crc32 %08x\n",
                crc32(s.data(), s.size()));
  s += crc_line;
  write_file(path, s);
}

static PreferenceDataset load_pref_impl(const std::string& path);

PreferenceDataset load_pref(const std::string& path) {
  try {
    return load_pref_impl(path);
  } catch (const std::invalid_argument&) {
    throw DataError("malformed record in " + path);
  } catch (const std::out_of_range&) {
    throw DataError("malformed record in " + path);
  }
}

static PreferenceDataset load_pref_impl(const std::string& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 5 || bytes.compare(0, 5, "PPT1\n") != 0)
    throw VersionError("not a PPT1 preference file: " + path);

  // The checksum line is the last line of the file.
  auto crc_pos = bytes.rfind("# crc32 ");
  if (crc_pos == std::string::npos || crc_pos + 16 > bytes.size())
    throw TruncatedError("missing checksum line: " + path);
  const std::uint32_t want = static_cast<std::uint32_t>(
      std::stoul(bytes.substr(crc_pos + 8, 8), nullptr, 16));
  const std::uint32_t got = crc32(bytes.data(), crc_pos);
  if (want != got) throw ChecksumError("checksum mismatch: " + path);

  PreferenceDataset data;
  std::istringstream ss(bytes.substr(5, crc_pos - 5));
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string key, value;
      ls >> key;
      std::getline(ls, value);
      if (!value.empty() && value[0] == ' ') value.erase(0, 1);
      if (key == "env") data.meta.env = value;
      else if (key == "segment_len") data.meta.segment_len = std::stoi(value);
      else if (key == "pairs") data.meta.pair_count = std::stoull(value);
      else if (key == "seed") data.meta.seed = std::stoull(value);
      else if (key == "teacher_hash") data.meta.teacher_hash = value;
      continue;
    }
    // query_id,ep_a,start_a,ep_b,start_b,label,teacher,raw
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    fields.push_back(cur);
    if (fields.size() != 8)
      throw DataError("malformed preference record: " + line);
    PreferencePair p;
    p.query_id = std::stoull(fields[0]);
    p.episode_a = std::stoi(fields[1]);
    p.start_a = std::stoi(fields[2]);
    p.episode_b = std::stoi(fields[3]);
    p.start_b = std::stoi(fields[4]);
    p.label = parse_label(fields[5]);
    p.teacher = teacher_kind_from(fields[6]);
    p.raw_response = unescape_field(fields[7]);
    data.pairs.push_back(std::move(p));
  }
  if (data.meta.pair_count != data.pairs.size())
    throw DataError("pair count in header does not match records: " + path);
  return data;
}

}  // namespace prefpol
