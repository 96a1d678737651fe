#include "prefpol/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "prefpol/errors.hpp"
#include "prefpol/hash.hpp"

namespace prefpol {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}

void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i)
    out += static_cast<char>((bits >> (8 * i)) & 0xff);
}

struct Cursor {
  const unsigned char* p;
  std::size_t len;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > len) throw TruncatedError("checkpoint ends early");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(p[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
      bits |= static_cast<std::uint64_t>(p[pos + i]) << (8 * i);
    pos += 8;
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(p + pos), n);
    pos += n;
    return s;
  }
};

void put_mat(std::string& out, const Mat& m) {
  for (double v : m.a) put_f64(out, v);
}

void read_mat(Cursor& cur, Mat& m) {
  for (auto& v : m.a) v = cur.f64();
}

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  std::ostringstream hdr;
  hdr << "state_dim=" << ck.params.state_dim << "\n"
      << "action_dim=" << ck.params.action_dim << "\n"
      << "layers=";
  for (std::size_t i = 0; i < ck.params.w.size(); ++i)
    hdr << (i ? "," : "") << ck.params.w[i].rows;
  hdr << "\n"
      << "step=" << ck.step << "\n"
      << "adam_step=" << ck.adam.step << "\n"
      << "lr=" << ck.adam.cfg.lr << "\n"
      << "beta1=" << ck.adam.cfg.beta1 << "\n"
      << "beta2=" << ck.adam.cfg.beta2 << "\n"
      << "adam_eps=" << ck.adam.cfg.eps << "\n"
      << "config_hash=" << ck.config_hash << "\n"
      << "objective=" << ck.objective << "\n";
  const std::string header = hdr.str();

  std::string out = "PPC1";
  put_u32(out, static_cast<std::uint32_t>(header.size()));
  out += header;
  for (const Mat* m : ck.params.mats()) put_mat(out, *m);
  for (const Mat& m : ck.adam.m) put_mat(out, m);
  for (const Mat& m : ck.adam.v) put_mat(out, m);
  put_u32(out, crc32(out.data(), out.size()));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("short write to " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  const std::string bytes = ss.str();

  if (bytes.size() < 4 || bytes.compare(0, 4, "PPC1") != 0)
    throw VersionError("not a PPC1 checkpoint: " + path);
  if (bytes.size() < 12) throw TruncatedError("file too short: " + path);

  Cursor cur{reinterpret_cast<const unsigned char*>(bytes.data()),
             bytes.size() - 4, 4};
  const std::uint32_t hlen = cur.u32();
  std::map<std::string, std::string> kv;
  {
    std::istringstream hs(cur.bytes(hlen));
    std::string line;
    while (std::getline(hs, line)) {
      auto eq = line.find('=');
      if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
  }
  auto require = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw DataError("checkpoint header missing " + key);
    return it->second;
  };

  Checkpoint ck;
  ck.params.state_dim = std::stoi(require("state_dim"));
  ck.params.action_dim = std::stoi(require("action_dim"));
  ck.step = std::stol(require("step"));
  ck.config_hash = require("config_hash");
  ck.objective = require("objective");

  std::vector<int> layer_sizes;
  {
    std::istringstream ls(require("layers"));
    std::string tok;
    while (std::getline(ls, tok, ',')) layer_sizes.push_back(std::stoi(tok));
  }
  int in = ck.params.state_dim;
  for (int out : layer_sizes) {
    ck.params.w.emplace_back(out, in);
    ck.params.b.emplace_back(1, out);
    in = out;
  }
  ck.params.log_std = Mat(1, ck.params.action_dim);

  ck.adam.cfg.lr = std::stod(require("lr"));
  ck.adam.cfg.beta1 = std::stod(require("beta1"));
  ck.adam.cfg.beta2 = std::stod(require("beta2"));
  ck.adam.cfg.eps = std::stod(require("adam_eps"));
  ck.adam.step = std::stol(require("adam_step"));

  for (Mat* m : ck.params.mats()) read_mat(cur, *m);
  for (const Mat* m : ck.params.mats()) {
    ck.adam.m.emplace_back(m->rows, m->cols);
    ck.adam.v.emplace_back(m->rows, m->cols);
  }
  for (Mat& m : ck.adam.m) read_mat(cur, m);
  for (Mat& m : ck.adam.v) read_mat(cur, m);
  if (cur.pos != bytes.size() - 4)
    throw DataError("trailing bytes after payload: " + path);

  Cursor tail{reinterpret_cast<const unsigned char*>(bytes.data()),
              bytes.size(), bytes.size() - 4};
  if (tail.u32() != crc32(bytes.data(), bytes.size() - 4))
    throw ChecksumError("checksum mismatch: " + path);
  return ck;
}

}  // namespace prefpol
