#include "ckm/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ckm {
namespace {

constexpr const char* kCkmMagic = "clusterckm/1";
constexpr const char* kTensorMagic = "tensor3c/1";

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  return f;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);  // binary keeps LF line endings everywhere
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  return f;
}

// Next non-empty line, CR stripped. Throws naming `what` when the stream ends.
std::string next_line(std::istream& is, const char* what) {
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return line;
  }
  throw std::runtime_error(std::string("truncated input, expected ") + what);
}

long long parse_count(const std::string& tok, const char* what) {
  long long v = -1;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || v < 0)
    throw std::runtime_error(std::string("bad count for ") + what + ": '" + tok + "'");
  return v;
}

}  // namespace

std::string dtos(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double stod_strict(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("bad number: '" + s + "'");
  return v;
}

void save_ckm(std::ostream& os, const ClusterCkm& ckm, const MetaList& meta) {
  os << kCkmMagic << "\n";
  for (const auto& [key, value] : meta) {
    if (key.empty() || key.find_first_of(" \t\r\n") != std::string::npos)
      throw std::runtime_error("meta key with whitespace: '" + key + "'");
    os << "meta " << key << " " << value << "\n";
  }
  os << "clusters " << ckm.es_clusters.size() << "\n";
  for (const auto& group : ckm.es_clusters) {
    os << "cluster " << group.size() << "\n";
    for (const Vec2& p : group) os << dtos(p.x) << " " << dtos(p.y) << "\n";
  }
  if (!os) throw std::runtime_error("map write failed");
}

void save_ckm(const std::string& path, const ClusterCkm& ckm, const MetaList& meta) {
  auto f = open_out(path);
  save_ckm(f, ckm, meta);
}

ClusterCkm load_ckm(std::istream& is, MetaList* meta) {
  if (next_line(is, "magic") != kCkmMagic)
    throw std::runtime_error(std::string("not a ") + kCkmMagic + " file");
  std::string line = next_line(is, "clusters header");
  while (line.rfind("meta ", 0) == 0) {
    const auto key_end = line.find(' ', 5);
    if (key_end == std::string::npos) throw std::runtime_error("bad meta line: '" + line + "'");
    if (meta) meta->emplace_back(line.substr(5, key_end - 5), line.substr(key_end + 1));
    line = next_line(is, "clusters header");
  }
  std::istringstream hdr(line);
  std::string tag, count;
  hdr >> tag >> count;
  if (tag != "clusters") throw std::runtime_error("expected clusters header, got '" + line + "'");
  ClusterCkm ckm;
  ckm.es_clusters.resize(static_cast<std::size_t>(parse_count(count, "clusters")));
  for (auto& group : ckm.es_clusters) {
    std::istringstream ghdr(next_line(is, "cluster header"));
    ghdr >> tag >> count;
    if (tag != "cluster") throw std::runtime_error("expected cluster header");
    group.resize(static_cast<std::size_t>(parse_count(count, "cluster")));
    for (Vec2& p : group) {
      std::istringstream point(next_line(is, "es point"));
      std::string sx, sy;
      point >> sx >> sy;
      p.x = stod_strict(sx);
      p.y = stod_strict(sy);
    }
  }
  return ckm;
}

ClusterCkm load_ckm(const std::string& path, MetaList* meta) {
  auto f = open_in(path);
  return load_ckm(f, meta);
}

void save_tensor(std::ostream& os, const Tensor3C& t) {
  os << kTensorMagic << "\n";
  os << "dims " << t.dims[0] << " " << t.dims[1] << " " << t.dims[2] << "\n";
  for (const cplx& v : t.data) os << dtos(v.real()) << " " << dtos(v.imag()) << "\n";
  if (!os) throw std::runtime_error("tensor write failed");
}

void save_tensor(const std::string& path, const Tensor3C& t) {
  auto f = open_out(path);
  save_tensor(f, t);
}

Tensor3C load_tensor(std::istream& is) {
  if (next_line(is, "magic") != kTensorMagic)
    throw std::runtime_error(std::string("not a ") + kTensorMagic + " file");
  std::istringstream hdr(next_line(is, "dims"));
  std::string tag, s1, s2, s3;
  hdr >> tag >> s1 >> s2 >> s3;
  if (tag != "dims") throw std::runtime_error("expected dims header");
  Tensor3C t(parse_count(s1, "dims"), parse_count(s2, "dims"), parse_count(s3, "dims"));
  for (cplx& v : t.data) {
    std::istringstream entry(next_line(is, "tensor entry"));
    std::string re, im;
    entry >> re >> im;
    v = cplx(stod_strict(re), stod_strict(im));
  }
  return t;
}

Tensor3C load_tensor(const std::string& path) {
  auto f = open_in(path);
  return load_tensor(f);
}

}  // namespace ckm
