#include "advfeat/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

static_assert(std::endian::native == std::endian::little,
              "AFPD/AFPW writers assume a little-endian host");

namespace advfeat {

namespace {

constexpr std::uint32_t kDatasetVersion = 1;
constexpr std::uint32_t kParamsVersion = 1;

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path);
  }
  void bytes(const void* p, std::size_t len) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(len));
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u32(std::uint32_t v) { bytes(&v, 4); }
  void u64(std::uint64_t v) { bytes(&v, 8); }
  void f64(double v) { bytes(&v, 8); }
  void i8(std::int8_t v) { bytes(&v, 1); }
  void close(const std::string& path) {
    out_.close();
    if (!out_) throw std::runtime_error("write failed: " + path);
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open for reading: " + path);
    buf_.assign(std::istreambuf_iterator<char>(in),
                std::istreambuf_iterator<char>());
  }
  void bytes(void* p, std::size_t len) {
    if (pos_ + len > buf_.size()) {
      throw FormatError("truncated payload");
    }
    std::memcpy(p, buf_.data() + pos_, len);
    pos_ += len;
  }
  std::uint8_t u8() { std::uint8_t v; bytes(&v, 1); return v; }
  std::uint32_t u32() { std::uint32_t v; bytes(&v, 4); return v; }
  std::uint64_t u64() { std::uint64_t v; bytes(&v, 8); return v; }
  double f64() { double v; bytes(&v, 8); return v; }
  std::int8_t i8() { std::int8_t v; bytes(&v, 1); return v; }
  std::size_t remaining() const { return buf_.size() - pos_; }

 private:
  std::string buf_;
  std::size_t pos_ = 0;
};

void write_header(Writer& w, const Dataset& ds, std::uint8_t kind) {
  w.bytes("AFPD", 4);
  w.u32(kDatasetVersion);
  w.u8(kind);
  w.u8(static_cast<std::uint8_t>(ds.source));
  w.u64(ds.seed);
  w.u64(static_cast<std::uint64_t>(ds.n()));
  w.u64(static_cast<std::uint64_t>(ds.d()));
}

void write_body(Writer& w, const Dataset& ds) {
  for (Eigen::Index i = 0; i < ds.n(); ++i)
    for (Eigen::Index j = 0; j < ds.d(); ++j) w.f64(ds.X(i, j));
  for (Eigen::Index i = 0; i < ds.n(); ++i)
    w.i8(static_cast<std::int8_t>(ds.y[i]));
}

struct ParsedHeader {
  std::uint8_t kind;
  Dataset ds;
};

ParsedHeader read_header_and_body(Reader& r) {
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, "AFPD", 4) != 0) throw FormatError("bad magic");
  std::uint32_t version = r.u32();
  if (version != kDatasetVersion) throw FormatError("unsupported version");
  std::uint8_t kind = r.u8();
  if (kind > 1) throw FormatError("unknown dataset kind");
  std::uint8_t source = r.u8();
  if (source > 4) throw FormatError("unknown source tag");
  std::uint64_t seed = r.u64();
  std::uint64_t n = r.u64();
  std::uint64_t d = r.u64();
  if (n == 0 || d == 0) throw FormatError("empty dataset");
  if (d > std::numeric_limits<std::uint64_t>::max() / 8 / n) {
    throw FormatError("truncated payload");  // declared N*d overflows the file
  }
  if (n * d * 8 + n > r.remaining()) throw FormatError("truncated payload");

  ParsedHeader out;
  out.kind = kind;
  out.ds.source = static_cast<Source>(source);
  out.ds.seed = seed;
  out.ds.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < out.ds.X.rows(); ++i)
    for (Eigen::Index j = 0; j < out.ds.X.cols(); ++j) {
      double v = r.f64();
      if (!std::isfinite(v)) throw FormatError("non-finite value in payload");
      out.ds.X(i, j) = v;
    }
  out.ds.y.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < out.ds.y.size(); ++i) {
    std::int8_t v = r.i8();
    if (v != 1 && v != -1) throw FormatError("label outside {+1,-1}");
    out.ds.y[i] = static_cast<double>(v);
  }
  return out;
}

}  // namespace

void write_dataset(const Dataset& ds, const std::string& path) {
  validate(ds);
  Writer w(path);
  write_header(w, ds, 0);
  write_body(w, ds);
  w.close(path);
}

Dataset read_dataset(const std::string& path) {
  Reader r(path);
  ParsedHeader h = read_header_and_body(r);
  if (h.kind != 0) throw FormatError("expected a plain dataset file");
  return std::move(h.ds);
}

void write_adv_file(const AdvFileContent& content, const std::string& path) {
  validate(content.data);
  if (content.targets.size() != content.data.n()) {
    throw std::invalid_argument("target count mismatch");
  }
  Writer w(path);
  write_header(w, content.data, 1);
  write_body(w, content.data);
  for (Eigen::Index i = 0; i < content.targets.size(); ++i)
    w.i8(static_cast<std::int8_t>(content.targets[i]));
  w.u64(content.provenance);
  w.u8(content.support.empty() ? 0 : 1);
  if (!content.support.empty()) {
    if (static_cast<Eigen::Index>(content.support.size()) !=
        content.data.n()) {
      throw std::invalid_argument("support list count mismatch");
    }
    for (const auto& s : content.support) {
      w.u64(s.size());
      for (Eigen::Index idx : s) w.u64(static_cast<std::uint64_t>(idx));
    }
  }
  w.close(path);
}

AdvFileContent read_adv_file(const std::string& path) {
  Reader r(path);
  ParsedHeader h = read_header_and_body(r);
  if (h.kind != 1) throw FormatError("expected an adversarial dataset file");
  AdvFileContent out;
  out.data = std::move(h.ds);
  out.targets.resize(out.data.n());
  for (Eigen::Index i = 0; i < out.targets.size(); ++i) {
    std::int8_t v = r.i8();
    if (v != 1 && v != -1) throw FormatError("target outside {+1,-1}");
    out.targets[i] = static_cast<double>(v);
  }
  out.provenance = r.u64();
  if (r.u8() == 1) {
    out.support.resize(static_cast<std::size_t>(out.data.n()));
    for (auto& s : out.support) {
      std::uint64_t cnt = r.u64();
      if (cnt > static_cast<std::uint64_t>(out.data.d())) {
        throw FormatError("support larger than dimension");
      }
      s.resize(cnt);
      for (auto& idx : s) idx = static_cast<Eigen::Index>(r.u64());
    }
  }
  return out;
}

std::uint8_t peek_kind(const std::string& path) {
  Reader r(path);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, "AFPD", 4) != 0) throw FormatError("bad magic");
  r.u32();
  return r.u8();
}

void write_csv(const Dataset& ds, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  for (Eigen::Index j = 0; j < ds.d(); ++j) {
    std::fprintf(f, "x%lld,", static_cast<long long>(j));
  }
  std::fprintf(f, "y\n");
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    for (Eigen::Index j = 0; j < ds.d(); ++j) {
      std::fprintf(f, "%.17g,", ds.X(i, j));
    }
    std::fprintf(f, "%d\n", static_cast<int>(ds.y[i]));
  }
  std::fclose(f);
}

void write_params(const NetworkParams& p, const NetworkConfig& cfg,
                  const std::string& path) {
  Writer w(path);
  w.bytes("AFPW", 4);
  w.u32(kParamsVersion);
  w.u32(static_cast<std::uint32_t>(cfg.m));
  w.u64(static_cast<std::uint64_t>(cfg.d));
  w.u32(static_cast<std::uint32_t>(cfg.mplus()));
  w.f64(cfg.gamma);
  for (int i = 0; i < cfg.m; ++i)
    for (Eigen::Index j = 0; j < cfg.d; ++j) w.f64(p.W(i, j));
  w.close(path);
}

std::pair<NetworkParams, NetworkConfig> read_params(const std::string& path) {
  Reader r(path);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, "AFPW", 4) != 0) throw FormatError("bad magic");
  if (r.u32() != kParamsVersion) throw FormatError("unsupported version");
  NetworkConfig cfg;
  cfg.m = static_cast<int>(r.u32());
  cfg.d = static_cast<Eigen::Index>(r.u64());
  cfg.m_plus = static_cast<int>(r.u32());
  cfg.gamma = r.f64();
  if (cfg.m < 1 || cfg.d < 1) throw FormatError("bad shape");
  if (static_cast<std::uint64_t>(cfg.d) >
      std::numeric_limits<std::uint64_t>::max() / 8 /
          static_cast<std::uint64_t>(cfg.m)) {
    throw FormatError("truncated payload");
  }
  NetworkParams p;
  p.W.resize(cfg.m, cfg.d);
  for (int i = 0; i < cfg.m; ++i)
    for (Eigen::Index j = 0; j < cfg.d; ++j) {
      double v = r.f64();
      if (!std::isfinite(v)) throw FormatError("non-finite value in payload");
      p.W(i, j) = v;
    }
  return {std::move(p), cfg};
}

}  // namespace advfeat
