#include "fbmhd/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <vector>

namespace fbmhd {

namespace {

constexpr char kMagic[8] = {'F', 'B', 'M', 'H', 'D', 'C', 'K', 'P'};

template <class T>
T to_le(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

class Writer {
 public:
  template <class T>
  void put(T v) {
    v = to_le(v);
    const auto* p = reinterpret_cast<const char*>(&v);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }
  void put_array(const double* d, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) put(d[i]);
  }
  void raw(const char* p, size_t n) { buf_.insert(buf_.end(), p, p + n); }
  const std::vector<char>& bytes() const { return buf_; }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  explicit Reader(std::vector<char> b) : buf_(std::move(b)) {}
  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return to_le(v);
  }
  void get_array(double* d, Eigen::Index n) {
    need(static_cast<size_t>(n) * sizeof(double));
    for (Eigen::Index i = 0; i < n; ++i) d[i] = get<double>();
  }
  void need(size_t n) const {
    if (pos_ + n > buf_.size()) throw CheckpointError(CheckpointError::Kind::corrupt, "checkpoint: truncated file");
  }
  size_t remaining() const { return buf_.size() - pos_; }
  const char* cursor() const { return buf_.data() + pos_; }
  void skip(size_t n) { need(n); pos_ += n; }

 private:
  std::vector<char> buf_;
  size_t pos_ = 0;
};

}  // namespace

void write_checkpoint(const std::string& path, const Grid& g, const Params& p, const State& s) {
  const Eigen::Index nn = static_cast<Eigen::Index>(g.nx()) * g.nz();
  for (const VolumeField* f : {&s.v.c1, &s.v.c2, &s.b.c1, &s.b.c2})
    if (f->size() != nn) throw CheckpointError(CheckpointError::Kind::mismatch, "checkpoint: state does not match grid");
  if (s.h.size() != g.nx()) throw CheckpointError(CheckpointError::Kind::mismatch, "checkpoint: state does not match grid");

  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::int32_t>(g.nx());
  w.put<std::int32_t>(g.nz());
  for (double x : {p.g, p.sigma, p.kappa, p.bbar1, p.bbar2, s.t}) w.put(x);
  for (const VolumeField* f : {&s.v.c1, &s.v.c2, &s.b.c1, &s.b.c2}) w.put_array(f->data(), nn);
  w.put_array(s.h.data(), s.h.size());
  // the pressure is the warm start of the next solve; without it a resumed
  // run drifts from the uninterrupted one at roundoff level
  const VolumeField q = s.q.size() == nn ? s.q : VolumeField::Zero(g.nx(), g.nz());
  w.put_array(q.data(), nn);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw CheckpointError(CheckpointError::Kind::io, "checkpoint: cannot open " + tmp);
    os.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    if (!os) throw CheckpointError(CheckpointError::Kind::io, "checkpoint: write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw CheckpointError(CheckpointError::Kind::io, "checkpoint: rename failed: " + ec.message());
}

CheckpointData read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError(CheckpointError::Kind::io, "checkpoint: cannot open " + path);
  Reader r(std::vector<char>(std::istreambuf_iterator<char>(is), {}));

  r.need(sizeof kMagic);
  if (std::memcmp(r.cursor(), kMagic, sizeof kMagic) != 0)
    throw CheckpointError(CheckpointError::Kind::corrupt, "checkpoint: bad magic in " + path);
  r.skip(sizeof kMagic);
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw CheckpointError(CheckpointError::Kind::version,
                          "checkpoint: version " + std::to_string(version) + " is not supported");
  CheckpointData d;
  d.nx = r.get<std::int32_t>();
  d.nz = r.get<std::int32_t>();
  if (d.nx < 8 || d.nx % 2 != 0 || d.nz < 8 || d.nx > (1 << 16) || d.nz > (1 << 16))
    throw CheckpointError(CheckpointError::Kind::corrupt, "checkpoint: implausible grid size");
  d.params.g = r.get<double>();
  d.params.sigma = r.get<double>();
  d.params.kappa = r.get<double>();
  d.params.bbar1 = r.get<double>();
  d.params.bbar2 = r.get<double>();
  d.state.t = r.get<double>();

  const Eigen::Index nn = static_cast<Eigen::Index>(d.nx) * d.nz;
  const size_t expect = (5 * static_cast<size_t>(nn) + d.nx) * sizeof(double);
  if (r.remaining() != expect)
    throw CheckpointError(CheckpointError::Kind::corrupt, "checkpoint: payload size does not match header");
  for (VectorVolumeField* v : {&d.state.v, &d.state.b}) {
    v->c1.resize(d.nx, d.nz);
    v->c2.resize(d.nx, d.nz);
    r.get_array(v->c1.data(), nn);
    r.get_array(v->c2.data(), nn);
  }
  d.state.h.resize(d.nx);
  r.get_array(d.state.h.data(), d.nx);
  d.state.q.resize(d.nx, d.nz);
  r.get_array(d.state.q.data(), nn);
  return d;
}

State load_checkpoint(const std::string& path, const Grid& g) {
  CheckpointData d = read_checkpoint(path);
  if (d.nx != g.nx() || d.nz != g.nz())
    throw CheckpointError(CheckpointError::Kind::mismatch,
                          "checkpoint: grid " + std::to_string(d.nx) + "x" + std::to_string(d.nz) +
                              " does not match " + std::to_string(g.nx()) + "x" +
                              std::to_string(g.nz()));
  d.state.geo = flat_geometry(g);
  return std::move(d.state);
}

}  // namespace fbmhd
