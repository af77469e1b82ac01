#include "copulacd/checkpoint.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "copulacd/error.hpp"

namespace copulacd {

namespace {

constexpr std::array<std::uint8_t, 8> kMagic{'N', 'N', 'C', 'O', 'P', 'C', 'D', '\0'};
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 31;

std::uint64_t fnv1a(const std::uint8_t* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  void bytes(const std::uint8_t* p, std::size_t n) { out_.insert(out_.end(), p, p + n); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void table(const CdfTable& t) {
    for (const double e : t.entries) f64(e);
    f64(t.bandwidth);
    u64(t.sample_count);
  }
  void blob(const std::uint8_t* p, std::size_t n) {
    u64(n);
    bytes(p, n);
  }
  std::vector<std::uint8_t>& data() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  Reader(const std::uint8_t* p, std::size_t n) : p_(p), n_(n) {}

  const std::uint8_t* take(std::size_t k) {
    if (k > n_ - pos_) throw DataError("checkpoint is truncated");
    const std::uint8_t* r = p_ + pos_;
    pos_ += k;
    return r;
  }
  std::uint32_t u32() {
    const std::uint8_t* b = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    const std::uint8_t* b = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::uint64_t count() {
    const std::uint64_t c = u64();
    if (c > kMaxElements) throw DataError("checkpoint is corrupted (implausible length)");
    return c;
  }
  CdfTable table() {
    CdfTable t;
    for (double& e : t.entries) e = f64();
    t.bandwidth = f64();
    t.sample_count = u64();
    return t;
  }
  std::vector<std::uint8_t> blob() {
    const std::uint64_t n = count();
    const std::uint8_t* b = take(n);
    return {b, b + n};
  }
  bool done() const { return pos_ == n_; }

 private:
  const std::uint8_t* p_;
  std::size_t n_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  ckpt.net.validate();
  if (ckpt.g1.size() != ckpt.g2.size()) throw UsageError("checkpoint feature vectors differ in length");
  Writer w;
  w.bytes(kMagic.data(), kMagic.size());
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(ckpt.net.hidden));
  w.u32(static_cast<std::uint32_t>(ckpt.net.output));
  w.f64(ckpt.net.output_margin);
  w.u64(ckpt.net.layer_sizes.size());
  for (const int s : ckpt.net.layer_sizes) w.u32(static_cast<std::uint32_t>(s));
  w.u64(ckpt.net.params.size());
  for (const double p : ckpt.net.params) w.f64(p);
  w.table(ckpt.table1);
  w.table(ckpt.table2);
  w.blob(reinterpret_cast<const std::uint8_t*>(ckpt.config_text.data()), ckpt.config_text.size());
  w.blob(ckpt.g1.data(), ckpt.g1.size());
  w.blob(ckpt.g2.data(), ckpt.g2.size());
  auto& out = w.data();
  w.u64(fnv1a(out.data(), out.size()));
  return std::move(out);
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw DataError("not a copula checkpoint (bad magic)");
  }
  Reader r(bytes.data(), bytes.size());
  r.take(kMagic.size());
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                    std::to_string(kCheckpointVersion) + ")");
  }
  if (bytes.size() < 8 + kMagic.size() + 4) throw DataError("checkpoint is truncated");
  const std::size_t body = bytes.size() - 8;
  Reader tail(bytes.data() + body, 8);
  if (tail.u64() != fnv1a(bytes.data(), body)) throw DataError("checkpoint is corrupted (checksum mismatch)");
  Reader rb(bytes.data() + kMagic.size() + 4, body - kMagic.size() - 4);

  Checkpoint c;
  const std::uint32_t hidden = rb.u32();
  const std::uint32_t output = rb.u32();
  if (hidden > static_cast<std::uint32_t>(Activation::identity) ||
      output > static_cast<std::uint32_t>(OutputActivation::identity)) {
    throw DataError("checkpoint names an unknown activation");
  }
  c.net.hidden = static_cast<Activation>(hidden);
  c.net.output = static_cast<OutputActivation>(output);
  c.net.output_margin = rb.f64();
  const std::uint64_t layers = rb.count();
  c.net.layer_sizes.resize(layers);
  for (int& s : c.net.layer_sizes) s = static_cast<int>(rb.u32());
  const std::uint64_t np = rb.count();
  c.net.params.resize(np);
  for (double& p : c.net.params) p = rb.f64();
  c.table1 = rb.table();
  c.table2 = rb.table();
  const auto cfg = rb.blob();
  c.config_text.assign(cfg.begin(), cfg.end());
  c.g1 = rb.blob();
  c.g2 = rb.blob();
  if (!rb.done()) throw DataError("checkpoint has trailing bytes");
  try {
    c.net.validate();
  } catch (const UsageError& e) {
    throw DataError(std::string("checkpoint holds an invalid network: ") + e.what());
  }
  if (c.g1.size() != c.g2.size()) throw DataError("checkpoint feature vectors differ in length");
  return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace copulacd
