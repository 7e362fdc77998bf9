#include "g2p/nn/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "g2p/io_util.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

namespace g2p {
namespace nn {

namespace {

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) {
      throw CheckpointError("checkpoint truncated");
    }
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string get_bytes(size_t n) {
    if (pos_ + n > bytes_.size()) {
      throw CheckpointError("checkpoint truncated");
    }
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  size_t pos_ = 0;
};

}  // namespace

std::string Checkpoint::serialize() const {
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  put<uint32_t>(out, kVersion);
  put<uint64_t>(out, alphabet_fingerprint);
  const std::string cfg = config.dump();
  put<uint32_t>(out, static_cast<uint32_t>(cfg.size()));
  out += cfg;
  auto ps = params.params();
  put<uint32_t>(out, static_cast<uint32_t>(ps.size()));
  for (const Param* p : ps) {
    put<uint16_t>(out, static_cast<uint16_t>(p->name.size()));
    out += p->name;
    put<uint8_t>(out, static_cast<uint8_t>(p->value.shape.size()));
    for (int d : p->value.shape) put<uint32_t>(out, static_cast<uint32_t>(d));
    const size_t nbytes = p->value.data.size() * sizeof(float);
    const size_t off = out.size();
    out.resize(off + nbytes);
    std::memcpy(out.data() + off, p->value.data.data(), nbytes);
  }
  return out;
}

Checkpoint Checkpoint::deserialize(const std::string& bytes) {
  Reader r(bytes);
  const std::string magic = r.get_bytes(sizeof(kMagic));
  if (std::memcmp(magic.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("bad checkpoint magic");
  }
  const uint32_t version = r.get<uint32_t>();
  if (version != kVersion) {
    throw CheckpointError("unsupported checkpoint version " +
                          std::to_string(version));
  }
  Checkpoint ck;
  ck.alphabet_fingerprint = r.get<uint64_t>();
  const uint32_t cfg_len = r.get<uint32_t>();
  const std::string cfg = r.get_bytes(cfg_len);
  try {
    ck.config = nlohmann::json::parse(cfg);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad checkpoint config: ") + e.what());
  }
  const uint32_t n_tensors = r.get<uint32_t>();
  for (uint32_t i = 0; i < n_tensors; ++i) {
    const uint16_t name_len = r.get<uint16_t>();
    const std::string name = r.get_bytes(name_len);
    const uint8_t ndim = r.get<uint8_t>();
    std::vector<int> shape;
    int64_t numel = 1;
    for (uint8_t d = 0; d < ndim; ++d) {
      shape.push_back(static_cast<int>(r.get<uint32_t>()));
      numel *= shape.back();
    }
    Param* p = ck.params.create_const(name, shape, 0.0f);
    const std::string raw = r.get_bytes(static_cast<size_t>(numel) * sizeof(float));
    std::memcpy(p->value.data.data(), raw.data(), raw.size());
  }
  if (!r.done()) throw CheckpointError("trailing bytes after checkpoint");
  return ck;
}

void Checkpoint::save(const std::string& path) const {
  write_file_atomic(path, serialize());
}

Checkpoint Checkpoint::load(const std::string& path) {
  try {
    return deserialize(read_file(path));
  } catch (const DataError& e) {
    throw CheckpointError(e.what());
  }
}

Checkpoint Checkpoint::load(const std::string& path,
                            uint64_t expected_fingerprint) {
  Checkpoint ck = load(path);
  if (ck.alphabet_fingerprint != expected_fingerprint) {
    throw CheckpointError(
        "alphabet fingerprint mismatch: checkpoint was trained under a "
        "different alphabet");
  }
  return ck;
}

void restore_params(ParamStore& dst, const Checkpoint& ck) {
  auto dst_params = dst.params();
  auto src_params = ck.params.params();
  if (dst_params.size() != src_params.size()) {
    throw CheckpointError("checkpoint has " + std::to_string(src_params.size()) +
                          " tensors, model expects " +
                          std::to_string(dst_params.size()));
  }
  for (Param* p : dst_params) {
    const Param* q = ck.params.find(p->name);
    if (!q) throw CheckpointError("checkpoint is missing tensor " + p->name);
    if (q->value.shape != p->value.shape) {
      throw CheckpointError("tensor " + p->name + " has shape " +
                            shape_str(q->value.shape) + ", expected " +
                            shape_str(p->value.shape));
    }
    p->value = q->value;
  }
}

}  // namespace nn
}  // namespace g2p
