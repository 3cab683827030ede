// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "core/container.hpp"

#include <bit>
#include <cstring>
#include <limits>
#include <map>
#include <set>

#include "core/calibrate.hpp"
#include "core/wav.hpp"

namespace tfmlp {

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void i32(std::int32_t v) { put(static_cast<std::uint32_t>(v), 4); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  std::vector<std::uint8_t>& out() { return out_; }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }
  std::uint8_t u8(const char* what) { return static_cast<std::uint8_t>(get(1, what)); }
  std::uint16_t u16(const char* what) { return static_cast<std::uint16_t>(get(2, what)); }
  std::uint32_t u32(const char* what) { return static_cast<std::uint32_t>(get(4, what)); }
  std::uint64_t u64(const char* what) { return get(8, what); }
  std::int32_t i32(const char* what) { return static_cast<std::int32_t>(u32(what)); }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    need(n, what);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  [[noreturn]] void fail(const std::string& msg) const { fail_at(pos_, msg); }
  [[noreturn]] static void fail_at(std::size_t at, const std::string& msg) {
    raise(ErrorKind::kFormat, "byte " + std::to_string(at) + ": " + msg);
  }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      fail("truncated while reading " + std::string(what) + " (need " + std::to_string(n) +
           " bytes, " + std::to_string(bytes_.size() - pos_) + " left)");
    }
  }
  std::uint64_t get(int n, const char* what) {
    need(static_cast<std::size_t>(n), what);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::size_t channel_of(std::size_t flat, const Shape& shape, std::size_t axis) {
  std::size_t inner = 1;
  for (std::size_t d = axis + 1; d < shape.size(); ++d) inner *= shape[d];
  return (flat / inner) % shape[axis];
}

}  // namespace

std::size_t weight_channel_axis(const std::string& name) {
  return name == "dec.weight" || name == "decompress.weight" ? 1 : 0;
}

namespace {

std::string header_text(const ModelConfig& cfg, const PrecisionPlan& plan) {
  const nlohmann::json header = {{"format", "tfmlp"},
                                 {"config", to_json(cfg)},
                                 {"preset", plan.preset},
                                 {"plan", plan_to_json(plan, false)}};
  return header.dump();
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const Model& model) {
  const PrecisionPlan& plan = model.plan();
  const std::string header_text = tfmlp::header_text(model.config(), plan);

  struct Pending {
    TensorEntry entry;
    std::vector<std::uint8_t> data;
  };
  std::vector<Pending> tensors;
  std::uint64_t offset = 0;
  for_each_param(model.params(), [&](const std::string& name, const Tensor& t) {
    Pending p;
    p.entry.name = name;
    p.entry.shape = t.shape();
    const auto it = plan.entries.find(name);
    const Precision prec = it == plan.entries.end() ? Precision::kF32 : it->second.precision;
    if (prec == Precision::kInt8) {
      const QuantParams& qp = *it->second.qp;
      const std::size_t axis = weight_channel_axis(name);
      p.entry.dtype = DType::kI8;
      p.entry.quant = qp;
      p.data.resize(t.size());
      for (std::size_t i = 0; i < t.size(); ++i) {
        const float s = qp.channel_scale(channel_of(i, t.shape(), axis));
        p.data[i] = static_cast<std::uint8_t>(static_cast<std::int8_t>(
            quantize_value(t[i], s, 0, qp.qmin(), qp.qmax())));
      }
    } else if (prec == Precision::kBF16) {
      p.entry.dtype = DType::kBF16;
      p.data.resize(2 * t.size());
      for (std::size_t i = 0; i < t.size(); ++i) {
        const std::uint16_t b = bf16_bits(bf16_round(t[i]));
        p.data[2 * i] = static_cast<std::uint8_t>(b);
        p.data[2 * i + 1] = static_cast<std::uint8_t>(b >> 8);
      }
    } else {
      p.entry.dtype = DType::kF32;
      p.data.resize(4 * t.size());
      for (std::size_t i = 0; i < t.size(); ++i) {
        const std::uint32_t b = std::bit_cast<std::uint32_t>(t[i]);
        for (int k = 0; k < 4; ++k) p.data[4 * i + k] = static_cast<std::uint8_t>(b >> (8 * k));
      }
    }
    p.entry.offset = offset;
    p.entry.length = p.data.size();
    offset += p.data.size();
    tensors.push_back(std::move(p));
  });

  Writer w;
  w.bytes(kContainerMagic, sizeof(kContainerMagic));
  w.u32(kContainerVersion);
  w.u32(static_cast<std::uint32_t>(header_text.size()));
  w.bytes(header_text.data(), header_text.size());
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const Pending& p : tensors) {
    const TensorEntry& e = p.entry;
    w.u16(static_cast<std::uint16_t>(e.name.size()));
    w.bytes(e.name.data(), e.name.size());
    w.u8(static_cast<std::uint8_t>(e.dtype));
    w.u8(static_cast<std::uint8_t>(e.shape.size()));
    for (std::size_t d : e.shape) w.u32(static_cast<std::uint32_t>(d));
    w.u64(e.offset);
    w.u64(e.length);
    w.u8(e.quant ? 1 : 0);
    if (e.quant) {
      w.u8(static_cast<std::uint8_t>(e.quant->bits));
      w.u32(static_cast<std::uint32_t>(e.quant->scale.size()));
      for (float s : e.quant->scale) w.f32(s);
      w.i32(e.quant->zero_point);
    }
  }
  for (const Pending& p : tensors) w.bytes(p.data.data(), p.data.size());
  return std::move(w.out());
}

ContainerInfo read_container_info(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  ContainerInfo info;
  info.total_bytes = bytes.size();
  const auto magic = r.take(sizeof(kContainerMagic), "magic");
  if (std::memcmp(magic.data(), kContainerMagic, sizeof(kContainerMagic)) != 0) {
    Reader::fail_at(0, "bad magic; not a tfmlp model container");
  }
  const std::size_t version_at = r.pos();
  info.version = r.u32("version");
  if (info.version != kContainerVersion) {
    Reader::fail_at(version_at, "unsupported container version " + std::to_string(info.version));
  }
  const std::uint32_t header_len = r.u32("header length");
  const std::size_t header_at = r.pos();
  const auto header = r.take(header_len, "header");
  try {
    info.header = nlohmann::json::parse(header.begin(), header.end());
  } catch (const nlohmann::json::exception& e) {
    Reader::fail_at(header_at, std::string("header is not valid JSON: ") + e.what());
  }

  const std::uint32_t count = r.u32("tensor count");
  for (std::uint32_t i = 0; i < count; ++i) {
    TensorEntry e;
    const std::size_t entry_at = r.pos();
    const std::uint16_t name_len = r.u16("tensor name length");
    const auto name = r.take(name_len, "tensor name");
    e.name.assign(name.begin(), name.end());
    const std::uint8_t dtype = r.u8("dtype");
    if (dtype > static_cast<std::uint8_t>(DType::kI32)) {
      Reader::fail_at(entry_at, e.name + ": unknown dtype code " + std::to_string(dtype));
    }
    e.dtype = static_cast<DType>(dtype);
    const std::uint8_t rank = r.u8("rank");
    if (rank == 0) Reader::fail_at(entry_at, e.name + ": rank 0 tensor");
    for (std::uint8_t d = 0; d < rank; ++d) {
      const std::uint32_t dim = r.u32("dimension");
      if (dim == 0) Reader::fail_at(entry_at, e.name + ": zero dimension");
      e.shape.push_back(dim);
    }
    e.offset = r.u64("tensor offset");
    e.length = r.u64("tensor length");
    if (e.length != shape_numel(e.shape) * dtype_size(e.dtype)) {
      Reader::fail_at(entry_at, e.name + ": declared length " + std::to_string(e.length) +
                                    " != " + to_string(e.dtype) + " size x " +
                                    std::to_string(shape_numel(e.shape)) + " elements");
    }
    if (r.u8("quant flag")) {
      QuantParams qp;
      qp.bits = r.u8("quant bits");
      const std::uint32_t n = r.u32("scale count");
      if (n == 0 || n > 1u << 20) Reader::fail_at(entry_at, e.name + ": bad scale count");
      qp.scale.clear();
      for (std::uint32_t k = 0; k < n; ++k) qp.scale.push_back(r.f32("scale"));
      qp.zero_point = r.i32("zero point");
      qp.symmetric = qp.zero_point == 0;
      try {
        qp.validate();
      } catch (const Error& err) {
        Reader::fail_at(entry_at, e.name + ": " + err.what());
      }
      e.quant = std::move(qp);
    }
    info.tensors.push_back(std::move(e));
  }
  info.payload_offset = r.pos();
  info.payload_bytes = bytes.size() - info.payload_offset;
  for (const TensorEntry& e : info.tensors) {
    if (e.offset > info.payload_bytes || e.length > info.payload_bytes - e.offset) {
      Reader::fail_at(info.payload_offset + e.offset,
                      e.name + ": payload runs past end of file (" +
                          std::to_string(bytes.size()) + " bytes)");
    }
  }
  return info;
}

Model deserialize_model(std::span<const std::uint8_t> bytes) {
  const ContainerInfo info = read_container_info(bytes);
  ModelConfig cfg;
  PrecisionPlan plan;
  try {
    if (info.header.value("format", "") != "tfmlp") {
      raise(ErrorKind::kFormat, "header format tag is not 'tfmlp'");
    }
    cfg = config_from_json(info.header.at("config"));
    plan = plan_from_json(info.header.at("plan"));
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorKind::kFormat, std::string("header: ") + e.what());
  }

  ModelParams params = zero_params(cfg);
  std::map<std::string, Tensor*> slots;
  for_each_param(params, [&](const std::string& name, Tensor& t) { slots[name] = &t; });
  std::set<std::string> seen;
  for (const TensorEntry& e : info.tensors) {
    const auto slot = slots.find(e.name);
    if (slot == slots.end()) raise(ErrorKind::kSchema, "unknown tensor " + e.name);
    if (!seen.insert(e.name).second) raise(ErrorKind::kSchema, "duplicate tensor " + e.name);
    Tensor& t = *slot->second;
    if (e.shape != t.shape()) {
      raise(ErrorKind::kSchema, e.name + " has shape " + shape_string(e.shape) + ", expected " +
                                    shape_string(t.shape()));
    }
    const std::uint8_t* d = bytes.data() + info.payload_offset + e.offset;
    switch (e.dtype) {
      case DType::kF32:
        for (std::size_t i = 0; i < t.size(); ++i) {
          std::uint32_t b = 0;
          for (int k = 0; k < 4; ++k) b |= static_cast<std::uint32_t>(d[4 * i + k]) << (8 * k);
          t[i] = std::bit_cast<float>(b);
        }
        break;
      case DType::kBF16:
        for (std::size_t i = 0; i < t.size(); ++i) {
          t[i] = bf16_from_bits(static_cast<std::uint16_t>(d[2 * i] | (d[2 * i + 1] << 8)));
        }
        break;
      case DType::kI8: {
        if (!e.quant) raise(ErrorKind::kFormat, e.name + ": int8 tensor without scales");
        const std::size_t axis = weight_channel_axis(e.name);
        if (e.quant->channels() != 1 && e.quant->channels() != t.shape()[axis]) {
          raise(ErrorKind::kFormat, e.name + ": scale count does not match channels");
        }
        for (std::size_t i = 0; i < t.size(); ++i) {
          const float s = e.quant->channel_scale(channel_of(i, t.shape(), axis));
          t[i] = dequantize_value(static_cast<std::int8_t>(d[i]), s, 0);
        }
        auto it = plan.entries.find(e.name);
        if (it == plan.entries.end()) raise(ErrorKind::kSchema, e.name + ": not in plan");
        it->second.qp = e.quant;
        break;
      }
      default:
        raise(ErrorKind::kFormat, e.name + ": unsupported dtype " + to_string(e.dtype));
    }
  }
  for (const auto& [name, t] : slots) {
    if (!seen.count(name)) raise(ErrorKind::kSchema, "missing tensor " + name);
  }
  return Model(cfg, std::move(params), std::move(plan));
}

void save_model(const Model& model, const std::string& path) {
  write_file(path, serialize_model(model));
}

Model load_model(const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  try {
    return deserialize_model(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

std::size_t estimate_container_size(const ModelConfig& cfg, const std::string& preset) {
  const Model zero(cfg, zero_params(cfg));
  if (preset == "fp32") return serialize_model(zero).size();
  const std::vector<std::vector<float>> silence = {std::vector<float>(4 * cfg.hop_len, 0.0f)};
  const Model quantized = quantize_model(zero, preset, silence);
  // Widest printed float and int32 in every activation field.
  PrecisionPlan widest = quantized.plan();
  constexpr float kWidest = -1.17549435e-38f;
  for (auto& [name, a] : widest.entries) {
    if (!a.qp) continue;
    for (float& v : a.qp->scale) v = kWidest;
    for (float& v : a.qp->observed_min) v = kWidest;
    for (float& v : a.qp->observed_max) v = kWidest;
    a.qp->zero_point = std::numeric_limits<std::int32_t>::min();
  }
  return serialize_model(quantized).size() - header_text(cfg, quantized.plan()).size() +
         header_text(cfg, widest).size();
}

}  // namespace tfmlp
