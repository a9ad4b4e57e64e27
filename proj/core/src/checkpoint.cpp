// Copyright 2026 The unsupseg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "unsupseg/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <string_view>

#include "unsupseg/errors.hpp"

namespace unsupseg {
namespace {

constexpr std::string_view kMagic = "USEGCKPT";
constexpr std::string_view kEndMarker = "END!";
constexpr std::uint8_t kDtypeF32 = 1;

class Writer {
 public:
  void bytes(std::string_view s) { out_.insert(out_.end(), s.begin(), s.end()); }
  template <typename U>
  void uint(U v) {
    for (std::size_t b = 0; b < sizeof(U); ++b) out_.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
  }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void f32(float v) { uint(std::bit_cast<std::uint32_t>(v)); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& data, const std::string& source) : data_(data), source_(source) {}

  void need(std::size_t n, const char* what) const {
    if (data_.size() - pos_ < n) {
      throw DataError(source_ + ": truncated checkpoint while reading " + what);
    }
  }
  std::string bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  template <typename U>
  U uint(const char* what) {
    need(sizeof(U), what);
    U v = 0;
    for (std::size_t b = 0; b < sizeof(U); ++b) v |= static_cast<U>(static_cast<U>(data_[pos_ + b]) << (8 * b));
    pos_ += sizeof(U);
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(uint<std::uint64_t>(what)); }
  float f32(const char* what) { return std::bit_cast<float>(uint<std::uint32_t>(what)); }
  bool done() const { return pos_ == data_.size(); }
  const std::string& source() const { return source_; }

 private:
  const std::vector<std::uint8_t>& data_;
  const std::string& source_;
  std::size_t pos_ = 0;
};

std::uint32_t narrow32(std::size_t v, const char* what) {
  if (v > std::numeric_limits<std::uint32_t>::max()) throw ContractError(std::string(what) + " too large");
  return static_cast<std::uint32_t>(v);
}

// Every tensor in file order, keyed by name.
std::vector<std::pair<std::string, const numkit::Tensor<float>*>> named_tensors(const EncoderState<float>& s) {
  std::vector<std::pair<std::string, const numkit::Tensor<float>*>> out;
  for (const numkit::Parameter<float>* p : s.parameters()) out.emplace_back(p->name, &p->value);
  for (std::size_t l = 0; l < s.bn_stats.size(); ++l) {
    const std::string idx = std::to_string(l);
    out.emplace_back("bn" + idx + ".running_mean", &s.bn_stats[l].running_mean);
    out.emplace_back("bn" + idx + ".running_var", &s.bn_stats[l].running_var);
  }
  return out;
}

std::vector<std::pair<std::string, numkit::Tensor<float>*>> named_tensors(EncoderState<float>& s) {
  std::vector<std::pair<std::string, numkit::Tensor<float>*>> out;
  for (numkit::Parameter<float>* p : s.parameters()) out.emplace_back(p->name, &p->value);
  for (std::size_t l = 0; l < s.bn_stats.size(); ++l) {
    const std::string idx = std::to_string(l);
    out.emplace_back("bn" + idx + ".running_mean", &s.bn_stats[l].running_mean);
    out.emplace_back("bn" + idx + ".running_var", &s.bn_stats[l].running_var);
  }
  return out;
}

std::string config_mismatch(const EncoderConfig& stored, const EncoderConfig& expected) {
  auto field = [](const char* name, auto a, auto b) {
    return std::string(name) + " " + std::to_string(a) + " (expected " + std::to_string(b) + ")";
  };
  if (stored.projection_dim != expected.projection_dim)
    return field("projection_dim", stored.projection_dim, expected.projection_dim);
  if (stored.channels != expected.channels) return field("channels", stored.channels, expected.channels);
  for (std::size_t l = 0; l < kConvLayers; ++l) {
    if (stored.kernel_sizes[l] != expected.kernel_sizes[l])
      return field(("kernel_size[" + std::to_string(l) + "]").c_str(), stored.kernel_sizes[l], expected.kernel_sizes[l]);
    if (stored.strides[l] != expected.strides[l])
      return field(("stride[" + std::to_string(l) + "]").c_str(), stored.strides[l], expected.strides[l]);
  }
  if (stored.sample_rate != expected.sample_rate) return field("sample_rate", stored.sample_rate, expected.sample_rate);
  return "numeric hyperparameters";
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& checkpoint) {
  const EncoderState<float>& s = checkpoint.state;
  const EncoderConfig& c = s.config;
  Writer w;
  w.bytes(kMagic);
  w.uint(kCheckpointVersion);
  w.uint(narrow32(kConvLayers, "layer count"));
  for (std::size_t k : c.kernel_sizes) w.uint(narrow32(k, "kernel size"));
  for (std::size_t st : c.strides) w.uint(narrow32(st, "stride"));
  w.uint(narrow32(c.channels, "channels"));
  w.uint(narrow32(c.projection_dim, "projection_dim"));
  w.uint(c.sample_rate);
  w.f64(c.leaky_slope);
  w.f64(c.bn_momentum);
  w.f64(c.bn_eps);
  w.uint(checkpoint.meta.epoch);
  w.f64(checkpoint.meta.best_val_loss);
  w.uint(checkpoint.meta.seed);
  for (const auto& st : s.bn_stats) w.uint(static_cast<std::uint64_t>(st.updates));

  const auto tensors = named_tensors(s);
  w.uint(narrow32(tensors.size(), "tensor count"));
  for (const auto& [name, t] : tensors) {
    if (name.size() > std::numeric_limits<std::uint16_t>::max()) throw ContractError("tensor name too long");
    w.uint(static_cast<std::uint16_t>(name.size()));
    w.bytes(name);
    w.uint(kDtypeF32);
    w.uint(static_cast<std::uint8_t>(t->rank()));
    for (std::size_t d : t->shape()) w.uint(narrow32(d, "tensor dimension"));
    for (float v : t->data()) w.f32(v);
  }
  w.bytes(kEndMarker);
  return w.take();
}

Checkpoint parse_checkpoint(const std::vector<std::uint8_t>& bytes, const std::string& source) {
  Reader r(bytes, source);
  if (r.bytes(kMagic.size(), "magic") != kMagic) throw DataError(source + ": not a checkpoint (bad magic bytes)");
  const auto version = r.uint<std::uint32_t>("format_version");
  if (version != kCheckpointVersion) {
    throw DataError(source + ": unsupported checkpoint format_version " + std::to_string(version) + " (this build reads " +
                    std::to_string(kCheckpointVersion) + ")");
  }
  const auto layers = r.uint<std::uint32_t>("layer count");
  if (layers != kConvLayers) {
    throw DataError(source + ": checkpoint has " + std::to_string(layers) + " conv layers, expected " +
                    std::to_string(kConvLayers));
  }
  EncoderConfig c;
  for (auto& k : c.kernel_sizes) k = r.uint<std::uint32_t>("kernel sizes");
  for (auto& st : c.strides) st = r.uint<std::uint32_t>("strides");
  c.channels = r.uint<std::uint32_t>("channels");
  c.projection_dim = r.uint<std::uint32_t>("projection_dim");
  c.sample_rate = r.uint<std::uint32_t>("sample_rate");
  c.leaky_slope = r.f64("leaky_slope");
  c.bn_momentum = r.f64("bn_momentum");
  c.bn_eps = r.f64("bn_eps");
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw DataError(source + ": invalid stored config: " + e.what());
  }

  Checkpoint out;
  out.meta.epoch = r.uint<std::uint32_t>("epoch");
  out.meta.best_val_loss = r.f64("best_val_loss");
  out.meta.seed = r.uint<std::uint64_t>("seed");
  out.state = init_encoder<float>(c, 0);
  for (auto& st : out.state.bn_stats) st.updates = r.uint<std::uint64_t>("batch-norm update counts");

  std::map<std::string, numkit::Tensor<float>*> slots;
  for (auto& [name, t] : named_tensors(out.state)) slots[name] = t;
  std::map<std::string, bool> seen;

  const auto count = r.uint<std::uint32_t>("tensor count");
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = r.uint<std::uint16_t>("tensor name");
    const std::string name = r.bytes(name_len, "tensor name");
    const auto dtype = r.uint<std::uint8_t>("dtype tag");
    if (dtype != kDtypeF32) throw DataError(source + ": tensor '" + name + "' has unknown dtype tag " + std::to_string(dtype));
    const auto rank = r.uint<std::uint8_t>("tensor rank");
    numkit::Shape shape(rank);
    for (auto& d : shape) d = r.uint<std::uint32_t>("tensor shape");
    const auto slot = slots.find(name);
    if (slot == slots.end()) throw DataError(source + ": unexpected tensor '" + name + "'");
    if (seen[name]) throw DataError(source + ": duplicate tensor '" + name + "'");
    numkit::Tensor<float>& target = *slot->second;
    if (shape != target.shape()) {
      throw DataError(source + ": tensor '" + name + "' has shape " + numkit::shape_to_string(shape) + ", expected " +
                      numkit::shape_to_string(target.shape()));
    }
    r.need(target.size() * 4, "tensor payload");
    for (float& v : target.data()) v = r.f32("tensor payload");
    seen[name] = true;
  }
  for (const auto& [name, t] : slots) {
    if (!seen[name]) throw DataError(source + ": missing tensor '" + name + "'");
  }
  if (r.bytes(kEndMarker.size(), "end marker") != kEndMarker) throw DataError(source + ": corrupt end marker");
  if (!r.done()) throw DataError(source + ": trailing bytes after end marker");
  return out;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = serialize_checkpoint(checkpoint);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing checkpoint " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError("cannot move checkpoint into place at " + path.string() + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_checkpoint(bytes, path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const EncoderConfig& expected) {
  Checkpoint ckpt = load_checkpoint(path);
  if (!(ckpt.state.config == expected)) {
    throw DataError(path.string() + ": checkpoint architecture differs: " + config_mismatch(ckpt.state.config, expected));
  }
  return ckpt;
}

}  // namespace unsupseg
