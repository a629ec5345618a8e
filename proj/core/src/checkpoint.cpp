#include "dicoh/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "dicoh/error.hpp"

namespace dicoh {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[8] = {'D', 'I', 'C', 'O', 'H', 'C', 'K', '1'};

void put_u64(std::ostream& os, std::uint64_t v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); }

void put_string(std::ostream& os, const std::string& s) {
  put_u64(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint64_t get_u64(std::istream& is) {
  std::uint64_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw ParseError("truncated checkpoint");
  return v;
}

std::string get_string(std::istream& is) {
  const std::uint64_t n = get_u64(is);
  if (n > (1ULL << 32)) throw ParseError("corrupt checkpoint string length");
  std::string s(n, '\0');
  if (n && !is.read(s.data(), static_cast<std::streamsize>(n))) throw ParseError("truncated checkpoint");
  return s;
}

}  // namespace

const Tensor* CheckpointData::find(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return &t.tensor;
  return nullptr;
}

const std::string& CheckpointData::meta(const std::string& key) const {
  auto it = metadata.find(key);
  if (it == metadata.end()) throw ParseError("checkpoint lacks metadata key '" + key + "'");
  return it->second;
}

void write_checkpoint(const std::filesystem::path& path, const CheckpointData& data) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os.write(kMagic, sizeof kMagic);
  put_u64(os, data.metadata.size());
  for (const auto& [k, v] : data.metadata) {
    put_string(os, k);
    put_string(os, v);
  }
  put_u64(os, data.tensors.size());
  for (const auto& nt : data.tensors) {
    put_string(os, nt.name);
    put_u64(os, nt.tensor.shape().size());
    for (std::size_t d : nt.tensor.shape()) put_u64(os, d);
    os.write(reinterpret_cast<const char*>(nt.tensor.data()),
             static_cast<std::streamsize>(nt.tensor.size() * sizeof(double)));
  }
  if (!os) throw Error("failed writing checkpoint " + path.string());
}

CheckpointData read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open checkpoint " + path.string());
  char magic[8];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw ParseError(path.string() + " is not a dicoh checkpoint");
  }
  CheckpointData data;
  const std::uint64_t nmeta = get_u64(is);
  for (std::uint64_t i = 0; i < nmeta; ++i) {
    std::string k = get_string(is);
    data.metadata[k] = get_string(is);
  }
  const std::uint64_t ntensors = get_u64(is);
  for (std::uint64_t i = 0; i < ntensors; ++i) {
    NamedTensor nt;
    nt.name = get_string(is);
    const std::uint64_t rank = get_u64(is);
    if (rank > 8) throw ParseError("corrupt tensor rank in checkpoint");
    Shape shape(rank);
    for (auto& d : shape) d = get_u64(is);
    std::vector<double> values(shape_size(shape));
    if (!values.empty() &&
        !is.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)))) {
      throw ParseError("truncated tensor '" + nt.name + "' in checkpoint");
    }
    nt.tensor = Tensor(std::move(shape), std::move(values));
    data.tensors.push_back(std::move(nt));
  }
  return data;
}

void store_parameters(CheckpointData& out, const ParameterStore& params) {
  for (const Parameter* p : params.all()) out.tensors.push_back({"param/" + p->name, p->value});
}

void store_adam(CheckpointData& out, const AdamState& adam) {
  auto bits_of = [](double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    return std::to_string(bits);
  };
  out.metadata["adam.learning_rate"] = bits_of(adam.learning_rate);
  out.metadata["adam.beta1"] = bits_of(adam.beta1);
  out.metadata["adam.beta2"] = bits_of(adam.beta2);
  out.metadata["adam.epsilon"] = bits_of(adam.epsilon);
  out.metadata["adam.step"] = std::to_string(adam.step);
  for (const auto& [name, m] : adam.moments) {
    out.tensors.push_back({"adam.first/" + name, m.first});
    out.tensors.push_back({"adam.second/" + name, m.second});
  }
}

void restore_parameters(const CheckpointData& in, ParameterStore& params) {
  for (Parameter* p : params.all()) {
    const Tensor* t = in.find("param/" + p->name);
    if (!t) throw CompatibilityError("checkpoint lacks parameter '" + p->name + "'");
    if (!t->same_shape(p->value)) {
      throw CompatibilityError("parameter '" + p->name + "' has shape " + shape_string(t->shape()) +
                               " in the checkpoint but " + shape_string(p->value.shape()) + " in the model");
    }
    p->value = *t;
    p->zero_grad();
  }
}

AdamState restore_adam(const CheckpointData& in) {
  auto bits = [&](const std::string& k) { return std::bit_cast<double>(std::stoull(in.meta(k))); };
  AdamState s;
  s.learning_rate = bits("adam.learning_rate");
  s.beta1 = bits("adam.beta1");
  s.beta2 = bits("adam.beta2");
  s.epsilon = bits("adam.epsilon");
  s.step = std::stoull(in.meta("adam.step"));
  const std::string first = "adam.first/";
  for (const auto& nt : in.tensors) {
    if (nt.name.rfind(first, 0) != 0) continue;
    const std::string name = nt.name.substr(first.size());
    const Tensor* second = in.find("adam.second/" + name);
    if (!second) throw ParseError("checkpoint has a first moment but no second moment for '" + name + "'");
    s.moments[name] = AdamMoments{nt.tensor, *second};
  }
  return s;
}

}  // namespace dicoh
