#include "dualenc/checkpoint.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "wire.hpp"

namespace dualenc {

namespace {
constexpr const char* kMagic = "DUALENC-CKPT";
}

const Checkpoint::TensorRecord* Checkpoint::find_tensor(const std::string& name) const {
  for (const auto& record : tensors) {
    if (record.name == name) return &record;
  }
  return nullptr;
}

const std::string& Checkpoint::string_at(const std::string& name) const {
  auto it = strings.find(name);
  if (it == strings.end()) throw std::runtime_error("checkpoint: missing string '" + name + "'");
  return it->second;
}

std::uint64_t Checkpoint::integer_at(const std::string& name) const {
  auto it = integers.find(name);
  if (it == integers.end()) throw std::runtime_error("checkpoint: missing integer '" + name + "'");
  return it->second;
}

double Checkpoint::real_at(const std::string& name) const {
  auto it = reals.find(name);
  if (it == reals.end()) throw std::runtime_error("checkpoint: missing value '" + name + "'");
  return it->second;
}

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint file: " + path);
  out << kMagic << ' ' << Checkpoint::kVersion << '\n';

  std::vector<const Checkpoint::TensorRecord*> sorted;
  sorted.reserve(checkpoint.tensors.size());
  for (const auto& record : checkpoint.tensors) sorted.push_back(&record);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto* a, const auto* b) { return a->name < b->name; });

  wire::put_u64(out, sorted.size());
  for (const auto* record : sorted) {
    wire::put_string(out, record->name);
    wire::put_u32(out, static_cast<std::uint32_t>(record->shape.size()));
    for (int dim : record->shape) wire::put_u64(out, static_cast<std::uint64_t>(dim));
    for (double v : record->data) wire::put_f64(out, v);
  }
  wire::put_u64(out, checkpoint.integers.size());
  for (const auto& [name, value] : checkpoint.integers) {
    wire::put_string(out, name);
    wire::put_u64(out, value);
  }
  wire::put_u64(out, checkpoint.reals.size());
  for (const auto& [name, value] : checkpoint.reals) {
    wire::put_string(out, name);
    wire::put_f64(out, value);
  }
  wire::put_u64(out, checkpoint.strings.size());
  for (const auto& [name, value] : checkpoint.strings) {
    wire::put_string(out, name);
    wire::put_string(out, value);
  }
  if (!out) throw std::runtime_error("write error on checkpoint file: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint file: " + path);
  std::string magic;
  std::uint32_t version = 0;
  in >> magic >> version;
  if (!in || magic != kMagic) {
    throw std::runtime_error("not a checkpoint file (bad header): " + path);
  }
  if (version != Checkpoint::kVersion) {
    throw std::runtime_error("checkpoint version mismatch in " + path + ": file has version " +
                             std::to_string(version) + ", expected " +
                             std::to_string(Checkpoint::kVersion));
  }
  in.get();  // newline after the header

  Checkpoint checkpoint;
  const std::uint64_t n_tensors = wire::get_u64(in, "tensor count");
  for (std::uint64_t t = 0; t < n_tensors; ++t) {
    Checkpoint::TensorRecord record;
    record.name = wire::get_string(in, "tensor name");
    const std::uint32_t rank = wire::get_u32(in, "tensor rank");
    std::size_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      const auto dim = wire::get_u64(in, "tensor shape");
      record.shape.push_back(static_cast<int>(dim));
      count *= static_cast<std::size_t>(dim);
    }
    record.data.resize(count);
    for (auto& v : record.data) v = wire::get_f64(in, record.name.c_str());
    checkpoint.tensors.push_back(std::move(record));
  }
  const std::uint64_t n_integers = wire::get_u64(in, "integer count");
  for (std::uint64_t i = 0; i < n_integers; ++i) {
    std::string name = wire::get_string(in, "integer name");
    checkpoint.integers[name] = wire::get_u64(in, name.c_str());
  }
  const std::uint64_t n_reals = wire::get_u64(in, "value count");
  for (std::uint64_t i = 0; i < n_reals; ++i) {
    std::string name = wire::get_string(in, "value name");
    checkpoint.reals[name] = wire::get_f64(in, name.c_str());
  }
  const std::uint64_t n_strings = wire::get_u64(in, "string count");
  for (std::uint64_t i = 0; i < n_strings; ++i) {
    std::string name = wire::get_string(in, "string name");
    checkpoint.strings[name] = wire::get_string(in, name.c_str());
  }
  return checkpoint;
}

void load_model_tensors(const Checkpoint& checkpoint, ParamList& params) {
  for (auto& [name, tensor] : params) {
    const auto* record = checkpoint.find_tensor(name);
    if (record == nullptr) {
      throw std::runtime_error("checkpoint is missing tensor '" + name + "'");
    }
    if (record->shape != tensor.shape()) {
      throw std::runtime_error("checkpoint tensor '" + name + "' has shape " +
                               shape_to_string(record->shape) + " but the model expects " +
                               shape_to_string(tensor.shape()));
    }
    tensor.mutable_values() = record->data;
  }
}

void store_model_tensors(Checkpoint& checkpoint, const ParamList& params) {
  for (const auto& [name, tensor] : params) {
    checkpoint.tensors.push_back({name, tensor.shape(), tensor.values()});
  }
}

}  // namespace dualenc
