#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dualenc/nn.hpp"

namespace dualenc {

// Versioned container of named records. Serialization is deterministic
// (sorted sections, explicit little-endian payload), so save -> load -> save
// is byte-identical.
struct Checkpoint {
  struct TensorRecord {
    std::string name;
    Shape shape;
    std::vector<double> data;  // row-major 64-bit
  };

  static constexpr std::uint32_t kVersion = 1;

  std::vector<TensorRecord> tensors;  // kept sorted by name on save
  std::map<std::string, std::uint64_t> integers;
  std::map<std::string, double> reals;
  std::map<std::string, std::string> strings;

  const TensorRecord* find_tensor(const std::string& name) const;
  const std::string& string_at(const std::string& name) const;
  std::uint64_t integer_at(const std::string& name) const;
  double real_at(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

// Copies values from checkpoint records into the named parameter tensors.
// Throws naming the tensor on a shape mismatch or a missing record.
void load_model_tensors(const Checkpoint& checkpoint, ParamList& params);

// Snapshots current parameter values into records (names preserved).
void store_model_tensors(Checkpoint& checkpoint, const ParamList& params);

}  // namespace dualenc
