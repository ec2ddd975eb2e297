#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ter/numkit.hpp"

namespace ter {

/// Versioned binary container: "TERC" magic, format version, 8-byte
/// little-endian header length, UTF-8 JSON header, then the named
/// tensors as little-endian 32-bit floats in row-major order. The
/// tensor directory inside the header is regenerated on save (tensors
/// sorted by name), so a load -> save round trip is bitwise idempotent.
struct Checkpoint {
  static constexpr std::uint32_t kFormatVersion = 1;
  static constexpr char kMagic[4] = {'T', 'E', 'R', 'C'};

  nlohmann::json header;  // everything except the tensor directory
  std::vector<std::pair<std::string, DenseMatrix>> tensors;

  void put_tensor(const std::string& name, DenseMatrix matrix);
  const DenseMatrix* find_tensor(std::string_view name) const;
  const DenseMatrix& tensor(std::string_view name) const;  // throws when absent

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
};

}  // namespace ter
