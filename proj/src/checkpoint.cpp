#include "ter/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "ter/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is written as raw little-endian floats");

namespace ter {

void Checkpoint::put_tensor(const std::string& name, DenseMatrix matrix) {
  for (auto& [n, m] : tensors) {
    if (n == name) {
      m = std::move(matrix);
      return;
    }
  }
  tensors.emplace_back(name, std::move(matrix));
}

const DenseMatrix* Checkpoint::find_tensor(std::string_view name) const {
  for (const auto& [n, m] : tensors) {
    if (n == name) return &m;
  }
  return nullptr;
}

const DenseMatrix& Checkpoint::tensor(std::string_view name) const {
  const auto* t = find_tensor(name);
  if (t == nullptr) throw Error(ErrorCode::Format, "checkpoint has no tensor '" + std::string(name) + "'");
  return *t;
}

void Checkpoint::save(const std::string& path) const {
  auto sorted = tensors;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  nlohmann::json full = header;
  nlohmann::json directory = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, m] : sorted) {
    directory.push_back({{"name", name}, {"rows", m.rows}, {"cols", m.cols}, {"offset", offset}});
    offset += m.size() * sizeof(float);
  }
  full["tensors"] = std::move(directory);
  const std::string header_bytes = full.dump();

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write checkpoint: " + tmp);
    out.write(kMagic, 4);
    const std::uint32_t version = kFormatVersion;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    const std::uint64_t header_len = header_bytes.size();
    out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
    out.write(header_bytes.data(), static_cast<std::streamsize>(header_bytes.size()));
    for (const auto& [name, m] : sorted) {
      out.write(reinterpret_cast<const char*>(m.data.data()),
                static_cast<std::streamsize>(m.size() * sizeof(float)));
    }
    if (!out) throw Error(ErrorCode::Io, "short write to checkpoint: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw Error(ErrorCode::Io, "cannot move checkpoint into place: " + path);
  }
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open checkpoint: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < 4 + sizeof(std::uint32_t) + sizeof(std::uint64_t)) {
    throw Error(ErrorCode::Format, "checkpoint too short: " + path);
  }
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::Format, "bad magic bytes in checkpoint: " + path);
  }
  std::uint32_t version = 0;
  std::memcpy(&version, bytes.data() + 4, sizeof(version));
  if (version != kFormatVersion) {
    throw Error(ErrorCode::Version, "checkpoint format version " + std::to_string(version) +
                                        " does not match supported version " +
                                        std::to_string(kFormatVersion));
  }
  std::uint64_t header_len = 0;
  std::memcpy(&header_len, bytes.data() + 8, sizeof(header_len));
  const std::uint64_t header_start = 16;
  if (header_start + header_len > bytes.size()) {
    throw Error(ErrorCode::Format, "header length prefix exceeds file size: " + path);
  }

  Checkpoint ckpt;
  try {
    ckpt.header = nlohmann::json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(header_start),
                                        bytes.begin() + static_cast<std::ptrdiff_t>(header_start + header_len));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, "cannot parse checkpoint header: " + std::string(e.what()));
  }
  if (!ckpt.header.contains("tensors") || !ckpt.header["tensors"].is_array()) {
    throw Error(ErrorCode::Format, "checkpoint header has no tensor directory");
  }

  const std::uint64_t payload_start = header_start + header_len;
  for (const auto& entry : ckpt.header["tensors"]) {
    const auto name = entry.at("name").get<std::string>();
    const auto rows = entry.at("rows").get<int>();
    const auto cols = entry.at("cols").get<int>();
    const auto offset = entry.at("offset").get<std::uint64_t>();
    if (rows < 0 || cols < 0) {
      throw Error(ErrorCode::Format, "tensor '" + name + "' has negative shape");
    }
    DenseMatrix m(rows, cols);
    const std::uint64_t nbytes = m.size() * sizeof(float);
    if (payload_start + offset + nbytes > bytes.size()) {
      throw Error(ErrorCode::Format, "tensor extent out of bounds for '" + name + "'");
    }
    std::memcpy(m.data.data(), bytes.data() + payload_start + offset, nbytes);
    ckpt.tensors.emplace_back(name, std::move(m));
  }
  ckpt.header.erase("tensors");  // regenerated on save
  return ckpt;
}

}  // namespace ter
