#include "jflow/snapshot.hpp"

#include "jflow/error.hpp"
#include "jflow/io.hpp"

#include <algorithm>
#include <array>
#include <iterator>
#include <optional>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace jflow {

namespace {

template <class T>
void put_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(bytes.data(), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  std::array<char, sizeof(T)> bytes;
  if (!in.read(bytes.data(), sizeof(T))) throw FormatError("JFLW snapshot truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

} // namespace

void write_snapshot(std::ostream& out, const Snapshot& snap) {
  if (snap.components.empty()) throw DomainError("snapshot needs at least one component");
  const Grid& g = snap.components.front().grid();
  for (const auto& c : snap.components) {
    if (!(c.grid() == g)) throw DomainError("snapshot components live on different grids");
  }
  out.write("JFLW", 4);
  put_le<std::uint16_t>(out, Snapshot::kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.n()));
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(snap.components.size()));
  for (const auto& c : snap.components) {
    for (double v : c.values()) put_le<double>(out, v);
  }
}

Snapshot read_snapshot(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || std::string(magic.data(), 4) != "JFLW") {
    throw FormatError("not a JFLW snapshot (bad magic)");
  }
  const auto version = get_le<std::uint16_t>(in);
  if (version != Snapshot::kVersion) {
    throw FormatError("unsupported JFLW version " + std::to_string(version));
  }
  const auto n = get_le<std::uint32_t>(in);
  const auto count = get_le<std::uint16_t>(in);
  if (n < 4 || n % 2 != 0 || count == 0) throw FormatError("JFLW header has invalid N or count");

  const std::string rest((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (rest.size() % 8 != 0) throw FormatError("JFLW payload is not a whole number of f64");
  std::vector<double> payload(rest.size() / 8);
  for (std::size_t i = 0; i < payload.size(); ++i) {
    std::array<char, 8> bytes;
    std::memcpy(bytes.data(), rest.data() + 8 * i, 8);
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    std::memcpy(&payload[i], bytes.data(), 8);
  }
  const std::size_t per = payload.size() / count;
  if (per * count != payload.size()) throw FormatError("JFLW payload length inconsistent with count");
  const std::size_t n2 = static_cast<std::size_t>(n) * n;
  std::optional<Grid> grid;
  if (per == n2) grid = Grid::plane(static_cast<int>(n));
  if (per == n2 * n2) grid = Grid::torus(static_cast<int>(n));
  if (!grid) throw FormatError("JFLW payload length matches neither N^2 nor N^4");

  Snapshot snap;
  for (std::size_t c = 0; c < count; ++c) {
    auto first = payload.begin() + static_cast<std::ptrdiff_t>(c * per);
    snap.components.emplace_back(*grid, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(per)));
  }
  return snap;
}

void write_snapshot(const std::filesystem::path& path, const Snapshot& snap) {
  std::ostringstream buf(std::ios::binary);
  write_snapshot(buf, snap);
  write_file_atomic(path, buf.str());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open snapshot " + path.string());
  return read_snapshot(in);
}

} // namespace jflow
