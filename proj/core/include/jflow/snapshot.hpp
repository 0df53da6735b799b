#pragma once

#include "jflow/field.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace jflow {

/// Binary field snapshot:
///   "JFLW" | version u16 | N u32 | component count u16 | f64 values
/// All integers and floats little-endian; components stored one after the
/// other, each row-major over the grid. The grid dimension (plane N^2 or
/// torus N^4) follows from the payload length.
struct Snapshot {
  static constexpr std::uint16_t kVersion = 1;
  std::vector<ScalarField> components;
};

void write_snapshot(std::ostream& out, const Snapshot& snap);
Snapshot read_snapshot(std::istream& in);

void write_snapshot(const std::filesystem::path& path, const Snapshot& snap);
Snapshot read_snapshot(const std::filesystem::path& path);

} // namespace jflow
