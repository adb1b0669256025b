#pragma once

#include <array>
#include <cstdint>
#include <filesystem>

#include "mfg/metrics.hpp"

namespace mfg {

/**
 * Binary reference/snapshot file ("MFGREF01"):
 *
 *   8 bytes   magic "MFGREF01"
 *   int64 LE  d, N_t, N_x
 *   f64 LE    T, nu
 *   f64 LE    Mbar, (N_t+1) * N_x^d values, level-major, nodes row-major
 *   f64 LE    U, same layout
 *
 * Provenance goes to a JSON sidecar `<file>.json` so the binary payload stays
 * byte-identical across reruns.
 */
inline constexpr std::array<char, 8> kReferenceMagic{'M', 'F', 'G', 'R', 'E', 'F', '0', '1'};

struct ReferenceHeader {
  std::int64_t d = 0;
  std::int64_t nt = 0;
  std::int64_t nx = 0;
  double T = 0.0;
  double nu = 0.0;
};

/// Throws IoError on write failure, GridMismatch if Mbar and U differ in grid.
void write_reference(const std::filesystem::path& path, const ReferenceSolution& ref, double nu);
/// Writes only the provenance sidecar.
void write_provenance(const std::filesystem::path& path, const ReferenceSolution& ref, double nu);

ReferenceHeader read_reference_header(const std::filesystem::path& path);
/// Reads the binary file and, when present, the sidecar. Throws IoError on a
/// bad magic, truncated payload or unreadable file.
ReferenceSolution read_reference(const std::filesystem::path& path);

inline std::filesystem::path provenance_path(const std::filesystem::path& path) {
  auto p = path;
  p += ".json";
  return p;
}

}  // namespace mfg
