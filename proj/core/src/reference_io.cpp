#include "mfg/reference_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "mfg/errors.hpp"

namespace mfg {

namespace {

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::array<unsigned char, sizeof(T)> b;
    std::memcpy(b.data(), &v, sizeof(T));
    std::reverse(b.begin(), b.end());
    std::memcpy(&v, b.data(), sizeof(T));
    return v;
  }
}

template <class T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw IoError("reference file truncated");
  return to_little(v);
}

void put_values(std::ostream& os, std::span<const double> values) {
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(values.data()),
             static_cast<std::streamsize>(values.size() * sizeof(double)));
  } else {
    for (double v : values) put(os, v);
  }
}

void get_values(std::istream& is, std::span<double> values) {
  is.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!is) throw IoError("reference file truncated");
  if constexpr (std::endian::native != std::endian::little) {
    for (auto& v : values) v = to_little(v);
  }
}

ReferenceHeader read_header(std::istream& is) {
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kReferenceMagic) throw IoError("not an MFGREF01 file (bad magic)");
  ReferenceHeader h;
  h.d = get<std::int64_t>(is);
  h.nt = get<std::int64_t>(is);
  h.nx = get<std::int64_t>(is);
  h.T = get<double>(is);
  h.nu = get<double>(is);
  return h;
}

}  // namespace

void write_reference(const std::filesystem::path& path, const ReferenceSolution& ref, double nu) {
  if (!(ref.Mbar.grid() == ref.U.grid())) throw GridMismatch("reference: Mbar and U grids differ");
  const auto& g = ref.grid();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os.write(kReferenceMagic.data(), kReferenceMagic.size());
  put<std::int64_t>(os, g.dim());
  put<std::int64_t>(os, g.nt());
  put<std::int64_t>(os, g.nx());
  put<double>(os, g.horizon());
  put<double>(os, nu);
  put_values(os, ref.Mbar.values());
  put_values(os, ref.U.values());
  os.flush();
  if (!os) throw IoError("write failure on '" + path.string() + "'");
  write_provenance(path, ref, nu);
}

void write_provenance(const std::filesystem::path& path, const ReferenceSolution& ref, double nu) {
  const auto& p = ref.provenance;
  const auto& g = ref.grid();
  nlohmann::ordered_json j;
  j["problem"] = p.problem;
  j["d"] = g.dim();
  j["n_t"] = g.nt();
  j["n_x"] = g.nx();
  j["T"] = g.horizon();
  j["nu"] = nu;
  j["k1"] = p.k1;
  j["k2"] = p.k2;
  j["iterations"] = p.iterations;
  j["stop_reason"] = p.stop_reason;
  j["plateau_value"] = p.plateau_value;
  j["initial_guess"] = p.initial_guess;
  j["timestamp"] = p.timestamp;
  std::ofstream os(provenance_path(path), std::ios::trunc);
  if (!os) throw IoError("cannot write provenance for '" + path.string() + "'");
  os << j.dump(2) << '\n';
}

ReferenceHeader read_reference_header(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open reference '" + path.string() + "'");
  return read_header(is);
}

ReferenceSolution read_reference(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open reference '" + path.string() + "'");
  const ReferenceHeader h = read_header(is);
  if (h.d < 1 || h.d > 8 || h.nt < 1 || h.nx < 2) throw IoError("reference header out of range");
  const GridSpec grid(static_cast<int>(h.d), h.T, static_cast<int>(h.nt), static_cast<int>(h.nx));
  GridFunction mbar(grid);
  GridFunction u(grid);
  get_values(is, mbar.values());
  get_values(is, u.values());
  if (is.peek() != std::char_traits<char>::eof()) throw IoError("reference file has trailing bytes");

  Provenance prov;
  std::ifstream js(provenance_path(path));
  if (js) {
    try {
      const auto j = nlohmann::json::parse(js);
      prov.problem = j.value("problem", "");
      prov.k1 = j.value("k1", 0.0);
      prov.k2 = j.value("k2", 0.0);
      prov.iterations = j.value("iterations", 0L);
      prov.stop_reason = j.value("stop_reason", "");
      prov.plateau_value = j.value("plateau_value", 0.0);
      prov.initial_guess = j.value("initial_guess", "");
      prov.timestamp = j.value("timestamp", "");
    } catch (const nlohmann::json::exception& e) {
      throw IoError("bad provenance sidecar for '" + path.string() + "': " + e.what());
    }
  }
  return ReferenceSolution(std::move(mbar), std::move(u), std::move(prov));
}

}  // namespace mfg
