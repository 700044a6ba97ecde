#include "dk/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dk {

namespace {

constexpr char kMagic[4] = {'D', 'K', 'S', '1'};

void put_u32(std::ostream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("snapshot file: truncated header");
  return v;
}

std::ofstream open_out(const std::filesystem::path& p, bool binary = false) {
  std::ofstream f(p, binary ? std::ios::binary : std::ios::out);
  if (!f) throw std::runtime_error("cannot open " + p.string() + " for writing");
  return f;
}

}  // namespace

std::string hex64(std::uint64_t x) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << x;
  return s.str();
}

void write_series_csv(std::ostream& out, const TrajectoryRecord& rec) {
  out << "t,mass,entropy,dissipation,min_rho,l2,l4\n";
  out << std::setprecision(17);
  for (const auto& r : rec.series)
    out << r.t << ',' << r.mass << ',' << r.entropy << ',' << r.dissipation << ',' << r.min_rho << ',' << r.l2
        << ',' << r.l4 << '\n';
}

void write_snapshots(std::ostream& out, std::span<const RealField> fields) {
  const GridSpec grid = fields.empty() ? GridSpec() : fields.front().grid();
  out.write(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(grid.n()));
  put_u32(out, static_cast<std::uint32_t>(grid.dim()));
  put_u32(out, static_cast<std::uint32_t>(fields.size()));
  for (const auto& f : fields) {
    require_same_grid(f.grid(), grid, "write_snapshots");
    const auto v = f.values();
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
}

std::vector<RealField> read_snapshots(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("snapshot file: bad magic");
  const auto n = get_u32(in);
  const auto d = get_u32(in);
  const auto count = get_u32(in);
  std::vector<RealField> out;
  if (count == 0) return out;
  const GridSpec grid(static_cast<int>(d), static_cast<int>(n));
  for (std::uint32_t c = 0; c < count; ++c) {
    std::vector<double> values(grid.size());
    in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!in) throw std::runtime_error("snapshot file: truncated data");
    out.emplace_back(grid, std::move(values));
  }
  return out;
}

void write_histogram_csv(std::ostream& out, const KineticHistogram& h) {
  out << "bin_lo,bin_hi,weight\n" << std::setprecision(17);
  for (std::size_t b = 0; b < h.bin_count(); ++b) out << h.lo(b) << ',' << h.hi(b) << ',' << h.weight(b) << '\n';
}

void write_positions_csv(std::ostream& out, const ParticleState& state, bool header) {
  if (header) {
    out << "t,i";
    for (int a = 0; a < state.dim; ++a) out << ",x" << (a + 1);
    out << '\n';
  }
  out << std::setprecision(17);
  for (std::size_t i = 0; i < state.count(); ++i) {
    out << state.t << ',' << i;
    for (double x : state.position(i)) out << ',' << x;
    out << '\n';
  }
}

void write_trajectory(const std::filesystem::path& dir, const std::string& prefix, const TrajectoryRecord& rec,
                      const GridSpec& grid, const std::string& config_text) {
  std::filesystem::create_directories(dir);
  {
    auto f = open_out(dir / (prefix + ".csv"));
    write_series_csv(f, rec);
  }
  std::vector<RealField> fields;
  std::vector<double> times;
  for (const auto& s : rec.snapshots) {
    fields.push_back(s.rho);
    times.push_back(s.t);
  }
  {
    auto f = open_out(dir / (prefix + ".bin"), true);
    write_snapshots(f, fields);
  }
  nlohmann::ordered_json m;
  m["schema_version"] = kSchemaVersion;
  m["seed"] = rec.seed;
  m["config_hash"] = hex64(rec.config_hash);
  m["grid"] = {{"dim", grid.dim()}, {"n", grid.n()}};
  m["dt"] = rec.dt;
  m["snapshot_stride"] = rec.snapshot_stride;
  m["snapshot_times"] = times;
  m["unreliable"] = rec.unreliable;
  m["events"] = rec.events;
  m["series"] = prefix + ".csv";
  m["snapshots"] = prefix + ".bin";
  m["solver"] = rec.config_echo;
  m["config"] = config_text;
  auto f = open_out(dir / (prefix + ".manifest.json"));
  f << m.dump(2) << '\n';
}

}  // namespace dk
