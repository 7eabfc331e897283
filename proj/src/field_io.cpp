#include "fklab/field_io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace fklab {

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void save_field_csv(const LatticeField& f, const std::filesystem::path& path) {
  const LatticeDomain& d = f.domain();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "n,eps,lateral_halfwidth,height,time\n";
  out << d.dim() << ',' << format_full(d.eps()) << ',' << d.lateral_halfwidth() << ','
      << d.height() << ',' << format_full(f.time()) << '\n';
  for (double v : f.values()) out << format_full(v) << '\n';
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

LatticeField load_field_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("missing header in " + path.string());
  if (!std::getline(in, line)) throw std::runtime_error("missing header row in " + path.string());
  std::istringstream hs(line);
  int n = 0;
  double eps = 0, time = 0;
  std::int64_t lat = 0, height = 0;
  char comma = 0;
  hs >> n >> comma >> eps >> comma >> lat >> comma >> height >> comma >> time;
  if (!hs) throw std::runtime_error("malformed header row in " + path.string());

  LatticeField f(make_domain_ptr(n, eps, lat, height), time);
  for (std::int64_t i = 0; i < f.domain().site_count(); ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("truncated field file " + path.string());
    f[i] = std::strtod(line.c_str(), nullptr);
  }
  return f;
}

namespace {
constexpr char kMagic[4] = {'F', 'K', 'F', '1'};
}

void save_field_binary(const LatticeField& f, const std::filesystem::path& path) {
  const LatticeDomain& d = f.domain();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(kMagic, 4);
  const std::int64_t n = d.dim(), lat = d.lateral_halfwidth(), height = d.height();
  const double eps = d.eps(), time = f.time();
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(&eps), sizeof eps);
  out.write(reinterpret_cast<const char*>(&lat), sizeof lat);
  out.write(reinterpret_cast<const char*>(&height), sizeof height);
  out.write(reinterpret_cast<const char*>(&time), sizeof time);
  out.write(reinterpret_cast<const char*>(f.values().data()),
            static_cast<std::streamsize>(f.values().size() * sizeof(double)));
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

LatticeField load_field_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error(path.string() + " is not a field file");
  }
  std::int64_t n = 0, lat = 0, height = 0;
  double eps = 0, time = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  in.read(reinterpret_cast<char*>(&eps), sizeof eps);
  in.read(reinterpret_cast<char*>(&lat), sizeof lat);
  in.read(reinterpret_cast<char*>(&height), sizeof height);
  in.read(reinterpret_cast<char*>(&time), sizeof time);
  if (!in) throw std::runtime_error("truncated field file " + path.string());
  LatticeField f(make_domain_ptr(static_cast<int>(n), eps, lat, height), time);
  in.read(reinterpret_cast<char*>(f.values().data()),
          static_cast<std::streamsize>(f.values().size() * sizeof(double)));
  if (!in) throw std::runtime_error("truncated field file " + path.string());
  return f;
}

}  // namespace fklab
