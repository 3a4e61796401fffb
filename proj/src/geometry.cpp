#include "spinecho/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "spinecho/rng.hpp"

namespace spinecho {

namespace {

// mu0 * hbar / (8 pi) per cubic Angstrom: multiply by g1*g2 [rad/s/T] to get
// the dipolar prefactor in rad/s with r in Angstrom.
constexpr double kDipolarPrefactorPerA3 = 5.272859085e-12;

struct ModelRow {
  const char* label;
  double x, y, z;
};

// Frozen model coordinates (Angstrom). Three radial shells with octahedral,
// cube-corner and face-diagonal directions plus a fixed few-percent radial
// jitter so no two distances coincide exactly.
constexpr ModelRow kModelSites[] = {
    {"H", 2.988169, 0.000000, 0.000000},
    {"H", -2.938891, 0.000000, 0.000000},
    {"H", 0.000000, 2.900112, 0.000000},
    {"H", 0.000000, -3.024428, 0.000000},
    {"H", 0.000000, 0.000000, 2.836545},
    {"H", 0.000000, 0.000000, -2.911615},
    {"H", 2.851363, 2.851363, 2.851363},
    {"H", 2.838223, -2.838223, -2.838223},
    {"H", -2.894861, 2.894861, -2.894861},
    {"H", -2.881512, -2.881512, 2.881512},
    {"H", -2.866081, -2.866081, -2.866081},
    {"H", 2.816715, 2.816715, -2.816715},
    {"H", 0.000000, 4.103301, 4.103301},
    {"H", 4.175891, 0.000000, -4.175891},
    {"H", -4.169450, 4.169450, 0.000000},
};

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

Geometry::Geometry(std::vector<Site> sites, int central_index, GeometryUnits units,
                   double gyro_central, double gyro_env)
    : sites_(std::move(sites)),
      central_(central_index),
      units_(units),
      gyro_central_(gyro_central),
      gyro_env_(gyro_env) {
  if (sites_.size() < 2) throw std::invalid_argument("Geometry: needs at least 2 sites");
  if (central_ < 0 || central_ >= static_cast<int>(sites_.size())) {
    throw std::invalid_argument("Geometry: central index out of range");
  }
  for (size_t a = 0; a < sites_.size(); ++a) {
    for (size_t b = a + 1; b < sites_.size(); ++b) {
      if ((sites_[a].pos - sites_[b].pos).norm() <= 0.0) {
        throw std::invalid_argument("Geometry: coincident sites " + std::to_string(a) +
                                    " and " + std::to_string(b));
      }
    }
  }
  if (!(gyro_central_ != 0.0) || !(gyro_env_ != 0.0)) {
    throw std::invalid_argument("Geometry: zero gyromagnetic scale");
  }
}

Geometry Geometry::model(GeometryUnits units) {
  std::vector<Site> sites;
  sites.push_back({"P", Vec3::Zero()});
  for (const auto& row : kModelSites) {
    sites.push_back({row.label, Vec3(row.x, row.y, row.z)});
  }
  if (units == GeometryUnits::physical) {
    // 31P and 1H gyromagnetic ratios, rad/s/T
    return Geometry(std::move(sites), 0, units, 1.08394e8, 2.6752218744e8);
  }
  return Geometry(std::move(sites), 0, units, 1.0, 1.0);
}

Geometry Geometry::parse(const std::string& text, int central_index, GeometryUnits units,
                         double gyro_central, double gyro_env) {
  std::vector<Site> sites;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    std::string label;
    double x, y, z;
    if (!(row >> label)) continue;  // blank line
    if (!(row >> x >> y >> z)) {
      throw ConfigError("geometry line " + std::to_string(line_no) +
                        ": expected `label x y z`");
    }
    sites.push_back({label, Vec3(x, y, z)});
  }
  if (sites.empty()) throw ConfigError("geometry file has no sites");
  return Geometry(std::move(sites), central_index, units, gyro_central, gyro_env);
}

Geometry Geometry::load(const std::string& path, int central_index, GeometryUnits units,
                        double gyro_central, double gyro_env) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open geometry file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), central_index, units, gyro_central, gyro_env);
}

Geometry Geometry::truncated(int n_env) const {
  if (n_env < 1 || n_env > this->n_env()) {
    throw std::invalid_argument("Geometry::truncated: bad environment size");
  }
  const Vec3 c = central_site().pos;
  std::vector<int> env_idx;
  for (int i = 0; i < static_cast<int>(sites_.size()); ++i) {
    if (i != central_) env_idx.push_back(i);
  }
  std::stable_sort(env_idx.begin(), env_idx.end(), [&](int a, int b) {
    return (sites_[static_cast<size_t>(a)].pos - c).norm() <
           (sites_[static_cast<size_t>(b)].pos - c).norm();
  });
  std::vector<Site> kept;
  kept.push_back(central_site());
  for (int i = 0; i < n_env; ++i) kept.push_back(sites_[static_cast<size_t>(env_idx[static_cast<size_t>(i)])]);
  return Geometry(std::move(kept), 0, units_, gyro_central_, gyro_env_);
}

std::vector<const Site*> Geometry::env_sites() const {
  std::vector<const Site*> out;
  for (int i = 0; i < static_cast<int>(sites_.size()); ++i) {
    if (i != central_) out.push_back(&sites_[static_cast<size_t>(i)]);
  }
  return out;
}

double Geometry::hetero_scale() const {
  const double g = gyro_central_ * gyro_env_;
  return units_ == GeometryUnits::physical ? kDipolarPrefactorPerA3 * g : g;
}

double Geometry::homo_scale() const {
  const double g = gyro_env_ * gyro_env_;
  return units_ == GeometryUnits::physical ? kDipolarPrefactorPerA3 * g : g;
}

std::string Geometry::to_text() const {
  std::ostringstream out;
  out.precision(17);
  for (const auto& s : sites_) {
    out << s.label << " " << s.pos.x() << " " << s.pos.y() << " " << s.pos.z() << "\n";
  }
  out << "central " << central_ << " units "
      << (units_ == GeometryUnits::physical ? "physical" : "dimensionless") << " gyros "
      << gyro_central_ << " " << gyro_env_ << "\n";
  return out.str();
}

std::uint64_t Geometry::content_hash() const { return fnv1a(to_text()); }

Orientation Orientation::fixed(const Vec3& direction) {
  const double n = direction.norm();
  if (!(n > 0.0)) throw std::invalid_argument("Orientation: zero direction");
  return Orientation{direction / n, 0, 0};
}

Orientation Orientation::sampled(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 rng = SplitMix64::substream(seed, index);
  const double z = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(0.0, 2.0 * M_PI);
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  return Orientation{Vec3(s * std::cos(phi), s * std::sin(phi), z), seed, index};
}

EnsembleSpec::EnsembleSpec(Geometry geom, int count, std::uint64_t seed_value)
    : geometry(std::move(geom)), n_orientations(count), seed(seed_value) {
  if (count < 1) throw std::invalid_argument("EnsembleSpec: n_orientations must be >= 1");
}

double dipolar_coupling(double r, double theta, double scale) {
  if (!(r > 0.0)) throw std::invalid_argument("dipolar_coupling: r must be positive");
  const double c = std::cos(theta);
  return scale * (3.0 * c * c - 1.0) / (r * r * r);
}

CouplingSet couplings_for(const Orientation& orientation, const Geometry& geom) {
  const Vec3 field = orientation.field;
  const Vec3 center = geom.central_site().pos;
  const auto env = geom.env_sites();
  const int n = static_cast<int>(env.size());
  RVector hetero(n);
  RMatrix homo = RMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    const Vec3 rel = env[static_cast<size_t>(j)]->pos - center;
    const double r = rel.norm();
    if (!(r > 0.0)) throw std::invalid_argument("couplings_for: degenerate central vector");
    const double ct = rel.dot(field) / r;
    hetero(j) = geom.hetero_scale() * (3.0 * ct * ct - 1.0) / (r * r * r);
  }
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      const Vec3 rel = env[static_cast<size_t>(j)]->pos - env[static_cast<size_t>(k)]->pos;
      const double r = rel.norm();
      if (!(r > 0.0)) throw std::invalid_argument("couplings_for: degenerate pair vector");
      const double ct = rel.dot(field) / r;
      const double w = geom.homo_scale() * (3.0 * ct * ct - 1.0) / (r * r * r);
      homo(j, k) = w;
      homo(k, j) = w;
    }
  }
  const CouplingUnits units = geom.units() == GeometryUnits::physical
                                  ? CouplingUnits::rad_per_s
                                  : CouplingUnits::dimensionless;
  return CouplingSet(std::move(hetero), std::move(homo), units);
}

std::vector<Orientation> sample_orientations(const EnsembleSpec& spec) {
  std::vector<Orientation> out;
  out.reserve(static_cast<size_t>(spec.n_orientations));
  for (int i = 0; i < spec.n_orientations; ++i) {
    out.push_back(Orientation::sampled(spec.seed, static_cast<std::uint64_t>(i)));
  }
  return out;
}

int connected_group_size(const CouplingSet& c, double t, double alpha) {
  if (!(t >= 0.0)) throw std::invalid_argument("connected_group_size: negative time");
  int count = 0;
  for (int j = 0; j < c.n(); ++j) {
    const double s = std::sin(alpha * c.hetero()(j) * t);
    if (s * s > 0.5) ++count;
  }
  return count;
}

}  // namespace spinecho
