// Molecular geometry, powder-orientation sampling and dipolar couplings.
#ifndef SPINECHO_GEOMETRY_HPP
#define SPINECHO_GEOMETRY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "spinecho/spin_system.hpp"
#include "spinecho/types.hpp"

namespace spinecho {

struct Site {
  std::string label;
  Vec3 pos;  // Angstrom
};

enum class GeometryUnits {
  dimensionless,  // couplings are (3cos^2 - 1)/r^3 scaled by gyro product
  physical,       // standard dipolar prefactor, gyros in rad/s/T, result rad/s
};

// Central spin site plus environment sites. In physical mode the coupling
// prefactor is mu0 g1 g2 hbar / (8 pi r^3); in dimensionless mode the gyro
// values act as plain unit scales.
class Geometry {
 public:
  Geometry(std::vector<Site> sites, int central_index,
           GeometryUnits units = GeometryUnits::dimensionless,
           double gyro_central = 1.0, double gyro_env = 1.0);

  // Bundled synthetic organophosphine-like model: one central site and 15
  // peripheral sites in three radial shells (about 2.9, 4.9 and 5.7 A, the
  // typical two- and three-bond P-H distance range), directions spread so
  // the environment coupling network stays well connected. Not a
  // crystallographic structure.
  static Geometry model(GeometryUnits units = GeometryUnits::dimensionless);

  // Plain-text file: one site per line, `label x y z` in Angstrom,
  // '#' starts a comment. The central site is chosen by index.
  static Geometry load(const std::string& path, int central_index = 0,
                       GeometryUnits units = GeometryUnits::dimensionless,
                       double gyro_central = 1.0, double gyro_env = 1.0);
  static Geometry parse(const std::string& text, int central_index,
                        GeometryUnits units = GeometryUnits::dimensionless,
                        double gyro_central = 1.0, double gyro_env = 1.0);

  // Keep only the n_env environment sites closest to the central site
  // (ties broken by site order).
  Geometry truncated(int n_env) const;

  int n_env() const { return static_cast<int>(sites_.size()) - 1; }
  int central_index() const { return central_; }
  const std::vector<Site>& sites() const { return sites_; }
  const Site& central_site() const { return sites_[static_cast<size_t>(central_)]; }
  std::vector<const Site*> env_sites() const;
  GeometryUnits units() const { return units_; }
  double gyro_central() const { return gyro_central_; }
  double gyro_env() const { return gyro_env_; }

  // Prefactors in front of (3cos^2 theta - 1)/r^3 for hetero / homo pairs.
  double hetero_scale() const;
  double homo_scale() const;

  // FNV-1a hash of the canonical text form; recorded in run manifests.
  std::uint64_t content_hash() const;
  std::string to_text() const;

 private:
  std::vector<Site> sites_;
  int central_;
  GeometryUnits units_;
  double gyro_central_;
  double gyro_env_;
};

// Static-field direction in the molecular frame (unit vector) together with
// its sampling provenance.
struct Orientation {
  Vec3 field;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;

  static Orientation fixed(const Vec3& direction);
  // Uniform direction on the sphere, derived from (seed, index) alone.
  static Orientation sampled(std::uint64_t seed, std::uint64_t index);
};

struct EnsembleSpec {
  Geometry geometry;
  int n_orientations = 1;
  std::uint64_t seed = 0;

  EnsembleSpec(Geometry geom, int count, std::uint64_t seed_value);
};

// scale * (3 cos^2 theta - 1) / r^3
double dipolar_coupling(double r, double theta, double scale);

// Couplings of all environment sites for one orientation of the field.
CouplingSet couplings_for(const Orientation& orientation, const Geometry& geom);

std::vector<Orientation> sample_orientations(const EnsembleSpec& spec);

// Number of environment spins whose correlation probability sin^2(alpha w T)
// exceeds 1/2.
int connected_group_size(const CouplingSet& c, double t, double alpha);

}  // namespace spinecho

#endif  // SPINECHO_GEOMETRY_HPP
