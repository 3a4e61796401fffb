#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "spinecho/geometry.hpp"

using namespace spinecho;

TEST_CASE("dipolar_coupling: magic angle, poles, equator") {
  const double magic = std::acos(1.0 / std::sqrt(3.0));
  CHECK(std::abs(dipolar_coupling(1.7, magic, 3.0)) < 1e-12);
  CHECK(dipolar_coupling(1.0, 0.0, 1.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(dipolar_coupling(2.0, M_PI / 2, 1.0) == doctest::Approx(-0.125).epsilon(1e-12));
  CHECK_THROWS_AS(dipolar_coupling(0.0, 0.1, 1.0), std::invalid_argument);
}

TEST_CASE("couplings_for: axis alignment and collinear chain") {
  // two sites on the field axis at unit distance
  Geometry two({{"P", Vec3(0, 0, 0)}, {"H", Vec3(0, 0, 1)}}, 0);
  const CouplingSet c2 = couplings_for(Orientation::fixed(Vec3(0, 0, 1)), two);
  CHECK(c2.hetero()(0) == doctest::Approx(2.0).epsilon(1e-14));

  // collinear 3-site chain along the field, unit spacing:
  // hetero = [2, 2/8], homo_12 = 2
  Geometry chain({{"P", Vec3(0, 0, 0)}, {"H", Vec3(0, 0, 1)}, {"H", Vec3(0, 0, 2)}}, 0);
  const CouplingSet c3 = couplings_for(Orientation::fixed(Vec3(0, 0, 1)), chain);
  CHECK(c3.hetero()(0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(c3.hetero()(1) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(c3.homo()(0, 1) == doctest::Approx(2.0).epsilon(1e-14));

  // translation invariance
  Geometry shifted({{"P", Vec3(5, -2, 7)}, {"H", Vec3(5, -2, 8)}, {"H", Vec3(5, -2, 9)}}, 0);
  const CouplingSet cs = couplings_for(Orientation::fixed(Vec3(0, 0, 1)), shifted);
  CHECK((cs.hetero() - c3.hetero()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((cs.homo() - c3.homo()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("couplings_for: site on the magic-angle cone decouples") {
  const double magic = std::acos(1.0 / std::sqrt(3.0));
  Geometry g({{"P", Vec3(0, 0, 0)}, {"H", 2.0 * Vec3(std::sin(magic), 0, std::cos(magic))}}, 0);
  const CouplingSet c = couplings_for(Orientation::fixed(Vec3(0, 0, 1)), g);
  CHECK(std::abs(c.hetero()(0)) < 1e-12);
}

TEST_CASE("geometry symmetry: rotating the orientation permutes couplings") {
  // C4-symmetric square of environment sites around the central spin
  Geometry square({{"P", Vec3(0, 0, 0)},
                   {"H", Vec3(1.5, 0, 0)},
                   {"H", Vec3(0, 1.5, 0)},
                   {"H", Vec3(-1.5, 0, 0)},
                   {"H", Vec3(0, -1.5, 0)}},
                  0);
  const Vec3 dir = Vec3(0.3, 0.5, 0.81).normalized();
  const Vec3 rotated(-dir.y(), dir.x(), dir.z());  // 90 degrees about z
  RVector a = couplings_for(Orientation::fixed(dir), square).hetero();
  RVector b = couplings_for(Orientation::fixed(rotated), square).hetero();
  std::sort(a.data(), a.data() + a.size());
  std::sort(b.data(), b.data() + b.size());
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("sample_orientations: determinism, unit norm, CLT mean") {
  const Geometry geom = Geometry::model();
  const EnsembleSpec one(geom, 1, 42);
  const Vec3 first = sample_orientations(one)[0].field;
  const Vec3 again = sample_orientations(one)[0].field;
  CHECK((first - again).norm() == 0.0);

  const EnsembleSpec many(geom, 10000, 42);
  Vec3 mean = Vec3::Zero();
  double comp_max = 0.0;
  for (const auto& o : sample_orientations(many)) {
    CHECK(std::abs(o.field.norm() - 1.0) < 1e-12);
    mean += o.field;
  }
  mean /= 10000.0;
  CHECK(mean.norm() <= 0.05);
  for (int k = 0; k < 3; ++k) comp_max = std::max(comp_max, std::abs(mean(k)));
  CHECK(comp_max <= 3.0 / std::sqrt(10000.0));

  // split-by-index: the stream is position-addressable
  const Orientation o7 = Orientation::sampled(42, 7);
  CHECK((sample_orientations(many)[7].field - o7.field).norm() == 0.0);
}

TEST_CASE("connected_group_size") {
  const CouplingSet c = CouplingSet::hetero_only((RVector(3) << 1.0, 0.3, 0.05).finished());
  CHECK(connected_group_size(c, 0.0, 1.0) == 0);

  const CouplingSet single = CouplingSet::hetero_only((RVector(1) << 1.0).finished());
  CHECK(connected_group_size(single, M_PI / 2, 1.0) == 1);

  // monotone within the first quarter-period of every coupling
  const double t_max = M_PI / 2.0;  // quarter period of the strongest
  int prev = -1;
  for (double t = 0.0; t <= t_max; t += t_max / 16.0) {
    const int g = connected_group_size(single, t, 1.0);
    CHECK(g >= prev);
    prev = g;
  }
}

TEST_CASE("model geometry: shells, truncation, hashing") {
  const Geometry geom = Geometry::model();
  CHECK(geom.n_env() == 15);
  const Vec3 c = geom.central_site().pos;

  std::vector<double> radii;
  for (const Site* s : geom.env_sites()) radii.push_back((s->pos - c).norm());
  std::sort(radii.begin(), radii.end());
  CHECK(radii.front() > 2.5);   // plausible two-bond contact distance
  CHECK(radii.back() < 6.5);    // plausible three-bond distance
  CHECK(radii[5] < 3.5);        // six sites in the inner shell
  CHECK(radii[6] > 4.0);

  const Geometry ten = geom.truncated(10);
  CHECK(ten.n_env() == 10);
  std::vector<double> kept;
  for (const Site* s : ten.env_sites()) kept.push_back((s->pos - ten.central_site().pos).norm());
  CHECK(*std::max_element(kept.begin(), kept.end()) <= radii[10] + 1e-12);

  CHECK(Geometry::model().content_hash() == geom.content_hash());
  CHECK(Geometry::model(GeometryUnits::physical).content_hash() != geom.content_hash());

  // physical mode: couplings pick up the dipolar prefactor with 31P/1H gyros
  const Geometry phys = Geometry::model(GeometryUnits::physical);
  const CouplingSet cp = couplings_for(Orientation::sampled(1, 0), phys);
  const CouplingSet cd = couplings_for(Orientation::sampled(1, 0), geom);
  CHECK(cp.units() == CouplingUnits::rad_per_s);
  const double ratio = cp.hetero()(0) / cd.hetero()(0);
  CHECK(ratio == doctest::Approx(5.272859085e-12 * 1.08394e8 * 2.6752218744e8).epsilon(1e-9));
  // ortho-shell couplings land in the NMR kHz range (rad/s)
  CHECK(std::abs(cp.hetero().cwiseAbs().maxCoeff()) > 1e3);
  CHECK(std::abs(cp.hetero().cwiseAbs().maxCoeff()) < 1e6);
}

TEST_CASE("geometry file parsing") {
  const std::string text =
      "# comment line\n"
      "P 0 0 0\n"
      "H 0 0 1.0  # trailing comment\n"
      "\n"
      "H 1.0 0 0\n";
  const Geometry g = Geometry::parse(text, 0);
  CHECK(g.n_env() == 2);
  CHECK(g.sites()[1].label == "H");
  CHECK_THROWS_AS(Geometry::parse("P 0 0\n", 0), ConfigError);
  CHECK_THROWS_AS(Geometry::parse("", 0), ConfigError);
  CHECK_THROWS_AS(Geometry::load("/nonexistent/geometry.txt", 0), ConfigError);

  // coincident sites rejected
  CHECK_THROWS_AS(Geometry::parse("P 0 0 0\nH 0 0 0\n", 0), std::invalid_argument);
}
