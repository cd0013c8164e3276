#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "graspxfer/mapping.hpp"
#include "support/synthetic.hpp"

using namespace gx;
using namespace gxtest;

namespace {

SurfacePointSet transformed(const SurfacePointSet& s, const Pose& pose) {
  SurfacePointSet out;
  for (size_t i = 0; i < s.size(); ++i) {
    out.points.push_back(pose.apply(s.points[i]));
    out.normals.push_back(pose.rotate(s.normals[i]));
  }
  return out;
}

double rotation_angle(const Mat3& r) {
  return Eigen::AngleAxisd(r).angle();
}

double sampling_spacing(const SurfacePointSet& s) {
  // Median nearest-neighbor distance.
  std::vector<double> d;
  for (size_t i = 0; i < s.size(); i += 7) {
    double best = std::numeric_limits<double>::max();
    for (size_t j = 0; j < s.size(); ++j) {
      if (i == j) continue;
      best = std::min(best, (s.points[i] - s.points[j]).norm());
    }
    d.push_back(best);
  }
  std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
  return d[d.size() / 2];
}

}  // namespace

TEST_CASE("rigid_align: identical sets give the identity") {
  MugFixture mug = make_mug();
  SurfacePointSet A = sample_surface_points(mug.mesh, 600, 3);
  Pose pose = rigid_align(A, A);
  CHECK((pose.rotation - Mat3::Identity()).norm() < 1e-9);
  CHECK(pose.translation.norm() < 1e-9);
}

TEST_CASE("rigid_align: transform recovery over 50 trials") {
  MugFixture mug = make_mug();
  SurfacePointSet A = sample_surface_points(mug.mesh, 800, 5);
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    Vec3 axis(rng.gaussian(), rng.gaussian(), rng.gaussian());
    axis.normalize();
    double angle = rng.uniform(0.0, 30.0 * M_PI / 180.0);
    Pose truth;
    truth.rotation = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
    truth.translation =
        Vec3(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1),
             rng.uniform(-0.1, 0.1));
    SurfacePointSet B = transformed(A, truth);
    Pose recovered = rigid_align(A, B);
    CHECK(rotation_angle(recovered.rotation.transpose() * truth.rotation) <
          1e-3);
    CHECK((recovered.translation - truth.translation).norm() < 1e-4);
  }
}

TEST_CASE("rigid_align: objective trace is non-increasing") {
  MugFixture mug = make_mug();
  SurfacePointSet A = sample_surface_points(mug.mesh, 500, 7);
  Rng rng(23);
  Pose truth;
  truth.rotation =
      Eigen::AngleAxisd(0.4, Vec3(0.3, -1, 0.2).normalized()).toRotationMatrix();
  truth.translation = Vec3(0.05, -0.02, 0.03);
  SurfacePointSet B = transformed(A, truth);
  AlignTrace trace;
  rigid_align(A, B, 60, 1e-10, &trace);
  REQUIRE(trace.objective.size() >= 2);
  for (size_t i = 1; i < trace.objective.size(); ++i)
    CHECK(trace.objective[i] <= trace.objective[i - 1] + 1e-12);
}

TEST_CASE("rigid_align: empty input rejected") {
  SurfacePointSet empty;
  SurfacePointSet one;
  one.points.push_back(Vec3::Zero());
  one.normals.push_back(Vec3::UnitZ());
  CHECK_THROWS_AS(rigid_align(empty, one), InvalidArgument);
}

TEST_CASE("mapping: identity case") {
  MugFixture mug = make_mug();
  auto geom = std::make_shared<const Geometry>(mug.mesh);
  SurfacePointSet A = sample_surface_points(mug.mesh, 900, 11);
  CorrespondenceMapping mapping(geom, geom, A, A, {});
  CHECK(mapping.params().delta == doctest::Approx(M_PI / 6.0));

  // Every defined forward/backward map is the identity index map.
  int defined = 0;
  for (size_t a = 0; a < A.size(); ++a) {
    auto f = mapping.forward_map_point(static_cast<int>(a));
    REQUIRE(f);
    CHECK(*f == static_cast<int>(a));
    ++defined;
  }
  for (size_t b = 0; b < A.size(); ++b) {
    auto g = mapping.backward_map_point(static_cast<int>(b));
    REQUIRE(g);
    CHECK(*g == static_cast<int>(b));
  }
  CHECK(defined == static_cast<int>(A.size()));

  // All consistency probes pass.
  SurfacePointSet probes = sample_surface_points(mug.mesh, 500, 13);
  for (const auto& p : probes.points) CHECK(mapping.consistency_check(p));
}

TEST_CASE("mapping: forward/backward match the exhaustive oracle") {
  MugFixture mug = make_mug();
  TriangleMesh scaled = scale_mesh(mug.mesh, 1.15);
  auto src = std::make_shared<const Geometry>(mug.mesh);
  auto dst = std::make_shared<const Geometry>(scaled);
  SurfacePointSet A = sample_surface_points(mug.mesh, 700, 19);
  SurfacePointSet B = sample_surface_points(scaled, 700, 29);
  CorrespondenceMapping mapping(src, dst, A, B, {});
  const Pose& t = mapping.transform();
  double cos_delta = std::cos(mapping.params().delta);

  for (size_t a = 0; a < A.size(); ++a) {
    Vec3 pa = t.apply(A.points[a]);
    Vec3 na = t.rotate(A.normals[a]);
    int best = -1;
    double best_d = std::numeric_limits<double>::max();
    for (size_t b = 0; b < B.size(); ++b) {
      if (B.normals[b].dot(na) <= cos_delta) continue;
      double d = (pa - B.points[b]).norm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(b);
      }
    }
    auto f = mapping.forward_map_point(static_cast<int>(a));
    CHECK((f ? *f : -1) == best);
  }
  for (size_t b = 0; b < B.size(); ++b) {
    const Vec3& nb = B.normals[b];
    int best = -1;
    double best_d = std::numeric_limits<double>::max();
    for (size_t a = 0; a < A.size(); ++a) {
      if (t.rotate(A.normals[a]).dot(nb) <= cos_delta) continue;
      double d = (t.apply(A.points[a]) - B.points[b]).norm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(a);
      }
    }
    auto g = mapping.backward_map_point(static_cast<int>(b));
    CHECK((g ? *g : -1) == best);
  }
}

TEST_CASE("mapping: normal filter can leave points unmapped") {
  // Two flat patches with clashing normals beyond delta.
  SurfacePointSet A, B;
  for (int i = 0; i < 25; ++i) {
    A.points.push_back(Vec3(i % 5, i / 5, 0) * 0.01);
    A.normals.push_back(Vec3(0, 0, 1));
    B.points.push_back(Vec3(i % 5, i / 5, 0) * 0.01);
    B.normals.push_back(Vec3(0, 0, -1));  // flipped
  }
  auto ga = std::make_shared<const Geometry>(gxtest::make_plane_patch(0.05));
  MappingParams params;
  params.align_max_iters = 0;  // keep the identity-ish init
  CorrespondenceMapping mapping(ga, ga, A, B, params);
  int undefined = 0;
  for (size_t b = 0; b < B.size(); ++b)
    if (!mapping.backward_map_point(static_cast<int>(b))) ++undefined;
  CHECK(undefined == static_cast<int>(B.size()));
}

TEST_CASE("mapping: interpolation identity and single-neighbor degeneracy") {
  MugFixture mug = make_mug();
  auto geom = std::make_shared<const Geometry>(mug.mesh);
  SurfacePointSet A = sample_surface_points(mug.mesh, 800, 31);
  MappingParams params;
  params.k_interp = 1;
  CorrespondenceMapping k1(geom, geom, A, A, params);
  // x exactly at a sample with k=1: F(x) = F(a) = a.
  for (int a = 0; a < 20; ++a) {
    auto y = k1.interp_forward(A.points[a]);
    REQUIRE(y);
    CHECK((*y - A.points[a]).norm() < 1e-9);
  }

  CorrespondenceMapping k5(geom, geom, A, A, {});
  double spacing = sampling_spacing(A);
  SurfacePointSet probes = sample_surface_points(mug.mesh, 200, 37);
  for (const auto& p : probes.points) {
    auto y = k5.interp_forward(p);
    REQUIRE(y);
    CHECK((*y - p).norm() < 2.0 * spacing + 1e-9);
  }
}

TEST_CASE("mapping: scaled copy maps near the scaled position") {
  MugFixture mug = make_mug();
  TriangleMesh scaled = scale_mesh(mug.mesh, 1.2);
  auto src = std::make_shared<const Geometry>(mug.mesh);
  auto dst = std::make_shared<const Geometry>(scaled);
  SurfacePointSet A = sample_surface_points(mug.mesh, 1200, 41);
  SurfacePointSet B = sample_surface_points(scaled, 1200, 43);
  double spacing = sampling_spacing(B);
  CorrespondenceMapping mapping(src, dst, A, B, {});
  SurfacePointSet probes = sample_surface_points(mug.mesh, 500, 47);
  int ok = 0, consistent = 0;
  for (const auto& x : probes.points) {
    auto y = mapping.interp_forward(x);
    if (!y) continue;
    if ((*y - 1.2 * x).norm() < 2.0 * spacing + 2e-3) ++ok;
    if (mapping.consistency_check(x)) ++consistent;
  }
  CHECK(ok >= 450);
  CHECK(consistent >= 450);  // >= 90% of 500
}

TEST_CASE("mapping: grasp contact transfer") {
  MugFixture mug = make_mug();
  auto geom = std::make_shared<const Geometry>(mug.mesh);
  SurfacePointSet A = sample_surface_points(mug.mesh, 900, 51);

  Grasp grasp;
  grasp.config.joints = VecX::Zero(4);
  SurfacePointSet c = sample_surface_points(mug.mesh, 3, 53);
  for (size_t i = 0; i < c.size(); ++i) {
    grasp.contacts.push_back({c.points[i], -c.normals[i], 0.8});
    grasp.contact_links.push_back(static_cast<int>(i));
  }

  SUBCASE("identity mapping reproduces the contacts") {
    CorrespondenceMapping mapping(geom, geom, A, A, {});
    auto targets = mapping.map_grasp_contacts(grasp);
    REQUIRE(targets);
    REQUIRE(targets->size() == grasp.contacts.size());
    for (size_t i = 0; i < targets->size(); ++i) {
      CHECK(((*targets)[i].point - grasp.contacts[i].position).norm() < 1e-6);
      CHECK((*targets)[i].normal.dot(-grasp.contacts[i].normal) > 0.95);
    }
  }

  SUBCASE("scaled target preserves pairwise distances up to the scale") {
    TriangleMesh scaled = scale_mesh(mug.mesh, 1.2);
    auto dst = std::make_shared<const Geometry>(scaled);
    SurfacePointSet B = sample_surface_points(scaled, 900, 57);
    double spacing = sampling_spacing(B);
    CorrespondenceMapping mapping(geom, dst, A, B, {});
    auto targets = mapping.map_grasp_contacts(grasp);
    REQUIRE(targets);
    for (size_t i = 0; i < targets->size(); ++i)
      for (size_t j = i + 1; j < targets->size(); ++j) {
        double dd = ((*targets)[i].point - (*targets)[j].point).norm();
        double dc =
            (grasp.contacts[i].position - grasp.contacts[j].position).norm();
        CHECK(std::abs(dd - 1.2 * dc) < 2.0 * spacing + 2e-3);
      }
  }

  SUBCASE("uncovered region makes the whole grasp untransferable") {
    // Target samples only from the body: handle contacts cannot map back.
    TriangleMesh body_only = make_cylinder(0.035, 0.09, Vec3::Zero());
    auto dst = std::make_shared<const Geometry>(body_only);
    SurfacePointSet B = sample_surface_points(body_only, 600, 59);
    CorrespondenceMapping mapping(geom, dst, A, B, {});
    Grasp handle_grasp = grasp;
    handle_grasp.contacts.clear();
    handle_grasp.contact_links.clear();
    // Outermost handle point, far from any body coverage.
    Vec3 tip(0.035 - 0.002 + 0.022 + 0.006, 0, 0.045);
    SurfaceHit hit = geom->closest_surface_point(tip);
    handle_grasp.contacts.push_back({hit.point, -hit.normal, 0.8});
    handle_grasp.contact_links.push_back(0);
    CHECK(!mapping.map_grasp_contacts(handle_grasp));
  }
}

TEST_CASE("mapping: serialization round trip") {
  MugFixture mug = make_mug();
  auto geom = std::make_shared<const Geometry>(mug.mesh);
  SurfacePointSet A = sample_surface_points(mug.mesh, 300, 61);
  SurfacePointSet B = sample_surface_points(mug.mesh, 300, 67);
  CorrespondenceMapping mapping(geom, geom, A, B, {});
  std::string path = "/tmp/gx_mapping.json";
  mapping.save(path);
  CorrespondenceMapping back = load_mapping(path, geom, geom);
  CHECK(back.forward() == mapping.forward());
  CHECK(back.backward() == mapping.backward());
  CHECK((back.transform().rotation - mapping.transform().rotation).norm() <
        1e-15);
  CHECK(back.gamma() == mapping.gamma());
  std::remove(path.c_str());
}
