#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "graspxfer/cspace.hpp"
#include "support/synthetic.hpp"

using namespace gx;
using namespace gxtest;

namespace {

// Reference SMO: Platt's simplified variant with random second choice.
// Slow but written from the dual first principles, used as an oracle.
struct SimpleSmo {
  std::vector<VecX> x;
  std::vector<double> y;
  std::vector<double> alpha;
  double b = 0.0;
  double C, gamma, tol;

  double kernel(int i, int j) const {
    return std::exp(-gamma * (x[i] - x[j]).squaredNorm());
  }
  double f(const VecX& q) const {
    double s = b;
    for (size_t i = 0; i < x.size(); ++i)
      if (alpha[i] > 0)
        s += alpha[i] * y[i] * std::exp(-gamma * (x[i] - q).squaredNorm());
    return s;
  }

  void train(Rng& rng, int max_passes = 40) {
    int n = static_cast<int>(x.size());
    alpha.assign(n, 0.0);
    int passes = 0;
    while (passes < max_passes) {
      int changed = 0;
      for (int i = 0; i < n; ++i) {
        double Ei = f(x[i]) - y[i];
        if ((y[i] * Ei < -tol && alpha[i] < C) ||
            (y[i] * Ei > tol && alpha[i] > 0)) {
          int j = static_cast<int>(rng.uniform_index(n - 1));
          if (j >= i) ++j;
          double Ej = f(x[j]) - y[j];
          double ai = alpha[i], aj = alpha[j];
          double L, H;
          if (y[i] != y[j]) {
            L = std::max(0.0, aj - ai);
            H = std::min(C, C + aj - ai);
          } else {
            L = std::max(0.0, ai + aj - C);
            H = std::min(C, ai + aj);
          }
          if (L >= H) continue;
          double eta = 2 * kernel(i, j) - kernel(i, i) - kernel(j, j);
          if (eta >= 0) continue;
          double aj_new = std::clamp(aj - y[j] * (Ei - Ej) / eta, L, H);
          if (std::abs(aj_new - aj) < 1e-7) continue;
          double ai_new = ai + y[i] * y[j] * (aj - aj_new);
          double b1 = b - Ei - y[i] * (ai_new - ai) * kernel(i, i) -
                      y[j] * (aj_new - aj) * kernel(i, j);
          double b2 = b - Ej - y[i] * (ai_new - ai) * kernel(i, j) -
                      y[j] * (aj_new - aj) * kernel(j, j);
          alpha[i] = ai_new;
          alpha[j] = aj_new;
          if (ai_new > 0 && ai_new < C)
            b = b1;
          else if (aj_new > 0 && aj_new < C)
            b = b2;
          else
            b = 0.5 * (b1 + b2);
          ++changed;
        }
      }
      passes = changed == 0 ? passes + 1 : 0;
    }
  }
};

std::vector<ConfigSample> two_blobs(int n, double gap, Rng& rng) {
  std::vector<ConfigSample> out;
  for (int i = 0; i < n; ++i) {
    ConfigSample s;
    s.x = VecX(2);
    bool pos = i % 2 == 0;
    s.x << (pos ? gap : -gap) + 0.3 * rng.gaussian(),
        0.3 * rng.gaussian();
    s.free = pos;
    out.push_back(s);
  }
  return out;
}

std::vector<ConfigSample> xor_pattern(int n, Rng& rng) {
  std::vector<ConfigSample> out;
  for (int i = 0; i < n; ++i) {
    ConfigSample s;
    s.x = VecX(2);
    s.x << rng.uniform(-1, 1), rng.uniform(-1, 1);
    s.free = (s.x[0] > 0) == (s.x[1] > 0);
    out.push_back(s);
  }
  return out;
}

double training_accuracy(const Classifier& c,
                         const std::vector<ConfigSample>& samples) {
  int correct = 0;
  for (const auto& s : samples)
    if (c.predict_free(s.x) == s.free) ++correct;
  return double(correct) / samples.size();
}

// Disc robot vs circle obstacle: free iff |p| > r_robot + r_obstacle.
constexpr double kToyFreeRadius = 0.4;

ConfigSampler toy_sampler() {
  return [](Rng& rng) {
    VecX x(2);
    x << rng.uniform(-1, 1), rng.uniform(-1, 1);
    return x;
  };
}

FreeOracle toy_oracle() {
  return [](const VecX& x) { return x.norm() > kToyFreeRadius; };
}

}  // namespace

TEST_CASE("svm: separable blobs reach 100% training accuracy") {
  Rng rng(1);
  std::vector<ConfigSample> samples = two_blobs(120, 2.0, rng);
  Classifier c = train_classifier(samples, {});
  CHECK(training_accuracy(c, samples) == 1.0);
}

TEST_CASE("svm: xor pattern beats 95%, matching the reference SMO") {
  Rng rng(2);
  std::vector<ConfigSample> samples = xor_pattern(300, rng);
  SvmParams params;
  params.C = 10.0;
  params.gamma = 4.0;
  Classifier c = train_classifier(samples, params);
  double acc = training_accuracy(c, samples);

  SimpleSmo oracle;
  oracle.C = params.C;
  oracle.gamma = params.gamma;
  oracle.tol = params.tol;
  for (const auto& s : samples) {
    oracle.x.push_back(s.x);
    oracle.y.push_back(s.free ? 1.0 : -1.0);
  }
  Rng oracle_rng(3);
  oracle.train(oracle_rng);
  int oracle_correct = 0;
  for (const auto& s : samples)
    if ((oracle.f(s.x) > 0) == s.free) ++oracle_correct;
  double oracle_acc = double(oracle_correct) / samples.size();

  CHECK(oracle_acc >= 0.95);
  CHECK(acc >= 0.95);
  CHECK(acc >= oracle_acc - 0.03);
}

TEST_CASE("svm: duplicated samples leave the decision function unchanged") {
  Rng rng(4);
  std::vector<ConfigSample> samples = two_blobs(80, 2.0, rng);
  Classifier base = train_classifier(samples, {});
  std::vector<ConfigSample> doubled = samples;
  doubled.insert(doubled.end(), samples.begin(), samples.end());
  Classifier dup = train_classifier(doubled, {});
  for (int i = 0; i < 100; ++i) {
    VecX q(2);
    q << rng.uniform(-3, 3), rng.uniform(-1, 1);
    CHECK(std::abs(base.decision(q) - dup.decision(q)) < 1e-6);
  }
}

TEST_CASE("svm: single class rejected") {
  std::vector<ConfigSample> samples;
  for (int i = 0; i < 10; ++i) {
    ConfigSample s;
    s.x = VecX::Constant(2, double(i));
    s.free = true;
    samples.push_back(s);
  }
  CHECK_THROWS_AS(train_classifier(samples, {}), InvalidArgument);
}

TEST_CASE("config normalization round trip") {
  HandModel hand = make_default_hand();
  TriangleMesh sphere = make_uv_sphere(0.04, Vec3(0, 0, 0.05), 24, 12);
  Geometry part(sphere);
  ConfigSpec spec = make_config_spec(hand, part);
  CHECK(spec.dimension() == 11);
  Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    HandConfiguration c;
    c.palm_pose.rotation = rng.uniform_quaternion().toRotationMatrix();
    for (int k = 0; k < 3; ++k)
      c.palm_pose.translation[k] =
          rng.uniform(spec.sampling_box.lo[k], spec.sampling_box.hi[k]);
    c.joints = VecX(hand.dof_count());
    for (int d = 0; d < hand.dof_count(); ++d)
      c.joints[d] = rng.uniform(hand.dofs[d].lower, hand.dofs[d].upper);
    HandConfiguration back = spec.denormalize(spec.normalize(c));
    CHECK((back.palm_pose.translation - c.palm_pose.translation).norm() < 1e-9);
    CHECK((back.palm_pose.rotation - c.palm_pose.rotation).norm() < 1e-9);
    CHECK((back.joints - c.joints).norm() < 1e-9);
  }
}

TEST_CASE("sample_and_label: containment and disjointness") {
  HandModel hand = make_default_hand();

  SUBCASE("sampling region far from the object: all free") {
    TriangleMesh sphere = make_uv_sphere(0.02, Vec3(0, 0, 0), 16, 8);
    Geometry part(sphere);
    ConfigSpec spec = make_config_spec(hand, part);
    spec.sampling_box.lo = Vec3(3, 3, 3);
    spec.sampling_box.hi = Vec3(3.1, 3.1, 3.1);
    auto samples = sample_and_label(hand, part, spec, 50, 7);
    for (const auto& s : samples) CHECK(s.free);
  }

  SUBCASE("palm larger than the box: all colliding") {
    // The palm cannot fit inside a 8 cm cube, so every placement inside
    // crosses the surface.
    TriangleMesh cube = make_box_mesh(Vec3(0.04, 0.04, 0.04));
    Geometry part(cube);
    ConfigSpec spec = make_config_spec(hand, part);
    spec.sampling_box.lo = Vec3(-0.005, -0.005, -0.005);
    spec.sampling_box.hi = Vec3(0.005, 0.005, 0.005);
    auto samples = sample_and_label(hand, part, spec, 50, 8);
    for (const auto& s : samples) CHECK(!s.free);
  }
}

TEST_CASE("active learning: zero rounds is the identity") {
  Rng rng(11);
  auto sampler = toy_sampler();
  auto oracle = toy_oracle();
  std::vector<ConfigSample> samples = label_samples(sampler, oracle, 200, rng);
  Classifier c = train_classifier(samples, {});
  ActiveLearnParams params;
  params.rounds = 0;
  Rng refine_rng(12);
  Classifier refined =
      active_learning_refine(c, samples, sampler, oracle, params, refine_rng);
  REQUIRE(refined.svm.support_vectors.size() == c.svm.support_vectors.size());
  for (size_t i = 0; i < c.svm.coefficients.size(); ++i)
    CHECK(refined.svm.coefficients[i] == c.svm.coefficients[i]);
}

TEST_CASE("active learning: toy c-space accuracy improves") {
  auto sampler = toy_sampler();
  auto oracle = toy_oracle();
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    std::vector<ConfigSample> samples = label_samples(sampler, oracle, 250, rng);
    std::vector<ConfigSample> holdout = label_samples(sampler, oracle, 800, rng);
    SvmParams svm;
    svm.gamma = 8.0;
    Classifier c = train_classifier(samples, svm);
    ActiveLearnParams params;
    params.rounds = 3;
    params.batch = 120;
    params.pool = 1200;
    params.svm = svm;
    std::vector<double> trace;
    Classifier refined = active_learning_refine(c, samples, sampler, oracle,
                                                params, rng, holdout, &trace);
    REQUIRE(trace.size() == 4);
    CHECK(trace.back() >= trace.front() - 1e-12);
    CHECK(trace.back() >= 0.90);
  }
}

TEST_CASE("active learning: batch larger than pool labels the whole pool") {
  Rng rng(31);
  auto sampler = toy_sampler();
  auto oracle = toy_oracle();
  std::vector<ConfigSample> samples = label_samples(sampler, oracle, 100, rng);
  Classifier c = train_classifier(samples, {});
  ActiveLearnParams params;
  params.rounds = 1;
  params.batch = 500;
  params.pool = 60;
  size_t before = samples.size();
  Rng refine_rng(32);
  active_learning_refine(c, samples, sampler, oracle, params, refine_rng);
  CHECK(samples.size() == before + 60);
}

TEST_CASE("free_support_vectors: filter semantics and denormalization") {
  HandModel hand = make_default_hand();
  TriangleMesh sphere = make_uv_sphere(0.04, Vec3(0, 0, 0.06), 24, 12);
  Geometry part(sphere);
  ConfigSpec spec = make_config_spec(hand, part);
  auto samples = sample_and_label(hand, part, spec, 600, 21);
  Classifier c = train_classifier(samples, {});
  c.spec = spec;
  std::vector<HandConfiguration> frees = free_support_vectors(c);
  CHECK(!frees.empty());
  // Each returned configuration corresponds to a free-labeled SV.
  int free_svs = 0;
  for (int f : c.sv_free) free_svs += f;
  CHECK(static_cast<int>(frees.size()) == free_svs);
  // Denormalized joints respect limits.
  for (const auto& cfg : frees)
    for (int d = 0; d < hand.dof_count(); ++d) {
      CHECK(cfg.joints[d] >= hand.dofs[d].lower - 1e-9);
      CHECK(cfg.joints[d] <= hand.dofs[d].upper + 1e-9);
    }
}

TEST_CASE("classifier serialization round trip") {
  Rng rng(41);
  std::vector<ConfigSample> samples = two_blobs(60, 1.5, rng);
  Classifier c = train_classifier(samples, {});
  c.spec.sampling_box.lo = Vec3(-1, -2, -3);
  c.spec.sampling_box.hi = Vec3(1, 2, 3);
  c.spec.position_scale = 2.5;
  c.spec.joint_lower = {0.0, 0.5};
  c.spec.joint_upper = {1.0, 2.0};
  std::string path = "/tmp/gx_classifier.json";
  save_classifier(c, path);
  Classifier back = load_classifier(path);
  for (int i = 0; i < 50; ++i) {
    VecX q(2);
    q << rng.uniform(-3, 3), rng.uniform(-2, 2);
    CHECK(back.decision(q) == doctest::Approx(c.decision(q)).epsilon(1e-12));
  }
  CHECK(back.spec.position_scale == c.spec.position_scale);
  std::remove(path.c_str());
}
