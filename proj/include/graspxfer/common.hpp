#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace gx {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;
using VecX = Eigen::VectorXd;

// Rigid transform, rotation constrained to SO(3).
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 rotate(const Vec3& v) const { return rotation * v; }

  Pose compose(const Pose& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
  }
  Pose inverse() const {
    Mat3 rt = rotation.transpose();
    return {rt, -(rt * translation)};
  }

  // RᵀR = I and det R = +1, both within tol.
  bool is_valid(double tol = 1e-9) const {
    return (rotation.transpose() * rotation - Mat3::Identity()).norm() < tol &&
           std::abs(rotation.determinant() - 1.0) < tol;
  }
};

struct GxError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : GxError {
  using GxError::GxError;
};
struct InvalidArgument : GxError {
  using GxError::GxError;
};

// Deterministic RNG. std::mt19937_64 output is fully pinned by the standard;
// the distributions below are hand-rolled so streams are identical across
// standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed), seed_base_(seed) {}

  // Derive an independent stream, e.g. one per particle or per part.
  Rng split(uint64_t stream) const {
    return Rng(mix(seed_base_ ^ mix(stream + 0x9e3779b97f4a7c15ull)));
  }

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0,1).
  double uniform() { return (engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  uint64_t uniform_index(uint64_t n) {
    // Rejection keeps the draw unbiased.
    uint64_t lim = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = engine_();
    } while (x >= lim);
    return x % n;
  }

  // Standard normal via Box-Muller (cached second value).
  double gaussian() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    cached_ = r * std::sin(2.0 * M_PI * u2);
    have_cached_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  // Uniform over SO(3), Shoemake's subgroup method.
  Quat uniform_quaternion() {
    double u1 = uniform(), u2 = uniform(), u3 = uniform();
    double s1 = std::sqrt(1.0 - u1), s2 = std::sqrt(u1);
    return Quat(s1 * std::sin(2 * M_PI * u2), s1 * std::cos(2 * M_PI * u2),
                s2 * std::sin(2 * M_PI * u3), s2 * std::cos(2 * M_PI * u3));
  }

 private:
  static uint64_t mix(uint64_t x) {
    // SplitMix64 finalizer.
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
  uint64_t seed_base_ = 0;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

// Orthonormal tangent basis for a unit normal (Frisvad / Duff et al.).
inline void tangent_basis(const Vec3& n, Vec3& t1, Vec3& t2) {
  double sign = std::copysign(1.0, n.z());
  double a = -1.0 / (sign + n.z());
  double b = n.x() * n.y() * a;
  t1 = Vec3(1.0 + sign * n.x() * n.x() * a, sign * b, -sign * n.x());
  t2 = Vec3(b, sign + n.y() * n.y() * a, -n.y());
}

// FNV-1a, used for stable config hashes in output headers.
inline uint64_t fnv1a(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace gx
