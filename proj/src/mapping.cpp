#include "graspxfer/mapping.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "graspxfer/aabb_tree.hpp"

namespace gx {

namespace {

double alignment_objective(const SurfacePointSet& A, const SurfacePointSet& B,
                           const PointTree& b_tree, const Pose& pose) {
  double obj = 0.0;
  for (size_t i = 0; i < A.size(); ++i) {
    Vec3 pa = pose.apply(A.points[i]);
    int j = b_tree.nearest(pa);
    obj += (pa - B.points[j]).squaredNorm();
    double c = std::clamp(B.normals[j].dot(pose.rotate(A.normals[i])), -1.0,
                          1.0);
    double ang = std::acos(c);
    obj += ang * ang;
  }
  return obj;
}

// Weighted Kabsch over fixed correspondences.
Pose solve_registration(const SurfacePointSet& A, const SurfacePointSet& B,
                        const std::vector<int>& corr,
                        const std::vector<double>& w) {
  double wsum = 0.0;
  Vec3 ca = Vec3::Zero(), cb = Vec3::Zero();
  for (size_t i = 0; i < A.size(); ++i) {
    wsum += w[i];
    ca += w[i] * A.points[i];
    cb += w[i] * B.points[corr[i]];
  }
  if (wsum < 1e-12) return Pose::identity();
  ca /= wsum;
  cb /= wsum;
  Mat3 H = Mat3::Zero();
  for (size_t i = 0; i < A.size(); ++i)
    H += w[i] * (A.points[i] - ca) * (B.points[corr[i]] - cb).transpose();
  Eigen::JacobiSVD<Mat3> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0
                ? -1.0
                : 1.0;
  Pose pose;
  pose.rotation = svd.matrixV() * d * svd.matrixU().transpose();
  pose.translation = cb - pose.rotation * ca;
  return pose;
}

Mat3 principal_axes(const SurfacePointSet& s) {
  Vec3 c = s.centroid();
  Mat3 cov = Mat3::Zero();
  for (const auto& p : s.points) cov += (p - c) * (p - c).transpose();
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  Mat3 v = eig.eigenvectors();  // ascending eigenvalues
  Mat3 axes;
  axes.col(0) = v.col(2);
  axes.col(1) = v.col(1);
  axes.col(2) = v.col(0);
  if (axes.determinant() < 0.0) axes.col(2) = -axes.col(2);
  return axes;
}

}  // namespace

Pose rigid_align(const SurfacePointSet& A, const SurfacePointSet& B,
                 int max_iters, double tol, AlignTrace* trace) {
  if (A.size() == 0 || B.size() == 0)
    throw InvalidArgument("rigid_align: empty point set");
  const PointTree& b_tree = B.tree();

  // Initialization candidates: identity rotation and principal-axes frames
  // with sign flips, picked by objective.
  Mat3 pa = principal_axes(A), pb = principal_axes(B);
  std::vector<Mat3> candidates{Mat3::Identity()};
  for (int sx : {1, -1})
    for (int sy : {1, -1}) {
      Mat3 s = Mat3::Identity();
      s(0, 0) = sx;
      s(1, 1) = sy;
      s(2, 2) = sx * sy;  // keeps det = +1
      candidates.push_back(pb * s * pa.transpose());
    }
  Pose pose;
  double best_obj = std::numeric_limits<double>::max();
  for (const Mat3& r : candidates) {
    Pose cand;
    cand.rotation = r;
    cand.translation = B.centroid() - r * A.centroid();
    double obj = alignment_objective(A, B, b_tree, cand);
    if (obj < best_obj) {
      best_obj = obj;
      pose = cand;
    }
  }
  if (trace) trace->objective.push_back(best_obj);

  std::vector<int> corr(A.size());
  std::vector<double> w(A.size()), w_flat(A.size(), 1.0);
  for (int iter = 0; iter < max_iters; ++iter) {
    for (size_t i = 0; i < A.size(); ++i) {
      Vec3 p = pose.apply(A.points[i]);
      corr[i] = b_tree.nearest(p);
      w[i] = std::max(0.0,
                      B.normals[corr[i]].dot(pose.rotate(A.normals[i])));
    }
    // Guarded acceptance keeps the reported objective monotone.
    Pose cand = solve_registration(A, B, corr, w);
    double obj = alignment_objective(A, B, b_tree, cand);
    if (obj > best_obj) {
      cand = solve_registration(A, B, corr, w_flat);
      obj = alignment_objective(A, B, b_tree, cand);
    }
    if (obj > best_obj) break;
    double gain = best_obj - obj;
    pose = cand;
    best_obj = obj;
    if (trace) trace->objective.push_back(best_obj);
    if (gain < tol) break;
  }
  return pose;
}

CorrespondenceMapping::CorrespondenceMapping(
    std::shared_ptr<const Geometry> source_geom,
    std::shared_ptr<const Geometry> target_geom, SurfacePointSet source,
    SurfacePointSet target, const MappingParams& params)
    : source_geom_(std::move(source_geom)),
      target_geom_(std::move(target_geom)),
      source_(std::move(source)),
      target_(std::move(target)),
      params_(params) {
  if (source_.size() == 0 || target_.size() == 0)
    throw InvalidArgument("mapping: empty point set");
  transform_ = rigid_align(source_, target_, params_.align_max_iters,
                           params_.align_tol, &align_trace_);

  double source_diag = source_.bounds().diagonal();
  double target_diag = target_.bounds().diagonal();
  gamma_ = params_.gamma > 0.0 ? params_.gamma : 0.02 * source_diag;
  r_interp_source_ = params_.r_interp_frac * source_diag;
  r_interp_target_ = params_.r_interp_frac * target_diag;

  source_transformed_.points.reserve(source_.size());
  source_transformed_.normals.reserve(source_.size());
  for (size_t i = 0; i < source_.size(); ++i) {
    source_transformed_.points.push_back(transform_.apply(source_.points[i]));
    source_transformed_.normals.push_back(
        transform_.rotate(source_.normals[i]));
  }

  const double cos_delta = std::cos(params_.delta);
  forward_.assign(source_.size(), -1);
  backward_.assign(target_.size(), -1);
  const PointTree& target_tree = target_.tree();
  for (size_t a = 0; a < source_.size(); ++a) {
    const Vec3& na = source_transformed_.normals[a];
    forward_[a] = target_tree.nearest(
        source_transformed_.points[a],
        [&](int b) { return target_.normals[b].dot(na) > cos_delta; });
  }
  const PointTree& source_t_tree = source_transformed_.tree();
  for (size_t b = 0; b < target_.size(); ++b) {
    const Vec3& nb = target_.normals[b];
    backward_[b] = source_t_tree.nearest(
        target_.points[b], [&](int a) {
          return source_transformed_.normals[a].dot(nb) > cos_delta;
        });
  }
}

void CorrespondenceMapping::build_trees() {
  // Trees build lazily via SurfacePointSet::tree().
}

std::optional<int> CorrespondenceMapping::forward_map_point(int a) const {
  if (a < 0 || a >= static_cast<int>(forward_.size()))
    throw InvalidArgument("forward_map_point: index out of range");
  return forward_[a] >= 0 ? std::optional<int>(forward_[a]) : std::nullopt;
}

std::optional<int> CorrespondenceMapping::backward_map_point(int b) const {
  if (b < 0 || b >= static_cast<int>(backward_.size()))
    throw InvalidArgument("backward_map_point: index out of range");
  return backward_[b] >= 0 ? std::optional<int>(backward_[b]) : std::nullopt;
}

std::optional<Vec3> CorrespondenceMapping::interp_forward(const Vec3& x) const {
  std::vector<int> nbrs = source_.tree().k_nearest(
      x, params_.k_interp, r_interp_source_,
      [&](int a) { return forward_[a] >= 0; });
  if (nbrs.empty()) return std::nullopt;
  Vec3 mean = Vec3::Zero();
  for (int a : nbrs) mean += target_.points[forward_[a]];
  mean /= double(nbrs.size());
  return target_geom_->closest_surface_point(mean).point;
}

std::optional<Vec3> CorrespondenceMapping::interp_backward(const Vec3& y) const {
  std::vector<int> nbrs = target_.tree().k_nearest(
      y, params_.k_interp, r_interp_target_,
      [&](int b) { return backward_[b] >= 0; });
  if (nbrs.empty()) return std::nullopt;
  Vec3 mean = Vec3::Zero();
  for (int b : nbrs) mean += source_.points[backward_[b]];
  mean /= double(nbrs.size());
  return source_geom_->closest_surface_point(mean).point;
}

bool CorrespondenceMapping::consistency_check(const Vec3& x) const {
  std::optional<Vec3> y = interp_forward(x);
  if (!y) return false;
  std::optional<Vec3> back = interp_backward(*y);
  if (!back) return false;
  return (x - *back).norm() < gamma_;
}

std::optional<std::vector<TargetContact>>
CorrespondenceMapping::map_grasp_contacts(const Grasp& grasp) const {
  std::vector<TargetContact> out;
  out.reserve(grasp.contacts.size());
  for (const auto& contact : grasp.contacts) {
    if (!consistency_check(contact.position)) return std::nullopt;
    std::optional<Vec3> mapped = interp_forward(contact.position);
    if (!mapped) return std::nullopt;
    SurfaceHit hit = target_geom_->closest_surface_point(*mapped);
    out.push_back({hit.point, hit.normal});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

nlohmann::ordered_json points_to_json(const SurfacePointSet& s) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (size_t i = 0; i < s.size(); ++i)
    arr.push_back({s.points[i].x(), s.points[i].y(), s.points[i].z(),
                   s.normals[i].x(), s.normals[i].y(), s.normals[i].z()});
  return arr;
}

SurfacePointSet points_from_json(const nlohmann::json& arr) {
  SurfacePointSet s;
  for (const auto& row : arr) {
    s.points.emplace_back(row[0].get<double>(), row[1].get<double>(),
                          row[2].get<double>());
    s.normals.emplace_back(row[3].get<double>(), row[4].get<double>(),
                           row[5].get<double>());
  }
  return s;
}

}  // namespace

void CorrespondenceMapping::save(const std::string& path) const {
  nlohmann::ordered_json j;
  j["format"] = "graspxfer-mapping";
  j["version"] = 1;
  j["delta"] = params_.delta;
  j["gamma"] = gamma_;
  j["k_interp"] = params_.k_interp;
  j["r_interp_frac"] = params_.r_interp_frac;
  const Mat3& r = transform_.rotation;
  j["rotation"] = {r(0, 0), r(0, 1), r(0, 2), r(1, 0), r(1, 1),
                   r(1, 2), r(2, 0), r(2, 1), r(2, 2)};
  j["translation"] = {transform_.translation.x(), transform_.translation.y(),
                      transform_.translation.z()};
  j["forward"] = forward_;
  j["backward"] = backward_;
  j["source"] = points_to_json(source_);
  j["target"] = points_to_json(target_);
  std::ofstream out(path);
  if (!out) throw GxError("cannot write " + path);
  out << j.dump() << '\n';
}

CorrespondenceMapping load_mapping(
    const std::string& path, std::shared_ptr<const Geometry> source_geom,
    std::shared_ptr<const Geometry> target_geom) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  if (j.value("format", "") != "graspxfer-mapping")
    throw ParseError(path + ": not a mapping file");
  CorrespondenceMapping m;
  m.source_geom_ = std::move(source_geom);
  m.target_geom_ = std::move(target_geom);
  m.params_.delta = j.at("delta").get<double>();
  m.gamma_ = j.at("gamma").get<double>();
  m.params_.gamma = m.gamma_;
  m.params_.k_interp = j.at("k_interp").get<int>();
  m.params_.r_interp_frac = j.at("r_interp_frac").get<double>();
  auto r = j.at("rotation");
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k)
      m.transform_.rotation(i, k) = r[3 * i + k].get<double>();
  auto t = j.at("translation");
  m.transform_.translation = Vec3(t[0], t[1], t[2]);
  m.source_ = points_from_json(j.at("source"));
  m.target_ = points_from_json(j.at("target"));
  m.forward_ = j.at("forward").get<std::vector<int>>();
  m.backward_ = j.at("backward").get<std::vector<int>>();
  m.r_interp_source_ = m.params_.r_interp_frac * m.source_.bounds().diagonal();
  m.r_interp_target_ = m.params_.r_interp_frac * m.target_.bounds().diagonal();
  for (size_t i = 0; i < m.source_.size(); ++i) {
    m.source_transformed_.points.push_back(
        m.transform_.apply(m.source_.points[i]));
    m.source_transformed_.normals.push_back(
        m.transform_.rotate(m.source_.normals[i]));
  }
  return m;
}

}  // namespace gx
