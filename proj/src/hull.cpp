#include "graspxfer/hull.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <map>

namespace gx {

namespace {

struct HullFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unit normal of the hyperplane through d points, oriented away from
// `interior`: the 1-dimensional nullspace of the (d-1) x d difference
// matrix, by stack-allocated Gaussian elimination. Throws HullFailure when
// the points are affinely dependent.
VecX facet_normal(const std::vector<VecX>& pts, const std::vector<int>& verts,
                  const VecX& interior, double scale) {
  constexpr int kMaxDim = 16;
  const int d = static_cast<int>(pts[0].size());
  if (d > kMaxDim) throw InvalidArgument("hull dimension too large");
  const int rows = d - 1;
  double m[kMaxDim][kMaxDim];
  for (int i = 1; i < d; ++i)
    for (int j = 0; j < d; ++j)
      m[i - 1][j] = pts[verts[i]][j] - pts[verts[0]][j];

  int pivot_col[kMaxDim];
  bool is_pivot[kMaxDim] = {};
  const double tol = 1e-12 * scale;
  int r = 0;
  for (int c = 0; c < d && r < rows; ++c) {
    int p = r;
    for (int i = r + 1; i < rows; ++i)
      if (std::abs(m[i][c]) > std::abs(m[p][c])) p = i;
    if (std::abs(m[p][c]) < tol) continue;  // free column
    if (p != r)
      for (int j = 0; j < d; ++j) std::swap(m[p][j], m[r][j]);
    for (int i = r + 1; i < rows; ++i) {
      double f = m[i][c] / m[r][c];
      if (f == 0.0) continue;
      for (int j = c; j < d; ++j) m[i][j] -= f * m[r][j];
    }
    pivot_col[r] = c;
    is_pivot[c] = true;
    ++r;
  }
  if (r < rows) throw HullFailure("degenerate facet candidate");

  int free_col = -1;
  for (int c = 0; c < d; ++c)
    if (!is_pivot[c]) {
      free_col = c;
      break;
    }
  double nbuf[kMaxDim] = {};
  nbuf[free_col] = 1.0;
  for (int i = rows - 1; i >= 0; --i) {
    int c = pivot_col[i];
    double s = 0.0;
    for (int j = c + 1; j < d; ++j) s += m[i][j] * nbuf[j];
    nbuf[c] = -s / m[i][c];
  }

  VecX n(d);
  for (int j = 0; j < d; ++j) n[j] = nbuf[j];
  double len = n.norm();
  if (len < 1e-300) throw HullFailure("zero facet normal");
  n /= len;
  double side = n.dot(interior - pts[verts[0]]);
  if (std::abs(side) < 1e-14 * scale)
    throw HullFailure("interior point on facet plane");
  if (side > 0.0) n = -n;
  return n;
}

}  // namespace

int affine_rank(const std::vector<VecX>& points, double tol) {
  if (points.size() < 2) return 0;
  int d = static_cast<int>(points[0].size());
  Eigen::MatrixXd m(points.size() - 1, d);
  for (size_t i = 1; i < points.size(); ++i)
    m.row(i - 1) = (points[i] - points[0]).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  double scale = svd.singularValues().size() > 0 ? svd.singularValues()[0]
                                                 : 0.0;
  if (scale <= 0.0) return 0;
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > tol * scale) ++rank;
  return rank;
}

ConvexHullND::ConvexHullND(const std::vector<VecX>& points,
                           uint64_t joggle_seed) {
  if (points.empty()) {
    degenerate_ = true;
    return;
  }
  dim_ = static_cast<int>(points[0].size());
  if (static_cast<int>(points.size()) < dim_ + 1) {
    degenerate_ = true;
    return;
  }
  scale_ = 0.0;
  for (const auto& p : points)
    scale_ = std::max(scale_, p.cwiseAbs().maxCoeff());
  if (scale_ <= 0.0) {
    degenerate_ = true;
    return;
  }
  if (affine_rank(points, 1e-9) < dim_) {
    degenerate_ = true;
    return;
  }

  // Joggle breaks ties (cone edges of one contact lie on a planar circle);
  // the perturbation is deterministic and far below quality tolerances.
  double eta = 1e-10;
  for (int attempt = 0; attempt < 4; ++attempt) {
    std::vector<VecX> jog = points;
    Rng rng(Rng(joggle_seed).split(attempt).next_u64());
    for (auto& p : jog)
      for (int k = 0; k < dim_; ++k)
        p[k] += scale_ * eta * (2.0 * rng.uniform() - 1.0);
    try {
      build(std::move(jog));
      return;
    } catch (const HullFailure&) {
      facets_.clear();
      eta *= 10.0;
    }
  }
  throw GxError("convex hull construction failed after joggle retries");
}

void ConvexHullND::build(std::vector<VecX> pts) {
  const int d = dim_;
  const int n = static_cast<int>(pts.size());
  const double tol_vis = 1e-12 * scale_;

  // Flat copy for the visibility inner loops.
  std::vector<double> flat(size_t(n) * d);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) flat[size_t(i) * d + k] = pts[i][k];

  // Affinely independent starting set, farthest-point greedy.
  int far = 1;
  for (int i = 1; i < n; ++i)
    if ((pts[i] - pts[0]).norm() > (pts[far] - pts[0]).norm()) far = i;
  std::vector<int> simplex{0, far};
  if ((pts[simplex[1]] - pts[simplex[0]]).norm() < tol_vis)
    throw HullFailure("all points coincide");

  // Orthonormal basis of the current affine span.
  std::vector<VecX> basis{(pts[simplex[1]] - pts[simplex[0]]).normalized()};
  while (static_cast<int>(simplex.size()) < d + 1) {
    int best = -1;
    double best_dist = 0.0;
    for (int i = 0; i < n; ++i) {
      VecX v = pts[i] - pts[simplex[0]];
      for (const auto& b : basis) v -= b.dot(v) * b;
      double dist = v.norm();
      if (dist > best_dist) {
        best_dist = dist;
        best = i;
      }
    }
    if (best < 0 || best_dist < tol_vis)
      throw HullFailure("degenerate initial simplex");
    VecX v = pts[best] - pts[simplex[0]];
    for (const auto& b : basis) v -= b.dot(v) * b;
    basis.push_back(v.normalized());
    simplex.push_back(best);
  }

  VecX interior = VecX::Zero(d);
  for (int v : simplex) interior += pts[v];
  interior /= double(d + 1);

  // Facet store: vertex indices (d per facet) and plane coefficients kept in
  // flat arrays; `alive` holds the live subset, compacted as it decays.
  std::vector<int> verts_flat;    // facet f: verts_flat[f*d .. f*d+d)
  std::vector<double> plane_flat;  // facet f: [normal(d), offset]
  std::vector<int> alive;
  int live_count = 0;

  auto add_facet = [&](std::vector<int> verts) {
    std::sort(verts.begin(), verts.end());
    VecX normal = facet_normal(pts, verts, interior, scale_);
    int f = static_cast<int>(verts_flat.size() / d);
    verts_flat.insert(verts_flat.end(), verts.begin(), verts.end());
    for (int k = 0; k < d; ++k) plane_flat.push_back(normal[k]);
    plane_flat.push_back(normal.dot(pts[verts[0]]));
    alive.push_back(f);
    ++live_count;
  };

  for (int skip = 0; skip <= d; ++skip) {
    std::vector<int> verts;
    for (int i = 0; i <= d; ++i)
      if (i != skip) verts.push_back(simplex[i]);
    add_facet(std::move(verts));
  }

  std::vector<bool> in_simplex(n, false);
  for (int v : simplex) in_simplex[v] = true;

  const int stride = d + 1;
  const int rstride = d - 1;
  std::vector<int> visible;
  std::vector<int> ridge_buf;  // ridges at stride rstride
  std::vector<int> ridge_order;
  for (int p = 0; p < n; ++p) {
    if (in_simplex[p]) continue;
    const double* point = &flat[size_t(p) * d];
    visible.clear();
    for (size_t ai = 0; ai < alive.size(); ++ai) {
      int f = alive[ai];
      if (f < 0) continue;
      const double* plane = &plane_flat[size_t(f) * stride];
      double s = -plane[d];
      for (int k = 0; k < d; ++k) s += plane[k] * point[k];
      if (s > tol_vis) visible.push_back(static_cast<int>(ai));
    }
    if (visible.empty()) continue;  // interior or on the boundary: skip

    // A ridge of exactly one visible facet borders an invisible one:
    // horizon. Ridges live in a flat buffer sorted through an index array.
    ridge_buf.clear();
    for (int ai : visible) {
      int f = alive[ai];
      const int* verts = &verts_flat[size_t(f) * d];
      for (int skip = 0; skip < d; ++skip)
        for (int i = 0; i < d; ++i)
          if (i != skip) ridge_buf.push_back(verts[i]);
    }
    const int ridge_count = static_cast<int>(ridge_buf.size()) / rstride;
    ridge_order.resize(ridge_count);
    for (int i = 0; i < ridge_count; ++i) ridge_order[i] = i;
    auto ridge_less = [&](int a, int b) {
      const int* ra = &ridge_buf[size_t(a) * rstride];
      const int* rb = &ridge_buf[size_t(b) * rstride];
      return std::lexicographical_compare(ra, ra + rstride, rb, rb + rstride);
    };
    auto ridge_eq = [&](int a, int b) {
      const int* ra = &ridge_buf[size_t(a) * rstride];
      const int* rb = &ridge_buf[size_t(b) * rstride];
      return std::equal(ra, ra + rstride, rb);
    };
    std::sort(ridge_order.begin(), ridge_order.end(), ridge_less);
    for (int ai : visible) {
      alive[ai] = -1;
      --live_count;
    }
    bool added = false;
    for (int i = 0; i < ridge_count;) {
      int j = i + 1;
      while (j < ridge_count && ridge_eq(ridge_order[i], ridge_order[j])) ++j;
      if (j - i == 1) {
        const int* r0 = &ridge_buf[size_t(ridge_order[i]) * rstride];
        std::vector<int> verts(r0, r0 + rstride);
        verts.push_back(p);
        add_facet(std::move(verts));
        added = true;
      }
      i = j;
    }
    if (!added) throw HullFailure("no horizon ridge for a visible point");

    if (live_count * 2 < static_cast<int>(alive.size())) {
      alive.erase(std::remove(alive.begin(), alive.end(), -1), alive.end());
    }
  }

  facets_.clear();
  for (int f : alive) {
    if (f < 0) continue;
    Facet out;
    out.vertices.assign(&verts_flat[size_t(f) * d],
                        &verts_flat[size_t(f) * d] + d);
    out.normal = VecX(d);
    const double* plane = &plane_flat[size_t(f) * stride];
    for (int k = 0; k < d; ++k) out.normal[k] = plane[k];
    out.offset = plane[d];
    facets_.push_back(std::move(out));
  }
  if (facets_.empty()) throw HullFailure("empty hull");

  // Soundness: every input point on or below every facet plane.
  for (const auto& f : facets_)
    for (int i = 0; i < n; ++i) {
      const double* point = &flat[size_t(i) * d];
      double s = -f.offset;
      for (int k = 0; k < d; ++k) s += f.normal[k] * point[k];
      if (s > 1e-6 * scale_) throw HullFailure("hull misses a point");
    }
}

double ConvexHullND::min_origin_offset() const {
  if (degenerate_ || facets_.empty()) return 0.0;
  double best = std::numeric_limits<double>::max();
  for (const auto& f : facets_) best = std::min(best, f.offset);
  return best;
}

}  // namespace gx
