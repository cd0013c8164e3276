#pragma once

#include <vector>

#include "graspxfer/common.hpp"

namespace gx {

// Convex hull of a point set in R^d (d >= 2), incremental construction with
// deterministic input joggle to break degeneracies. Built for small inputs
// (wrench primitives, d = 6, n <= a few hundred).
class ConvexHullND {
 public:
  struct Facet {
    std::vector<int> vertices;  // d point indices
    VecX normal;                // outward unit
    double offset = 0.0;        // plane: normal . x = offset
  };

  // points: n x d row-major. Throws InvalidArgument when n < d + 1 or the
  // points do not span d dimensions affinely (degenerate() is set instead
  // of throwing for the rank case).
  ConvexHullND(const std::vector<VecX>& points, uint64_t joggle_seed = 0);

  bool degenerate() const { return degenerate_; }
  const std::vector<Facet>& facets() const { return facets_; }

  // min over facets of the signed distance from the origin to the facet
  // plane along the outward normal; positive iff the origin is strictly
  // interior. Undefined (0) when degenerate.
  double min_origin_offset() const;

 private:
  void build(std::vector<VecX> pts);

  int dim_ = 0;
  bool degenerate_ = false;
  std::vector<Facet> facets_;
  double scale_ = 1.0;
};

// Affine rank of a point set (number of independent directions spanned),
// with singular values below tol * scale treated as zero.
int affine_rank(const std::vector<VecX>& points, double tol = 1e-9);

}  // namespace gx
