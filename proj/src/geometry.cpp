#include "graspxfer/geometry.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "graspxfer/aabb_tree.hpp"

namespace gx {

namespace {

constexpr double kDegenerateArea = 1e-12;  // m^2

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Vec3 TriangleMesh::face_normal(int t) const {
  const auto& tri = triangles[t];
  Vec3 n = (vertices[tri[1]] - vertices[tri[0]])
               .cross(vertices[tri[2]] - vertices[tri[0]]);
  double len = n.norm();
  return len > 0.0 ? Vec3(n / len) : Vec3::UnitZ();
}

double TriangleMesh::face_area(int t) const {
  const auto& tri = triangles[t];
  return 0.5 * (vertices[tri[1]] - vertices[tri[0]])
                   .cross(vertices[tri[2]] - vertices[tri[0]])
                   .norm();
}

Vec3 TriangleMesh::face_centroid(int t) const {
  const auto& tri = triangles[t];
  return (vertices[tri[0]] + vertices[tri[1]] + vertices[tri[2]]) / 3.0;
}

double TriangleMesh::total_area() const {
  double a = 0.0;
  for (int t = 0; t < static_cast<int>(triangles.size()); ++t)
    a += face_area(t);
  return a;
}

Aabb TriangleMesh::bounds() const {
  Aabb box;
  for (const auto& v : vertices) box.expand(v);
  return box;
}

Vec3 TriangleMesh::surface_centroid() const {
  Vec3 c = Vec3::Zero();
  double total = 0.0;
  for (int t = 0; t < static_cast<int>(triangles.size()); ++t) {
    double a = face_area(t);
    c += a * face_centroid(t);
    total += a;
  }
  return total > 0.0 ? Vec3(c / total) : Vec3::Zero();
}

void TriangleMesh::finalize() {
  int nv = static_cast<int>(vertices.size());
  for (const auto& tri : triangles)
    for (int k = 0; k < 3; ++k)
      if (tri[k] < 0 || tri[k] >= nv)
        throw ParseError("triangle vertex index " + std::to_string(tri[k]) +
                         " out of range for " + std::to_string(nv) +
                         " vertices");

  std::vector<std::array<int, 3>> kept;
  kept.reserve(triangles.size());
  for (int t = 0; t < static_cast<int>(triangles.size()); ++t)
    if (face_area(t) >= kDegenerateArea) kept.push_back(triangles[t]);
  triangles = std::move(kept);

  vertex_normals.assign(nv, Vec3::Zero());
  for (int t = 0; t < static_cast<int>(triangles.size()); ++t) {
    const auto& tri = triangles[t];
    Vec3 weighted = (vertices[tri[1]] - vertices[tri[0]])
                        .cross(vertices[tri[2]] - vertices[tri[0]]);
    for (int k = 0; k < 3; ++k) vertex_normals[tri[k]] += weighted;
  }
  for (auto& n : vertex_normals) {
    double len = n.norm();
    n = len > 1e-20 ? Vec3(n / len) : Vec3::UnitZ();
  }
  tree_.reset();
}

const AabbTree& TriangleMesh::tree() const {
  if (!tree_) tree_ = std::make_shared<AabbTree>(*this);
  return *tree_;
}

Aabb SurfacePointSet::bounds() const {
  Aabb box;
  for (const auto& p : points) box.expand(p);
  return box;
}

Vec3 SurfacePointSet::centroid() const {
  Vec3 c = Vec3::Zero();
  for (const auto& p : points) c += p;
  return points.empty() ? c : Vec3(c / double(points.size()));
}

const PointTree& SurfacePointSet::tree() const {
  if (!tree_) tree_ = std::make_shared<PointTree>(points);
  return *tree_;
}

bool Geometry::empty() const {
  if (std::holds_alternative<std::monostate>(rep_)) return true;
  if (is_mesh()) return mesh().triangles.empty();
  return cloud().points.empty();
}

Aabb Geometry::bounds() const {
  return is_mesh() ? mesh().bounds() : cloud().bounds();
}

Vec3 Geometry::center_of_mass() const {
  return is_mesh() ? mesh().surface_centroid() : cloud().centroid();
}

double Geometry::max_radius_about(const Vec3& origin) const {
  double r = 0.0;
  if (is_mesh()) {
    for (const auto& v : mesh().vertices)
      r = std::max(r, (v - origin).norm());
  } else {
    for (const auto& p : cloud().points)
      r = std::max(r, (p - origin).norm());
  }
  return r;
}

Vec3 interpolated_normal(const TriangleMesh& mesh, int tri_index,
                         const Vec3& point) {
  const auto& tri = mesh.triangles[tri_index];
  const Vec3& a = mesh.vertices[tri[0]];
  const Vec3& b = mesh.vertices[tri[1]];
  const Vec3& c = mesh.vertices[tri[2]];
  Vec3 v0 = b - a, v1 = c - a, v2 = point - a;
  double d00 = v0.dot(v0), d01 = v0.dot(v1), d11 = v1.dot(v1);
  double d20 = v2.dot(v0), d21 = v2.dot(v1);
  double denom = d00 * d11 - d01 * d01;
  Vec3 n;
  if (std::abs(denom) < 1e-30) {
    n = mesh.face_normal(tri_index);
  } else {
    double v = (d11 * d20 - d01 * d21) / denom;
    double w = (d00 * d21 - d01 * d20) / denom;
    n = (1.0 - v - w) * mesh.vertex_normals[tri[0]] +
        v * mesh.vertex_normals[tri[1]] + w * mesh.vertex_normals[tri[2]];
  }
  double len = n.norm();
  return len > 1e-20 ? Vec3(n / len) : mesh.face_normal(tri_index);
}

void Geometry::ensure_accelerators() const {
  if (empty()) return;
  if (is_mesh())
    mesh().tree();
  else
    cloud().tree();
}

SurfaceHit Geometry::closest_surface_point(const Vec3& query) const {
  if (empty()) throw InvalidArgument("closest_surface_point: empty geometry");
  SurfaceHit hit;
  if (is_mesh()) {
    const TriangleMesh& m = mesh();
    auto res = m.tree().closest_point(query);
    hit.point = res.point;
    hit.distance = std::sqrt(res.dist2);
    hit.normal = interpolated_normal(m, res.triangle, res.point);
  } else {
    const SurfacePointSet& c = cloud();
    int idx = c.tree().nearest(query);
    hit.point = c.points[idx];
    hit.normal = c.normals[idx];
    hit.distance = (query - hit.point).norm();
  }
  return hit;
}

SurfacePointSet Geometry::sample_points(int n, uint64_t seed) const {
  if (is_mesh()) return sample_surface_points(mesh(), n, seed);
  const SurfacePointSet& c = cloud();
  if (n <= 0) return {};
  if (static_cast<size_t>(n) >= c.size()) return c;
  // Deterministic subsample without replacement.
  Rng rng(seed);
  std::vector<int> idx(c.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (size_t i = 0; i < static_cast<size_t>(n); ++i) {
    size_t j = i + rng.uniform_index(idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  SurfacePointSet out;
  out.points.reserve(n);
  out.normals.reserve(n);
  for (int i = 0; i < n; ++i) {
    out.points.push_back(c.points[idx[i]]);
    out.normals.push_back(c.normals[idx[i]]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Loading

namespace {

TriangleMesh parse_obj(std::istream& in) {
  TriangleMesh mesh;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(trim(line));
    std::string tag;
    if (!(ls >> tag) || tag.empty() || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x() >> v.y() >> v.z()))
        throw ParseError("OBJ: malformed vertex line: " + line);
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        // v, v/vt, v//vn, v/vt/vn all start with the vertex index.
        size_t slash = tok.find('/');
        std::string head = slash == std::string::npos ? tok : tok.substr(0, slash);
        int i = 0;
        try {
          i = std::stoi(head);
        } catch (const std::exception&) {
          throw ParseError("OBJ: malformed face token: " + tok);
        }
        if (i < 0) i = static_cast<int>(mesh.vertices.size()) + i + 1;
        idx.push_back(i - 1);
      }
      if (idx.size() < 3) throw ParseError("OBJ: face with < 3 vertices");
      for (size_t k = 1; k + 1 < idx.size(); ++k)
        mesh.triangles.push_back({idx[0], idx[k], idx[k + 1]});
    }
  }
  return mesh;
}

struct PlyHeader {
  int vertex_count = 0;
  int face_count = 0;
  std::vector<std::string> vertex_props;
  bool ascii = true;
};

PlyHeader parse_ply_header(std::istream& in) {
  PlyHeader h;
  std::string line;
  if (!std::getline(in, line) || trim(line) != "ply")
    throw ParseError("PLY: missing magic");
  std::string element;
  while (std::getline(in, line)) {
    std::istringstream ls(trim(line));
    std::string tag;
    ls >> tag;
    if (tag == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "ascii")
        throw ParseError("PLY: only ascii format is supported, got " + fmt);
    } else if (tag == "element") {
      std::string name;
      int count;
      ls >> name >> count;
      element = name;
      if (name == "vertex") h.vertex_count = count;
      if (name == "face") h.face_count = count;
    } else if (tag == "property" && element == "vertex") {
      std::string type, name;
      ls >> type;
      if (type == "list") ls >> name >> name;  // skip list types
      ls >> name;
      h.vertex_props.push_back(name);
    } else if (tag == "end_header") {
      return h;
    }
  }
  throw ParseError("PLY: missing end_header");
}

void parse_ply_vertices(std::istream& in, const PlyHeader& h,
                        std::vector<Vec3>& points, std::vector<Vec3>& normals,
                        bool& has_normals) {
  auto prop_index = [&](const std::string& name) {
    auto it = std::find(h.vertex_props.begin(), h.vertex_props.end(), name);
    return it == h.vertex_props.end()
               ? -1
               : static_cast<int>(it - h.vertex_props.begin());
  };
  int xi = prop_index("x"), yi = prop_index("y"), zi = prop_index("z");
  int nxi = prop_index("nx"), nyi = prop_index("ny"), nzi = prop_index("nz");
  if (xi < 0 || yi < 0 || zi < 0) throw ParseError("PLY: missing x/y/z");
  has_normals = nxi >= 0 && nyi >= 0 && nzi >= 0;

  std::vector<double> row(h.vertex_props.size());
  for (int i = 0; i < h.vertex_count; ++i) {
    for (auto& v : row)
      if (!(in >> v)) throw ParseError("PLY: truncated vertex data");
    points.emplace_back(row[xi], row[yi], row[zi]);
    if (has_normals) normals.emplace_back(row[nxi], row[nyi], row[nzi]);
  }
}

std::string lower_ext(const std::string& path) {
  size_t dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext;
}

}  // namespace

TriangleMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  TriangleMesh mesh;
  if (lower_ext(path) == "ply") {
    PlyHeader h = parse_ply_header(in);
    bool has_normals = false;
    std::vector<Vec3> normals;
    parse_ply_vertices(in, h, mesh.vertices, normals, has_normals);
    for (int f = 0; f < h.face_count; ++f) {
      int count;
      if (!(in >> count)) throw ParseError("PLY: truncated face data");
      std::vector<int> idx(count);
      for (int& v : idx)
        if (!(in >> v)) throw ParseError("PLY: truncated face data");
      if (count < 3) throw ParseError("PLY: face with < 3 vertices");
      for (int k = 1; k + 1 < count; ++k)
        mesh.triangles.push_back({idx[0], idx[k], idx[k + 1]});
    }
  } else {
    mesh = parse_obj(in);
  }
  if (mesh.vertices.empty() || mesh.triangles.empty())
    throw ParseError(path + ": no mesh data");
  mesh.finalize();
  return mesh;
}

SurfacePointSet load_point_cloud(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  SurfacePointSet cloud;
  if (lower_ext(path) == "ply") {
    PlyHeader h = parse_ply_header(in);
    bool has_normals = false;
    parse_ply_vertices(in, h, cloud.points, cloud.normals, has_normals);
    if (!has_normals)
      throw ParseError(path + ": point cloud has no normals (nx/ny/nz)");
  } else {
    // Whitespace-delimited: x y z nx ny nz per line.
    std::string line;
    while (std::getline(in, line)) {
      line = trim(line);
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      Vec3 p, n;
      if (!(ls >> p.x() >> p.y() >> p.z() >> n.x() >> n.y() >> n.z()))
        throw ParseError(path + ": expected 'x y z nx ny nz', got: " + line);
      cloud.points.push_back(p);
      cloud.normals.push_back(n);
    }
  }
  if (cloud.points.empty()) throw ParseError(path + ": no points");
  for (auto& n : cloud.normals) {
    double len = n.norm();
    if (len < 1e-12)
      throw ParseError(path + ": zero-length normal in point cloud");
    n /= len;
  }
  return cloud;
}

Geometry load_object(const std::string& path, GeometryKind kind) {
  return kind == GeometryKind::Mesh ? Geometry(load_mesh(path))
                                    : Geometry(load_point_cloud(path));
}

void save_point_cloud_xyz(const SurfacePointSet& cloud,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw GxError("cannot write " + path);
  out.precision(17);
  for (size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    const Vec3& n = cloud.normals[i];
    out << p.x() << ' ' << p.y() << ' ' << p.z() << ' ' << n.x() << ' '
        << n.y() << ' ' << n.z() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Sampling

SurfacePointSet sample_surface_points(const TriangleMesh& mesh, int n,
                                      uint64_t seed) {
  if (n < 0) throw InvalidArgument("sample_surface_points: n < 0");
  SurfacePointSet out;
  if (n == 0) return out;
  if (mesh.triangles.empty())
    throw InvalidArgument("sample_surface_points: empty mesh");

  // Cumulative area table; binary search keeps the draw reproducible.
  std::vector<double> cdf(mesh.triangles.size());
  double acc = 0.0;
  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    acc += mesh.face_area(static_cast<int>(t));
    cdf[t] = acc;
  }
  Rng rng(seed);
  out.points.reserve(n);
  out.normals.reserve(n);
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform() * acc;
    size_t t = std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
    if (t >= mesh.triangles.size()) t = mesh.triangles.size() - 1;
    const auto& tri = mesh.triangles[t];
    double r1 = std::sqrt(rng.uniform());
    double r2 = rng.uniform();
    double wa = 1.0 - r1, wb = r1 * (1.0 - r2), wc = r1 * r2;
    out.points.push_back(wa * mesh.vertices[tri[0]] +
                         wb * mesh.vertices[tri[1]] +
                         wc * mesh.vertices[tri[2]]);
    Vec3 nrm = wa * mesh.vertex_normals[tri[0]] +
               wb * mesh.vertex_normals[tri[1]] +
               wc * mesh.vertex_normals[tri[2]];
    double len = nrm.norm();
    out.normals.push_back(len > 1e-20
                              ? Vec3(nrm / len)
                              : mesh.face_normal(static_cast<int>(t)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Segmentation

std::vector<double> shape_diameter_values(const TriangleMesh& mesh,
                                          const SdfParams& params) {
  const AabbTree& tree = mesh.tree();
  int nf = static_cast<int>(mesh.triangles.size());
  std::vector<double> sdf(nf, 0.0);
  Rng rng(params.seed);
  double diag = mesh.bounds().diagonal();
  for (int f = 0; f < nf; ++f) {
    Vec3 inward = -mesh.face_normal(f);
    Vec3 t1, t2;
    tangent_basis(inward, t1, t2);
    Vec3 origin = mesh.face_centroid(f) + 1e-9 * diag * inward;
    std::vector<double> hits;
    for (int r = 0; r < params.rays_per_face; ++r) {
      // Uniform direction in the cone about the inward normal.
      double cos_max = std::cos(params.cone_half_angle);
      double cz = cos_max + (1.0 - cos_max) * rng.uniform();
      double phi = 2.0 * M_PI * rng.uniform();
      double sz = std::sqrt(std::max(0.0, 1.0 - cz * cz));
      Vec3 dir = cz * inward + sz * (std::cos(phi) * t1 + std::sin(phi) * t2);
      auto hit = tree.raycast(origin, dir, 1e-7 * diag, 4.0 * diag);
      if (!hit) continue;
      // Only opposite-facing hits measure thickness.
      if (mesh.face_normal(hit->triangle).dot(dir) < 0.0) continue;
      hits.push_back(hit->t * cz);  // project onto the normal direction
    }
    if (hits.empty()) {
      sdf[f] = -1.0;  // filled in from neighbors below
      continue;
    }
    std::sort(hits.begin(), hits.end());
    double median = hits[hits.size() / 2];
    double sum = 0.0;
    int count = 0;
    for (double h : hits) {
      if (h >= 0.5 * median && h <= 1.5 * median) {
        sum += h;
        ++count;
      }
    }
    sdf[f] = count > 0 ? sum / count : median;
  }
  // Faces with no valid rays inherit the mesh median.
  std::vector<double> valid;
  for (double v : sdf)
    if (v >= 0.0) valid.push_back(v);
  if (valid.empty()) throw InvalidArgument("shape_diameter_values: no ray hits");
  std::nth_element(valid.begin(), valid.begin() + valid.size() / 2,
                   valid.end());
  double fallback = valid[valid.size() / 2];
  for (double& v : sdf)
    if (v < 0.0) v = fallback;
  return sdf;
}

namespace {

// Face adjacency over shared (undirected) edges, with shared edge length.
struct FaceAdjacency {
  std::vector<std::vector<std::pair<int, double>>> neighbors;
};

FaceAdjacency build_adjacency(const TriangleMesh& mesh) {
  std::map<std::pair<int, int>, std::vector<int>> edge_faces;
  for (int f = 0; f < static_cast<int>(mesh.triangles.size()); ++f) {
    const auto& tri = mesh.triangles[f];
    for (int k = 0; k < 3; ++k) {
      int a = tri[k], b = tri[(k + 1) % 3];
      edge_faces[{std::min(a, b), std::max(a, b)}].push_back(f);
    }
  }
  FaceAdjacency adj;
  adj.neighbors.resize(mesh.triangles.size());
  for (const auto& [edge, faces] : edge_faces) {
    double len = (mesh.vertices[edge.first] - mesh.vertices[edge.second]).norm();
    for (size_t i = 0; i < faces.size(); ++i)
      for (size_t j = i + 1; j < faces.size(); ++j) {
        adj.neighbors[faces[i]].emplace_back(faces[j], len);
        adj.neighbors[faces[j]].emplace_back(faces[i], len);
      }
  }
  return adj;
}

// 1D k-means with quantile initialization; deterministic.
std::vector<int> kmeans_1d(const std::vector<double>& values, int k) {
  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> centers(k);
  for (int c = 0; c < k; ++c)
    centers[c] = sorted[std::min(sorted.size() - 1,
                                 sorted.size() * (2 * c + 1) / (2 * k))];
  std::vector<int> assign(values.size(), 0);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (size_t i = 0; i < values.size(); ++i) {
      int best = 0;
      double best_d = std::abs(values[i] - centers[0]);
      for (int c = 1; c < k; ++c) {
        double d = std::abs(values[i] - centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    std::vector<double> sum(k, 0.0);
    std::vector<int> count(k, 0);
    for (size_t i = 0; i < values.size(); ++i) {
      sum[assign[i]] += values[i];
      ++count[assign[i]];
    }
    for (int c = 0; c < k; ++c)
      if (count[c] > 0) centers[c] = sum[c] / count[c];
    if (!changed) break;
  }
  return assign;
}

TriangleMesh submesh(const TriangleMesh& mesh, const std::vector<int>& faces) {
  TriangleMesh out;
  std::map<int, int> remap;
  for (int f : faces) {
    const auto& tri = mesh.triangles[f];
    std::array<int, 3> nt{};
    for (int k = 0; k < 3; ++k) {
      auto [it, inserted] = remap.emplace(tri[k], remap.size());
      if (inserted) out.vertices.push_back(mesh.vertices[tri[k]]);
      nt[k] = it->second;
    }
    out.triangles.push_back(nt);
  }
  out.finalize();
  return out;
}

std::vector<Geometry> split_parts(const Geometry& geometry,
                                  const std::vector<int>& labels,
                                  int num_parts) {
  std::vector<Geometry> parts;
  for (int p = 0; p < num_parts; ++p) {
    if (geometry.is_mesh()) {
      std::vector<int> faces;
      for (size_t f = 0; f < labels.size(); ++f)
        if (labels[f] == p) faces.push_back(static_cast<int>(f));
      parts.emplace_back(submesh(geometry.mesh(), faces));
    } else {
      SurfacePointSet sub;
      const auto& cloud = geometry.cloud();
      for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == p) {
          sub.points.push_back(cloud.points[i]);
          sub.normals.push_back(cloud.normals[i]);
        }
      parts.emplace_back(std::move(sub));
    }
  }
  return parts;
}

}  // namespace

SegmentedObject make_segmented(Geometry geometry, std::vector<int> labels) {
  size_t expected = geometry.is_mesh() ? geometry.mesh().triangles.size()
                                       : geometry.cloud().size();
  if (labels.size() != expected)
    throw InvalidArgument("segmentation has " + std::to_string(labels.size()) +
                          " labels for " + std::to_string(expected) +
                          " faces/points");
  // Compact labels in first-appearance order.
  std::map<int, int> remap;
  for (int& l : labels) {
    auto [it, inserted] = remap.emplace(l, remap.size());
    l = it->second;
  }
  int num_parts = static_cast<int>(remap.size());
  SegmentedObject obj;
  obj.labels = std::move(labels);
  obj.parts = split_parts(geometry, obj.labels, num_parts);
  obj.geometry = std::move(geometry);
  for (int p = 0; p < num_parts; ++p)
    if (obj.parts[p].empty())
      throw InvalidArgument("segmentation part " + std::to_string(p) +
                            " is empty");
  return obj;
}

SegmentedObject load_segmentation(Geometry geometry, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::vector<int> labels;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    try {
      labels.push_back(std::stoi(line));
    } catch (const std::exception&) {
      throw ParseError(path + ": bad label line: " + line);
    }
  }
  return make_segmented(std::move(geometry), std::move(labels));
}

void save_segmentation(const std::vector<int>& labels,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw GxError("cannot write " + path);
  for (int l : labels) out << l << '\n';
}

SegmentedObject segment_by_sdf(const TriangleMesh& mesh, int num_parts,
                               const SdfParams& params) {
  if (num_parts < 1) throw InvalidArgument("segment_by_sdf: num_parts < 1");
  int nf = static_cast<int>(mesh.triangles.size());
  std::vector<double> sdf = shape_diameter_values(mesh, params);
  std::vector<int> cluster = kmeans_1d(sdf, num_parts);

  // Connected components within each cluster.
  FaceAdjacency adj = build_adjacency(mesh);
  std::vector<int> comp(nf, -1);
  std::vector<double> comp_area;
  int ncomp = 0;
  for (int f = 0; f < nf; ++f) {
    if (comp[f] >= 0) continue;
    std::vector<int> stack{f};
    comp[f] = ncomp;
    double area = 0.0;
    while (!stack.empty()) {
      int cur = stack.back();
      stack.pop_back();
      area += mesh.face_area(cur);
      for (auto [nb, len] : adj.neighbors[cur]) {
        if (comp[nb] < 0 && cluster[nb] == cluster[cur]) {
          comp[nb] = ncomp;
          stack.push_back(nb);
        }
      }
    }
    comp_area.push_back(area);
    ++ncomp;
  }
  if (ncomp < num_parts)
    throw InvalidArgument("segment_by_sdf: only " + std::to_string(ncomp) +
                          " connected components for " +
                          std::to_string(num_parts) + " parts");

  // Keep the num_parts largest components as parts; merge the rest into the
  // adjacent part with the longest shared boundary.
  std::vector<int> order(ncomp);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return comp_area[a] > comp_area[b]; });
  std::vector<int> part_of_comp(ncomp, -1);
  for (int p = 0; p < num_parts; ++p) part_of_comp[order[p]] = p;

  std::vector<int> labels(nf, -1);
  for (int f = 0; f < nf; ++f) labels[f] = part_of_comp[comp[f]];

  // Iterate merges until every minor component is absorbed.
  bool progress = true;
  while (progress) {
    progress = false;
    for (int c = 0; c < ncomp; ++c) {
      if (part_of_comp[c] >= 0) continue;
      std::map<int, double> boundary;  // part -> shared edge length
      for (int f = 0; f < nf; ++f) {
        if (comp[f] != c) continue;
        for (auto [nb, len] : adj.neighbors[f])
          if (labels[nb] >= 0 && comp[nb] != c) boundary[labels[nb]] += len;
      }
      if (boundary.empty()) continue;  // not adjacent to any part yet
      int best_part = -1;
      double best_len = -1.0;
      for (auto [p, len] : boundary)
        if (len > best_len) {
          best_len = len;
          best_part = p;
        }
      for (int f = 0; f < nf; ++f)
        if (comp[f] == c) labels[f] = best_part;
      part_of_comp[c] = best_part;
      progress = true;
    }
  }
  for (int f = 0; f < nf; ++f)
    if (labels[f] < 0)
      throw InvalidArgument(
          "segment_by_sdf: isolated component not adjacent to any part");

  return make_segmented(Geometry(mesh), labels);
}

}  // namespace gx
