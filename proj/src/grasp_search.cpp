#include "graspxfer/grasp_search.hpp"

#include <algorithm>
#include <thread>

namespace gx {

QualityParams object_quality_params(const Geometry& object, int cone_edges) {
  QualityParams p;
  p.cone_edges = cone_edges;
  p.center_of_mass = object.center_of_mass();
  p.torque_scale = std::max(object.max_radius_about(p.center_of_mass), 1e-9);
  return p;
}

std::vector<Contact> contacts_from_events(const std::vector<ContactEvent>& evs,
                                          double mu) {
  std::vector<Contact> out;
  out.reserve(evs.size());
  for (const auto& ev : evs)
    out.push_back({ev.point, -ev.normal_object, mu});
  return out;
}

std::optional<Grasp> is_stable_grasp(const HandModel& hand,
                                     const HandConfiguration& config,
                                     const Geometry& object,
                                     const GraspEvalParams& eval) {
  CloseResult closed = close_fingers(hand, config, object);
  std::vector<Contact> contacts =
      contacts_from_events(closed.contacts, eval.friction_mu);
  QualityParams qp = object_quality_params(object, eval.cone_edges);
  GraspQuality quality = epsilon_quality(contacts, qp);
  if (!quality.force_closure) return std::nullopt;
  Grasp g;
  g.config = closed.config;
  g.contacts = std::move(contacts);
  for (const auto& ev : closed.contacts) g.contact_links.push_back(ev.link_id);
  g.quality = quality;
  FkResult fk = hand.forward_kinematics(closed.config);
  g.measure = hybrid_grasp_measure(fk.points, fk.point_normals, object,
                                   quality, eval.weights);
  return g;
}

namespace {

struct Evaluation {
  double measure = std::numeric_limits<double>::max();
  std::optional<Grasp> grasp;
};

Evaluation evaluate_config(const HandModel& hand, const Geometry& part,
                           const HandConfiguration& config,
                           const GraspEvalParams& eval,
                           const QualityParams& qp) {
  Evaluation out;
  CloseResult closed = close_fingers(hand, config, part);
  std::vector<Contact> contacts =
      contacts_from_events(closed.contacts, eval.friction_mu);
  GraspQuality quality = epsilon_quality(contacts, qp);
  FkResult fk = hand.forward_kinematics(closed.config);
  out.measure = hybrid_grasp_measure(fk.points, fk.point_normals, part,
                                     quality, eval.weights);
  if (quality.force_closure) {
    Grasp g;
    g.config = closed.config;
    g.contacts = std::move(contacts);
    for (const auto& ev : closed.contacts)
      g.contact_links.push_back(ev.link_id);
    g.quality = quality;
    g.measure = out.measure;
    out.grasp = std::move(g);
  }
  return out;
}

}  // namespace

std::vector<Grasp> pso_plan_grasps(const HandModel& hand, const Geometry& part,
                                   const ConfigSpec& spec,
                                   const std::vector<HandConfiguration>& seeds,
                                   const PsoParams& params,
                                   const GraspEvalParams& eval,
                                   PsoTrace* trace) {
  if (seeds.empty()) throw InvalidArgument("pso_plan_grasps: empty seed set");
  const int dim = spec.dimension();
  const int swarm = std::max(1, params.swarm_size);
  QualityParams qp = object_quality_params(part, eval.cone_edges);

  // Normalized-space bounds for clamping.
  VecX lo(dim), hi(dim);
  {
    Vec3 center = spec.sampling_box.center();
    Vec3 nlo = (spec.sampling_box.lo - center) / spec.position_scale;
    Vec3 nhi = (spec.sampling_box.hi - center) / spec.position_scale;
    for (int i = 0; i < 3; ++i) {
      lo[i] = nlo[i];
      hi[i] = nhi[i];
    }
    for (int i = 3; i < 7; ++i) {
      lo[i] = -1.0;
      hi[i] = 1.0;
    }
    for (int i = 7; i < dim; ++i) {
      lo[i] = 0.0;
      hi[i] = 1.0;
    }
  }
  auto clamp_position = [&](VecX& x) {
    for (int i = 0; i < dim; ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
    // Unit quaternion block, canonical sign.
    double qn = x.segment<4>(3).norm();
    if (qn < 1e-12) {
      x[3] = 1.0;
      x[4] = x[5] = x[6] = 0.0;
    } else {
      x.segment<4>(3) /= qn;
      if (x[3] < 0.0) x.segment<4>(3) = -x.segment<4>(3);
    }
  };

  struct Particle {
    VecX x;
    VecX v;
    VecX best_x;
    double best_value = std::numeric_limits<double>::max();
    HandConfiguration config;  // world-space mirror of x, collision-free
    Rng rng{0};
  };

  Rng root(params.seed);
  std::vector<Particle> swarm_vec(swarm);
  for (int p = 0; p < swarm; ++p) {
    Particle& part_p = swarm_vec[p];
    part_p.config = seeds[p % seeds.size()];
    if (static_cast<size_t>(p) < seeds.size()) {
      FkResult fk = hand.forward_kinematics(part_p.config);
      if (check_collision(fk.links, part).in_collision)
        throw InvalidArgument("pso_plan_grasps: seed " + std::to_string(p) +
                              " is in collision");
    }
    part_p.x = spec.normalize(part_p.config);
    part_p.rng = root.split(p + 1);
    part_p.v = VecX::Zero(dim);
    for (int i = 0; i < dim; ++i)
      part_p.v[i] = params.init_velocity * (hi[i] - lo[i]) *
                    (2.0 * part_p.rng.uniform() - 1.0);
    part_p.best_x = part_p.x;
  }

  std::vector<Grasp> found;
  std::vector<VecX> found_x;
  auto record = [&](const Grasp& g) {
    VecX gx = spec.normalize(g.config);
    for (size_t i = 0; i < found.size(); ++i) {
      if ((found_x[i] - gx).norm() < params.dedup_radius) {
        if (g.measure < found[i].measure) {
          found[i] = g;
          found_x[i] = gx;
        }
        return;
      }
    }
    found.push_back(g);
    found_x.push_back(std::move(gx));
  };

  double gbest_value = std::numeric_limits<double>::max();
  VecX gbest_x;

  // Particle moves/evaluations within one iteration run concurrently; the
  // gbest reduction is the per-iteration synchronization point, in particle
  // order, so runs are reproducible regardless of thread count.
  part.ensure_accelerators();
  const int threads = std::max(
      1, std::min<int>(8, std::thread::hardware_concurrency()));
  std::vector<Evaluation> evals(swarm);

  auto move_particle = [&](Particle& p) {
    for (int i = 0; i < dim; ++i) {
      double r1 = p.rng.uniform(), r2 = p.rng.uniform();
      p.v[i] = params.inertia * p.v[i] +
               params.cognitive * r1 * (p.best_x[i] - p.x[i]) +
               params.social * r2 * (gbest_x[i] - p.x[i]);
    }
    VecX proposed = p.x + p.v;
    clamp_position(proposed);
    HandConfiguration target = spec.denormalize(proposed);
    FkResult fk = hand.forward_kinematics(target);
    if (check_collision(fk.links, part).in_collision) {
      // Truncate the move just before first contact.
      CcdParams ccd;
      auto toi = continuous_contact_toi(hand, p.config, target, part, ccd);
      double t_stop = toi ? std::max(0.0, *toi - ccd.eps) : 1.0;
      target = interpolate_configuration(p.config, target, t_stop);
      proposed = spec.normalize(target);
    }
    p.x = proposed;
    p.config = target;
  };

  auto parallel_pass = [&](bool move) {
    auto worker = [&](int begin, int end) {
      for (int i = begin; i < end; ++i) {
        if (move) move_particle(swarm_vec[i]);
        evals[i] = evaluate_config(hand, part, swarm_vec[i].config, eval, qp);
      }
    };
    if (threads == 1 || swarm == 1) {
      worker(0, swarm);
    } else {
      std::vector<std::thread> pool;
      int chunk = (swarm + threads - 1) / threads;
      for (int t = 0; t < threads; ++t) {
        int begin = t * chunk;
        int end = std::min(swarm, begin + chunk);
        if (begin < end) pool.emplace_back(worker, begin, end);
      }
      for (auto& th : pool) th.join();
    }
    // Deterministic reduction in particle order.
    for (int i = 0; i < swarm; ++i) {
      Particle& p = swarm_vec[i];
      if (trace) ++trace->evaluations;
      if (evals[i].grasp) record(*evals[i].grasp);
      if (evals[i].measure < p.best_value) {
        p.best_value = evals[i].measure;
        p.best_x = p.x;
      }
      if (evals[i].measure < gbest_value) {
        gbest_value = evals[i].measure;
        gbest_x = p.x;
      }
    }
  };

  parallel_pass(false);
  if (trace) trace->gbest_history.push_back(gbest_value);

  for (int it = 0; it < params.iterations; ++it) {
    parallel_pass(true);
    if (trace) trace->gbest_history.push_back(gbest_value);
  }

  std::sort(found.begin(), found.end(),
            [](const Grasp& a, const Grasp& b) { return a.measure < b.measure; });
  return found;
}

}  // namespace gx
