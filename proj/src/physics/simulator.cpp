#include "sceneforge/physics/simulator.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include <nlohmann/json.hpp>

#include "sceneforge/geom/mesh_query.hpp"
#include "sceneforge/kernels/kernels.hpp"
#include "sceneforge/util/error.hpp"

namespace sceneforge {

struct Simulator::Body {
  int id = 0;
  bool is_static = false;
  PhysicsParams phys;
  MassProperties mp;
  Mat3 inertia_inv = Mat3::Identity();  // object frame, about the COM
  const SdfGrid* sdf = nullptr;
  Aabb sdf_box;  // object frame
  kernels::PointsSoA points;  // object frame
  std::vector<double> weights;
  Aabb point_box;  // object frame
};

namespace {

// Contact points: mesh vertices binned by (cell, dominant normal direction)
// with one representative per bin; the bin's vertex area is its weight.
void select_contact_points(const TriMesh& mesh, int target, kernels::PointsSoA& pts,
                           std::vector<double>& weights) {
  if (mesh.empty()) return;
  std::vector<double> vertex_area(mesh.vertices.size(), 0.0);
  std::vector<Vec3> vertex_normal(mesh.vertices.size(), Vec3::Zero());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const double a = mesh.face_area(f);
    const Vec3 n = mesh.face_normal(f);
    for (auto v : mesh.faces[f]) {
      vertex_area[v] += a / 3;
      vertex_normal[v] += a * n;
    }
  }
  const double h = std::max(std::sqrt(mesh.area() / std::max(target, 1)), 1e-4);
  const Vec3 origin = mesh.bounds().min;
  struct Bin {
    Vec3 centroid = Vec3::Zero();
    double area = 0.0;
    std::vector<std::uint32_t> members;
  };
  std::map<std::array<long, 4>, Bin> bins;
  for (std::uint32_t v = 0; v < mesh.vertices.size(); ++v) {
    if (vertex_area[v] <= 0) continue;
    const Vec3 c = ((mesh.vertices[v] - origin) / h).array().floor();
    const Vec3& n = vertex_normal[v];
    int axis = 0;
    n.cwiseAbs().maxCoeff(&axis);
    const long dir = 2 * axis + (n[axis] < 0 ? 1 : 0);
    auto& bin = bins[{static_cast<long>(c.x()), static_cast<long>(c.y()),
                      static_cast<long>(c.z()), dir}];
    bin.centroid += vertex_area[v] * mesh.vertices[v];
    bin.area += vertex_area[v];
    bin.members.push_back(v);
  }
  for (auto& [key, bin] : bins) {
    const Vec3 c = bin.centroid / bin.area;
    std::uint32_t best = bin.members.front();
    for (auto v : bin.members)
      if ((mesh.vertices[v] - c).squaredNorm() < (mesh.vertices[best] - c).squaredNorm()) best = v;
    const Vec3& p = mesh.vertices[best];
    pts.push(p.x(), p.y(), p.z());
    weights.push_back(bin.area);
  }
}

double damping_ratio(double restitution) {
  if (restitution <= 0) return 1.0;
  if (restitution >= 1) return 0.0;
  const double l = std::log(restitution);
  return -l / std::sqrt(std::numbers::pi * std::numbers::pi + l * l);
}

Aabb transformed_box(const Aabb& b, const RigidTransform& t) {
  Aabb out;
  if (b.empty()) return out;
  for (int c = 0; c < 8; ++c)
    out.extend(t.apply(Vec3(c & 1 ? b.max.x() : b.min.x(), c & 2 ? b.max.y() : b.min.y(),
                            c & 4 ? b.max.z() : b.min.z())));
  return out;
}

bool finite_state(const BodyState& s) {
  return s.pose.translation.allFinite() && s.pose.rotation.coeffs().allFinite() &&
         s.linear_velocity.allFinite() && s.angular_velocity.allFinite();
}

}  // namespace

Simulator::Simulator(const SceneGraph& g, const SimOptions& opt) : graph_(&g), opt_(opt) {
  require(opt.dt > 0 && opt.dt <= 5e-3, "simulate: dt must lie in (0, 5e-3]");
  substeps_ = std::max(1, static_cast<int>(std::ceil(opt.contact_omega * opt.dt / opt.max_omega_substep)));
  for (const auto& [id, n] : g.nodes) {
    auto b = std::make_shared<Body>();
    b->id = id;
    b->is_static = id == g.root;
    b->phys = n.physics;
    if (!b->is_static) {
      require(n.physics.valid(), "simulate: invalid physics parameters on node " + std::to_string(id));
      b->mp = mass_properties(n.mesh, 1.0);
      // Scale to the declared mass; the shape fixes COM and inertia ratios.
      const double scale = n.physics.mass / b->mp.mass;
      b->mp.inertia *= scale;
      b->mp.mass = n.physics.mass;
      b->inertia_inv = b->mp.inertia.inverse();
      select_contact_points(n.mesh, opt.contact_points, b->points, b->weights);
      for (std::size_t i = 0; i < b->points.size(); ++i)
        b->point_box.extend(Vec3(b->points.x[i], b->points.y[i], b->points.z[i]));
    }
    if (n.sdf.size() > 0) {
      b->sdf = &n.sdf;
      b->sdf_box = n.sdf.bounds();
    }
    bodies_.push_back(b);
  }
}

SimStates Simulator::initial_states() const {
  SimStates s;
  for (const auto& [id, n] : graph_->nodes) s[id].pose = n.state;
  return s;
}

double Simulator::kinetic_energy(const SimStates& s) const {
  double e = 0;
  for (const auto& b : bodies_) {
    if (b->is_static) continue;
    const auto& st = s.at(b->id);
    const Mat3 R = st.pose.rotation.toRotationMatrix();
    const Mat3 Iw = R * b->mp.inertia * R.transpose();
    e += 0.5 * b->mp.mass * st.linear_velocity.squaredNorm() +
         0.5 * st.angular_velocity.dot(Iw * st.angular_velocity);
  }
  return e;
}

void Simulator::step(SimStates& states, const SimAction& action, int step_index,
                     std::vector<ContactEvent>* events) const {
  const double h = opt_.dt / substeps_;
  for (int s = 0; s < substeps_; ++s)
    substep(states, action, h, step_index, s + 1 == substeps_ ? events : nullptr);
  for (const auto& b : bodies_) {
    const auto& st = states.at(b->id);
    if (!finite_state(st))
      fail(ErrorCode::simulation_diverged,
           "simulation diverged: node " + std::to_string(b->id) + " at step " + std::to_string(step_index));
  }
}

void Simulator::substep(SimStates& states, const SimAction& action, double h, int step_index,
                        std::vector<ContactEvent>* events) const {
  const std::size_t n = bodies_.size();
  std::vector<Vec3> force(n, Vec3::Zero()), torque(n, Vec3::Zero()), com(n);
  std::vector<Mat3> inv_inertia(n, Mat3::Zero());
  std::vector<const BodyState*> st(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Body& b = *bodies_[i];
    st[i] = &states.at(b.id);
    com[i] = st[i]->pose.apply(b.mp.com);
    if (b.is_static) continue;
    const Mat3 R = st[i]->pose.rotation.toRotationMatrix();
    inv_inertia[i] = R * b.inertia_inv * R.transpose();
    if (action.gravity) force[i].z() -= kGravity * b.mp.mass;
    if (auto it = action.wrenches.find(b.id); it != action.wrenches.end()) {
      force[i] += it->second.force;
      torque[i] += it->second.torque;
    }
  }
  auto velocity_at = [&](std::size_t i, const Vec3& p) -> Vec3 {
    if (bodies_[i]->is_static) return Vec3::Zero();
    return st[i]->linear_velocity + st[i]->angular_velocity.cross(p - com[i]);
  };

  kernels::PointsSoA local;
  struct Active {
    std::size_t idx;
    double depth;
    Vec3 normal;
    Vec3 point;
  };
  std::vector<Active> active;
  // Ordered pairs: surface points of body i against the field of body j.
  for (std::size_t i = 0; i < n; ++i) {
    const Body& bi = *bodies_[i];
    if (bi.is_static || bi.points.size() == 0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      const Body& bj = *bodies_[j];
      if (j == i || !bj.sdf) continue;
      const RigidTransform j_from_i = st[j]->pose.inverse() * st[i]->pose;
      if (!transformed_box(bi.point_box, j_from_i).overlaps(bj.sdf_box)) continue;

      const Mat3 R = j_from_i.rotation.toRotationMatrix();
      const double rm[9] = {R(0, 0), R(0, 1), R(0, 2), R(1, 0), R(1, 1), R(1, 2), R(2, 0), R(2, 1), R(2, 2)};
      const double tv[3] = {j_from_i.translation.x(), j_from_i.translation.y(), j_from_i.translation.z()};
      kernels::transform_points(bi.points, rm, tv, local);

      active.clear();
      double wsum = 0;
      for (std::size_t k = 0; k < local.size(); ++k) {
        const Vec3 q(local.x[k], local.y[k], local.z[k]);
        if (!bj.sdf_box.contains(q)) continue;
        const double phi = bj.sdf->sample(q);
        if (phi >= 0) continue;
        const Vec3 g = bj.sdf->gradient(q).value;
        const double gn = g.norm();
        if (gn < 1e-9) continue;
        active.push_back({k, -phi, st[j]->pose.rotate(g / gn),
                          st[i]->pose.apply(Vec3(bi.points.x[k], bi.points.y[k], bi.points.z[k]))});
        wsum += bi.weights[k];
      }
      if (active.empty() || wsum <= 0) continue;

      // Effective mass of the active set moving as one contact patch,
      // capped by the reduced body mass.
      Vec3 nsum = Vec3::Zero(), ci = Vec3::Zero(), cj = Vec3::Zero();
      for (const auto& a : active) {
        const double w = bi.weights[a.idx] / wsum;
        nsum += w * a.normal;
        ci += w * (a.point - com[i]).cross(a.normal);
        cj += w * (a.point - com[j]).cross(a.normal);
      }
      double inv_mass = nsum.squaredNorm() / bi.mp.mass + ci.dot(inv_inertia[i] * ci);
      double reduced = bi.mp.mass;
      if (!bj.is_static) {
        inv_mass += nsum.squaredNorm() / bj.mp.mass + cj.dot(inv_inertia[j] * cj);
        reduced = bi.mp.mass * bj.mp.mass / (bi.mp.mass + bj.mp.mass);
      }
      const double mu_mass = inv_mass * reduced > 1.0 ? 1.0 / inv_mass : reduced;
      const double share = bj.is_static ? 1.0 : 0.5;
      const double omega = opt_.contact_omega;
      const double K = share * mu_mass * omega * omega;
      const double C = share * 2.0 * damping_ratio(std::min(bi.phys.restitution, bj.phys.restitution)) * mu_mass * omega;
      const double mu = std::min(bi.phys.friction, bj.phys.friction);
      const double veps = opt_.friction_velocity;
      const Active* worst = nullptr;
      for (const auto& a : active) {
        const double w = bi.weights[a.idx] / wsum;
        const Vec3 vrel = velocity_at(i, a.point) - velocity_at(j, a.point);
        const double vn = vrel.dot(a.normal);
        const double fn = std::max(0.0, K * w * a.depth - C * w * vn);
        Vec3 f = fn * a.normal;
        const Vec3 vt = vrel - vn * a.normal;
        f -= (mu * fn / std::sqrt(vt.squaredNorm() + veps * veps)) * vt;
        force[i] += f;
        torque[i] += (a.point - com[i]).cross(f);
        if (!bj.is_static) {
          force[j] -= f;
          torque[j] -= (a.point - com[j]).cross(f);
        }
        if (!worst || a.depth > worst->depth) worst = &a;
      }
      if (events && worst)
        events->push_back({step_index, bi.id, bj.id, worst->point, worst->normal, worst->depth});
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const Body& b = *bodies_[i];
    if (b.is_static) continue;
    BodyState& s = states.at(b.id);
    const Mat3 R = s.pose.rotation.toRotationMatrix();
    const Mat3 Iw = R * b.mp.inertia * R.transpose();
    const Mat3 Iw_inv = R * b.inertia_inv * R.transpose();
    s.linear_velocity += h * force[i] / b.mp.mass;
    s.angular_velocity += h * (Iw_inv * (torque[i] - s.angular_velocity.cross(Iw * s.angular_velocity)));
    const double damp = 1.0 / (1.0 + b.phys.damping * h);
    s.linear_velocity *= damp;
    s.angular_velocity *= damp;

    const Vec3 x = com[i] + h * s.linear_velocity;
    const Vec3& w = s.angular_velocity;
    Quat dq(0.0, w.x(), w.y(), w.z());
    Quat q = s.pose.rotation;
    q.coeffs() += 0.5 * h * (dq * q).coeffs();
    q.normalize();
    s.pose.rotation = q;
    s.pose.translation = x - (q * b.mp.com);
  }
}

SimStates sim_step(const SimStates& states, const SimAction& action, const SceneGraph& g, double dt,
                   SimOptions opt) {
  opt.dt = dt;
  Simulator sim(g, opt);
  SimStates out = states;
  for (const auto& [id, n] : g.nodes)
    if (!out.count(id)) fail(ErrorCode::precondition, "sim_step: missing state for node " + std::to_string(id));
  sim.step(out, action, 0);
  return out;
}

Poses poses_of(const SceneGraph& g) {
  Poses p;
  for (const auto& [id, n] : g.nodes) p[id] = n.state;
  return p;
}

Poses poses_of(const SimStates& s) {
  Poses p;
  for (const auto& [id, st] : s) p[id] = st.pose;
  return p;
}

SimTrace simulate(const SceneGraph& g, const SimAction& action, double duration, const SimOptions& opt) {
  require(duration > 0 && std::isfinite(duration), "simulate: duration must be positive");
  Simulator sim(g, opt);
  SimTrace trace;
  trace.dt = opt.dt;
  SimStates s = sim.initial_states();
  trace.frames.push_back(poses_of(s));
  const int steps = std::max(1, static_cast<int>(std::lround(duration / opt.dt)));
  for (int k = 1; k <= steps; ++k) {
    sim.step(s, action, k, opt.record_contacts ? &trace.contacts : nullptr);
    if (opt.record_frames || k == steps) trace.frames.push_back(poses_of(s));
  }
  return trace;
}

DiffResult diff(const Poses& a, const Poses& b) {
  if (a.size() != b.size()) fail(ErrorCode::precondition, "diff: node sets differ");
  DiffResult r;
  for (const auto& [id, ta] : a) {
    const auto it = b.find(id);
    if (it == b.end()) fail(ErrorCode::precondition, "diff: node sets differ at " + std::to_string(id));
    const RigidTransform rel = ta.inverse() * it->second;
    NodeDiff d{rel.translation.norm(), rotation_angle(rel.rotation)};
    r.per_node[id] = d;
    r.sum += d.trans + d.rad;
  }
  return r;
}

double e_stable(const SceneGraph& g, double duration, const SimOptions& opt) {
  if (g.nodes.size() <= 1) return 0.0;
  SimOptions o = opt;
  o.record_frames = false;
  o.record_contacts = false;
  const auto trace = simulate(g, SimAction::gravity_only(), duration, o);
  return diff(trace.frames.front(), trace.frames.back()).sum;
}

double e_touch(const SceneGraph& g) {
  double sum = 0;
  for (const auto& e : g.edges) {
    if (e.kind != RelationKind::support) continue;
    const auto& child = g.node(e.a);
    const auto& parent = g.node(e.b);
    if (child.mesh.empty() || parent.mesh.empty()) continue;
    sum += std::max(0.0, min_separation(transform_mesh(child.mesh, child.state),
                                        transform_mesh(parent.mesh, parent.state)));
  }
  return sum;
}

StabilityReport classify_stability(const SceneGraph& g, double duration, double tau_t, double tau_r,
                                   const SimOptions& opt) {
  require(tau_t > 0 && tau_r > 0, "classify_stability: thresholds must be positive");
  StabilityReport r;
  const auto ids = g.object_ids();
  if (ids.empty()) return r;
  SimOptions o = opt;
  o.record_frames = false;
  o.record_contacts = false;
  const auto trace = simulate(g, SimAction::gravity_only(), duration, o);
  const auto d = diff(trace.frames.front(), trace.frames.back());
  int stable = 0;
  for (int id : ids) {
    const auto nd = d.per_node.at(id);
    const bool ok = nd.trans <= tau_t && nd.rad <= tau_r;
    r.stable[id] = ok;
    r.diffs[id] = nd;
    stable += ok;
  }
  r.stable_percent = 100.0 * stable / static_cast<double>(ids.size());
  return r;
}

std::string trace_jsonl(const SimTrace& trace) {
  std::string out;
  std::map<int, std::vector<const ContactEvent*>> by_step;
  for (const auto& c : trace.contacts) by_step[c.step].push_back(&c);
  for (std::size_t k = 0; k < trace.frames.size(); ++k) {
    nlohmann::json states = nlohmann::json::object();
    for (const auto& [id, p] : trace.frames[k]) {
      const auto& q = p.rotation;
      states[std::to_string(id)] = {{"q", {q.w(), q.x(), q.y(), q.z()}},
                                    {"p", {p.translation.x(), p.translation.y(), p.translation.z()}}};
    }
    nlohmann::json contacts = nlohmann::json::array();
    if (auto it = by_step.find(static_cast<int>(k)); it != by_step.end())
      for (const auto* c : it->second)
        contacts.push_back({{"a", c->a},
                            {"b", c->b},
                            {"point", {c->point.x(), c->point.y(), c->point.z()}},
                            {"normal", {c->normal.x(), c->normal.y(), c->normal.z()}},
                            {"depth", c->depth}});
    nlohmann::json rec = {{"t", static_cast<double>(k) * trace.dt}, {"states", states}, {"contacts", contacts}};
    out += rec.dump() + "\n";
  }
  return out;
}

}  // namespace sceneforge
