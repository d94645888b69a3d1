#include "sceneforge/physics/mass.hpp"

#include <cmath>

namespace sceneforge {

namespace {

MassProperties box_properties(const Aabb& b, double density) {
  MassProperties m;
  const Vec3 e = b.empty() ? Vec3(Vec3::Constant(1e-3)) : Vec3(b.extent().cwiseMax(1e-3));
  m.mass = std::max(density * e.prod(), 1e-6);
  m.com = b.empty() ? Vec3::Zero() : b.center();
  m.inertia = Mat3::Zero();
  m.inertia(0, 0) = m.mass / 12 * (e.y() * e.y() + e.z() * e.z());
  m.inertia(1, 1) = m.mass / 12 * (e.x() * e.x() + e.z() * e.z());
  m.inertia(2, 2) = m.mass / 12 * (e.x() * e.x() + e.y() * e.y());
  return m;
}

void subexpressions(double w0, double w1, double w2, double& f1, double& f2, double& f3,
                    double& g0, double& g1, double& g2) {
  const double t0 = w0 + w1;
  const double t1 = w0 * w0;
  const double t2 = t1 + w1 * t0;
  f1 = t0 + w2;
  f2 = t2 + w2 * f1;
  f3 = w0 * t1 + w1 * t2 + w2 * f2;
  g0 = f2 + w0 * (f1 + w0);
  g1 = f2 + w1 * (f1 + w1);
  g2 = f2 + w2 * (f1 + w2);
}

}  // namespace

// Polyhedral mass properties by the divergence theorem (Eberly's
// formulation), integrals accumulated per triangle.
MassProperties mass_properties(const TriMesh& mesh, double density) {
  double integral[10] = {0};
  // Shift to the bounding-box centre first for numerical stability.
  const Vec3 shift = mesh.empty() ? Vec3::Zero() : mesh.bounds().center();
  for (const auto& f : mesh.faces) {
    const Vec3 p0 = mesh.vertices[f[0]] - shift;
    const Vec3 p1 = mesh.vertices[f[1]] - shift;
    const Vec3 p2 = mesh.vertices[f[2]] - shift;
    const Vec3 d = (p1 - p0).cross(p2 - p0);
    double f1x, f2x, f3x, g0x, g1x, g2x;
    double f1y, f2y, f3y, g0y, g1y, g2y;
    double f1z, f2z, f3z, g0z, g1z, g2z;
    subexpressions(p0.x(), p1.x(), p2.x(), f1x, f2x, f3x, g0x, g1x, g2x);
    subexpressions(p0.y(), p1.y(), p2.y(), f1y, f2y, f3y, g0y, g1y, g2y);
    subexpressions(p0.z(), p1.z(), p2.z(), f1z, f2z, f3z, g0z, g1z, g2z);
    integral[0] += d.x() * f1x;
    integral[1] += d.x() * f2x;
    integral[2] += d.y() * f2y;
    integral[3] += d.z() * f2z;
    integral[4] += d.x() * f3x;
    integral[5] += d.y() * f3y;
    integral[6] += d.z() * f3z;
    integral[7] += d.x() * (p0.y() * g0x + p1.y() * g1x + p2.y() * g2x);
    integral[8] += d.y() * (p0.z() * g0y + p1.z() * g1y + p2.z() * g2y);
    integral[9] += d.z() * (p0.x() * g0z + p1.x() * g1z + p2.x() * g2z);
  }
  const double mult[10] = {1.0 / 6,  1.0 / 24, 1.0 / 24,  1.0 / 24,  1.0 / 60,
                           1.0 / 60, 1.0 / 60, 1.0 / 120, 1.0 / 120, 1.0 / 120};
  for (int i = 0; i < 10; ++i) integral[i] *= mult[i];

  const double volume = integral[0];
  const Aabb box = mesh.bounds();
  // Guard against open or inverted meshes: a plausible closed mesh has a
  // volume below its bounding box and not vanishingly small against it.
  const double box_volume = box.empty() ? 0.0 : box.extent().prod();
  if (!(volume > 1e-3 * box_volume) || volume > 1.01 * box_volume || volume < 1e-12)
    return box_properties(box, density);

  MassProperties m;
  m.mass = density * volume;
  const Vec3 c(integral[1] / volume, integral[2] / volume, integral[3] / volume);
  const double xx = integral[4], yy = integral[5], zz = integral[6];
  const double xy = integral[7], yz = integral[8], zx = integral[9];
  Mat3 I;
  I(0, 0) = yy + zz - volume * (c.y() * c.y() + c.z() * c.z());
  I(1, 1) = zz + xx - volume * (c.z() * c.z() + c.x() * c.x());
  I(2, 2) = xx + yy - volume * (c.x() * c.x() + c.y() * c.y());
  I(0, 1) = I(1, 0) = -(xy - volume * c.x() * c.y());
  I(1, 2) = I(2, 1) = -(yz - volume * c.y() * c.z());
  I(0, 2) = I(2, 0) = -(zx - volume * c.z() * c.x());
  m.inertia = density * I;
  m.com = c + shift;
  return m;
}

PhysicsParams default_physics(const TriMesh& mesh, double density) {
  PhysicsParams p;
  p.mass = mass_properties(mesh, density).mass;
  return p;
}

}  // namespace sceneforge
