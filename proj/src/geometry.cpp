#include "hgn/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace hgn::geom {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kHalfPi = kPi / 2.0;

double clamp_arcsin_arg(double v, bool* clamped) {
  const double bound = 1.0 - kArcsinClampMargin;
  if (v > bound) {
    if (clamped) *clamped = true;
    return bound;
  }
  if (v < -bound) {
    if (clamped) *clamped = true;
    return -bound;
  }
  return v;
}

struct Vec3 {
  double x, y, z;
};

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

Vec3 scaled(const Vec3& a, double s) { return {a.x * s, a.y * s, a.z * s}; }

}  // namespace

void validate(const GazeAngles& g) {
  if (!(std::abs(g.theta) < kHalfPi) || !(std::abs(g.phi) < kHalfPi)) {
    raise(ErrorCategory::domain, "gaze angles must lie in (-pi/2, pi/2)");
  }
}

void validate(const EyeballState& eye) {
  if (!(eye.radius > 0.0)) {
    raise(ErrorCategory::domain, "eyeball radius must be positive");
  }
  if (!(eye.iris_angular_radius > 0.0) || !(eye.iris_angular_radius < kHalfPi)) {
    raise(ErrorCategory::domain, "iris angular radius must lie in (0, pi/2)");
  }
}

GazeVector angles_to_vector(const GazeAngles& g) {
  validate(g);
  double ct = std::cos(g.theta);
  return {std::sin(g.phi) * ct, std::sin(g.theta), -ct * std::cos(g.phi)};
}

GazeAngles vector_to_angles(const GazeVector& v) {
  double n = std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
  if (std::abs(n - 1.0) > 1e-6) {
    raise(ErrorCategory::domain, "gaze vector must be unit length");
  }
  if (!(v.z < 0.0)) {
    raise(ErrorCategory::domain, "gaze vector must point toward the camera (z < 0)");
  }
  double theta = std::asin(std::clamp(v.y, -1.0, 1.0));
  double phi = std::atan2(v.x, -v.z);
  return {theta, phi};
}

LandmarkSet project_landmarks(const EyeballState& eye, const GazeAngles& g) {
  validate(eye);
  validate(g);
  LandmarkSet out;

  GazeVector gv = angles_to_vector(g);
  Vec3 gaze{gv.x, gv.y, gv.z};

  out.points[kIrisCenterIndex] = {eye.center_x + eye.radius * gaze.x,
                                  eye.center_y + eye.radius * gaze.y};
  out.points[kEyeballCenterIndex] = {eye.center_x, eye.center_y};

  // In-plane basis perpendicular to the gaze axis; u is the unit projection
  // of +x, v completes it so that frontal gaze maps rim azimuth 90deg to +y.
  Vec3 xhat{1.0, 0.0, 0.0};
  Vec3 u{xhat.x - gaze.x * gaze.x, xhat.y - gaze.x * gaze.y, xhat.z - gaze.x * gaze.z};
  u = scaled(u, 1.0 / norm(u));
  Vec3 v = cross(u, gaze);

  double cos_psi = std::cos(eye.iris_angular_radius);
  double sin_psi = std::sin(eye.iris_angular_radius);
  for (int k = 0; k < 8; ++k) {
    double azimuth = kPi / 4.0 * k;
    double ca = std::cos(azimuth);
    double sa = std::sin(azimuth);
    Vec3 rim{cos_psi * gaze.x + sin_psi * (ca * u.x + sa * v.x),
             cos_psi * gaze.y + sin_psi * (ca * u.y + sa * v.y),
             cos_psi * gaze.z + sin_psi * (ca * u.z + sa * v.z)};
    out.points[kRimFirstIndex + k] = {eye.center_x + eye.radius * rim.x,
                                      eye.center_y + eye.radius * rim.y};
  }
  return out;
}

ReconResult reconstruct_gaze(const Point& iris_center, const Point& eyeball_center,
                             double radius) {
  if (!(radius > 0.0)) {
    raise(ErrorCategory::domain, "eyeball radius must be positive");
  }
  ReconResult res;
  double sin_theta =
      clamp_arcsin_arg((iris_center.y - eyeball_center.y) / radius, &res.theta_clamped);
  res.angles.theta = std::asin(sin_theta);
  double cos_theta = std::cos(res.angles.theta);
  double sin_phi = clamp_arcsin_arg(
      (iris_center.x - eyeball_center.x) / (radius * cos_theta), &res.phi_clamped);
  res.angles.phi = std::asin(sin_phi);
  return res;
}

ReconJacobian recon_jacobian(const Point& iris_center, const Point& eyeball_center,
                             double radius) {
  if (!(radius > 0.0)) {
    raise(ErrorCategory::domain, "eyeball radius must be positive");
  }
  ReconJacobian jac{};

  bool theta_clamped = false;
  bool phi_clamped = false;
  double u = clamp_arcsin_arg((iris_center.y - eyeball_center.y) / radius, &theta_clamped);
  double theta = std::asin(u);
  double cos_theta = std::cos(theta);
  double w_raw = (iris_center.x - eyeball_center.x) / (radius * cos_theta);
  double w = clamp_arcsin_arg(w_raw, &phi_clamped);

  // theta = asin(u), u = (y_ic - y_ec) / R
  double du_scale = theta_clamped ? 0.0 : 1.0 / std::sqrt(1.0 - u * u);
  double dtheta_dyic = du_scale / radius;
  double dtheta_dR = du_scale * (-u / radius);
  jac[0][1] = dtheta_dyic;
  jac[0][3] = -dtheta_dyic;
  jac[0][4] = dtheta_dR;

  // phi = asin(w), w = (x_ic - x_ec) / (R cos(theta)); theta feeds w.
  double dw_scale = phi_clamped ? 0.0 : 1.0 / std::sqrt(1.0 - w * w);
  double tan_theta = std::tan(theta);
  double dphi_dxic = dw_scale / (radius * cos_theta);
  double dw_dtheta = w * tan_theta;  // from d(1/cos)/dtheta
  jac[1][0] = dphi_dxic;
  jac[1][2] = -dphi_dxic;
  jac[1][1] = dw_scale * dw_dtheta * dtheta_dyic;
  jac[1][3] = -jac[1][1];
  jac[1][4] = dw_scale * (-w / radius + dw_dtheta * dtheta_dR);
  return jac;
}

Mat3 normalization_rotation(double x, double y, double z) {
  double n = std::sqrt(x * x + y * y + z * z);
  if (!(n > 0.0)) {
    raise(ErrorCategory::domain, "eye center direction must be nonzero");
  }
  Vec3 c{x / n, y / n, z / n};
  Vec3 target{0.0, 0.0, 1.0};

  Vec3 axis = cross(c, target);
  double axis_norm = norm(axis);
  double cos_angle = std::clamp(dot(c, target), -1.0, 1.0);

  if (axis_norm < 1e-12) {
    Mat3 r{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    if (cos_angle < 0.0) {
      // c antiparallel to the axis: rotate half a turn about x.
      r = {{{1, 0, 0}, {0, -1, 0}, {0, 0, -1}}};
    }
    return r;
  }

  Vec3 k = scaled(axis, 1.0 / axis_norm);
  double s = axis_norm;  // sin(angle)
  double cterm = 1.0 - cos_angle;

  // Rodrigues rotation matrix for axis k, angle with sin s / cos cos_angle.
  Mat3 r;
  r[0][0] = cos_angle + k.x * k.x * cterm;
  r[0][1] = k.x * k.y * cterm - k.z * s;
  r[0][2] = k.x * k.z * cterm + k.y * s;
  r[1][0] = k.y * k.x * cterm + k.z * s;
  r[1][1] = cos_angle + k.y * k.y * cterm;
  r[1][2] = k.y * k.z * cterm - k.x * s;
  r[2][0] = k.z * k.x * cterm - k.y * s;
  r[2][1] = k.z * k.y * cterm + k.x * s;
  r[2][2] = cos_angle + k.z * k.z * cterm;
  return r;
}

double angular_error_deg(const GazeAngles& a, const GazeAngles& b) {
  GazeVector va = angles_to_vector(a);
  GazeVector vb = angles_to_vector(b);
  double d = va.x * vb.x + va.y * vb.y + va.z * vb.z;
  return std::acos(std::clamp(d, -1.0, 1.0)) * 180.0 / kPi;
}

}  // namespace hgn::geom
