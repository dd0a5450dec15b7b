#pragma once

#include <array>
#include <cstddef>

#include "hgn/error.hpp"

// Closed-form eyeball model on the image plane.
//
// Coordinate convention (used everywhere in this project): pixels, x right,
// y down, origin at the top-left corner. The 3D gaze frame matches: x right,
// y down, z negative toward the camera, so the unit gaze vector is
//   (sin(phi)cos(theta), sin(theta), -cos(theta)cos(phi))
// with theta = pitch and phi = yaw, both in (-pi/2, pi/2).
//
// Projection is weak-perspective: a landmark is the eyeball center plus the
// eyeball radius times the in-plane part of its direction on the sphere.

namespace hgn::geom {

struct GazeAngles {
  double theta = 0.0;  // pitch, radians
  double phi = 0.0;    // yaw, radians
};

struct GazeVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct EyeballState {
  double center_x = 0.0;             // pixels
  double center_y = 0.0;             // pixels
  double radius = 0.0;               // pixels
  double iris_angular_radius = 0.35;  // radians, angular size of the iris rim
};

// Landmark serialization order: 0 iris center, 1 eyeball center, 2..9 iris
// rim counter-clockwise (in x-right / y-down coordinates) from the point
// whose rim azimuth is 0, i.e. the rightmost rim point under frontal gaze.
inline constexpr int kLandmarkCount = 10;
inline constexpr int kIrisCenterIndex = 0;
inline constexpr int kEyeballCenterIndex = 1;
inline constexpr int kRimFirstIndex = 2;

struct LandmarkSet {
  std::array<Point, kLandmarkCount> points{};
};

// arcsin arguments are clamped to +-(1 - kArcsinClampMargin); a clamped
// argument carries zero gradient through the corresponding arcsin.
inline constexpr double kArcsinClampMargin = 1e-7;

void validate(const GazeAngles& g);
void validate(const EyeballState& eye);

GazeVector angles_to_vector(const GazeAngles& g);
GazeAngles vector_to_angles(const GazeVector& v);  // throws domain on non-unit or z >= 0

LandmarkSet project_landmarks(const EyeballState& eye, const GazeAngles& g);

struct ReconResult {
  GazeAngles angles;
  bool theta_clamped = false;
  bool phi_clamped = false;
  bool degenerate() const { return theta_clamped || phi_clamped; }
};

ReconResult reconstruct_gaze(const Point& iris_center, const Point& eyeball_center,
                             double radius);

// Rows: theta, phi. Columns: x_ic, y_ic, x_ec, y_ec, R. Entries belonging to
// a clamped arcsin are zero (the clamp is flat).
using ReconJacobian = std::array<std::array<double, 5>, 2>;
ReconJacobian recon_jacobian(const Point& iris_center, const Point& eyeball_center,
                             double radius);

using Mat3 = std::array<std::array<double, 3>, 3>;

// Rotation taking the normalized eye-center direction onto (0, 0, 1).
Mat3 normalization_rotation(double x, double y, double z);

double angular_error_deg(const GazeAngles& a, const GazeAngles& b);

}  // namespace hgn::geom
