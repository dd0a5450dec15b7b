#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hgn/geometry.hpp"
#include "hgn/rng.hpp"
#include "support/fd.hpp"

using namespace hgn;
using namespace hgn::geom;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDeg = kPi / 180.0;

GazeAngles random_gaze(Rng& rng, double limit_deg = 80.0) {
  return {rng.uniform(-limit_deg * kDeg, limit_deg * kDeg),
          rng.uniform(-limit_deg * kDeg, limit_deg * kDeg)};
}

}  // namespace

TEST_CASE("angles_to_vector basics") {
  GazeVector frontal = angles_to_vector({0.0, 0.0});
  CHECK(frontal.x == doctest::Approx(0.0));
  CHECK(frontal.y == doctest::Approx(0.0));
  CHECK(frontal.z == doctest::Approx(-1.0));

  // Pure pitch limit: y -> 1, z -> 0 from below.
  GazeVector up = angles_to_vector({kPi / 2.0 - 1e-6, 0.0});
  CHECK(up.x == doctest::Approx(0.0));
  CHECK(up.y == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(up.z < 0.0);

  // Frozen from extended-precision evaluation of the component formulas.
  GazeVector v = angles_to_vector({kPi / 6.0, kPi / 6.0});
  CHECK(v.x == doctest::Approx(0.43301270189221932).epsilon(1e-12));
  CHECK(v.y == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(v.z == doctest::Approx(-0.75).epsilon(1e-12));
}

TEST_CASE("angles_to_vector yields unit vectors with z < 0") {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    GazeAngles g = random_gaze(rng, 89.0);
    GazeVector v = angles_to_vector(g);
    double norm = std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
    CHECK(std::abs(norm - 1.0) < 1e-9);
    CHECK(v.z < 0.0);
  }
}

TEST_CASE("vector_to_angles inverts angles_to_vector") {
  CHECK(vector_to_angles({0.0, 0.0, -1.0}).theta == doctest::Approx(0.0));
  CHECK(vector_to_angles({0.0, 0.0, -1.0}).phi == doctest::Approx(0.0));

  GazeAngles half = vector_to_angles({0.0, 0.5, -std::sqrt(3.0) / 2.0});
  CHECK(half.theta == doctest::Approx(kPi / 6.0).epsilon(1e-12));
  CHECK(half.phi == doctest::Approx(0.0));

  GazeAngles g = vector_to_angles({0.43301270189221932, 0.5, -0.75});
  CHECK(g.theta == doctest::Approx(kPi / 6.0).epsilon(1e-12));
  CHECK(g.phi == doctest::Approx(kPi / 6.0).epsilon(1e-12));

  Rng rng(12);
  for (int i = 0; i < 2000; ++i) {
    GazeAngles a = random_gaze(rng, 89.0);
    GazeAngles b = vector_to_angles(angles_to_vector(a));
    CHECK(std::abs(a.theta - b.theta) < 1e-9);
    CHECK(std::abs(a.phi - b.phi) < 1e-9);
  }
}

TEST_CASE("vector_to_angles rejects bad input") {
  CHECK_THROWS_AS(vector_to_angles({0.0, 0.0, 1.0}), Error);
  CHECK_THROWS_AS(vector_to_angles({0.5, 0.5, -0.5}), Error);  // non-unit
  try {
    vector_to_angles({0.0, 0.0, 1.0});
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::domain);
  }
}

TEST_CASE("project_landmarks iris center follows the projection rule") {
  EyeballState eye{32.0, 48.0, 20.0, 0.35};
  LandmarkSet frontal = project_landmarks(eye, {0.0, 0.0});
  CHECK(frontal.points[kIrisCenterIndex].x == doctest::Approx(32.0));
  CHECK(frontal.points[kIrisCenterIndex].y == doctest::Approx(48.0));
  CHECK(frontal.points[kEyeballCenterIndex].x == doctest::Approx(32.0));
  CHECK(frontal.points[kEyeballCenterIndex].y == doctest::Approx(48.0));

  EyeballState origin{0.0, 0.0, 10.0, 0.35};
  LandmarkSet pitch = project_landmarks(origin, {kPi / 6.0, 0.0});
  CHECK(pitch.points[kIrisCenterIndex].x == doctest::Approx(0.0));
  CHECK(pitch.points[kIrisCenterIndex].y == doctest::Approx(5.0).epsilon(1e-12));

  // Frozen from extended-precision evaluation of the projection.
  EyeballState e2{10.0, 20.0, 12.0, 0.3};
  LandmarkSet lm = project_landmarks(e2, {0.2, -0.4});
  CHECK(lm.points[kIrisCenterIndex].x == doctest::Approx(5.4201291748594206).epsilon(1e-12));
  CHECK(lm.points[kIrisCenterIndex].y == doctest::Approx(22.384031969540735).epsilon(1e-12));
}

TEST_CASE("rim landmarks are equidistant from the iris center under frontal gaze") {
  EyeballState eye{40.0, 30.0, 18.0, 0.35};
  LandmarkSet lm = project_landmarks(eye, {0.0, 0.0});
  double expected = 18.0 * std::sin(0.35);
  for (int k = kRimFirstIndex; k < kLandmarkCount; ++k) {
    double dx = lm.points[k].x - lm.points[kIrisCenterIndex].x;
    double dy = lm.points[k].y - lm.points[kIrisCenterIndex].y;
    CHECK(std::abs(std::hypot(dx, dy) - expected) < 1e-6);
  }
  // Rim ordering: point 2 is the rightmost, going counter-clockwise in
  // x-right/y-down coordinates.
  CHECK(lm.points[kRimFirstIndex].x == doctest::Approx(40.0 + expected));
  CHECK(lm.points[kRimFirstIndex].y == doctest::Approx(30.0));
  CHECK(lm.points[kRimFirstIndex + 2].x == doctest::Approx(40.0));
  CHECK(lm.points[kRimFirstIndex + 2].y == doctest::Approx(30.0 + expected));
}

TEST_CASE("reconstruct_gaze basics") {
  ReconResult half = reconstruct_gaze({0.0, 5.0}, {0.0, 0.0}, 10.0);
  CHECK(half.angles.theta == doctest::Approx(kPi / 6.0).epsilon(1e-12));
  CHECK(half.angles.phi == doctest::Approx(0.0));
  CHECK_FALSE(half.degenerate());

  ReconResult centered = reconstruct_gaze({7.0, 3.0}, {7.0, 3.0}, 12.0);
  CHECK(centered.angles.theta == doctest::Approx(0.0));
  CHECK(centered.angles.phi == doctest::Approx(0.0));

  // Round trip against project_landmarks.
  ReconResult r = reconstruct_gaze({5.4201291748594206, 22.384031969540735}, {10.0, 20.0}, 12.0);
  CHECK(r.angles.theta == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(r.angles.phi == doctest::Approx(-0.4).epsilon(1e-12));

  CHECK_THROWS_AS(reconstruct_gaze({0.0, 0.0}, {0.0, 0.0}, 0.0), Error);
  CHECK_THROWS_AS(reconstruct_gaze({0.0, 0.0}, {0.0, 0.0}, -3.0), Error);
}

TEST_CASE("reconstruct_gaze flags clamped arguments") {
  ReconResult res = reconstruct_gaze({0.0, 15.0}, {0.0, 0.0}, 10.0);
  CHECK(res.theta_clamped);
  CHECK(res.angles.theta == doctest::Approx(std::asin(1.0 - 1e-7)));
  ReconResult ok = reconstruct_gaze({0.0, 5.0}, {0.0, 0.0}, 10.0);
  CHECK_FALSE(ok.degenerate());
}

TEST_CASE("round trip: reconstruct after project over random states") {
  Rng rng(13);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    GazeAngles g = random_gaze(rng, 80.0);
    EyeballState eye;
    eye.center_x = rng.uniform(-100.0, 100.0);
    eye.center_y = rng.uniform(-100.0, 100.0);
    eye.radius = rng.uniform(5.0, 50.0);
    eye.iris_angular_radius = rng.uniform(0.2, 0.5);
    LandmarkSet lm = project_landmarks(eye, g);
    ReconResult r = reconstruct_gaze(lm.points[kIrisCenterIndex],
                                     lm.points[kEyeballCenterIndex], eye.radius);
    worst = std::max(worst, std::abs(r.angles.theta - g.theta));
    worst = std::max(worst, std::abs(r.angles.phi - g.phi));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("reconstruct_gaze translation and scale invariance") {
  Rng rng(14);
  for (int i = 0; i < 500; ++i) {
    // Integer coordinates and offsets, so the coordinate differences are
    // exact and the invariant can be checked bitwise.
    double ix = static_cast<double>(rng.uniform_index(41)) - 20.0;
    double iy = static_cast<double>(rng.uniform_index(41)) - 20.0;
    double ex = static_cast<double>(rng.uniform_index(41)) - 20.0;
    double ey = static_cast<double>(rng.uniform_index(41)) - 20.0;
    double radius = rng.uniform(35.0, 60.0);
    ReconResult base = reconstruct_gaze({ix, iy}, {ex, ey}, radius);

    double tx = static_cast<double>(rng.uniform_index(101)) - 50.0;
    double ty = static_cast<double>(rng.uniform_index(101)) - 50.0;
    ReconResult shifted = reconstruct_gaze({ix + tx, iy + ty}, {ex + tx, ey + ty}, radius);
    CHECK(shifted.angles.theta == base.angles.theta);
    CHECK(shifted.angles.phi == base.angles.phi);

    double s = rng.uniform(0.1, 10.0);
    ReconResult scaled = reconstruct_gaze({ex + (ix - ex) * s, ey + (iy - ey) * s},
                                          {ex, ey}, radius * s);
    CHECK(std::abs(scaled.angles.theta - base.angles.theta) < 1e-12);
    CHECK(std::abs(scaled.angles.phi - base.angles.phi) < 1e-12);
  }
}

TEST_CASE("recon_jacobian frontal case and difference symmetry") {
  ReconJacobian jac = recon_jacobian({0.0, 0.0}, {0.0, 0.0}, 10.0);
  CHECK(jac[0][1] == doctest::Approx(0.1));   // dtheta/dy_ic = 1/R
  CHECK(jac[1][0] == doctest::Approx(0.1));   // dphi/dx_ic = 1/R at frontal
  CHECK(jac[0][0] == doctest::Approx(0.0));   // dtheta/dx_ic

  Rng rng(15);
  for (int i = 0; i < 200; ++i) {
    double ix = rng.uniform(-5.0, 5.0), iy = rng.uniform(-5.0, 5.0);
    double ex = rng.uniform(-5.0, 5.0), ey = rng.uniform(-5.0, 5.0);
    double radius = rng.uniform(12.0, 40.0);
    ReconJacobian j = recon_jacobian({ix, iy}, {ex, ey}, radius);
    CHECK(j[0][3] == doctest::Approx(-j[0][1]));
    CHECK(j[1][2] == doctest::Approx(-j[1][0]));
  }
}

TEST_CASE("recon_jacobian matches central finite differences") {
  Rng rng(16);
  for (int i = 0; i < 1000; ++i) {
    double ex = rng.uniform(-10.0, 10.0), ey = rng.uniform(-10.0, 10.0);
    double radius = rng.uniform(10.0, 40.0);
    GazeAngles g = random_gaze(rng, 70.0);
    LandmarkSet lm = project_landmarks({ex, ey, radius, 0.35}, g);
    double ix = lm.points[kIrisCenterIndex].x, iy = lm.points[kIrisCenterIndex].y;

    ReconJacobian jac = recon_jacobian({ix, iy}, {ex, ey}, radius);
    double inputs[5] = {ix, iy, ex, ey, radius};
    for (int col = 0; col < 5; ++col) {
      for (int row = 0; row < 2; ++row) {
        auto eval = [&](double v) {
          double in[5] = {inputs[0], inputs[1], inputs[2], inputs[3], inputs[4]};
          in[col] = v;
          ReconResult r = reconstruct_gaze({in[0], in[1]}, {in[2], in[3]}, in[4]);
          return row == 0 ? r.angles.theta : r.angles.phi;
        };
        double numeric = test::central_diff(eval, inputs[col]);
        CHECK(test::close_rel(jac[row][col], numeric, 1e-4, 1e-7));
      }
    }
  }
}

TEST_CASE("normalization_rotation sends the eye direction onto the axis") {
  Mat3 identity = normalization_rotation(0.0, 0.0, 3.7);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      CHECK(identity[r][c] == doctest::Approx(r == c ? 1.0 : 0.0));
    }
  }

  // (1,0,1)/sqrt(2): rotation by -45 degrees about y, checked against the
  // explicit rotation matrix.
  Mat3 r45 = normalization_rotation(1.0, 0.0, 1.0);
  double c = std::cos(-kPi / 4.0), s = std::sin(-kPi / 4.0);
  Mat3 expected{{{c, 0.0, s}, {0.0, 1.0, 0.0}, {-s, 0.0, c}}};
  for (int rr = 0; rr < 3; ++rr) {
    for (int cc = 0; cc < 3; ++cc) {
      CHECK(r45[rr][cc] == doctest::Approx(expected[rr][cc]).epsilon(1e-12));
    }
  }

  Rng rng(17);
  for (int i = 0; i < 500; ++i) {
    double x = rng.uniform(-2.0, 2.0), y = rng.uniform(-2.0, 2.0), z = rng.uniform(-2.0, 2.0);
    if (std::abs(x) + std::abs(y) + std::abs(z) < 1e-6) continue;
    Mat3 rot = normalization_rotation(x, y, z);
    // Orthonormality: R^T R = I.
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        double dot = 0.0;
        for (int k = 0; k < 3; ++k) dot += rot[k][a] * rot[k][b];
        CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) < 1e-9);
      }
    }
    double det = rot[0][0] * (rot[1][1] * rot[2][2] - rot[1][2] * rot[2][1]) -
                 rot[0][1] * (rot[1][0] * rot[2][2] - rot[1][2] * rot[2][0]) +
                 rot[0][2] * (rot[1][0] * rot[2][1] - rot[1][1] * rot[2][0]);
    CHECK(det == doctest::Approx(1.0).epsilon(1e-9));
    double n = std::sqrt(x * x + y * y + z * z);
    double mapped_x = rot[0][0] * x / n + rot[0][1] * y / n + rot[0][2] * z / n;
    double mapped_y = rot[1][0] * x / n + rot[1][1] * y / n + rot[1][2] * z / n;
    double mapped_z = rot[2][0] * x / n + rot[2][1] * y / n + rot[2][2] * z / n;
    CHECK(std::abs(mapped_x) < 1e-9);
    CHECK(std::abs(mapped_y) < 1e-9);
    CHECK(mapped_z == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK_THROWS_AS(normalization_rotation(0.0, 0.0, 0.0), Error);
}

TEST_CASE("angular_error basics and metric properties") {
  CHECK(angular_error_deg({0.3, -0.2}, {0.3, -0.2}) == doctest::Approx(0.0));
  CHECK(angular_error_deg({0.0, 0.0}, {kPi / 2.0 - 1e-7, 0.0}) ==
        doctest::Approx(90.0).epsilon(1e-4));

  // Frozen from extended-precision dot-product evaluation.
  CHECK(angular_error_deg({0.1, 0.2}, {0.15, 0.25}) ==
        doctest::Approx(4.0354274049962279).epsilon(1e-10));

  Rng rng(18);
  for (int i = 0; i < 500; ++i) {
    GazeAngles a = random_gaze(rng, 75.0);
    GazeAngles b = random_gaze(rng, 75.0);
    GazeAngles c = random_gaze(rng, 75.0);
    double ab = angular_error_deg(a, b);
    CHECK(ab == doctest::Approx(angular_error_deg(b, a)).epsilon(1e-12));
    CHECK(ab >= 0.0);
    CHECK(ab <= angular_error_deg(a, c) + angular_error_deg(c, b) + 1e-9);
  }
}
