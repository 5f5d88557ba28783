#pragma once

#include "hoi/common.hpp"

// Axis-angle helpers shared by the camera and hand kinematics.
namespace hoi {

Mat3 skew(const Vec3& v);

/// Exponential map (Rodrigues).
Mat3 rotation_from_axis_angle(const Vec3& r);

/// Logarithm map; the result has norm in [0, pi].
Vec3 axis_angle_from_rotation(const Mat3& R);

/// Right Jacobian of SO(3) at r.
Mat3 so3_right_jacobian(const Vec3& r);

/// d(R(r) z)/dr for a fixed point z: -R [z]x Jr(r).
Mat3 rotate_point_jacobian(const Vec3& r, const Vec3& z);

/// Equivalent axis-angle with magnitude strictly below pi (up to the pi boundary itself).
Vec3 wrap_axis_angle(const Vec3& r);

}  // namespace hoi
