#include "hoi/rotation.hpp"

#include <cmath>

namespace hoi {

Mat3 skew(const Vec3& v)
{
    Mat3 m;
    m << 0.0, -v.z(), v.y(),
         v.z(), 0.0, -v.x(),
         -v.y(), v.x(), 0.0;
    return m;
}

Mat3 rotation_from_axis_angle(const Vec3& r)
{
    const double theta2 = r.squaredNorm();
    const Mat3 K = skew(r);
    double a, b;
    if (theta2 < 1e-12) {
        a = 1.0 - theta2 / 6.0;
        b = 0.5 - theta2 / 24.0;
    } else {
        const double theta = std::sqrt(theta2);
        a = std::sin(theta) / theta;
        b = (1.0 - std::cos(theta)) / theta2;
    }
    return Mat3::Identity() + a * K + b * K * K;
}

Vec3 axis_angle_from_rotation(const Mat3& R)
{
    Eigen::AngleAxisd aa(R);
    return aa.axis() * aa.angle();
}

Mat3 so3_right_jacobian(const Vec3& r)
{
    const double theta2 = r.squaredNorm();
    const Mat3 K = skew(r);
    double a, b;
    if (theta2 < 1e-10) {
        a = 0.5 - theta2 / 24.0;
        b = 1.0 / 6.0 - theta2 / 120.0;
    } else {
        const double theta = std::sqrt(theta2);
        a = (1.0 - std::cos(theta)) / theta2;
        b = (theta - std::sin(theta)) / (theta2 * theta);
    }
    return Mat3::Identity() - a * K + b * K * K;
}

Mat3 rotate_point_jacobian(const Vec3& r, const Vec3& z)
{
    return -rotation_from_axis_angle(r) * skew(z) * so3_right_jacobian(r);
}

Vec3 wrap_axis_angle(const Vec3& r)
{
    const double theta = r.norm();
    if (theta < kPi) return r;
    // r and r * (1 - 2pi/theta) encode the same rotation.
    double wrapped = std::fmod(theta, 2.0 * kPi);
    if (wrapped > kPi) wrapped -= 2.0 * kPi;
    return r * (wrapped / theta);
}

}  // namespace hoi
