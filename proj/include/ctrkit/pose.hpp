#pragma once

#include <Eigen/Dense>

#include "ctrkit/angles.hpp"

namespace ctrkit {

// Rigid transform between two frames: x_parent = rotation * x_child + translation.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static Pose identity() { return {}; }

  Pose operator*(const Pose& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
  }

  Eigen::Vector3d apply(const Eigen::Vector3d& point) const { return rotation * point + translation; }

  Pose inverse() const {
    const Eigen::Matrix3d rt = rotation.transpose();
    return {rt, -rt * translation};
  }

  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
    t.topLeftCorner<3, 3>() = rotation;
    t.topRightCorner<3, 1>() = translation;
    return t;
  }

  // Max deviation of R^T R from identity and of det R from +1.
  double orthonormality_error() const {
    const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    return std::max(ortho, std::abs(rotation.determinant() - 1.0));
  }
};

inline Eigen::Matrix3d rot_z_deg(double deg) {
  const auto [s, c] = sincos_deg(deg);
  Eigen::Matrix3d r;
  r << c, -s, 0.0,
       s, c, 0.0,
       0.0, 0.0, 1.0;
  return r;
}

}  // namespace ctrkit
