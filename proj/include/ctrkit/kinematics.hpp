#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ctrkit/angles.hpp"
#include "ctrkit/error.hpp"
#include "ctrkit/pose.hpp"
#include "ctrkit/tube.hpp"

// Piecewise-constant-curvature kinematics of a concentric tube robot.
//
// The deployed backbone is split into links, maximal arc-length intervals over
// which the set of overlapping tube sections does not change. Each link bends
// as a circular arc whose curvature is the stiffness-weighted blend of the
// member tubes' precurvatures, in the plane where their bending moments
// balance. Link frames are chained base to tip.
//
// All functions are pure. Angles cross the interface in degrees.
namespace ctrkit {

// Coincident transition points closer than this (mm) collapse into one boundary.
inline constexpr double kMergeTolerance = 1e-6;
// Below this value of kappa * length a link uses the straight-line limit branch.
inline constexpr double kStraightThreshold = 1e-7;

// Bending contribution of one tube section to a link.
struct BendingTerm {
  double stiffness;     // E*I
  double precurvature;  // 1/mm, zero for a straight section
  double angle_deg = 0.0;
};

struct EquilibriumPlane {
  double chi;
  double gamma;
  double phi;  // degrees, (-180, 180]
  double resultant_curvature;
};

enum class Section { straight, curved };

struct LinkMember {
  int tube;
  Section section;
  bool operator==(const LinkMember&) const = default;
};

struct Link {
  double start = 0.0;       // arc length of the link base, mm
  double arc_length = 0.0;  // mm
  double curvature = 0.0;   // 1/mm
  double plane_angle = 0.0;           // degrees, relative to the previous link
  double absolute_plane_angle = 0.0;  // degrees, in the robot base frame
  std::vector<LinkMember> members;    // outermost first
};

struct KinematicsResult {
  Pose tip;
  std::vector<Link> links;
  std::vector<Pose> link_poses;  // base frame -> tip of link j
};

struct BackbonePoint {
  double s;
  Eigen::Vector3d point;
};

namespace detail {

inline void check_terms(std::span<const BendingTerm> terms) {
  if (terms.empty()) throw Error(ErrorCode::invalid_input, "no tubes in link");
  for (const auto& t : terms) {
    if (!(t.stiffness > 0.0) || !std::isfinite(t.stiffness)) {
      throw Error(ErrorCode::invalid_input, "tube stiffness must be positive");
    }
    if (!(t.precurvature >= 0.0) || !std::isfinite(t.precurvature)) {
      throw Error(ErrorCode::invalid_input, "precurvature must be non-negative");
    }
    if (!std::isfinite(t.angle_deg)) throw Error(ErrorCode::invalid_input, "non-finite tube angle");
  }
}

// Pose along a constant-curvature arc; arc_length may be zero.
inline Pose arc_pose(double arc_length, double curvature, double plane_angle_deg) {
  const double bend = curvature * arc_length;
  Eigen::Matrix3d bend_rot;
  const double cb = std::cos(bend);
  const double sb = std::sin(bend);
  bend_rot << cb, 0.0, sb,
              0.0, 1.0, 0.0,
              -sb, 0.0, cb;

  Eigen::Vector3d local;
  if (bend < kStraightThreshold) {
    // Series of (1 - cos x)/kappa and sin(x)/kappa about x = 0.
    local << arc_length * (0.5 * bend) * (1.0 - bend * bend / 12.0), 0.0,
        arc_length * (1.0 - bend * bend / 6.0);
  } else {
    const double half = std::sin(0.5 * bend);
    local << 2.0 * half * half / curvature, 0.0, sb / curvature;
  }

  const Eigen::Matrix3d rz = rot_z_deg(plane_angle_deg);
  return {rz * bend_rot, rz * local};
}

}  // namespace detail

// Stiffness-weighted mean precurvature of tubes bending in a common plane.
inline double in_plane_curvature(std::span<const BendingTerm> terms) {
  detail::check_terms(terms);
  double num = 0.0;
  double den = 0.0;
  double lo = terms.front().precurvature;
  double hi = lo;
  for (const auto& t : terms) {
    num += t.stiffness * t.precurvature;
    den += t.stiffness;
    lo = std::min(lo, t.precurvature);
    hi = std::max(hi, t.precurvature);
  }
  // A weighted mean lies in [lo, hi]; the clamp only strips rounding.
  return std::clamp(num / den, lo, hi);
}

// Equilibrium bending plane of tubes whose planes are rotated by angle_deg.
// phi = atan2(gamma, chi), so a single tube at theta yields phi = theta.
// Throws DegeneratePlaneError when the curvature contributions cancel.
inline EquilibriumPlane equilibrium_plane(std::span<const BendingTerm> terms) {
  detail::check_terms(terms);
  double sum_stiffness = 0.0;
  double chi = 0.0;
  double gamma = 0.0;
  double magnitude_bound = 0.0;
  for (const auto& t : terms) {
    const auto [s, c] = sincos_deg(t.angle_deg);
    const double moment = t.stiffness * t.precurvature;
    sum_stiffness += t.stiffness;
    chi += moment * c;
    gamma += moment * s;
    magnitude_bound += moment;
  }
  chi /= sum_stiffness;
  gamma /= sum_stiffness;
  magnitude_bound /= sum_stiffness;

  if (magnitude_bound == 0.0) throw DegeneratePlaneError(0.0);

  // Coplanar case: every curved contribution shares one plane.
  bool coplanar = true;
  double common_angle = 0.0;
  bool have_angle = false;
  for (const auto& t : terms) {
    if (t.precurvature == 0.0) continue;
    const double a = normalize_deg(t.angle_deg);
    if (!have_angle) {
      common_angle = a;
      have_angle = true;
    } else if (a != common_angle) {
      coplanar = false;
      break;
    }
  }
  if (coplanar) return {chi, gamma, common_angle, in_plane_curvature(terms)};

  const double resultant = std::hypot(chi, gamma);
  if (resultant <= 1e-12 * magnitude_bound) throw DegeneratePlaneError(0.0);
  return {chi, gamma, normalize_deg(rad_to_deg(std::atan2(gamma, chi))), resultant};
}

// Transform from the base to the tip of one constant-curvature link.
inline Pose link_pose(double arc_length, double curvature, double plane_angle_deg) {
  if (!(arc_length > 0.0) || !std::isfinite(arc_length)) {
    throw Error(ErrorCode::invalid_input, "link arc length must be > 0");
  }
  if (!(curvature >= 0.0) || !std::isfinite(curvature)) {
    throw Error(ErrorCode::invalid_input, "link curvature must be >= 0");
  }
  return detail::arc_pose(arc_length, curvature, plane_angle_deg);
}

inline Pose link_pose(const Link& link) {
  return link_pose(link.arc_length, link.curvature, link.plane_angle);
}

// Splits the deployed backbone into links. Only start, arc_length and members
// are filled; see solve_link_mechanics for curvature and plane angles.
inline std::vector<Link> partition_links(std::span<const TubeSpec> tubes, const JointConfig& joints) {
  validate_tubes(tubes);
  validate_joints(tubes, joints);

  const double total = *std::max_element(joints.translations.begin(), joints.translations.end());
  if (total <= 0.0) return {};

  std::vector<double> points{0.0, total};
  for (std::size_t k = 0; k < tubes.size(); ++k) {
    const double tip = joints.translations[k];
    if (tip <= 0.0) continue;
    points.push_back(std::clamp(tip - tubes[k].curved_length(), 0.0, total));
    points.push_back(tip);
  }
  std::sort(points.begin(), points.end());

  std::vector<double> bounds{0.0};
  for (double p : points) {
    if (p > bounds.back() + kMergeTolerance) bounds.push_back(p);
  }
  bounds.back() = total;
  if (bounds.size() < 2) return {};

  std::vector<Link> links;
  for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
    const double mid = 0.5 * (bounds[b] + bounds[b + 1]);
    std::vector<LinkMember> members;
    for (std::size_t k = 0; k < tubes.size(); ++k) {
      const double tip = joints.translations[k];
      if (tip <= mid) continue;
      const bool curved = mid >= tip - tubes[k].curved_length();
      members.push_back({tubes[k].id(), curved ? Section::curved : Section::straight});
    }
    if (!links.empty() && links.back().members == members) {
      links.back().arc_length = bounds[b + 1] - links.back().start;
      continue;
    }
    Link link;
    link.start = bounds[b];
    link.arc_length = bounds[b + 1] - bounds[b];
    link.members = std::move(members);
    links.push_back(std::move(link));
  }
  return links;
}

// Fills curvature and plane angles of each link from its member tube sections.
// A link whose contributions cancel is straight and inherits the previous
// link's absolute plane angle (0 for the first link).
inline std::vector<Link> solve_link_mechanics(std::vector<Link> links, std::span<const TubeSpec> tubes,
                                              const JointConfig& joints) {
  double previous_angle = 0.0;
  std::vector<BendingTerm> terms;
  for (auto& link : links) {
    terms.clear();
    for (const auto& m : link.members) {
      if (m.tube < 1 || static_cast<std::size_t>(m.tube) > tubes.size() ||
          static_cast<std::size_t>(m.tube) > joints.rotations.size()) {
        throw Error(ErrorCode::invalid_input, "link references unknown tube " + std::to_string(m.tube));
      }
      const auto& tube = tubes[static_cast<std::size_t>(m.tube) - 1];
      terms.push_back({tube.stiffness(), m.section == Section::curved ? tube.precurvature() : 0.0,
                       joints.rotations[static_cast<std::size_t>(m.tube) - 1]});
    }
    try {
      const auto plane = equilibrium_plane(terms);
      link.curvature = plane.resultant_curvature;
      link.absolute_plane_angle = plane.phi;
    } catch (const DegeneratePlaneError&) {
      link.curvature = 0.0;
      link.absolute_plane_angle = previous_angle;
    }
    link.plane_angle = normalize_deg(link.absolute_plane_angle - previous_angle);
    previous_angle = link.absolute_plane_angle;
  }
  return links;
}

inline KinematicsResult forward_kinematics(std::span<const TubeSpec> tubes, const JointConfig& joints) {
  KinematicsResult result;
  result.links = solve_link_mechanics(partition_links(tubes, joints), tubes, joints);
  result.link_poses.reserve(result.links.size());
  for (const auto& link : result.links) {
    result.tip = result.tip * link_pose(link);
    result.link_poses.push_back(result.tip);
  }
  return result;
}

// Centerline samples every ds mm from the front plate to the tip; the tip is
// always the last sample.
inline std::vector<BackbonePoint> sample_backbone(const KinematicsResult& fk, double ds) {
  if (!(ds > 0.0) || !std::isfinite(ds)) throw Error(ErrorCode::invalid_input, "ds must be > 0");
  std::vector<BackbonePoint> out;
  const double total = fk.links.empty() ? 0.0 : fk.links.back().start + fk.links.back().arc_length;
  out.push_back({0.0, Eigen::Vector3d::Zero()});
  if (total <= 0.0) return out;

  std::size_t j = 0;
  Pose base;
  for (std::size_t k = 1;; ++k) {
    const double s = static_cast<double>(k) * ds;
    if (s >= total - 1e-9) break;
    while (j + 1 < fk.links.size() && s >= fk.links[j].start + fk.links[j].arc_length) {
      base = fk.link_poses[j];
      ++j;
    }
    const auto& link = fk.links[j];
    const Pose local = detail::arc_pose(s - link.start, link.curvature, link.plane_angle);
    out.push_back({s, (base * local).translation});
  }
  out.push_back({total, fk.tip.translation});
  return out;
}

inline std::vector<BackbonePoint> sample_backbone(std::span<const TubeSpec> tubes, const JointConfig& joints,
                                                  double ds) {
  if (!(ds > 0.0) || !std::isfinite(ds)) throw Error(ErrorCode::invalid_input, "ds must be > 0");
  return sample_backbone(forward_kinematics(tubes, joints), ds);
}

}  // namespace ctrkit
