#pragma once

#include <cmath>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "ctrkit/angles.hpp"
#include "ctrkit/error.hpp"
#include "ctrkit/kinematics.hpp"
#include "ctrkit/pose.hpp"
#include "ctrkit/tube.hpp"

namespace ctrkit {

struct PointPair {
  Eigen::Vector3d tracker;  // point in the tracker frame
  Eigen::Vector3d base;     // same point in the robot base frame
};

struct FrameRegistration {
  Pose tracker_to_base;
  double fit_rmse = 0.0;
  std::vector<PointPair> pairs;
};

namespace detail {

inline bool collinear(const std::vector<Eigen::Vector3d>& pts) {
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) scatter += (p - centroid) * (p - centroid).transpose();
  const Eigen::Vector3d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(scatter).eigenvalues();
  // Sorted ascending: a line has a single non-zero principal variance.
  return !(ev(2) > 0.0) || ev(1) <= 1e-12 * ev(2);
}

}  // namespace detail

// Least-squares rigid transform (no scale) taking tracker points onto base points.
inline FrameRegistration register_frames(std::span<const PointPair> pairs) {
  if (pairs.size() < 3) throw Error(ErrorCode::degenerate_geometry, "registration needs at least 3 point pairs");
  std::vector<Eigen::Vector3d> q, p;
  for (const auto& pp : pairs) {
    if (!pp.tracker.allFinite() || !pp.base.allFinite()) {
      throw Error(ErrorCode::invalid_input, "non-finite registration point");
    }
    q.push_back(pp.tracker);
    p.push_back(pp.base);
  }
  if (detail::collinear(q) || detail::collinear(p)) {
    throw Error(ErrorCode::degenerate_geometry, "registration points are collinear");
  }

  Eigen::Vector3d qc = Eigen::Vector3d::Zero(), pc = Eigen::Vector3d::Zero();
  for (std::size_t k = 0; k < q.size(); ++k) {
    qc += q[k];
    pc += p[k];
  }
  qc /= static_cast<double>(q.size());
  pc /= static_cast<double>(p.size());

  Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();
  for (std::size_t k = 0; k < q.size(); ++k) cross += (q[k] - qc) * (p[k] - pc).transpose();

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d correction = Eigen::Matrix3d::Identity();
  correction(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0 ? -1.0 : 1.0;

  FrameRegistration reg;
  reg.tracker_to_base.rotation = svd.matrixV() * correction * svd.matrixU().transpose();
  reg.tracker_to_base.translation = pc - reg.tracker_to_base.rotation * qc;
  double sq = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) sq += (reg.tracker_to_base.apply(q[k]) - p[k]).squaredNorm();
  reg.fit_rmse = std::sqrt(sq / static_cast<double>(q.size()));
  reg.pairs.assign(pairs.begin(), pairs.end());
  return reg;
}

struct ExperimentRecord {
  std::string kind;
  JointConfig before;
  JointConfig after;
  std::vector<Eigen::Vector3d> predicted;  // base frame, mm
  std::vector<Eigen::Vector3d> measured;   // base frame, mm; empty when nothing was measured
  std::vector<Eigen::Vector3d> errors;     // measured - predicted
  std::vector<double> error_norms;

  // In-plane experiment: bending plane angle and (r, z) of each predicted tip.
  std::optional<double> bending_plane_angle;
  std::vector<Eigen::Vector2d> in_plane_tips;
  double coplanarity_residual = 0.0;

  // Out-of-plane experiment: absolute plane angle per link before and after.
  std::vector<double> link_angles_before;
  std::vector<double> link_angles_after;
  std::optional<double> distal_angle_change;
};

// Compares measured base-frame tips with the record's predictions.
inline void attach_measurements(ExperimentRecord& record, std::vector<Eigen::Vector3d> measured_base) {
  if (measured_base.size() != record.predicted.size()) {
    throw Error(ErrorCode::invalid_input, "expected one measured point per predicted tip");
  }
  record.measured = std::move(measured_base);
  record.errors.clear();
  record.error_norms.clear();
  for (std::size_t k = 0; k < record.measured.size(); ++k) {
    record.errors.push_back(record.measured[k] - record.predicted[k]);
    record.error_norms.push_back(record.errors.back().norm());
  }
}

// Largest distance of backbone points from the plane containing the base z
// axis at `angle_deg`.
inline double plane_residual(const std::vector<BackbonePoint>& backbone, double angle_deg) {
  const auto [s, c] = sincos_deg(angle_deg);
  const Eigen::Vector3d normal(-s, c, 0.0);
  double worst = 0.0;
  for (const auto& b : backbone) worst = std::max(worst, std::abs(normal.dot(b.point)));
  return worst;
}

// Translates the innermost tube by delta_rho with all tubes sharing one
// bending plane and predicts the tip before and after.
inline ExperimentRecord in_plane_experiment(std::span<const TubeSpec> tubes, const JointConfig& joints,
                                            double delta_rho, double ds = 1.0) {
  validate_joints(tubes, joints);
  const double angle = normalize_deg(joints.rotations.front());
  for (double t : joints.rotations) {
    if (normalize_deg(t) != angle) {
      throw Error(ErrorCode::invalid_input, "in-plane experiment requires all tube angles to be equal");
    }
  }
  ExperimentRecord rec;
  rec.kind = "in-plane";
  rec.before = joints;
  rec.after = joints;
  rec.after.translations.back() += delta_rho;
  rec.bending_plane_angle = angle;

  const auto [s, c] = sincos_deg(angle);
  for (const auto* cfg : {&rec.before, &rec.after}) {
    const auto fk = forward_kinematics(tubes, *cfg);
    const Eigen::Vector3d tip = fk.tip.translation;
    rec.predicted.push_back(tip);
    rec.in_plane_tips.emplace_back(c * tip.x() + s * tip.y(), tip.z());
    rec.coplanarity_residual = std::max(rec.coplanarity_residual, plane_residual(sample_backbone(fk, ds), angle));
  }
  return rec;
}

// Rotates tube `tube` (1 = outermost) by delta_theta and records the tip and
// every link's absolute plane angle before and after.
inline ExperimentRecord out_of_plane_experiment(std::span<const TubeSpec> tubes, const JointConfig& joints,
                                                double delta_theta, int tube = 1) {
  validate_joints(tubes, joints);
  if (tube < 1 || static_cast<std::size_t>(tube) > tubes.size()) {
    throw Error(ErrorCode::invalid_input, "no tube " + std::to_string(tube));
  }
  ExperimentRecord rec;
  rec.kind = "out-of-plane";
  rec.before = joints;
  rec.after = joints;
  auto& rotated = rec.after.rotations[static_cast<std::size_t>(tube) - 1];
  rotated = normalize_deg(rotated + delta_theta);

  for (const auto* cfg : {&rec.before, &rec.after}) {
    const auto fk = forward_kinematics(tubes, *cfg);
    rec.predicted.push_back(fk.tip.translation);
    auto& angles = cfg == &rec.before ? rec.link_angles_before : rec.link_angles_after;
    for (const auto& l : fk.links) angles.push_back(l.absolute_plane_angle);
  }
  if (!rec.link_angles_before.empty() && rec.link_angles_before.size() == rec.link_angles_after.size()) {
    rec.distal_angle_change = normalize_deg(rec.link_angles_after.back() - rec.link_angles_before.back());
  }
  return rec;
}

// Maps a tracked tip into the base frame and compares it with the model.
inline ExperimentRecord tip_tracking_comparison(std::span<const TubeSpec> tubes, const JointConfig& joints,
                                                const std::optional<FrameRegistration>& registration,
                                                const Eigen::Vector3d& measured_tip_tracker) {
  if (!registration) throw Error(ErrorCode::missing_registration, "tip tracking needs a frame registration");
  ExperimentRecord rec;
  rec.kind = "tracking";
  rec.before = joints;
  rec.after = joints;
  rec.predicted.push_back(forward_kinematics(tubes, joints).tip.translation);
  attach_measurements(rec, {registration->tracker_to_base.apply(measured_tip_tracker)});
  return rec;
}

struct TrackingSummary {
  FrameRegistration registration;
  std::vector<ExperimentRecord> records;
  double mean_error = 0.0;
  double max_error = 0.0;
};

// Simulated tracker session: fiducials and tips are observed in the tracker
// frame with isotropic gaussian noise; the registration is estimated from
// the noisy fiducials and each tip is compared with the model.
inline TrackingSummary simulate_tracking(std::span<const TubeSpec> tubes, std::span<const JointConfig> poses,
                                         const Pose& true_tracker_to_base, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma > 0.0 ? sigma : 1.0);
  auto jitter = [&] {
    if (!(sigma > 0.0)) return Eigen::Vector3d::Zero().eval();
    return Eigen::Vector3d(noise(rng), noise(rng), noise(rng));
  };
  const Pose base_to_tracker = true_tracker_to_base.inverse();

  // Fiducial divots on the structural frame around the front plate.
  const std::vector<Eigen::Vector3d> fiducials{{40, 0, 0}, {0, 40, 0}, {-40, 0, 0}, {0, -40, 0},
                                               {30, 30, -20}, {-30, 30, -20}, {30, -30, -20}, {-30, -30, -20}};
  std::vector<PointPair> pairs;
  for (const auto& f : fiducials) pairs.push_back({base_to_tracker.apply(f) + jitter(), f});

  TrackingSummary out;
  out.registration = register_frames(pairs);
  double total = 0.0;
  for (const auto& cfg : poses) {
    const Eigen::Vector3d tip = forward_kinematics(tubes, cfg).tip.translation;
    const Eigen::Vector3d reading = base_to_tracker.apply(tip) + jitter();
    out.records.push_back(tip_tracking_comparison(tubes, cfg, out.registration, reading));
    const double e = out.records.back().error_norms.front();
    total += e;
    out.max_error = std::max(out.max_error, e);
  }
  if (!poses.empty()) out.mean_error = total / static_cast<double>(poses.size());
  return out;
}

struct LabeledPoint {
  std::string label;
  Eigen::Vector3d point;
};

// Reads "frame_label,x,y,z" rows (header required).
inline std::vector<LabeledPoint> read_points_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  auto split = [&](const std::string& row) {
    std::vector<std::string> cells;
    std::stringstream ss(row);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    return cells;
  };
  bool have_header = false;
  std::vector<LabeledPoint> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (!have_header) {
      if (cells != std::vector<std::string>{"frame_label", "x", "y", "z"}) {
        throw ParseError("CSV header must be frame_label,x,y,z", 1);
      }
      have_header = true;
      continue;
    }
    if (cells.size() != 4) throw ParseError("line " + std::to_string(line_no) + ": expected 4 columns", 0);
    LabeledPoint lp{cells[0], {}};
    for (int k = 0; k < 3; ++k) {
      try {
        std::size_t used = 0;
        lp.point[k] = std::stod(cells[static_cast<std::size_t>(k) + 1], &used);
        if (used != cells[static_cast<std::size_t>(k) + 1].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": malformed number '" +
                             cells[static_cast<std::size_t>(k) + 1] + "'", static_cast<std::size_t>(k) + 2);
      }
    }
    out.push_back(std::move(lp));
  }
  if (!have_header) throw ParseError("CSV header must be frame_label,x,y,z", 1);
  return out;
}

// One row per predicted tip: index, predicted xyz, measured xyz, error norm.
inline void write_record_csv(std::ostream& out, const ExperimentRecord& rec) {
  out << "kind,index,predicted_x,predicted_y,predicted_z,measured_x,measured_y,measured_z,error_norm\n";
  out << std::setprecision(17);
  for (std::size_t k = 0; k < rec.predicted.size(); ++k) {
    const auto& p = rec.predicted[k];
    out << rec.kind << ',' << k << ',' << p.x() << ',' << p.y() << ',' << p.z();
    if (k < rec.measured.size()) {
      const auto& m = rec.measured[k];
      out << ',' << m.x() << ',' << m.y() << ',' << m.z() << ',' << rec.error_norms[k];
    } else {
      out << ",,,,";
    }
    out << '\n';
  }
}

}  // namespace ctrkit
