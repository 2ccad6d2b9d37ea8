#pragma once

#include <cmath>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ctrkit/angles.hpp"
#include "ctrkit/error.hpp"

namespace ctrkit {

// One pre-curved tube. Lengths in mm, curvature in 1/mm, modulus in GPa.
// Index 1 is the outermost tube; higher ids are nested inside lower ones.
class TubeSpec {
 public:
  TubeSpec(int id, double youngs_modulus_gpa, double outer_diameter, double inner_diameter,
           double precurvature, double straight_length, double curved_length)
      : id_(id),
        youngs_modulus_(youngs_modulus_gpa),
        outer_diameter_(outer_diameter),
        inner_diameter_(inner_diameter),
        second_moment_(annulus_second_moment(outer_diameter, inner_diameter)),
        precurvature_(precurvature),
        straight_length_(straight_length),
        curved_length_(curved_length) {
    validate();
  }

  static double annulus_second_moment(double od, double id) {
    return kPi / 64.0 * (std::pow(od, 4) - std::pow(id, 4));
  }

  int id() const { return id_; }
  double youngs_modulus() const { return youngs_modulus_; }
  double outer_diameter() const { return outer_diameter_; }
  double inner_diameter() const { return inner_diameter_; }
  double second_moment() const { return second_moment_; }
  double precurvature() const { return precurvature_; }
  double straight_length() const { return straight_length_; }
  double curved_length() const { return curved_length_; }
  double total_length() const { return straight_length_ + curved_length_; }

  // Bending stiffness E*I in N*mm^2 (GPa -> N/mm^2 is a factor 1e3).
  double stiffness() const { return youngs_modulus_ * 1e3 * second_moment_; }

 private:
  void validate() const {
    auto fail = [this](const std::string& what) {
      throw Error(ErrorCode::invalid_input, "tube " + std::to_string(id_) + ": " + what);
    };
    if (id_ < 1) fail("id must be >= 1");
    if (!(youngs_modulus_ > 0.0)) fail("youngs modulus must be > 0");
    if (!(inner_diameter_ > 0.0)) fail("inner diameter must be > 0");
    if (!(outer_diameter_ > inner_diameter_)) fail("outer diameter must exceed inner diameter");
    if (!(precurvature_ >= 0.0)) fail("precurvature must be >= 0");
    if (!(straight_length_ > 0.0)) fail("straight length must be > 0");
    if (!(curved_length_ >= 0.0)) fail("curved length must be >= 0");
    if (!(precurvature_ * curved_length_ < 2.0 * kPi)) fail("curved section must be less than a full circle");
  }

  int id_;
  double youngs_modulus_;
  double outer_diameter_;
  double inner_diameter_;
  double second_moment_;
  double precurvature_;
  double straight_length_;
  double curved_length_;
};

// Joint space: deployed length beyond the front plate (mm) and axial angle (deg) per tube.
struct JointConfig {
  std::vector<double> translations;
  std::vector<double> rotations;

  std::size_t size() const { return translations.size(); }
  bool operator==(const JointConfig&) const = default;
};

// Checks ids are 1..n in order and every nested tube clears its outer neighbour.
inline void validate_tubes(std::span<const TubeSpec> tubes) {
  if (tubes.empty()) throw Error(ErrorCode::invalid_input, "robot has no tubes");
  for (std::size_t k = 0; k < tubes.size(); ++k) {
    if (tubes[k].id() != static_cast<int>(k) + 1) {
      throw Error(ErrorCode::invalid_input, "tube ids must be 1..n from outermost to innermost");
    }
    if (k > 0 && tubes[k - 1].inner_diameter() < tubes[k].outer_diameter()) {
      throw Error(ErrorCode::invalid_configuration,
                  "clearance: tube " + std::to_string(k) + " inner diameter is smaller than tube " +
                      std::to_string(k + 1) + " outer diameter");
    }
  }
}

// Checks JointConfig invariants against the tube set; throws invalid-configuration
// naming the violated invariant.
inline void validate_joints(std::span<const TubeSpec> tubes, const JointConfig& joints) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::invalid_configuration, what); };
  if (joints.translations.size() != tubes.size() || joints.rotations.size() != tubes.size()) {
    std::ostringstream os;
    os << "joint count mismatch: expected " << tubes.size() << " translations and rotations, got "
       << joints.translations.size() << " and " << joints.rotations.size();
    fail(os.str());
  }
  for (std::size_t k = 0; k < tubes.size(); ++k) {
    const double rho = joints.translations[k];
    const double theta = joints.rotations[k];
    const auto id = std::to_string(k + 1);
    if (!std::isfinite(rho) || !std::isfinite(theta)) fail("tube " + id + ": non-finite joint value");
    if (rho < 0.0) fail("tube " + id + ": translation must be >= 0");
    if (rho > tubes[k].total_length()) fail("tube " + id + ": translation exceeds tube length");
    if (k > 0 && joints.translations[k - 1] > rho) {
      fail("telescoping: tube " + id + " tip is behind tube " + std::to_string(k) + " tip");
    }
  }
}

}  // namespace ctrkit
