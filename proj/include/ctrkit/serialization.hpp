#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctrkit/actuation.hpp"
#include "ctrkit/kinematics.hpp"
#include "ctrkit/metrology.hpp"
#include "ctrkit/robot_file.hpp"

// JSON encoding shared by the service and the CLI. Field names here are the
// wire schema (see docs/api.md).
namespace ctrkit::wire {

using nlohmann::json;

// Thrown when a request body has the wrong shape (missing field, wrong type).
// Semantic problems with well-formed bodies raise ctrkit::Error instead.
class BodyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline const json& field(const json& j, const char* name) {
  if (!j.is_object()) throw BodyError("expected an object");
  const auto it = j.find(name);
  if (it == j.end()) throw BodyError(std::string("missing field '") + name + "'");
  return *it;
}

inline double number(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_number()) throw BodyError(std::string("field '") + name + "' must be a number");
  return v.get<double>();
}

inline double number_or(const json& j, const char* name, double fallback) {
  if (!j.is_object()) throw BodyError("expected an object");
  return j.contains(name) ? number(j, name) : fallback;
}

inline std::vector<double> numbers(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_array()) throw BodyError(std::string("field '") + name + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw BodyError(std::string("field '") + name + "' must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

inline char letter(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_string() || v.get<std::string>().size() != 1) {
    throw BodyError(std::string("field '") + name + "' must be a one-letter string");
  }
  return v.get<std::string>()[0];
}

inline Eigen::Vector3d vec3(const json& v, const char* name) {
  if (!v.is_array() || v.size() != 3) throw BodyError(std::string("field '") + name + "' must be [x, y, z]");
  Eigen::Vector3d out;
  for (int k = 0; k < 3; ++k) {
    if (!v[static_cast<std::size_t>(k)].is_number()) throw BodyError(std::string("field '") + name + "' must be [x, y, z]");
    out[k] = v[static_cast<std::size_t>(k)].get<double>();
  }
  return out;
}

}  // namespace detail

// ---- encoders ----

inline json encode(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

inline json encode(const Pose& p) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(json::array({p.rotation(r, 0), p.rotation(r, 1), p.rotation(r, 2)}));
  return {{"rotation", rows}, {"translation", encode(p.translation)}};
}

inline json encode(const TubeSpec& t) {
  return {{"id", t.id()},
          {"youngs_modulus", t.youngs_modulus()},
          {"outer_diameter", t.outer_diameter()},
          {"inner_diameter", t.inner_diameter()},
          {"second_moment", t.second_moment()},
          {"precurvature", t.precurvature()},
          {"straight_length", t.straight_length()},
          {"curved_length", t.curved_length()}};
}

inline json encode(std::span<const TubeSpec> tubes) {
  json out = json::array();
  for (const auto& t : tubes) out.push_back(encode(t));
  return out;
}

inline json encode(const JointConfig& j) { return {{"translations", j.translations}, {"rotations", j.rotations}}; }

inline json encode(const Link& l) {
  json members = json::array();
  for (const auto& m : l.members) {
    members.push_back({{"tube", m.tube}, {"section", m.section == Section::curved ? "curved" : "straight"}});
  }
  return {{"start", l.start},
          {"arc_length", l.arc_length},
          {"curvature", l.curvature},
          {"plane_angle", l.plane_angle},
          {"absolute_plane_angle", l.absolute_plane_angle},
          {"member_tubes", members}};
}

inline json encode(const std::vector<Link>& links) {
  json out = json::array();
  for (const auto& l : links) out.push_back(encode(l));
  return out;
}

inline json encode(const EquilibriumPlane& e) {
  return {{"chi", e.chi}, {"gamma", e.gamma}, {"phi", e.phi}, {"resultant_curvature", e.resultant_curvature}};
}

inline json encode_backbone(const std::vector<BackbonePoint>& points, double ds) {
  json pts = json::array();
  for (const auto& b : points) pts.push_back({{"s", b.s}, {"point", encode(b.point)}});
  return {{"ds", ds}, {"points", pts}};
}

inline json encode(const KinematicsResult& fk) {
  json poses = json::array();
  for (const auto& p : fk.link_poses) poses.push_back(encode(p));
  return {{"tip", encode(fk.tip)}, {"links", encode(fk.links)}, {"link_poses", poses}};
}

inline json encode(const AxisAssignment& a) {
  return {{"tube", a.tube},
          {"translation", std::string(1, a.translation)},
          {"rotation", std::string(1, a.rotation)},
          {"steps_per_mm", a.steps_per_mm},
          {"steps_per_degree", a.steps_per_degree},
          {"home_offset", a.home_offset},
          {"translation_min", a.translation_min},
          {"translation_max", a.translation_max},
          {"rotation_min", a.rotation_min},
          {"rotation_max", a.rotation_max}};
}

inline json encode(const AxisMap& m) {
  json out = json::array();
  for (const auto& a : m.entries()) out.push_back(encode(a));
  return out;
}

inline json encode(const ControllerState& s) {
  json axes = json::array();
  for (const auto& a : s.axes) {
    axes.push_back({{"letter", std::string(1, a.letter)},
                    {"tube", a.tube},
                    {"kind", a.rotation ? "rotation" : "translation"},
                    {"commanded", a.commanded},
                    {"steps", a.steps},
                    {"actual", a.actual()},
                    {"lower", a.lower},
                    {"upper", a.upper},
                    {"homed", a.homed}});
  }
  return {{"mode", s.mode == PositioningMode::absolute ? "absolute" : "relative"}, {"axes", axes}};
}

inline json encode(const FrameRegistration& r) {
  json pairs = json::array();
  for (const auto& p : r.pairs) pairs.push_back({{"tracker", encode(p.tracker)}, {"base", encode(p.base)}});
  return {{"tracker_to_base", encode(r.tracker_to_base)}, {"fit_rmse", r.fit_rmse}, {"pairs", pairs}};
}

inline json encode(const ExperimentRecord& r) {
  auto vecs = [](const std::vector<Eigen::Vector3d>& v) {
    json out = json::array();
    for (const auto& p : v) out.push_back(encode(p));
    return out;
  };
  json out{{"kind", r.kind},
           {"before", encode(r.before)},
           {"after", encode(r.after)},
           {"predicted", vecs(r.predicted)},
           {"measured", vecs(r.measured)},
           {"errors", vecs(r.errors)},
           {"error_norms", r.error_norms}};
  if (r.kind == "in-plane") {
    json tips = json::array();
    for (const auto& t : r.in_plane_tips) tips.push_back({{"r", t.x()}, {"z", t.y()}});
    out["bending_plane_angle"] = r.bending_plane_angle ? json(*r.bending_plane_angle) : json(nullptr);
    out["in_plane_tips"] = tips;
    out["coplanarity_residual"] = r.coplanarity_residual;
  }
  if (r.kind == "out-of-plane") {
    out["link_angles_before"] = r.link_angles_before;
    out["link_angles_after"] = r.link_angles_after;
    out["distal_angle_change"] = r.distal_angle_change ? json(*r.distal_angle_change) : json(nullptr);
  }
  return out;
}

inline json encode(const AccuracyReport& r, bool include_trials = true) {
  json out{{"kind", "accuracy"},
           {"n_trials", r.n_trials},
           {"rmse_translation", r.rmse_translation},
           {"rmse_rotation", r.rmse_rotation}};
  if (include_trials) {
    json trials = json::array();
    for (const auto& t : r.trials) {
      trials.push_back({{"target_translation", t.target_translation},
                        {"target_rotation", t.target_rotation},
                        {"measured_translation", t.measured_translation},
                        {"measured_rotation", t.measured_rotation},
                        {"residual_translation", t.residual_translation},
                        {"residual_rotation", t.residual_rotation}});
    }
    out["trials"] = trials;
  }
  return out;
}

inline json encode(const GcodeCommand& c) {
  static const char* kinds[] = {"none", "absolute_mode", "relative_mode", "linear_move", "home", "position_query"};
  json words = json::array();
  for (const auto& w : c.axis_words) words.push_back({{"letter", std::string(1, w.letter)}, {"value", w.value}});
  return {{"kind", kinds[static_cast<int>(c.kind)]},
          {"axis_words", words},
          {"feed", c.feed ? json(*c.feed) : json(nullptr)}};
}

inline json encode_error(ErrorCode code, const std::string& message) {
  return {{"error", to_string(code)}, {"message", message}};
}

// ---- decoders ----

inline TubeSpec decode_tube(const json& j, int default_id) {
  const int id = j.contains("id") ? static_cast<int>(detail::number(j, "id")) : default_id;
  const bool has_kappa = j.contains("precurvature");
  const bool has_radius = j.contains("radius");
  if (has_kappa && has_radius) throw Error(ErrorCode::invalid_input, "tube " + std::to_string(id) + ": give precurvature or radius, not both");
  if (!has_kappa && !has_radius) throw BodyError("tube " + std::to_string(id) + ": missing field 'precurvature'");
  double kappa = 0.0;
  if (has_kappa) {
    kappa = detail::number(j, "precurvature");
  } else {
    const double radius = detail::number(j, "radius");
    if (!(radius > 0.0)) throw Error(ErrorCode::invalid_input, "tube " + std::to_string(id) + ": radius must be > 0");
    kappa = 1.0 / radius;
  }
  return TubeSpec(id, detail::number(j, "youngs_modulus"), detail::number(j, "outer_diameter"),
                  detail::number(j, "inner_diameter"), kappa, detail::number(j, "straight_length"),
                  detail::number(j, "curved_length"));
}

inline std::vector<TubeSpec> decode_tubes(const json& j) {
  if (!j.is_array()) throw BodyError("'tubes' must be an array");
  std::vector<TubeSpec> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(decode_tube(j[k], static_cast<int>(k) + 1));
  validate_tubes(out);
  return out;
}

inline JointConfig decode_joints(const json& j) {
  return {detail::numbers(j, "translations"), detail::numbers(j, "rotations")};
}

inline AxisAssignment decode_axis(const json& j) {
  AxisAssignment a;
  a.tube = static_cast<int>(detail::number(j, "tube"));
  a.translation = detail::letter(j, "translation");
  a.rotation = detail::letter(j, "rotation");
  a.steps_per_mm = detail::number_or(j, "steps_per_mm", a.steps_per_mm);
  a.steps_per_degree = detail::number_or(j, "steps_per_degree", a.steps_per_degree);
  a.home_offset = detail::number_or(j, "home_offset", a.home_offset);
  a.translation_min = detail::number_or(j, "translation_min", a.translation_min);
  a.translation_max = detail::number_or(j, "translation_max", a.translation_max);
  a.rotation_min = detail::number_or(j, "rotation_min", a.rotation_min);
  a.rotation_max = detail::number_or(j, "rotation_max", a.rotation_max);
  return a;
}

// Robot description from either {"robot_file": "<text>"} or the structured
// form {"name", "tubes", "axes"?, "joints"?}.
inline RobotDescription decode_robot(const json& j) {
  if (!j.is_object()) throw BodyError("expected an object");
  if (j.contains("robot_file")) {
    const json& text = j["robot_file"];
    if (!text.is_string()) throw BodyError("'robot_file' must be a string");
    return parse_robot_description(text.get<std::string>());
  }
  RobotDescription d;
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw BodyError("'name' must be a string");
    d.name = j["name"].get<std::string>();
  }
  d.tubes = decode_tubes(detail::field(j, "tubes"));
  if (j.contains("axes")) {
    const json& axes = j["axes"];
    if (!axes.is_array()) throw BodyError("'axes' must be an array");
    std::vector<AxisAssignment> entries;
    for (const auto& a : axes) entries.push_back(decode_axis(a));
    d.axes = AxisMap(std::move(entries));
    for (const auto& t : d.tubes) {
      if (!d.axes.for_tube(t.id())) throw Error(ErrorCode::config_error, "no axes for tube " + std::to_string(t.id()));
    }
    if (d.axes.size() != d.tubes.size()) throw Error(ErrorCode::config_error, "axes given for unknown tubes");
  } else {
    d.axes = AxisMap::defaults(d.tubes.size());
  }
  if (j.contains("joints") && !j["joints"].is_null()) {
    d.joints = decode_joints(j["joints"]);
    validate_joints(d.tubes, *d.joints);
  }
  return d;
}

inline NoiseModel decode_noise(const json& j) {
  if (j.is_null()) return NoiseModel::none();
  const json& kind = detail::field(j, "kind");
  if (!kind.is_string()) throw BodyError("noise 'kind' must be a string");
  const std::string k = kind.get<std::string>();
  if (k == "none") return NoiseModel::none();
  const double t = detail::number_or(j, "translation", 0.0);
  const double r = detail::number_or(j, "rotation", 0.0);
  if (k == "gaussian") return NoiseModel::gaussian(t, r);
  if (k == "fixed_offset") return NoiseModel::offset(t, r);
  throw BodyError("noise 'kind' must be none, gaussian or fixed_offset");
}

inline Pose decode_pose(const json& j) {
  Pose p;
  const json& rows = detail::field(j, "rotation");
  if (!rows.is_array() || rows.size() != 3) throw BodyError("'rotation' must be a 3x3 array");
  for (std::size_t r = 0; r < 3; ++r) p.rotation.row(static_cast<Eigen::Index>(r)) = detail::vec3(rows[r], "rotation").transpose();
  p.translation = detail::vec3(detail::field(j, "translation"), "translation");
  return p;
}

inline std::vector<PointPair> decode_point_pairs(const json& j) {
  if (!j.is_array()) throw BodyError("'pairs' must be an array");
  std::vector<PointPair> out;
  for (const auto& p : j) {
    out.push_back({detail::vec3(detail::field(p, "tracker"), "tracker"), detail::vec3(detail::field(p, "base"), "base")});
  }
  return out;
}

}  // namespace ctrkit::wire
