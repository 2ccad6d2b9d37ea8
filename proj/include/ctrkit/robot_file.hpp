#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ctrkit/error.hpp"
#include "ctrkit/gcode.hpp"
#include "ctrkit/tube.hpp"

// Robot description files.
//
//   # comment                      (also after values)
//   name = canonical-2
//
//   [tube 1]                       one section per tube, 1 = outermost
//   youngs_modulus = 50            GPa            (alias: E)
//   outer_diameter = 3.0           mm             (alias: OD)
//   inner_diameter = 2.6           mm             (alias: ID)
//   precurvature   = 0.0125        1/mm           (alias: kappa)
//   radius         = 80            mm, instead of precurvature (alias: R)
//   straight_length = 160          mm
//   curved_length   = 40           mm
//
//   [axes]                         optional, defaults X/Y/Z.. and A/B/C..
//   # tube translation rotation [steps_per_mm steps_per_degree home_offset]
//   1 X A 800 8.888 60
//
//   [limits]                       optional, defaults [0,50] mm, [-180,180] deg
//   # tube translation_min translation_max rotation_min rotation_max
//   1 0 50 -180 180
//
//   [joints]                       optional initial configuration
//   r = 100, 160                   deployed length beyond the front plate, mm
//   t = 0, 0                       axial angle, deg
namespace ctrkit {

struct RobotDescription {
  std::string name;
  std::vector<TubeSpec> tubes;
  AxisMap axes;
  std::optional<JointConfig> joints;

  // Configuration with every cart at its homed position.
  JointConfig home() const {
    JointConfig j;
    for (const auto& t : tubes) {
      const auto* a = axes.for_tube(t.id());
      j.translations.push_back(a ? a->home_offset : 0.0);
      j.rotations.push_back(0.0);
    }
    return j;
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline double parse_double(const std::string& text, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line) + ": malformed number '" + text + "'", 0);
  }
}

inline std::vector<double> parse_list(const std::string& text, std::size_t line) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item), line));
  return out;
}

}  // namespace detail

inline RobotDescription parse_robot_description(std::string_view text) {
  struct TubeFields {
    std::map<std::string, double> values;
    std::size_t line = 0;
  };
  std::map<int, TubeFields> tube_fields;
  std::vector<AxisAssignment> axis_rows;
  std::map<int, std::vector<double>> limit_rows;
  std::optional<std::vector<double>> joint_r, joint_t;
  std::string name;

  const std::map<std::string, std::string> aliases{
      {"e", "youngs_modulus"},        {"youngs_modulus", "youngs_modulus"},
      {"od", "outer_diameter"},       {"outer_diameter", "outer_diameter"},
      {"id", "inner_diameter"},       {"inner_diameter", "inner_diameter"},
      {"kappa", "precurvature"},      {"precurvature", "precurvature"},
      {"r", "radius"},                {"radius", "radius"},
      {"straight_length", "straight_length"}, {"curved_length", "curved_length"},
  };

  enum class Where { top, tube, axes, limits, joints } where = Where::top;
  int current_tube = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = detail::trim(std::string_view(raw).substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto err = [&](const std::string& what) { return ParseError("line " + std::to_string(line_no) + ": " + what, 0); };

    if (line.front() == '[') {
      if (line.back() != ']') throw err("unterminated section header");
      std::istringstream hs(detail::lower(detail::trim(line.substr(1, line.size() - 2))));
      std::string kind;
      hs >> kind;
      if (kind == "tube") {
        if (!(hs >> current_tube) || current_tube < 1) throw err("expected [tube <id>] with id >= 1");
        if (tube_fields.count(current_tube)) throw err("tube " + std::to_string(current_tube) + " defined twice");
        tube_fields[current_tube].line = line_no;
        where = Where::tube;
      } else if (kind == "axes") {
        where = Where::axes;
      } else if (kind == "limits") {
        where = Where::limits;
      } else if (kind == "joints") {
        where = Where::joints;
      } else {
        throw err("unknown section [" + kind + "]");
      }
      continue;
    }

    if (where == Where::axes || where == Where::limits) {
      std::istringstream row(line);
      std::vector<std::string> cells;
      for (std::string c; row >> c;) cells.push_back(c);
      const int tube = static_cast<int>(detail::parse_double(cells.front(), line_no));
      if (where == Where::axes) {
        if (cells.size() < 3 || cells.size() > 6 || cells[1].size() != 1 || cells[2].size() != 1) {
          throw err("axes row: tube translation rotation [steps_per_mm steps_per_degree home_offset]");
        }
        AxisAssignment a;
        a.tube = tube;
        a.translation = cells[1][0];
        a.rotation = cells[2][0];
        if (cells.size() > 3) a.steps_per_mm = detail::parse_double(cells[3], line_no);
        if (cells.size() > 4) a.steps_per_degree = detail::parse_double(cells[4], line_no);
        if (cells.size() > 5) a.home_offset = detail::parse_double(cells[5], line_no);
        axis_rows.push_back(a);
      } else {
        if (cells.size() != 5) throw err("limits row: tube translation_min translation_max rotation_min rotation_max");
        std::vector<double> v;
        for (std::size_t k = 1; k < 5; ++k) v.push_back(detail::parse_double(cells[k], line_no));
        limit_rows[tube] = v;
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) throw err("expected key = value");
    const std::string key = detail::lower(detail::trim(line.substr(0, eq)));
    const std::string value = detail::trim(line.substr(eq + 1));
    switch (where) {
      case Where::top:
        if (key != "name") throw err("unknown key '" + key + "'");
        name = value;
        break;
      case Where::tube: {
        const auto it = aliases.find(key);
        if (it == aliases.end()) throw err("unknown tube key '" + key + "'");
        auto& fields = tube_fields[current_tube].values;
        if (fields.count(it->second)) throw err("duplicate key '" + it->second + "'");
        fields[it->second] = detail::parse_double(value, line_no);
        break;
      }
      case Where::joints:
        if (key == "r") joint_r = detail::parse_list(value, line_no);
        else if (key == "t") joint_t = detail::parse_list(value, line_no);
        else throw err("joints keys are r and t");
        break;
      default:
        break;
    }
  }

  RobotDescription desc;
  desc.name = name;
  int expected = 1;
  for (const auto& [id, tf] : tube_fields) {
    if (id != expected++) throw Error(ErrorCode::invalid_input, "tube ids must be consecutive from 1");
    const auto& f = tf.values;
    auto need = [&](const char* key) {
      const auto it = f.find(key);
      if (it == f.end()) throw Error(ErrorCode::invalid_input, "tube " + std::to_string(id) + ": missing " + key);
      return it->second;
    };
    const bool has_kappa = f.count("precurvature") > 0;
    const bool has_radius = f.count("radius") > 0;
    if (has_kappa && has_radius) {
      throw Error(ErrorCode::invalid_input,
                  "tube " + std::to_string(id) + ": specify either precurvature or radius, not both");
    }
    double kappa = 0.0;
    if (has_kappa) kappa = f.at("precurvature");
    if (has_radius) {
      const double r = f.at("radius");
      if (!(r > 0.0)) throw Error(ErrorCode::invalid_input, "tube " + std::to_string(id) + ": radius must be > 0");
      kappa = 1.0 / r;
    }
    desc.tubes.emplace_back(id, need("youngs_modulus"), need("outer_diameter"), need("inner_diameter"), kappa,
                            need("straight_length"), f.count("curved_length") ? f.at("curved_length") : 0.0);
  }
  validate_tubes(desc.tubes);

  if (axis_rows.empty()) {
    axis_rows = AxisMap::defaults(desc.tubes.size()).entries();
  }
  for (auto& a : axis_rows) {
    if (a.tube < 1 || static_cast<std::size_t>(a.tube) > desc.tubes.size()) {
      throw Error(ErrorCode::config_error, "axes row names unknown tube " + std::to_string(a.tube));
    }
    if (const auto it = limit_rows.find(a.tube); it != limit_rows.end()) {
      a.translation_min = it->second[0];
      a.translation_max = it->second[1];
      a.rotation_min = it->second[2];
      a.rotation_max = it->second[3];
    }
  }
  std::sort(axis_rows.begin(), axis_rows.end(), [](const auto& a, const auto& b) { return a.tube < b.tube; });
  for (std::size_t k = 0; k < axis_rows.size(); ++k) {
    if (axis_rows[k].tube != static_cast<int>(k) + 1) {
      throw Error(ErrorCode::config_error, "axes section must list every tube exactly once");
    }
  }
  desc.axes = AxisMap(std::move(axis_rows));

  if (joint_r || joint_t) {
    JointConfig j;
    j.translations = joint_r.value_or(std::vector<double>(desc.tubes.size(), 0.0));
    j.rotations = joint_t.value_or(std::vector<double>(desc.tubes.size(), 0.0));
    validate_joints(desc.tubes, j);
    desc.joints = j;
  }
  return desc;
}

inline RobotDescription load_robot_description(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::invalid_input, "cannot open robot file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_robot_description(ss.str());
}

// Joint argument grammar: "r=100,160;t=0,-45" (mm; degrees). Either part may
// be omitted (missing values come from `home`); "home" or "zero" alone selects
// the homed configuration.
inline JointConfig parse_joint_args(std::string_view text, const JointConfig& home) {
  const std::string s = detail::lower(detail::trim(text));
  JointConfig j = home;
  if (s == "home" || s == "zero") return j;
  std::stringstream ss(s);
  std::string part;
  bool any = false;
  while (std::getline(ss, part, ';')) {
    part = detail::trim(part);
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw ParseError("joint argument part '" + part + "' lacks '='", 0);
    const std::string key = detail::trim(part.substr(0, eq));
    const auto values = detail::parse_list(part.substr(eq + 1), 1);
    if (values.size() != home.size()) {
      throw ParseError("joint argument '" + key + "' needs " + std::to_string(home.size()) + " values", 0);
    }
    if (key == "r") j.translations = values;
    else if (key == "t") j.rotations = values;
    else throw ParseError("joint argument keys are r and t", 0);
    any = true;
  }
  if (!any) throw ParseError("empty joint argument", 0);
  return j;
}

}  // namespace ctrkit
