#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "ctrkit/error.hpp"
#include "ctrkit/gcode.hpp"
#include "ctrkit/tube.hpp"

namespace ctrkit {

// Perturbation of the "tracker" reading of an axis, not of the motion itself.
struct NoiseModel {
  enum class Kind { none, gaussian, fixed_offset };
  Kind kind = Kind::none;
  double translation = 0.0;  // sigma or offset, mm
  double rotation = 0.0;     // sigma or offset, deg

  static NoiseModel none() { return {}; }
  static NoiseModel gaussian(double sigma_mm, double sigma_deg) { return {Kind::gaussian, sigma_mm, sigma_deg}; }
  static NoiseModel offset(double mm, double deg) { return {Kind::fixed_offset, mm, deg}; }
};

struct AxisState {
  char letter = 'X';
  int tube = 1;
  bool rotation = false;
  double steps_per_unit = 1.0;
  double lower = 0.0;
  double upper = 0.0;
  double commanded = 0.0;
  std::int64_t steps = 0;
  bool homed = false;

  double actual() const { return static_cast<double>(steps) / steps_per_unit; }
  double step_size() const { return 1.0 / steps_per_unit; }
  bool operator==(const AxisState&) const = default;
};

enum class PositioningMode { absolute, relative };

struct ControllerState {
  std::vector<AxisState> axes;  // axis-map order
  PositioningMode mode = PositioningMode::absolute;
};

struct Reply {
  bool ok = true;
  std::optional<ErrorCode> error;
  std::string text;
};

// Simulated motion board. Moves are instantaneous; each axis lands on the
// nearest whole motor step of its commanded position.
class VirtualController {
 public:
  explicit VirtualController(AxisMap axis_map) : axis_map_(std::move(axis_map)) {
    for (const auto& e : axis_map_.entries()) {
      state_.axes.push_back({e.translation, e.tube, false, e.steps_per_mm, e.translation_min, e.translation_max});
      state_.axes.push_back({e.rotation, e.tube, true, e.steps_per_degree, e.rotation_min, e.rotation_max});
    }
  }

  const ControllerState& state() const { return state_; }
  const AxisMap& axis_map() const { return axis_map_; }

  const AxisState& axis(char letter) const { return state_.axes[axis_index(letter)]; }

  Reply apply(const GcodeCommand& cmd) {
    switch (cmd.kind) {
      case CommandKind::none:
        return ok();
      case CommandKind::absolute_mode:
        state_.mode = PositioningMode::absolute;
        return ok();
      case CommandKind::relative_mode:
        state_.mode = PositioningMode::relative;
        return ok();
      case CommandKind::home:
        for (auto& a : state_.axes) {
          if (!cmd.axis_words.empty() && !cmd.value(a.letter)) continue;
          a.commanded = 0.0;
          a.steps = 0;
          a.homed = true;
        }
        return ok();
      case CommandKind::position_query:
        return {true, std::nullopt, position_report() + "\nok\n"};
      case CommandKind::linear_move:
        return move(cmd);
    }
    return ok();
  }

  // Parses and applies one line; parse failures become error replies.
  Reply execute(std::string_view line) {
    try {
      return apply(parse_line(line, axis_map_));
    } catch (const Error& e) {
      return error(e.code(), e.what());
    }
  }

  // Axis words of the current actual positions, e.g. "X10.000 A90.000".
  std::string position_report() const {
    std::vector<AxisWord> words;
    for (const auto& a : state_.axes) words.push_back({a.letter, a.actual()});
    return format_axis_words(words);
  }

  // Tracker reading of an axis: actual position plus the configured noise.
  template <class Rng>
  double measure(char letter, const NoiseModel& noise, Rng& rng) const {
    const auto& a = axis(letter);
    const double amount = a.rotation ? noise.rotation : noise.translation;
    switch (noise.kind) {
      case NoiseModel::Kind::none: return a.actual();
      case NoiseModel::Kind::fixed_offset: return a.actual() + amount;
      case NoiseModel::Kind::gaussian: {
        std::normal_distribution<double> dist(0.0, amount);
        return a.actual() + dist(rng);
      }
    }
    return a.actual();
  }

  // Joint configuration implied by commanded (or actual) cart positions.
  JointConfig joints(bool actual = false) const {
    JointConfig j;
    j.translations.assign(axis_map_.size(), 0.0);
    j.rotations.assign(axis_map_.size(), 0.0);
    for (const auto& a : state_.axes) {
      const auto k = static_cast<std::size_t>(a.tube) - 1;
      const double v = actual ? a.actual() : a.commanded;
      if (a.rotation) j.rotations[k] = v;
      else j.translations[k] = v + axis_map_.for_tube(a.tube)->home_offset;
    }
    return j;
  }

  bool homed() const {
    for (const auto& a : state_.axes) {
      if (!a.homed) return false;
    }
    return true;
  }

 private:
  static Reply ok() { return {true, std::nullopt, "ok\n"}; }

  static Reply error(ErrorCode code, const std::string& message) {
    return {false, code, "error: " + std::string(to_string(code)) + ": " + message + "\n"};
  }

  std::size_t axis_index(char letter) const {
    const auto ref = axis_map_.find(letter);
    if (!ref) throw Error(ErrorCode::config_error, std::string("unknown axis '") + letter + "'");
    return 2 * ref->index + (ref->rotation ? 1 : 0);
  }

  Reply move(const GcodeCommand& cmd) {
    // Validate every word before touching state so a rejected move is a no-op.
    std::vector<std::pair<std::size_t, double>> targets;
    for (const auto& w : cmd.axis_words) {
      const auto ref = axis_map_.find(w.letter);
      if (!ref) return error(ErrorCode::unsupported_command, std::string("unknown axis '") + w.letter + "'");
      const std::size_t idx = 2 * ref->index + (ref->rotation ? 1 : 0);
      const auto& a = state_.axes[idx];
      if (!a.homed) return error(ErrorCode::not_homed, std::string("axis ") + a.letter + " is not homed (send G28)");
      const double target = state_.mode == PositioningMode::absolute ? w.value : a.commanded + w.value;
      constexpr double kSlack = 1e-9;
      if (!(target >= a.lower - kSlack && target <= a.upper + kSlack)) {
        return error(ErrorCode::limit_error, std::string("axis ") + a.letter + " target " + format_axis_value(target) +
                                                 " outside [" + format_axis_value(a.lower) + ", " +
                                                 format_axis_value(a.upper) + "]");
      }
      targets.emplace_back(idx, std::clamp(target, a.lower, a.upper));
    }
    for (const auto& [idx, target] : targets) {
      auto& a = state_.axes[idx];
      a.commanded = target;
      a.steps = std::llround(target * a.steps_per_unit);
    }
    return ok();
  }

  AxisMap axis_map_;
  ControllerState state_;
};

enum class TargetSampling {
  step_lattice,  // uniform over reachable motor-step positions
  continuous,    // uniform over the real interval
};

struct AccuracyOptions {
  int trials = 90;
  std::uint64_t seed = 0;
  NoiseModel noise;
  TargetSampling sampling = TargetSampling::step_lattice;
  AxisAssignment cart;  // defaults: X/A, 800 steps/mm, 8.888 steps/deg, [0,50] mm, [-180,180] deg
};

struct AccuracyTrial {
  double target_translation;
  double target_rotation;
  double measured_translation;
  double measured_rotation;
  double residual_translation;
  double residual_rotation;
};

struct AccuracyReport {
  int n_trials = 0;
  double rmse_translation = 0.0;
  double rmse_rotation = 0.0;
  std::vector<AccuracyTrial> trials;
};

inline double rms(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double acc = 0.0;
  for (double v : values) acc += v * v;
  return std::sqrt(acc / static_cast<double>(values.size()));
}

// Endpoint accuracy of one cart: random absolute targets are sent as G-code,
// and the tracker reading of each axis is compared with its target.
inline AccuracyReport run_accuracy_experiment(const AccuracyOptions& options) {
  if (options.trials < 1) throw Error(ErrorCode::invalid_input, "trials must be >= 1");

  AxisAssignment cart = options.cart;
  cart.tube = 1;
  cart.home_offset = 0.0;
  VirtualController controller(AxisMap({cart}));
  controller.execute("G28");
  controller.execute("G90");

  std::mt19937_64 rng(options.seed);
  auto draw = [&](double lo, double hi, double steps_per_unit) {
    if (options.sampling == TargetSampling::continuous) {
      return std::uniform_real_distribution<double>(lo, hi)(rng);
    }
    const auto first = static_cast<std::int64_t>(std::ceil(lo * steps_per_unit));
    const auto last = static_cast<std::int64_t>(std::floor(hi * steps_per_unit));
    return static_cast<double>(std::uniform_int_distribution<std::int64_t>(first, last)(rng)) / steps_per_unit;
  };

  AccuracyReport report;
  report.n_trials = options.trials;
  std::vector<double> rt, rr;
  for (int n = 0; n < options.trials; ++n) {
    AccuracyTrial t{};
    t.target_translation = draw(cart.translation_min, cart.translation_max, cart.steps_per_mm);
    t.target_rotation = draw(cart.rotation_min, cart.rotation_max, cart.steps_per_degree);
    const std::string line = std::string("G1 ") + format_axis_words({{cart.translation, t.target_translation},
                                                                     {cart.rotation, t.target_rotation}});
    const Reply reply = controller.execute(line);
    if (!reply.ok) throw Error(reply.error.value_or(ErrorCode::invalid_input), reply.text);
    t.measured_translation = controller.measure(cart.translation, options.noise, rng);
    t.measured_rotation = controller.measure(cart.rotation, options.noise, rng);
    t.residual_translation = t.measured_translation - t.target_translation;
    t.residual_rotation = t.measured_rotation - t.target_rotation;
    rt.push_back(t.residual_translation);
    rr.push_back(t.residual_rotation);
    report.trials.push_back(t);
  }
  report.rmse_translation = rms(rt);
  report.rmse_rotation = rms(rr);
  return report;
}

}  // namespace ctrkit
