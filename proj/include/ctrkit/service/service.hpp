#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ctrkit/actuation.hpp"
#include "ctrkit/kinematics.hpp"
#include "ctrkit/metrology.hpp"
#include "ctrkit/serialization.hpp"
#include "ctrkit/service/openapi.hpp"

// Robot sessions behind a transport-independent request handler. The HTTP
// server, the WebSocket stream and the tests all go through Service.
namespace ctrkit::service {

using nlohmann::json;

inline constexpr double kDefaultBackboneStep = 1.0;  // mm
inline constexpr double kDefaultFeed = 1200.0;        // mm/min, printed only

struct Response {
  int status = 200;
  json body;
};

// Immutable view of one session; readers share it without locking.
struct SessionState {
  std::string id;
  std::string name;
  std::vector<TubeSpec> tubes;
  AxisMap axes;
  JointConfig joints;
  ControllerState controller;
  std::optional<FrameRegistration> registration;
  std::uint64_t seq = 0;
  KinematicsResult fk;
  std::string event;  // serialized state event for `seq`
};

inline json joint_limits(const SessionState& s) {
  json tr = json::array(), rot = json::array();
  for (const auto& t : s.tubes) {
    const auto* a = s.axes.for_tube(t.id());
    const double lo = std::max(0.0, a->home_offset + a->translation_min);
    const double hi = std::min(t.total_length(), a->home_offset + a->translation_max);
    tr.push_back(json::array({lo, hi}));
    rot.push_back(json::array({a->rotation_min, a->rotation_max}));
  }
  return {{"translations", tr}, {"rotations", rot}};
}

inline json backbone_payload(const KinematicsResult& fk, double ds) {
  return wire::encode_backbone(sample_backbone(fk, ds), ds);
}

inline json state_event(const SessionState& s) {
  return {{"type", "state"},
          {"session", s.id},
          {"seq", s.seq},
          {"joints", wire::encode(s.joints)},
          {"links", wire::encode(s.fk.links)},
          {"tip", wire::encode(s.fk.tip)},
          {"backbone", backbone_payload(s.fk, kDefaultBackboneStep)}};
}

inline json session_json(const SessionState& s) {
  return {{"id", s.id},
          {"name", s.name},
          {"seq", s.seq},
          {"tubes", wire::encode(std::span<const TubeSpec>(s.tubes))},
          {"axes", wire::encode(s.axes)},
          {"joint_limits", joint_limits(s)},
          {"joints", wire::encode(s.joints)},
          {"links", wire::encode(s.fk.links)},
          {"tip", wire::encode(s.fk.tip)},
          {"controller", wire::encode(s.controller)},
          {"registration", s.registration ? wire::encode(*s.registration) : json(nullptr)}};
}

using Listener = std::function<void(const std::string& event)>;

class Session {
 public:
  Session(std::string id, const RobotDescription& desc, std::optional<FrameRegistration> registration = std::nullopt,
          std::uint64_t seq = 0)
      : controller_(desc.axes) {
    auto s = std::make_shared<SessionState>();
    s->id = std::move(id);
    s->name = desc.name;
    s->tubes = desc.tubes;
    s->axes = desc.axes;
    s->registration = std::move(registration);
    s->seq = seq;
    const JointConfig initial = desc.joints ? *desc.joints : desc.home();
    validate_joints(s->tubes, initial);
    controller_.execute("G28");
    run_move(initial);
    s->joints = controller_.joints();
    refresh(*s);
    state_ = std::move(s);
  }

  std::shared_ptr<const SessionState> snapshot() const {
    std::lock_guard lock(state_mutex_);
    return state_;
  }

  // Routes a joint target through emitted G-code into the controller.
  std::shared_ptr<const SessionState> move_to(const JointConfig& target, double feed) {
    std::lock_guard writer(write_mutex_);
    const auto current = snapshot();
    validate_joints(current->tubes, target);
    VirtualController trial = controller_;
    std::istringstream program(emit_move(target, current->axes, feed));
    std::string line;
    while (std::getline(program, line)) {
      const Reply r = trial.execute(line);
      if (!r.ok) throw Error(*r.error, trimmed(r.text));
    }
    controller_ = std::move(trial);
    return publish([&](SessionState& s) { s.joints = controller_.joints(); });
  }

  // Raw G-code, one line at a time. A line that would leave the tubes in an
  // invalid configuration is rejected like a limit violation.
  std::pair<Reply, std::shared_ptr<const SessionState>> execute(std::string_view line) {
    std::lock_guard writer(write_mutex_);
    const auto current = snapshot();
    VirtualController trial = controller_;
    Reply r = trial.execute(line);
    if (!r.ok) return {r, current};
    if (trial.homed()) {
      try {
        validate_joints(current->tubes, trial.joints());
      } catch (const Error& e) {
        return {{false, e.code(), "error: " + std::string(to_string(e.code())) + ": " + e.what() + "\n"}, current};
      }
    }
    const bool changed = trial.state().axes != controller_.state().axes || trial.state().mode != controller_.state().mode;
    controller_ = std::move(trial);
    if (!changed) return {r, current};
    return {r, publish([&](SessionState& s) {
              if (controller_.homed()) s.joints = controller_.joints();
            })};
  }

  std::shared_ptr<const SessionState> set_registration(std::optional<FrameRegistration> reg) {
    std::lock_guard writer(write_mutex_);
    std::lock_guard lock(state_mutex_);
    auto next = std::make_shared<SessionState>(*state_);
    next->registration = std::move(reg);
    state_ = std::move(next);
    return state_;
  }

  // Registers a listener; it first receives the latest state event. Events are
  // delivered under the writer lock, so each listener sees them in order.
  std::uint64_t subscribe(Listener listener) {
    std::lock_guard writer(write_mutex_);
    listener(snapshot()->event);
    std::lock_guard lock(listener_mutex_);
    const auto id = next_listener_++;
    listeners_.emplace(id, std::move(listener));
    return id;
  }

  void unsubscribe(std::uint64_t id) {
    std::lock_guard lock(listener_mutex_);
    listeners_.erase(id);
  }

 private:
  static std::string trimmed(std::string text) {
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    const std::string prefix = "error: ";
    if (text.rfind(prefix, 0) == 0) text.erase(0, prefix.size());
    const auto colon = text.find(": ");
    if (colon != std::string::npos) text.erase(0, colon + 2);  // drop the error code
    return text;
  }

  void run_move(const JointConfig& target) {
    std::istringstream program(emit_move(target, controller_.axis_map(), kDefaultFeed));
    std::string line;
    while (std::getline(program, line)) {
      const Reply r = controller_.execute(line);
      if (!r.ok) throw Error(ErrorCode::invalid_configuration, "initial joints: " + trimmed(r.text));
    }
  }

  void refresh(SessionState& s) {
    s.controller = controller_.state();
    s.fk = forward_kinematics(s.tubes, s.joints);
    s.event = state_event(s).dump();
  }

  template <class Update>
  std::shared_ptr<const SessionState> publish(Update update) {
    auto next = std::make_shared<SessionState>(*snapshot());
    update(*next);
    ++next->seq;
    refresh(*next);
    {
      std::lock_guard lock(state_mutex_);
      state_ = next;
    }
    std::lock_guard lock(listener_mutex_);
    for (auto& [id, listener] : listeners_) listener(next->event);
    return next;
  }

  std::mutex write_mutex_;
  mutable std::mutex state_mutex_;
  std::mutex listener_mutex_;
  std::shared_ptr<const SessionState> state_;
  VirtualController controller_;
  std::map<std::uint64_t, Listener> listeners_;
  std::uint64_t next_listener_ = 0;
};

struct Options {
  std::string snapshot_path;  // empty: no persistence
};

class Service {
 public:
  explicit Service(Options options = {}) : options_(std::move(options)) {
    if (!options_.snapshot_path.empty() && std::filesystem::exists(options_.snapshot_path)) load_snapshot();
  }

  // `target` is the request path with its query string.
  Response handle(std::string_view method, std::string_view target, std::string_view body) {
    try {
      return route(method, target, body);
    } catch (const wire::BodyError& e) {
      return {422, wire::encode_error(ErrorCode::invalid_input, e.what())};
    } catch (const nlohmann::json::exception& e) {
      return {422, wire::encode_error(ErrorCode::invalid_input, e.what())};
    } catch (const Error& e) {
      return {status_for(e.code()), wire::encode_error(e.code(), e.what())};
    }
  }

  std::shared_ptr<Session> find(const std::string& id) const {
    std::shared_lock lock(sessions_mutex_);
    const auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }

  std::string create(const RobotDescription& desc) {
    std::unique_lock lock(sessions_mutex_);
    const std::string id = "r" + std::to_string(++last_id_);
    sessions_.emplace(id, std::make_shared<Session>(id, desc));
    lock.unlock();
    save_snapshot();
    return id;
  }

  static int status_for(ErrorCode code) {
    switch (code) {
      case ErrorCode::limit_error:
      case ErrorCode::not_homed:
      case ErrorCode::missing_registration:
        return 409;
      case ErrorCode::parse_error:
        return 422;
      default:
        return 400;
    }
  }

 private:
  static std::vector<std::string> split_path(std::string_view path) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= path.size()) {
      const auto slash = path.find('/', pos);
      const auto end = slash == std::string_view::npos ? path.size() : slash;
      if (end > pos) parts.emplace_back(path.substr(pos, end - pos));
      if (slash == std::string_view::npos) break;
      pos = slash + 1;
    }
    return parts;
  }

  static std::map<std::string, std::string> split_query(std::string_view query) {
    std::map<std::string, std::string> out;
    std::size_t pos = 0;
    while (pos < query.size()) {
      auto amp = query.find('&', pos);
      if (amp == std::string_view::npos) amp = query.size();
      const auto item = query.substr(pos, amp - pos);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) out[std::string(item)] = "";
      else out[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
      pos = amp + 1;
    }
    return out;
  }

  static json parse_body(std::string_view body, bool allow_empty = false) {
    if (body.find_first_not_of(" \t\r\n") == std::string_view::npos) {
      if (allow_empty) return json::object();
      throw wire::BodyError("request body is empty");
    }
    try {
      return json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      throw wire::BodyError(std::string("malformed JSON: ") + e.what());
    }
  }

  static double query_number(const std::map<std::string, std::string>& q, const std::string& key, double fallback) {
    const auto it = q.find(key);
    if (it == q.end()) return fallback;
    try {
      std::size_t used = 0;
      const double v = std::stod(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument(key);
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorCode::invalid_input, "query parameter '" + key + "' must be a number");
    }
  }

  static Response not_found(const std::string& what) { return {404, {{"error", "not-found"}, {"message", what}}}; }
  static Response method_not_allowed() {
    return {405, {{"error", "method-not-allowed"}, {"message", "method not allowed on this path"}}};
  }

  Response route(std::string_view method, std::string_view target, std::string_view body) {
    const auto qpos = target.find('?');
    const auto path = target.substr(0, qpos);
    const auto query = split_query(qpos == std::string_view::npos ? std::string_view() : target.substr(qpos + 1));
    const auto parts = split_path(path);

    if (parts.size() == 1 && parts[0] == "healthz") {
      if (method != "GET") return method_not_allowed();
      std::shared_lock lock(sessions_mutex_);
      return {200, {{"status", "ok"}, {"sessions", sessions_.size()}}};
    }
    if (parts.size() == 1 && parts[0] == "spec") {
      if (method != "GET") return method_not_allowed();
      return {200, openapi_document()};
    }
    if (parts.empty() || parts[0] != "robots") return not_found("no route for " + std::string(path));

    if (parts.size() == 1) {
      if (method == "POST") {
        const auto desc = wire::decode_robot(parse_body(body));
        const std::string id = create(desc);
        return {201, session_json(*find(id)->snapshot())};
      }
      if (method == "GET") {
        json ids = json::array();
        std::shared_lock lock(sessions_mutex_);
        for (const auto& [id, s] : sessions_) ids.push_back(id);
        return {200, {{"sessions", ids}}};
      }
      return method_not_allowed();
    }

    const std::string& id = parts[1];
    auto session = find(id);
    if (!session) return not_found("unknown session '" + id + "'");

    if (parts.size() == 2) {
      if (method == "GET") return {200, session_json(*session->snapshot())};
      if (method == "DELETE") {
        {
          std::unique_lock lock(sessions_mutex_);
          sessions_.erase(id);
        }
        save_snapshot();
        return {200, {{"deleted", id}}};
      }
      return method_not_allowed();
    }

    const std::string& leaf = parts[2];
    if (parts.size() == 3 && leaf == "joints") {
      if (method != "PATCH") return method_not_allowed();
      const json b = parse_body(body);
      const auto current = session->snapshot();
      JointConfig target = current->joints;
      if (!b.is_object()) throw wire::BodyError("expected an object");
      if (!b.contains("translations") && !b.contains("rotations")) {
        throw wire::BodyError("expected 'translations' and/or 'rotations'");
      }
      if (b.contains("translations")) target.translations = wire::detail::numbers(b, "translations");
      if (b.contains("rotations")) target.rotations = wire::detail::numbers(b, "rotations");
      const double feed = wire::detail::number_or(b, "feed", kDefaultFeed);
      const auto next = session->move_to(target, feed);
      save_snapshot();
      return {200, session_json(*next)};
    }
    if (parts.size() == 3 && leaf == "fk") {
      if (method != "POST") return method_not_allowed();
      const json b = parse_body(body);
      const json& spec = b.is_object() && b.contains("joints") ? b["joints"] : b;
      const auto snap = session->snapshot();
      const auto fk = forward_kinematics(snap->tubes, wire::decode_joints(spec));
      return {200, wire::encode(fk)};
    }
    if (parts.size() == 3 && leaf == "backbone") {
      if (method != "GET") return method_not_allowed();
      const double ds = query_number(query, "ds", kDefaultBackboneStep);
      const auto snap = session->snapshot();
      const double total = snap->fk.links.empty() ? 0.0 : snap->fk.links.back().start + snap->fk.links.back().arc_length;
      if (ds > 0.0 && total / ds > 1e6) throw Error(ErrorCode::invalid_input, "ds too small (more than 1e6 samples)");
      return {200, backbone_payload(snap->fk, ds)};
    }
    if (parts.size() == 3 && leaf == "gcode") {
      if (method != "POST") return method_not_allowed();
      return run_gcode(*session, body);
    }
    if (parts.size() == 3 && leaf == "registration") {
      if (method == "GET") {
        const auto snap = session->snapshot();
        if (!snap->registration) throw Error(ErrorCode::missing_registration, "session has no registration");
        return {200, wire::encode(*snap->registration)};
      }
      if (method == "DELETE") {
        session->set_registration(std::nullopt);
        save_snapshot();
        return {200, {{"registration", nullptr}}};
      }
      if (method != "PUT") return method_not_allowed();
      const json b = parse_body(body);
      FrameRegistration reg;
      if (b.is_object() && b.contains("pairs")) {
        reg = register_frames(wire::decode_point_pairs(b["pairs"]));
      } else {
        reg.tracker_to_base = wire::decode_pose(b.is_object() && b.contains("tracker_to_base") ? b["tracker_to_base"] : b);
        if (reg.tracker_to_base.orthonormality_error() > 1e-9) {
          throw Error(ErrorCode::invalid_input, "rotation is not orthonormal");
        }
      }
      session->set_registration(reg);
      save_snapshot();
      return {200, wire::encode(reg)};
    }
    if (parts.size() == 4 && leaf == "experiments") {
      if (method != "POST") return method_not_allowed();
      return run_experiment(*session, parts[3], parse_body(body, true));
    }
    return not_found("no route for " + std::string(path));
  }

  Response run_gcode(Session& session, std::string_view body) {
    // Accepts {"lines": "..."} / {"lines": [...]} or a plain-text program.
    std::vector<std::string> lines;
    const auto first = body.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && body[first] == '{') {
      const json b = parse_body(body);
      const json& l = wire::detail::field(b, "lines");
      if (l.is_string()) {
        std::istringstream in(l.get<std::string>());
        for (std::string line; std::getline(in, line);) lines.push_back(line);
      } else if (l.is_array()) {
        for (const auto& x : l) {
          if (!x.is_string()) throw wire::BodyError("'lines' must be strings");
          lines.push_back(x.get<std::string>());
        }
      } else {
        throw wire::BodyError("'lines' must be a string or an array of strings");
      }
    } else {
      std::istringstream in{std::string(body)};
      for (std::string line; std::getline(in, line);) lines.push_back(line);
    }
    json replies = json::array();
    bool all_ok = true;
    for (const auto& line : lines) {
      auto [reply, state] = session.execute(line);
      replies.push_back({{"line", line},
                         {"ok", reply.ok},
                         {"reply", reply.text},
                         {"error", reply.error ? json(std::string(to_string(*reply.error))) : json(nullptr)}});
      if (!reply.ok) {
        all_ok = false;
        break;  // stop at the first rejected line, like a sender would
      }
    }
    save_snapshot();
    const auto snap = session.snapshot();
    return {200, {{"ok", all_ok}, {"replies", replies}, {"seq", snap->seq}, {"joints", wire::encode(snap->joints)}}};
  }

  static std::optional<JointConfig> joints_override(const json& b) {
    if (b.contains("joints")) return wire::decode_joints(b["joints"]);
    return std::nullopt;
  }

  static std::vector<Eigen::Vector3d> measured_points(const json& b) {
    std::vector<Eigen::Vector3d> out;
    if (!b.contains("measured") || b["measured"].is_null()) return out;
    const json& m = b["measured"];
    if (!m.is_array()) throw wire::BodyError("'measured' must be an array of [x, y, z]");
    for (const auto& p : m) out.push_back(wire::detail::vec3(p, "measured"));
    return out;
  }

  Response run_experiment(Session& session, const std::string& kind, const json& b) {
    if (!b.is_object()) throw wire::BodyError("expected an object");
    const auto snap = session.snapshot();
    const JointConfig joints = joints_override(b).value_or(snap->joints);
    if (kind == "in-plane") {
      auto rec = in_plane_experiment(snap->tubes, joints, wire::detail::number(b, "delta_rho"),
                                     wire::detail::number_or(b, "ds", kDefaultBackboneStep));
      const auto measured = measured_points(b);
      if (!measured.empty()) attach_measurements(rec, measured);
      return {200, wire::encode(rec)};
    }
    if (kind == "out-of-plane") {
      const double tube = wire::detail::number_or(b, "tube", 1.0);
      auto rec = out_of_plane_experiment(snap->tubes, joints, wire::detail::number(b, "delta_theta"),
                                         static_cast<int>(tube));
      const auto measured = measured_points(b);
      if (!measured.empty()) attach_measurements(rec, measured);
      return {200, wire::encode(rec)};
    }
    if (kind == "tracking") {
      const auto measured = wire::detail::vec3(wire::detail::field(b, "measured_tip"), "measured_tip");
      return {200, wire::encode(tip_tracking_comparison(snap->tubes, joints, snap->registration, measured))};
    }
    if (kind == "accuracy") {
      AccuracyOptions opt;
      opt.trials = static_cast<int>(wire::detail::number_or(b, "trials", opt.trials));
      const double seed = wire::detail::number_or(b, "seed", static_cast<double>(opt.seed));
      if (seed < 0 || seed != std::floor(seed)) throw Error(ErrorCode::invalid_input, "seed must be a non-negative integer");
      opt.seed = static_cast<std::uint64_t>(seed);
      if (b.contains("noise")) opt.noise = wire::decode_noise(b["noise"]);
      if (b.contains("sampling")) {
        const json& s = b["sampling"];
        if (s == "step_lattice") opt.sampling = TargetSampling::step_lattice;
        else if (s == "continuous") opt.sampling = TargetSampling::continuous;
        else throw wire::BodyError("'sampling' must be step_lattice or continuous");
      }
      const int tube = static_cast<int>(wire::detail::number_or(b, "tube", 1.0));
      const auto* cart = snap->axes.for_tube(tube);
      if (!cart) throw Error(ErrorCode::invalid_input, "no tube " + std::to_string(tube));
      opt.cart = *cart;
      bool include_trials = true;
      if (b.contains("include_trials")) {
        if (!b["include_trials"].is_boolean()) throw wire::BodyError("'include_trials' must be a boolean");
        include_trials = b["include_trials"].get<bool>();
      }
      return {200, wire::encode(run_accuracy_experiment(opt), include_trials)};
    }
    return not_found("unknown experiment '" + kind + "'");
  }

  // ---- snapshot persistence ----

  void save_snapshot() {
    if (options_.snapshot_path.empty()) return;
    std::lock_guard io(snapshot_mutex_);
    json doc{{"last_id", 0}, {"sessions", json::array()}};
    {
      std::shared_lock lock(sessions_mutex_);
      doc["last_id"] = last_id_;
      for (const auto& [id, session] : sessions_) {
        const auto s = session->snapshot();
        doc["sessions"].push_back({{"id", s->id},
                                   {"name", s->name},
                                   {"seq", s->seq},
                                   {"tubes", wire::encode(std::span<const TubeSpec>(s->tubes))},
                                   {"axes", wire::encode(s->axes)},
                                   {"joints", wire::encode(s->joints)},
                                   {"registration", s->registration ? wire::encode(*s->registration) : json(nullptr)}});
      }
    }
    const std::string tmp = options_.snapshot_path + ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      out << doc.dump(2) << '\n';
      if (!out) throw Error(ErrorCode::invalid_input, "cannot write snapshot " + tmp);
    }
    std::filesystem::rename(tmp, options_.snapshot_path);
  }

  void load_snapshot() {
    std::ifstream in(options_.snapshot_path);
    const json doc = json::parse(in);
    last_id_ = doc.at("last_id").get<std::uint64_t>();
    for (const auto& s : doc.at("sessions")) {
      RobotDescription desc;
      desc.name = s.at("name").get<std::string>();
      desc.tubes = wire::decode_tubes(s.at("tubes"));
      std::vector<AxisAssignment> axes;
      for (const auto& a : s.at("axes")) axes.push_back(wire::decode_axis(a));
      desc.axes = AxisMap(std::move(axes));
      desc.joints = wire::decode_joints(s.at("joints"));
      std::optional<FrameRegistration> reg;
      if (!s.at("registration").is_null()) {
        reg.emplace();
        reg->tracker_to_base = wire::decode_pose(s["registration"].at("tracker_to_base"));
        reg->fit_rmse = s["registration"].at("fit_rmse").get<double>();
        reg->pairs = wire::decode_point_pairs(s["registration"].at("pairs"));
      }
      const std::string id = s.at("id").get<std::string>();
      sessions_.emplace(id, std::make_shared<Session>(id, desc, reg, s.at("seq").get<std::uint64_t>()));
    }
  }

  Options options_;
  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t last_id_ = 0;
  std::mutex snapshot_mutex_;
};

}  // namespace ctrkit::service
