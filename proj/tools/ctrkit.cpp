// ctrkit command-line front end.
//
// Exit status: 0 success, 1 validation error (bad robot file, invalid joints,
// rejected G-code...), 2 usage error.

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "ctrkit/actuation.hpp"
#include "ctrkit/kinematics.hpp"
#include "ctrkit/metrology.hpp"
#include "ctrkit/robot_file.hpp"
#include "ctrkit/serialization.hpp"
#include "ctrkit/service/gcode_server.hpp"
#include "ctrkit/service/http_server.hpp"

using namespace ctrkit;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string robot_file;
  std::string joints;
  bool as_json = false;
};

RobotDescription load(const Common& c) { return load_robot_description(c.robot_file); }

JointConfig joints_for(const RobotDescription& d, const std::string& arg) {
  if (arg.empty()) return d.joints ? *d.joints : d.home();
  JointConfig j = parse_joint_args(arg, d.home());
  validate_joints(d.tubes, j);
  return j;
}

Eigen::Vector3d parse_point(const std::string& text) {
  std::stringstream ss(text);
  std::string cell;
  std::vector<double> v;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(cell, &used));
      if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw UsageError("expected x,y,z but got '" + text + "'");
    }
  }
  if (v.size() != 3) throw UsageError("expected x,y,z but got '" + text + "'");
  return {v[0], v[1], v[2]};
}

std::vector<Eigen::Vector3d> parse_points(const std::string& text) {
  std::vector<Eigen::Vector3d> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.find_first_not_of(" \t") != std::string::npos) out.push_back(parse_point(item));
  }
  return out;
}

void print_links(const std::vector<Link>& links) {
  std::printf("%4s %10s %10s %12s %10s %10s  %s\n", "link", "start", "length", "curvature", "plane", "abs_plane",
              "tubes");
  for (std::size_t k = 0; k < links.size(); ++k) {
    const auto& l = links[k];
    std::string members;
    for (const auto& m : l.members) {
      if (!members.empty()) members += ' ';
      members += std::to_string(m.tube) + (m.section == Section::curved ? "c" : "s");
    }
    std::printf("%4zu %10.4f %10.4f %12.8f %10.4f %10.4f  %s\n", k + 1, l.start, l.arc_length, l.curvature,
                l.plane_angle, l.absolute_plane_angle, members.c_str());
  }
}

void print_pose(const Pose& p) {
  std::printf("tip position  %.9f %.9f %.9f\n", p.translation.x(), p.translation.y(), p.translation.z());
  for (int r = 0; r < 3; ++r) {
    std::printf("%s  % .9f % .9f % .9f\n", r == 0 ? "tip rotation" : "            ", p.rotation(r, 0),
                p.rotation(r, 1), p.rotation(r, 2));
  }
}

void print_record(const ExperimentRecord& r) {
  std::printf("%s experiment\n", r.kind.c_str());
  for (std::size_t k = 0; k < r.predicted.size(); ++k) {
    const auto& p = r.predicted[k];
    std::printf("predicted[%zu]  %.6f %.6f %.6f", k, p.x(), p.y(), p.z());
    if (k < r.measured.size()) {
      const auto& m = r.measured[k];
      std::printf("   measured %.6f %.6f %.6f   error %.6f", m.x(), m.y(), m.z(), r.error_norms[k]);
    }
    std::printf("\n");
  }
  if (r.bending_plane_angle) {
    std::printf("bending plane  %.6f deg\n", *r.bending_plane_angle);
    for (std::size_t k = 0; k < r.in_plane_tips.size(); ++k) {
      std::printf("in-plane tip[%zu]  r %.6f  z %.6f\n", k, r.in_plane_tips[k].x(), r.in_plane_tips[k].y());
    }
    std::printf("coplanarity residual  %.3e mm\n", r.coplanarity_residual);
  }
  if (!r.link_angles_before.empty()) {
    std::printf("%4s %12s %12s\n", "link", "before", "after");
    for (std::size_t k = 0; k < r.link_angles_before.size(); ++k) {
      const double after = k < r.link_angles_after.size() ? r.link_angles_after[k] : 0.0;
      std::printf("%4zu %12.6f %12.6f\n", k + 1, r.link_angles_before[k], after);
    }
    if (r.distal_angle_change) std::printf("distal plane change  %.6f deg\n", *r.distal_angle_change);
  }
}

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

volatile std::sig_atomic_t g_stop = 0;

void wait_for_signal() {
  std::signal(SIGINT, [](int) { g_stop = 1; });
  std::signal(SIGTERM, [](int) { g_stop = 1; });
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ctrkit: concentric tube robot kinematics, virtual controller and experiments"};
  app.require_subcommand(1);
  Common c;
  std::function<int()> action;

  auto add_robot = [&](CLI::App* sub, bool with_joints = true) {
    sub->add_option("robot-file", c.robot_file, "Robot description file")->required();
    if (with_joints) {
      sub->add_option("--joints,-j", c.joints, "Joint values, e.g. \"r=100,160;t=0,-45\", or \"home\"");
    }
    sub->add_flag("--json", c.as_json, "Machine-readable output");
  };

  // validate
  auto* validate = app.add_subcommand("validate", "Check a robot description file");
  add_robot(validate, false);
  validate->callback([&] {
    action = [&] {
      const auto d = load(c);
      const JointConfig j = joints_for(d, "");
      const auto links = partition_links(d.tubes, j);
      if (c.as_json) {
        emit({{"name", d.name},
              {"tubes", wire::encode(std::span<const TubeSpec>(d.tubes))},
              {"axes", wire::encode(d.axes)},
              {"joints", wire::encode(j)},
              {"links", links.size()}});
      } else {
        std::printf("%s: ok (%zu tubes, %zu links at %s configuration)\n", c.robot_file.c_str(), d.tubes.size(),
                    links.size(), d.joints ? "the given" : "the homed");
      }
      return 0;
    };
  });

  // links
  auto* links = app.add_subcommand("links", "Partition the backbone into constant-curvature links");
  add_robot(links);
  links->callback([&] {
    action = [&] {
      const auto d = load(c);
      const auto fk = forward_kinematics(d.tubes, joints_for(d, c.joints));
      if (c.as_json) emit(wire::encode(fk.links));
      else print_links(fk.links);
      return 0;
    };
  });

  // fk
  auto* fk_cmd = app.add_subcommand("fk", "Forward kinematics: tip pose and link table");
  add_robot(fk_cmd);
  fk_cmd->callback([&] {
    action = [&] {
      const auto d = load(c);
      const auto fk = forward_kinematics(d.tubes, joints_for(d, c.joints));
      if (c.as_json) {
        emit(wire::encode(fk));
      } else {
        print_pose(fk.tip);
        print_links(fk.links);
      }
      return 0;
    };
  });

  // backbone
  double ds = 1.0;
  auto* backbone = app.add_subcommand("backbone", "Sample the backbone centerline (CSV)");
  add_robot(backbone);
  backbone->add_option("--ds", ds, "Sample spacing along the backbone, mm")->check(CLI::PositiveNumber);
  backbone->callback([&] {
    action = [&] {
      const auto d = load(c);
      const auto fk = forward_kinematics(d.tubes, joints_for(d, c.joints));
      const auto pts = sample_backbone(fk, ds);
      if (c.as_json) {
        emit(wire::encode_backbone(pts, ds));
      } else {
        std::cout << "s,x,y,z\n" << std::setprecision(17);
        for (const auto& p : pts) std::cout << p.s << ',' << p.point.x() << ',' << p.point.y() << ',' << p.point.z() << '\n';
      }
      return 0;
    };
  });

  // gcode emit | parse
  auto* gcode = app.add_subcommand("gcode", "Emit or parse G-code");
  gcode->require_subcommand(1);
  double feed = 1200.0;
  auto* gemit = gcode->add_subcommand("emit", "Print the G-code that moves to a joint configuration");
  add_robot(gemit);
  gemit->add_option("--feed", feed, "Feed rate, mm/min")->check(CLI::PositiveNumber);
  gemit->callback([&] {
    action = [&] {
      const auto d = load(c);
      const JointConfig j = joints_for(d, c.joints);
      const std::string text = emit_move(j, d.axes, feed);
      if (c.as_json) emit({{"gcode", text}, {"joints", wire::encode(quantize_to_print(j, d.axes))}});
      else std::cout << text;
      return 0;
    };
  });
  std::string parse_robot;
  std::vector<std::string> parse_lines;
  bool parse_json = false;
  auto* gparse = gcode->add_subcommand("parse", "Parse G-code lines (arguments, or stdin when none)");
  gparse->add_option("--robot", parse_robot, "Robot file providing the axis letters (default: X/A, Y/B, ...)");
  gparse->add_option("lines", parse_lines, "G-code lines");
  gparse->add_flag("--json", parse_json, "Machine-readable output");
  gparse->callback([&] {
    action = [&] {
      const AxisMap axes = parse_robot.empty() ? AxisMap::defaults(6) : load_robot_description(parse_robot).axes;
      std::vector<std::string> lines = parse_lines;
      if (lines.empty()) {
        for (std::string line; std::getline(std::cin, line);) lines.push_back(line);
      }
      int status = 0;
      json out = json::array();
      for (std::size_t k = 0; k < lines.size(); ++k) {
        try {
          const auto cmd = parse_line(lines[k], axes);
          if (parse_json) {
            out.push_back(wire::encode(cmd));
          } else {
            std::printf("%zu: %s\n", k + 1, wire::encode(cmd).dump().c_str());
          }
        } catch (const ParseError& e) {
          status = 1;
          if (parse_json) {
            json err = wire::encode_error(e.code(), e.what());
            err["line"] = k + 1;
            err["column"] = e.column();
            out.push_back(err);
          } else {
            std::fprintf(stderr, "%zu:%zu: %s: %s\n", k + 1, e.column(), std::string(to_string(e.code())).c_str(),
                         e.what());
          }
        }
      }
      if (parse_json) emit(out);
      return status;
    };
  });

  // experiment ...
  auto* experiment = app.add_subcommand("experiment", "Run a simulated experiment");
  experiment->require_subcommand(1);

  int trials = 90;
  std::uint64_t seed = 0;
  std::optional<double> sigma, sigma_rot, offset, offset_rot;
  std::string sampling = "step_lattice", acc_robot, trials_csv;
  int tube = 1;
  bool acc_json = false;
  auto* accuracy = experiment->add_subcommand("accuracy", "Commanded-vs-measured cart accuracy");
  accuracy->add_option("--n,--trials", trials, "Number of targets")->check(CLI::PositiveNumber);
  accuracy->add_option("--seed", seed, "Random seed");
  accuracy->add_option("--sigma", sigma, "Gaussian tracker noise, mm (also deg unless --sigma-rot)");
  accuracy->add_option("--sigma-rot", sigma_rot, "Gaussian tracker noise on rotation, deg");
  accuracy->add_option("--offset", offset, "Fixed tracker offset, mm (also deg unless --offset-rot)");
  accuracy->add_option("--offset-rot", offset_rot, "Fixed tracker offset on rotation, deg");
  accuracy->add_option("--sampling", sampling, "Target sampling")->check(CLI::IsMember({"step_lattice", "continuous"}));
  accuracy->add_option("--robot", acc_robot, "Robot file providing the cart (default: X/A, 800 steps/mm, 8.888 steps/deg)");
  accuracy->add_option("--tube", tube, "Cart of this tube (with --robot)");
  accuracy->add_option("--trials-csv", trials_csv, "Write per-trial targets and readings to this CSV file");
  accuracy->add_flag("--json", acc_json, "Machine-readable output");
  accuracy->callback([&] {
    action = [&] {
      if ((sigma || sigma_rot) && (offset || offset_rot)) throw UsageError("--sigma and --offset are exclusive");
      AccuracyOptions opt;
      opt.trials = trials;
      opt.seed = seed;
      opt.sampling = sampling == "continuous" ? TargetSampling::continuous : TargetSampling::step_lattice;
      if (sigma || sigma_rot) opt.noise = NoiseModel::gaussian(sigma.value_or(0.0), sigma_rot.value_or(sigma.value_or(0.0)));
      if (offset || offset_rot) opt.noise = NoiseModel::offset(offset.value_or(0.0), offset_rot.value_or(offset.value_or(0.0)));
      if (!acc_robot.empty()) {
        const auto desc = load_robot_description(acc_robot);
        const auto* cart = desc.axes.for_tube(tube);
        if (!cart) throw Error(ErrorCode::invalid_input, "no tube " + std::to_string(tube));
        opt.cart = *cart;
      }
      const auto report = run_accuracy_experiment(opt);
      if (!trials_csv.empty()) {
        std::ofstream out(trials_csv);
        if (!out) throw Error(ErrorCode::invalid_input, "cannot write " + trials_csv);
        out << "trial,target_translation,target_rotation,measured_translation,measured_rotation,"
               "residual_translation,residual_rotation\n"
            << std::setprecision(17);
        for (std::size_t k = 0; k < report.trials.size(); ++k) {
          const auto& t = report.trials[k];
          out << k << ',' << t.target_translation << ',' << t.target_rotation << ',' << t.measured_translation << ','
              << t.measured_rotation << ',' << t.residual_translation << ',' << t.residual_rotation << '\n';
        }
      }
      if (acc_json) {
        emit(wire::encode(report));
      } else {
        std::printf("trials             %d\n", report.n_trials);
        std::printf("rmse translation   %.6f mm\n", report.rmse_translation);
        std::printf("rmse rotation      %.6f deg\n", report.rmse_rotation);
      }
      return 0;
    };
  });

  double delta_rho = 10.0, delta_theta = 90.0;
  std::string measured;
  auto* in_plane = experiment->add_subcommand("in-plane", "Translate the innermost tube with all tubes in one plane");
  add_robot(in_plane);
  in_plane->add_option("--delta-rho", delta_rho, "Translation of the innermost tube, mm");
  in_plane->add_option("--ds", ds, "Backbone step for the coplanarity check, mm")->check(CLI::PositiveNumber);
  in_plane->add_option("--measured", measured, "Measured base-frame tips \"x,y,z;x,y,z\"");
  in_plane->callback([&] {
    action = [&] {
      const auto d = load(c);
      auto rec = in_plane_experiment(d.tubes, joints_for(d, c.joints), delta_rho, ds);
      if (!measured.empty()) attach_measurements(rec, parse_points(measured));
      if (c.as_json) emit(wire::encode(rec));
      else print_record(rec);
      return 0;
    };
  });

  auto* out_of_plane = experiment->add_subcommand("out-of-plane", "Rotate one tube and follow the bending planes");
  add_robot(out_of_plane);
  out_of_plane->add_option("--delta-theta", delta_theta, "Rotation, deg");
  out_of_plane->add_option("--tube", tube, "Tube to rotate (1 = outermost)");
  out_of_plane->add_option("--measured", measured, "Measured base-frame tips \"x,y,z;x,y,z\"");
  out_of_plane->callback([&] {
    action = [&] {
      const auto d = load(c);
      auto rec = out_of_plane_experiment(d.tubes, joints_for(d, c.joints), delta_theta, tube);
      if (!measured.empty()) attach_measurements(rec, parse_points(measured));
      if (c.as_json) emit(wire::encode(rec));
      else print_record(rec);
      return 0;
    };
  });

  std::string tracker_csv, base_csv, tip;
  bool simulate = false;
  int poses = 90;
  double track_sigma = 0.1;
  auto* tracking = experiment->add_subcommand("tracking", "Compare tracked tips with the model");
  add_robot(tracking);
  tracking->add_option("--tracker-points", tracker_csv, "Fiducials in the tracker frame (frame_label,x,y,z)");
  tracking->add_option("--base-points", base_csv, "Same fiducials in the base frame (frame_label,x,y,z)");
  tracking->add_option("--tip", tip, "Tracked tip in the tracker frame \"x,y,z\"");
  tracking->add_flag("--simulate", simulate, "Simulated session with random poses and tracker noise");
  tracking->add_option("--poses", poses, "Simulated poses")->check(CLI::PositiveNumber);
  tracking->add_option("--sigma", track_sigma, "Simulated tracker noise, mm");
  tracking->add_option("--seed", seed, "Random seed");
  tracking->callback([&] {
    action = [&] {
      const auto d = load(c);
      if (simulate) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<JointConfig> configs;
        const JointConfig home = d.home();
        for (int k = 0; k < poses; ++k) {
          JointConfig j = home;
          // Random reachable cart positions, deployed outermost first.
          double previous = 0.0;
          for (std::size_t t = 0; t < d.tubes.size(); ++t) {
            const auto* a = d.axes.for_tube(static_cast<int>(t) + 1);
            const double lo = std::max({previous, a->home_offset + a->translation_min, 0.0});
            const double hi = std::min(d.tubes[t].total_length(), a->home_offset + a->translation_max);
            if (hi < lo) throw Error(ErrorCode::invalid_configuration, "no reachable telescoping configuration");
            j.translations[t] = lo + (hi - lo) * u(rng);
            j.rotations[t] = a->rotation_min + (a->rotation_max - a->rotation_min) * u(rng);
            previous = j.translations[t];
          }
          configs.push_back(j);
        }
        Pose truth;
        truth.rotation = Eigen::AngleAxisd(0.7, Eigen::Vector3d(0.2, 1.0, 0.4).normalized()).toRotationMatrix();
        truth.translation = Eigen::Vector3d(-250.0, 40.0, 800.0);
        const auto summary = simulate_tracking(d.tubes, configs, truth, track_sigma, seed);
        if (c.as_json) {
          json recs = json::array();
          for (const auto& r : summary.records) recs.push_back(wire::encode(r));
          emit({{"registration", wire::encode(summary.registration)},
                {"mean_error", summary.mean_error},
                {"max_error", summary.max_error},
                {"records", recs}});
        } else {
          std::printf("poses              %zu\n", summary.records.size());
          std::printf("registration rmse  %.6f mm\n", summary.registration.fit_rmse);
          std::printf("mean tip error     %.6f mm\n", summary.mean_error);
          std::printf("max tip error      %.6f mm\n", summary.max_error);
        }
        return 0;
      }
      if (tracker_csv.empty() || base_csv.empty() || tip.empty()) {
        throw UsageError("tracking needs --tracker-points, --base-points and --tip (or --simulate)");
      }
      auto read = [](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw Error(ErrorCode::invalid_input, "cannot open " + path);
        return read_points_csv(in);
      };
      const auto tracker = read(tracker_csv);
      const auto base = read(base_csv);
      std::vector<PointPair> pairs;
      for (const auto& t : tracker) {
        const auto it = std::find_if(base.begin(), base.end(), [&](const LabeledPoint& b) { return b.label == t.label; });
        if (it != base.end()) pairs.push_back({t.point, it->point});
      }
      const auto reg = register_frames(pairs);
      const auto rec = tip_tracking_comparison(d.tubes, joints_for(d, c.joints), reg, parse_point(tip));
      if (c.as_json) {
        json out = wire::encode(rec);
        out["registration"] = wire::encode(reg);
        emit(out);
      } else {
        std::printf("registration rmse  %.6f mm (%zu pairs)\n", reg.fit_rmse, pairs.size());
        print_record(rec);
      }
      return 0;
    };
  });

  // serve
  std::string host = env_or("CTRKIT_HOST", "127.0.0.1");
  int port = std::atoi(env_or("CTRKIT_PORT", std::to_string(service::kDefaultPort)).c_str());
  std::string snapshot;
  auto* serve = app.add_subcommand("serve", "Run the HTTP/WebSocket service");
  serve->add_option("--host", host, "Bind address (env CTRKIT_HOST)");
  serve->add_option("--port", port, "Port (env CTRKIT_PORT)")->check(CLI::Range(0, 65535));
  serve->add_option("--snapshot", snapshot, "Persist sessions to this JSON file");
  serve->callback([&] {
    action = [&] {
      service::Service svc({snapshot});
      service::HttpServer server(svc, host, static_cast<unsigned short>(port));
      server.start();
      std::fprintf(stderr, "ctrkit service on http://%s:%u (OpenAPI at /spec)\n", host.c_str(), server.port());
      wait_for_signal();
      server.stop();
      return 0;
    };
  });

  // firmware
  std::string fw_robot;
  int fw_port = service::kDefaultGcodePort;
  auto* firmware = app.add_subcommand("firmware", "Run a virtual controller on a line-based G-code TCP socket");
  firmware->add_option("--robot", fw_robot, "Robot file providing the axes (default: one tube, X/A)");
  firmware->add_option("--host", host, "Bind address (env CTRKIT_HOST)");
  firmware->add_option("--port", fw_port, "Port")->check(CLI::Range(0, 65535));
  firmware->callback([&] {
    action = [&] {
      VirtualController controller(fw_robot.empty() ? AxisMap::defaults(1) : load_robot_description(fw_robot).axes);
      service::GcodeServer server(host, static_cast<unsigned short>(fw_port), controller);
      server.start();
      std::fprintf(stderr, "virtual controller on %s:%u\n", host.c_str(), server.port());
      wait_for_signal();
      server.stop();
      return 0;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    return action ? action() : 2;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", std::string(to_string(e.code())).c_str(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
