// Acceptance run: one PASS/FAIL line per headline criterion. Exit status is
// the number of failed criteria (0 when everything passes).
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ctrkit/actuation.hpp"
#include "ctrkit/gcode.hpp"
#include "ctrkit/kinematics.hpp"
#include "ctrkit/metrology.hpp"
#include "ctrkit/presets.hpp"
#include "oracle.hpp"

using namespace ctrkit;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(const char* name, const std::function<Outcome()>& check) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s  %-28s %s  [%.2f s]\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Eigen::Matrix3d rot_z(double deg) {
  return Eigen::AngleAxisd(deg_to_rad(deg), Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

}  // namespace

int main() {
  criterion("link-count-2n-1", [] {
    const auto t0 = Clock::now();
    std::string counts;
    bool ok = true;
    for (int n = 1; n <= 4; ++n) {
      const Robot r = canonical_robot(n);
      const auto links = partition_links(r.tubes, r.joints);
      ok = ok && static_cast<int>(links.size()) == 2 * n - 1;
      counts += fmt("%sn=%d:%zu", n > 1 ? " " : "", n, links.size());
    }
    const double t = seconds_since(t0);
    return Outcome{ok && t < 1.0, fmt("links %s (want 1 3 5 7), %.4f s < 1 s", counts.c_str(), t)};
  });

  criterion("fk-vs-integration-oracle", [] {
    std::mt19937_64 rng(20240611);
    double worst = 0.0, fk_time = 0.0;
    const auto t0 = Clock::now();
    for (int trial = 0; trial < 1000; ++trial) {
      const Robot r = random_robot(2 + trial % 2, rng);
      const auto f0 = Clock::now();
      const auto fk = forward_kinematics(r.tubes, r.joints);
      fk_time += seconds_since(f0);
      const Eigen::Vector3d ref = oracle::integrate_tip(r.tubes, r.joints, 20000);
      worst = std::max(worst, (fk.tip.translation - ref).norm());
    }
    const double total = seconds_since(t0);
    return Outcome{worst < 1e-6 && total < 60.0,
                   fmt("1000 configs, max |tip - oracle| = %.2e mm < 1e-6; fk %.3f s, total %.1f s < 60 s", worst,
                       fk_time, total)};
  });

  criterion("equilibrium-formulas", [] {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> ei(1e-3, 1e3), k(0.0, 0.1), scale(1e-3, 1e3), ang(-720, 720);
    int bound_violations = 0;
    double worst_scale = 0.0;
    for (int trial = 0; trial < 100000; ++trial) {
      std::vector<BendingTerm> terms(1 + trial % 5);
      double lo = 1e9, hi = -1.0;
      for (auto& t : terms) {
        t = {ei(rng), k(rng), 0.0};
        lo = std::min(lo, t.precurvature);
        hi = std::max(hi, t.precurvature);
      }
      const double base = in_plane_curvature(terms);
      if (base < lo || base > hi) ++bound_violations;
      const double c = scale(rng);
      for (auto& t : terms) t.stiffness *= c;
      if (base > 0.0) worst_scale = std::max(worst_scale, std::abs(in_plane_curvature(terms) - base) / base);
    }
    int single_mismatch = 0;
    for (int trial = 0; trial < 10000; ++trial) {
      const BendingTerm t{ei(rng), 1e-4 + k(rng), ang(rng)};
      if (equilibrium_plane(std::span<const BendingTerm>(&t, 1)).phi != normalize_deg(t.angle_deg)) ++single_mismatch;
    }
    // Equal contributions at a and b: the plane bisects the short arc.
    double worst_bisector = 0.0;
    std::uniform_real_distribution<double> base_angle(-180, 180), sep(-179, 179);
    for (int trial = 0; trial < 10000; ++trial) {
      const double a = base_angle(rng), d = sep(rng), e = ei(rng), kk = 1e-3 + k(rng);
      const std::vector<BendingTerm> pair{{e, kk, a}, {e, kk, a + d}};
      const double err = normalize_deg(equilibrium_plane(pair).phi - (a + d / 2));
      worst_bisector = std::max(worst_bisector, std::abs(err));
    }
    return Outcome{bound_violations == 0 && worst_scale <= 1e-12 && single_mismatch == 0 && worst_bisector < 1e-9,
                   fmt("1e5 cases: %d bound violations, scale drift %.1e <= 1e-12; single tube phi != theta %d/1e4; "
                       "bisector err %.1e deg",
                       bound_violations, worst_scale, single_mismatch, worst_bisector)};
  });

  criterion("straight-limit-continuity", [] {
    double worst = 0.0;
    for (double l : {1.0, 10.0, 100.0}) {
      worst = std::max(worst, (link_pose(l, 1e-12, 0.0).translation - Eigen::Vector3d(0, 0, l)).norm());
    }
    return Outcome{worst < 1e-8, fmt("max |p(1e-12, l) - [0,0,l]| = %.2e mm < 1e-8", worst)};
  });

  criterion("gcode-round-trip", [] {
    const AxisMap axes = AxisMap::defaults(3);
    VirtualController controller(axes);
    controller.execute("G28");
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> r(0, 50), t(-180, 180);
    const double bound_mm = 5e-4 + 0.5 / 800.0, bound_deg = 5e-4 + 0.5 / 8.888;
    double worst_mm = 0.0, worst_deg = 0.0;
    int rejected = 0;
    for (int trial = 0; trial < 10000; ++trial) {
      const JointConfig j{{r(rng), r(rng), r(rng)}, {t(rng), t(rng), t(rng)}};
      const std::string text = emit_move(j, axes, 1200);
      std::size_t pos = 0;
      while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        const auto cmd = parse_line(std::string_view(text).substr(pos, nl - pos), axes);
        if (!controller.apply(cmd).ok) ++rejected;
        pos = nl + 1;
      }
      const JointConfig actual = controller.joints(true);
      for (std::size_t k = 0; k < 3; ++k) {
        worst_mm = std::max(worst_mm, std::abs(actual.translations[k] - j.translations[k]));
        worst_deg = std::max(worst_deg, std::abs(actual.rotations[k] - j.rotations[k]));
      }
    }
    return Outcome{rejected == 0 && worst_mm <= bound_mm && worst_deg <= bound_deg,
                   fmt("1e4 configs, %d rejected; max err %.2e mm <= %.2e, %.2e deg <= %.2e", rejected, worst_mm,
                       bound_mm, worst_deg, bound_deg)};
  });

  criterion("accuracy-harness", [] {
    AccuracyOptions opt;
    opt.trials = 10000;
    opt.seed = 7;
    opt.noise = NoiseModel::gaussian(0.10, 0.08);
    const auto noisy = run_accuracy_experiment(opt);
    const double rt = noisy.rmse_translation / 0.10 - 1.0, rr = noisy.rmse_rotation / 0.08 - 1.0;

    opt.noise = NoiseModel::none();
    const auto lattice = run_accuracy_experiment(opt);
    opt.sampling = TargetSampling::continuous;
    const auto cont = run_accuracy_experiment(opt);
    // Half a motor step on the step lattice; plus the print quantum off it.
    const double q_mm = 0.5 / 800.0, q_deg = 0.5 / 8.888;
    const bool zero_ok = lattice.rmse_translation <= q_mm && lattice.rmse_rotation <= q_deg &&
                         cont.rmse_translation <= 5e-4 + q_mm && cont.rmse_rotation <= 5e-4 + q_deg;
    return Outcome{std::abs(rt) <= 0.02 && std::abs(rr) <= 0.02 && zero_ok,
                   fmt("sigma 0.10/0.08, n=1e4: rmse %.5f mm (%+.2f%%), %.5f deg (%+.2f%%); zero noise: lattice "
                       "%.1e mm %.1e deg, continuous %.1e mm %.1e deg",
                       noisy.rmse_translation, 100 * rt, noisy.rmse_rotation, 100 * rr, lattice.rmse_translation,
                       lattice.rmse_rotation, cont.rmse_translation, cont.rmse_rotation)};
  });

  criterion("registration", [] {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(-200, 200);
    double worst_r = 0.0, worst_t = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
      const Eigen::Matrix3d R = q.normalized().toRotationMatrix();
      const Eigen::Vector3d t(u(rng), u(rng), u(rng));
      std::vector<PointPair> pairs;
      for (int k = 0; k < 3 + trial % 10; ++k) {
        const Eigen::Vector3d p(u(rng), u(rng), u(rng));
        pairs.push_back({p, R * p + t});
      }
      const auto reg = register_frames(pairs);
      worst_r = std::max(worst_r, (reg.tracker_to_base.rotation - R).norm());
      worst_t = std::max(worst_t, (reg.tracker_to_base.translation - t).norm());
    }
    bool rejected = false;
    try {
      std::vector<PointPair> line;
      for (int k = 0; k < 5; ++k) line.push_back({Eigen::Vector3d(k, 2.0 * k, -k), Eigen::Vector3d(k, 0, 0)});
      register_frames(line);
    } catch (const Error&) {
      rejected = true;
    }
    return Outcome{worst_r < 1e-9 && worst_t < 1e-9 && rejected,
                   fmt("1000 transforms: |dR| %.1e, |dt| %.1e mm < 1e-9; collinear %s", worst_r, worst_t,
                       rejected ? "rejected" : "ACCEPTED")};
  });

  criterion("coplanarity-equivariance", [] {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> ang(-180, 180), delta(-360, 360), drho(-20, 20);
    double worst_plane = 0.0, worst_exp = 0.0, worst_shift = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
      Robot r = random_robot(1 + trial % 4, rng);
      const double theta = ang(rng);
      for (auto& t : r.joints.rotations) t = theta;
      const auto [s, c] = sincos_deg(theta);
      for (const auto& p : sample_backbone(r.tubes, r.joints, 0.5)) {
        worst_plane = std::max(worst_plane, std::abs(-s * p.point.x() + c * p.point.y()));
      }
      // Innermost tube moved by a step that keeps the configuration valid.
      const auto n = r.tubes.size();
      const double lo = n > 1 ? r.joints.translations[n - 2] : 0.0;
      const double hi = r.tubes.back().total_length();
      const double d = std::clamp(drho(rng), lo - r.joints.translations.back(), hi - r.joints.translations.back());
      worst_exp = std::max(worst_exp, in_plane_experiment(r.tubes, r.joints, d, 0.5).coplanarity_residual);

      Robot shifted = random_robot(1 + trial % 4, rng);
      const Eigen::Vector3d tip = forward_kinematics(shifted.tubes, shifted.joints).tip.translation;
      const double dt = delta(rng);
      for (auto& t : shifted.joints.rotations) t += dt;
      const Eigen::Vector3d moved = forward_kinematics(shifted.tubes, shifted.joints).tip.translation;
      worst_shift = std::max(worst_shift, (moved - rot_z(dt) * tip).norm());
    }
    return Outcome{worst_plane < 1e-9 && worst_exp < 1e-9 && worst_shift < 1e-9,
                   fmt("500 robots: backbone off-plane %.1e mm, in-plane experiment %.1e mm, theta-shift %.1e mm "
                       "(all < 1e-9)",
                       worst_plane, worst_exp, worst_shift)};
  });

  std::printf("%d criteria failed\n", failures);
  return failures;
}
