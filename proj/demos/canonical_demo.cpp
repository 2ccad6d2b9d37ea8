// Canonical robots with 1..4 tubes: link table and tip, then the same
// two-tube robot with the inner tube turned through a half revolution.
#include <cstdio>

#include "ctrkit/kinematics.hpp"
#include "ctrkit/presets.hpp"

using namespace ctrkit;

int main() {
  for (int n = 1; n <= 4; ++n) {
    const Robot r = canonical_robot(n);
    const auto fk = forward_kinematics(r.tubes, r.joints);
    std::printf("%d tube(s): %zu links, tip %.3f %.3f %.3f\n", n, fk.links.size(), fk.tip.translation.x(),
                fk.tip.translation.y(), fk.tip.translation.z());
    for (const auto& l : fk.links) {
      std::printf("    s=%7.2f  l=%6.2f  k=%.6f  phi=%7.2f\n", l.start, l.arc_length, l.curvature,
                  l.absolute_plane_angle);
    }
  }

  Robot r = canonical_robot(2);
  std::printf("\ninner tube rotation sweep\n");
  for (int t = 0; t <= 180; t += 30) {
    r.joints.rotations[1] = t;
    const auto fk = forward_kinematics(r.tubes, r.joints);
    std::printf("  theta2=%4d  tip %8.3f %8.3f %8.3f\n", t, fk.tip.translation.x(), fk.tip.translation.y(),
                fk.tip.translation.z());
  }
}
