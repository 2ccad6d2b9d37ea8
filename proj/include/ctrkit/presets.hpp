#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "ctrkit/tube.hpp"

namespace ctrkit {

struct Robot {
  std::vector<TubeSpec> tubes;
  JointConfig joints;
};

// Canonical n-tube robot: every tube but the innermost exposes a straight
// stretch and then its whole curved section beyond its outer neighbour; the
// innermost tube exposes only its curved section, which starts at the tip of
// its outer neighbour (at the front plate when n = 1). This gives 2n - 1 links.
inline Robot canonical_robot(int n, double theta_deg = 0.0) {
  Robot r;
  double previous_tip = 0.0;
  for (int k = 1; k <= n; ++k) {
    const bool innermost = k == n;
    const double od = 3.0 - 0.5 * (k - 1);
    const double curved = innermost ? 60.0 : 40.0;
    const double tip = innermost ? previous_tip + curved : (k == 1 ? 100.0 : previous_tip + 60.0);
    r.tubes.emplace_back(k, 50.0, od, od - 0.4, 1.0 / 80.0, tip - curved + 100.0, curved);
    r.joints.translations.push_back(tip);
    r.joints.rotations.push_back(theta_deg);
    previous_tip = tip;
  }
  return r;
}

// Random tube set with valid clearances and a random valid configuration.
template <class Rng>
Robot random_robot(int n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Robot r;
  double od = 3.5;
  for (int k = 1; k <= n; ++k) {
    const double id = od - 0.2 - 0.3 * u(rng);
    const double curved = 20.0 + 80.0 * u(rng);
    const double kappa = u(rng) < 0.1 ? 0.0 : (0.002 + 0.03 * u(rng));
    r.tubes.emplace_back(k, 30.0 + 50.0 * u(rng), od, id, std::min(kappa, 6.0 / curved), 40.0 + 120.0 * u(rng),
                         curved);
    od = id - 0.05;
  }
  // Deploy from the innermost tube outward so telescoping holds.
  r.joints.translations.assign(static_cast<std::size_t>(n), 0.0);
  r.joints.rotations.assign(static_cast<std::size_t>(n), 0.0);
  double limit = 1e300;
  for (int k = n - 1; k >= 0; --k) {
    const auto i = static_cast<std::size_t>(k);
    limit = std::min(limit, r.tubes[i].total_length());
    r.joints.translations[i] = (0.2 + 0.8 * u(rng)) * limit;
    limit = r.joints.translations[i];
    r.joints.rotations[i] = -180.0 + 360.0 * u(rng);
  }
  return r;
}

}  // namespace ctrkit
