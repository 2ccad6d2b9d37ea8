#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "ctrkit/kinematics.hpp"
#include "ctrkit/presets.hpp"
#include "oracle.hpp"

using namespace ctrkit;

namespace {

// Spec-sheet tube with the given lengths; geometry is irrelevant to these tests.
TubeSpec tube(int id, double kappa, double straight, double curved, double od = 3.0) {
  return TubeSpec(id, 50.0, od, od - 0.4, kappa, straight, curved);
}

JointConfig joints(std::vector<double> r, std::vector<double> t) { return {std::move(r), std::move(t)}; }

std::vector<double> link_ends(const std::vector<Link>& links) {
  std::vector<double> out;
  for (const auto& l : links) out.push_back(l.start + l.arc_length);
  return out;
}

}  // namespace

TEST(TubeSpec, SecondMomentIsAnnulusFormula) {
  const TubeSpec t(1, 50.0, 2.0, 1.6, 0.01, 100.0, 40.0);
  const double expected = M_PI / 64.0 * (16.0 - 6.5536);
  EXPECT_NEAR(t.second_moment(), expected, 1e-12 * expected);
  EXPECT_DOUBLE_EQ(t.stiffness(), 50e3 * t.second_moment());
}

TEST(TubeSpec, RejectsInvalidGeometry) {
  EXPECT_THROW(TubeSpec(1, 50.0, 1.0, 1.2, 0.01, 100, 40), Error);      // OD < ID
  EXPECT_THROW(TubeSpec(1, 50.0, 1.0, 0.0, 0.01, 100, 40), Error);      // ID = 0
  EXPECT_THROW(TubeSpec(1, 50.0, 1.0, 0.8, -0.01, 100, 40), Error);     // negative precurvature
  EXPECT_THROW(TubeSpec(1, 50.0, 1.0, 0.8, 0.1, 100, 70), Error);       // more than a full circle
  EXPECT_THROW(TubeSpec(1, 50.0, 1.0, 0.8, 0.01, 0.0, 40), Error);      // no straight section
  EXPECT_THROW(TubeSpec(1, 0.0, 1.0, 0.8, 0.01, 100, 40), Error);
}

TEST(TubeSpec, ClearanceIsChecked) {
  std::vector<TubeSpec> tubes{tube(1, 0.01, 100, 40, 2.0), tube(2, 0.01, 100, 40, 1.7)};  // ID(1) = 1.6 < 1.7
  try {
    validate_tubes(tubes);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_configuration);
  }
}

TEST(JointConfig, TelescopingAndLengthAreChecked) {
  std::vector<TubeSpec> tubes{tube(1, 0.01, 100, 40), tube(2, 0.01, 150, 60, 2.4)};
  EXPECT_NO_THROW(validate_joints(tubes, joints({100, 160}, {0, 0})));
  EXPECT_THROW(validate_joints(tubes, joints({120, 100}, {0, 0})), Error);
  EXPECT_THROW(validate_joints(tubes, joints({-1, 100}, {0, 0})), Error);
  EXPECT_THROW(validate_joints(tubes, joints({100, 211}, {0, 0})), Error);
  EXPECT_THROW(validate_joints(tubes, joints({100}, {0})), Error);
}

// ---- in_plane_curvature -------------------------------------------------

TEST(InPlaneCurvature, Examples) {
  const std::vector<BendingTerm> one{{5, 0.02}};
  EXPECT_EQ(in_plane_curvature(one), 0.02);
  const std::vector<BendingTerm> same{{3, 0.01}, {3, 0.01}};
  EXPECT_EQ(in_plane_curvature(same), 0.01);
  const std::vector<BendingTerm> mixed{{2, 0.010}, {1, 0.004}};
  EXPECT_NEAR(in_plane_curvature(mixed), 0.008, 1e-15);  // (0.020 + 0.004) / 3
}

TEST(InPlaneCurvature, Errors) {
  EXPECT_THROW(in_plane_curvature(std::vector<BendingTerm>{}), Error);
  const std::vector<BendingTerm> zero{{0, 0.01}};
  try {
    in_plane_curvature(zero);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_input);
  }
  const std::vector<BendingTerm> neg{{-1, 0.01}, {1, 0.01}};
  EXPECT_THROW(in_plane_curvature(neg), Error);
}

TEST(InPlaneCurvature, WeightedMeanBoundAndScaleInvariance) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ei(1e-3, 1e3), k(0.0, 0.1), scale(1e-3, 1e3);
  for (int trial = 0; trial < 5000; ++trial) {
    std::vector<BendingTerm> terms(1 + trial % 5);
    double lo = 1e9, hi = -1;
    for (auto& t : terms) {
      t = {ei(rng), k(rng), 0.0};
      lo = std::min(lo, t.precurvature);
      hi = std::max(hi, t.precurvature);
    }
    const double base = in_plane_curvature(terms);
    ASSERT_GE(base, lo);
    ASSERT_LE(base, hi);
    const double c = scale(rng);
    for (auto& t : terms) t.stiffness *= c;
    ASSERT_NEAR(in_plane_curvature(terms), base, 1e-12 * std::abs(base));
  }
}

// ---- equilibrium_plane --------------------------------------------------

TEST(EquilibriumPlane, Examples) {
  const std::vector<BendingTerm> single{{1, 0.01, 30}};
  const auto a = equilibrium_plane(single);
  EXPECT_EQ(a.phi, 30.0);
  EXPECT_EQ(a.resultant_curvature, 0.01);

  const std::vector<BendingTerm> quarter{{1, 0.01, 0}, {1, 0.01, 90}};
  EXPECT_NEAR(equilibrium_plane(quarter).phi, 45.0, 1e-12);

  // Vector-sum oracle: (2*0.01*(1,0) + 1*0.02*(0,1)) / 3.
  const std::vector<BendingTerm> weighted{{2, 0.01, 0}, {1, 0.02, 90}};
  const auto c = equilibrium_plane(weighted);
  EXPECT_NEAR(c.chi, 0.02 / 3, 1e-15);
  EXPECT_NEAR(c.gamma, 0.02 / 3, 1e-15);
  EXPECT_NEAR(c.phi, 45.0, 1e-12);
  EXPECT_NEAR(c.resultant_curvature, std::sqrt(2.0) * 0.02 / 3, 1e-15);

  const std::vector<BendingTerm> opposed{{1, 0.01, 0}, {1, 0.01, 180}};
  try {
    equilibrium_plane(opposed);
    FAIL();
  } catch (const DegeneratePlaneError& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate_plane);
    EXPECT_EQ(e.resultant_curvature(), 0.0);
  }
}

TEST(EquilibriumPlane, AllStraightIsDegenerate) {
  const std::vector<BendingTerm> straight{{1, 0.0, 10}, {2, 0.0, 50}};
  EXPECT_THROW(equilibrium_plane(straight), DegeneratePlaneError);
}

TEST(EquilibriumPlane, OpposedAtArbitraryAnglesIsDegenerate) {
  for (double a : {13.0, 47.5, 101.0, -170.0}) {
    const std::vector<BendingTerm> opposed{{1.5, 0.02, a}, {1.5, 0.02, a + 180.0}};
    EXPECT_THROW(equilibrium_plane(opposed), DegeneratePlaneError) << a;
  }
}

TEST(EquilibriumPlane, SingleTubeConsistencyAndNormalization) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(-720, 720), k(1e-4, 0.1), ei(1e-2, 1e2);
  for (int trial = 0; trial < 2000; ++trial) {
    const BendingTerm t{ei(rng), k(rng), ang(rng)};
    const auto p = equilibrium_plane(std::span<const BendingTerm>(&t, 1));
    ASSERT_EQ(p.phi, normalize_deg(t.angle_deg));
    ASSERT_EQ(p.resultant_curvature, t.precurvature);
    ASSERT_GT(p.phi, -180.0);
    ASSERT_LE(p.phi, 180.0);
  }
}

TEST(EquilibriumPlane, ResultantMatchesComponentsAndScaleInvariance) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ang(-180, 180), k(0, 0.05), ei(1e-2, 1e2), scale(1e-3, 1e3);
  for (int trial = 0; trial < 5000; ++trial) {
    std::vector<BendingTerm> terms(2 + trial % 3);
    for (auto& t : terms) t = {ei(rng), k(rng), ang(rng)};
    const auto p = equilibrium_plane(terms);
    const double r2 = p.chi * p.chi + p.gamma * p.gamma;
    ASSERT_NEAR(p.resultant_curvature * p.resultant_curvature, r2, 1e-12 * r2);
    const double c = scale(rng);
    for (auto& t : terms) t.stiffness *= c;
    const auto q = equilibrium_plane(terms);
    ASSERT_NEAR(q.chi, p.chi, 1e-12 * p.resultant_curvature);
    ASSERT_NEAR(q.gamma, p.gamma, 1e-12 * p.resultant_curvature);
    ASSERT_NEAR(q.resultant_curvature, p.resultant_curvature, 1e-12 * p.resultant_curvature);
    ASSERT_NEAR(normalize_deg(q.phi - p.phi), 0.0, 1e-9);
  }
}

// ---- link_pose -----------------------------------------------------------

TEST(LinkPose, Examples) {
  const Pose straight = link_pose(50, 0, 0);
  EXPECT_TRUE(straight.rotation.isApprox(Eigen::Matrix3d::Identity(), 1e-15));
  EXPECT_NEAR((straight.translation - Eigen::Vector3d(0, 0, 50)).norm(), 0.0, 1e-15);

  const double k = M_PI / 200.0;
  const Pose quarter = link_pose(100, k, 0);
  EXPECT_NEAR(quarter.translation.x(), 63.6620, 5e-5);
  EXPECT_NEAR(quarter.translation.y(), 0.0, 1e-12);
  EXPECT_NEAR(quarter.translation.z(), 63.6620, 5e-5);
  // Arc quadrature oracle, step 1e-4 of the length.
  EXPECT_LT((quarter.translation - oracle::integrate_arc(100, k, 0)).norm(), 1e-6);

  const Pose turned = link_pose(100, k, 90);
  EXPECT_NEAR(turned.translation.x(), 0.0, 1e-12);
  EXPECT_NEAR(turned.translation.y(), 63.6620, 5e-5);
  EXPECT_NEAR(turned.translation.z(), 63.6620, 5e-5);
}

TEST(LinkPose, MatchesClosedFormMatrix) {
  // R and p written out entry by entry.
  const double l = 37.0, k = 0.021, phi = 33.0;
  const double c = std::cos(phi * M_PI / 180), s = std::sin(phi * M_PI / 180);
  const double ck = std::cos(k * l), sk = std::sin(k * l);
  Eigen::Matrix3d R;
  R << c * ck, -s, c * sk, s * ck, c, s * sk, -sk, 0, ck;
  const Eigen::Vector3d p(c * (1 - ck) / k, s * (1 - ck) / k, sk / k);
  const Pose pose = link_pose(l, k, phi);
  EXPECT_LT((pose.rotation - R).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((pose.translation - p).norm(), 1e-12);
}

TEST(LinkPose, Errors) {
  EXPECT_THROW(link_pose(0, 0.01, 0), Error);
  EXPECT_THROW(link_pose(-1, 0.01, 0), Error);
  EXPECT_THROW(link_pose(1, -0.01, 0), Error);
}

TEST(LinkPose, StraightLimitIsContinuous) {
  for (double l : {1.0, 10.0, 100.0}) {
    const Pose p = link_pose(l, 1e-12, 0);
    EXPECT_LT((p.translation - Eigen::Vector3d(0, 0, l)).norm(), 1e-8);
    EXPECT_TRUE(p.translation.allFinite());
  }
  // Both branches around the threshold agree with an extended-precision reference.
  const double l = 100.0;
  for (double bend : {0.5e-7, 0.99e-7, 1.01e-7, 1e-6}) {
    const long double k = static_cast<long double>(bend) / l;
    const long double half = std::sin(static_cast<long double>(bend) / 2);
    const Eigen::Vector3d ref(static_cast<double>(2 * half * half / k), 0.0,
                              static_cast<double>(std::sin(static_cast<long double>(bend)) / k));
    EXPECT_LT((link_pose(l, bend / l, 0).translation - ref).norm(), 1e-13) << bend;
  }
}

TEST(LinkPose, Orthonormal) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> len(1e-3, 300), k(0, 0.1), ang(-180, 180);
  for (int trial = 0; trial < 5000; ++trial) {
    ASSERT_LT(link_pose(len(rng), k(rng), ang(rng)).orthonormality_error(), 1e-10);
  }
}

// ---- partition_links ----------------------------------------------------

TEST(PartitionLinks, SingleTube) {
  std::vector<TubeSpec> tubes{tube(1, 0.01, 100, 40)};
  const auto links = partition_links(tubes, joints({100}, {0}));
  ASSERT_EQ(links.size(), 2u);
  EXPECT_DOUBLE_EQ(links[0].arc_length, 60);
  EXPECT_EQ(links[0].members, (std::vector<LinkMember>{{1, Section::straight}}));
  EXPECT_DOUBLE_EQ(links[1].arc_length, 40);
  EXPECT_EQ(links[1].members, (std::vector<LinkMember>{{1, Section::curved}}));
}

TEST(PartitionLinks, CanonicalTwoTubeGivesThreeLinks) {
  std::vector<TubeSpec> tubes{tube(1, 0.01, 100, 40), tube(2, 0.01, 150, 60, 2.4)};
  const auto links = partition_links(tubes, joints({100, 160}, {0, 0}));
  ASSERT_EQ(links.size(), 3u);
  EXPECT_EQ(link_ends(links), (std::vector<double>{60, 100, 160}));
  EXPECT_EQ(links[0].members, (std::vector<LinkMember>{{1, Section::straight}, {2, Section::straight}}));
  EXPECT_EQ(links[1].members, (std::vector<LinkMember>{{1, Section::curved}, {2, Section::straight}}));
  EXPECT_EQ(links[2].members, (std::vector<LinkMember>{{2, Section::curved}}));
}

TEST(PartitionLinks, OverlappingCurvedSectionsGiveFourLinks) {
  std::vector<TubeSpec> tubes{tube(1, 0.01, 100, 50), tube(2, 0.01, 150, 60, 2.4)};
  const JointConfig j = joints({100, 150}, {0, 0});
  const auto links = partition_links(tubes, j);
  ASSERT_EQ(links.size(), 4u);
  EXPECT_EQ(link_ends(links), (std::vector<double>{50, 90, 100, 150}));
  // Brute-force scan at 1e-3 mm.
  const auto scanned = oracle::signature_boundaries(tubes, j, 1e-3);
  ASSERT_EQ(scanned.size(), links.size());
  for (std::size_t k = 0; k < scanned.size(); ++k) EXPECT_NEAR(scanned[k], link_ends(links)[k], 1e-3);
}

TEST(PartitionLinks, RetractedAndErrors) {
  std::vector<TubeSpec> tubes{tube(1, 0.01, 100, 40), tube(2, 0.01, 150, 60, 2.4)};
  EXPECT_TRUE(partition_links(tubes, joints({0, 0}, {0, 0})).empty());
  try {
    partition_links(tubes, joints({100, 90}, {0, 0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_configuration);
  }
}

TEST(PartitionLinks, CoincidentTransitionsMerge) {
  // Both tips coincide and both curved sections start at 60: two links only.
  std::vector<TubeSpec> tubes{tube(1, 0.01, 100, 40), tube(2, 0.02, 150, 40, 2.4)};
  const auto links = partition_links(tubes, joints({100, 100 + 4e-7}, {0, 0}));
  ASSERT_EQ(links.size(), 2u);
  EXPECT_DOUBLE_EQ(links.back().start + links.back().arc_length, 100 + 4e-7);
  for (const auto& l : links) EXPECT_GT(l.arc_length, kMergeTolerance);
}

TEST(PartitionLinks, CanonicalConfigurationsGive2nMinus1) {
  for (int n = 1; n <= 4; ++n) {
    const auto robot = canonical_robot(n);
    EXPECT_EQ(partition_links(robot.tubes, robot.joints).size(), static_cast<std::size_t>(2 * n - 1)) << n;
  }
}

TEST(PartitionLinks, MatchesSignatureScanOnRandomConfigurations) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const auto robot = random_robot(1 + trial % 3, rng);
    const auto links = partition_links(robot.tubes, robot.joints);
    const auto scanned = oracle::signature_boundaries(robot.tubes, robot.joints, 1e-3, 1e-10);
    const auto ends = link_ends(links);
    ASSERT_EQ(ends.size(), scanned.size()) << trial;
    double sum = 0.0;
    for (std::size_t k = 0; k < ends.size(); ++k) {
      ASSERT_NEAR(ends[k], scanned[k], 1e-6);
      sum += links[k].arc_length;
      if (k > 0) {
        ASSERT_NE(links[k].members, links[k - 1].members);
      }
    }
    ASSERT_NEAR(sum, robot.joints.translations.back(), 1e-9);
  }
}

// ---- solve_link_mechanics -----------------------------------------------

TEST(SolveLinkMechanics, Examples) {
  // Equal stiffness: the inner tube's modulus compensates its smaller section.
  const double e2 = 50.0 * TubeSpec::annulus_second_moment(3.0, 2.6) / TubeSpec::annulus_second_moment(2.4, 2.0);
  std::vector<TubeSpec> tubes{tube(1, 0.01, 100, 40), TubeSpec(2, e2, 2.4, 2.0, 0.01, 150, 60)};
  ASSERT_NEAR(tubes[0].stiffness(), tubes[1].stiffness(), 1e-9 * tubes[0].stiffness());
  const JointConfig j = joints({100, 160}, {0, 25});
  const auto links = solve_link_mechanics(partition_links(tubes, j), tubes, j);
  ASSERT_EQ(links.size(), 3u);
  // Both straight: carried forward from the base.
  EXPECT_EQ(links[0].curvature, 0.0);
  EXPECT_EQ(links[0].absolute_plane_angle, 0.0);
  // Outer curved at 0, inner straight: (EI*0.01 + EI*0) / 2EI.
  EXPECT_NEAR(links[1].curvature, 0.005, 1e-15);
  EXPECT_EQ(links[1].absolute_plane_angle, 0.0);
  // Inner curved alone at 25 deg.
  EXPECT_EQ(links[2].curvature, 0.01);
  EXPECT_EQ(links[2].absolute_plane_angle, 25.0);
  EXPECT_EQ(links[2].plane_angle, 25.0);
}

TEST(SolveLinkMechanics, StraightLinkCarriesAngleForward) {
  // Outer tube curved section ends before the inner tube's straight stretch.
  std::vector<TubeSpec> tubes{tube(1, 0.02, 100, 30), TubeSpec(2, 50.0, 2.4, 2.0, 0.0, 200, 0)};
  const JointConfig j = joints({100, 150}, {40, -70});
  const auto links = solve_link_mechanics(partition_links(tubes, j), tubes, j);
  ASSERT_EQ(links.size(), 3u);
  EXPECT_EQ(links[1].absolute_plane_angle, 40.0);
  EXPECT_EQ(links[2].curvature, 0.0);
  EXPECT_EQ(links[2].absolute_plane_angle, 40.0);
  EXPECT_EQ(links[2].plane_angle, 0.0);
}

// ---- forward_kinematics -------------------------------------------------

TEST(ForwardKinematics, Examples) {
  std::vector<TubeSpec> straight{tube(1, 0.0, 100, 40), tube(2, 0.0, 150, 60, 2.4)};
  const auto s = forward_kinematics(straight, joints({100, 160}, {0, 0}));
  EXPECT_LT((s.tip.translation - Eigen::Vector3d(0, 0, 160)).norm(), 1e-12);
  EXPECT_TRUE(s.tip.rotation.isApprox(Eigen::Matrix3d::Identity()));

  std::vector<TubeSpec> single{TubeSpec(1, 50.0, 3.0, 2.6, M_PI / 80.0, 100, 40)};
  const JointConfig js = joints({100}, {0});
  const auto one = forward_kinematics(single, js);
  EXPECT_NEAR(one.tip.translation.x(), 25.4648, 5e-5);
  EXPECT_NEAR(one.tip.translation.y(), 0.0, 1e-12);
  EXPECT_NEAR(one.tip.translation.z(), 85.4648, 5e-5);
  EXPECT_LT((one.tip.translation - oracle::integrate_tip(single, js)).norm(), 1e-6);

  std::vector<TubeSpec> canonical{tube(1, 0.0125, 100, 40), tube(2, 0.0125, 150, 60, 2.4)};
  for (double t2 : {0.0, 35.0, 90.0, -120.0, 180.0}) {
    const JointConfig j = joints({100, 160}, {10, t2});
    const auto fk = forward_kinematics(canonical, j);
    EXPECT_LT((fk.tip.translation - oracle::integrate_tip(canonical, j)).norm(), 1e-6) << t2;
  }
}

TEST(ForwardKinematics, RetractedRobotIsIdentity) {
  std::vector<TubeSpec> tubes{tube(1, 0.01, 100, 40)};
  const auto fk = forward_kinematics(tubes, joints({0}, {45}));
  EXPECT_TRUE(fk.links.empty());
  EXPECT_EQ(fk.tip.translation, Eigen::Vector3d::Zero());
  EXPECT_EQ(fk.tip.rotation, Eigen::Matrix3d::Identity());
}

TEST(ForwardKinematics, PerLinkPosesAreCumulative) {
  const auto robot = canonical_robot(3, 20);
  const auto fk = forward_kinematics(robot.tubes, robot.joints);
  Pose acc;
  for (std::size_t k = 0; k < fk.links.size(); ++k) {
    acc = acc * link_pose(fk.links[k]);
    EXPECT_LT((acc.translation - fk.link_poses[k].translation).norm(), 1e-12);
    EXPECT_LT(fk.link_poses[k].orthonormality_error(), 1e-10);
  }
}

TEST(ForwardKinematics, MatchesIntegrationOracleOnRandomRobots) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const auto robot = random_robot(2 + trial % 2, rng);
    const auto fk = forward_kinematics(robot.tubes, robot.joints);
    const Eigen::Vector3d ref = oracle::integrate_tip(robot.tubes, robot.joints, 20000);
    ASSERT_LT((fk.tip.translation - ref).norm(), 1e-6) << trial;
    ASSERT_LT(fk.tip.orthonormality_error(), 1e-10);
  }
}

TEST(ForwardKinematics, GlobalRotationRotatesTip) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> delta(-360, 360);
  for (int trial = 0; trial < 300; ++trial) {
    auto robot = random_robot(1 + trial % 3, rng);
    const Eigen::Vector3d tip = forward_kinematics(robot.tubes, robot.joints).tip.translation;
    const double d = delta(rng);
    for (auto& t : robot.joints.rotations) t += d;
    const Eigen::Vector3d rotated = forward_kinematics(robot.tubes, robot.joints).tip.translation;
    ASSERT_LT((rotated - rot_z_deg(d) * tip).norm(), 1e-9) << trial;
  }
}

// ---- sample_backbone ----------------------------------------------------

TEST(SampleBackbone, StraightRobot) {
  std::vector<TubeSpec> tubes{tube(1, 0.0, 100, 0)};
  const auto pts = sample_backbone(tubes, joints({100}, {0}), 10);
  ASSERT_EQ(pts.size(), 11u);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    EXPECT_NEAR(pts[k].s, 10.0 * static_cast<double>(k), 1e-12);
    EXPECT_LT((pts[k].point - Eigen::Vector3d(0, 0, pts[k].s)).norm(), 1e-12);
  }
}

TEST(SampleBackbone, EqualAnglesAreCoplanar) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ang(-180, 180);
  for (int trial = 0; trial < 100; ++trial) {
    auto robot = random_robot(1 + trial % 4, rng);
    const double theta = ang(rng);
    for (auto& t : robot.joints.rotations) t = theta;
    const auto pts = sample_backbone(robot.tubes, robot.joints, 0.7);
    const auto [s, c] = sincos_deg(theta);
    for (const auto& p : pts) ASSERT_LT(std::abs(-s * p.point.x() + c * p.point.y()), 1e-9);
  }
}

TEST(SampleBackbone, MatchesIntegrationOracle) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const auto robot = random_robot(2, rng);
    const auto pts = sample_backbone(robot.tubes, robot.joints, 2.5);
    std::vector<double> s;
    for (const auto& p : pts) s.push_back(p.s);
    const auto ref = oracle::integrate_centerline(robot.tubes, robot.joints, s);
    ASSERT_EQ(ref.size(), pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) ASSERT_LT((pts[k].point - ref[k]).norm(), 1e-6) << trial;
    EXPECT_EQ(pts.front().point, Eigen::Vector3d::Zero());
    for (std::size_t k = 1; k < pts.size(); ++k) {
      ASSERT_LE((pts[k].point - pts[k - 1].point).norm(), 2.5 + 1e-9);
      ASSERT_LE(pts[k].s - pts[k - 1].s, 2.5 + 1e-9);
    }
  }
}

TEST(SampleBackbone, RejectsNonPositiveStep) {
  std::vector<TubeSpec> tubes{tube(1, 0.0, 100, 0)};
  EXPECT_THROW(sample_backbone(tubes, joints({100}, {0}), 0.0), Error);
  EXPECT_THROW(sample_backbone(tubes, joints({100}, {0}), -1.0), Error);
}
