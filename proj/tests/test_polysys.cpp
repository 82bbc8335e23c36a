#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "kls/channels.hpp"
#include "kls/errors.hpp"
#include "kls/lp.hpp"
#include "kls/polysys.hpp"
#include "kls/regions.hpp"
#include "random_models.hpp"

using namespace kls;

namespace {

InfoRecord symmetric_record(double p, double q) {
  const auto sys = kls::testing::separate_bsc_system(p, 2);
  const std::vector<AuxiliaryChannel> aux(2, AuxiliaryChannel{bsc(q)});
  return info_record(sys, aux);
}

// Support function of the projection, computed on the unprojected system.
double support(const InequalitySystem& sys, const std::vector<std::string>& keep, const std::vector<double>& dir) {
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  sys.closure().as_le(a, b);
  std::vector<double> c(sys.variables().size(), 0.0);
  for (std::size_t i = 0; i < keep.size(); ++i) c[sys.variable_index(keep[i])] = dir[i];
  const auto r = lp_maximize_exact(a, b, c);
  return r.status == LpStatus::optimal ? r.value : 1e300;
}

}  // namespace

TEST(Polysys, SystemEditing) {
  InequalitySystem s({"x", "y"});
  s.add("a", {{"x", 1.0}, {"y", 1.0}}, RowSense::lt, 1.0);
  s.add("b", {{"x", 1.0}}, RowSense::ge, 0.0);
  EXPECT_TRUE(s.has_row("a"));
  EXPECT_EQ(s.without("a").rows().size(), 1u);
  EXPECT_DOUBLE_EQ(s.with_rhs("a", 3.0).row("a").rhs, 3.0);
  EXPECT_EQ(s.closure().row("a").sense, RowSense::le);
  EXPECT_THROW(s.row("zz"), UsageError);
  EXPECT_THROW(s.variable_index("z"), UsageError);
  EXPECT_THROW(s.add("c", {{"z", 1.0}}, RowSense::le, 0.0), UsageError);
  for (auto r : {RowSense::le, RowSense::ge, RowSense::lt, RowSense::gt}) EXPECT_EQ(parse_row_sense(to_string(r)), r);
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  s.as_le(a, b);
  EXPECT_DOUBLE_EQ(a[1][0], -1.0);
  EXPECT_DOUBLE_EQ(b[1], 0.0);
}

TEST(Polysys, FourierMotzkinTriangle) {
  InequalitySystem s({"x", "y"});
  s.add("x_lo", {{"x", 1.0}}, RowSense::ge, 0.0);
  s.add("x_hi", {{"x", 1.0}}, RowSense::le, 1.0);
  s.add("y_ge_x", {{"y", 1.0}, {"x", -1.0}}, RowSense::ge, 0.0);
  s.add("y_hi", {{"y", 1.0}}, RowSense::le, 1.0);
  const auto p = fourier_motzkin(s, {"x"});
  EXPECT_EQ(p.variables(), std::vector<std::string>{"y"});
  InequalitySystem expect({"y"});
  expect.add("lo", {{"y", 1.0}}, RowSense::ge, 0.0);
  expect.add("hi", {{"y", 1.0}}, RowSense::le, 1.0);
  EXPECT_TRUE(implies(p, expect, 1e-12));
  EXPECT_TRUE(implies(expect, p, 1e-12));
  FmeOptions tiny;
  tiny.row_cap = 1;
  EXPECT_THROW(fourier_motzkin(s, {"x"}, tiny), ResourceError);
}

TEST(Polysys, RedundancyCertificate) {
  InequalitySystem s({"x"});
  s.add("tight", {{"x", 1.0}}, RowSense::le, 1.0);
  s.add("loose", {{"x", 1.0}}, RowSense::le, 2.0);
  s.add("lo", {{"x", 1.0}}, RowSense::ge, 0.0);
  const auto c = certify_redundancy(s, "loose");
  EXPECT_TRUE(c.redundant);
  EXPECT_DOUBLE_EQ(c.optimum, 1.0);
  EXPECT_FALSE(certify_redundancy(s, "tight").redundant);
  const auto lo = certify_redundancy(s.without("tight"), "loose");
  EXPECT_FALSE(lo.redundant);
  EXPECT_TRUE(lo.unbounded);
}

// Projection versus the LP support function of the lifted system, in random directions.
TEST(PolysysProperty, ProjectionMatchesSupportFunction) {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int it = 0; it < 40; ++it) {
    InequalitySystem s({"a", "b", "z1", "z2"});
    for (const auto& v : s.variables()) {
      s.add("lo:" + v, {{v, 1.0}}, RowSense::ge, -1.0);
      s.add("hi:" + v, {{v, 1.0}}, RowSense::le, 1.0);
    }
    for (int k = 0; k < 5; ++k) {
      s.add("r" + std::to_string(k), {{"a", u(rng)}, {"b", u(rng)}, {"z1", u(rng)}, {"z2", u(rng)}}, RowSense::le,
            0.3 + 0.5 * std::abs(u(rng)));
    }
    const auto p = fourier_motzkin(s, {"z1", "z2"});
    for (int d = 0; d < 8; ++d) {
      const std::vector<double> dir{u(rng), u(rng)};
      EXPECT_NEAR(support(p, {"a", "b"}, dir), support(s, {"a", "b"}, dir), 1e-9);
    }
  }
}

TEST(Polysys, SingleEntityProjection) {
  const auto rec = symmetric_record(0.06, 0.1);
  const auto& e = rec.at(0);
  const auto p = fourier_motzkin(build_theorem1_osrb(rec, 0), {"Rc1"});
  InequalitySystem expect({"Rs1", "Rw1"});
  expect.add("storage", {{"Rw1", 1.0}}, RowSense::ge, e.h_u_given_y() - e.h_u_given_xt());
  expect.add("key", {{"Rs1", 1.0}}, RowSense::le, e.h_u_given_rest - e.h_u_given_y());
  expect.add("sum", {{"Rs1", 1.0}, {"Rw1", 1.0}}, RowSense::le, e.h_u_given_rest);
  expect.add("rs", {{"Rs1", 1.0}}, RowSense::ge, 0.0);
  expect.add("rw", {{"Rw1", 1.0}}, RowSense::ge, 0.0);
  EXPECT_TRUE(implies(p, expect, 1e-9));
  EXPECT_TRUE(implies(expect, p, 1e-9));
}

TEST(Polysys, ReducedSystemIsProjection) {
  for (double q : {0.0, 0.1, 0.3}) {
    const auto rec = symmetric_record(0.06, q);
    const auto raw = build_theorem2_osrb(rec);
    const auto red = build_theorem2_reduced(rec);
    const auto rep = project_and_compare_report(raw, {"Rc1", "Rc2"}, red);
    EXPECT_TRUE(rep.equal) << q;
    EXPECT_TRUE(rep.lifted_check) << q;
    EXPECT_TRUE(rep.vertices_extend) << q;
    EXPECT_TRUE(project_and_compare(raw, {"Rc1", "Rc2"}, red));
    const auto bad = red.with_rhs("storage:j=1", red.row("storage:j=1").rhs + 0.1);
    EXPECT_FALSE(project_and_compare(raw, {"Rc1", "Rc2"}, bad)) << q;
  }
}

TEST(Polysys, ClaimedInactiveRowsAreRedundant) {
  const auto rec = symmetric_record(0.25, 0.2);
  const auto red = build_theorem2_reduced(rec);
  for (const auto& l : claimed_inactive_labels()) EXPECT_TRUE(certify_redundancy(red, l).redundant) << l;
  EXPECT_FALSE(certify_redundancy(red, "storage:j=2").redundant);
}

TEST(Polysys, CornerIsSharedVertex) {
  for (double q : {0.0, 0.1}) {
    const auto rec = symmetric_record(0.06, q);
    EXPECT_TRUE(check_symmetric_record(rec).symmetric);
    const auto corner = reduced_corner(rec);
    ASSERT_EQ(corner.size(), 4u);
    EXPECT_TRUE(is_vertex(build_theorem2_reduced(rec), corner));
    const auto cr = verify_corner_replacement(rec);
    EXPECT_TRUE(cr.precondition_met);
    EXPECT_TRUE(cr.bounded);
    EXPECT_TRUE(cr.corner_shared());
    if (q == 0.0) {
      EXPECT_TRUE(cr.vertex_sets_equal);
    }
  }
  // An interior point is not a vertex.
  const auto rec = symmetric_record(0.06, 0.1);
  auto corner = reduced_corner(rec);
  for (auto& v : corner) v *= 0.5;
  EXPECT_FALSE(is_vertex(build_theorem2_reduced(rec), corner));
}

TEST(Polysys, AsymmetricRecordFailsPrecondition) {
  const EntitySystem sys(Pmf::uniform(2), {separate_bc(bsc(0.06)), separate_bc(bsc(0.2))});
  const std::vector<AuxiliaryChannel> aux(2, AuxiliaryChannel{bsc(0.1)});
  const auto rec = info_record(sys, aux);
  EXPECT_FALSE(check_symmetric_record(rec).symmetric);
  EXPECT_FALSE(verify_corner_replacement(rec).precondition_met);
}

TEST(Polysys, JointSecrecyDiagnostic) {
  const auto d = joint_secrecy_diagnostic(symmetric_record(0.06, 0.1));
  EXPECT_TRUE(d.positive_keys_feasible);
  EXPECT_LE(d.max_total_key, d.max_total_key_split + 1e-12);
  const auto js = build_theorem2_joint_secrecy(symmetric_record(0.06, 0.1));
  EXPECT_TRUE(js.has_row("joint_secrecy"));
  EXPECT_FALSE(js.has_row("joint:j=1"));
}
