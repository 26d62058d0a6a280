#include "fwave/acceptance.hpp"

#include <sstream>

#include <gtest/gtest.h>

namespace fwave {
namespace {

TEST(ReferenceProblem, Shape) {
  const ReferenceProblem p = reference_problem(8);
  EXPECT_EQ(p.op.size(), 8);
  EXPECT_NEAR(p.data.a[0], std::sin(3.14159265358979 / 9.0), 1e-12);
  EXPECT_NEAR(p.data.b[7], 8.0 / 9.0 * (1.0 / 9.0), 1e-15);
  // b1 = 1 makes A non-symmetric.
  EXPECT_GT((p.op.matrix() - p.op.matrix().transpose()).norm(), 1.0);
}

TEST(Acceptance, MittagLefflerIdentitiesPass) {
  EXPECT_TRUE(run_criterion(2).pass);
}

TEST(Acceptance, TamperedMittagLefflerIsCaught) {
  AcceptanceOptions opts;
  opts.mittag_leffler = [](double a, double b, Complex z) {
    return mittag_leffler(a, b, z) * (1.0 + 1e-9);
  };
  const CriterionResult r = run_criterion(2, opts);
  EXPECT_FALSE(r.pass);
  EXPECT_NE(r.detail.find("|E11(1) - e|"), std::string::npos);
}

TEST(Acceptance, ErrorsBecomeFailures) {
  AcceptanceOptions opts;
  opts.mittag_leffler = [](double, double, Complex) -> Complex {
    throw std::domain_error("broken evaluator");
  };
  const CriterionResult r = run_criterion(2, opts);
  EXPECT_FALSE(r.pass);
  EXPECT_NE(r.detail.find("broken evaluator"), std::string::npos);
  EXPECT_THROW(run_criterion(10), std::invalid_argument);
}

TEST(Acceptance, SelectionAndReport) {
  AcceptanceOptions opts;
  opts.only = {8, 2};
  const auto results = run_acceptance(opts);
  ASSERT_EQ(results.size(), 2u);
  EXPECT_EQ(results[0].id, 2);
  std::ostringstream out;
  print_results(out, results);
  EXPECT_NE(out.str().find("[PASS] 8"), std::string::npos);
  EXPECT_NE(out.str().find("2/2 criteria passed"), std::string::npos);
}

}  // namespace
}  // namespace fwave
