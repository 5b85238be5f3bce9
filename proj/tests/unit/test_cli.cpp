#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "rmot/mmot.hpp"

#ifndef RMOT_DATA_DIR
#define RMOT_DATA_DIR "tests/data"
#endif

namespace {

struct Run {
  int rc;
  std::string out;
};

Run run(const std::string& args) {
  std::string cmd = std::string(RMOT_CLI_PATH) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {-1, ""};
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string data(const char* f) { return std::string(RMOT_DATA_DIR) + "/" + f; }

}  // namespace

TEST(Cli, RadialRowMatchesClosedForm) {
  auto r = run("radial --potential v1 --lambda 5.196152");
  ASSERT_EQ(r.rc, 0) << r.out;
  std::istringstream in(r.out);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "lambda,mass,r_lambda,c_lambda,M_infty,M_infty_closed_form,rel_err");
  double rel = std::stod(row.substr(row.rfind(',') + 1));
  EXPECT_LT(rel, 1e-6);
}

TEST(Cli, SelftestPassesAndIsDeterministic) {
  auto a = run("selftest --seed 3");
  auto b = run("selftest --seed 3");
  EXPECT_EQ(a.rc, 0) << a.out;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.find("FAIL"), std::string::npos);
}

TEST(Cli, RelaxMatchesTwoDiracClosedForm) {
  auto r = run("relax --measure " + data("two_dirac.json") + " --cost " + data("half_table.json") + " --N 4");
  ASSERT_EQ(r.rc, 0) << r.out;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["value"].get<double>(), rmot::mmot::two_dirac_closed_form(1.0, 0.5, 0.3, 0.4, 4), 1e-12);
  EXPECT_EQ(j["stratification"]["a"].size(), 5u);
  EXPECT_LE(j["stratification"]["K_min"].get<int>(), j["stratification"]["K_max"].get<int>());
}

TEST(Cli, MalformedJsonReportsPathAndLine) {
  auto r = run("relax --measure " + data("malformed.json") + " --cost exp:1 --N 3");
  EXPECT_EQ(r.rc, 1);
  EXPECT_NE(r.out.find("malformed.json:4"), std::string::npos) << r.out;
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run("").rc, 1);
  EXPECT_EQ(run("radial").rc, 1);  // --potential missing
  EXPECT_EQ(run("relax --measure " + data("two_dirac.json") + " --cost nosuchcost --N 3").rc, 1);
  EXPECT_EQ(run("packing count --domain 0,1").rc, 1);
  EXPECT_EQ(run("radial --potential v1 --format xml").rc, 1);
}

TEST(Cli, HelpDescribesEachSubcommand) {
  for (const char* s : {"mmot", "relax", "dual", "minfty", "energy", "radial", "packing", "sweep", "selftest"}) {
    auto r = run(std::string(s) + " --help");
    EXPECT_EQ(r.rc, 0) << s;
    EXPECT_GT(r.out.find('\n'), 20u) << s;  // first line is the description
  }
}

TEST(Cli, DualCertifiedAndDeterministicSweep) {
  std::string g = " --grid " + data("grid3.json") + " --cost " + data("half_table.json");
  auto d = run("dual" + g + " --N 2,3,4 --require-certified");
  EXPECT_EQ(d.rc, 0) << d.out;
  auto a = run("sweep --kind dual" + g + " --N 2:6:5 --lambda 0.5,1");
  auto b = run("sweep --kind dual" + g + " --N 2:6:5 --lambda 0.5,1 --workers 1");
  EXPECT_EQ(a.rc, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.substr(0, a.out.find('\n')), "t_or_N,value,method,certified");
}

TEST(Cli, UncertifiedResultsExitTwoWhenRequired) {
  // non-psd table on a larger grid falls back to the uncertified multistart
  std::string g = " --grid " + data("grid20.json") + " --cost " + data("nonpsd_table.json");
  auto r = run("sweep --kind lambda" + g + " --lambda 1");
  EXPECT_EQ(r.rc, 0);
  EXPECT_NE(r.out.find("false"), std::string::npos);
  EXPECT_EQ(run("sweep --kind lambda" + g + " --lambda 1 --require-certified").rc, 2);
}

TEST(Cli, PackingSubcommands) {
  auto c = run("packing count --domain 0,1 --eps 0.3 --mode balls");
  ASSERT_EQ(c.rc, 0);
  EXPECT_EQ(nlohmann::json::parse(c.out)["lower"].get<int>(), 3);
  auto g = run("packing gamma --dim 1 --k 1000000");
  EXPECT_EQ(g.rc, 0);
  EXPECT_NE(g.out.find("1000000,1000001"), std::string::npos) << g.out;
  auto d = run("packing dual --domain 0,1 --kappa 0.5 --N 10,20 --potential linear");
  EXPECT_EQ(d.rc, 0);
  auto w = run("packing w2 --domain 0,1 --kappa 0.5 --N 200 --measure " + data("narrow.json"));
  EXPECT_EQ(w.rc, 0) << w.out;
}

TEST(Cli, EnvironmentOverrides) {
  setenv("RMOT_POTENTIAL", "v2", 1);
  setenv("RMOT_LAMBDA", "1", 1);
  auto r = run("radial");
  unsetenv("RMOT_POTENTIAL");
  unsetenv("RMOT_LAMBDA");
  ASSERT_EQ(r.rc, 0) << r.out;
  EXPECT_NE(r.out.find("\n1,0.5,"), std::string::npos) << r.out;  // V2 at lambda = 1: mass 1/2
}
