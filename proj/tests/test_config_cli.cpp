#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qcool/config.hpp"

namespace fs = std::filesystem;
using qcool::Config;

namespace {

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("qcool_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write(const std::string& name, const std::string& text) {
  const auto p = scratch() / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Run {
  int code;
  std::string out;
};

Run cli(const std::string& args) {
  const auto log = scratch() / "stdout.txt";
  const std::string cmd = std::string(QCOOL_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
}

const std::string one_qubit_z = R"(
[model]
family = pauli_file
file = @FILE@
initial = 0
[cooling]
kind = gaussian
mode = expectation
N_M = 100000
tau = 2
x_m = 6
gap = 2
[scan]
E_min = -2
E_max = 2
spacing = 0.05
min_height = 0.02
)";

std::string z_config(const std::string& extra = "", const std::string& name = "z.conf") {
  const std::string h = write("z.txt", "1.0 Z\n");
  std::string text = one_qubit_z;
  text.replace(text.find("@FILE@"), 6, h);
  return write(name, text + extra);
}

}  // namespace

TEST(Config, ParsesSectionsAndComments) {
  const auto c = Config::parse("# header\ntop = 1\n[model]\nfamily = heisenberg_xxz # trailing\n  n=8\n\n[cooling]\ntau_list = 0.9, 1.3 ,1.7\nN_M = 1e5\nflag = yes\n");
  EXPECT_EQ(c.str("top"), "1");
  EXPECT_EQ(c.str("model.family"), "heisenberg_xxz");
  EXPECT_EQ(c.integer("model.n"), 8);
  EXPECT_EQ(c.integer("cooling.N_M"), 100000);
  EXPECT_TRUE(c.boolean("cooling.flag", false));
  const auto taus = c.reals("cooling.tau_list");
  ASSERT_EQ(taus.size(), 3u);
  EXPECT_DOUBLE_EQ(taus[1], 1.3);
  EXPECT_EQ(c.echo(), "# top = 1\n# model.family = heisenberg_xxz\n# model.n = 8\n# cooling.tau_list = 0.9, 1.3 ,1.7\n# cooling.N_M = 1e5\n# cooling.flag = yes\n");
  EXPECT_DOUBLE_EQ(c.real("cooling.missing", 2.5), 2.5);
}

TEST(Config, LineNumberedParseErrors) {
  auto line_of = [](const std::string& t) {
    try {
      Config::parse(t);
    } catch (const qcool::parse_error& e) {
      return e.line;
    }
    return -1;
  };
  EXPECT_EQ(line_of("a = 1\n[model\n"), 2);
  EXPECT_EQ(line_of("a = 1\njust words\n"), 2);
  EXPECT_EQ(line_of("[s]\na = 1\n\na = 2\n"), 4);
  EXPECT_EQ(line_of("[s]\nbad key = 1\n"), 2);
  EXPECT_EQ(line_of("[]\n"), 1);
}

TEST(Config, TypedErrorsNameTheField) {
  const auto c = Config::parse("[cooling]\ntau = fast\nN_M = 1.5\nflag = maybe\nseed = -3\n");
  try {
    c.real("cooling.tau");
    FAIL();
  } catch (const qcool::config_error& e) {
    EXPECT_NE(std::string(e.what()).find("cooling.tau (line 2)"), std::string::npos);
  }
  EXPECT_THROW(c.integer("cooling.N_M"), qcool::config_error);
  EXPECT_THROW(c.boolean("cooling.flag", false), qcool::config_error);
  EXPECT_THROW(c.u64("cooling.seed"), qcool::config_error);
  EXPECT_THROW(c.str("cooling.absent"), qcool::config_error);
  EXPECT_THROW(c.reject_unknown({"cooling.tau"}), qcool::config_error);
  EXPECT_NO_THROW(c.reject_unknown({"cooling.tau", "cooling.N_M", "cooling.flag", "cooling.seed"}));
}

TEST(Config, SetOverridesAndAppends) {
  auto c = Config::parse("[a]\nx = 1\n");
  c.set("a.x", "2");
  c.set("b.y", "3");
  EXPECT_EQ(c.str("a.x"), "2");
  EXPECT_EQ(c.echo(), "# a.x = 2\n# b.y = 3\n");
  EXPECT_THROW(Config::load((scratch() / "nope.conf").string()), qcool::config_error);
}

TEST(Cli, SingleQubitSpectrumHasOnePeakAtPlusOne) {
  const auto out = scratch() / "z_spectrum";
  const auto r = cli("spectrum --config " + z_config() + " --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto doc = nlohmann::json::parse(slurp(out / "peaks.json"));
  ASSERT_EQ(doc["peaks"].size(), 1u);
  EXPECT_NEAR(doc["peaks"][0]["E_original_frame"].get<double>(), 1.0, 0.05);
  EXPECT_LT(doc["max_abs_error"].get<double>(), 0.05);
  const std::string csv = slurp(out / "spectrum.csv");
  EXPECT_EQ(csv.front(), '#');
  EXPECT_NE(csv.find("\nE_original_frame,E_shifted,D_hat,mode\n"), std::string::npos);
  EXPECT_NE(csv.find("# model.family = pauli_file"), std::string::npos);
  EXPECT_NE(slurp(out / "oracle.csv").find("E_original_frame,E_shifted,D_exact,abs_error"), std::string::npos);
}

TEST(Cli, BitReproducibleShotMode) {
  const auto cfg = z_config();
  const auto a = scratch() / "rep_a", b = scratch() / "rep_b", c = scratch() / "rep_c";
  ASSERT_EQ(cli("spectrum --config " + cfg + " --mode shot --seed 42 --out " + a.string()).code, 0);
  ASSERT_EQ(cli("spectrum --config " + cfg + " --mode shot --seed 42 --out " + b.string()).code, 0);
  ASSERT_EQ(cli("spectrum --config " + cfg + " --mode shot --seed 43 --out " + c.string()).code, 0);
  EXPECT_EQ(slurp(a / "spectrum.csv"), slurp(b / "spectrum.csv"));
  EXPECT_EQ(slurp(a / "peaks.json"), slurp(b / "peaks.json"));
  EXPECT_NE(slurp(a / "spectrum.csv"), slurp(c / "spectrum.csv"));
  EXPECT_NE(slurp(a / "spectrum.csv").find("# cooling.seed = 42"), std::string::npos);
}

TEST(Cli, TauListWritesPerTauDirectories) {
  const auto h = write("z.txt", "1.0 Z\n");
  std::string text = one_qubit_z;
  text.replace(text.find("@FILE@"), 6, h);
  text.replace(text.find("tau = 2"), 7, "tau_list = 1, 2");
  const auto cfg = write("list.conf", text);
  const auto out = scratch() / "list";
  ASSERT_EQ(cli("spectrum --config " + cfg + " --out " + out.string()).code, 0);
  EXPECT_TRUE(fs::exists(out / "tau_0" / "spectrum.csv"));
  EXPECT_TRUE(fs::exists(out / "tau_1" / "peaks.json"));
  const auto sweep = nlohmann::json::parse(slurp(out / "sweep.json"));
  EXPECT_EQ(sweep["runs"].size(), 2u);
}

TEST(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(cli("spectrum --config " + (scratch() / "missing.conf").string()).code, 2);
  EXPECT_EQ(cli("spectrum --config " + z_config("bogus = 1\n", "unknown.conf") + " --out " + (scratch() / "x").string()).code, 2);
  EXPECT_EQ(cli("spectrum --config " + write("broken.conf", "[model\n")).code, 2);
  EXPECT_EQ(cli("spectrum --config " + z_config() + " --mode sideways").code, 2);
  EXPECT_EQ(cli("spectrum").code, 2);
  EXPECT_EQ(cli("nonsense").code, 2);
  // kind override through a second file
  const auto h = write("z.txt", "1.0 Z\n");
  std::string text = one_qubit_z;
  text.replace(text.find("@FILE@"), 6, h);
  text.replace(text.find("kind = gaussian"), 15, "kind = rectangular");
  EXPECT_EQ(cli("spectrum --config " + write("rect.conf", text) + " --out " + (scratch() / "r").string()).code, 2);
  // shot mode without a seed
  std::string noseed = one_qubit_z;
  noseed.replace(noseed.find("@FILE@"), 6, h);
  noseed.replace(noseed.find("mode = expectation"), 18, "mode = shot");
  EXPECT_EQ(cli("spectrum --config " + write("noseed.conf", noseed) + " --out " + (scratch() / "s").string()).code, 2);
}

TEST(Cli, DegenerateEstimateExitsThree) {
  const auto h = write("z.txt", "1.0 Z\n");
  const std::string text = "[model]\nfamily = pauli_file\nfile = " + h +
                           "\ninitial = 0\n[cooling]\nmode = shot\nseed = 1\nN_M = 2000\ntau = 4\nx_m = 6\ngap = 2\n"
                           "[observable]\ntype = pauli\nterms = 1.0 Z\nenergy = -1\n";
  const auto r = cli("observable --config " + write("degenerate.conf", text) + " --out " + (scratch() / "deg").string());
  EXPECT_EQ(r.code, 3) << r.out;
}

TEST(Cli, ObservableIdentityNearOne) {
  const std::string text =
      "[model]\nfamily = random_pauli\nn = 3\nterms = 8\nseed = 4\ninitial = 010\n[cooling]\nmode = expectation\nN_M = 20000\ntau = 1\nx_m = 8\n"
      "[observable]\ntype = identity\n";
  const auto out = scratch() / "ident";
  const auto r = cli("observable --config " + write("ident.conf", text) + " --json --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto doc = nlohmann::json::parse(slurp(out / "observable.json"));
  EXPECT_NEAR(doc["O_hat"].get<double>(), 1.0, 0.05);
  EXPECT_NE(slurp(out / "observable.csv").find("tau,x_m,t_m,N_M,E,D_hat,N_hat,O_hat,stderr_D,stderr_N\n"), std::string::npos);
}

TEST(Cli, CoolWritesScalingColumns) {
  const std::string text =
      "[model]\nfamily = random_pauli\nn = 3\nterms = 8\nseed = 4\ninitial = 010\n[cooling]\nkind = gaussian\nmode = expectation\nN_M = 5000\n"
      "[cool]\neps_max = 0.5\neps_min = 0.05\npoints = 3\n";
  const auto out = scratch() / "cool";
  const auto r = cli("cool --config " + write("cool.conf", text) + " --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.out;
  const std::string csv = slurp(out / "scaling.csv");
  EXPECT_EQ(csv.front(), '#');
  EXPECT_NE(csv.find("tau,x_m,t_m,infidelity_estimated,infidelity_oracle,theoretical_bound"), std::string::npos);
}

TEST(Cli, BudgetJson) {
  const auto r = cli("budget --kinds gaussian --eps 0.1 --p-j 0.5 --gap 1 -K 32 --json");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto doc = nlohmann::json::parse(r.out);
  ASSERT_EQ(doc.size(), 1u);
  EXPECT_NEAR(doc[0]["tau"].get<double>(), 2.342, 1e-3);
  EXPECT_NEAR(doc[0]["N_M"].get<double>(), 460800, 1e-6);
  EXPECT_EQ(cli("budget --kinds rectangular --eps 0.1 --p-j 0.5 --gap 1").code, 2);
  EXPECT_EQ(cli("budget --kinds gaussian --eps 2 --p-j 0.5 --gap 1").code, 2);
}

TEST(Cli, ValidateDeterministic) {
  const auto a = cli("validate --json --seed 5");
  const auto b = cli("validate --json --seed 5");
  EXPECT_EQ(a.code, 0) << a.out;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("rectangular"), std::string::npos);
}
