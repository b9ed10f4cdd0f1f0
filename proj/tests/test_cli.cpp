#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "approx.hpp"
#include "cauchylab/experiment.hpp"

using namespace cauchylab;
using namespace cauchylab::experiment;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("cauchylab_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_exe(const std::string& args, const fs::path& log) {
  std::string cmd = std::string(CAUCHY_LAB_EXE) + " " + args + " > " + log.string() + " 2>&1";
  int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("selftest exits zero and writes a summary") {
    auto d = scratch("selftest");
    CHECK(run_exe("selftest --out " + (d / "out").string(), d / "log.txt") == 0);
    auto summary = slurp(d / "out" / "summary.txt");
    CHECK(summary.find("RESULT pass") != std::string::npos);
    CHECK(summary.find("RESULT fail") == std::string::npos);
  }

  TEST_CASE("usage errors exit with status 2") {
    auto d = scratch("usage");
    CHECK(run_exe("no-such-thing", d / "a.txt") == 2);
    CHECK(slurp(d / "a.txt").find("unknown subcommand") != std::string::npos);
    CHECK(run_exe("hadamard --config " + (d / "missing.ini").string(), d / "b.txt") == 2);
    CHECK(run_exe("hadamard --grid -3", d / "c.txt") == 2);
    CHECK(run_exe("hadamard --set nonsense", d / "d.txt") == 2);
    CHECK(run_exe("", d / "e.txt") == 2);
    CHECK(run_exe("--help", d / "f.txt") == 0);
  }

  TEST_CASE("parameter errors are reported before any run") {
    auto d = scratch("param");
    CHECK(run_exe("cauchy-interior --set sigma.M0=0.5 --out " + (d / "out").string(), d / "log.txt") == 2);
    CHECK(slurp(d / "log.txt").find("M0") != std::string::npos);
  }

  TEST_CASE("hadamard depth option drives the fitted slope") {
    auto d = scratch("hadamard");
    CHECK(run_exe("hadamard --T 0.5 --out " + (d / "out").string(), d / "log.txt") == 0);
    auto log = slurp(d / "log.txt");
    CHECK(log.find("check=hadamard.rate_T0.5") != std::string::npos);
    CHECK(log.find("bound_tag=paper-formula") != std::string::npos);
    CHECK(fs::exists(d / "out" / "hadamard_T0.5.csv"));
    std::ifstream csv(d / "out" / "hadamard_T0.5.csv");
    std::string head;
    std::getline(csv, head);
    CHECK(head == "n,A_n,eta_n,norm,asymptote");
  }

  TEST_CASE("outputs are deterministic for a fixed seed") {
    auto d = scratch("determinism");
    for (const char* tag : {"a", "b"})
      REQUIRE(run_exe("cone-chain --seed 9 --out " + (d / tag).string(), d / (std::string(tag) + ".log")) == 0);
    CHECK(slurp(d / "a" / "cone_chain.csv") == slurp(d / "b" / "cone_chain.csv"));
    CHECK_FALSE(slurp(d / "a" / "cone_chain.csv").empty());
  }

  TEST_CASE("config files and overrides") {
    auto d = scratch("config");
    {
      std::ofstream f(d / "c.ini");
      f << "seed = 5\n[domain]\nwidth = 2.0\n[family]\nnoise = 0.1, 0.01, 0\n[hadamard]\nT = 0.3 0.9\n";
    }
    auto c = load_config((d / "c.ini").string());
    CHECK(c.seed == 5);
    CHECK(c.width == approx(2.0));
    REQUIRE(c.noise.size() == 3);
    CHECK(c.noise[1] == approx(0.01));
    REQUIRE(c.hadamard_T.size() == 2);
    CHECK(c.hadamard_T[1] == approx(0.9));
    CHECK_NOTHROW(validate(c));

    set_option(c, "probe.target_h", "0.2");
    CHECK(c.target_h == approx(0.2));
    CHECK_THROWS_AS(set_option(c, "probe.bogus", "1"), Error);
    CHECK_THROWS_AS(set_option(c, "sigma.rho0", "abc"), Error);
    CHECK_THROWS_AS(load_config((d / "none.ini").string()), Error);

    c.noise = {0.1, 0.2};
    CHECK_THROWS_AS(validate(c), Error);
  }

  TEST_CASE("result lines") {
    Check c{"x.y", true, 0.5, 1.0, "empirical-constant", "k=v"};
    auto s = result_line(c);
    CHECK(s.rfind("RESULT pass check=x.y measured=", 0) == 0);
    CHECK(s.find("bound_tag=empirical-constant") != std::string::npos);
    CHECK(s.find("k=v") != std::string::npos);
    c.pass = false;
    CHECK(result_line(c).rfind("RESULT fail", 0) == 0);
  }
}
