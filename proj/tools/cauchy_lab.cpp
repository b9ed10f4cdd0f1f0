#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "cauchylab/experiment.hpp"

namespace ex = cauchylab::experiment;
using cauchylab::Error;
using cauchylab::ErrorKind;

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
  return s;
}

void error_record(const Error& e, const std::string& out) {
  std::cerr << "ERROR kind=" << cauchylab::kind_name(e.kind()) << " detail=" << e.detail() << " message=\"" << e.what()
            << "\"\n";
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  std::ofstream f(std::filesystem::path(out) / "error.txt");
  if (f) f << "kind=" << cauchylab::kind_name(e.kind()) << "\ndetail=" << e.detail() << "\nmessage=" << e.what() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical checks of conditional stability for elliptic Cauchy problems"};
  app.usage("cauchy-lab <subcommand> [--config PATH] [--out DIR] [--seed N] [--grid N]");
  std::string sub, config, out;
  unsigned long long seed = 0;
  int grid = 0;
  std::vector<double> T;
  std::vector<std::string> sets;
  bool svg = false;
  app.add_option("subcommand", sub, "one of: " + join(ex::subcommands()))->required();
  app.add_option("--config", config, "INI file with [section] key = value lines");
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--grid", grid, "grid cells across the domain")->check(CLI::PositiveNumber);
  app.add_option("--T", T, "Hadamard depth(s) for the hadamard subcommand");
  app.add_option("--set", sets, "override a config key, section.key=value");
  app.add_flag("--svg", svg, "also write SVG plots of the probe curves");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  ex::ExperimentConfig cfg;
  try {
    const auto& subs = ex::subcommands();
    if (std::find(subs.begin(), subs.end(), sub) == subs.end())
      throw Error(ErrorKind::usage, "unknown subcommand '" + sub + "'; expected one of: " + join(subs));
    if (!config.empty()) cfg = ex::load_config(config, cfg);
    for (const auto& s : sets) {
      auto eq = s.find('=');
      if (eq == std::string::npos) throw Error(ErrorKind::usage, "--set expects section.key=value, got '" + s + "'");
      ex::set_option(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    if (!out.empty()) cfg.out = out;
    if (app.count("--seed")) cfg.seed = seed;
    if (grid > 0) cfg.grid = grid;
    if (!T.empty()) cfg.hadamard_T = T;
    if (svg) cfg.svg = true;
    ex::validate(cfg);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    return ex::run(sub, cfg, std::cout);
  } catch (const Error& e) {
    error_record(e, cfg.out);
    return e.kind() == ErrorKind::usage ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "ERROR kind=internal message=\"" << e.what() << "\"\n";
    return 3;
  }
}
