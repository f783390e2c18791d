#include "savflow/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace savflow;

int main(int argc, char** argv) {
  CLI::App app{"Incompressible flow experiments with subgrid artificial viscosity"};
  std::string experiment;
  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("experiment", experiment, "convergence, cylinder or offset-circles")->required();
  app.add_option("--config", config_path, "file of `key = value` lines");
  app.add_option("--set", overrides, "override as key=value; repeatable");
  app.allow_extras();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  // Remaining `--key value` or `--key=value` pairs are config overrides.
  std::vector<std::pair<std::string, std::string>> kv;
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) {
      std::cerr << "error: --set expects key=value, got '" << o << "'\n";
      return 2;
    }
    kv.emplace_back(o.substr(0, eq), o.substr(eq + 1));
  }
  const auto extras = app.remaining();
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const auto& a = extras[i];
    if (a.rfind("--", 0) != 0) {
      std::cerr << "error: unexpected argument '" << a << "'\n";
      return 2;
    }
    const auto eq = a.find('=');
    if (eq != std::string::npos) {
      kv.emplace_back(a.substr(2, eq - 2), a.substr(eq + 1));
    } else if (i + 1 < extras.size()) {
      kv.emplace_back(a.substr(2), extras[++i]);
    } else {
      std::cerr << "error: option " << a << " needs a value\n";
      return 2;
    }
  }

  try {
    const auto config = experiments::parse_config(experiment, config_path, kv);
    std::cout << experiments::echo_config(config) << std::flush;
    std::cout << experiments::run_and_write(config);
    std::cout << "results written to " << config.text("output_dir") << "\n";
  } catch (const experiments::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const solver::DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
