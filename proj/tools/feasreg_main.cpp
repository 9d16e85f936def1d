#include "feasreg/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

int main(int argc, char** argv) {
  CLI::App app{"feasreg: actuation-aware support regions for legged robots"};
  app.require_subcommand(1);

  std::string scenario, mode = "feasible", out_dir = ".", terrain, schedule,
              strategy = "feasible";
  std::optional<double> eps;
  std::string com_arg;
  int directions = 16;
  int repeat = 100;
  std::vector<double> volume;

  CLI::App* region = app.add_subcommand("region", "compute a support region");
  region->add_option("--scenario", scenario, "scenario file")->required();
  region->add_option("--mode", mode, "friction|actuation|feasible");
  double eps_value = 0.0;
  CLI::Option* eps_opt = region->add_option("--eps", eps_value, "area-gap tolerance [m^2]");
  region->add_option("--out", out_dir, "output directory");

  CLI::App* margin = app.add_subcommand("margin", "feasibility margin r and flag beta");
  margin->add_option("--scenario", scenario, "scenario file")->required();
  margin->add_option("--com", com_arg, "CoM projection 'X,Y' [m]")->required();

  CLI::App* plan = app.add_subcommand("plan", "quasi-static crawl plan over a height map");
  plan->add_option("--scenario", scenario, "scenario file")->required();
  plan->add_option("--terrain", terrain, "heightmap v1 file")->required();
  plan->add_option("--schedule", schedule, "schedule v1 file")->required();
  plan->add_option("--strategy", strategy, "friction|feasible");
  plan->add_option("--out", out_dir, "output directory");

  CLI::App* global = app.add_subcommand("global", "configuration-independent global region");
  global->add_option("--scenario", scenario, "scenario file")->required();
  global->add_option("--directions", directions, "number of SIP directions");
  global->add_option("--volume", volume, "z levels for the stacked feasible volume")
      ->delimiter(',');
  global->add_option("--out", out_dir, "output directory");

  CLI::App* bench = app.add_subcommand("bench", "region computation latency percentiles");
  bench->add_option("--scenario", scenario, "scenario file")->required();
  bench->add_option("--repeat", repeat, "number of repetitions");

  CLI11_PARSE(app, argc, argv);

  try {
    if (region->parsed()) {
      if (eps_opt->count() > 0) eps = eps_value;
      return feasreg::cli::cmd_region(scenario, mode, eps, out_dir);
    }
    if (margin->parsed()) {
      const std::size_t comma = com_arg.find(',');
      if (comma == std::string::npos) {
        std::cerr << "--com expects 'X,Y'\n";
        return feasreg::cli::kUsageError;
      }
      const double cx = std::stod(com_arg.substr(0, comma));
      const double cy = std::stod(com_arg.substr(comma + 1));
      return feasreg::cli::cmd_margin(scenario, cx, cy);
    }
    if (plan->parsed())
      return feasreg::cli::cmd_plan(scenario, terrain, schedule, strategy, out_dir);
    if (global->parsed())
      return feasreg::cli::cmd_global(scenario, directions, volume, out_dir);
    if (bench->parsed()) return feasreg::cli::cmd_bench(scenario, repeat);
  } catch (const feasreg::ParseError& e) {
    std::cerr << e.what() << "\n";
    return feasreg::cli::kUsageError;
  } catch (const feasreg::EmptyRegion& e) {
    std::cerr << e.what() << "\n";
    return feasreg::cli::kEmptyRegion;
  } catch (const feasreg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return feasreg::cli::kUsageError;
  }
  return feasreg::cli::kUsageError;
}
