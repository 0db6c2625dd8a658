// kk — scenario runner for the Kaluza-Klein numerical laboratory.
//
//   kk <geodesic|project|compare|characteristic|reduce|alpha>
//        --scenario <path> [--out <dir>] [--tol <float>] [--seed <int>]
//   kk plot --csv <file> --x <col> --y <col>[,<col>...] --out <file.svg> [--logy]

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "kk/csvio.hpp"
#include "kk/runner.hpp"

namespace {

struct CommonArgs {
  std::string scenario;
  std::string out;
  double tol = 0;
  unsigned seed = 0;
};

int run(const std::string& command, const CommonArgs& args) {
  try {
    kk::Scenario sc = kk::load_scenario(args.scenario);
    sc.run.command = command;
    if (args.tol > 0) {
      sc.cfg.abs_tol = args.tol;
      sc.cfg.rel_tol = args.tol;
    }
    kk::RunResult res = kk::run_scenario(sc, args.out, args.seed);
    std::cout << res.summary << "\n";
    for (const auto& f : res.artifacts) std::cout << "wrote " << f << "\n";
    return res.exit_code;
  } catch (const kk::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kk::kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kk::kFailure;
  }
}

int plot(const std::string& csv, const std::string& xcol, const std::string& ycols,
         const std::string& out, bool logy, std::string title) {
  try {
    kk::CsvTable t = kk::read_csv(csv);
    int xi = t.column_index(xcol);
    std::vector<kk::PlotSeries> series;
    std::stringstream ys(ycols);
    std::string name;
    while (std::getline(ys, name, ',')) {
      int yi = t.column_index(name);
      kk::PlotSeries s;
      s.name = name;
      for (const auto& row : t.rows) {
        s.x.push_back(row[xi]);
        s.y.push_back(row[yi]);
      }
      series.push_back(std::move(s));
    }
    if (title.empty()) title = csv;
    kk::write_svg_plot(out, title, series, logy);
    std::cout << "wrote " << out << "\n";
    return kk::kOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kk::kFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kaluza-Klein numerical laboratory"};
  app.require_subcommand(1);

  CommonArgs args;
  static const char* kCommands[] = {"geodesic", "project",  "compare",
                                    "characteristic", "reduce", "alpha"};
  std::string chosen;
  for (const char* name : kCommands) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--scenario", args.scenario, "scenario file")->required();
    sub->add_option("--out", args.out, "output directory");
    sub->add_option("--tol", args.tol, "override abs/rel integrator tolerance");
    sub->add_option("--seed", args.seed, "seed for randomized initial phases (reduce)");
    sub->callback([name, &chosen] { chosen = name; });
  }

  std::string csv, xcol, ycols, out = "plot.svg", title;
  bool logy = false;
  auto* pl = app.add_subcommand("plot", "SVG line plot from a CSV file");
  pl->add_option("--csv", csv, "input CSV")->required();
  pl->add_option("--x", xcol, "x column name")->required();
  pl->add_option("--y", ycols, "comma-separated y column names")->required();
  pl->add_option("--out", out, "output SVG path");
  pl->add_option("--title", title, "plot title");
  pl->add_flag("--logy", logy, "logarithmic y axis");

  CLI11_PARSE(app, argc, argv);

  if (pl->parsed()) return plot(csv, xcol, ycols, out, logy, title);
  return run(chosen, args);
}
