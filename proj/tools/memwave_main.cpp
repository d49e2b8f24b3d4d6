#include <string>
#include <vector>

#include "CLI11.hpp"

#include "memwave/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"simulation and inequality-verification harness for "
               "second-order evolution equations with viscoelastic memory "
               "and delayed velocity feedback"};
  app.set_version_flag("--version", std::string(memwave::kToolVersion));
  app.require_subcommand(1);

  std::string config, outdir, csv_path, param;
  std::vector<std::string> values;
  double window = 0.5;
  memwave::cli::RunOptions run_opt;
  double horizon = 0.0;
  int cadence = 0;

  auto add_config = [&](CLI::App* c) {
    c->add_option("config", config,
                  "config file path or preset:<name>")->required();
    c->add_option("-o,--outdir", outdir, "output directory");
  };

  auto* validate = app.add_subcommand(
      "validate", "check every standing hypothesis of a scenario");
  add_config(validate);

  auto* certify = app.add_subcommand(
      "certify", "run the decay-certificate constants chain");
  add_config(certify);

  auto* run = app.add_subcommand(
      "run", "validate, simulate, audit the energy inequalities, fit decay");
  add_config(run);
  run->add_option("--horizon", horizon, "override the run horizon");
  run->add_option("--cadence", cadence, "override the sampling cadence");
  run->add_flag("--audits,!--no-audits", run_opt.audits,
                "run the inequality audits (default on)");
  run->add_flag("--plot", run_opt.plot, "also write plot.svg");

  auto* fit = app.add_subcommand(
      "fit", "fit an exponential decay rate to a CSV series");
  fit->add_option("csv", csv_path, "CSV with t and E (or 2 columns)")->required();
  fit->add_option("--window", window, "tail fraction used for the fit");
  fit->add_option("-o,--outdir", outdir, "output directory");

  auto* sweep = app.add_subcommand(
      "sweep", "rerun a scenario across a parameter grid in parallel");
  add_config(sweep);
  sweep->add_option("--param", param, "config key to vary")->required();
  sweep->add_option("--values", values, "comma-separated values")
      ->required()
      ->delimiter(',');

  auto* plot = app.add_subcommand("plot", "render a CSV series to SVG");
  plot->add_option("csv", csv_path, "CSV with t and E (or 2 columns)")->required();
  plot->add_option("-o,--outdir", outdir, "output directory");

  CLI11_PARSE(app, argc, argv);

  if (validate->parsed()) return memwave::cli::cmd_validate(config, outdir);
  if (certify->parsed()) return memwave::cli::cmd_certify(config, outdir);
  if (run->parsed()) {
    if (run->count("--horizon")) run_opt.horizon = horizon;
    if (run->count("--cadence")) run_opt.cadence = cadence;
    return memwave::cli::cmd_run(config, outdir, run_opt);
  }
  if (fit->parsed()) return memwave::cli::cmd_fit(csv_path, window, outdir);
  if (sweep->parsed()) return memwave::cli::cmd_sweep(config, param, values, outdir);
  if (plot->parsed()) return memwave::cli::cmd_plot(csv_path, outdir);
  return memwave::cli::kExitError;
}
