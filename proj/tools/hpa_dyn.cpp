// hpa_dyn: simulate, calibrate and analyse the HPA axis model from the
// command line. See README.md for the file formats.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hpa/commands.hpp"

namespace {

struct Flags {
  std::string config;
  std::string data;
  std::string out;
  std::optional<double> t_end;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> free;
};

CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& help, Flags& f,
                      bool data, bool fit_flags) {
  CLI::App* sub = app.add_subcommand(name, help);
  sub->add_option("--config", f.config, "Run configuration (key = value)")->check(CLI::ExistingFile);
  sub->add_option("--out", f.out, "Output directory");
  sub->add_option("--t-end", f.t_end, "Simulation end time, minutes");
  if (data) sub->add_option("--data", f.data, "Observation CSV (time_min,acth_pg_ml,cortisol_ug_dl)");
  if (fit_flags) {
    sub->add_option("--seed", f.seed, "Multi-start seed");
    sub->add_option("--free", f.free, "Free parameters, comma separated")->delimiter(',');
  }
  return sub;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HPA axis model: simulation, calibration and sensitivity analysis"};
  app.set_version_flag("--version", std::string(hpa::kToolVersion));
  app.require_subcommand(1);

  Flags f;
  add_command(app, "simulate", "Write the model trajectory (t_min,crh,acth,cortisol)", f, false, false);
  add_command(app, "validate", "Score the model against observations (MAPE, RMSE)", f, true, false);
  add_command(app, "fit", "Estimate free parameters against observations", f, true, true);
  add_command(app, "sensitivity", "Rank parameters by relative cortisol sensitivity", f, false, false);
  add_command(app, "daylight", "Write the daylight signal over one day", f, false, false);
  CLI::App* synth = add_command(app, "synth", "Write a synthetic observation file from the model", f, false, false);
  synth->add_option("--seed", f.seed, "Noise seed (overrides synth.seed)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : hpa::kExitInput;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  const std::string command = chosen->get_name();

  hpa::CommandOptions opts;
  if (!f.config.empty()) opts.config = f.config;
  if (!f.data.empty()) opts.data = f.data;
  if (!f.out.empty()) opts.out = f.out;
  opts.t_end = f.t_end;
  if (!f.free.empty()) opts.free = f.free;
  // --seed on synth picks the noise draw, not the fit seed.
  (command == "synth" ? opts.synth_seed : opts.seed) = f.seed;
  return hpa::run_command(command, opts, std::cout, std::cerr);
}
