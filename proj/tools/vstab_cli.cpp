#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "vstab/errors.hpp"

int main(int argc, char** argv) {
  using namespace vstab::cli;
  CLI::App app{"vstab: unstable vortex profiles, spectra and dispersion branches"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::optional<unsigned> seed;
  bool verbose = false;
  for (const auto& [name, help] : std::initializer_list<std::pair<const char*, const char*>>{
           {"profile-build", "build a profile, validate it and write its curves"},
           {"bottom-spectrum", "critical wavenumbers m_a and m_b, single profile or blend table"},
           {"trace-branch", "unstable dispersion branch between m_b and m_a"},
           {"theorem11", "construct a profile with one unstable mode at an integer m and certify it"}}) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory, created when missing");
    sub->add_option("--seed", seed, "seed for randomized starts");
    sub->add_flag("--verbose", verbose, "progress on stderr");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_validation;
  }

  RunConfig c;
  try {
    if (!config_path.empty()) c = load_config(config_path);
  } catch (const vstab::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_validation;
  }
  c.command = app.get_subcommands().front()->get_name();
  if (!out_dir.empty()) c.out = out_dir;
  if (seed) c.seed = *seed;
  c.verbose = c.verbose || verbose;
  return run(c);
}
