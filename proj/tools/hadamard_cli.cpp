#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hadamard/hadamard.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> out;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "run configuration file")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", f.out, "record file (overrides the config's output)");
  sub->add_option("--tol", f.tol, "tolerance (overrides the config's tol)");
  sub->add_option("--seed", f.seed, "sampling seed (overrides the config's seed)");
}

int execute(hadamard::Command expected, const Flags& f) {
  using namespace hadamard;
  RunConfig cfg;
  try {
    cfg = parse_config(read_file(f.config));
    if (cfg.command != expected) {
      throw ValidationError("config command is '" + std::string(command_name(cfg.command)) +
                            "' but the subcommand is '" + std::string(command_name(expected)) + "'");
    }
    cfg.base_dir = std::filesystem::path(f.config).parent_path().string();
    if (f.out) cfg.output = *f.out;
    if (f.tol) cfg.tol = *f.tol;
    if (f.seed) cfg.seed = *f.seed;
    if (f.method) cfg.method = *f.method;
    validate(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  const RunReport rep = run(cfg);
  if (!cfg.output) std::cout << rep.records << report_footer(rep);
  print_report(std::cout, rep);
  if (rep.status == RunStatus::error) std::cerr << "error: " << rep.error << "\n";
  return exit_code(rep.status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resolvents, proximal point iterations and heat flows on Hadamard spaces"};
  app.require_subcommand(1);

  Flags flags;
  struct Entry {
    const char* name;
    const char* help;
    hadamard::Command command;
  };
  const Entry entries[] = {
      {"resolvent-curve", "resolvents along an increasing λ grid", hadamard::Command::resolvent_curve},
      {"ppa", "proximal point algorithm", hadamard::Command::ppa},
      {"semigroup", "nonlinear semigroup on a time grid", hadamard::Command::semigroup},
      {"dirichlet", "Dirichlet problem for the nonlinear Markov operator", hadamard::Command::dirichlet},
      {"probe-conjecture", "heat flow versus energy gradient flow gap table", hadamard::Command::probe_conjecture},
  };
  std::optional<hadamard::Command> chosen;
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(e.name, e.help);
    add_common(sub, flags);
    if (e.command == hadamard::Command::dirichlet) {
      sub->add_option("--method", flags.method, "ppa or flow")->check(CLI::IsMember({"ppa", "flow"}));
    }
    sub->callback([&chosen, c = e.command] { chosen = c; });
  }
  CLI11_PARSE(app, argc, argv);
  return execute(*chosen, flags);
}
