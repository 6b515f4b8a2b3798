// cvqkd command line front end: key-rate evaluation, figure sweeps, the
// limiting source noise, and Monte Carlo validation of the protocol model.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

#include "cvqkd/cli.hpp"

namespace {

struct ParamFlags {
  double transmittance = 0.0;
  double epsilon0 = 0.0;
  double epsilon_c = 0.0;
  double total_v = 0.0;
  double modulation_va = 0.0;
  CLI::Option* opt_v = nullptr;
  CLI::Option* opt_va = nullptr;
};

void add_param_flags(CLI::App* cmd, ParamFlags& p, bool with_modulation) {
  cmd->add_option("--T", p.transmittance, "channel transmittance, in (0,1)")
      ->required();
  cmd->add_option("--epsilon0", p.epsilon0,
                  "source excess noise (shot-noise units)")
      ->default_val(0.0);
  cmd->add_option("--epsilon-c", p.epsilon_c,
                  "channel excess noise (shot-noise units)")
      ->default_val(0.0);
  if (with_modulation) {
    p.opt_v = cmd->add_option("--V", p.total_v,
                              "total source variance V = V_A + 1");
    p.opt_va = cmd->add_option("--VA", p.modulation_va,
                               "modulation variance V_A");
    p.opt_v->excludes(p.opt_va);
    p.opt_va->excludes(p.opt_v);
  }
}

// Returns false (usage error) if neither --V nor --VA was given.
bool resolve_modulation(const ParamFlags& p, double& v_a, std::ostream& err) {
  if (p.opt_v->count()) {
    v_a = p.total_v - 1.0;
    return true;
  }
  if (p.opt_va->count()) {
    v_a = p.modulation_va;
    return true;
  }
  err << "error: one of --V or --VA is required\n";
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Security bounds for continuous-variable QKD with noisy "
               "coherent states over a lossy, noisy channel"};
  app.require_subcommand(1);

  // keyrate
  auto* keyrate = app.add_subcommand(
      "keyrate", "Mutual information, Holevo bounds and key rates at one "
                 "parameter point");
  ParamFlags kr_flags;
  std::string kr_format = "table";
  add_param_flags(keyrate, kr_flags, true);
  keyrate->add_option("--format", kr_format, "output format")
      ->check(CLI::IsMember({"table", "csv"}));

  // figure3
  auto* figure3 = app.add_subcommand(
      "figure3", "CSV sweep of the reverse bound vs the prior rate over T "
                 "(noiseless channel)");
  cvqkd::Figure3Options fig_opt;
  figure3->add_option("--epsilon0", fig_opt.epsilon0,
                      "source excess noise (shot-noise units)")
      ->default_val(0.2);
  figure3->add_option("--steps", fig_opt.steps, "number of T grid points")
      ->default_val(std::size_t{200})
      ->check(CLI::Range(std::size_t{2}, std::size_t{10000000}));
  figure3->add_option("--out", fig_opt.out_path, "output CSV path ('-' = stdout)")
      ->required();

  // limit
  auto* limit = app.add_subcommand(
      "limit", "Limiting tolerable source excess noise (closed form and "
               "bisection)");
  cvqkd::LimitOptions limit_opt;
  limit->add_option("--format", limit_opt.format, "output format")
      ->check(CLI::IsMember({"table", "csv"}));

  // montecarlo
  auto* montecarlo = app.add_subcommand(
      "montecarlo", "Seeded Monte Carlo validation of the P&M and E-B "
                    "scheme statistics");
  ParamFlags mc_flags;
  cvqkd::MontecarloOptions mc_opt;
  add_param_flags(montecarlo, mc_flags, true);
  montecarlo->add_option("--samples", mc_opt.samples, "draws per scheme")
      ->default_val(std::size_t{1000000});
  montecarlo->add_option("--seed", mc_opt.seed, "RNG seed")
      ->default_val(std::uint64_t{42});
  montecarlo->add_flag("--corrupt-eb", mc_opt.corrupt_eb,
                       "halve the E-B cross covariance (negative control)");
  montecarlo->add_option("--format", mc_opt.format, "output format")
      ->check(CLI::IsMember({"table", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    return 2;
  }

  if (keyrate->parsed()) {
    cvqkd::KeyrateOptions opt;
    double v_a = 0.0;
    if (!resolve_modulation(kr_flags, v_a, std::cerr)) return 2;
    opt.source = {v_a, kr_flags.epsilon0};
    opt.channel = {kr_flags.transmittance, kr_flags.epsilon_c};
    opt.format = kr_format;
    return cvqkd::run_keyrate(opt, std::cout, std::cerr);
  }
  if (figure3->parsed())
    return cvqkd::run_figure3(fig_opt, std::cout, std::cerr);
  if (limit->parsed())
    return cvqkd::run_limit(limit_opt, std::cout, std::cerr);
  if (montecarlo->parsed()) {
    double v_a = 0.0;
    if (!resolve_modulation(mc_flags, v_a, std::cerr)) return 2;
    mc_opt.source = {v_a, mc_flags.epsilon0};
    mc_opt.channel = {mc_flags.transmittance, mc_flags.epsilon_c};
    return cvqkd::run_montecarlo(mc_opt, std::cout, std::cerr);
  }
  return 2;
}
