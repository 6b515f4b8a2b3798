#pragma once

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "cvqkd/errors.hpp"
#include "cvqkd/montecarlo.hpp"
#include "cvqkd/protocol.hpp"

namespace cvqkd {

/// Fixed 12-significant-digit rendering; repeated runs diff byte-stable.
inline std::string format_sig12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// A uniform parameter sweep. Positions are start + i (stop - start)/(steps - 1)
/// with both endpoints included exactly.
struct SweepSpec {
  enum class Variable { transmittance, epsilon0, epsilon_c, modulation_v };

  Variable variable = Variable::transmittance;
  double start = 0.0;
  double stop = 0.0;
  std::size_t steps = 2;
  SourceParams fixed_source;
  ChannelParams fixed_channel;

  void validate() const {
    if (!(start < stop)) throw DomainError("sweep start must be < stop");
    if (steps < 2) throw DomainError("sweep needs steps >= 2");
    if (variable == Variable::transmittance &&
        !(start >= 1e-6 && stop <= 1.0 - 1e-6))
      throw DomainError(
          "swept transmittance must stay inside (0,1) with margin 1e-6");
  }

  [[nodiscard]] std::vector<double> positions() const {
    validate();
    std::vector<double> p(steps);
    p.front() = start;
    p.back() = stop;
    for (std::size_t i = 1; i + 1 < steps; ++i)
      p[i] = start + static_cast<double>(i) * (stop - start) /
                         static_cast<double>(steps - 1);
    return p;
  }

  /// Parameter pair with the swept variable set to `value`.
  [[nodiscard]] std::pair<SourceParams, ChannelParams> at(double value) const {
    SourceParams src = fixed_source;
    ChannelParams ch = fixed_channel;
    switch (variable) {
      case Variable::transmittance: ch.transmittance = value; break;
      case Variable::epsilon0: src.source_excess_noise = value; break;
      case Variable::epsilon_c: ch.channel_excess_noise = value; break;
      case Variable::modulation_v: src.modulation_variance = value - 1.0; break;
    }
    return {src, ch};
  }
};

namespace detail {

inline void print_kv(std::ostream& out, const char* key, const std::string& v) {
  out << std::left << std::setw(22) << key << v << "\n";
}

inline int unknown_format(const std::string& format, std::ostream& err) {
  err << "error: unknown --format '" << format << "' (expected table or csv)\n";
  return 2;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// keyrate

struct KeyrateOptions {
  SourceParams source;
  ChannelParams channel;
  std::string format = "table";  // table | csv
};

inline constexpr const char* kKeyrateCsvHeader =
    "T,epsilon0,epsilon_c,V_A,V,mutual_info,holevo_direct,holevo_reverse,"
    "k_direct,k_reverse,k_direct_asymptotic,k_reverse_asymptotic,"
    "prior_k_reverse";

inline std::string keyrate_csv_row(const SourceParams& src,
                                   const ChannelParams& ch,
                                   const KeyRateReport& r) {
  std::string row;
  for (const double v :
       {ch.transmittance, src.source_excess_noise, ch.channel_excess_noise,
        src.modulation_variance, src.v(), r.mutual_info, r.holevo_direct,
        r.holevo_reverse, r.k_direct, r.k_reverse, r.k_direct_asymptotic,
        r.k_reverse_asymptotic}) {
    row += format_sig12(v);
    row += ',';
  }
  if (r.prior_k_reverse) row += format_sig12(*r.prior_k_reverse);
  return row;
}

inline int run_keyrate(const KeyrateOptions& opt, std::ostream& out,
                       std::ostream& err) {
  if (opt.format != "table" && opt.format != "csv")
    return detail::unknown_format(opt.format, err);
  KeyRateReport r;
  try {
    r = key_rates(opt.source, opt.channel);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  if (opt.format == "csv") {
    out << kKeyrateCsvHeader << "\n"
        << keyrate_csv_row(opt.source, opt.channel, r) << "\n";
    return 0;
  }

  detail::print_kv(out, "T", format_sig12(opt.channel.transmittance));
  detail::print_kv(out, "epsilon0", format_sig12(opt.source.source_excess_noise));
  detail::print_kv(out, "epsilon_c", format_sig12(opt.channel.channel_excess_noise));
  detail::print_kv(out, "V_A", format_sig12(opt.source.modulation_variance));
  detail::print_kv(out, "V", format_sig12(opt.source.v()));
  detail::print_kv(out, "mutual_info", format_sig12(r.mutual_info));
  detail::print_kv(out, "holevo_direct", format_sig12(r.holevo_direct));
  detail::print_kv(out, "holevo_reverse", format_sig12(r.holevo_reverse));
  detail::print_kv(out, "k_direct", format_sig12(r.k_direct));
  detail::print_kv(out, "k_reverse", format_sig12(r.k_reverse));
  detail::print_kv(out, "k_direct_asymptotic", format_sig12(r.k_direct_asymptotic));
  detail::print_kv(out, "k_reverse_asymptotic", format_sig12(r.k_reverse_asymptotic));
  detail::print_kv(out, "prior_k_reverse",
                   r.prior_k_reverse ? format_sig12(*r.prior_k_reverse)
                                     : std::string("n/a (epsilon_c > 0)"));
  return 0;
}

// ---------------------------------------------------------------------------
// figure3

/// T grid bounds for the figure sweep; strictly inside (0,1).
inline constexpr double kFigure3TStart = 0.01;
inline constexpr double kFigure3TStop = 0.99;

struct Figure3Options {
  double epsilon0 = 0.2;
  std::size_t steps = 200;
  std::string out_path;  // "-" writes to stdout
};

/// Writes rows (T, k_reverse_asymptotic, prior_k_reverse_asymptotic) over the
/// T sweep. The channel excess noise is pinned to zero; the prior bound is
/// only defined there.
inline void write_figure3_csv(const Figure3Options& opt, std::ostream& out) {
  SweepSpec sweep;
  sweep.variable = SweepSpec::Variable::transmittance;
  sweep.start = kFigure3TStart;
  sweep.stop = kFigure3TStop;
  sweep.steps = opt.steps;
  sweep.fixed_source = SourceParams{0.0, opt.epsilon0};
  sweep.fixed_channel = ChannelParams{0.5, 0.0};

  out << "T,k_reverse_asymptotic,prior_k_reverse_asymptotic\n";
  for (const double t : sweep.positions()) {
    const auto [src, ch] = sweep.at(t);
    out << format_sig12(t) << ',' << format_sig12(k_reverse_asymptotic(src, ch))
        << ',' << format_sig12(prior_k_reverse_asymptotic(src, ch)) << "\n";
  }
}

inline int run_figure3(const Figure3Options& opt, std::ostream& out,
                       std::ostream& err) {
  try {
    if (opt.out_path == "-" || opt.out_path.empty()) {
      write_figure3_csv(opt, out);
      return 0;
    }
    std::ofstream file(opt.out_path, std::ios::binary);
    if (!file) {
      err << "error: cannot open output file '" << opt.out_path << "'\n";
      return 1;
    }
    write_figure3_csv(opt, file);
    if (!file) {
      err << "error: write failed for '" << opt.out_path << "'\n";
      return 1;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// limit

struct LimitOptions {
  std::string format = "table";
};

inline int run_limit(const LimitOptions& opt, std::ostream& out,
                     std::ostream& err) {
  if (opt.format != "table" && opt.format != "csv")
    return detail::unknown_format(opt.format, err);
  LimitingEpsilon0 lim;
  try {
    lim = limiting_epsilon0();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  const double diff = std::fabs(lim.closed_form - lim.bisection);
  if (opt.format == "csv") {
    out << "closed_form,bisection,abs_diff\n"
        << format_sig12(lim.closed_form) << ',' << format_sig12(lim.bisection)
        << ',' << format_sig12(diff) << "\n";
    return 0;
  }
  detail::print_kv(out, "closed_form", format_sig12(lim.closed_form));
  detail::print_kv(out, "bisection", format_sig12(lim.bisection));
  detail::print_kv(out, "abs_diff", format_sig12(diff));
  return 0;
}

// ---------------------------------------------------------------------------
// montecarlo

struct MontecarloOptions {
  SourceParams source;
  ChannelParams channel;
  std::size_t samples = 1000000;
  std::uint64_t seed = 42;
  bool corrupt_eb = false;
  std::string format = "table";
};

inline int run_montecarlo(const MontecarloOptions& opt, std::ostream& out,
                          std::ostream& err) {
  if (opt.format != "table" && opt.format != "csv")
    return detail::unknown_format(opt.format, err);
  if (opt.samples < 10000) {
    err << "error: --samples must be >= 10000; estimates are too noisy below "
           "that\n";
    return 1;
  }

  struct AnalyticRow {
    std::string name;
    double empirical, analytic, z;
  };
  EquivalenceReport eq;
  std::vector<AnalyticRow> analytic;
  try {
    const SampleBatch pm = sample_pm(opt.source, opt.channel, opt.samples, opt.seed);
    const SampleBatch eb =
        sample_eb(opt.source, opt.channel, opt.samples,
                  derive_seed(opt.seed, 0xEBull), opt.corrupt_eb ? 0.5 : 1.0);
    eq = equivalence_check(pm, eb);

    const double chi = chi_total(opt.source, opt.channel);
    const double T = opt.channel.transmittance;
    const double V = opt.source.v();
    const auto add = [&](const std::string& name, const MomentEstimate& est,
                         double target) {
      const double se = est.std_error > 0.0
                            ? est.std_error
                            : std::numeric_limits<double>::min();
      analytic.push_back({name, est.value, target, (est.value - target) / se});
    };
    add("V(Q|Q_A)", empirical_conditional_variance(pm, "Q", "Q_A"),
        1.0 + opt.source.source_excess_noise);
    add("<Q_Bp^2>", empirical_second_moment(pm, "Q_Bp"), T * (V + chi));
    add("V(Q_Bp|Q_A)", empirical_conditional_variance(pm, "Q_Bp", "Q_A"),
        T * (1.0 + chi));
    add("I(Q_A:Q_Bp)", empirical_mutual_information(pm, "Q_A", "Q_Bp"),
        mutual_information(opt.source, opt.channel));
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  std::string first_failure;
  const auto render = [&](std::ostream& o) {
    if (opt.format == "csv") {
      o << "section,name,value_a,value_b,z,pass\n";
      for (const auto& row : eq.rows) {
        const bool ok = std::fabs(row.z) < eq.z_threshold;
        o << "equivalence," << row.name << ',' << format_sig12(row.pm_value)
          << ',' << format_sig12(row.eb_value) << ',' << format_sig12(row.z)
          << ',' << (ok ? "1" : "0") << "\n";
      }
      for (const auto& row : analytic) {
        const bool ok = std::fabs(row.z) < kSingleComparisonZ;
        o << "analytic," << row.name << ',' << format_sig12(row.empirical)
          << ',' << format_sig12(row.analytic) << ',' << format_sig12(row.z)
          << ',' << (ok ? "1" : "0") << "\n";
      }
      return;
    }
    o << "scheme equivalence, P&M vs E-B (|z| < " << format_sig12(eq.z_threshold)
      << "):\n";
    o << "  " << std::left << std::setw(14) << "name" << std::setw(18) << "pm"
      << std::setw(18) << "eb" << std::setw(14) << "z" << "ok\n";
    for (const auto& row : eq.rows) {
      const bool ok = std::fabs(row.z) < eq.z_threshold;
      o << "  " << std::left << std::setw(14) << row.name << std::setw(18)
        << format_sig12(row.pm_value) << std::setw(18)
        << format_sig12(row.eb_value) << std::setw(14) << format_sig12(row.z)
        << (ok ? "yes" : "NO") << "\n";
    }
    o << "analytic targets (|z| < " << format_sig12(kSingleComparisonZ)
      << "):\n";
    o << "  " << std::left << std::setw(14) << "name" << std::setw(18)
      << "empirical" << std::setw(18) << "analytic" << std::setw(14) << "z"
      << "ok\n";
    for (const auto& row : analytic) {
      const bool ok = std::fabs(row.z) < kSingleComparisonZ;
      o << "  " << std::left << std::setw(14) << row.name << std::setw(18)
        << format_sig12(row.empirical) << std::setw(18)
        << format_sig12(row.analytic) << std::setw(14) << format_sig12(row.z)
        << (ok ? "yes" : "NO") << "\n";
    }
  };

  for (const auto& row : eq.rows)
    if (!(std::fabs(row.z) < eq.z_threshold) && first_failure.empty())
      first_failure = row.name;
  for (const auto& row : analytic)
    if (!(std::fabs(row.z) < kSingleComparisonZ) && first_failure.empty())
      first_failure = row.name;

  render(out);
  if (!first_failure.empty()) {
    if (opt.format == "table") out << "result: FAIL\n";
    err << "statistical failure: " << first_failure << "\n";
    return 1;
  }
  if (opt.format == "table") out << "result: PASS\n";
  return 0;
}

}  // namespace cvqkd
