#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cvqkd/errors.hpp"
#include "cvqkd/protocol.hpp"
#include "cvqkd/rng.hpp"

namespace cvqkd {

/// |z| threshold for a single empirical-vs-analytic comparison.
inline constexpr double kSingleComparisonZ = 4.0;
/// |z| threshold for the multi-comparison equivalence check.
inline constexpr double kEquivalenceZ = 5.0;

/// Seeded Monte Carlo draws of quadrature tuples. Columns are named per
/// variable; primes are written `p` and the two noise kinds are `d` (shot
/// noise, delta) and `D` (source noise, Delta): Q_A, DQ_A, dQ_A, Q, Q_Bp for
/// the prepare-and-measure scheme and Qp, Q, Qp_A, Q_A, Q_Bp for the
/// entanglement-based scheme, plus P analogues.
struct SampleBatch {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::map<std::string, std::vector<double>, std::less<>> columns;

  [[nodiscard]] const std::vector<double>& column(std::string_view name) const {
    const auto it = columns.find(name);
    if (it == columns.end())
      throw Error("SampleBatch: unknown column '" + std::string(name) + "'");
    return it->second;
  }

  [[nodiscard]] bool has_column(std::string_view name) const {
    return columns.find(name) != columns.end();
  }
};

/// A Monte Carlo estimate with its standard error.
struct MomentEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

namespace detail {

// Samples are generated in fixed-size chunks, each drawing from its own
// jump-separated substream, so chunks may be produced in parallel without
// changing the output.
inline constexpr std::size_t kSampleChunk = std::size_t{1} << 16;

template <typename DrawOneSample>
void generate_chunked(std::size_t n, std::uint64_t seed, DrawOneSample&& draw) {
  std::size_t produced = 0;
  for (std::uint64_t chunk = 0; produced < n; ++chunk) {
    NormalStream g(seed, chunk);
    const std::size_t count = std::min(kSampleChunk, n - produced);
    for (std::size_t i = 0; i < count; ++i) draw(g);
    produced += count;
  }
}

inline MomentEstimate mean_with_se(const std::vector<double>& x) {
  const std::size_t n = x.size();
  double sum = 0.0, sumsq = 0.0;
  for (const double v : x) {
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / static_cast<double>(n);
  MomentEstimate est{mean, 0.0, n};
  if (n >= 2) {
    const double var =
        std::max(0.0, (sumsq - static_cast<double>(n) * mean * mean) /
                          static_cast<double>(n - 1));
    est.std_error = std::sqrt(var / static_cast<double>(n));
  }
  return est;
}

// Raw second moments over an index range [lo, hi).
struct RawMoments {
  double tt = 0.0, gg = 0.0, tg = 0.0;
};

inline RawMoments raw_moments(const std::vector<double>& target,
                              const std::vector<double>& given, std::size_t lo,
                              std::size_t hi) {
  RawMoments m;
  for (std::size_t i = lo; i < hi; ++i) {
    m.tt += target[i] * target[i];
    m.gg += given[i] * given[i];
    m.tg += target[i] * given[i];
  }
  const double count = static_cast<double>(hi - lo);
  m.tt /= count;
  m.gg /= count;
  m.tg /= count;
  return m;
}

inline std::size_t batch_count(std::size_t n) { return n >= 10000 ? 100 : 10; }

// Batch-means standard error of a statistic derived from raw moments.
template <typename Statistic>
double batch_means_se(const std::vector<double>& target,
                      const std::vector<double>& given, Statistic&& stat) {
  const std::size_t n = target.size();
  const std::size_t b = batch_count(n);
  const std::size_t m = n / b;
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t k = 0; k < b; ++k) {
    const double s = stat(raw_moments(target, given, k * m, (k + 1) * m));
    sum += s;
    sumsq += s * s;
  }
  const double bf = static_cast<double>(b);
  const double var = std::max(0.0, (sumsq - sum * sum / bf) / (bf - 1.0));
  return std::sqrt(var / bf);
}

}  // namespace detail

/// Prepare-and-measure draws: Q = Q_A + dQ_A + DQ_A with Q_A ~ N(0, V_A),
/// dQ_A ~ N(0,1) shot noise, DQ_A ~ N(0, epsilon_0) source noise, then the
/// channel output Q_Bp = sqrt(T) Q + N(0, (1-T) + T epsilon_c), which
/// reproduces <Q_Bp^2> = T(V + chi). P quadrature analogous.
inline SampleBatch sample_pm(const SourceParams& src, const ChannelParams& ch,
                             std::size_t n, std::uint64_t seed) {
  src.validate();
  ch.validate();
  if (n < 1) throw DomainError("sample_pm: n must be >= 1");

  const double mod_sd = std::sqrt(src.modulation_variance);
  const double src_sd = std::sqrt(src.source_excess_noise);
  const double T = ch.transmittance;
  const double gain = std::sqrt(T);
  const double chan_sd = std::sqrt((1.0 - T) + T * ch.channel_excess_noise);

  SampleBatch batch{n, seed, {}};
  for (const char* name : {"Q_A", "DQ_A", "dQ_A", "Q", "Q_Bp", "P_A", "DP_A",
                           "dP_A", "P", "P_Bp"})
    batch.columns[name].reserve(n);

  auto& qa = batch.columns["Q_A"];
  auto& Dqa = batch.columns["DQ_A"];
  auto& dqa = batch.columns["dQ_A"];
  auto& q = batch.columns["Q"];
  auto& qb = batch.columns["Q_Bp"];
  auto& pa = batch.columns["P_A"];
  auto& Dpa = batch.columns["DP_A"];
  auto& dpa = batch.columns["dP_A"];
  auto& p = batch.columns["P"];
  auto& pb = batch.columns["P_Bp"];

  detail::generate_chunked(n, seed, [&](NormalStream& g) {
    const double vqa = g.next(mod_sd);
    const double vDq = g.next(src_sd);
    const double vdq = g.next();
    const double vpa = g.next(mod_sd);
    const double vDp = g.next(src_sd);
    const double vdp = g.next();
    const double vq = vqa + vdq + vDq;
    const double vp = vpa + vdp + vDp;
    qa.push_back(vqa);
    Dqa.push_back(vDq);
    dqa.push_back(vdq);
    q.push_back(vq);
    qb.push_back(gain * vq + g.next(chan_sd));
    pa.push_back(vpa);
    Dpa.push_back(vDp);
    dpa.push_back(vdp);
    p.push_back(vp);
    pb.push_back(gain * vp + g.next(chan_sd));
  });
  return batch;
}

/// Entanglement-based draws: (Q', Q) bivariate Gaussian with <Q'^2> = V,
/// <Q^2> = V + epsilon_0 and <QQ'> = sqrt(V^2 - 1); heterodyne outcome
/// Qp_A = Q' + N(0,1); Alice's estimate Q_A = sqrt((V-1)/(V+1)) Qp_A. The P
/// sector uses <PP'> = -sqrt(V^2 - 1) and the matching sign flip in the
/// estimate. The channel acts exactly as in sample_pm.
///
/// cross_cov_scale rescales <QQ'> and <PP'>; values != 1 deliberately break
/// the construction and exist for the negative-control test.
inline SampleBatch sample_eb(const SourceParams& src, const ChannelParams& ch,
                             std::size_t n, std::uint64_t seed,
                             double cross_cov_scale = 1.0) {
  src.validate();
  ch.validate();
  if (n < 1) throw DomainError("sample_eb: n must be >= 1");

  const double V = src.v();
  const double e0 = src.source_excess_noise;
  const double alice_sd = std::sqrt(V);
  const double cross = cross_cov_scale * std::sqrt(V * V - 1.0);
  const double slope = cross / alice_sd;  // <QQ'>/sqrt(V)
  const double resid_var = (V + e0) - slope * slope;
  if (resid_var < -1e-12 * (V + e0))
    throw CovarianceError(
        "sample_eb: requested (Q', Q) covariance is not positive "
        "semidefinite (residual variance " +
        std::to_string(resid_var) + ")");
  const double resid_sd = std::sqrt(std::max(resid_var, 0.0));
  const double estimate_gain = std::sqrt((V - 1.0) / (V + 1.0));

  const double T = ch.transmittance;
  const double gain = std::sqrt(T);
  const double chan_sd = std::sqrt((1.0 - T) + T * ch.channel_excess_noise);

  SampleBatch batch{n, seed, {}};
  for (const char* name : {"Qp", "Q", "Qp_A", "Q_A", "Q_Bp", "Pp", "P",
                           "Pp_A", "P_A", "P_Bp"})
    batch.columns[name].reserve(n);

  auto& qp = batch.columns["Qp"];
  auto& q = batch.columns["Q"];
  auto& qpa = batch.columns["Qp_A"];
  auto& qa = batch.columns["Q_A"];
  auto& qb = batch.columns["Q_Bp"];
  auto& pp = batch.columns["Pp"];
  auto& p = batch.columns["P"];
  auto& ppa = batch.columns["Pp_A"];
  auto& pa = batch.columns["P_A"];
  auto& pb = batch.columns["P_Bp"];

  detail::generate_chunked(n, seed, [&](NormalStream& g) {
    const double zq1 = g.next();
    const double zq2 = g.next();
    const double zp1 = g.next();
    const double zp2 = g.next();
    const double vqp = alice_sd * zq1;
    const double vq = slope * zq1 + resid_sd * zq2;
    const double vpp = alice_sd * zp1;
    const double vp = -slope * zp1 + resid_sd * zp2;
    const double vqpa = vqp + g.next();
    const double vppa = vpp + g.next();
    qp.push_back(vqp);
    q.push_back(vq);
    qpa.push_back(vqpa);
    qa.push_back(estimate_gain * vqpa);
    qb.push_back(gain * vq + g.next(chan_sd));
    pp.push_back(vpp);
    p.push_back(vp);
    ppa.push_back(vppa);
    pa.push_back(-estimate_gain * vppa);
    pb.push_back(gain * vp + g.next(chan_sd));
  });
  return batch;
}

/// <col^2> with its standard error.
inline MomentEstimate empirical_second_moment(const SampleBatch& batch,
                                              std::string_view col) {
  const auto& x = batch.column(col);
  std::vector<double> sq(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) sq[i] = x[i] * x[i];
  return detail::mean_with_se(sq);
}

/// <a b> with its standard error.
inline MomentEstimate empirical_cross_moment(const SampleBatch& batch,
                                             std::string_view a,
                                             std::string_view b) {
  const auto& xa = batch.column(a);
  const auto& xb = batch.column(b);
  std::vector<double> prod(xa.size());
  for (std::size_t i = 0; i < xa.size(); ++i) prod[i] = xa[i] * xb[i];
  return detail::mean_with_se(prod);
}

/// Plug-in conditional variance
/// V(target|given) = <target^2> - <target given>^2 / <given^2>,
/// with a batch-means standard error.
inline MomentEstimate empirical_conditional_variance(const SampleBatch& batch,
                                                     std::string_view target,
                                                     std::string_view given) {
  const auto& t = batch.column(target);
  const auto& g = batch.column(given);
  if (batch.n < 100)
    throw DomainError("empirical_conditional_variance: needs n >= 100");

  const auto full = detail::raw_moments(t, g, 0, batch.n);
  if (full.gg < 1e-12)
    throw DegenerateError(
        "empirical_conditional_variance: conditioning column '" +
        std::string(given) + "' has (near) zero variance; use the "
        "unconditional variance instead");

  MomentEstimate est;
  est.n = batch.n;
  est.value = full.tt - full.tg * full.tg / full.gg;
  est.std_error = detail::batch_means_se(
      t, g, [](const detail::RawMoments& m) {
        return m.tt - m.tg * m.tg / m.gg;
      });
  return est;
}

/// Gaussian plug-in mutual information between two jointly Gaussian columns,
/// (1/2) log2(<b^2> / V(b|a)) bits, with a batch-means standard error.
inline MomentEstimate empirical_mutual_information(const SampleBatch& batch,
                                                   std::string_view a,
                                                   std::string_view b) {
  const auto& xa = batch.column(a);
  const auto& xb = batch.column(b);
  if (batch.n < 100)
    throw DomainError("empirical_mutual_information: needs n >= 100");

  const auto full = detail::raw_moments(xb, xa, 0, batch.n);
  if (full.gg < 1e-12)
    throw DegenerateError("empirical_mutual_information: column '" +
                          std::string(a) + "' has (near) zero variance");
  const double cond = full.tt - full.tg * full.tg / full.gg;
  if (!(cond > 1e-12 * full.tt))
    throw DegenerateError(
        "empirical_mutual_information: conditional variance of '" +
        std::string(b) + "' given '" + std::string(a) +
        "' is (near) zero; mutual information diverges");

  MomentEstimate est;
  est.n = batch.n;
  est.value = 0.5 * std::log2(full.tt / cond);
  est.std_error = detail::batch_means_se(
      xb, xa, [](const detail::RawMoments& m) {
        return 0.5 * std::log2(m.tt / (m.tt - m.tg * m.tg / m.gg));
      });
  return est;
}

/// One moment compared between the two schemes.
struct EquivalenceRow {
  std::string name;
  double pm_value = 0.0;
  double eb_value = 0.0;
  double z = 0.0;
};

struct EquivalenceReport {
  std::vector<EquivalenceRow> rows;
  double z_threshold = kEquivalenceZ;
  bool passed = false;
};

namespace detail {

inline double z_score(const MomentEstimate& a, const MomentEstimate& b) {
  const double denom = std::hypot(a.std_error, b.std_error);
  if (denom == 0.0) return a.value == b.value ? 0.0 : std::numeric_limits<double>::infinity();
  return (a.value - b.value) / denom;
}

}  // namespace detail

/// Compares first/second moments and conditional variances between
/// prepare-and-measure and entanglement-based batches drawn with independent
/// substreams of `seed`. Passes iff every |z| < 5.
inline EquivalenceReport equivalence_check(const SampleBatch& pm,
                                           const SampleBatch& eb) {
  EquivalenceReport report;
  const auto add = [&](const std::string& name, const MomentEstimate& a,
                       const MomentEstimate& b) {
    report.rows.push_back({name, a.value, b.value, detail::z_score(a, b)});
  };

  add("<Q_A^2>", empirical_second_moment(pm, "Q_A"),
      empirical_second_moment(eb, "Q_A"));
  add("<Q^2>", empirical_second_moment(pm, "Q"),
      empirical_second_moment(eb, "Q"));
  add("<Q_A Q>", empirical_cross_moment(pm, "Q_A", "Q"),
      empirical_cross_moment(eb, "Q_A", "Q"));
  add("V(Q|Q_A)", empirical_conditional_variance(pm, "Q", "Q_A"),
      empirical_conditional_variance(eb, "Q", "Q_A"));
  add("<Q_Bp^2>", empirical_second_moment(pm, "Q_Bp"),
      empirical_second_moment(eb, "Q_Bp"));
  add("<Q_A Q_Bp>", empirical_cross_moment(pm, "Q_A", "Q_Bp"),
      empirical_cross_moment(eb, "Q_A", "Q_Bp"));
  add("V(Q_Bp|Q_A)", empirical_conditional_variance(pm, "Q_Bp", "Q_A"),
      empirical_conditional_variance(eb, "Q_Bp", "Q_A"));
  add("<P_A^2>", empirical_second_moment(pm, "P_A"),
      empirical_second_moment(eb, "P_A"));
  add("<P_A P>", empirical_cross_moment(pm, "P_A", "P"),
      empirical_cross_moment(eb, "P_A", "P"));
  add("V(P|P_A)", empirical_conditional_variance(pm, "P", "P_A"),
      empirical_conditional_variance(eb, "P", "P_A"));

  report.passed = true;
  for (const auto& row : report.rows)
    if (!(std::fabs(row.z) < report.z_threshold)) report.passed = false;
  return report;
}

/// Draws both schemes at (src, ch, n) and compares them. eb_cross_cov_scale
/// forwards to sample_eb (negative control hook).
inline EquivalenceReport equivalence_check(const SourceParams& src,
                                           const ChannelParams& ch,
                                           std::size_t n, std::uint64_t seed,
                                           double eb_cross_cov_scale = 1.0) {
  if (n < 100000)
    throw DomainError("equivalence_check: needs n >= 1e5 for stable moments");
  const SampleBatch pm = sample_pm(src, ch, n, seed);
  const SampleBatch eb =
      sample_eb(src, ch, n, derive_seed(seed, 0xEBull), eb_cross_cov_scale);
  return equivalence_check(pm, eb);
}

}  // namespace cvqkd
