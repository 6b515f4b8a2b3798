#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "cvqkd/errors.hpp"
#include "cvqkd/gaussian.hpp"

namespace cvqkd {

/// Alice's side of the protocol: Gaussian modulation variance V_A and the
/// trusted excess noise epsilon_0 her source and modulators add. Both in
/// shot-noise units. The total variance of the emitted quadratures relative
/// to vacuum is V = V_A + 1.
struct SourceParams {
  double modulation_variance = 0.0;  ///< V_A >= 0
  double source_excess_noise = 0.0;  ///< epsilon_0 >= 0

  [[nodiscard]] double v() const { return modulation_variance + 1.0; }

  void validate() const {
    if (!(modulation_variance >= 0.0) || !std::isfinite(modulation_variance))
      throw DomainError("modulation variance V_A must be finite and >= 0 (got " +
                        std::to_string(modulation_variance) + ")");
    if (!(source_excess_noise >= 0.0) || !std::isfinite(source_excess_noise))
      throw DomainError("source excess noise epsilon0 must be finite and >= 0 (got " +
                        std::to_string(source_excess_noise) + ")");
  }
};

/// The lossy, noisy Gaussian channel between Alice and Bob.
struct ChannelParams {
  double transmittance = 0.5;        ///< T, strictly inside (0,1)
  double channel_excess_noise = 0.0; ///< epsilon_c >= 0, shot-noise units

  void validate() const {
    if (!(transmittance > 0.0) || !(transmittance < 1.0))
      throw DomainError("transmittance must lie strictly inside (0,1) (got " +
                        std::to_string(transmittance) + ")");
    if (!(channel_excess_noise >= 0.0) || !std::isfinite(channel_excess_noise))
      throw DomainError("channel excess noise epsilon_c must be finite and >= 0 (got " +
                        std::to_string(channel_excess_noise) + ")");
  }
};

/// Everything this library can say about one parameter point.
/// All rates are in bits per channel use; negative rates are reported as-is.
struct KeyRateReport {
  double mutual_info = 0.0;           ///< I(a:b)
  double holevo_direct = 0.0;         ///< chi(a:EF)
  double holevo_reverse = 0.0;        ///< chi(b:EF)
  double k_direct = 0.0;              ///< I(a:b) - chi(a:EF)
  double k_reverse = 0.0;             ///< I(a:b) - chi(b:EF)
  double k_direct_asymptotic = 0.0;   ///< high-modulation limit of k_direct
  double k_reverse_asymptotic = 0.0;  ///< high-modulation limit of k_reverse
  /// Prior-work reverse rate at this V; only defined for a noiseless channel.
  std::optional<double> prior_k_reverse;
};

/// Total added noise referred to the channel input:
///
///     chi = (1 - T)/T + epsilon_0 + epsilon_c.
inline double chi_total(const SourceParams& src, const ChannelParams& ch) {
  src.validate();
  ch.validate();
  return (1.0 - ch.transmittance) / ch.transmittance +
         src.source_excess_noise + ch.channel_excess_noise;
}

/// Covariance matrix of the state Alice and Bob share before measurement:
/// A = V I, B = T(V + chi) I, C = sqrt(T(V^2 - 1)) diag(1,-1).
inline TwoModeCovariance build_gamma_ab(const SourceParams& src,
                                        const ChannelParams& ch) {
  const double chi = chi_total(src, ch);
  const double V = src.v();
  const double T = ch.transmittance;
  const double z = std::sqrt(T * (V * V - 1.0));
  const TwoModeCovariance gamma{Mat2::identity(V),
                                Mat2::identity(T * (V + chi)),
                                Mat2::diagonal(z, -z)};
  require_physical(gamma, "gamma_AB");
  return gamma;
}

/// Covariance matrix of the joint state conditioned on Alice's heterodyne
/// outcome. Alice splits her mode on a balanced beam splitter and reads Q on
/// one output and P on the other; the result is outcome independent.
inline TwoModeCovariance build_gamma_ab_conditioned_on_alice(
    const SourceParams& src, const ChannelParams& ch) {
  const double chi = chi_total(src, ch);
  const double V = src.v();
  const double T = ch.transmittance;
  const TwoModeCovariance gamma{
      Mat2::diagonal(2.0 * V / (V + 1.0), (V + 1.0) / 2.0),
      Mat2::diagonal(T * (1.0 + chi), T * (V + chi)),
      Mat2::diagonal(std::sqrt(2.0 * T * (V - 1.0) / (V + 1.0)),
                     -std::sqrt(T * (V * V - 1.0) / 2.0))};
  require_physical(gamma, "gamma_AB^a");
  return gamma;
}

/// Closed form det gamma_AB = (T + T chi V)^2.
inline double gamma_ab_det_closed(const SourceParams& src,
                                  const ChannelParams& ch) {
  const long double chi = chi_total(src, ch);
  const long double V = src.v();
  const long double T = ch.transmittance;
  const long double r = T + T * chi * V;
  return static_cast<double>(r * r);
}

/// Closed form Delta(gamma_AB) = V^2 - 2T(V^2 - 1) + (TV + T chi)^2.
inline double gamma_ab_delta_closed(const SourceParams& src,
                                    const ChannelParams& ch) {
  const long double chi = chi_total(src, ch);
  const long double V = src.v();
  const long double T = ch.transmittance;
  const long double tv = T * V + T * chi;
  return static_cast<double>(V * V - 2.0L * T * (V * V - 1.0L) + tv * tv);
}

/// Closed form det gamma_AB^a = (T + T chi)(T + T chi V).
inline double gamma_ab_cond_det_closed(const SourceParams& src,
                                       const ChannelParams& ch) {
  const long double chi = chi_total(src, ch);
  const long double V = src.v();
  const long double T = ch.transmittance;
  return static_cast<double>((T + T * chi) * (T + T * chi * V));
}

/// Closed form Delta(gamma_AB^a) = 2T + T^2 chi(1 + chi) + (T^2 chi + (1-T)^2) V.
inline double gamma_ab_cond_delta_closed(const SourceParams& src,
                                         const ChannelParams& ch) {
  const long double chi = chi_total(src, ch);
  const long double V = src.v();
  const long double T = ch.transmittance;
  return static_cast<double>(2.0L * T + T * T * chi * (1.0L + chi) +
                             (T * T * chi + (1.0L - T) * (1.0L - T)) * V);
}

/// Shannon mutual information between Alice's modulation and Bob's homodyne
/// result, I(a:b) = (1/2) log2((V + chi)/(1 + chi)) bits.
inline double mutual_information(const SourceParams& src,
                                 const ChannelParams& ch) {
  const double chi = chi_total(src, ch);
  return 0.5 * std::log2((src.v() + chi) / (1.0 + chi));
}

/// Holevo bound for direct reconciliation,
/// chi(a:EF) = S(gamma_AB) - S(gamma_AB^a).
inline double holevo_direct(const SourceParams& src, const ChannelParams& ch) {
  return entropy_two_mode(build_gamma_ab(src, ch)) -
         entropy_two_mode(build_gamma_ab_conditioned_on_alice(src, ch));
}

/// Holevo bound for reverse reconciliation,
/// chi(b:EF) = S(gamma_AB) - S(gamma_A|b),
/// where gamma_A|b = A - C (Pi B Pi)^+ C^T conditions Alice's mode on Bob's
/// homodyne measurement of Q (Pi = diag(1,0), pseudo-inverse on that row).
inline double holevo_reverse(const SourceParams& src, const ChannelParams& ch) {
  const TwoModeCovariance gamma = build_gamma_ab(src, ch);
  const double b_qq = gamma.b_block.m00;
  if (!(b_qq > std::numeric_limits<double>::min()))
    throw DomainError("holevo_reverse: Bob's Q variance is not positive");

  // Rank-1 Schur complement: subtract outer(c0, c0)/b_qq with c0 the first
  // column of C.
  const double c0q = gamma.c_block.m00;
  const double c0p = gamma.c_block.m10;
  const Mat2 a = gamma.a_block;
  const Mat2 conditioned{a.m00 - c0q * c0q / b_qq, a.m01 - c0q * c0p / b_qq,
                         a.m10 - c0p * c0q / b_qq, a.m11 - c0p * c0p / b_qq};
  return entropy_two_mode(gamma) - entropy_one_mode(conditioned);
}

/// High-modulation limit of the direct-reconciliation lower bound.
inline double k_direct_asymptotic(const SourceParams& src,
                                  const ChannelParams& ch) {
  const double chi = chi_total(src, ch);
  const double T = ch.transmittance;
  const double denom = T * T * chi + (1.0 - T) * (1.0 - T);
  return 0.5 * std::log2(denom / (1.0 + chi)) - std::log2(1.0 - T) -
         entropy_g(T * chi / (1.0 - T)) +
         entropy_g(std::sqrt((1.0 + chi) * chi) * T / std::sqrt(denom));
}

/// High-modulation limit of the reverse-reconciliation lower bound.
inline double k_reverse_asymptotic(const SourceParams& src,
                                   const ChannelParams& ch) {
  const double chi = chi_total(src, ch);
  const double T = ch.transmittance;
  return 0.5 * std::log2(chi / (1.0 + chi)) - std::log2(1.0 - T) -
         entropy_g(T * chi / (1.0 - T));
}

namespace detail {
inline void require_noiseless_channel(const ChannelParams& ch, const char* what) {
  if (ch.channel_excess_noise != 0.0)
    throw PreconditionError(std::string(what) +
                            " is only defined for a noiseless channel "
                            "(epsilon_c = 0, got " +
                            std::to_string(ch.channel_excess_noise) + ")");
}
}  // namespace detail

/// Reverse-reconciliation rate of the untrusted-source analysis this bound
/// is compared against. Only defined for a noiseless channel:
///
///     -(1/2) log2[(T/(V + epsilon_0) + 1 - T) T (1 + chi)].
inline double prior_k_reverse(const SourceParams& src, const ChannelParams& ch) {
  detail::require_noiseless_channel(ch, "prior_k_reverse");
  const double chi = chi_total(src, ch);
  const double V = src.v();
  const double T = ch.transmittance;
  return -0.5 * std::log2((T / (V + src.source_excess_noise) + 1.0 - T) * T *
                          (1.0 + chi));
}

/// High-modulation limit of prior_k_reverse:
/// (1/2) log2[1/(T(1 - T)(1 + chi))].
inline double prior_k_reverse_asymptotic(const SourceParams& src,
                                         const ChannelParams& ch) {
  detail::require_noiseless_channel(ch, "prior_k_reverse_asymptotic");
  const double chi = chi_total(src, ch);
  const double T = ch.transmittance;
  return 0.5 * std::log2(1.0 / (T * (1.0 - T) * (1.0 + chi)));
}

/// Full report for one parameter point. The identities
/// k_direct = mutual_info - holevo_direct and
/// k_reverse = mutual_info - holevo_reverse hold exactly by construction.
inline KeyRateReport key_rates(const SourceParams& src, const ChannelParams& ch) {
  KeyRateReport r;
  r.mutual_info = mutual_information(src, ch);
  r.holevo_direct = holevo_direct(src, ch);
  r.holevo_reverse = holevo_reverse(src, ch);
  r.k_direct = r.mutual_info - r.holevo_direct;
  r.k_reverse = r.mutual_info - r.holevo_reverse;
  r.k_direct_asymptotic = k_direct_asymptotic(src, ch);
  r.k_reverse_asymptotic = k_reverse_asymptotic(src, ch);
  if (ch.channel_excess_noise == 0.0)
    r.prior_k_reverse = prior_k_reverse(src, ch);
  return r;
}

/// The largest source excess noise for which the reverse bound stays
/// positive as T -> 1 (noiseless channel), computed two independent ways.
struct LimitingEpsilon0 {
  double closed_form = 0.0;  ///< (sqrt(1 + 16/e^2) - 1)/2
  double bisection = 0.0;    ///< root of the T -> 1 limit of the reverse bound
};

/// In the T -> 1 limit the reverse bound tends to
///
///     f(epsilon_0) = (1/2) log2(epsilon_0/(1 + epsilon_0))
///                    - log2(e epsilon_0 / 2),
///
/// whose positive root is the limiting epsilon_0. Returns the closed form
/// and a bisection root of f on [0, 1]; they agree to well below 1e-6.
inline LimitingEpsilon0 limiting_epsilon0() {
  constexpr double e = std::numbers::e;
  LimitingEpsilon0 out;
  out.closed_form = 0.5 * (std::sqrt(1.0 + 16.0 / (e * e)) - 1.0);

  const auto f = [](double e0) {
    if (e0 <= 0.0) return std::numeric_limits<double>::infinity();
    return 0.5 * std::log2(e0 / (1.0 + e0)) -
           std::log2(std::numbers::e * e0 / 2.0);
  };

  double lo = 0.0;
  double hi = 1.0;
  if (!(f(lo) > 0.0) || !(f(hi) < 0.0))
    throw ConvergenceError("limiting_epsilon0: no sign change on [0, 1]");

  constexpr int kMaxIter = 200;
  constexpr double kWidthTol = 1e-12;
  int iter = 0;
  while (hi - lo > kWidthTol) {
    if (++iter > kMaxIter)
      throw ConvergenceError("limiting_epsilon0: bisection did not converge "
                             "within 200 iterations");
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  out.bisection = 0.5 * (lo + hi);
  return out;
}

/// Consistency condition for the entanglement-based cross correlation
/// <QQ'> = sqrt(V^2 - 1): true iff V^2 - 1 <= (V + epsilon_0) V - V/(V + epsilon_0).
inline bool validate_eb_covariance_bound(const SourceParams& src) {
  src.validate();
  const double V = src.v();
  const double e0 = src.source_excess_noise;
  const double lhs = V * V - 1.0;
  const double rhs = (V + e0) * V - V / (V + e0);
  return lhs <= rhs + 1e-12 * std::max(1.0, std::fabs(rhs));
}

}  // namespace cvqkd
