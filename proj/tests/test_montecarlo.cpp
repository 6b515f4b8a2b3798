#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>

#include "cvqkd/montecarlo.hpp"

using Catch::Matchers::WithinAbs;
using namespace cvqkd;

namespace {

constexpr std::size_t kN = 150000;
const SourceParams kSrc{19.0, 0.1};        // V = 20
const ChannelParams kCh{0.5, 0.05};        // chi = 1.15

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// |empirical - target| measured in standard errors
double pull(const MomentEstimate& est, double target) {
  return std::fabs(est.value - target) / est.std_error;
}

}  // namespace

TEST_CASE("sampling is bit-reproducible for a fixed seed") {
  const SampleBatch a = sample_pm(kSrc, kCh, 70000, 1234);
  const SampleBatch b = sample_pm(kSrc, kCh, 70000, 1234);
  REQUIRE(a.columns.size() == b.columns.size());
  for (const auto& [name, col] : a.columns) {
    CHECK(col.size() == 70000);
    CHECK(bitwise_equal(col, b.column(name)));
  }
  const SampleBatch c = sample_pm(kSrc, kCh, 70000, 1235);
  CHECK_FALSE(bitwise_equal(a.column("Q"), c.column("Q")));

  const SampleBatch ea = sample_eb(kSrc, kCh, 70000, 99);
  const SampleBatch eb = sample_eb(kSrc, kCh, 70000, 99);
  for (const auto& [name, col] : ea.columns)
    CHECK(bitwise_equal(col, eb.column(name)));
}

TEST_CASE("P&M batch reproduces the analytic moments") {
  const SampleBatch pm = sample_pm(kSrc, kCh, kN, 42);
  const double chi = chi_total(kSrc, kCh);
  const double V = kSrc.v();
  const double T = kCh.transmittance;

  SECTION("source conditional variance") {
    const auto est = empirical_conditional_variance(pm, "Q", "Q_A");
    CHECK(pull(est, 1.0 + kSrc.source_excess_noise) < 4.0);
    const auto estp = empirical_conditional_variance(pm, "P", "P_A");
    CHECK(pull(estp, 1.0 + kSrc.source_excess_noise) < 4.0);
  }
  SECTION("channel output variance") {
    const auto est = empirical_second_moment(pm, "Q_Bp");
    CHECK(pull(est, T * (V + chi)) < 4.0);
  }
  SECTION("channel conditional variance") {
    const auto est = empirical_conditional_variance(pm, "Q_Bp", "Q_A");
    CHECK(pull(est, T * (1.0 + chi)) < 4.0);
  }
  SECTION("std_error positive and value sane") {
    const auto est = empirical_second_moment(pm, "Q");
    CHECK(est.std_error > 0.0);
    CHECK(est.n == kN);
  }
}

TEST_CASE("P&M channel reduces to identity in the lossless noiseless limit") {
  const SourceParams src{3.0, 0.0};
  const ChannelParams ideal{1.0 - 1e-12, 0.0};
  const SampleBatch pm = sample_pm(src, ideal, 5000, 7);
  const auto& q = pm.column("Q");
  const auto& qb = pm.column("Q_Bp");
  double max_diff = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i)
    max_diff = std::max(max_diff, std::fabs(q[i] - qb[i]));
  CHECK(max_diff < 1e-4);
}

TEST_CASE("E-B batch reproduces the analytic moments") {
  const SampleBatch eb = sample_eb(kSrc, kCh, kN, 314);
  const double V = kSrc.v();

  SECTION("Alice's estimate has variance V - 1") {
    CHECK(pull(empirical_second_moment(eb, "Q_A"), V - 1.0) < 4.0);
    CHECK(pull(empirical_second_moment(eb, "P_A"), V - 1.0) < 4.0);
  }
  SECTION("conditional variance matches the trusted-source noise") {
    const auto est = empirical_conditional_variance(eb, "Q", "Q_A");
    CHECK(pull(est, 1.0 + kSrc.source_excess_noise) < 4.0);
  }
  SECTION("estimate correlates positively with both quadratures") {
    CHECK(empirical_cross_moment(eb, "Q_A", "Q").value > 0.0);
    CHECK(empirical_cross_moment(eb, "P_A", "P").value > 0.0);
  }
  SECTION("sampled covariance respects the heterodyne bound") {
    // <Q^2><Q'^2> - <Q'^2>/<P^2> - <QQ'>^2 stays positive: analytic slack
    // is V eps0 + 1 - V/(V + eps0), far above the sampling noise here.
    const double qq = empirical_second_moment(eb, "Q").value;
    const double qpqp = empirical_second_moment(eb, "Qp").value;
    const double pp = empirical_second_moment(eb, "P").value;
    const double cross = empirical_cross_moment(eb, "Q", "Qp").value;
    CHECK(qq * qpqp - qpqp / pp - cross * cross > 0.0);
  }
}

TEST_CASE("E-B with V = 1 has no correlations and a silent estimate") {
  const SourceParams src{0.0, 0.2};
  const SampleBatch eb = sample_eb(src, kCh, 50000, 11);
  const auto cross = empirical_cross_moment(eb, "Q", "Qp");
  CHECK(std::fabs(cross.value) < 4.0 * cross.std_error);
  for (const double v : eb.column("Q_A")) CHECK(v == 0.0);
  for (const double v : eb.column("P_A")) CHECK(v == 0.0);
}

TEST_CASE("sample_eb rejects an impossible covariance") {
  CHECK_THROWS_AS(sample_eb({1.0, 0.0}, kCh, 100, 1, 10.0), CovarianceError);
}

TEST_CASE("estimator edge cases") {
  const SampleBatch pm = sample_pm(kSrc, kCh, 10000, 5);

  SECTION("unknown column") {
    CHECK_THROWS_AS(pm.column("nope"), Error);
    CHECK(pm.has_column("Q_A"));
    CHECK_FALSE(pm.has_column("nope"));
  }
  SECTION("conditioning on an independent column returns the plain variance") {
    const auto cond = empirical_conditional_variance(pm, "dQ_A", "P_A");
    CHECK_THAT(cond.value, WithinAbs(1.0, 4.0 * cond.std_error));
  }
  SECTION("degenerate conditioning column") {
    const SampleBatch flat = sample_eb({0.0, 0.1}, kCh, 10000, 3);
    CHECK_THROWS_AS(empirical_conditional_variance(flat, "Q", "Q_A"),
                    DegenerateError);
  }
  SECTION("minimum sample size") {
    const SampleBatch tiny = sample_pm(kSrc, kCh, 50, 2);
    CHECK_THROWS_AS(empirical_conditional_variance(tiny, "Q", "Q_A"),
                    DomainError);
  }
}

TEST_CASE("empirical mutual information") {
  const SampleBatch pm = sample_pm(kSrc, kCh, kN, 2718);

  SECTION("matches the analytic value") {
    const auto est = empirical_mutual_information(pm, "Q_A", "Q_Bp");
    CHECK(pull(est, mutual_information(kSrc, kCh)) < 4.0);
  }
  SECTION("independent columns carry none") {
    const auto est = empirical_mutual_information(pm, "Q_A", "P_Bp");
    CHECK(std::fabs(est.value) < 4.0 * est.std_error + 1e-4);
  }
  SECTION("identical columns diverge") {
    CHECK_THROWS_AS(empirical_mutual_information(pm, "Q", "Q"),
                    DegenerateError);
  }
}

TEST_CASE("standard errors shrink like 1/sqrt(n)") {
  const auto se_at = [&](std::size_t n, std::uint64_t seed) {
    return empirical_second_moment(sample_pm(kSrc, kCh, n, seed), "Q_Bp")
        .std_error;
  };
  const double r = se_at(50000, 1) / se_at(100000, 2);
  const double expected = std::sqrt(2.0);
  CHECK(r > expected / 1.6);
  CHECK(r < expected * 1.6);

  const auto cond_se_at = [&](std::size_t n, std::uint64_t seed) {
    return empirical_conditional_variance(sample_pm(kSrc, kCh, n, seed), "Q",
                                          "Q_A")
        .std_error;
  };
  const double rc = cond_se_at(50000, 3) / cond_se_at(100000, 4);
  CHECK(rc > expected / 1.6);
  CHECK(rc < expected * 1.6);
}

TEST_CASE("equivalence of the two schemes") {
  SECTION("passes for valid parameters") {
    const EquivalenceReport rep = equivalence_check(kSrc, kCh, kN, 42);
    CHECK(rep.passed);
    CHECK(rep.rows.size() == 10);
    for (const auto& row : rep.rows) CHECK(std::fabs(row.z) < 5.0);
  }
  SECTION("passes with a shot-noise-limited source") {
    const SourceParams clean{19.0, 0.0};
    const EquivalenceReport rep = equivalence_check(clean, kCh, kN, 43);
    CHECK(rep.passed);
    for (const auto& row : rep.rows)
      if (row.name == "V(Q|Q_A)") {
        CHECK_THAT(row.pm_value, WithinAbs(1.0, 0.05));
        CHECK_THAT(row.eb_value, WithinAbs(1.0, 0.05));
      }
  }
  SECTION("corrupted E-B covariance fails on the cross moment") {
    const EquivalenceReport rep = equivalence_check(kSrc, kCh, kN, 42, 0.5);
    CHECK_FALSE(rep.passed);
    bool cross_failed = false;
    for (const auto& row : rep.rows)
      if (row.name == "<Q_A Q>" && std::fabs(row.z) >= 5.0) cross_failed = true;
    CHECK(cross_failed);
  }
  SECTION("refuses tiny sample counts") {
    CHECK_THROWS_AS(equivalence_check(kSrc, kCh, 1000, 1), DomainError);
  }
}
