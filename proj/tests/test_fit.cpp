#include <doctest.h>

#include <cmath>
#include <json.hpp>
#include <vector>

#include "rbsim/fit.hpp"
#include "rbsim/rb.hpp"
#include "rbsim/rng.hpp"

using namespace rbsim;

namespace {

SequenceRecord rec(int length, int id, double survival, int shots = 800) {
  SequenceRecord r;
  r.length = length;
  r.sequence_id = id;
  r.survival = survival;
  r.shots = shots;
  return r;
}

std::vector<LengthAggregate> synthetic_aggregates(double a0, double b0, double p,
                                                  const std::vector<int>& lengths,
                                                  double bound = 0.0) {
  std::vector<LengthAggregate> out;
  for (int length : lengths) {
    LengthAggregate a;
    a.length = length;
    a.mean_survival = a0 * std::pow(p, length) + b0;
    a.variance_bound = bound;
    a.n_sequences = 20;
    a.shots = 800;
    out.push_back(a);
  }
  return out;
}

const std::vector<int> kLengths{1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1000};

std::vector<SequenceRecord> binomial_dataset(double a0, double b0, double p,
                                             const RngStream& stream) {
  std::vector<SequenceRecord> records;
  for (std::size_t li = 0; li < kLengths.size(); ++li) {
    double f = a0 * std::pow(p, kLengths[li]) + b0;
    for (int s = 0; s < 20; ++s) {
      records.push_back(rec(kLengths[li], s,
                            sample_survival(f, 800, stream.child(li).child(
                                                        static_cast<std::uint64_t>(s)))));
    }
  }
  return records;
}

}  // namespace

TEST_CASE("aggregate") {
  SUBCASE("perfect survivals give mean 1 and zero bound") {
    std::vector<SequenceRecord> records{rec(1, 0, 1.0), rec(1, 1, 1.0), rec(2, 0, 1.0),
                                        rec(2, 1, 1.0)};
    auto aggs = aggregate(records);
    REQUIRE(aggs.size() == 2);
    CHECK(aggs[0].mean_survival == 1.0);
    CHECK(aggs[0].variance_bound == 0.0);
  }
  SUBCASE("two-sequence worked example") {
    auto aggs = aggregate({rec(4, 0, 0.4), rec(4, 1, 0.6)});
    REQUIRE(aggs.size() == 1);
    CHECK(aggs[0].mean_survival == doctest::Approx(0.5).epsilon(1e-15));
    // sample variance 0.02 / 2 + 0.25 / (800*2)
    CHECK(aggs[0].variance_bound == doctest::Approx(0.01015625).epsilon(1e-12));
  }
  SUBCASE("record order does not matter") {
    std::vector<SequenceRecord> fwd{rec(1, 0, 0.9), rec(1, 1, 0.8), rec(2, 0, 0.7),
                                    rec(2, 1, 0.75)};
    std::vector<SequenceRecord> rev{fwd[3], fwd[0], fwd[2], fwd[1]};
    auto a = aggregate(fwd);
    auto b = aggregate(rev);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].length == b[i].length);
      CHECK(a[i].mean_survival == doctest::Approx(b[i].mean_survival).epsilon(1e-15));
      CHECK(a[i].variance_bound == doctest::Approx(b[i].variance_bound).epsilon(1e-15));
    }
  }
  SUBCASE("fewer than two sequences is an error") {
    CHECK_THROWS_AS(aggregate({rec(1, 0, 1.0), rec(2, 0, 1.0), rec(2, 1, 1.0)}),
                    std::invalid_argument);
  }
}

TEST_CASE("fit_decay") {
  SUBCASE("noiseless synthetic data is recovered to 1e-6") {
    auto fit = fit_decay(synthetic_aggregates(0.47, 0.517, 0.99928, kLengths));
    CHECK(std::abs(fit.a0 - 0.47) < 1e-6);
    CHECK(std::abs(fit.b0 - 0.517) < 1e-6);
    CHECK(std::abs(fit.p - 0.99928) < 1e-6);
    CHECK(fit.avg_error == doctest::Approx((1.0 - fit.p) / 2.0).epsilon(1e-15));
    CHECK(fit.converged);
  }
  SUBCASE("flat data reports zero error within its uncertainty") {
    auto fit = fit_decay(synthetic_aggregates(0.47, 0.517, 1.0, kLengths));
    CHECK(fit.avg_error <= fit.stderr_avg_error + 1e-12);
  }
  SUBCASE("needs four lengths") {
    CHECK_THROWS_AS(fit_decay(synthetic_aggregates(0.5, 0.5, 0.99, {1, 2, 4})),
                    std::invalid_argument);
  }
  SUBCASE("residuals at the optimum are orthogonal to the weighted Jacobian") {
    auto records = binomial_dataset(0.47, 0.517, 0.999, RngStream(404));
    auto aggs = aggregate(records);
    auto fit = fit_decay(aggs);
    REQUIRE(fit.converged);
    REQUIRE(fit.point_variances.size() == aggs.size());
    double g[3] = {0, 0, 0};
    double jn[3] = {0, 0, 0};
    double rn = 0;
    for (std::size_t i = 0; i < aggs.size(); ++i) {
      const auto& a = aggs[i];
      double pl = std::pow(fit.p, a.length);
      double r = fit.a0 * pl + fit.b0 - a.mean_survival;
      double w = 1.0 / fit.point_variances[i];
      double j[3] = {pl, 1.0, fit.a0 * a.length * pl * (1.0 - fit.p)};
      for (int k = 0; k < 3; ++k) {
        g[k] += w * j[k] * r;
        jn[k] += w * j[k] * j[k];
      }
      rn += w * r * r;
    }
    for (int k = 0; k < 3; ++k) {
      double cosine = std::abs(g[k]) / (std::sqrt(jn[k]) * std::sqrt(rn) + 1e-300);
      CHECK(cosine < 1e-8);
    }
  }
  SUBCASE("rescaling all variance bounds moves only the covariance") {
    // perturb means slightly so the fit is not an exact interpolation
    auto aggs = synthetic_aggregates(0.47, 0.517, 0.999, kLengths);
    for (std::size_t i = 0; i < aggs.size(); ++i) {
      aggs[i].mean_survival += ((i % 2) ? 1.0 : -1.0) * 2e-5;
      aggs[i].variance_bound = 1e-4 * (1.0 + 0.37 * static_cast<double>(i));
    }
    auto base = fit_decay(aggs);
    auto scaled_aggs = aggs;
    for (auto& a : scaled_aggs) a.variance_bound *= 7.3;
    auto scaled = fit_decay(scaled_aggs);
    CHECK(scaled.p == doctest::Approx(base.p).epsilon(1e-9));
    CHECK(scaled.a0 == doctest::Approx(base.a0).epsilon(1e-7));
    CHECK(scaled.b0 == doctest::Approx(base.b0).epsilon(1e-7));
    CHECK(scaled.covariance[2][2] ==
          doctest::Approx(base.covariance[2][2] * 7.3).epsilon(1e-5));
    CHECK(scaled.stderr_avg_error ==
          doctest::Approx(base.stderr_avg_error * std::sqrt(7.3)).epsilon(1e-5));
  }
  SUBCASE("covariance is symmetric and positive semi-definite") {
    auto fit = fit_decay(aggregate(binomial_dataset(0.47, 0.517, 0.9995, RngStream(7))));
    const auto& c = fit.covariance;
    for (int i = 0; i < 3; ++i) {
      CHECK(c[i][i] >= -1e-10);
      for (int j = 0; j < 3; ++j) CHECK(c[i][j] == doctest::Approx(c[j][i]).epsilon(1e-9));
    }
    // 2x2 principal minors and determinant
    CHECK(c[0][0] * c[1][1] - c[0][1] * c[0][1] >= -1e-10);
    double det = c[0][0] * (c[1][1] * c[2][2] - c[1][2] * c[1][2]) -
                 c[0][1] * (c[0][1] * c[2][2] - c[1][2] * c[0][2]) +
                 c[0][2] * (c[0][1] * c[1][2] - c[1][1] * c[0][2]);
    CHECK(det >= -1e-12);
  }
}

TEST_CASE("interval coverage under binomial shot noise") {
  // The declared variance bound double-counts shot noise by construction, so
  // nominal 95% intervals over-cover; the acceptance gate is one-sided.
  const double true_p = 0.99928;
  RngStream root(424242);
  int covered = 0;
  double stderr_sum = 0.0, err_abs_sum = 0.0;
  const int trials = 300;
  for (int t = 0; t < trials; ++t) {
    auto fit = fit_decay(
        aggregate(binomial_dataset(0.47, 0.517, true_p, root.child(static_cast<std::uint64_t>(t)))));
    double sd_p = 2.0 * fit.stderr_avg_error;
    if (std::abs(fit.p - true_p) <= 1.96 * sd_p) ++covered;
    stderr_sum += sd_p;
    err_abs_sum += std::abs(fit.p - true_p);
  }
  CHECK(covered >= static_cast<int>(0.90 * trials));
  // intervals must stay informative: reported sigma within 3x of the actual
  // scatter scale (|err| ~ sigma_true * sqrt(2/pi))
  double scatter = err_abs_sum / trials * std::sqrt(3.14159265358979 / 2.0);
  CHECK(stderr_sum / trials < 3.0 * scatter);
  CHECK(stderr_sum / trials > 0.8 * scatter);
}

TEST_CASE("fit report JSON") {
  auto aggs = synthetic_aggregates(0.47, 0.517, 0.9995, kLengths, 1e-6);
  auto fit = fit_decay(aggs);
  auto j = nlohmann::json::parse(fit_report_json(fit, aggs));
  CHECK(j["A0"].get<double>() == doctest::Approx(fit.a0));
  CHECK(j["B0"].get<double>() == doctest::Approx(fit.b0));
  CHECK(j["p"].get<double>() == doctest::Approx(fit.p));
  CHECK(j["avg_error"].get<double>() == doctest::Approx(fit.avg_error));
  CHECK(j["stderr"].get<double>() == doctest::Approx(fit.stderr_avg_error));
  CHECK(j["covariance"].size() == 3);
  CHECK(j["residuals"].size() == kLengths.size());
  CHECK(j["residuals"][0].contains("L"));
  CHECK(j["residuals"][0].contains("variance_bound"));
}
