#include "rbsim/fit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace rbsim {

namespace {

double logistic(double q) { return 1.0 / (1.0 + std::exp(-q)); }

double logit(double p) { return std::log(p / (1.0 - p)); }

struct Model {
  double a0, b0, q;
  double p() const { return logistic(q); }
  double eval(double length) const { return a0 * std::pow(p(), length) + b0; }
};

// Solve A x = b for small n with partial pivoting; returns false when singular.
bool solve(std::array<std::array<double, 3>, 3> a, std::array<double, 3> b, int n,
           std::array<double, 3>& x) {
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int row = col + 1; row < n; ++row) {
      if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
    }
    if (std::abs(a[pivot][col]) < 1e-300) return false;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (int row = col + 1; row < n; ++row) {
      double f = a[row][col] / a[col][col];
      for (int k = col; k < n; ++k) a[row][k] -= f * a[col][k];
      b[row] -= f * b[col];
    }
  }
  for (int row = n - 1; row >= 0; --row) {
    double s = b[row];
    for (int k = row + 1; k < n; ++k) s -= a[row][k] * x[k];
    x[row] = s / a[row][row];
  }
  return true;
}

bool invert3(const std::array<std::array<double, 3>, 3>& a,
             std::array<std::array<double, 3>, 3>& inv) {
  for (int col = 0; col < 3; ++col) {
    std::array<double, 3> e{};
    e[col] = 1.0;
    std::array<double, 3> x{};
    if (!solve(a, e, 3, x)) return false;
    for (int row = 0; row < 3; ++row) inv[row][col] = x[row];
  }
  // symmetrize: the normal matrix is symmetric, keep its inverse exactly so
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      double m = 0.5 * (inv[i][j] + inv[j][i]);
      inv[i][j] = inv[j][i] = m;
    }
  }
  return true;
}

struct LmResult {
  Model model;
  bool converged = false;
  int iterations = 0;
  double cost = 0.0;
};

// SPAM parameters are probability-like; the box blocks the degenerate
// (a0 -> inf, p -> 1) valley of a0 p^L + b0 that shot-level weights can
// otherwise make attractive. Slack of 0.05 leaves room for noise around
// physical boundaries.
constexpr double kSpamLo = -0.05;
constexpr double kSpamHi = 1.05;

// Damped least squares on F(L) = a0 p^L + b0 with p through the logistic
// transform. `free3` fits (a0, b0, q); otherwise q alone with a0, b0 frozen.
LmResult levenberg_marquardt(const std::vector<LengthAggregate>& data,
                             const std::vector<double>& weights, Model start, bool free3) {
  const int n = free3 ? 3 : 1;
  Model cur = start;

  auto cost_of = [&](const Model& m) {
    double c = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      double r = m.eval(data[i].length) - data[i].mean_survival;
      c += weights[i] * r * r;
    }
    return c;
  };

  double cost = cost_of(cur);
  double lambda = 1e-3;
  bool converged = false;
  int iter = 0;
  for (; iter < 200 && !converged; ++iter) {
    double p = cur.p();
    std::array<std::array<double, 3>, 3> h{};
    std::array<double, 3> g{};
    for (std::size_t i = 0; i < data.size(); ++i) {
      double length = data[i].length;
      double pl = std::pow(p, length);
      double r = cur.a0 * pl + cur.b0 - data[i].mean_survival;
      // Jacobian in (a0, b0, q); dF/dq = a0 L p^L (1-p)
      std::array<double, 3> j{};
      if (free3) {
        j = {pl, 1.0, cur.a0 * length * pl * (1.0 - p)};
      } else {
        j = {cur.a0 * length * pl * (1.0 - p), 0.0, 0.0};
      }
      double w = weights[i];
      for (int a = 0; a < n; ++a) {
        g[a] += w * j[a] * r;
        for (int b = 0; b < n; ++b) h[a][b] += w * j[a] * j[b];
      }
    }

    bool accepted = false;
    while (lambda < 1e14) {
      auto damped = h;
      for (int a = 0; a < n; ++a) {
        damped[a][a] += lambda * (h[a][a] > 0.0 ? h[a][a] : 1e-12);
      }
      std::array<double, 3> step{};
      std::array<double, 3> rhs{-g[0], -g[1], -g[2]};
      if (!solve(damped, rhs, n, step)) {
        lambda *= 4.0;
        continue;
      }
      Model trial = cur;
      if (free3) {
        trial.a0 += step[0];
        trial.b0 += step[1];
        trial.q += step[2];
      } else {
        trial.q += step[0];
      }
      trial.q = std::clamp(trial.q, -45.0, 45.0);
      if (trial.a0 < kSpamLo || trial.a0 > kSpamHi || trial.b0 < kSpamLo ||
          trial.b0 > kSpamHi) {
        lambda *= 4.0;
        continue;
      }
      double trial_cost = cost_of(trial);
      if (trial_cost <= cost) {
        double step_norm = 0.0, base_norm = 1.0;
        for (int a = 0; a < n; ++a) step_norm += step[a] * step[a];
        base_norm += cur.a0 * cur.a0 + cur.b0 * cur.b0 + cur.q * cur.q;
        bool small_step = std::sqrt(step_norm / base_norm) < 1e-10;
        bool small_gain = (cost - trial_cost) <= 1e-18 * (cost + 1e-300);
        cur = trial;
        cost = trial_cost;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (small_step || small_gain) converged = true;
        break;
      }
      lambda *= 4.0;
    }
    if (!accepted) {
      // Damping exhausted: the surface is flat at this scale.
      converged = true;
    }
  }
  return {cur, converged, iter, cost};
}

// Weighted linear solve for (a0, b0) at fixed p; the model is linear in both.
// Leaves the model untouched when the system is degenerate (p ~ 1).
void refit_spam_linear(const std::vector<LengthAggregate>& data,
                       const std::vector<double>& weights, Model& m) {
  double p = m.p();
  double sxx = 0.0, sx = 0.0, sw = 0.0, sxy = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    double x = std::pow(p, data[i].length);
    double w = weights[i];
    sxx += w * x * x;
    sx += w * x;
    sw += w;
    sxy += w * x * data[i].mean_survival;
    sy += w * data[i].mean_survival;
  }
  double det = sxx * sw - sx * sx;
  if (std::abs(det) < 1e-14 * (sxx * sw + 1e-300)) return;
  m.a0 = (sxy * sw - sx * sy) / det;
  m.b0 = (sxx * sy - sx * sxy) / det;
}

}  // namespace

std::vector<LengthAggregate> aggregate(const std::vector<SequenceRecord>& records) {
  std::map<int, std::vector<const SequenceRecord*>> by_length;
  for (const SequenceRecord& r : records) by_length[r.length].push_back(&r);

  std::vector<LengthAggregate> out;
  out.reserve(by_length.size());
  for (const auto& [length, group] : by_length) {
    if (group.size() < 2) {
      throw std::invalid_argument("aggregate: need >= 2 sequences per length, L=" +
                                  std::to_string(length));
    }
    LengthAggregate a;
    a.length = length;
    a.n_sequences = static_cast<int>(group.size());
    a.shots = group.front()->shots;
    double mean = 0.0;
    for (const auto* r : group) {
      if (r->shots != a.shots) throw std::invalid_argument("aggregate: mixed shot counts");
      mean += r->survival;
    }
    mean /= static_cast<double>(a.n_sequences);
    double var = 0.0;
    for (const auto* r : group) {
      double d = r->survival - mean;
      var += d * d;
    }
    var /= static_cast<double>(a.n_sequences - 1);
    double n = static_cast<double>(a.n_sequences);
    a.mean_survival = mean;
    a.variance_bound =
        var / n + mean * (1.0 - mean) / (static_cast<double>(a.shots) * n);
    out.push_back(a);
  }
  return out;
}

DecayFit fit_decay(const std::vector<LengthAggregate>& aggregates, double spam_a0,
                   double spam_b0) {
  if (aggregates.size() < 4) {
    throw std::invalid_argument("fit_decay: need >= 4 distinct lengths");
  }
  std::vector<LengthAggregate> data = aggregates;
  std::sort(data.begin(), data.end(),
            [](const LengthAggregate& x, const LengthAggregate& y) { return x.length < y.length; });

  // Crude starting decay rate from the first and last usable points.
  double p0 = 0.999;
  {
    const auto& first = data.front();
    const auto& last = data.back();
    double x1 = (first.mean_survival - spam_b0) / spam_a0;
    double xn = (last.mean_survival - spam_b0) / spam_a0;
    if (x1 > 1e-9 && xn > 1e-9 && xn < x1) {
      p0 = std::pow(xn / x1, 1.0 / static_cast<double>(last.length - first.length));
    }
  }
  p0 = std::clamp(p0, 1e-6, 1.0 - 1e-12);

  // Pass 1: unweighted, SPAM frozen, p alone.
  std::vector<double> unit(data.size(), 1.0);
  LmResult pass1 =
      levenberg_marquardt(data, unit, Model{spam_a0, spam_b0, logit(p0)}, false);

  // Variance bounds for the weighted pass: each aggregate bound is floored by
  // the pass-1 residual scale. The floor keeps points whose empirical spread
  // is far tighter than the model's actual misfit from acquiring runaway
  // weight (and keeps degenerate all-equal aggregates finite).
  double rss = 0.0;
  for (const auto& d : data) {
    double r = pass1.model.eval(d.length) - d.mean_survival;
    rss += r * r;
  }
  double s1 = rss / static_cast<double>(data.size() - 1);
  double floor = std::max(s1, 1e-300);

  std::vector<double> weights(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    weights[i] = 1.0 / std::max(data[i].variance_bound, floor);
  }

  // Pass 2: all three parameters, weighted. A p^L + B is nearly degenerate
  // along (A, 1-p) near p = 1, so run the damped fit from several
  // deterministic starts and keep the lowest-cost optimum.
  std::vector<Model> starts;
  {
    Model warm = pass1.model;
    for (int round = 0; round < 2; ++round) {
      refit_spam_linear(data, weights, warm);
      warm = levenberg_marquardt(data, weights, warm, false).model;
    }
    refit_spam_linear(data, weights, warm);
    warm.a0 = std::clamp(warm.a0, kSpamLo, kSpamHi);
    warm.b0 = std::clamp(warm.b0, kSpamLo, kSpamHi);
    starts.push_back(warm);
  }
  starts.push_back(pass1.model);
  {
    // SPAM-free start: endpoints through a0 = b0 = 1/2.
    double x1 = std::clamp((data.front().mean_survival - 0.5) / 0.5, 1e-9, 1.0);
    double xn = std::clamp((data.back().mean_survival - 0.5) / 0.5, 1e-9, 1.0);
    double pg = 0.999;
    if (xn < x1) {
      pg = std::pow(xn / x1, 1.0 / static_cast<double>(data.back().length - data.front().length));
    }
    pg = std::clamp(pg, 1e-6, 1.0 - 1e-12);
    starts.push_back(Model{0.5, 0.5, logit(pg)});
  }
  LmResult pass2 = levenberg_marquardt(data, weights, starts.front(), true);
  for (std::size_t s = 1; s < starts.size(); ++s) {
    LmResult alt = levenberg_marquardt(data, weights, starts[s], true);
    if (alt.cost < pass2.cost) pass2 = alt;
  }

  DecayFit fit;
  fit.a0 = pass2.model.a0;
  fit.b0 = pass2.model.b0;
  fit.p = pass2.model.p();
  fit.avg_error = (1.0 - fit.p) / 2.0;
  fit.point_variances.reserve(weights.size());
  for (double w : weights) fit.point_variances.push_back(1.0 / w);
  fit.converged = pass2.converged;
  if (!pass2.converged) fit.flags.push_back("max-iterations");
  if (!(fit.p > 0.0 && fit.p <= 1.05)) fit.flags.push_back("p-out-of-range");
  if (fit.a0 < kSpamLo + 1e-9 || fit.a0 > kSpamHi - 1e-9 || fit.b0 < kSpamLo + 1e-9 ||
      fit.b0 > kSpamHi - 1e-9) {
    fit.flags.push_back("spam-at-bound");
  }

  // Covariance from the weighted normal equations at the optimum, mapped from
  // q-space to p-space by the delta method.
  std::array<std::array<double, 3>, 3> h{};
  double p = fit.p;
  for (std::size_t i = 0; i < data.size(); ++i) {
    double length = data[i].length;
    double pl = std::pow(p, length);
    std::array<double, 3> j{pl, 1.0, fit.a0 * length * pl * (1.0 - p)};
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) h[a][b] += weights[i] * j[a] * j[b];
    }
  }
  std::array<std::array<double, 3>, 3> cov{};
  if (invert3(h, cov)) {
    double dpdq = p * (1.0 - p);
    for (int a = 0; a < 3; ++a) {
      cov[a][2] *= dpdq;
      cov[2][a] *= dpdq;
    }
  } else {
    fit.flags.push_back("singular-covariance");
    for (int a = 0; a < 3; ++a) cov[a][a] = 1e12;
  }
  fit.covariance = cov;
  // avg_error lives in [0, 1/2]; a half-width beyond that range carries no
  // extra information, so truncate the reported uncertainty there.
  fit.stderr_avg_error = std::min(std::sqrt(std::max(cov[2][2], 0.0)) / 2.0, 0.5);
  return fit;
}

std::string fit_report_json(const DecayFit& fit, const std::vector<LengthAggregate>& aggregates) {
  nlohmann::json j;
  j["A0"] = fit.a0;
  j["B0"] = fit.b0;
  j["p"] = fit.p;
  j["avg_error"] = fit.avg_error;
  j["stderr"] = fit.stderr_avg_error;
  j["converged"] = fit.converged;
  j["flags"] = fit.flags;
  j["covariance"] = {{fit.covariance[0][0], fit.covariance[0][1], fit.covariance[0][2]},
                     {fit.covariance[1][0], fit.covariance[1][1], fit.covariance[1][2]},
                     {fit.covariance[2][0], fit.covariance[2][1], fit.covariance[2][2]}};
  j["residuals"] = nlohmann::json::array();
  for (const auto& a : aggregates) {
    double model = fit.a0 * std::pow(fit.p, a.length) + fit.b0;
    j["residuals"].push_back({{"L", a.length},
                              {"mean", a.mean_survival},
                              {"variance_bound", a.variance_bound},
                              {"fit", model},
                              {"residual", a.mean_survival - model}});
  }
  return j.dump(2);
}

}  // namespace rbsim
