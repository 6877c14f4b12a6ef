#include "msstop/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

#include "msstop/errors.hpp"
#include "msstop/transforms.hpp"

namespace msstop {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double top = std::max(a, b);
  return top + std::log1p(std::exp(-std::abs(a - b)));
}

double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }
double safe_log1m(double x) { return x < 1.0 ? std::log1p(-x) : kNegInf; }

bool all_zero(std::span<const std::uint8_t> s) {
  return std::all_of(s.begin(), s.end(), [](std::uint8_t x) { return x == 0; });
}

}  // namespace

double ScaledProbability::log() const noexcept {
  return mantissa > 0.0 ? std::log(mantissa) + log_scale : kNegInf;
}

double ScaledProbability::value() const noexcept { return mantissa * std::exp(log_scale); }

Eigen::RowVectorXd build_secondary_initial(double first_arrival, const Eigen::VectorXd& alpha, int max_age) {
  const auto G = alpha.size();
  if (max_age < 1) throw StructureError("maximum secondary age must be at least 1");
  Eigen::RowVectorXd pi = Eigen::RowVectorXd::Zero(max_age * G + 2);
  pi[0] = 1.0 - first_arrival;
  pi.segment(1, G) = first_arrival * alpha.transpose();
  return pi;
}

Eigen::MatrixXd build_secondary_transition(double conditional_arrival, const Eigen::VectorXd& alpha,
                                           const Eigen::VectorXd& retention, const Eigen::MatrixXd& psi,
                                           int max_age) {
  const auto G = alpha.size();
  if (psi.rows() != G || psi.cols() != G) throw StructureError("Psi must be G x G");
  if (max_age < 1) throw StructureError("maximum secondary age must be at least 1");
  if (retention.size() < max_age - 1) throw StructureError("need a retention value for every age below the maximum");
  const auto n = max_age * G + 2;
  const auto departed = n - 1;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  m(0, 0) = 1.0 - conditional_arrival;
  m.block(0, 1, 1, G) = conditional_arrival * alpha.transpose();
  for (int a = 0; a + 1 < max_age; ++a) {
    const double phi = retention[a];
    m.block(1 + a * G, 1 + (a + 1) * G, G, G) = phi * psi;
    m.block(1 + a * G, departed, G, 1).setConstant(1.0 - phi);
  }
  m.block(1 + (max_age - 1) * G, departed, G, 1).setOnes();
  m(departed, departed) = 1.0;
  return m;
}

Eigen::VectorXd build_observation_diagonal(int outcome, const Eigen::MatrixXd& capture, int max_age) {
  const auto G = capture.rows();
  if (capture.cols() < max_age) throw StructureError("capture matrix needs one column per age");
  if (outcome < 0 || outcome > G) {
    throw InputError("outcome " + std::to_string(outcome) + " outside 0.." + std::to_string(G));
  }
  Eigen::VectorXd d = Eigen::VectorXd::Zero(max_age * G + 2);
  if (outcome == 0) {
    d[0] = 1.0;
    d[d.size() - 1] = 1.0;
    for (int a = 0; a < max_age; ++a) {
      for (Eigen::Index g = 0; g < G; ++g) d[1 + a * G + g] = 1.0 - capture(g, a);
    }
  } else {
    const int g = outcome - 1;
    for (int a = 0; a < max_age; ++a) d[1 + a * G + g] = capture(g, a);
  }
  return d;
}

Eigen::RowVectorXd build_primary_initial(double first_recruitment, int max_age) {
  Eigen::RowVectorXd pi = Eigen::RowVectorXd::Zero(max_age + 2);
  pi[0] = 1.0 - first_recruitment;
  pi[1] = first_recruitment;
  return pi;
}

Eigen::MatrixXd build_primary_transition(double conditional_recruitment, const Eigen::VectorXd& survival,
                                         int max_age) {
  if (survival.size() < max_age - 1) throw StructureError("need a survival value for every age below the maximum");
  const int n = max_age + 2;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  m(0, 0) = 1.0 - conditional_recruitment;
  m(0, 1) = conditional_recruitment;
  for (int A = 1; A < max_age; ++A) {
    m(A, A + 1) = survival[A - 1];
    m(A, n - 1) = 1.0 - survival[A - 1];
  }
  m(max_age, n - 1) = 1.0;
  m(n - 1, n - 1) = 1.0;
  return m;
}

LikelihoodModel::LikelihoodModel(const ParameterSet& params, const StudyDesign& design)
    : design_(design), params_(params) {
  validate(params_, design_, 1e-9);
  recruitment_star_ = conditional_recruitment(params_.r);
  for (const auto& b : params_.beta) arrival_star_.push_back(conditional_arrival(b));
  for (int t = 0; t < design_.periods(); ++t) {
    const std::vector<std::uint8_t> zeros(static_cast<std::size_t>(design_.occasions(t)), 0);
    zero_.push_back(period_likelihood(t, zeros));
  }
}

ScaledProbability LikelihoodModel::period_likelihood(int t, std::span<const std::uint8_t> slice) const {
  const auto ti = static_cast<std::size_t>(t);
  const int K = design_.occasions(t);
  if (static_cast<int>(slice.size()) != K) throw StructureError("period slice has the wrong length");
  const int G = design_.states();
  const int ages = design_.max_secondary_age(t);
  const int n = ages * G + 2;
  const int departed = n - 1;
  const auto& alpha = params_.alpha[ti];
  const auto& psi = params_.psi[ti];
  const auto& phi = params_.phi[ti];
  const auto& beta_star = arrival_star_[ti];

  auto observe = [&](Eigen::VectorXd& v, int k, int outcome, int oldest) {
    const auto& p = params_.p[ti][static_cast<std::size_t>(k)];
    if (outcome == 0) {
      for (int a = 0; a <= oldest; ++a) {
        for (int g = 0; g < G; ++g) v[1 + a * G + g] *= 1.0 - p(g, a);
      }
      return;
    }
    if (outcome > G) throw InputError("outcome exceeds the number of states");
    const int hit = outcome - 1;
    v[0] = 0.0;
    v[departed] = 0.0;
    for (int a = 0; a <= oldest; ++a) {
      for (int g = 0; g < G; ++g) v[1 + a * G + g] *= g == hit ? p(g, a) : 0.0;
    }
  };

  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd next(n);
  v[0] = 1.0 - beta_star[0];
  for (int g = 0; g < G; ++g) v[1 + g] = beta_star[0] * alpha[g];
  observe(v, 0, slice[0], 0);

  double log_scale = 0.0;
  for (int k = 1; k < K; ++k) {
    double total = v.sum();
    if (!(total > 0.0)) return {0.0, 0.0};
    v /= total;
    log_scale += std::log(total);

    // Ages present before the step: 0..min(k-1, ages-1).
    const int oldest = std::min(k - 1, ages - 1);
    const double b = beta_star[k];
    next.setZero();
    next[0] = v[0] * (1.0 - b);
    for (int g = 0; g < G; ++g) next[1 + g] = v[0] * b * alpha[g];
    double leaving = v[departed];
    for (int a = 0; a <= oldest; ++a) {
      const double* from = v.data() + 1 + a * G;
      double present = 0.0;
      for (int g = 0; g < G; ++g) present += from[g];
      if (a + 1 < ages) {
        const double keep = phi(k - 1, a);
        double* to = next.data() + 1 + (a + 1) * G;
        for (int h = 0; h < G; ++h) {
          double moved = 0.0;
          for (int g = 0; g < G; ++g) moved += from[g] * psi(g, h);
          to[h] = keep * moved;
        }
        leaving += (1.0 - keep) * present;
      } else {
        leaving += present;
      }
    }
    next[departed] = leaving;
    std::swap(v, next);
    observe(v, k, slice[static_cast<std::size_t>(k)], std::min(k, ages - 1));
  }
  const double total = v.sum();
  if (!(total > 0.0)) return {0.0, 0.0};
  return {total, log_scale};
}

ScaledProbability LikelihoodModel::period_likelihood_dense(int t, std::span<const std::uint8_t> slice) const {
  const auto ti = static_cast<std::size_t>(t);
  const int K = design_.occasions(t);
  const int ages = design_.max_secondary_age(t);
  Eigen::RowVectorXd v = build_secondary_initial(params_.beta[ti][0], params_.alpha[ti], ages);
  v = v.cwiseProduct(build_observation_diagonal(slice[0], params_.p[ti][0], ages).transpose());
  double log_scale = 0.0;
  for (int k = 1; k < K; ++k) {
    const double total = v.sum();
    if (!(total > 0.0)) return {0.0, 0.0};
    v /= total;
    log_scale += std::log(total);
    const Eigen::VectorXd retention = params_.phi[ti].row(k - 1).transpose();
    v = v * build_secondary_transition(arrival_star_[ti][k], params_.alpha[ti], retention, params_.psi[ti], ages);
    v = v.cwiseProduct(
        build_observation_diagonal(slice[static_cast<std::size_t>(k)], params_.p[ti][static_cast<std::size_t>(k)], ages)
            .transpose());
  }
  const double total = v.sum();
  if (!(total > 0.0)) return {0.0, 0.0};
  return {total, log_scale};
}

double LikelihoodModel::combine_periods(const std::vector<double>& log_period, const std::vector<bool>& seen) const {
  const int T = design_.periods();
  const int ages = design_.max_primary_age();
  const int n = ages + 2;
  const int departed = n - 1;
  std::vector<double> v(static_cast<std::size_t>(n), kNegInf);
  std::vector<double> next(static_cast<std::size_t>(n));

  auto observe = [&](int t) {
    const double lp = log_period[static_cast<std::size_t>(t)];
    if (seen[static_cast<std::size_t>(t)]) {
      v[0] = kNegInf;
      v[static_cast<std::size_t>(departed)] = kNegInf;
    }
    for (int A = 1; A <= ages; ++A) {
      auto& x = v[static_cast<std::size_t>(A)];
      x = x == kNegInf || lp == kNegInf ? kNegInf : x + lp;
    }
  };

  v[0] = safe_log1m(params_.r[0]);
  v[1] = safe_log(params_.r[0]);
  observe(0);
  for (int t = 1; t < T; ++t) {
    const double rs = recruitment_star_[t];
    std::fill(next.begin(), next.end(), kNegInf);
    next[0] = v[0] + safe_log1m(rs);
    next[1] = v[0] + safe_log(rs);
    double leaving = v[static_cast<std::size_t>(departed)];
    for (int A = 1; A <= ages; ++A) {
      const double x = v[static_cast<std::size_t>(A)];
      if (x == kNegInf) continue;
      if (A < ages) {
        const double s = params_.s(t - 1, A - 1);
        next[static_cast<std::size_t>(A + 1)] = x + safe_log(s);
        leaving = log_add(leaving, x + safe_log1m(s));
      } else {
        leaving = log_add(leaving, x);
      }
    }
    next[static_cast<std::size_t>(departed)] = leaving;
    // A 0 * -inf product is a structural zero, not NaN.
    for (auto& x : next) {
      if (std::isnan(x)) x = kNegInf;
    }
    std::swap(v, next);
    observe(t);
  }
  double total = kNegInf;
  for (double x : v) total = log_add(total, x);
  return total;
}

double LikelihoodModel::log_history_probability(std::span<const std::uint8_t> history) const {
  if (static_cast<int>(history.size()) != design_.total_occasions()) {
    throw StructureError("history length does not match the design");
  }
  const int T = design_.periods();
  std::vector<double> log_period(static_cast<std::size_t>(T));
  std::vector<bool> seen(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    const auto s = period_slice(design_, history, t);
    const bool z = !all_zero(s);
    seen[static_cast<std::size_t>(t)] = z;
    log_period[static_cast<std::size_t>(t)] = z ? period_likelihood(t, s).log() : zero_[static_cast<std::size_t>(t)].log();
  }
  return combine_periods(log_period, seen);
}

ScaledProbability secondary_likelihood(std::span<const std::uint8_t> slice, int t, const ParameterSet& params,
                                       const StudyDesign& design) {
  return LikelihoodModel(params, design).period_likelihood(t, slice);
}

double log_primary_likelihood(std::span<const std::uint8_t> history, const ParameterSet& params,
                              const StudyDesign& design) {
  return LikelihoodModel(params, design).log_history_probability(history);
}

double primary_likelihood(std::span<const std::uint8_t> history, const ParameterSet& params,
                          const StudyDesign& design) {
  return std::exp(log_primary_likelihood(history, params, design));
}

double log_likelihood(const Dataset& data, const ParameterSet& params) {
  const auto& design = data.design();
  const double n = static_cast<double>(data.observed());
  if (!(params.N >= n)) {
    throw DomainError("N = " + std::to_string(params.N) + " is below the observed count " + std::to_string(data.observed()));
  }
  const LikelihoodModel model(params, design);
  const int T = design.periods();

  double ll = std::lgamma(params.N + 1.0) - std::lgamma(params.N - n + 1.0);
  const double missed = params.N - n;
  if (missed > 0.0) {
    const std::vector<std::uint8_t> zeros(static_cast<std::size_t>(design.total_occasions()), 0);
    const double log_zero = model.log_history_probability(zeros);
    if (log_zero == kNegInf) return kNegInf;
    ll += missed * log_zero;
  }

  // Period likelihoods depend only on the period slice; many histories share slices.
  std::vector<std::unordered_map<std::string, double>> cache(static_cast<std::size_t>(T));
  std::vector<double> log_period(static_cast<std::size_t>(T));
  std::vector<bool> seen(static_cast<std::size_t>(T));
  for (std::size_t j = 0; j < data.unique_count(); ++j) {
    const long count = data.counts()[j];
    ll -= std::lgamma(static_cast<double>(count) + 1.0);
    for (int t = 0; t < T; ++t) {
      const auto ti = static_cast<std::size_t>(t);
      const auto s = data.slice(j, t);
      const bool z = !all_zero(s);
      seen[ti] = z;
      if (!z) {
        log_period[ti] = model.period_zero_likelihood(t).log();
        continue;
      }
      std::string key(s.begin(), s.end());
      auto it = cache[ti].find(key);
      if (it == cache[ti].end()) it = cache[ti].emplace(std::move(key), model.period_likelihood(t, s).log()).first;
      log_period[ti] = it->second;
    }
    const double lj = model.combine_periods(log_period, seen);
    if (lj == kNegInf) return kNegInf;
    ll += static_cast<double>(count) * lj;
  }
  return ll;
}

}  // namespace msstop
