#include "giqn/linesearch.hpp"

#include <cmath>
#include <limits>

namespace giqn {

bool check_desc1(double norm_trial, double norm_k, double alpha, double lambda) {
  return norm_trial <= (1.0 - alpha * (1.0 + lambda)) * norm_k;
}

bool check_desc2(double norm_trial, double norm_k, double alpha, double lambda, double eta_k) {
  return norm_trial <= (1.0 + eta_k - alpha * lambda) * norm_k;
}

namespace {

struct Trial {
  Vector x;
  Vector Fx;
  double norm = 0.0;
};

}  // namespace

BacktrackResult backtrack(const Vector& x, const Vector& s, const Vector& s_tilde,
                          double Fx_norm, double eta_k, const SolverConfig& cfg,
                          const FeasibleSet& set, const ResidualFn& F) {
  const auto n = x.size();
  if (s.size() != n || s_tilde.size() != n || set.dimension() != n) {
    throw DimensionMismatch("backtrack: dimension mismatch");
  }

  BacktrackResult result;
  const bool plus_nonzero = s_tilde.squaredNorm() != 0.0;
  const Vector s_minus = plus_nonzero ? Vector(-s_tilde) : Vector(-s);
  if (!plus_nonzero && s.squaredNorm() == 0.0) return result;

  auto evaluate = [&](Vector point) {
    Trial t;
    t.Fx = F(point);
    ++result.trial_evals;
    t.x = std::move(point);
    t.norm = t.Fx.allFinite() ? t.Fx.norm() : std::numeric_limits<double>::infinity();
    return t;
  };

  auto accept = [&](Trial& t, double lambda, int m, AcceptBranch branch) {
    BacktrackOutcome out;
    out.lambda = lambda;
    out.backtracks = m;
    out.branch = branch;
    out.p = t.x - x;
    out.x_new = std::move(t.x);
    out.Fx_new = std::move(t.Fx);
    out.norm_new = t.norm;
    result.outcome = std::move(out);
    return result;
  };

  const double alpha = cfg.alpha;
  for (int m = 0;; ++m) {
    // Recomputed from the exponent so lambda is sigma^m without accumulated drift.
    const double lambda = m == 0 ? 1.0 : std::pow(cfg.sigma, m);
    if (lambda < cfg.lambda_min) return result;

    std::optional<Trial> plus;
    if (plus_nonzero) {
      Vector point = x + lambda * s_tilde;
      set.snap(point);
      plus = evaluate(std::move(point));
      if (check_desc1(plus->norm, Fx_norm, alpha, lambda)) {
        return accept(*plus, lambda, m, AcceptBranch::Desc1Plus);
      }
    }

    std::optional<Trial> minus;
    {
      Vector point = x + lambda * s_minus;
      if (set.contains(point)) {
        minus = evaluate(std::move(point));
        if (check_desc1(minus->norm, Fx_norm, alpha, lambda)) {
          return accept(*minus, lambda, m, AcceptBranch::Desc1Minus);
        }
      }
    }

    if (plus && check_desc2(plus->norm, Fx_norm, alpha, lambda, eta_k)) {
      return accept(*plus, lambda, m, AcceptBranch::Desc2Plus);
    }
    if (minus && check_desc2(minus->norm, Fx_norm, alpha, lambda, eta_k)) {
      return accept(*minus, lambda, m, AcceptBranch::Desc2Minus);
    }
  }
}

}  // namespace giqn
