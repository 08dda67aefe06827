#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "predq/analytic.hpp"
#include "predq/errors.hpp"
#include "predq/interpolant.hpp"
#include "predq/models.hpp"
#include "predq/quadrature.hpp"

namespace predq {

// Preemptive shortest-remaining-predicted-time analysis.
//
// A job's key is its predicted size minus attained service, floored at zero
// (a job whose prediction has run out keeps key 0 and cannot be preempted).
// For a tagged arrival with predicted size q, "level-q work" is the work the
// server must clear before the tagged job can start: jobs whose remaining
// predicted size is below q, including the remaining true work of jobs that
// entered with a larger prediction and crossed the level from above. The
// waiting time is the residual of a level-q busy period; the machinery below
// follows the classical busy-period treatment of SRPT with the prediction
// marginal in place of the size marginal.
//
// Level kernels (lambda-free, so one analyzer serves a whole load sweep):
//   A1(q) = E[(X - (Y - q))^+ ; Y > q]   remaining work at level crossing
//   A2(q) = E[((X - (Y - q))^+)^2 ; Y > q]
//   Dk(q) = P(Y > q, X > Y - q)          crossing probability
// Busy-period quantities at arrival rate lambda:
//   rho'_q = lambda m1p(q)               load of jobs predicted below q
//   b(q)   = lambda (m1p(q) + A1(q))     fraction of time level-q work exists
//   d(q)   = (1 - b) Fp(q) + Dk(q)       initiator mix (per arrival)
//   a1     = (1 - b) m1p(q) + A1(q)      initiator work, first moment
//   a2     = (1 - b) m2p(q) + A2(q)      initiator work, second moment
//   E[Z^k] = a_k / d                     initiating work moments
//   E[Y]   = E[Z] / (1 - rho'_q)         level-q busy period length
//   E[Y^2] = E[Z^2]/(1-rho'_q)^2 + lambda E[Z] m2p(q)/(1-rho'_q)^3
// Waiting time (residual via renewal-reward; d cancels):
//   E[W(q)] = b ( a2 / (2 a1 (1 - rho'_q)) + lambda m2p(q) / (2 (1-rho'_q)^2) )
// Residence of a job (x, y): with Phi(v) = int_0^v du / (1 - rho'_u),
//   r(x, y) = Phi(y) - Phi((y - x)^+) + (x - y)^+.
// With exact predictions every formula reduces to the classical
// shortest-remaining-processing-time results.
class SprptAnalyzer {
 public:
  explicit SprptAnalyzer(ModelPtr model, QuadratureSettings qs = {})
      : model_(std::move(model)), qs_(qs) {
    if (!model_) throw ConfigError("analyzer requires a model");
    if (model_->is_discrete()) {
      throw DomainError("remaining-time analysis requires a continuous "
                        "model");
    }
  }

  const ModelPtr& model() const { return model_; }

  // ---- level kernels (memoized over a graded grid) ----
  double A1(double q) const { return kernel(1)(clamp_q(q)); }
  double A2(double q) const { return kernel(2)(clamp_q(q)); }
  double Dk(double q) const { return kernel(0)(clamp_q(q)); }

  // Direct quadrature evaluations, bypassing the interpolants (used by the
  // interpolant builders and exposed for verification).
  double A1_direct(double q) const { return raw_kernel(q, 1); }
  double A2_direct(double q) const { return raw_kernel(q, 2); }
  double Dk_direct(double q) const { return raw_kernel(q, 0); }

  double b(double lambda, double q) const {
    require_stable(*model_, lambda);
    const double v = lambda * (model_->m1_predicted(q) + A1(q));
    return std::clamp(v, 0.0, lambda * model_->mean_service());
  }

  double d(double lambda, double q) const {
    return (1.0 - b(lambda, q)) * model_->predicted_cdf(q) + Dk(q);
  }

  struct BusyMoments {
    double ex1, ex2;  // E[X(q)], E[X(q)^2]: work of a job predicted below q
    double ez1, ez2;  // initiating work of a level-q busy period
    double ey1, ey2;  // level-q busy period length
  };

  BusyMoments busy_moments(double lambda, double q) const {
    require_stable(*model_, lambda);
    const double fp = model_->predicted_cdf(q);
    const double m1p = model_->m1_predicted(q);
    const double m2p = model_->m2_predicted(q);
    const double bb = b(lambda, q);
    const double dd = (1.0 - bb) * fp + Dk(q);
    if (!(fp > 1e-300) || !(dd > 1e-14)) {
      throw DegenerateInitiatorError(
          "no feasible busy-period initiator at level " + std::to_string(q));
    }
    BusyMoments m;
    m.ex1 = m1p / fp;
    m.ex2 = m2p / fp;
    const double a1 = (1.0 - bb) * m1p + A1(q);
    const double a2 = (1.0 - bb) * m2p + A2(q);
    m.ez1 = a1 / dd;
    m.ez2 = a2 / dd;
    const double g = 1.0 - lambda * m1p;
    m.ey1 = m.ez1 / g;
    m.ey2 = m.ez2 / (g * g) + lambda * m.ez1 * m2p / (g * g * g);
    return m;
  }

  // Expected delay until first service for a job predicted at q.
  double wait(double lambda, double q) const {
    require_stable(*model_, lambda);
    const double qq = clamp_q(q);
    const double m1p = model_->m1_predicted(qq);
    const double m2p = model_->m2_predicted(qq);
    const double bb = lambda * (m1p + A1(qq));
    if (bb <= 1e-14) return 0.0;
    const double a1 = (1.0 - bb) * m1p + A1(qq);
    const double a2 = (1.0 - bb) * m2p + A2(qq);
    const double g = 1.0 - lambda * m1p;
    return bb * (a2 / (2.0 * a1 * g) + lambda * m2p / (2.0 * g * g));
  }

  // Population-average response time at arrival rate lambda.
  AnalyticResult time(double lambda) const {
    require_stable(*model_, lambda);
    const double ymax = model_->y_max();
    const std::vector<double> hints = {1e-4 * ymax, 1e-2 * ymax, 0.1 * ymax,
                                       ymax};

    // The integrands below are assembled from interpolants built to ~1e-7
    // relative accuracy; chasing a tighter quadrature tolerance than that
    // only burns the subdivision budget on interpolation noise.
    QuadratureSettings outer = qs_;
    outer.rel_tol = std::max(qs_.rel_tol, 3e-7);
    outer.abs_tol = std::max(qs_.abs_tol, 1e-9);

    auto wait_part = [&](double y) {
      return model_->predicted_density(y) * wait(lambda, y);
    };
    const QuadResult w =
        quad(wait_part, 0.0, model_->y_integration_upper(), outer, hints);

    // Phi(v) = int_0^v du / (1 - rho'_u), per-lambda.
    const CumulativeInterpolant phi = CumulativeInterpolant::build(
        [&](double u) {
          return 1.0 / (1.0 - lambda * model_->m1_predicted(u));
        },
        0.0, ymax);

    QuadResult res;
    if (model_->has_joint_density()) {
      auto carve_out = [&](double y) {
        auto inner = [&](double x) {
          const double carve = y > x ? phi(y) - phi(y - x) : phi(y) + (x - y);
          return model_->density(x, y) * carve;
        };
        std::vector<double> ih = inner_hints_for(y);
        if (y > 0.0 && y < model_->x_max()) ih.push_back(y);
        return quad(inner, 0.0, model_->x_max(), outer, ih).value;
      };
      res = quad(carve_out, 0.0, model_->y_integration_upper(), outer, hints);
    } else {
      // Exact predictions: mass lives on y = x, r(x, x) = Phi(x).
      auto h = [&](double x) { return model_->service_density(x) * phi(x); };
      res = quad(h, 0.0, model_->x_max(), outer);
    }

    AnalyticResult r;
    r.policy = model_->has_joint_density() ? "SPRPT" : "SRPT";
    r.lambda = lambda;
    r.expected_wait = w.value;
    r.expected_residence = res.value;
    r.expected_total = w.value + res.value;
    r.error_estimate = w.error + res.error;
    return r;
  }

 private:
  double clamp_q(double q) const { return std::max(q, 0.0); }

  // Hints for the inner x-integrals, mirroring the model's conditional mode.
  std::vector<double> inner_hints_for(double y) const {
    if (y <= 0.0) return {};
    const double r = std::sqrt(y);
    return {0.125 * r, r, std::min(8.0 * r, model_->x_max())};
  }

  // int_q^{q + x_max} excess_k(t, t - q) dt. Beyond t = q + x_max no job has
  // enough true work left to cross the level, so the integrand vanishes.
  double raw_kernel(double q, int k) const {
    const double lo = clamp_q(q);
    const double hi = lo + model_->x_max();
    auto h = [&](double t) {
      switch (k) {
        case 0: return model_->excess0(t, t - lo);
        case 1: return model_->excess1(t, t - lo);
        default: return model_->excess2(t, t - lo);
      }
    };
    const double span = hi - lo;
    return quad(h, lo, hi, qs_,
                {lo + 1e-3 * span, lo + 0.01 * span, lo + 0.1 * span})
        .value;
  }

  const PchipInterpolant& kernel(int k) const {
    std::call_once(once_[k], [&] {
      const double y_hi = model_->y_max();
      kernels_[k] = std::make_unique<PchipInterpolant>(PchipInterpolant::build(
          [&](double q) { return raw_kernel(q, k); }, 0.0, y_hi,
          graded_grid(0.0, y_hi), 1e-7));
    });
    return *kernels_[k];
  }

  ModelPtr model_;
  QuadratureSettings qs_;
  mutable std::once_flag once_[3];
  mutable std::unique_ptr<PchipInterpolant> kernels_[3];
};

// Predicted-information response time under
// shortest-remaining-predicted-time.
inline AnalyticResult sprpt_time(const ModelPtr& m, double lambda) {
  return SprptAnalyzer(m).time(lambda);
}

// Full-information shortest-remaining-processing-time: run the same
// machinery with exact predictions on the model's service marginal.
inline AnalyticResult srpt_time(const ModelPtr& m, double lambda) {
  AnalyticResult r =
      SprptAnalyzer(exact_model(m->service_marginal())).time(lambda);
  r.policy = "SRPT";
  return r;
}

}  // namespace predq
