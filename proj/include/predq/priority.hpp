#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "predq/distributions.hpp"
#include "predq/errors.hpp"

namespace predq {

// Non-preemptive priority queue with k job classes, class 0 served with the
// highest priority. Each class arrives Poisson(lambda_i) with its own
// service distribution. Predicted classes are produced by a row-stochastic
// confusion matrix: confusion[i][j] = P(predicted class j | true class i).
struct ClassModel {
  std::vector<double> lambdas;
  std::vector<ServiceDistPtr> services;
  std::vector<std::vector<double>> confusion;

  std::size_t classes() const { return lambdas.size(); }

  void validate() const {
    const std::size_t k = lambdas.size();
    if (k == 0) throw ConfigError("class model needs at least one class");
    if (services.size() != k || confusion.size() != k) {
      throw ConfigError("class model arrays must all have one entry per "
                        "class");
    }
    double rho = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (!(lambdas[i] >= 0.0) || !std::isfinite(lambdas[i])) {
        throw ConfigError("class arrival rates must be finite and "
                          "non-negative");
      }
      if (!services[i]) throw ConfigError("missing service distribution");
      if (confusion[i].size() != k) {
        throw ConfigError("confusion matrix must be square");
      }
      double row = 0.0;
      for (double e : confusion[i]) {
        if (!(e >= 0.0 && e <= 1.0)) {
          throw ConfigError("confusion entries must lie in [0,1]");
        }
        row += e;
      }
      if (std::abs(row - 1.0) > 1e-12) {
        throw ConfigError("confusion matrix row " + std::to_string(i) +
                          " must sum to 1");
      }
      rho += lambdas[i] * services[i]->mean();
    }
    if (rho >= 1.0) {
      throw UnstableError("total offered load " + std::to_string(rho) +
                              " >= 1",
                          rho);
    }
  }

  double total_lambda() const {
    double s = 0.0;
    for (double v : lambdas) s += v;
    return s;
  }

  double total_rho() const {
    double s = 0.0;
    for (std::size_t i = 0; i < classes(); ++i) {
      s += lambdas[i] * services[i]->mean();
    }
    return s;
  }

  // Mean residual work in service: W0 = sum_i lambda_i E[S_i^2] / 2.
  double residual_work() const {
    double s = 0.0;
    for (std::size_t i = 0; i < classes(); ++i) {
      s += lambdas[i] * services[i]->second_moment();
    }
    return 0.5 * s;
  }

  // Arrival rate of jobs *predicted* to be class j.
  double predicted_lambda(std::size_t j) const {
    double s = 0.0;
    for (std::size_t i = 0; i < classes(); ++i) {
      s += lambdas[i] * confusion[i][j];
    }
    return s;
  }

  // True work arriving per unit time labeled class j.
  double predicted_rho(std::size_t j) const {
    double s = 0.0;
    for (std::size_t i = 0; i < classes(); ++i) {
      s += lambdas[i] * services[i]->mean() * confusion[i][j];
    }
    return s;
  }
};

// Mean waiting time of class-i jobs (predicted=false: priorities follow true
// classes and i indexes a true class; predicted=true: priorities follow
// labels and i indexes a predicted class):
//   E[W(i)] = W0 / ((1 - sigma_i)(1 - sigma_{i-1})),
// where sigma_i accumulates the *true* work of classes at or above priority
// i. Mislabeling reshuffles which work counts toward sigma but leaves the
// residual-work numerator unchanged.
inline double priority_wait(const ClassModel& cm, std::size_t i,
                            bool predicted = false) {
  cm.validate();
  if (i >= cm.classes()) throw ConfigError("class index out of range");
  const double w0 = cm.residual_work();
  double above = 0.0;  // sigma_{i-1}
  for (std::size_t j = 0; j < i; ++j) {
    above += predicted ? cm.predicted_rho(j)
                       : cm.lambdas[j] * cm.services[j]->mean();
  }
  const double upto =
      above + (predicted ? cm.predicted_rho(i)
                         : cm.lambdas[i] * cm.services[i]->mean());
  return w0 / ((1.0 - upto) * (1.0 - above));
}

// Population-average waiting time across classes (weighted by arrival rate
// of true classes, or of labels when predicted).
inline double priority_mean_wait(const ClassModel& cm, bool predicted) {
  cm.validate();
  const double lam = cm.total_lambda();
  if (!(lam > 0.0)) throw DomainError("total arrival rate is zero");
  double acc = 0.0;
  for (std::size_t i = 0; i < cm.classes(); ++i) {
    const double li = predicted ? cm.predicted_lambda(i) : cm.lambdas[i];
    acc += li * priority_wait(cm, i, predicted);
  }
  return acc / lam;
}

// Price of misprediction for the priority queue: ratio of label-scheduled to
// truth-scheduled population-average waiting time. The residual-work factor
// cancels.
inline double priority_pom(const ClassModel& cm) {
  const double informed = priority_mean_wait(cm, /*predicted=*/false);
  const double mislabeled = priority_mean_wait(cm, /*predicted=*/true);
  if (!(informed > 0.0)) {
    throw DomainError("priority price of misprediction undefined: zero "
                      "informed wait");
  }
  return mislabeled / informed;
}

}  // namespace predq
