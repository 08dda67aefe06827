#pragma once

#include <cmath>
#include <string>

#include "predq/errors.hpp"

namespace predq {

// Closed batch of n = n_s + n_l jobs released together: n_s of size s
// ("short") and n_l of size l >= s ("long"), served to completion with no
// further arrivals. A short job is mislabeled long with probability p, a
// long one mislabeled short with probability q; the predicted value is the
// size of the predicted type. Everything here is closed-form arithmetic.
//
// Reported quantity: the average over the batch of each job's expected
// waiting time (time until its service starts). Jobs with equal scheduling
// keys are served in uniformly random order.

enum class TwoTypeMode {
  full,       // schedule on true sizes
  random,     // ignore sizes entirely
  predicted,  // schedule on predicted type
};

enum class TwoTypeForm {
  exact,       // finite-n combinatorics
  asymptotic,  // leading n -> infinity term
};

struct TwoTypeBatch {
  double n_s = 0.0;
  double n_l = 0.0;
  double s = 1.0;
  double l = 1.0;
  double p = 0.0;  // P(short job predicted long)
  double q = 0.0;  // P(long job predicted short)
};

namespace detail {

inline void validate_two_type(const TwoTypeBatch& b) {
  if (!(b.n_s >= 0.0) || !(b.n_l >= 0.0) || b.n_s + b.n_l < 1.0) {
    throw ConfigError("two_type batch needs non-negative counts summing to "
                      ">= 1");
  }
  if (!(b.s > 0.0) || !(b.l >= b.s)) {
    throw ConfigError("two_type sizes must satisfy 0 < s <= l");
  }
  if (!(b.p >= 0.0 && b.p <= 1.0 && b.q >= 0.0 && b.q <= 1.0)) {
    throw ConfigError("two_type misprediction probabilities must lie in "
                      "[0,1]");
  }
}

}  // namespace detail

inline double two_type_wait(const TwoTypeBatch& b, TwoTypeMode mode,
                            TwoTypeForm form) {
  detail::validate_two_type(b);
  const double ns = b.n_s, nl = b.n_l, s = b.s, l = b.l, p = b.p, q = b.q;
  const double n = ns + nl;

  if (form == TwoTypeForm::asymptotic) {
    switch (mode) {
      case TwoTypeMode::full:
        return (ns * ns * s + nl * nl * l + 2.0 * ns * nl * s) / (2.0 * n);
      case TwoTypeMode::random:
        return (ns * ns * s + nl * nl * l + ns * nl * (s + l)) / (2.0 * n);
      case TwoTypeMode::predicted: {
        const double mix = (2.0 - (p + q)) * s + (p + q) * l;
        return (ns * ns * s + nl * nl * l + ns * nl * mix) / (2.0 * n);
      }
    }
  }

  switch (mode) {
    case TwoTypeMode::full:
      // Shorts first; random order within a size class.
      return (ns * (ns - 1.0) * s / 2.0 + nl * (nl - 1.0) * l / 2.0 +
              nl * ns * s) /
             n;
    case TwoTypeMode::random:
      // Every other job precedes the tagged one with probability 1/2.
      return (ns * ((ns - 1.0) * s / 2.0 + nl * l / 2.0) +
              nl * (ns * s / 2.0 + (nl - 1.0) * l / 2.0)) /
             n;
    case TwoTypeMode::predicted: {
      // Condition on the tagged job's true type and its label; everything
      // labeled short precedes everything labeled long, ties random.
      const double tagged_ss =  // short labeled short
          (1.0 - p) * ns *
          ((1.0 - p) * (ns - 1.0) * s / 2.0 + q * nl * l / 2.0);
      const double tagged_sl =  // short labeled long
          p * ns *
          ((1.0 - p) * (ns - 1.0) * s + p * (ns - 1.0) * s / 2.0 +
           (1.0 - q) * nl * l / 2.0 + q * nl * l);
      const double tagged_ll =  // long labeled long
          (1.0 - q) * nl *
          ((1.0 - q) * (nl - 1.0) * l / 2.0 + q * (nl - 1.0) * l +
           p * ns * s / 2.0 + (1.0 - p) * ns * s);
      const double tagged_ls =  // long labeled short
          q * nl * (q * (nl - 1.0) * l / 2.0 + (1.0 - p) * ns * s / 2.0);
      return (tagged_ss + tagged_sl + tagged_ll + tagged_ls) / n;
    }
  }
  throw DomainError("unreachable two_type mode");
}

// Asymptotic ratio of predicted-label waiting time to full-information
// waiting time for the given composition.
inline double two_type_ratio(const TwoTypeBatch& b) {
  const double full = two_type_wait(b, TwoTypeMode::full,
                                    TwoTypeForm::asymptotic);
  const double pred = two_type_wait(b, TwoTypeMode::predicted,
                                    TwoTypeForm::asymptotic);
  if (!(full > 0.0)) {
    throw DomainError("two_type ratio undefined: zero full-information wait");
  }
  return pred / full;
}

// Supremum of two_type_ratio over the batch composition (fraction of short
// jobs), holding sizes and error rates fixed:
//     sup_gamma R(gamma) = 1 + (p + q) (sqrt(l / s) - 1) / 2,
// attained where the long-job fraction equals sqrt(s)/(sqrt(s)+sqrt(l)).
inline double two_type_pom_bound(double s, double l, double p, double q) {
  TwoTypeBatch probe{1.0, 1.0, s, l, p, q};
  detail::validate_two_type(probe);
  return 1.0 + (p + q) * (std::sqrt(l / s) - 1.0) / 2.0;
}

// Composition (fraction short) at which the bound above is attained.
inline double two_type_pom_argmax(double s, double l) {
  if (!(s > 0.0) || !(l >= s)) {
    throw ConfigError("two_type sizes must satisfy 0 < s <= l");
  }
  return 1.0 - std::sqrt(s) / (std::sqrt(s) + std::sqrt(l));
}

}  // namespace predq
