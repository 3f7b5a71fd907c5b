#pragma once

#include <string>

#include "evid/types.hpp"

namespace evid {

// Class index convention used throughout: 0 = bonafide, 1 = spoofed.
inline constexpr Index kBonafideIndex = 0;
inline constexpr Index kSpoofedIndex = 1;

/// Per-class non-negative evidence emitted by a network head.
struct Evidence {
  Vector e;

  /// Validates: size >= 2, every component finite and >= 0.
  explicit Evidence(Vector v);

  Index classes() const { return e.size(); }
};

/// Dirichlet concentration parameters together with their cached sum
/// (the distribution strength S).
struct DirichletParams {
  Vector alpha;
  double strength;  // = alpha.sum()

  /// Validates: size >= 2, every component finite and > 0.
  explicit DirichletParams(Vector a);

  Index classes() const { return alpha.size(); }
};

enum class Decision { Bonafide, Spoofed, Unknown };

std::string to_string(Decision d);

/// Belief masses, uncertainty mass, expected class probabilities and the
/// discrete decision derived from one Dirichlet parameter vector.
///
/// Invariants: uncertainty + beliefs.sum() == 1 and probs.sum() == 1 (to
/// rounding); probs[k] == beliefs[k] + uncertainty / K.
struct Opinion {
  Vector beliefs;
  double uncertainty;
  Vector probs;
  Decision decision;
};

/// alpha_k = e_k + 1.
DirichletParams evidence_to_alpha(const Evidence& ev);

/// Forms the opinion for evidence-derived parameters (alpha_k >= 1):
///   b_k = (alpha_k - 1) / S,  u = K / S,  p_k = alpha_k / S.
/// decision = Unknown when u >= unknown_threshold, otherwise argmax_k p_k,
/// ties toward Spoofed. The decision vocabulary is binary: for K != 2 the
/// masses are still computed but the decision is reported as Unknown.
Opinion opinion_from_alpha(const DirichletParams& a, double unknown_threshold = 0.5);

/// KL divergence from Dirichlet(a_tilde) to the uniform Dirichlet(1,...,1).
double kl_to_uniform(const DirichletParams& a_tilde);

/// Pins the true-class component to 1 and keeps the rest:
/// component k of the result is 1 where y_k = 1 and alpha_k where y_k = 0.
DirichletParams adjust_alpha(const DirichletParams& a, const Vector& y_one_hot);

/// One-hot vector of length k with a 1 at position label.
Vector one_hot(Index k, Index label);

/// Throws std::invalid_argument unless y is a one-hot vector of length k.
void require_one_hot(const Vector& y, Index k);

}  // namespace evid
