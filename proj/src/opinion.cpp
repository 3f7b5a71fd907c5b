#include "evid/opinion.hpp"

#include <cmath>
#include <stdexcept>

#include "evid/specfn.hpp"

namespace evid {

void require_one_hot(const Vector& y, Index k) {
  if (y.size() != k)
    throw std::invalid_argument("one-hot label has length " + std::to_string(y.size()) +
                                ", expected " + std::to_string(k));
  Index ones = 0;
  for (Index i = 0; i < y.size(); ++i) {
    if (y[i] == 1.0)
      ++ones;
    else if (y[i] != 0.0)
      throw std::invalid_argument("label vector is not one-hot");
  }
  if (ones != 1) throw std::invalid_argument("label vector is not one-hot");
}

Evidence::Evidence(Vector v) : e(std::move(v)) {
  if (e.size() < 2) throw std::invalid_argument("evidence needs at least 2 classes");
  for (Index i = 0; i < e.size(); ++i)
    if (!(e[i] >= 0.0) || !std::isfinite(e[i]))
      throw std::invalid_argument("evidence component " + std::to_string(i) +
                                  " is negative or non-finite");
}

DirichletParams::DirichletParams(Vector a) : alpha(std::move(a)), strength(0.0) {
  if (alpha.size() < 2)
    throw std::invalid_argument("Dirichlet parameters need at least 2 classes");
  for (Index i = 0; i < alpha.size(); ++i)
    if (!(alpha[i] > 0.0) || !std::isfinite(alpha[i]))
      throw std::domain_error("Dirichlet parameter " + std::to_string(i) +
                              " must be positive and finite");
  strength = alpha.sum();
}

std::string to_string(Decision d) {
  switch (d) {
    case Decision::Bonafide: return "bonafide";
    case Decision::Spoofed: return "spoofed";
    case Decision::Unknown: return "unknown";
  }
  return "unknown";
}

DirichletParams evidence_to_alpha(const Evidence& ev) {
  return DirichletParams(ev.e.array() + 1.0);
}

Opinion opinion_from_alpha(const DirichletParams& a, double unknown_threshold) {
  if (!(unknown_threshold >= 0.0 && unknown_threshold <= 1.0))
    throw std::invalid_argument("unknown_threshold must be in [0, 1]");
  if (a.alpha.minCoeff() < 1.0)
    throw std::invalid_argument(
        "opinion requires evidence-derived parameters (alpha_k >= 1)");
  const auto k = a.classes();
  const double s = a.strength;

  Opinion o;
  o.beliefs = (a.alpha.array() - 1.0) / s;
  o.uncertainty = static_cast<double>(k) / s;
  o.probs = a.alpha / s;

  if (k != 2 || o.uncertainty >= unknown_threshold) {
    o.decision = Decision::Unknown;
  } else {
    // tie at p_0 == p_1 goes to Spoofed
    o.decision = o.probs[kBonafideIndex] > o.probs[kSpoofedIndex] ? Decision::Bonafide
                                                                  : Decision::Spoofed;
  }
  return o;
}

double kl_to_uniform(const DirichletParams& a_tilde) {
  const auto& alpha = a_tilde.alpha;
  const double s = a_tilde.strength;
  const double psi_s = digamma(s);

  double r = lgamma(s) - lgamma(static_cast<double>(a_tilde.classes()));
  for (Index i = 0; i < alpha.size(); ++i) {
    r -= lgamma(alpha[i]);
    r += (alpha[i] - 1.0) * (digamma(alpha[i]) - psi_s);
  }
  return r;
}

DirichletParams adjust_alpha(const DirichletParams& a, const Vector& y_one_hot) {
  require_one_hot(y_one_hot, a.classes());
  Vector adjusted = y_one_hot.array() + (1.0 - y_one_hot.array()) * a.alpha.array();
  return DirichletParams(std::move(adjusted));
}

Vector one_hot(Index k, Index label) {
  if (label < 0 || label >= k)
    throw std::invalid_argument("one_hot: label " + std::to_string(label) +
                                " out of range for K=" + std::to_string(k));
  Vector y = Vector::Zero(k);
  y[label] = 1.0;
  return y;
}

}  // namespace evid
