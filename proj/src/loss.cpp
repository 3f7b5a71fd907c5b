#include "evid/loss.hpp"

#include <algorithm>
#include <stdexcept>

#include "evid/specfn.hpp"

namespace evid {

AnnealSchedule::AnnealSchedule(int t) : anneal_epochs(t) {
  if (t < 1) throw std::invalid_argument("anneal_epochs must be >= 1");
}

double lambda_at(const AnnealSchedule& s, int epoch) {
  if (epoch < 0) throw std::invalid_argument("epoch must be >= 0");
  return std::min(1.0, static_cast<double>(epoch) / s.anneal_epochs);
}

double ace_loss(const DirichletParams& a, const Vector& y) {
  if (a.alpha.minCoeff() < 1.0)
    throw std::invalid_argument("ace_loss requires alpha_k >= 1");
  require_one_hot(y, a.classes());
  const double psi_s = digamma(a.strength);
  double r = 0.0;
  for (Index j = 0; j < y.size(); ++j)
    if (y[j] != 0.0) r += y[j] * (psi_s - digamma(a.alpha[j]));
  return r;
}

LossBreakdown total_loss(const DirichletParams& a, const Vector& y, double lambda) {
  if (lambda < 0.0 || lambda > 1.0)
    throw std::invalid_argument("lambda must be in [0, 1]");
  LossBreakdown b;
  b.ace = ace_loss(a, y);
  b.kl = kl_to_uniform(adjust_alpha(a, y));
  b.lambda = lambda;
  b.total = b.ace + lambda * b.kl;
  return b;
}

Vector total_loss_grad(const DirichletParams& a, const Vector& y, double lambda) {
  if (lambda < 0.0 || lambda > 1.0)
    throw std::invalid_argument("lambda must be in [0, 1]");
  if (y.size() != a.classes())
    throw std::invalid_argument("label / parameter size mismatch");

  const DirichletParams adjusted = adjust_alpha(a, y);
  const double s_tilde = adjusted.strength;
  const double k = static_cast<double>(a.classes());
  const double tri_s = trigamma(a.strength) * y.sum();
  const double tri_s_tilde = trigamma(s_tilde);

  Vector g(a.classes());
  for (Index i = 0; i < g.size(); ++i) {
    g[i] = tri_s - y[i] * trigamma(a.alpha[i]);
    if (y[i] == 0.0) {
      const double at = adjusted.alpha[i];
      g[i] += lambda * ((at - 1.0) * trigamma(at) - (s_tilde - k) * tri_s_tilde);
    }
  }
  return g;
}

}  // namespace evid
