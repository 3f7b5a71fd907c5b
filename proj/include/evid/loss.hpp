#pragma once

#include "evid/opinion.hpp"
#include "evid/types.hpp"

namespace evid {

/// One evaluated training objective, kept as its parts so traces can
/// report the data term and the regularizer separately.
struct LossBreakdown {
  double ace;     // adjusted cross-entropy term, >= 0
  double kl;      // KL-to-uniform of the adjusted parameters, >= 0
  double lambda;  // annealing coefficient in [0, 1]
  double total;   // = ace + lambda * kl
};

/// Linear ramp for the KL weight: lambda(epoch) = min(1, epoch / T).
struct AnnealSchedule {
  int anneal_epochs;  // T >= 1, epochs until lambda reaches 1

  explicit AnnealSchedule(int t);
};

double lambda_at(const AnnealSchedule& s, int epoch);

/// sum_j y_j (psi(S) - psi(alpha_j)); requires alpha_k >= 1 and one-hot y.
double ace_loss(const DirichletParams& a, const Vector& y);

/// ace + lambda * kl_to_uniform(adjust_alpha(a, y)).
LossBreakdown total_loss(const DirichletParams& a, const Vector& y, double lambda);

/// Analytic gradient of total_loss(...).total with respect to alpha.
Vector total_loss_grad(const DirichletParams& a, const Vector& y, double lambda);

}  // namespace evid
