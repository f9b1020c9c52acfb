#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "linktheft/matrix.hpp"
#include "linktheft/rng.hpp"

namespace linktheft {

/// Row-wise softmax, max-shifted for stability. Each output row sums to 1.
Matrix row_softmax(const Matrix& m);

Matrix relu(const Matrix& m);

/// Inverted dropout: in training mode zeroes entries with probability `rate`
/// and scales survivors by 1/(1-rate); identity in evaluation mode. The mask
/// (post-scale multiplier per entry) is written to `mask` when given so the
/// backward pass can reuse it.
Matrix dropout(const Matrix& m, double rate, Rng& rng, bool training,
               Matrix* mask = nullptr);

/// Mean over labeled nodes of -ln p[true class]; probabilities are clamped
/// at 1e-12 before the log.
double cross_entropy(const Matrix& posteriors,
                     const std::vector<int>& labeled_ids,
                     const std::vector<int>& labels);

/// Gradient of cross_entropy composed with row_softmax w.r.t. the logits:
/// (P - onehot) / |labeled| on labeled rows, zero elsewhere.
Matrix cross_entropy_softmax_grad(const Matrix& posteriors,
                                  const std::vector<int>& labeled_ids,
                                  const std::vector<int>& labels);

/// Bias-corrected Adam state for one parameter matrix.
struct AdamState {
  Matrix first_moment;
  Matrix second_moment;
  long step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState like(const Matrix& param);
};

/// One Adam update in place. Throws NumericError on non-finite gradients.
void adam_step(Matrix& param, const Matrix& grad, AdamState& state,
               double learning_rate);

/// Glorot-uniform initialization: U(-limit, limit), limit = sqrt(6/(in+out)).
Matrix glorot_uniform(int rows, int cols, Rng& rng);

struct GradCheckReport {
  double max_rel_error = 0.0;
  int worst_param = -1;
  int worst_index = -1;
  bool pass = false;
};

/// Central-difference check (h = 1e-4) of analytic gradients against the
/// scalar loss. `loss` must evaluate the loss at the current parameter
/// values; `analytic` must return one gradient matrix per parameter.
GradCheckReport gradient_check(
    const std::function<double()>& loss,
    const std::function<std::vector<Matrix>()>& analytic,
    const std::vector<Matrix*>& params, double tolerance, double h = 1e-4);

}  // namespace linktheft
