#include "linktheft/nn.hpp"

#include <algorithm>
#include <cmath>

#include "linktheft/errors.hpp"

namespace linktheft {

Matrix row_softmax(const Matrix& m) {
  Matrix out(m.rows, m.cols);
  for (int i = 0; i < m.rows; ++i) {
    auto in_row = m.row(i);
    double mx = in_row[0];
    for (double v : in_row) mx = std::max(mx, v);
    double sum = 0.0;
    for (int j = 0; j < m.cols; ++j) {
      double e = std::exp(in_row[j] - mx);
      out.at(i, j) = e;
      sum += e;
    }
    for (int j = 0; j < m.cols; ++j) out.at(i, j) /= sum;
  }
  return out;
}

Matrix relu(const Matrix& m) {
  Matrix out = m;
  for (double& v : out.data) v = std::max(0.0, v);
  return out;
}

Matrix dropout(const Matrix& m, double rate, Rng& rng, bool training,
               Matrix* mask) {
  if (rate < 0.0 || rate >= 1.0)
    throw ConfigError("dropout rate must be in [0, 1)");
  if (!training || rate == 0.0) {
    if (mask) *mask = Matrix(m.rows, m.cols, 1.0);
    return m;
  }
  const double scale = 1.0 / (1.0 - rate);
  Matrix out(m.rows, m.cols);
  Matrix keep(m.rows, m.cols);
  for (size_t i = 0; i < m.data.size(); ++i) {
    const double k = rng.next_double() < rate ? 0.0 : scale;
    keep.data[i] = k;
    out.data[i] = m.data[i] * k;
  }
  if (mask) *mask = std::move(keep);
  return out;
}

double cross_entropy(const Matrix& posteriors,
                     const std::vector<int>& labeled_ids,
                     const std::vector<int>& labels) {
  if (labeled_ids.empty()) throw ConfigError("no labeled nodes for the loss");
  double sum = 0.0;
  for (int id : labeled_ids) {
    const double p = std::max(posteriors.at(id, labels[id]), 1e-12);
    sum -= std::log(p);
  }
  return sum / static_cast<double>(labeled_ids.size());
}

Matrix cross_entropy_softmax_grad(const Matrix& posteriors,
                                  const std::vector<int>& labeled_ids,
                                  const std::vector<int>& labels) {
  Matrix g(posteriors.rows, posteriors.cols);
  const double inv = 1.0 / static_cast<double>(labeled_ids.size());
  for (int id : labeled_ids) {
    for (int j = 0; j < posteriors.cols; ++j)
      g.at(id, j) = posteriors.at(id, j) * inv;
    g.at(id, labels[id]) -= inv;
  }
  return g;
}

AdamState AdamState::like(const Matrix& param) {
  AdamState s;
  s.first_moment = Matrix(param.rows, param.cols);
  s.second_moment = Matrix(param.rows, param.cols);
  return s;
}

void adam_step(Matrix& param, const Matrix& grad, AdamState& state,
               double learning_rate) {
  if (!param.same_shape(grad) || !param.same_shape(state.first_moment))
    throw ShapeError("adam_step: parameter/gradient/state shapes differ");
  if (!grad.all_finite()) throw NumericError("adam_step: non-finite gradient");
  ++state.step_count;
  const double b1 = state.beta1, b2 = state.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step_count));
  for (size_t i = 0; i < param.data.size(); ++i) {
    const double g = grad.data[i];
    double& m = state.first_moment.data[i];
    double& v = state.second_moment.data[i];
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    const double mhat = m / bc1;
    const double vhat = v / bc2;
    param.data[i] -= learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
  }
}

Matrix glorot_uniform(int rows, int cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / (rows + cols));
  Matrix m(rows, cols);
  for (double& v : m.data) v = rng.uniform(-limit, limit);
  return m;
}

GradCheckReport gradient_check(
    const std::function<double()>& loss,
    const std::function<std::vector<Matrix>()>& analytic,
    const std::vector<Matrix*>& params, double tolerance, double h) {
  const std::vector<Matrix> grads = analytic();
  GradCheckReport report;
  for (size_t p = 0; p < params.size(); ++p) {
    Matrix& param = *params[p];
    for (size_t i = 0; i < param.data.size(); ++i) {
      const double saved = param.data[i];
      param.data[i] = saved + h;
      const double up = loss();
      param.data[i] = saved - h;
      const double down = loss();
      param.data[i] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double an = grads[p].data[i];
      const double denom = std::max({std::abs(fd), std::abs(an), 1e-8});
      const double rel = std::abs(fd - an) / denom;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = static_cast<int>(p);
        report.worst_index = static_cast<int>(i);
      }
    }
  }
  report.pass = report.max_rel_error <= tolerance;
  return report;
}

}  // namespace linktheft
