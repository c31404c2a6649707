#include "knockoff/sparse_logit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "knockoff/errors.hpp"

namespace knockoff {

namespace {

double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double soft_threshold(double v, double k) {
  if (v > k) return v - k;
  if (v < -k) return v + k;
  return 0.0;
}

Eigen::VectorXd signed_labels(const LabelVector& y) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) out[static_cast<Eigen::Index>(i)] = y[i] == 1 ? 1.0 : -1.0;
  return out;
}

void check_shapes(DesignRef design, const LabelVector& y, Eigen::Index beta_size) {
  if (design.rows() != static_cast<Eigen::Index>(y.size()))
    throw DataError("design has " + std::to_string(design.rows()) + " rows, labels have " +
                    std::to_string(y.size()));
  if (design.cols() != beta_size)
    throw DataError("design has " + std::to_string(design.cols()) + " columns, coefficient vector has " +
                    std::to_string(beta_size));
}

/// Smooth loss and gradient for one set of margins.
struct SmoothEval {
  double loss = 0.0;
  double grad_intercept = 0.0;
  Eigen::VectorXd grad_beta;
};

double mean_loss(const Eigen::VectorXd& margins, const Eigen::VectorXd& ys) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < margins.size(); ++i) total += softplus(-ys[i] * margins[i]);
  return total / static_cast<double>(margins.size());
}

SmoothEval smooth_eval(DesignRef design, const Eigen::VectorXd& ys, const Eigen::VectorXd& margins) {
  const auto n = static_cast<double>(ys.size());
  Eigen::VectorXd residual(ys.size());
  SmoothEval out;
  double total = 0.0;
  for (Eigen::Index i = 0; i < ys.size(); ++i) {
    const double t = -ys[i] * margins[i];
    total += softplus(t);
    residual[i] = -ys[i] * sigmoid(t) / n;
  }
  out.loss = total / n;
  out.grad_intercept = residual.sum();
  out.grad_beta = design.transpose() * residual;
  return out;
}

Eigen::VectorXd margins_of(DesignRef design, double intercept, const Eigen::VectorXd& beta) {
  Eigen::VectorXd m = Eigen::VectorXd::Constant(design.rows(), intercept);
  Eigen::Index nnz = 0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) nnz += beta[j] != 0.0;
  if (2 * nnz > beta.size()) {
    m.noalias() += design * beta;
  } else {
    for (Eigen::Index j = 0; j < beta.size(); ++j)
      if (beta[j] != 0.0) m.noalias() += beta[j] * design.col(j);
  }
  return m;
}

double kkt_from_gradient(const Eigen::VectorXd& beta, double grad_intercept, const Eigen::VectorXd& grad_beta,
                         double penalty) {
  double worst = std::abs(grad_intercept);
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    const double g = grad_beta[j];
    const double v = beta[j] != 0.0 ? std::abs(g + std::copysign(penalty, beta[j]))
                                    : std::max(0.0, std::abs(g) - penalty);
    worst = std::max(worst, v);
  }
  return worst;
}

/// Upper end of the spectrum of [1 X]^T [1 X] / (4n) by power iteration.
double lipschitz_estimate(DesignRef design) {
  const Eigen::Index n = design.rows();
  const Eigen::Index d = design.cols();
  Eigen::VectorXd v = Eigen::VectorXd::Ones(d + 1) / std::sqrt(static_cast<double>(d + 1));
  double lambda = 0.0;
  for (int it = 0; it < 30; ++it) {
    Eigen::VectorXd av = Eigen::VectorXd::Constant(n, v[0]);
    av.noalias() += design * v.tail(d);
    Eigen::VectorXd w(d + 1);
    w[0] = av.sum();
    w.tail(d).noalias() = design.transpose() * av;
    const double norm = w.norm();
    if (norm == 0.0) return 1e-12;
    lambda = norm;
    v = w / norm;
  }
  return std::max(lambda / (4.0 * static_cast<double>(n)), 1e-12);
}

}  // namespace

PenaltyScale parse_penalty_scale(std::string_view name) {
  if (name == "mean") return PenaltyScale::mean;
  if (name == "sum") return PenaltyScale::sum;
  throw ConfigError("unknown penalty_scale '" + std::string(name) + "' (expected mean or sum)");
}

std::string_view to_string(PenaltyScale scale) { return scale == PenaltyScale::mean ? "mean" : "sum"; }

double effective_c(double c, PenaltyScale scale, Eigen::Index n) {
  return scale == PenaltyScale::sum ? c * static_cast<double>(n) : c;
}

double objective(DesignRef design, const LabelVector& y, double intercept, const Eigen::VectorXd& beta, double c) {
  check_shapes(design, y, beta.size());
  const Eigen::VectorXd ys = signed_labels(y);
  return mean_loss(margins_of(design, intercept, beta), ys) + beta.lpNorm<1>() / c;
}

Eigen::VectorXd smooth_gradient(DesignRef design, const LabelVector& y, double intercept,
                                const Eigen::VectorXd& beta) {
  check_shapes(design, y, beta.size());
  const auto eval = smooth_eval(design, signed_labels(y), margins_of(design, intercept, beta));
  Eigen::VectorXd out(beta.size() + 1);
  out[0] = eval.grad_intercept;
  out.tail(beta.size()) = eval.grad_beta;
  return out;
}

double kkt_residual(DesignRef design, const LabelVector& y, double intercept, const Eigen::VectorXd& beta,
                    double c) {
  const Eigen::VectorXd g = smooth_gradient(design, y, intercept, beta);
  return kkt_from_gradient(beta, g[0], g.tail(beta.size()), 1.0 / c);
}

LogisticModel fit_logistic(DesignRef design, const LabelVector& y, const FitOptions& options) {
  const Eigen::Index n = design.rows();
  const Eigen::Index d = design.cols();
  check_shapes(design, y, d);
  if (n == 0) throw DataError("cannot fit on an empty design");
  if (!y.has_both_classes()) throw DataError("single-class labels: logistic fit needs both classes");
  if (!design.allFinite()) throw DataError("design contains non-finite values");
  if (!(options.c > 0.0)) throw ConfigError("C must be positive");
  if (!(options.tol > 0.0)) throw ConfigError("tol must be positive");

  const Eigen::VectorXd ys = signed_labels(y);
  const double penalty = 1.0 / options.c;

  // Iterate state: x (kept, monotone), x_prev, z (latest prox point), and the
  // extrapolated point at which the gradient is taken.
  const double positives = (ys.array() > 0.0).cast<double>().sum();
  double x0 = std::log(positives / (static_cast<double>(n) - positives));
  Eigen::VectorXd xb = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd xm = margins_of(design, x0, xb);
  double fx = mean_loss(xm, ys);
  double obj_x = fx;

  double prev0 = x0;
  Eigen::VectorXd prevb = xb;
  Eigen::VectorXd prevm = xm;

  double y0 = x0;
  Eigen::VectorXd yb = xb;
  Eigen::VectorXd ym = xm;

  double lipschitz = lipschitz_estimate(design);
  double t = 1.0;
  bool from_x = true;  // y coincides with x, no momentum

  LogisticModel model;
  auto finish = [&](bool converged, int iterations, double kkt) {
    model.intercept = x0;
    model.coefficients = xb;
    model.converged = converged;
    model.iterations = iterations;
    model.final_objective = objective(design, y, x0, xb, options.c);
    model.kkt_residual = kkt;
    return model;
  };

  {
    const auto at_x = smooth_eval(design, ys, xm);
    const double kkt = kkt_from_gradient(xb, at_x.grad_intercept, at_x.grad_beta, penalty);
    if (kkt <= options.tol) return finish(true, 0, kkt);
  }

  double last_kkt = std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    const auto at_y = smooth_eval(design, ys, ym);

    double z0 = 0.0;
    Eigen::VectorXd zb(d);
    Eigen::VectorXd zm;
    double fz = 0.0;
    while (true) {
      z0 = y0 - at_y.grad_intercept / lipschitz;
      for (Eigen::Index j = 0; j < d; ++j)
        zb[j] = soft_threshold(yb[j] - at_y.grad_beta[j] / lipschitz, penalty / lipschitz);
      zm = margins_of(design, z0, zb);
      fz = mean_loss(zm, ys);
      const double d0 = z0 - y0;
      const Eigen::VectorXd db = zb - yb;
      const double model_bound = at_y.loss + at_y.grad_intercept * d0 + at_y.grad_beta.dot(db) +
                                 0.5 * lipschitz * (d0 * d0 + db.squaredNorm());
      if (fz <= model_bound + 1e-14 * std::abs(at_y.loss) || lipschitz > 1e300) break;
      lipschitz *= 2.0;
    }

    const double obj_z = fz + penalty * zb.lpNorm<1>();
    // A prox step taken from x itself is a descent step; near the optimum its
    // gain falls below the rounding of the objective, so accept it regardless.
    const bool improved = obj_z <= obj_x || from_x;
    const double gradient_map =
        lipschitz * std::max(std::abs(z0 - y0), (zb - yb).lpNorm<Eigen::Infinity>());

    prev0 = x0;
    prevb = xb;
    prevm = xm;
    if (improved) {
      x0 = z0;
      xb = zb;
      xm = zm;
      obj_x = obj_z;
    }
    if (options.on_iteration) options.on_iteration(iter, obj_x);

    if (improved && gradient_map <= options.tol) {
      const auto at_x = smooth_eval(design, ys, xm);
      last_kkt = kkt_from_gradient(xb, at_x.grad_intercept, at_x.grad_beta, penalty);
      if (last_kkt <= options.tol) return finish(true, iter, last_kkt);
    }

    if (!options.accelerate || !improved) {
      // plain proximal step from the kept iterate; restarts momentum
      t = 1.0;
      from_x = true;
      y0 = x0;
      yb = xb;
      ym = xm;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    // z == x here, so only the momentum term survives
    const double b = (t - 1.0) / t_next;
    y0 = x0 + b * (x0 - prev0);
    yb = xb + b * (xb - prevb);
    ym = xm + b * (xm - prevm);
    t = t_next;
    from_x = false;
  }

  const auto at_x = smooth_eval(design, ys, xm);
  last_kkt = kkt_from_gradient(xb, at_x.grad_intercept, at_x.grad_beta, penalty);
  return finish(last_kkt <= options.tol, options.max_iter, last_kkt);
}

Eigen::VectorXd predict_proba(const LogisticModel& model, DesignRef design) {
  if (design.cols() != model.coefficients.size())
    throw DataError("design has " + std::to_string(design.cols()) + " columns, model expects " +
                    std::to_string(model.coefficients.size()));
  const Eigen::VectorXd margins = margins_of(design, model.intercept, model.coefficients);
  constexpr double lo = std::numeric_limits<double>::min();
  const double hi = std::nextafter(1.0, 0.0);
  Eigen::VectorXd out(margins.size());
  for (Eigen::Index i = 0; i < margins.size(); ++i) out[i] = std::clamp(sigmoid(margins[i]), lo, hi);
  return out;
}

ClassifierMetrics evaluate_probabilities(const Eigen::VectorXd& proba, const LabelVector& y) {
  if (proba.size() != static_cast<Eigen::Index>(y.size()))
    throw DataError("probability and label counts differ");
  ClassifierMetrics out;
  if (y.empty()) return out;
  constexpr double eps = 1e-15;
  double correct = 0.0;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < proba.size(); ++i) {
    const int label = y[static_cast<std::size_t>(i)];
    const int predicted = proba[i] >= 0.5 ? 1 : 0;
    correct += predicted == label;
    const double p = std::clamp(proba[i], eps, 1.0 - eps);
    loss -= label == 1 ? std::log(p) : std::log(1.0 - p);
  }
  const auto n = static_cast<double>(proba.size());
  out.accuracy = correct / n;
  out.logloss = loss / n;
  return out;
}

ClassifierMetrics evaluate(const LogisticModel& model, DesignRef design, const LabelVector& y) {
  return evaluate_probabilities(predict_proba(model, design), y);
}

}  // namespace knockoff
