#pragma once

#include <Eigen/Core>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include <functional>

namespace ccpt::detail {

using ResidualFn = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct ResidualFunctor {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  ResidualFn fn;
  int n_inputs = 0;
  int n_values = 0;

  int inputs() const { return n_inputs; }
  int values() const { return n_values; }
  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& residuals) const {
    fn(x, residuals);
    return 0;
  }
};

struct LeastSquaresResult {
  Eigen::VectorXd x;
  double residual_norm = 0.0;
  int status = 0;
};

/// Levenberg-Marquardt (MINPACK lmdif) with a central-difference Jacobian.
inline LeastSquaresResult least_squares(const ResidualFn& fn, int n_values, Eigen::VectorXd x0,
                                        double ftol, double xtol, int max_evaluations) {
  ResidualFunctor functor{fn, static_cast<int>(x0.size()), n_values};
  Eigen::NumericalDiff<ResidualFunctor, Eigen::Central> diff(functor);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<ResidualFunctor, Eigen::Central>> lm(diff);
  lm.parameters.ftol = ftol;
  lm.parameters.xtol = xtol;
  lm.parameters.maxfev = max_evaluations;
  LeastSquaresResult out;
  out.status = static_cast<int>(lm.minimize(x0));
  out.x = x0;
  Eigen::VectorXd r(n_values);
  fn(out.x, r);
  out.residual_norm = r.norm();
  return out;
}

}  // namespace ccpt::detail
