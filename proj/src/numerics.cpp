#include "ddgroup/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace ddgroup {

LinearFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y, OlsMode mode) {
  const long k = X.rows();
  const long d = X.cols();
  if (k == 0 || d == 0) throw std::invalid_argument("ols: empty system");
  if (Y.size() != k) throw std::invalid_argument("ols: row count mismatch");
  if (!X.allFinite() || !Y.allFinite()) throw std::invalid_argument("ols: non-finite input");

  LinearFit fit;
  if (mode == OlsMode::strict) {
    if (k < d) throw std::invalid_argument("ols: fewer rows than columns in strict mode");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < d) throw std::runtime_error("ols: rank-deficient design matrix");
    fit.beta = qr.solve(Y);
  } else {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(X);
    fit.beta = cod.solve(Y);
  }

  Eigen::VectorXd r = Y - X * fit.beta;
  double gram_scale = 1.0 + (X.transpose() * Y).norm();
  if ((X.transpose() * r).norm() > 1e-8 * gram_scale)
    throw std::runtime_error("ols: residual not orthogonal to the column space");

  fit.train_mse = r.squaredNorm() / static_cast<double>(k);
  fit.dof = k - d;
  if (fit.dof >= 1) fit.sigma_hat = std::sqrt(r.squaredNorm() / static_cast<double>(fit.dof));
  return fit;
}

double mse(const Eigen::VectorXd& beta, const Eigen::MatrixXd& X, const Eigen::VectorXd& Y) {
  const long k = X.rows();
  if (k == 0) throw std::invalid_argument("mse: empty data");
  if (X.cols() != beta.size() || Y.size() != k) throw std::invalid_argument("mse: shape mismatch");
  return (Y - X * beta).squaredNorm() / static_cast<double>(k);
}

double sigma_hat(const Eigen::VectorXd& beta, const Eigen::MatrixXd& X, const Eigen::VectorXd& Y) {
  const long k = X.rows();
  const long d = X.cols();
  if (k <= d) throw std::invalid_argument("sigma_hat: need more rows than columns");
  if (beta.size() != d || Y.size() != k) throw std::invalid_argument("sigma_hat: shape mismatch");
  return std::sqrt((Y - X * beta).squaredNorm() / static_cast<double>(k - d));
}

double abs_residual_quantile(const Eigen::VectorXd& beta, const Eigen::MatrixXd& X,
                             const Eigen::VectorXd& Y, double q) {
  const long k = X.rows();
  if (k == 0) throw std::invalid_argument("abs_residual_quantile: empty data");
  if (X.cols() != beta.size() || Y.size() != k)
    throw std::invalid_argument("abs_residual_quantile: shape mismatch");
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("abs_residual_quantile: q outside (0, 1]");

  std::vector<double> r(static_cast<size_t>(k));
  Eigen::VectorXd res = Y - X * beta;
  for (long i = 0; i < k; ++i) r[static_cast<size_t>(i)] = std::abs(res(i));
  std::sort(r.begin(), r.end());
  // smallest m with m / k >= q; the guard absorbs products like 0.9 * 10
  // that land a hair above the integer
  long m = static_cast<long>(std::ceil(q * static_cast<double>(k) - 1e-9));
  m = std::max<long>(1, std::min<long>(m, k));
  return r[static_cast<size_t>(m - 1)];
}

}  // namespace ddgroup
