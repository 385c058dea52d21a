#pragma once

#include <Eigen/Dense>

#include <optional>

namespace ddgroup {

enum class OlsMode {
  strict,    // full column rank required, rank deficiency is an error
  min_norm,  // least-squares solution of minimum Euclidean norm
};

struct LinearFit {
  Eigen::VectorXd beta;
  double train_mse = 0.0;
  // Unbiased residual scale sqrt(SSR / dof); present only when dof >= 1.
  std::optional<double> sigma_hat;
  long dof = 0;  // rows minus columns
};

// Least squares via orthogonal factorization. Residuals of the returned
// solution satisfy |X' r| <= 1e-8 * (1 + |X' Y|).
LinearFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y, OlsMode mode = OlsMode::strict);

// Mean squared residual of beta on (X, Y). X must be nonempty.
double mse(const Eigen::VectorXd& beta, const Eigen::MatrixXd& X, const Eigen::VectorXd& Y);

// sqrt(SSR / (k - d)); requires k > d.
double sigma_hat(const Eigen::VectorXd& beta, const Eigen::MatrixXd& X, const Eigen::VectorXd& Y);

// Left-continuous empirical quantile of the absolute residuals |Y - X beta|:
// the smallest residual magnitude t with (1/k) * #{|r_i| <= t} >= q.
// Not interpolated. q must lie in (0, 1].
double abs_residual_quantile(const Eigen::VectorXd& beta, const Eigen::MatrixXd& X,
                             const Eigen::VectorXd& Y, double q);

}  // namespace ddgroup
