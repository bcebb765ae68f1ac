#pragma once

#include <Eigen/Dense>

namespace gwasdl {

struct IrlsConfig {
    int max_iter = 25;
    double tol = 1e-8;     // on absolute deviance change
    double ridge = 1e-8;   // added to the diagonal of X'WX

    void validate() const;
};

struct LogisticFit {
    Eigen::VectorXd beta;
    Eigen::VectorXd se;
    double deviance = 0.0;
    bool converged = false;
    bool separated = false;  // some |beta| exceeded kSeparationBound
    int iterations = 0;
};

inline constexpr double kSeparationBound = 15.0;

/// Newton/IRLS maximum likelihood for logistic regression. `design` carries its
/// own intercept column. Labels must be 0/1 with both classes present.
LogisticFit fit_logistic_irls(const Eigen::MatrixXd& design, const Eigen::VectorXd& labels,
                              const IrlsConfig& config = {});

/// L2-penalised logistic regression with an unpenalised intercept:
/// minimises -loglik + lambda/2 * |w|^2. When features outnumber samples the
/// Newton system is solved through the n x n Woodbury form. Returns
/// [intercept, w...].
Eigen::VectorXd fit_ridge_logistic(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                                   double lambda, int max_iter = 50, double tol = 1e-9);

}  // namespace gwasdl
