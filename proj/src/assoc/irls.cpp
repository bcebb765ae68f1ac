#include "gwasdl/assoc/irls.hpp"

#include <algorithm>
#include <cmath>

#include "gwasdl/error.hpp"

namespace gwasdl {

namespace {

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double deviance_of(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
    // -2 loglik written with log1p(exp(.)) for stability.
    double dev = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        const double e = eta[i];
        const double log1pexp = e > 0.0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
        dev += log1pexp - y[i] * e;
    }
    return 2.0 * dev;
}

void check_labels(const Eigen::VectorXd& y) {
    Eigen::Index cases = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y[i] != 0.0 && y[i] != 1.0) {
            throw Error(ErrorCode::DegenerateLabels, "labels must be 0 or 1");
        }
        cases += y[i] == 1.0 ? 1 : 0;
    }
    if (cases == 0 || cases == y.size()) {
        throw Error(ErrorCode::DegenerateLabels, "labels are all one class");
    }
}

}  // namespace

void IrlsConfig::validate() const {
    if (max_iter <= 0 || !(tol > 0.0) || !(ridge > 0.0)) {
        throw Error(ErrorCode::ConfigInvalid, "IRLS max_iter, tol and ridge must be positive");
    }
}

LogisticFit fit_logistic_irls(const Eigen::MatrixXd& design, const Eigen::VectorXd& labels,
                              const IrlsConfig& config) {
    config.validate();
    if (design.rows() != labels.size()) {
        throw Error(ErrorCode::ShapeMismatch, "design rows differ from label count");
    }
    check_labels(labels);

    const Eigen::Index n = design.rows();
    const Eigen::Index p = design.cols();
    LogisticFit fit;
    fit.beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd mu(n);
    Eigen::VectorXd w(n);
    double deviance = deviance_of(eta, labels);
    const Eigen::MatrixXd ridge = config.ridge * Eigen::MatrixXd::Identity(p, p);

    for (int iter = 1; iter <= config.max_iter; ++iter) {
        for (Eigen::Index i = 0; i < n; ++i) {
            mu[i] = sigmoid(eta[i]);
            w[i] = mu[i] * (1.0 - mu[i]);
        }
        const Eigen::MatrixXd info = design.transpose() * w.asDiagonal() * design + ridge;
        const Eigen::VectorXd score = design.transpose() * (labels - mu);
        const Eigen::LLT<Eigen::MatrixXd> llt(info);
        if (llt.info() != Eigen::Success) {
            throw Error(ErrorCode::SingularSystem, "X'WX + ridge*I is not positive definite");
        }
        fit.beta += llt.solve(score);
        fit.iterations = iter;
        eta.noalias() = design * fit.beta;
        const double next = deviance_of(eta, labels);
        const double change = std::abs(next - deviance);
        deviance = next;
        if (fit.beta.cwiseAbs().maxCoeff() > kSeparationBound) {
            fit.separated = true;
            break;
        }
        if (change < config.tol) {
            fit.converged = true;
            break;
        }
    }
    fit.deviance = deviance;
    if (fit.separated) {
        fit.converged = false;
    }

    for (Eigen::Index i = 0; i < n; ++i) {
        mu[i] = sigmoid(eta[i]);
        w[i] = mu[i] * (1.0 - mu[i]);
    }
    const Eigen::MatrixXd info = design.transpose() * w.asDiagonal() * design + ridge;
    const Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::SingularSystem, "information matrix is not positive definite");
    }
    const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(p, p));
    fit.se = cov.diagonal().cwiseSqrt();
    return fit;
}

Eigen::VectorXd fit_ridge_logistic(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                                   double lambda, int max_iter, double tol) {
    if (!(lambda > 0.0)) {
        throw Error(ErrorCode::ConfigInvalid, "ridge lambda must be positive");
    }
    if (features.rows() != labels.size()) {
        throw Error(ErrorCode::ShapeMismatch, "feature rows differ from label count");
    }
    check_labels(labels);
    const Eigen::Index n = features.rows();
    const Eigen::Index p = features.cols();
    const bool dual = p > n;
    Eigen::MatrixXd gram;
    if (dual) {
        gram = features * features.transpose();
    }

    double intercept = 0.0;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
    auto objective = [&](double b0, const Eigen::VectorXd& coef) {
        Eigen::VectorXd eta = (features * coef).array() + b0;
        return 0.5 * deviance_of(eta, labels) + 0.5 * lambda * coef.squaredNorm();
    };
    double current = objective(intercept, w);

    Eigen::VectorXd mu(n);
    Eigen::VectorXd weight(n);
    for (int iter = 0; iter < max_iter; ++iter) {
        const Eigen::VectorXd eta = (features * w).array() + intercept;
        for (Eigen::Index i = 0; i < n; ++i) {
            mu[i] = sigmoid(eta[i]);
            weight[i] = std::max(mu[i] * (1.0 - mu[i]), 1e-12);
        }
        const Eigen::VectorXd resid = labels - mu;
        const double g0 = resid.sum();
        const Eigen::VectorXd g = features.transpose() * resid - lambda * w;
        const Eigen::VectorXd u = features.transpose() * weight;
        const double s = weight.sum();

        // A = X'WX + lambda*I; apply A^-1 to g and u.
        Eigen::VectorXd a_inv_g;
        Eigen::VectorXd a_inv_u;
        if (dual) {
            const Eigen::VectorXd root = weight.cwiseSqrt();
            Eigen::MatrixXd m = root.asDiagonal() * gram * root.asDiagonal();
            m.diagonal().array() += lambda;
            const Eigen::LLT<Eigen::MatrixXd> llt(m);
            if (llt.info() != Eigen::Success) {
                throw Error(ErrorCode::SingularSystem, "ridge logistic Woodbury system");
            }
            auto apply = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
                const Eigen::VectorXd sxv = root.cwiseProduct(features * v);
                const Eigen::VectorXd t = root.cwiseProduct(llt.solve(sxv));
                return (v - features.transpose() * t) / lambda;
            };
            a_inv_g = apply(g);
            a_inv_u = apply(u);
        } else {
            Eigen::MatrixXd a = features.transpose() * weight.asDiagonal() * features;
            a.diagonal().array() += lambda;
            const Eigen::LLT<Eigen::MatrixXd> llt(a);
            if (llt.info() != Eigen::Success) {
                throw Error(ErrorCode::SingularSystem, "ridge logistic normal equations");
            }
            a_inv_g = llt.solve(g);
            a_inv_u = llt.solve(u);
        }
        const double schur = s - u.dot(a_inv_u);
        const double d0 = (g0 - u.dot(a_inv_g)) / schur;
        const Eigen::VectorXd dw = a_inv_g - a_inv_u * d0;

        double step = 1.0;
        double next = objective(intercept + d0, w + dw);
        while (next > current && step > 1e-6) {
            step *= 0.5;
            next = objective(intercept + step * d0, w + step * dw);
        }
        intercept += step * d0;
        w += step * dw;
        const double change = current - next;
        current = next;
        if (std::abs(change) < tol * (1.0 + std::abs(current))) {
            break;
        }
    }
    Eigen::VectorXd out(p + 1);
    out[0] = intercept;
    out.tail(p) = w;
    return out;
}

}  // namespace gwasdl
