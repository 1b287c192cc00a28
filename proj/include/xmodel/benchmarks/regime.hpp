#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "xmodel/benchmarks/density.hpp"
#include "xmodel/errors.hpp"
#include "xmodel/rng.hpp"

namespace xmodel::bench {

/// Fitted 2-regime Markov switching regression for one hour.
struct RegimeFit {
    Eigen::MatrixXd coef;        // q x 2, one column per regime
    Eigen::Vector2d sigma2;      // regime noise variances
    Eigen::Matrix2d transition;  // row-stochastic: T(i, j) = P(next = j | current = i)
    Eigen::Vector2d initial;     // regime distribution at the first observation
    Eigen::Vector2d filtered;    // P(regime | data) at the last observation
    std::vector<double> loglik_path;  // per EM iteration, non-decreasing
    int restarts = 0;
};

namespace detail {

inline double normal_pdf(double resid, double var) {
    const double v = std::max(var, 1e-12);
    return std::exp(-0.5 * resid * resid / v) / std::sqrt(2.0 * M_PI * v);
}

struct EmState {
    Eigen::MatrixXd gamma;   // n x 2 smoothed regime probabilities
    Eigen::Matrix2d xi_sum;  // summed pairwise transition counts
    Eigen::Vector2d filtered_last;
    double loglik = 0.0;
};

/// Scaled forward-backward pass for the current parameters.
inline EmState forward_backward(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                const RegimeFit& fit) {
    const Eigen::Index n = y.size();
    Eigen::MatrixXd obs(n, 2);
    for (Eigen::Index t = 0; t < n; ++t) {
        for (int i = 0; i < 2; ++i) {
            const double resid = y(t) - x.row(t).dot(fit.coef.col(i));
            obs(t, i) = std::max(normal_pdf(resid, fit.sigma2(i)), 1e-300);
        }
    }
    Eigen::MatrixXd alpha(n, 2), beta(n, 2);
    Eigen::VectorXd scale(n);
    alpha.row(0) = (fit.initial.transpose().array() * obs.row(0).array()).matrix();
    scale(0) = alpha.row(0).sum();
    alpha.row(0) /= scale(0);
    for (Eigen::Index t = 1; t < n; ++t) {
        alpha.row(t) =
            ((alpha.row(t - 1) * fit.transition).array() * obs.row(t).array()).matrix();
        scale(t) = alpha.row(t).sum();
        alpha.row(t) /= scale(t);
    }
    beta.row(n - 1).setOnes();
    for (Eigen::Index t = n - 2; t >= 0; --t) {
        const Eigen::RowVector2d next =
            (obs.row(t + 1).array() * beta.row(t + 1).array()).matrix();
        beta.row(t) = (fit.transition * next.transpose()).transpose() / scale(t + 1);
    }

    EmState state;
    state.gamma.resize(n, 2);
    for (Eigen::Index t = 0; t < n; ++t) {
        Eigen::RowVector2d g = (alpha.row(t).array() * beta.row(t).array()).matrix();
        state.gamma.row(t) = g / g.sum();
    }
    state.xi_sum.setZero();
    for (Eigen::Index t = 1; t < n; ++t) {
        Eigen::Matrix2d xi;
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                xi(i, j) = alpha(t - 1, i) * fit.transition(i, j) * obs(t, j) * beta(t, j) /
                           scale(t);
            }
        }
        state.xi_sum += xi;
    }
    state.filtered_last = alpha.row(n - 1).transpose();
    state.loglik = scale.array().log().sum();
    return state;
}

inline void m_step(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const EmState& state,
                   RegimeFit& fit) {
    const Eigen::Index n = y.size();
    for (int i = 0; i < 2; ++i) {
        const Eigen::VectorXd w = state.gamma.col(i);
        const Eigen::MatrixXd xw = x.array().colwise() * w.array();
        const Eigen::MatrixXd xtx = xw.transpose() * x;
        const Eigen::VectorXd xty = xw.transpose() * y;
        fit.coef.col(i) = xtx.ldlt().solve(xty);
        const Eigen::VectorXd resid = y - x * fit.coef.col(i);
        const double wsum = w.sum();
        fit.sigma2(i) = (w.array() * resid.array().square()).sum() / std::max(wsum, 1e-12);
    }
    for (int i = 0; i < 2; ++i) {
        double denom = 0.0;
        for (Eigen::Index t = 0; t + 1 < n; ++t) denom += state.gamma(t, i);
        for (int j = 0; j < 2; ++j) {
            fit.transition(i, j) = denom > 0.0 ? state.xi_sum(i, j) / denom : 0.5;
        }
        const double rowsum = fit.transition.row(i).sum();
        fit.transition.row(i) /= rowsum;
    }
    fit.initial = state.gamma.row(0).transpose();
}

/// Two-group split of squared OLS residuals (1-d k-means) to seed the regimes.
inline Eigen::MatrixXd initial_responsibilities(const Eigen::MatrixXd& x,
                                                const Eigen::VectorXd& y, std::mt19937_64& rng,
                                                bool perturb) {
    const Eigen::VectorXd ols = (x.transpose() * x).ldlt().solve(x.transpose() * y);
    Eigen::VectorXd sq = (y - x * ols).array().square();
    std::vector<double> sorted(sq.data(), sq.data() + sq.size());
    std::sort(sorted.begin(), sorted.end());
    double lo = sorted[sorted.size() / 4];
    double hi = sorted[sorted.size() * 9 / 10];
    if (hi <= lo) hi = lo + 1.0;
    for (int it = 0; it < 50; ++it) {
        double lo_sum = 0.0, hi_sum = 0.0;
        std::size_t lo_n = 0, hi_n = 0;
        for (Eigen::Index t = 0; t < sq.size(); ++t) {
            if (std::abs(sq(t) - lo) <= std::abs(sq(t) - hi)) {
                lo_sum += sq(t);
                ++lo_n;
            } else {
                hi_sum += sq(t);
                ++hi_n;
            }
        }
        const double new_lo = lo_n ? lo_sum / lo_n : lo;
        const double new_hi = hi_n ? hi_sum / hi_n : hi;
        if (new_lo == lo && new_hi == hi) break;
        lo = new_lo;
        hi = new_hi;
    }
    Eigen::MatrixXd gamma(sq.size(), 2);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (Eigen::Index t = 0; t < sq.size(); ++t) {
        bool low_regime = std::abs(sq(t) - lo) <= std::abs(sq(t) - hi);
        if (perturb && unif(rng) < 0.25) low_regime = !low_regime;
        gamma(t, 0) = low_regime ? 0.9 : 0.1;
        gamma(t, 1) = 1.0 - gamma(t, 0);
    }
    return gamma;
}

}  // namespace detail

/**
 * @brief Fits the 2-regime switching regression by EM.
 *
 * Alternates forward-backward smoothing with weighted least squares per
 * regime and transition re-estimation until the log-likelihood gain drops
 * below 1e-6. A collapsing regime triggers a perturbed restart, at most ten
 * times, then DegenerateRegimeError.
 */
inline RegimeFit fit_regime_switching(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                      std::uint64_t seed, int max_iter = 500) {
    if (x.rows() != y.size() || x.rows() < 2 * x.cols() + 4) {
        throw InsufficientHistoryError("too few observations for the regime switching model");
    }
    std::mt19937_64 rng = substream(seed, 0x72656769ULL);
    const double min_weight = static_cast<double>(x.cols()) + 1.0;

    for (int attempt = 0; attempt <= 10; ++attempt) {
        RegimeFit fit;
        fit.coef.resize(x.cols(), 2);
        fit.restarts = attempt;
        fit.transition << 0.9, 0.1, 0.1, 0.9;
        fit.initial << 0.5, 0.5;

        detail::EmState state;
        state.gamma = detail::initial_responsibilities(x, y, rng, attempt > 0);
        state.xi_sum << 0.45, 0.05, 0.05, 0.45;  // consistent with the prior transition
        state.xi_sum *= static_cast<double>(y.size() - 1) / 0.9;
        detail::m_step(x, y, state, fit);

        bool degenerate = false;
        double previous = -std::numeric_limits<double>::infinity();
        for (int iter = 0; iter < max_iter; ++iter) {
            state = detail::forward_backward(x, y, fit);
            fit.loglik_path.push_back(state.loglik);
            if (state.gamma.col(0).sum() < min_weight || state.gamma.col(1).sum() < min_weight) {
                degenerate = true;
                break;
            }
            detail::m_step(x, y, state, fit);
            if (state.loglik - previous < 1e-6 && iter > 0) break;
            previous = state.loglik;
        }
        if (!degenerate) {
            fit.filtered = state.filtered_last;
            return fit;
        }
    }
    throw DegenerateRegimeError("regime weights collapsed in every EM restart");
}

/// One-step predictive mixture: filtered probabilities pushed through the
/// transition matrix weight the per-regime Gaussians at the target row.
inline MixtureDensity regime_predictive(const RegimeFit& fit, const Eigen::VectorXd& x_target) {
    const Eigen::Vector2d w = fit.transition.transpose() * fit.filtered;
    MixtureDensity density;
    for (int i = 0; i < 2; ++i) {
        density.weights.push_back(w(i));
        density.means.push_back(x_target.dot(fit.coef.col(i)));
        density.sds.push_back(std::sqrt(std::max(fit.sigma2(i), 0.0)));
    }
    return density;
}

}  // namespace xmodel::bench
