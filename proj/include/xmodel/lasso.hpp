#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "xmodel/errors.hpp"
#include "xmodel/features.hpp"

namespace xmodel {

/// Tuning knobs of the coordinate-descent lasso solver.
struct LassoSettings {
    int grid_size = 100;          // number of lambda values
    double min_ratio = 1e-4;      // smallest lambda relative to lambda_max
    double tol = 1e-7;            // convergence on max scaled-coefficient change
    long max_sweeps = 100000;     // per lambda, full + active sweeps combined
    bool kkt_polish = false;      // verify stationarity with fresh gradients per lambda
    double kkt_tol = 1e-7;        // relative to lambda_max, used when polishing
    // Path truncation for BIC-selected fits: stop once the BIC has not
    // improved for this many consecutive grid points (0 = always solve the
    // full grid). The dense tail of the path is by far the most expensive
    // part and cannot win the selection once the criterion has bottomed out.
    int bic_patience = 0;
};

/// One solution on the regularization path.
struct LassoPathEntry {
    double lambda = 0.0;
    Eigen::VectorXd beta;  // scaled coefficients
    double rss = 0.0;      // residual sum of squares in scaled units
    int df = 0;            // nonzero coefficients
};

struct LassoPath {
    std::vector<LassoPathEntry> entries;
    double lambda_max = 0.0;
};

/**
 * @brief Smallest penalty that zeroes every coefficient: max_j |X_j' y|.
 */
inline double lasso_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (x.cols() == 0) return 0.0;
    return (x.transpose() * y).cwiseAbs().maxCoeff();
}

/// Exponentially decaying grid from lambda_max down to lambda_max * min_ratio.
inline std::vector<double> lambda_grid(double lambda_max, const LassoSettings& settings) {
    std::vector<double> grid(settings.grid_size);
    if (settings.grid_size == 1) {
        grid[0] = lambda_max;
        return grid;
    }
    const double log_max = std::log(lambda_max);
    const double log_min = std::log(lambda_max * settings.min_ratio);
    for (int i = 0; i < settings.grid_size; ++i) {
        grid[i] = std::exp(log_max + (log_min - log_max) * i / (settings.grid_size - 1));
    }
    return grid;
}

namespace detail {

inline double soft_threshold(double z, double gamma) {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

/**
 * Cyclic coordinate descent with covariance updates: the gradient vector
 * X'r is maintained incrementally, and Gram columns are formed lazily the
 * first time a variable moves. Much cheaper than residual updates once the
 * active set is small compared to n.
 */
class CoordinateDescent {
public:
    CoordinateDescent(const Eigen::MatrixXd& x, const Eigen::VectorXd& y)
        : x_(x), y_(y), p_(x.cols()) {
        col_sq_ = x.colwise().squaredNorm();
        grad_ = x.transpose() * y;  // X' r at beta = 0
        beta_ = Eigen::VectorXd::Zero(p_);
        gram_slot_.assign(static_cast<std::size_t>(p_), -1);
    }

    /// Minimizes 0.5*||y - X b||^2 + lambda*||b||_1 from the current warm start.
    void solve(double lambda, const LassoSettings& settings, std::size_t lambda_index) {
        long sweeps = 0;
        while (true) {
            const double delta = sweep(lambda, /*active_only=*/false);
            ++sweeps;
            if (sweeps > settings.max_sweeps) {
                throw ConvergenceError("coordinate descent did not converge", lambda_index);
            }
            if (delta < settings.tol) {
                if (!settings.kkt_polish || polish(lambda, settings, lambda_index, sweeps)) break;
                continue;
            }
            while (true) {
                const double inner = sweep(lambda, /*active_only=*/true);
                ++sweeps;
                if (sweeps > settings.max_sweeps) {
                    throw ConvergenceError("coordinate descent did not converge", lambda_index);
                }
                if (inner < settings.tol) break;
            }
        }
    }

    const Eigen::VectorXd& beta() const { return beta_; }

    /// Residual sum of squares from an exact residual recomputation.
    double exact_rss() const { return exact_residual().squaredNorm(); }

    Eigen::VectorXd exact_residual() const {
        Eigen::VectorXd r = y_;
        for (Eigen::Index j = 0; j < p_; ++j) {
            if (beta_(j) != 0.0) r -= beta_(j) * x_.col(j);
        }
        return r;
    }

private:
    double sweep(double lambda, bool active_only) {
        double max_delta = 0.0;
        for (Eigen::Index j = 0; j < p_; ++j) {
            if (active_only && beta_(j) == 0.0) continue;
            if (col_sq_(j) <= 0.0) continue;
            const double z = grad_(j) + col_sq_(j) * beta_(j);
            const double updated = soft_threshold(z, lambda) / col_sq_(j);
            const double delta = updated - beta_(j);
            if (delta != 0.0) {
                grad_ -= delta * gram_column(j);
                beta_(j) = updated;
                max_delta = std::max(max_delta, std::abs(delta));
            }
        }
        return max_delta;
    }

    /// Replaces the incrementally tracked gradient with an exact one and
    /// reports whether the stationarity conditions hold.
    bool polish(double lambda, const LassoSettings& settings, std::size_t lambda_index,
                long& sweeps) {
        grad_ = x_.transpose() * exact_residual();
        const double tol = settings.kkt_tol * std::max(lambda, 1.0);
        for (Eigen::Index j = 0; j < p_; ++j) {
            const double g = grad_(j);
            const bool ok = beta_(j) == 0.0 ? std::abs(g) <= lambda + tol
                                            : std::abs(g - lambda * (beta_(j) > 0 ? 1.0 : -1.0)) <= tol;
            if (!ok) {
                if (++sweeps > settings.max_sweeps) {
                    throw ConvergenceError("KKT polishing did not converge", lambda_index);
                }
                return false;
            }
        }
        return true;
    }

    const Eigen::VectorXd& gram_column(Eigen::Index j) {
        int& slot = gram_slot_[static_cast<std::size_t>(j)];
        if (slot < 0) {
            slot = static_cast<int>(gram_.size());
            gram_.emplace_back(x_.transpose() * x_.col(j));
        }
        return gram_[static_cast<std::size_t>(slot)];
    }

    const Eigen::MatrixXd& x_;
    const Eigen::VectorXd& y_;
    Eigen::Index p_;
    Eigen::VectorXd col_sq_;
    Eigen::VectorXd grad_;
    Eigen::VectorXd beta_;
    std::vector<int> gram_slot_;
    std::vector<Eigen::VectorXd> gram_;
};

}  // namespace detail

/**
 * @brief Solves the lasso along a decreasing penalty grid with warm starts.
 *
 * Minimizes 0.5*sum_d (y_d - x_d'b)^2 + lambda*sum_j |b_j| per grid value.
 * Coefficients are zero at lambda_max = max_j |X_j'y| and reach the
 * least-squares solution as lambda goes to zero.
 */
/**
 * @brief Bayesian information criterion for a path entry.
 *
 * BIC = n log(RSS/n) + df log(n) with df the nonzero count.
 */
inline double lasso_bic(const LassoPathEntry& entry, std::size_t n) {
    const double rss = std::max(entry.rss, 1e-300);
    return static_cast<double>(n) * std::log(rss / static_cast<double>(n)) +
           entry.df * std::log(static_cast<double>(n));
}

inline LassoPath lasso_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            const std::vector<double>& lambdas, const LassoSettings& settings) {
    if (lambdas.empty()) throw ConfigError("lasso penalty grid must not be empty");
    for (std::size_t i = 1; i < lambdas.size(); ++i) {
        if (!(lambdas[i] < lambdas[i - 1])) {
            throw ConfigError("lasso penalty grid must be strictly decreasing");
        }
    }
    LassoPath path;
    path.lambda_max = lasso_lambda_max(x, y);
    detail::CoordinateDescent solver(x, y);
    path.entries.reserve(lambdas.size());
    double best_bic = 0.0;
    int since_improvement = 0;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        solver.solve(lambdas[i], settings, i);
        LassoPathEntry entry;
        entry.lambda = lambdas[i];
        entry.beta = solver.beta();
        entry.rss = solver.exact_rss();
        entry.df = static_cast<int>((entry.beta.array() != 0.0).count());
        path.entries.push_back(std::move(entry));
        if (settings.bic_patience > 0) {
            const double bic = lasso_bic(path.entries.back(), static_cast<std::size_t>(y.size()));
            if (path.entries.size() == 1 || bic < best_bic) {
                best_bic = bic;
                since_improvement = 0;
            } else if (++since_improvement >= settings.bic_patience) {
                break;
            }
        }
    }
    return path;
}

/// Index of the BIC-minimizing entry; ties go to the larger (sparser) lambda.
inline std::size_t select_lambda(const LassoPath& path, std::size_t n) {
    if (path.entries.empty()) throw ConfigError("empty lasso path");
    std::size_t best = 0;
    double best_bic = lasso_bic(path.entries[0], n);
    for (std::size_t i = 1; i < path.entries.size(); ++i) {
        const double bic = lasso_bic(path.entries[i], n);
        if (bic < best_bic) {
            best = i;
            best_bic = bic;
        }
    }
    return best;
}

}  // namespace xmodel
