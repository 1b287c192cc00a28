#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "xmodel/lasso.hpp"

using namespace xmodel;

namespace {

struct Instance {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    std::vector<int> support;
};

/// Well-conditioned Gaussian design with a planted sparse signal.
Instance planted_instance(int n, int p, const std::vector<std::pair<int, double>>& signal,
                          double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Instance inst;
    inst.x.resize(n, p);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < p; ++c) inst.x(r, c) = gauss(rng);
    }
    inst.y = Eigen::VectorXd::Zero(n);
    for (const auto& [col, coef] : signal) {
        inst.y += coef * inst.x.col(col);
        inst.support.push_back(col);
    }
    for (int r = 0; r < n; ++r) inst.y(r) += sigma * gauss(rng);
    return inst;
}

}  // namespace

TEST_CASE("lambda zero reproduces ordinary least squares") {
    Instance inst = planted_instance(500, 50, {{3, 1.0}, {17, -0.7}, {40, 0.5}}, 0.5, 42);
    LassoSettings settings;
    settings.tol = 1e-10;
    const double lmax = lasso_lambda_max(inst.x, inst.y);
    std::vector<double> grid = lambda_grid(lmax, settings);
    grid.push_back(0.0);
    const LassoPath path = lasso_path(inst.x, inst.y, grid, settings);

    const Eigen::VectorXd ols =
        (inst.x.transpose() * inst.x).ldlt().solve(inst.x.transpose() * inst.y);
    const Eigen::VectorXd& cd = path.entries.back().beta;
    REQUIRE((cd - ols).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("lambda at or above max_j |X_j'y| zeroes every coefficient") {
    Instance inst = planted_instance(200, 20, {{5, 2.0}}, 0.3, 7);
    const double lmax = lasso_lambda_max(inst.x, inst.y);
    LassoSettings settings;
    const LassoPath path = lasso_path(inst.x, inst.y, {lmax * 1.01, lmax}, settings);
    CHECK(path.entries[0].df == 0);
    CHECK(path.entries[1].df == 0);
    // just below, something activates
    const LassoPath below = lasso_path(inst.x, inst.y, {lmax * 0.99}, settings);
    CHECK(below.entries[0].df >= 1);
}

TEST_CASE("stationarity conditions hold along the path") {
    Instance inst = planted_instance(300, 40, {{1, 1.2}, {30, -0.8}}, 0.4, 11);
    LassoSettings settings;
    settings.tol = 1e-9;
    settings.kkt_polish = true;
    settings.kkt_tol = 1e-8;
    const double lmax = lasso_lambda_max(inst.x, inst.y);
    const LassoPath path = lasso_path(inst.x, inst.y, lambda_grid(lmax, settings), settings);
    for (const auto& entry : path.entries) {
        const Eigen::VectorXd resid = inst.y - inst.x * entry.beta;
        const Eigen::VectorXd grad = inst.x.transpose() * resid;
        for (int j = 0; j < inst.x.cols(); ++j) {
            if (entry.beta(j) == 0.0) {
                REQUIRE(std::abs(grad(j)) <= entry.lambda + 1e-6 * lmax);
            } else {
                REQUIRE(std::abs(grad(j) - entry.lambda * (entry.beta(j) > 0 ? 1.0 : -1.0)) <=
                        1e-6 * lmax);
            }
        }
    }
}

TEST_CASE("BIC selection recovers a planted 3-sparse support") {
    Instance inst =
        planted_instance(500, 50, {{3, 1.0}, {17, -0.8}, {40, 0.6}}, 0.1, 2025);
    LassoSettings settings;
    const double lmax = lasso_lambda_max(inst.x, inst.y);
    const LassoPath path = lasso_path(inst.x, inst.y, lambda_grid(lmax, settings), settings);
    const std::size_t pick = select_lambda(path, 500);
    const auto& entry = path.entries[pick];
    REQUIRE(entry.df == 3);
    for (int col : inst.support) REQUIRE(entry.beta(col) != 0.0);
}

TEST_CASE("BIC keeps a pure-noise fit essentially empty") {
    Instance inst = planted_instance(400, 30, {}, 1.0, 99);
    LassoSettings settings;
    const double lmax = lasso_lambda_max(inst.x, inst.y);
    const LassoPath path = lasso_path(inst.x, inst.y, lambda_grid(lmax, settings), settings);
    const std::size_t pick = select_lambda(path, 400);
    CHECK(path.entries[pick].df <= 2);
}

TEST_CASE("BIC finds a strong 1-sparse signal") {
    Instance inst = planted_instance(400, 30, {{12, 1.5}}, 0.2, 5);
    LassoSettings settings;
    const double lmax = lasso_lambda_max(inst.x, inst.y);
    const LassoPath path = lasso_path(inst.x, inst.y, lambda_grid(lmax, settings), settings);
    const std::size_t pick = select_lambda(path, 400);
    REQUIRE(path.entries[pick].df >= 1);
    CHECK(path.entries[pick].beta(12) != 0.0);
}

TEST_CASE("BIC ties go to the larger lambda") {
    LassoPath path;
    LassoPathEntry a;
    a.lambda = 2.0;
    a.beta = Eigen::VectorXd::Zero(3);
    a.rss = 10.0;
    a.df = 0;
    LassoPathEntry b = a;
    b.lambda = 1.0;
    path.entries = {a, b};
    REQUIRE(lasso_bic(path.entries[0], 100) == lasso_bic(path.entries[1], 100));
    CHECK(select_lambda(path, 100) == 0);
}

TEST_CASE("non-convergence carries the lambda index") {
    // correlated columns and a single permitted sweep cannot converge
    std::mt19937_64 rng(13);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd x(100, 10);
    for (int r = 0; r < 100; ++r) {
        const double shared = gauss(rng);
        for (int c = 0; c < 10; ++c) x(r, c) = shared + 0.1 * gauss(rng);
    }
    Eigen::VectorXd y = x.col(0) + x.col(5);
    LassoSettings settings;
    settings.max_sweeps = 1;
    try {
        lasso_path(x, y, {1.0, 0.5}, settings);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.lambda_index() <= 1);
    }
}

TEST_CASE("the lambda grid decays exponentially from lambda_max") {
    LassoSettings settings;
    const auto grid = lambda_grid(8.0, settings);
    REQUIRE(grid.size() == 100);
    CHECK(grid.front() == Catch::Approx(8.0));
    CHECK(grid.back() == Catch::Approx(8.0 * 1e-4).epsilon(1e-9));
    const double ratio = grid[1] / grid[0];
    for (std::size_t i = 2; i < grid.size(); ++i) {
        CHECK(grid[i] / grid[i - 1] == Catch::Approx(ratio).epsilon(1e-9));
    }
}

TEST_CASE("BIC patience truncates the dense tail without changing the winner") {
    Instance inst = planted_instance(300, 60, {{2, 1.0}, {11, 0.7}}, 0.3, 77);
    LassoSettings full;
    const double lmax = lasso_lambda_max(inst.x, inst.y);
    const LassoPath all = lasso_path(inst.x, inst.y, lambda_grid(lmax, full), full);
    LassoSettings pruned = full;
    pruned.bic_patience = 12;
    const LassoPath cut = lasso_path(inst.x, inst.y, lambda_grid(lmax, pruned), pruned);
    REQUIRE(cut.entries.size() <= all.entries.size());
    const std::size_t pick_all = select_lambda(all, 300);
    const std::size_t pick_cut = select_lambda(cut, 300);
    REQUIRE(pick_all == pick_cut);
    REQUIRE(all.entries[pick_all].beta == cut.entries[pick_cut].beta);
}
