#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "relaybf/signal_model.hpp"

namespace relaybf {

/// One second-order-cone block: A x + b must satisfy
/// (A x + b)(0) >= || (A x + b)(1..k-1) ||_2. A block of height 1 is a plain
/// linear inequality.
struct ConeBlock {
    Eigen::MatrixXd A;  // k x n
    Eigen::VectorXd b;  // k
    std::string name;
};

/// maximize objective . x subject to every cone block.
struct ConeProblem {
    int num_vars = 0;
    Eigen::VectorXd objective;
    std::vector<ConeBlock> cones;

    void validate() const;  // throws std::invalid_argument
};

enum class SolveStatus { Optimal, Infeasible, MaxIterations, NumericalFailure };

const char* to_string(SolveStatus status);

/// When status == Optimal, every cone block evaluated at x satisfies its
/// inequality with margin >= -tol_feas relative to the block's data scale.
struct ConeSolution {
    SolveStatus status = SolveStatus::NumericalFailure;
    Eigen::VectorXd x;        // populated when status == Optimal
    double slack = 0.0;       // objective value; the max-slack t for feasibility problems
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double duality_gap = 0.0;
    std::string message;
};

struct SolveOptions {
    double tol_feas = 1e-8;
    double tol_gap = 1e-8;
    int max_iter = 200;
};

/// Primal-dual interior-point solve of the self-dual embedding. Deterministic:
/// identical problems produce identical solutions.
ConeSolution solve(const ConeProblem& problem, const SolveOptions& options = {});

/// Complex-to-real embedding. w in C^R maps to x = [Re w; Im w] in R^{2R};
/// a Hermitian form Q maps to a symmetric form with x^T lift(Q) x == w^H Q w.
Eigen::VectorXd lift_vector(const Eigen::VectorXcd& w);
Eigen::VectorXcd unlift_vector(const Eigen::VectorXd& x);
Eigen::MatrixXd lift_hermitian(const Eigen::MatrixXcd& q);  // throws if not Hermitian
/// Rows (2 x 2R) evaluating Re(f^T w) and Im(f^T w) in lifted coordinates.
Eigen::MatrixXd lift_linear(const Eigen::VectorXcd& f);

/// Factor of a symmetric PSD matrix: returns F with F^T F = s, adding at most
/// 1e-12 relative diagonal jitter. Throws std::runtime_error if s is indefinite.
Eigen::MatrixXd psd_sqrt_factor(const Eigen::MatrixXd& s);

/// Cone program testing feasibility of the worst-case-SINR level rho^2:
/// variables [Re w; Im w; t], objective t (max slack). Feasible with t* >= 0
/// exactly when some w attains SINR_j >= rho^2 for all j under the PU-RX
/// interference cap and the relay power budget. The per-receiver constraint
/// uses Re(f_j^T w), exact for a single receiver once the phase is anchored,
/// a convex restriction otherwise.
ConeProblem build_feasibility(const ReceiverForms& forms, double rho,
                              double interference_cap, double power_budget,
                              int anchor_rx = 0);

/// Debug dump of a cone problem for offline cross-checks.
void dump_cone_problem(const ConeProblem& problem, const std::string& path);

}  // namespace relaybf
