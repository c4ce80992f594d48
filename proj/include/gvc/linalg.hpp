#pragma once

#include <cstddef>
#include <memory>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace gvc {

// Size thresholds selecting the solver backend for systems of the form (I - M) x = b.
struct SolverOptions {
    std::size_t sparse_above = 2000;     // NG above this: sparse LU instead of dense LU
    std::size_t iterative_above = 5000;  // NG above this: fixed-point (Neumann) iteration
    double residual_tolerance = 1e-9;    // relative, infinity norm
    int max_iterations = 20000;
};

// Factorization of (I - M) reused across right-hand sides. M is expected to be
// nonnegative with spectral radius below one, which is what makes the
// fixed-point fallback convergent.
class ShiftedSystem {
public:
    explicit ShiftedSystem(Eigen::MatrixXd m, SolverOptions options = {});
    ~ShiftedSystem();
    ShiftedSystem(ShiftedSystem&&) noexcept;
    ShiftedSystem& operator=(ShiftedSystem&&) noexcept;

    Eigen::Index size() const { return m_.rows(); }
    const Eigen::MatrixXd& operator_matrix() const { return m_; }

    // Solves (I - M) X = rhs; throws NumericalError when the residual check fails.
    Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

    // max |(I - M) X - rhs| / max |rhs|
    double relative_residual(const Eigen::MatrixXd& x, const Eigen::MatrixXd& rhs) const;

private:
    Eigen::MatrixXd iterate(const Eigen::MatrixXd& rhs) const;

    struct Factor;
    Eigen::MatrixXd m_;
    SolverOptions options_;
    std::unique_ptr<Factor> factor_;
};

}  // namespace gvc
