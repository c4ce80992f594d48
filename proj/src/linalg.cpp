#include "gvc/linalg.hpp"

#include <cmath>
#include <sstream>

#include "gvc/error.hpp"

namespace gvc {

struct ShiftedSystem::Factor {
    enum class Kind { kDense, kSparse, kIterative } kind = Kind::kDense;
    Eigen::PartialPivLU<Eigen::MatrixXd> dense;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> sparse;
};

ShiftedSystem::ShiftedSystem(Eigen::MatrixXd m, SolverOptions options)
    : m_(std::move(m)), options_(options), factor_(std::make_unique<Factor>()) {
    if (m_.rows() != m_.cols()) throw NumericalError("operator matrix is not square");
    const auto n = static_cast<std::size_t>(m_.rows());
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m_.rows(), m_.cols()) - m_;
    if (n > options_.iterative_above) {
        factor_->kind = Factor::Kind::kIterative;
    } else if (n > options_.sparse_above) {
        factor_->kind = Factor::Kind::kSparse;
        Eigen::SparseMatrix<double> s = a.sparseView();
        s.makeCompressed();
        factor_->sparse.compute(s);
        if (factor_->sparse.info() != Eigen::Success) {
            throw NumericalError("sparse LU factorization of (I - M) failed: " +
                                 factor_->sparse.lastErrorMessage());
        }
    } else {
        factor_->kind = Factor::Kind::kDense;
        factor_->dense.compute(a);
    }
}

ShiftedSystem::~ShiftedSystem() = default;
ShiftedSystem::ShiftedSystem(ShiftedSystem&&) noexcept = default;
ShiftedSystem& ShiftedSystem::operator=(ShiftedSystem&&) noexcept = default;

double ShiftedSystem::relative_residual(const Eigen::MatrixXd& x, const Eigen::MatrixXd& rhs) const {
    const double scale = rhs.size() ? rhs.cwiseAbs().maxCoeff() : 0.0;
    if (!x.allFinite()) return std::numeric_limits<double>::infinity();
    const Eigen::MatrixXd r = x - m_ * x - rhs;
    const double err = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
    return scale > 0.0 ? err / scale : err;
}

Eigen::MatrixXd ShiftedSystem::iterate(const Eigen::MatrixXd& rhs) const {
    // x_{k+1} = rhs + M x_k, i.e. partial sums of the Neumann series.
    Eigen::MatrixXd x = rhs;
    for (int it = 0; it < options_.max_iterations; ++it) {
        x = rhs + m_ * x;
        if (relative_residual(x, rhs) < 1e-3 * options_.residual_tolerance) return x;
    }
    std::ostringstream msg;
    msg << "fixed-point iteration did not converge after " << options_.max_iterations
        << " iterations, relative residual " << relative_residual(x, rhs);
    throw NumericalError(msg.str());
}

Eigen::MatrixXd ShiftedSystem::solve(const Eigen::MatrixXd& rhs) const {
    if (rhs.rows() != m_.rows()) throw NumericalError("right-hand side dimension mismatch");
    Eigen::MatrixXd x;
    switch (factor_->kind) {
        case Factor::Kind::kDense: x = factor_->dense.solve(rhs); break;
        case Factor::Kind::kSparse: x = factor_->sparse.solve(rhs); break;
        case Factor::Kind::kIterative: x = iterate(rhs); break;
    }
    const double res = relative_residual(x, rhs);
    if (!(res <= options_.residual_tolerance)) {
        std::ostringstream msg;
        msg << "linear solve of (I - M) x = b failed: relative residual " << res << " exceeds "
            << options_.residual_tolerance << " (singular or non-productive system)";
        throw NumericalError(msg.str());
    }
    return x;
}

Eigen::VectorXd ShiftedSystem::solve(const Eigen::VectorXd& rhs) const {
    Eigen::MatrixXd x = solve(Eigen::MatrixXd(rhs));
    return x.col(0);
}

}  // namespace gvc
