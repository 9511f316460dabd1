#pragma once

#include <algorithm>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fraclmi {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr const char* kVersion = "0.3.0";

// Base of every error raised by the toolkit. Each subclass names one failure mode
// so callers (and the CLI exit-code mapping) can tell them apart.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonsingularityViolation : Error { using Error::Error; };
struct BoundViolation : Error { using Error::Error; };
struct TooManyVertices : Error { using Error::Error; };
struct InvalidMatrix : Error { using Error::Error; };
struct DimensionError : Error { using Error::Error; };
struct WrongBranch : Error { using Error::Error; };
struct EmptyProblem : Error { using Error::Error; };
struct SolverFailure : Error { using Error::Error; };
struct RecoveryFailure : Error { using Error::Error; };
struct RankDeficientC : Error { using Error::Error; };
struct StepFailure : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline void require_square(const Matrix& m, const char* what) {
    if (m.rows() != m.cols()) {
        throw DimensionError(std::string(what) + " must be square, got " + std::to_string(m.rows()) +
                             "x" + std::to_string(m.cols()));
    }
}

inline Matrix sym(const Matrix& m) { return m + m.transpose(); }

// Kronecker product of two dense matrices.
inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

inline Eigen::VectorXd symmetric_eigenvalues(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

inline double max_eigenvalue(const Matrix& m) {
    if (m.size() == 0) return -std::numeric_limits<double>::infinity();
    return symmetric_eigenvalues(m).maxCoeff();
}

inline double min_eigenvalue(const Matrix& m) {
    if (m.size() == 0) return std::numeric_limits<double>::infinity();
    return symmetric_eigenvalues(m).minCoeff();
}

inline Eigen::Index numerical_rank(const Matrix& m, double tol = 1e-10) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& s = svd.singularValues();
    const double cutoff = tol * std::max<double>(1.0, s(0));
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) r += (s(i) > cutoff) ? 1 : 0;
    return r;
}

// Right pseudo-inverse C^T (C C^T)^-1 of a full-row-rank matrix.
inline Matrix right_pseudo_inverse(const Matrix& c) {
    if (numerical_rank(c) != c.rows()) {
        throw RankDeficientC("output matrix C (" + std::to_string(c.rows()) + "x" +
                             std::to_string(c.cols()) + ") does not have full row rank");
    }
    const Matrix cct = c * c.transpose();
    return c.transpose() * cct.ldlt().solve(Matrix::Identity(c.rows(), c.rows()));
}

}  // namespace fraclmi
