#pragma once

#include <cmath>
#include <complex>
#include <ostream>
#include <vector>

#include "core.hpp"
#include "lmi.hpp"
#include "sdp.hpp"

namespace fraclmi {

struct SpectrumReport {
    std::vector<std::complex<double>> eigenvalues;
    std::vector<double> args;  // |arg(lambda)|, 0 for lambda == 0
    double alpha = 0.0;
    double margin = 0.0;       // min |arg| - alpha*pi/2
    bool stable = false;
};

inline std::vector<std::complex<double>> eigenvalues(const Matrix& a) {
    if (a.size() == 0) return {};
    Eigen::EigenSolver<Matrix> es(a, false);
    if (es.info() != Eigen::Success) throw InvalidMatrix("eigenvalue iteration did not converge");
    const ComplexVector ev = es.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

// Argument criterion: D^a x = A x is asymptotically stable iff every eigenvalue
// has |arg| > a*pi/2. A zero eigenvalue counts as arg 0 and is unstable.
inline SpectrumReport argument_margin(const Matrix& a, double alpha) {
    require_square(a, "A");
    if (!a.allFinite()) throw InvalidMatrix("matrix has non-finite entries");
    if (!(alpha > 0.0 && alpha < 2.0)) throw InvalidMatrix("fractional order must lie in (0, 2)");
    SpectrumReport r;
    r.alpha = alpha;
    r.eigenvalues = eigenvalues(a);
    double minArg = kPi;
    for (const auto& l : r.eigenvalues) {
        const double g = (l == std::complex<double>(0.0, 0.0)) ? 0.0 : std::abs(std::arg(l));
        r.args.push_back(g);
        minArg = std::min(minArg, g);
    }
    r.margin = minArg - alpha * kPi / 2.0;
    r.stable = r.margin > 0.0;
    return r;
}

// CSV rows "Re,Im,absArg" for eigenvalue scatter plots.
inline void write_spectrum_csv(std::ostream& os, const SpectrumReport& r, bool header = true) {
    if (header) os << "Re,Im,absArg\n";
    os.precision(17);
    for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
        os << r.eigenvalues[i].real() << "," << r.eigenvalues[i].imag() << "," << r.args[i] << "\n";
    }
}

struct LemmaResult {
    bool feasible = false;
    SdpStatus status = SdpStatus::NumericalFailure;
    std::optional<ComplexMatrix> certificate;  // Hermitian for the 0<a<1 test, real otherwise
    double margin = 0.0;                       // solver t*
};

// LMI of the 0 < alpha < 1 analysis test on a fixed matrix.
inline LmiProblem lemma1_problem(const Matrix& a, double alpha) {
    require_square(a, "A");
    if (!(alpha > 0.0 && alpha < 1.0)) throw WrongBranch("Hermitian stability test needs 0 < alpha < 1");
    LmiProblem p;
    p.theta = theorem1_angle(alpha);
    p.plantOrder = a.rows();
    HermitianVar x = add_hermitian(p, "X", a.rows());
    const AffineMatrixExpr q = real_combination(x, p.theta);
    p.negConstraints.push_back({"sym(A (rX + conj(r X)))", sym(a * q), {{"n", a.rows()}}});
    p.posConstraints.push_back({"X > 0", hermitian_embedding(x), {{"embedding", 2 * a.rows()}}});
    return p;
}

// LMI of the 1 <= alpha < 2 analysis test on a fixed matrix.
inline LmiProblem lemma2_problem(const Matrix& a, double alpha) {
    require_square(a, "A");
    if (!(alpha >= 1.0 && alpha < 2.0)) throw WrongBranch("Kronecker stability test needs 1 <= alpha < 2");
    LmiProblem p;
    p.theta = theorem2_angle(alpha);
    p.plantOrder = a.rows();
    const DecisionVariable x = p.add_variable("X", VariableKind::Symmetric, a.rows());
    const AffineMatrixExpr ax = a * AffineMatrixExpr::of(x);
    p.negConstraints.push_back({"Sym(Theta x (A X))", sym(kron(sector_rotation(p.theta), ax)), {{"2n", 2 * a.rows()}}});
    p.posConstraints.push_back({"X > 0", AffineMatrixExpr::of(x), {{"n", a.rows()}}});
    return p;
}

namespace detail {

inline LemmaResult run_lemma(const LmiProblem& p, SdpSolver& solver, const FeasibilityOptions& fopts,
                             bool hermitian) {
    const LmiSolveResult r = solve_lmi(p, solver, fopts);
    if (r.solution.status == SdpStatus::NumericalFailure) {
        throw SolverFailure("stability LMI: " + r.solution.diagnostics);
    }
    LemmaResult out;
    out.status = r.solution.status;
    out.feasible = r.feasible();
    out.margin = r.solution.margin;
    if (out.feasible) {
        if (hermitian) {
            HermitianVar x{p.variable("X.re"), p.variable("X.im")};
            out.certificate = x.value(r.solution.assignment);
        } else {
            out.certificate = p.value("X", r.solution.assignment).cast<std::complex<double>>();
        }
    }
    return out;
}

}  // namespace detail

inline LemmaResult lemma1_check(const Matrix& a, double alpha, SdpSolver& solver,
                                const FeasibilityOptions& fopts = {}) {
    if (!a.allFinite()) throw InvalidMatrix("matrix has non-finite entries");
    return detail::run_lemma(lemma1_problem(a, alpha), solver, fopts, true);
}

inline LemmaResult lemma2_check(const Matrix& a, double alpha, SdpSolver& solver,
                                const FeasibilityOptions& fopts = {}) {
    if (!a.allFinite()) throw InvalidMatrix("matrix has non-finite entries");
    return detail::run_lemma(lemma2_problem(a, alpha), solver, fopts, false);
}

// Branch-dispatching LMI stability test.
inline LemmaResult lmi_stability_check(const Matrix& a, double alpha, SdpSolver& solver,
                                       const FeasibilityOptions& fopts = {}) {
    return alpha < 1.0 ? lemma1_check(a, alpha, solver, fopts) : lemma2_check(a, alpha, solver, fopts);
}

// Direct evaluation of the analysis inequalities for a given certificate.
// Returns lambda_max of the left-hand side (negative when the certificate is valid).
inline double lemma1_residual(const Matrix& a, const ComplexMatrix& x, double alpha) {
    const double theta = theorem1_angle(alpha);
    const std::complex<double> r = std::polar(1.0, theta);
    const Matrix q = (r * x + std::conj(r) * x.conjugate()).real();
    return max_eigenvalue(q.transpose() * a.transpose() + a * q);
}

inline double lemma2_residual(const Matrix& a, const Matrix& x, double alpha) {
    const Matrix m = kron(sector_rotation(theorem2_angle(alpha)), a * x);
    return max_eigenvalue(m + m.transpose());
}

}  // namespace fraclmi
