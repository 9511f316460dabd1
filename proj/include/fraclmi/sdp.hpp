#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"
#include "lmi.hpp"

namespace fraclmi {

enum class BlockKind { Dense, Diagonal };

// What a conic block stands for in the originating feasibility problem.
enum class BlockRole { Negative, Positive, Bound, Plain };

// One block of a conic program:  constant + sum_i y_i coeff_i  >= 0.
// Diagonal blocks keep their data on the diagonal of dim x dim matrices too,
// but only the diagonal is read.
struct ConicBlock {
    BlockKind kind = BlockKind::Dense;
    BlockRole role = BlockRole::Plain;
    std::string label;
    int source = -1;      // index into neg/pos constraint lists
    double scale = 1.0;   // normalization divisor applied to the source constraint
    Matrix constant;
    std::map<Eigen::Index, Matrix> coeffs;

    Eigen::Index dim() const { return constant.rows(); }

    Matrix evaluate(const Vector& y) const {
        Matrix out = constant;
        for (const auto& [k, c] : coeffs) out += y(k) * c;
        return out;
    }
};

// minimize objective . y  subject to every block >= 0.
struct ConicProgram {
    Eigen::Index numVars = 0;
    Vector objective;
    std::vector<ConicBlock> blocks;

    // Set by to_feasibility_program.
    std::optional<Eigen::Index> marginVar;
    double delta = 0.0;
};

struct FeasibilityOptions {
    double delta = 1e-6;
    double boxRadius = 100.0;    // |x_i| <= boxRadius on every decision scalar
    double marginFloor = -1.0;  // t >= marginFloor keeps homogeneous problems bounded
};

namespace detail {

inline ConicBlock normalized_block(const AffineMatrixExpr& e, double sign, BlockRole role, int source,
                                   const std::string& label, Eigen::Index tIndex) {
    if (e.rows() != e.cols()) throw DimensionError("constraint " + label + " is not square");
    ConicBlock b;
    b.role = role;
    b.label = label;
    b.source = source;
    b.scale = std::max(e.max_abs_entry(), std::numeric_limits<double>::min());
    const double f = sign / b.scale;
    b.constant = f * 0.5 * (e.constant() + e.constant().transpose());
    for (const auto& [k, c] : e.terms()) {
        Matrix cs = f * 0.5 * (c + c.transpose());
        if (cs.cwiseAbs().maxCoeff() > 0.0) b.coeffs.emplace(k, std::move(cs));
    }
    b.coeffs.emplace(tIndex, Matrix::Identity(e.rows(), e.rows()));
    return b;
}

}  // namespace detail

// Strict-LMI handling through a margin variable t:
//   negative constraint E:  t I - E/s >= 0
//   positive constraint F:  F/s + t I >= 0
// with s the block's largest absolute coefficient, t >= marginFloor and a box on
// every decision scalar. The source problem is declared feasible iff t* <= -delta.
inline ConicProgram to_feasibility_program(const LmiProblem& p, const FeasibilityOptions& opts = {}) {
    if (!(opts.delta > 0.0)) throw EmptyProblem("strictness margin delta must be > 0");
    if (p.negConstraints.empty() && p.posConstraints.empty()) {
        throw EmptyProblem("LMI problem has no constraints");
    }
    const Eigen::Index nx = p.scalar_count();
    ConicProgram c;
    c.numVars = nx + 1;
    c.marginVar = nx;
    c.delta = opts.delta;
    c.objective = Vector::Zero(nx + 1);
    c.objective(nx) = 1.0;

    for (std::size_t i = 0; i < p.negConstraints.size(); ++i) {
        const auto& k = p.negConstraints[i];
        c.blocks.push_back(detail::normalized_block(k.expr, -1.0, BlockRole::Negative, static_cast<int>(i),
                                                    k.label, nx));
    }
    for (std::size_t i = 0; i < p.posConstraints.size(); ++i) {
        const auto& k = p.posConstraints[i];
        c.blocks.push_back(detail::normalized_block(k.expr, 1.0, BlockRole::Positive, static_cast<int>(i),
                                                    k.label, nx));
    }

    // Bounds: 1 - x_i/R >= 0, 1 + x_i/R >= 0, t - floor >= 0 (diagonal block).
    ConicBlock bound;
    bound.kind = BlockKind::Diagonal;
    bound.role = BlockRole::Bound;
    bound.label = "bounds";
    const Eigen::Index nb = 2 * nx + 1;
    bound.constant = Matrix::Zero(nb, nb);
    for (Eigen::Index i = 0; i < 2 * nx; ++i) bound.constant(i, i) = 1.0;
    bound.constant(2 * nx, 2 * nx) = -opts.marginFloor;
    for (Eigen::Index i = 0; i < nx; ++i) {
        Matrix d = Matrix::Zero(nb, nb);
        d(2 * i, 2 * i) = -1.0 / opts.boxRadius;
        d(2 * i + 1, 2 * i + 1) = 1.0 / opts.boxRadius;
        bound.coeffs.emplace(i, std::move(d));
    }
    Matrix dt = Matrix::Zero(nb, nb);
    dt(2 * nx, 2 * nx) = 1.0;
    bound.coeffs.emplace(nx, std::move(dt));
    c.blocks.push_back(std::move(bound));
    return c;
}

enum class SdpStatus { Feasible, Infeasible, Marginal, NumericalFailure };

inline const char* to_string(SdpStatus s) {
    switch (s) {
        case SdpStatus::Feasible: return "feasible";
        case SdpStatus::Infeasible: return "infeasible";
        case SdpStatus::Marginal: return "marginal";
        case SdpStatus::NumericalFailure: return "numerical-failure";
    }
    return "?";
}

struct SolverOptions {
    int maxIterations = 200;
    double tolerance = 1e-9;        // relative gap and infeasibility targets
    double stepFraction = 0.95;
    double initialScale = 10.0;
    double marginalTolerance = -1;  // defaults to delta / 10
    // Looser targets accepted when the method stalls (degenerate optima such as the
    // homogeneous t* = 0 of an infeasible stability test).
    double reducedTolerance = 1e-6;
    bool verbose = false;
};

struct SolverStats {
    int iterations = 0;
    double wallSeconds = 0.0;
    double primalInfeasibility = 0.0;
    double dualInfeasibility = 0.0;
    double relativeGap = 0.0;
};

struct SdpSolution {
    SdpStatus status = SdpStatus::NumericalFailure;
    Vector y;             // every program variable, margin included
    Vector assignment;    // decision scalars only (margin stripped)
    double margin = std::numeric_limits<double>::quiet_NaN();  // t*
    double worstBlockSlack = 0.0;  // smallest normalized slack found by re-validation
    SolverStats stats;
    std::string diagnostics;
};

// Solver handle. Not safe to share between threads during a solve.
class SdpSolver {
  public:
    virtual ~SdpSolver() = default;
    virtual std::string name() const = 0;
    virtual SdpSolution solve(const ConicProgram& program) = 0;
};

namespace detail {

// Largest step a with X + a dX >= 0 (inf when unbounded).
inline double max_step_dense(const Matrix& x, const Matrix& dx) {
    Eigen::LLT<Matrix> llt(x);
    if (llt.info() != Eigen::Success) return 0.0;
    const Matrix linv = llt.matrixL().solve(Matrix::Identity(x.rows(), x.rows()));
    const Matrix w = linv * dx * linv.transpose();
    const double lmin = min_eigenvalue(w);
    return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

inline double max_step_diag(const Vector& x, const Vector& dx) {
    double a = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (dx(i) < 0.0) a = std::min(a, -x(i) / dx(i));
    }
    return a;
}

}  // namespace detail

// Infeasible-start primal-dual path-following method with the HKM search
// direction and Mehrotra predictor-corrector. The conic program is treated as the
// dual of  min C.X s.t. A_i.X = b_i, X >= 0  with C = constant, A_i = -coeff_i,
// b = -objective.
class InteriorPointSolver final : public SdpSolver {
  public:
    explicit InteriorPointSolver(SolverOptions opts = {}) : opts_(opts) {}

    std::string name() const override { return "ipm"; }
    const SolverOptions& options() const { return opts_; }

    SdpSolution solve(const ConicProgram& program) override;

  private:
    SolverOptions opts_;
};

// Dense eigenvalue re-check of a conic solution: normalized slacks of the
// negative/positive blocks with the margin variable removed.
inline double revalidate_program(const ConicProgram& c, const Vector& y) {
    Vector yz = y;
    if (c.marginVar) yz(*c.marginVar) = 0.0;
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& b : c.blocks) {
        if (b.role != BlockRole::Negative && b.role != BlockRole::Positive) continue;
        const Matrix v = b.evaluate(yz);
        worst = std::min(worst, b.kind == BlockKind::Diagonal ? v.diagonal().minCoeff() : min_eigenvalue(v));
    }
    return worst;
}

inline SdpSolution InteriorPointSolver::solve(const ConicProgram& program) {
    using Clock = std::chrono::steady_clock;
    const auto started = Clock::now();
    const Eigen::Index m = program.numVars;
    const std::size_t nblocks = program.blocks.size();
    if (nblocks == 0) throw EmptyProblem("conic program has no blocks");

    SdpSolution sol;
    std::vector<Matrix> X(nblocks), S(nblocks);
    Eigen::Index totalDim = 0;
    double cNorm = program.objective.norm();
    double g0Norm = 0.0;
    for (std::size_t b = 0; b < nblocks; ++b) {
        const auto& blk = program.blocks[b];
        const Eigen::Index d = blk.dim();
        totalDim += d;
        g0Norm = std::max(g0Norm, blk.constant.norm());
        if (blk.kind == BlockKind::Dense) {
            X[b] = opts_.initialScale * Matrix::Identity(d, d);
            S[b] = opts_.initialScale * Matrix::Identity(d, d);
        } else {
            X[b] = Vector::Constant(d, opts_.initialScale);
            S[b] = Vector::Constant(d, opts_.initialScale);
        }
    }
    Vector y = Vector::Zero(m);

    auto residuals = [&](std::vector<Matrix>& rd, Vector& rp) {
        rp = -program.objective;
        for (std::size_t b = 0; b < nblocks; ++b) {
            const auto& blk = program.blocks[b];
            if (blk.kind == BlockKind::Dense) {
                rd[b] = blk.evaluate(y) - S[b];
                for (const auto& [k, g] : blk.coeffs) rp(k) += (g.cwiseProduct(X[b])).sum();
            } else {
                Vector gy = blk.constant.diagonal();
                for (const auto& [k, g] : blk.coeffs) {
                    gy += y(k) * g.diagonal();
                    rp(k) += g.diagonal().dot(X[b].col(0));
                }
                rd[b] = gy - S[b];
            }
        }
    };

    std::vector<Matrix> Rd(nblocks), Sinv(nblocks), dX(nblocks), dS(nblocks), dXp(nblocks), dSp(nblocks);
    Vector rp;
    bool converged = false;
    const char* stopReason = "iteration limit";
    int it = 0;
    double relGap = 0, pInf = 0, dInf = 0;
    // Best iterate seen so far (by worst of the three residual measures); degenerate
    // problems can drift away from a good point before meeting the full tolerance.
    struct Snapshot {
        Vector y;
        double pInf, dInf, relGap, score;
    };
    std::optional<Snapshot> best;

    for (; it < opts_.maxIterations; ++it) {
        residuals(Rd, rp);
        double gap = 0.0, pobj = 0.0;
        for (std::size_t b = 0; b < nblocks; ++b) {
            const auto& blk = program.blocks[b];
            if (blk.kind == BlockKind::Dense) {
                gap += X[b].cwiseProduct(S[b]).sum();
                pobj += blk.constant.cwiseProduct(X[b]).sum();
            } else {
                gap += X[b].col(0).dot(S[b].col(0));
                pobj += blk.constant.diagonal().dot(X[b].col(0));
            }
        }
        const double dobj = -program.objective.dot(y);
        double rdNorm = 0.0;
        for (const auto& r : Rd) rdNorm = std::max(rdNorm, r.norm());
        pInf = rp.norm() / (1.0 + cNorm);
        dInf = rdNorm / (1.0 + g0Norm);
        relGap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
        const double mu = gap / static_cast<double>(totalDim);
        if (opts_.verbose) {
            std::fprintf(stderr, "ipm %3d  pobj %+.9e dobj %+.9e  pinf %.2e dinf %.2e gap %.2e\n", it, pobj, dobj,
                         pInf, dInf, relGap);
        }
        if (pInf < opts_.tolerance && dInf < opts_.tolerance &&
            (relGap < opts_.tolerance || gap / (1.0 + std::abs(dobj)) < opts_.tolerance)) {
            converged = true;
            break;
        }
        if (!std::isfinite(gap) || !y.allFinite()) {
            stopReason = "non-finite iterate";
            break;
        }
        const double score = std::max({pInf, dInf, relGap});
        if (!best || score < best->score) best = Snapshot{y, pInf, dInf, relGap, score};

        // Schur complement M_ij = tr(G_i X G_j S^-1).
        Matrix M = Matrix::Zero(m, m);
        bool factorOk = true;
        std::vector<std::map<Eigen::Index, Matrix>> XGS(nblocks);
        for (std::size_t b = 0; b < nblocks && factorOk; ++b) {
            const auto& blk = program.blocks[b];
            if (blk.kind == BlockKind::Dense) {
                Eigen::LLT<Matrix> llt(S[b]);
                if (llt.info() != Eigen::Success) {
                    factorOk = false;
                    break;
                }
                Sinv[b] = llt.solve(Matrix::Identity(blk.dim(), blk.dim()));
                for (const auto& [j, gj] : blk.coeffs) XGS[b][j] = X[b] * gj * Sinv[b];
                for (const auto& [i, gi] : blk.coeffs) {
                    for (const auto& [j, pj] : XGS[b]) {
                        if (j < i) continue;
                        const double v = gi.cwiseProduct(pj.transpose()).sum();
                        M(i, j) += v;
                        if (i != j) M(j, i) += v;
                    }
                }
            } else {
                Sinv[b] = S[b].cwiseInverse();
                const Vector w = X[b].col(0).cwiseProduct(Sinv[b].col(0));
                for (const auto& [i, gi] : blk.coeffs) {
                    for (const auto& [j, gj] : blk.coeffs) {
                        if (j < i) continue;
                        const double v = (gi.diagonal().cwiseProduct(gj.diagonal())).dot(w);
                        M(i, j) += v;
                        if (i != j) M(j, i) += v;
                    }
                }
            }
        }
        if (!factorOk) {
            stopReason = "slack lost definiteness";
            break;
        }
        // M is positive definite in exact arithmetic; near degenerate optima it can
        // lose definiteness by rounding, so retry with a growing diagonal shift.
        Eigen::LLT<Matrix> schur(M);
        const double diagScale = std::max(M.diagonal().cwiseAbs().maxCoeff(), 1e-300);
        for (double shift = 1e-14; schur.info() != Eigen::Success && shift <= 1e-8; shift *= 100.0) {
            schur.compute(M + shift * diagScale * Matrix::Identity(m, m));
        }
        if (schur.info() != Eigen::Success) {
            stopReason = "Schur complement factorization failed";
            break;
        }

        // Solve for a direction given the "target" part Z of dX (without the dy terms).
        auto direction = [&](const std::vector<Matrix>& Z, Vector& dy) {
            Vector rhs = rp;
            for (std::size_t b = 0; b < nblocks; ++b) {
                const auto& blk = program.blocks[b];
                for (const auto& [k, g] : blk.coeffs) {
                    rhs(k) += blk.kind == BlockKind::Dense ? g.cwiseProduct(Z[b]).sum()
                                                           : g.diagonal().dot(Z[b].col(0));
                }
            }
            dy = schur.solve(rhs);
        };
        auto finish = [&](const std::vector<Matrix>& Z, const Vector& dy, std::vector<Matrix>& outX,
                          std::vector<Matrix>& outS) {
            for (std::size_t b = 0; b < nblocks; ++b) {
                const auto& blk = program.blocks[b];
                outS[b] = Rd[b];
                if (blk.kind == BlockKind::Dense) {
                    for (const auto& [k, g] : blk.coeffs) outS[b] += dy(k) * g;
                    // dX = Z - X (dS - Rd) S^-1 = Z - sum_k dy_k X G_k S^-1
                    Matrix dx = Z[b];
                    for (const auto& [k, p] : XGS[b]) dx -= dy(k) * p;
                    outX[b] = 0.5 * (dx + dx.transpose());
                } else {
                    Vector ds = Rd[b].col(0);
                    for (const auto& [k, g] : blk.coeffs) ds += dy(k) * g.diagonal();
                    outS[b] = ds;
                    outX[b] = Z[b].col(0) - X[b].col(0).cwiseProduct(ds - Rd[b].col(0)).cwiseProduct(Sinv[b].col(0));
                }
            }
        };
        auto step_lengths = [&](const std::vector<Matrix>& DX, const std::vector<Matrix>& DS) {
            double ap = std::numeric_limits<double>::infinity(), ad = ap;
            for (std::size_t b = 0; b < nblocks; ++b) {
                if (program.blocks[b].kind == BlockKind::Dense) {
                    ap = std::min(ap, detail::max_step_dense(X[b], DX[b]));
                    ad = std::min(ad, detail::max_step_dense(S[b], DS[b]));
                } else {
                    ap = std::min(ap, detail::max_step_diag(X[b].col(0), DX[b].col(0)));
                    ad = std::min(ad, detail::max_step_diag(S[b].col(0), DS[b].col(0)));
                }
            }
            return std::pair{ap, ad};
        };

        // Predictor: Z = -X - X Rd S^-1.
        std::vector<Matrix> Z(nblocks);
        for (std::size_t b = 0; b < nblocks; ++b) {
            if (program.blocks[b].kind == BlockKind::Dense) {
                Z[b] = -X[b] - X[b] * Rd[b] * Sinv[b];
            } else {
                Z[b] = -X[b].col(0) - X[b].col(0).cwiseProduct(Rd[b].col(0)).cwiseProduct(Sinv[b].col(0));
            }
        }
        Vector dy;
        direction(Z, dy);
        finish(Z, dy, dXp, dSp);
        auto [app, adp] = step_lengths(dXp, dSp);
        app = std::min(1.0, app);
        adp = std::min(1.0, adp);
        double gapAff = 0.0;
        for (std::size_t b = 0; b < nblocks; ++b) {
            if (program.blocks[b].kind == BlockKind::Dense) {
                gapAff += (X[b] + app * dXp[b]).cwiseProduct(S[b] + adp * dSp[b]).sum();
            } else {
                gapAff += (X[b].col(0) + app * dXp[b].col(0)).dot(S[b].col(0) + adp * dSp[b].col(0));
            }
        }
        double sigma = std::pow(std::max(0.0, gapAff) / gap, 3.0);
        sigma = std::clamp(sigma, 0.0, 1.0);

        // Corrector: Z = sigma mu S^-1 - X - X Rd S^-1 - dXp dSp S^-1.
        for (std::size_t b = 0; b < nblocks; ++b) {
            if (program.blocks[b].kind == BlockKind::Dense) {
                Z[b] = sigma * mu * Sinv[b] - X[b] - X[b] * Rd[b] * Sinv[b] - dXp[b] * dSp[b] * Sinv[b];
            } else {
                Z[b] = (sigma * mu * Vector::Ones(Sinv[b].rows()) - X[b].col(0).cwiseProduct(S[b].col(0)) -
                        X[b].col(0).cwiseProduct(Rd[b].col(0)) - dXp[b].col(0).cwiseProduct(dSp[b].col(0)))
                           .cwiseProduct(Sinv[b].col(0));
            }
        }
        direction(Z, dy);
        finish(Z, dy, dX, dS);
        auto [ap, ad] = step_lengths(dX, dS);
        ap = std::min(1.0, opts_.stepFraction * ap);
        ad = std::min(1.0, opts_.stepFraction * ad);
        for (std::size_t b = 0; b < nblocks; ++b) {
            X[b] += ap * dX[b];
            S[b] += ad * dS[b];
        }
        y += ad * dy;
    }

    if (!converged && best && best->score < opts_.reducedTolerance &&
        !(pInf < opts_.reducedTolerance && dInf < opts_.reducedTolerance && relGap < opts_.reducedTolerance)) {
        y = best->y;
        pInf = best->pInf;
        dInf = best->dInf;
        relGap = best->relGap;
    }
    sol.y = y;
    sol.stats.iterations = it;
    sol.stats.primalInfeasibility = pInf;
    sol.stats.dualInfeasibility = dInf;
    sol.stats.relativeGap = relGap;
    sol.stats.wallSeconds = std::chrono::duration<double>(Clock::now() - started).count();
    if (program.marginVar) {
        sol.assignment = Vector(y.size() - 1);
        for (Eigen::Index i = 0, k = 0; i < y.size(); ++i) {
            if (i != *program.marginVar) sol.assignment(k++) = y(i);
        }
        sol.margin = y(*program.marginVar);
    } else {
        sol.assignment = y;
        sol.margin = program.objective.dot(y);
    }
    sol.worstBlockSlack = revalidate_program(program, y);

    std::ostringstream diag;
    diag << "iterations " << it << ", pinf " << pInf << ", dinf " << dInf << ", gap " << relGap;
    if (!converged && pInf < opts_.reducedTolerance && dInf < opts_.reducedTolerance &&
        relGap < opts_.reducedTolerance) {
        converged = true;
        diag << " (reduced accuracy)";
    }
    if (!converged) {
        // Accept an unconverged run only when it already certifies strict feasibility.
        if (program.marginVar && sol.y.allFinite() && sol.worstBlockSlack >= program.delta) {
            sol.status = SdpStatus::Feasible;
            diag << " (stopped early; strict feasibility certified)";
        } else {
            sol.status = SdpStatus::NumericalFailure;
            diag << " (did not converge: " << stopReason << ")";
        }
        sol.diagnostics = diag.str();
        return sol;
    }
    sol.diagnostics = diag.str();
    if (!program.marginVar) {
        sol.status = SdpStatus::Feasible;
        return sol;
    }
    const double tol = opts_.marginalTolerance > 0 ? opts_.marginalTolerance : program.delta / 10.0;
    if (std::abs(sol.margin + program.delta) <= tol) {
        sol.status = SdpStatus::Marginal;
    } else if (sol.margin < -program.delta) {
        // Mandatory independent check before reporting Feasible.
        sol.status = sol.worstBlockSlack >= program.delta / 2.0 ? SdpStatus::Feasible : SdpStatus::Marginal;
    } else {
        sol.status = SdpStatus::Infeasible;
    }
    return sol;
}

// Backend by name ("ipm" is the only in-tree solver).
inline std::unique_ptr<SdpSolver> make_solver(const std::string& name, SolverOptions opts = {}) {
    if (name.empty() || name == "ipm") return std::make_unique<InteriorPointSolver>(opts);
    throw SolverFailure("unknown SDP backend '" + name + "'");
}

// Re-evaluate the source LMI problem at x: each constraint's normalized eigenvalue
// slack (for negative constraints, -lambda_max(E)/s; for positive, lambda_min(F)/s).
inline double revalidate(const LmiProblem& p, const Vector& x) {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& c : p.negConstraints) {
        const double s = std::max(c.expr.max_abs_entry(), std::numeric_limits<double>::min());
        worst = std::min(worst, -max_eigenvalue(c.expr.evaluate(x)) / s);
    }
    for (const auto& c : p.posConstraints) {
        const double s = std::max(c.expr.max_abs_entry(), std::numeric_limits<double>::min());
        worst = std::min(worst, min_eigenvalue(c.expr.evaluate(x)) / s);
    }
    return worst;
}

struct LmiSolveResult {
    SdpSolution solution;
    double sourceSlack = 0.0;  // revalidate() on the source problem
    bool feasible() const { return solution.status == SdpStatus::Feasible; }
};

// Convert, solve and re-validate against the source problem.
inline LmiSolveResult solve_lmi(const LmiProblem& p, SdpSolver& solver, const FeasibilityOptions& fopts = {}) {
    const ConicProgram program = to_feasibility_program(p, fopts);
    LmiSolveResult r{solver.solve(program), 0.0};
    r.sourceSlack = r.solution.assignment.allFinite() ? revalidate(p, r.solution.assignment)
                                                      : -std::numeric_limits<double>::infinity();
    if (r.solution.status == SdpStatus::Feasible && r.sourceSlack < fopts.delta / 2.0) {
        r.solution.status = SdpStatus::Marginal;
        r.solution.diagnostics += "; source re-validation slack " + std::to_string(r.sourceSlack);
    }
    return r;
}

// ---------------------------------------------------------------------------
// SDPA sparse format (.dat-s)
//
// SDPA solves  min c.x  s.t.  F(x) = sum_i F_i x_i - F_0 >= 0.
// A conic block  constant + sum y_i coeff_i  maps to F_0 = -constant, F_i = coeff_i.
// Diagonal blocks are written with a negative size.
// ---------------------------------------------------------------------------

inline void export_sdpa(const ConicProgram& c, std::ostream& os, const std::string& comment = "") {
    os << "* fraclmi conic program" << (comment.empty() ? "" : ": " + comment) << "\n";
    os << c.numVars << " = mDIM\n";
    os << c.blocks.size() << " = nBLOCK\n";
    for (std::size_t b = 0; b < c.blocks.size(); ++b) {
        const auto& blk = c.blocks[b];
        os << (b ? " " : "") << (blk.kind == BlockKind::Diagonal ? -blk.dim() : blk.dim());
    }
    os << " = bLOCKsTRUCT\n";
    auto num = [](double v) {
        std::ostringstream s;
        s << std::setprecision(17) << v;
        return s.str();
    };
    for (Eigen::Index i = 0; i < c.numVars; ++i) os << (i ? " " : "") << num(c.objective(i));
    os << "\n";
    auto entries = [&](std::size_t b, Eigen::Index k, const Matrix& m, double sign) {
        const auto& blk = c.blocks[b];
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = i; j < m.cols(); ++j) {
                if (blk.kind == BlockKind::Diagonal && i != j) continue;
                const double v = sign * m(i, j);
                if (v == 0.0) continue;
                os << k << " " << (b + 1) << " " << (i + 1) << " " << (j + 1) << " " << num(v) << "\n";
            }
        }
    };
    for (std::size_t b = 0; b < c.blocks.size(); ++b) entries(b, 0, c.blocks[b].constant, -1.0);
    for (Eigen::Index k = 0; k < c.numVars; ++k) {
        for (std::size_t b = 0; b < c.blocks.size(); ++b) {
            auto it = c.blocks[b].coeffs.find(k);
            if (it != c.blocks[b].coeffs.end()) entries(b, k + 1, it->second, 1.0);
        }
    }
}

// Reader for the same format. Accepts '*' and '"' comments and the usual
// "{}(),=" punctuation around numbers.
inline ConicProgram read_sdpa(std::istream& is) {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(is, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        if (line[first] == '*' || line[first] == '"') continue;
        lines.push_back(line);
    }
    auto clean = [](std::string s) {
        for (auto& ch : s) {
            if (ch == '{' || ch == '}' || ch == '(' || ch == ')' || ch == ',') ch = ' ';
        }
        return s;
    };
    if (lines.size() < 4) throw ParseError("SDPA file is truncated");
    ConicProgram c;
    std::size_t nb = 0;
    {
        std::istringstream s(clean(lines[0]));
        if (!(s >> c.numVars)) throw ParseError("bad mDIM line");
        std::istringstream t(clean(lines[1]));
        if (!(t >> nb)) throw ParseError("bad nBLOCK line");
    }
    std::istringstream sizes(clean(lines[2]));
    for (std::size_t b = 0; b < nb; ++b) {
        long long sz = 0;
        if (!(sizes >> sz)) throw ParseError("bad bLOCKsTRUCT line");
        ConicBlock blk;
        blk.kind = sz < 0 ? BlockKind::Diagonal : BlockKind::Dense;
        const Eigen::Index d = static_cast<Eigen::Index>(sz < 0 ? -sz : sz);
        blk.constant = Matrix::Zero(d, d);
        c.blocks.push_back(std::move(blk));
    }
    c.objective = Vector::Zero(c.numVars);
    std::istringstream obj(clean(lines[3]));
    for (Eigen::Index i = 0; i < c.numVars; ++i) {
        if (!(obj >> c.objective(i))) throw ParseError("objective row has too few entries");
    }
    for (std::size_t li = 4; li < lines.size(); ++li) {
        std::istringstream s(clean(lines[li]));
        long long k, b, i, j;
        double v;
        if (!(s >> k >> b >> i >> j >> v)) throw ParseError("bad entry line: " + lines[li]);
        if (k < 0 || k > c.numVars || b < 1 || b > static_cast<long long>(nb)) {
            throw ParseError("entry index out of range: " + lines[li]);
        }
        auto& blk = c.blocks[static_cast<std::size_t>(b - 1)];
        const Eigen::Index d = blk.dim();
        if (i < 1 || j < 1 || i > d || j > d) throw ParseError("entry position out of range: " + lines[li]);
        Matrix* target = &blk.constant;
        double sign = -1.0;
        if (k > 0) {
            auto it = blk.coeffs.find(k - 1);
            if (it == blk.coeffs.end()) it = blk.coeffs.emplace(k - 1, Matrix::Zero(d, d)).first;
            target = &it->second;
            sign = 1.0;
        }
        (*target)(i - 1, j - 1) = sign * v;
        (*target)(j - 1, i - 1) = sign * v;
    }
    return c;
}

}  // namespace fraclmi
