#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "lmi.hpp"
#include "model.hpp"
#include "sdp.hpp"
#include "stability.hpp"

namespace fraclmi {

// D^a xc = Ac xc + Bc y,  u = Cc xc + Dc y.
struct Controller {
    Matrix Ac;
    Matrix Bc;
    Matrix Cc;
    Matrix Dc;
    Eigen::Index order = 0;
    double alpha = 0.0;

    static Controller zero(Eigen::Index nc, Eigen::Index l, Eigen::Index m, double alpha) {
        return {Matrix::Zero(nc, nc), Matrix::Zero(nc, m), Matrix::Zero(l, nc), Matrix::Zero(l, m), nc, alpha};
    }

    void validate(const FoltiSystem& sys) const {
        const Eigen::Index l = sys.inputs(), m = sys.outputs();
        if (Ac.rows() != order || Ac.cols() != order || Bc.rows() != order || Bc.cols() != m ||
            Cc.rows() != l || Cc.cols() != order || Dc.rows() != l || Dc.cols() != m) {
            throw DimensionError("controller matrices do not match the plant (l=" + std::to_string(l) +
                                 ", m=" + std::to_string(m) + ", n_c=" + std::to_string(order) + ")");
        }
        if (!Ac.allFinite() || !Bc.allFinite() || !Cc.allFinite() || !Dc.allFinite()) {
            throw InvalidMatrix("controller has non-finite entries");
        }
    }
};

struct ClosedLoop {
    Matrix A;
    double alpha = 0.0;
};

// [[A + B Dc C, B Cc], [Bc C, Ac]]
inline ClosedLoop close_loop(const Matrix& a, const Matrix& b, const Matrix& c, const Controller& k) {
    const Eigen::Index n = a.rows(), nc = k.order;
    if (a.cols() != n || b.rows() != n || c.cols() != n || k.Dc.rows() != b.cols() || k.Dc.cols() != c.rows() ||
        k.Cc.rows() != b.cols() || k.Cc.cols() != nc || k.Bc.rows() != nc || k.Bc.cols() != c.rows() ||
        k.Ac.rows() != nc || k.Ac.cols() != nc) {
        throw DimensionError("closed loop: plant and controller dimensions are inconsistent");
    }
    ClosedLoop cl;
    cl.alpha = k.alpha;
    cl.A.resize(n + nc, n + nc);
    cl.A.topLeftCorner(n, n) = a + b * k.Dc * c;
    cl.A.topRightCorner(n, nc) = b * k.Cc;
    cl.A.bottomLeftCorner(nc, n) = k.Bc * c;
    cl.A.bottomRightCorner(nc, nc) = k.Ac;
    return cl;
}

struct VerificationStrategy {
    bool vertices = true;
    std::size_t maxVertexParams = 10;  // vertices are skipped above 2^10 corners
    std::size_t randomCount = 200;
    std::uint64_t seed = 42;
    bool includeNominal = false;
};

struct RobustnessReport {
    std::size_t samples = 0;
    double worstMargin = std::numeric_limits<double>::infinity();
    std::vector<UncertaintyRealization> failures;
    std::vector<double> margins;  // per sample, in evaluation order
    bool robust() const { return worstMargin > 0.0; }
};

inline std::vector<UncertaintyRealization> verification_samples(const UncertaintyModel& unc,
                                                                const VerificationStrategy& s) {
    std::vector<UncertaintyRealization> out;
    if (unc.certain()) return {nominal_realization(unc)};
    if (s.includeNominal) out.push_back(nominal_realization(unc));
    if (s.vertices) {
        if (unc.p() + unc.q() > kMaxVertexParams) {
            throw TooManyVertices("too many uncertain parameters for vertex enumeration");
        }
        if (unc.p() + unc.q() <= s.maxVertexParams) {
            auto v = sample_vertices(unc);
            out.insert(out.end(), v.begin(), v.end());
        }
    }
    auto r = sample_random(unc, s.seed, s.randomCount);
    out.insert(out.end(), r.begin(), r.end());
    return out;
}

// Sampled robust-stability check of the closed loop. Vertex enumeration is a
// falsification test, not a proof: the closed-loop spectrum is not convex in the
// uncertain parameters.
inline RobustnessReport verify_robust(const FoltiSystem& sys, const UncertaintyModel& unc, const Controller& k,
                                      const VerificationStrategy& strategy = {}) {
    k.validate(sys);
    RobustnessReport rep;
    for (const auto& r : verification_samples(unc, strategy)) {
        const RealizedPlant plant = realize(sys, unc, r);
        const ClosedLoop cl = close_loop(plant.A, plant.B, sys.C, k);
        const double margin = argument_margin(cl.A, sys.alpha).margin;
        rep.margins.push_back(margin);
        rep.worstMargin = std::min(rep.worstMargin, margin);
        if (margin <= 0.0) rep.failures.push_back(r);
        ++rep.samples;
    }
    return rep;
}

struct RecoveryResult {
    Controller controller;
    double residualB = 0.0;  // ||Bc C Q - T2||_F
    double residualD = 0.0;  // ||Dc C Q - T4||_F
    double scaleB = 0.0;     // ||T2||_F
    double scaleD = 0.0;     // ||T4||_F
    double conditionQ = 0.0;
    bool exact(double rel = 1e-6) const {
        return residualB <= rel * std::max(1.0, scaleB) && residualD <= rel * std::max(1.0, scaleD);
    }
};

inline constexpr double kConditionWarning = 1e10;

// Invert the linearizing change of variables
//   T1 = Ac R, T2 = Bc C Q, T3 = Cc R, T4 = Dc C Q
// with Q, R the (combined) Lyapunov blocks. Bc and Dc use the right pseudo-inverse of C.
inline RecoveryResult recover_controller(const Matrix& t1, const Matrix& t2, const Matrix& t3, const Matrix& t4,
                                         const Matrix& q, const Matrix& r, const Matrix& c, double alpha) {
    const Eigen::Index nc = r.rows();
    const Matrix cdag = right_pseudo_inverse(c);
    Eigen::FullPivLU<Matrix> qlu(q);
    if (q.rows() == 0 || !qlu.isInvertible()) throw RecoveryFailure("plant Lyapunov block is singular");
    RecoveryResult out;
    out.conditionQ = 1.0 / reciprocal_condition(q);
    const Matrix qinv = qlu.inverse();
    Controller& k = out.controller;
    k.order = nc;
    k.alpha = alpha;
    k.Dc = t4 * qinv * cdag;
    if (nc > 0) {
        Eigen::FullPivLU<Matrix> rlu(r);
        if (!rlu.isInvertible()) throw RecoveryFailure("controller Lyapunov block is singular");
        const Matrix rinv = rlu.inverse();
        k.Ac = t1 * rinv;
        k.Cc = t3 * rinv;
        k.Bc = t2 * qinv * cdag;
        out.residualB = (k.Bc * c * q - t2).norm();
        out.scaleB = t2.norm();
    } else {
        k.Ac = Matrix::Zero(0, 0);
        k.Cc = Matrix::Zero(t4.rows(), 0);
        k.Bc = Matrix::Zero(0, c.rows());
    }
    out.residualD = (k.Dc * c * q - t4).norm();
    out.scaleD = t4.norm();
    return out;
}

struct SynthesisOptions {
    FeasibilityOptions feasibility;
    SolverOptions solver;
    std::string backend = "ipm";
    VerificationStrategy verification;
    bool forceCertain = false;  // use the nominal-only LMI even with uncertainty present
};

struct SynthesisReport {
    bool feasible = false;
    SdpStatus status = SdpStatus::NumericalFailure;
    LmiBranch branch = LmiBranch::Analysis;
    double alpha = 0.0;
    Eigen::Index order = 0;
    double solverMargin = 0.0;
    double sourceSlack = 0.0;
    SolverStats solverStats;
    std::optional<Controller> controller;
    double residualB = 0.0;
    double residualD = 0.0;
    bool recoveryInexact = false;
    double conditionQ = 0.0;
    bool conditionWarning = false;
    RobustnessReport verification;
    double nominalMargin = 0.0;
    std::vector<std::string> notes;

    bool verified() const { return feasible && verification.robust(); }
};

// Lyapunov blocks (Q, R) and T1..T4 from a solved synthesis LMI.
struct SynthesisVariables {
    Matrix q, r, t1, t2, t3, t4;
};

inline SynthesisVariables extract_variables(const LmiProblem& p, const Vector& x) {
    SynthesisVariables v;
    const Eigen::Index nc = p.controllerOrder;
    const bool hermitian = p.branch == LmiBranch::Theorem1 || p.branch == LmiBranch::Certain1;
    auto lyap = [&](const std::string& name) -> Matrix {
        if (hermitian) {
            const Matrix re = p.value(name + ".re", x);
            const Matrix im = p.value(name + ".im", x);
            return 2.0 * (std::cos(p.theta) * re - std::sin(p.theta) * im);
        }
        return p.value(name, x);
    };
    v.q = lyap("PS");
    v.t4 = p.value("T4", x);
    if (nc > 0) {
        v.r = lyap("PC");
        v.t1 = p.value("T1", x);
        v.t2 = p.value("T2", x);
        v.t3 = p.value("T3", x);
    } else {
        v.r = Matrix::Zero(0, 0);
        v.t1 = Matrix::Zero(0, 0);
        v.t2 = Matrix::Zero(0, p.plantOrder);
        v.t3 = Matrix::Zero(v.t4.rows(), 0);
    }
    return v;
}

inline LmiProblem assemble_synthesis(const FoltiSystem& sys, const UncertaintyModel& unc, Eigen::Index nc,
                                     bool forceCertain = false) {
    if (unc.certain() || forceCertain) return assemble_certain(sys, nc);
    const Envelope env = uncertainty_bounds(unc, sys.states());
    return sys.alpha < 1.0 ? assemble_theorem1(sys, env, nc) : assemble_theorem2(sys, env, nc);
}

// Assemble, solve, recover and verify a fixed-order output feedback controller.
inline SynthesisReport synthesize(const FoltiSystem& sys, const UncertaintyModel& unc, Eigen::Index nc,
                                  const SynthesisOptions& opts = {}) {
    sys.validate();
    unc.validate(sys.states());
    if (nc < 0) throw DimensionError("controller order must be >= 0");
    if (numerical_rank(sys.C) != sys.outputs()) {
        throw RankDeficientC("output matrix C does not have full row rank; the controller cannot be recovered");
    }
    const LmiProblem problem = assemble_synthesis(sys, unc, nc, opts.forceCertain);
    auto solver = make_solver(opts.backend, opts.solver);
    const LmiSolveResult solved = solve_lmi(problem, *solver, opts.feasibility);

    SynthesisReport rep;
    rep.alpha = sys.alpha;
    rep.order = nc;
    rep.branch = problem.branch;
    rep.status = solved.solution.status;
    rep.solverMargin = solved.solution.margin;
    rep.sourceSlack = solved.sourceSlack;
    rep.solverStats = solved.solution.stats;
    if (solved.solution.status == SdpStatus::NumericalFailure) {
        throw SolverFailure("synthesis LMI: " + solved.solution.diagnostics);
    }
    rep.feasible = solved.feasible();
    if (!rep.feasible) return rep;

    const SynthesisVariables v = extract_variables(problem, solved.solution.assignment);
    const RecoveryResult rec = recover_controller(v.t1, v.t2, v.t3, v.t4, v.q, v.r, sys.C, sys.alpha);
    rep.controller = rec.controller;
    rep.residualB = rec.residualB;
    rep.residualD = rec.residualD;
    rep.recoveryInexact = !rec.exact();
    rep.conditionQ = rec.conditionQ;
    rep.conditionWarning = rec.conditionQ > kConditionWarning;
    if (rep.conditionWarning) rep.notes.push_back("Lyapunov block is ill-conditioned (cond > 1e10)");
    if (rep.recoveryInexact) rep.notes.push_back("controller recovery is inexact; verification decides");

    const ClosedLoop nominal = close_loop(sys.A, sys.B, sys.C, rec.controller);
    rep.nominalMargin = argument_margin(nominal.A, sys.alpha).margin;
    rep.verification = verify_robust(sys, unc, rec.controller, opts.verification);
    return rep;
}

}  // namespace fraclmi
