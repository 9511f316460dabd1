#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "fraclmi/demo.hpp"
#include "fraclmi/sdp.hpp"
#include "oracles.hpp"

using namespace fraclmi;

namespace {

LmiProblem constant_problem(double value) {
    LmiProblem p;
    p.negConstraints.push_back({"c", AffineMatrixExpr(Matrix::Constant(1, 1, value)), {}});
    return p;
}

// diag(x - 1, -x - 1) < 0
LmiProblem band_problem() {
    LmiProblem p;
    const DecisionVariable x = p.add_variable("x", VariableKind::Scalar, 1);
    AffineMatrixExpr e = AffineMatrixExpr::zero(2, 2);
    e += Matrix(Eigen::Vector2d(-1.0, -1.0).asDiagonal());
    Matrix c = Matrix::Zero(2, 2);
    c(0, 0) = 1.0;
    c(1, 1) = -1.0;
    e.add_term(x.offset, c);
    p.negConstraints.push_back({"band", e, {}});
    return p;
}

SdpSolution run(const LmiProblem& p, const FeasibilityOptions& f = {}) {
    auto solver = make_solver("ipm");
    return solve_lmi(p, *solver, f).solution;
}

ConicProgram golden_program() {
    ConicProgram c;
    c.numVars = 1;
    c.objective = Vector::Ones(1);
    ConicBlock b;
    b.constant = Matrix(2, 2);
    b.constant << 2.0, 0.5, 0.5, 1.0;
    Matrix k = Matrix::Zero(2, 2);
    k(0, 0) = 1.0;
    k(1, 1) = -1.0;
    b.coeffs.emplace(0, k);
    c.blocks.push_back(b);
    return c;
}

LmiProblem benchmark_problem(double alpha, Eigen::Index nc) {
    const BenchmarkCase bc = benchmark_case(alpha);
    const Envelope env = uncertainty_bounds(bc.uncertainty, 3);
    return alpha < 1.0 ? assemble_theorem1(bc.system, env, nc) : assemble_theorem2(bc.system, env, nc);
}

}  // namespace

TEST(FeasibilityProgram, ConstantNegativeBlock) {
    const SdpSolution s = run(constant_problem(-1.0));
    EXPECT_EQ(s.status, SdpStatus::Feasible);
    EXPECT_NEAR(s.margin, -1.0, 1e-6);
}

TEST(FeasibilityProgram, ConstantPositiveBlock) {
    const SdpSolution s = run(constant_problem(1.0));
    EXPECT_EQ(s.status, SdpStatus::Infeasible);
    EXPECT_NEAR(s.margin, 1.0, 1e-6);
}

TEST(FeasibilityProgram, ScalarBand) {
    const SdpSolution s = run(band_problem());
    EXPECT_EQ(s.status, SdpStatus::Feasible);
    EXPECT_NEAR(s.margin, -1.0, 1e-6);
    EXPECT_NEAR(s.assignment(0), 0.0, 1e-5);
}

TEST(FeasibilityProgram, ContradictoryBlocks) {
    LmiProblem p;
    const DecisionVariable x = p.add_variable("x", VariableKind::Scalar, 1);
    // x + 1 < 0 and x - 1 > 0
    p.negConstraints.push_back({"x <= -1", AffineMatrixExpr::of(x) + Matrix::Ones(1, 1), {}});
    p.posConstraints.push_back({"x >= 1", AffineMatrixExpr::of(x) - Matrix::Ones(1, 1), {}});
    const SdpSolution s = run(p);
    EXPECT_EQ(s.status, SdpStatus::Infeasible);
    EXPECT_NEAR(s.margin, 1.0, 1e-6);
}

TEST(FeasibilityProgram, Structure) {
    const ConicProgram c = to_feasibility_program(band_problem());
    EXPECT_EQ(c.numVars, 2);
    ASSERT_TRUE(c.marginVar.has_value());
    EXPECT_EQ(*c.marginVar, 1);
    ASSERT_EQ(c.blocks.size(), 2u);
    EXPECT_EQ(c.blocks[0].role, BlockRole::Negative);
    EXPECT_EQ(c.blocks[1].role, BlockRole::Bound);
    EXPECT_EQ(c.blocks[1].kind, BlockKind::Diagonal);
    // t I - E >= 0 at x = 0, t = 0 evaluates to -E = I.
    EXPECT_TRUE(c.blocks[0].evaluate(Vector::Zero(2)).isIdentity(1e-15));
}

TEST(FeasibilityProgram, EmptyProblem) {
    EXPECT_THROW(to_feasibility_program(LmiProblem{}), EmptyProblem);
    FeasibilityOptions f;
    f.delta = 0.0;
    EXPECT_THROW(to_feasibility_program(band_problem(), f), EmptyProblem);
}

TEST(Solver, PlainProgramOptimum) {
    auto solver = make_solver("ipm");
    const SdpSolution s = solver->solve(golden_program());
    EXPECT_EQ(s.status, SdpStatus::Feasible);
    // (2 + y)(1 - y) = 1/4 at the lower end of the feasible interval.
    EXPECT_NEAR(s.margin, (-1.0 - std::sqrt(8.0)) / 2.0, 1e-6);
}

TEST(Solver, UnknownBackend) { EXPECT_THROW(make_solver("mosek"), SolverFailure); }

TEST(Solver, Deterministic) {
    const LmiProblem p = benchmark_problem(0.65, 1);
    const SdpSolution a = run(p), b = run(p);
    EXPECT_EQ(a.status, b.status);
    EXPECT_EQ(a.stats.iterations, b.stats.iterations);
    EXPECT_NEAR(a.margin, b.margin, 1e-12);
    EXPECT_LT((a.assignment - b.assignment).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Solver, FeasibleVerdictIsRevalidated) {
    for (double alpha : {0.65, 1.25}) {
        const LmiProblem p = benchmark_problem(alpha, 1);
        const SdpSolution s = run(p);
        ASSERT_EQ(s.status, SdpStatus::Feasible) << s.diagnostics;
        for (const auto& c : p.negConstraints) {
            const double scale = c.expr.max_abs_entry();
            EXPECT_LE(oracle::max_eig(c.expr.evaluate(s.assignment)) / scale, -1e-6 / 2);
        }
        for (const auto& c : p.posConstraints) {
            const double scale = c.expr.max_abs_entry();
            EXPECT_GE(oracle::min_eig(c.expr.evaluate(s.assignment)) / scale, 1e-6 / 2);
        }
    }
}

TEST(Solver, ShrinkingDeltaKeepsFeasibility) {
    const LmiProblem p = benchmark_problem(0.65, 0);
    double previous = 0.0;
    bool first = true;
    for (double delta : {1e-4, 1e-6, 1e-8}) {
        FeasibilityOptions f;
        f.delta = delta;
        const SdpSolution s = run(p, f);
        EXPECT_EQ(s.status, SdpStatus::Feasible) << delta;
        if (!first) EXPECT_NEAR(s.margin, previous, 1e-6);
        previous = s.margin;
        first = false;
    }
}

TEST(Solver, MarginalNearThreshold) {
    // diag(c, -1) < 0 has unit normalization scale and t* = c.
    auto block = [](double c) {
        LmiProblem p;
        p.negConstraints.push_back({"c", AffineMatrixExpr(Matrix(Eigen::Vector2d(c, -1.0).asDiagonal())), {}});
        return p;
    };
    FeasibilityOptions f;
    f.delta = 1e-3;
    EXPECT_EQ(run(block(-1e-3), f).status, SdpStatus::Marginal);
    EXPECT_EQ(run(block(-2e-3), f).status, SdpStatus::Feasible);
    EXPECT_EQ(run(block(-0.5e-3), f).status, SdpStatus::Infeasible);
    // A lone constant block is scale-free after normalization.
    EXPECT_NEAR(run(constant_problem(-1e-3), f).margin, -1.0, 1e-6);
}

TEST(Sdpa, GoldenFixture) {
    std::ostringstream out;
    export_sdpa(golden_program(), out, "golden");
    std::ifstream in(std::string(FRACLMI_FIXTURE_DIR) + "/one_block.dat-s");
    ASSERT_TRUE(in.good());
    std::stringstream expected;
    expected << in.rdbuf();
    EXPECT_EQ(out.str(), expected.str());
}

TEST(Sdpa, RoundTrip) {
    for (const auto& program : {to_feasibility_program(benchmark_problem(0.65, 2)),
                                to_feasibility_program(benchmark_problem(1.25, 1)), golden_program()}) {
        std::stringstream buf;
        export_sdpa(program, buf);
        const ConicProgram back = read_sdpa(buf);
        ASSERT_EQ(back.numVars, program.numVars);
        ASSERT_EQ(back.blocks.size(), program.blocks.size());
        EXPECT_LE((back.objective - program.objective).cwiseAbs().maxCoeff(), 1e-15);
        for (std::size_t b = 0; b < program.blocks.size(); ++b) {
            const auto& x = program.blocks[b];
            const auto& y = back.blocks[b];
            EXPECT_EQ(x.kind, y.kind);
            ASSERT_EQ(x.dim(), y.dim());
            auto same = [&](const Matrix& m1, const Matrix& m2) {
                if (x.kind == BlockKind::Diagonal) return (m1.diagonal() - m2.diagonal()).cwiseAbs().maxCoeff();
                return (m1 - m2).cwiseAbs().maxCoeff();
            };
            EXPECT_LE(same(x.constant, y.constant), 1e-15);
            for (const auto& [k, m] : x.coeffs) {
                const auto it = y.coeffs.find(k);
                if (it == y.coeffs.end()) {
                    EXPECT_EQ(same(m, Matrix::Zero(m.rows(), m.cols())), 0.0);
                } else {
                    EXPECT_LE(same(m, it->second), 1e-15);
                }
            }
            EXPECT_LE(y.coeffs.size(), x.coeffs.size());
        }
    }
}

TEST(Sdpa, HeaderBlockCount) {
    const ConicProgram c = to_feasibility_program(benchmark_problem(1.25, 2));
    std::stringstream buf;
    export_sdpa(c, buf);
    std::string line;
    std::getline(buf, line);
    EXPECT_EQ(line[0], '*');
    std::getline(buf, line);
    EXPECT_EQ(line, std::to_string(c.numVars) + " = mDIM");
    std::getline(buf, line);
    EXPECT_EQ(line, std::to_string(c.blocks.size()) + " = nBLOCK");
    std::getline(buf, line);
    std::istringstream sizes(line);
    long long sz;
    std::size_t count = 0;
    while (sizes >> sz) ++count;
    EXPECT_EQ(count, c.blocks.size());
}

TEST(Sdpa, ReadAcceptsPunctuationAndRejectsGarbage) {
    std::istringstream ok("\"comment\n1 = mDIM\n1\n{2}\n{1.0}\n0 1 1 1 -2\n0,1,2,2,-1\n1 1 1 1 1\n1 1 2 2 -1\n");
    const ConicProgram c = read_sdpa(ok);
    EXPECT_EQ(c.blocks[0].constant(1, 1), 1.0);
    auto solver = make_solver("ipm");
    EXPECT_NEAR(solver->solve(c).margin, -2.0, 1e-6);

    std::istringstream truncated("1 = mDIM\n1 = nBLOCK\n");
    EXPECT_THROW(read_sdpa(truncated), ParseError);
    std::istringstream outOfRange("1\n1\n2\n1\n0 3 1 1 1\n");
    EXPECT_THROW(read_sdpa(outOfRange), ParseError);
    std::istringstream badPosition("1\n1\n2\n1\n0 1 3 1 1\n");
    EXPECT_THROW(read_sdpa(badPosition), ParseError);
}
