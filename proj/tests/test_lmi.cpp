#include <gtest/gtest.h>

#include <complex>
#include <random>

#include "fraclmi/demo.hpp"
#include "fraclmi/lmi.hpp"
#include "oracles.hpp"

using namespace fraclmi;

namespace {

using cplx = std::complex<double>;

Vector random_assignment(std::mt19937_64& rng, Eigen::Index n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = u(rng);
    return x;
}

void set_scalar(const LmiProblem& p, Vector& x, const std::string& name, double v) {
    x(p.variable(name).offset) = v;
}

// Schur complement of the leading d x d block: M11 - M1r Mrr^-1 Mr1.
Matrix schur_leading(const Matrix& m, Eigen::Index d) {
    const Eigen::Index r = m.rows() - d;
    const Matrix m11 = m.topLeftCorner(d, d);
    const Matrix m1r = m.topRightCorner(d, r);
    const Matrix mrr = m.bottomRightCorner(r, r);
    return m11 - m1r * mrr.fullPivLu().solve(m1r.transpose());
}

Matrix diag2(const Matrix& a, const Matrix& b) {
    Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    out.topLeftCorner(a.rows(), a.cols()) = a;
    out.bottomRightCorner(b.rows(), b.cols()) = b;
    return out;
}

Matrix kron2(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
    return out;
}

FoltiSystem plant(double alpha, Eigen::Index l = 3) {
    FoltiSystem s = benchmark_case(alpha).system;
    if (l != 3) {
        std::mt19937_64 rng(11);
        s.B = oracle::random_matrix(rng, 3, l);
        s.C = oracle::random_matrix(rng, 2, 3);
    }
    return s;
}

Envelope benchmark_envelope() { return uncertainty_bounds(benchmark_uncertainty(), 3); }

}  // namespace

TEST(RealCombination, MatchesComplexArithmetic) {
    std::mt19937_64 rng(1);
    LmiProblem p;
    const HermitianVar x = add_hermitian(p, "X", 4);
    const double theta = 0.35 * kPi;
    const AffineMatrixExpr e = real_combination(x, theta);
    const cplx r = std::polar(1.0, theta);
    for (int t = 0; t < 10; ++t) {
        const Vector v = random_assignment(rng, p.scalar_count());
        const ComplexMatrix xv = x.value(v);
        ASSERT_LT((xv - xv.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
        const ComplexMatrix expected = r * xv + std::conj(r) * xv.conjugate();
        EXPECT_LT(expected.imag().cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((e.evaluate(v) - expected.real()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(RealCombination, RealAndZeroAngleCases) {
    std::mt19937_64 rng(2);
    LmiProblem p;
    const HermitianVar x = add_hermitian(p, "X", 3);
    Vector v = random_assignment(rng, p.scalar_count());
    const Matrix xr = x.realPart.value(v);
    EXPECT_LT((real_combination(x, 0.0).evaluate(v) - 2.0 * xr).cwiseAbs().maxCoeff(), 1e-14);
    for (Eigen::Index k = 0; k < x.imagPart.scalar_count(); ++k) v(x.imagPart.offset + k) = 0.0;
    EXPECT_LT((real_combination(x, 0.7).evaluate(v) - 2.0 * std::cos(0.7) * xr).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(HermitianEmbedding, EigenvaluesAreDoubled) {
    LmiProblem p;
    const HermitianVar x = add_hermitian(p, "X", 2);
    Vector v = Vector::Zero(p.scalar_count());
    // X = [[1, i], [-i, 1]]
    v(x.realPart.offset + 0) = 1.0;
    v(x.realPart.offset + 2) = 1.0;
    v(x.imagPart.offset + 0) = 1.0;
    ASSERT_EQ(x.value(v)(0, 1), cplx(0.0, 1.0));
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_embedding(x).evaluate(v));
    const Vector ev = es.eigenvalues();
    EXPECT_NEAR(ev(0), 0.0, 1e-14);
    EXPECT_NEAR(ev(1), 0.0, 1e-14);
    EXPECT_NEAR(ev(2), 2.0, 1e-14);
    EXPECT_NEAR(ev(3), 2.0, 1e-14);
}

TEST(HermitianEmbedding, RealAndIdentityCases) {
    std::mt19937_64 rng(4);
    LmiProblem p;
    const HermitianVar x = add_hermitian(p, "X", 3);
    Vector v = random_assignment(rng, p.scalar_count());
    for (Eigen::Index k = 0; k < x.imagPart.scalar_count(); ++k) v(x.imagPart.offset + k) = 0.0;
    const Matrix xr = x.realPart.value(v);
    EXPECT_LT((hermitian_embedding(x).evaluate(v) - diag2(xr, xr)).cwiseAbs().maxCoeff(), 1e-15);

    Vector id = Vector::Zero(p.scalar_count());
    for (int i : {0, 3, 5}) id(x.realPart.offset + i) = 1.0;  // diagonal of the packed upper triangle
    EXPECT_TRUE(hermitian_embedding(x).evaluate(id).isIdentity(1e-15));
}

TEST(HermitianEmbedding, DefinitenessMatchesComplexMatrix) {
    std::mt19937_64 rng(5);
    LmiProblem p;
    const HermitianVar x = add_hermitian(p, "X", 3);
    for (int t = 0; t < 50; ++t) {
        const Vector v = random_assignment(rng, p.scalar_count());
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(x.value(v));
        EXPECT_NEAR(oracle::min_eig(hermitian_embedding(x).evaluate(v)), es.eigenvalues().minCoeff(), 1e-12);
    }
}

TEST(Theorem1, SizesAndVariableCount) {
    const LmiProblem p = assemble_theorem1(plant(0.65), benchmark_envelope(), 1);
    ASSERT_EQ(p.negConstraints.size(), 1u);
    EXPECT_EQ(p.negConstraints[0].expr.rows(), 14);
    EXPECT_EQ(p.branch, LmiBranch::Theorem1);
    EXPECT_NEAR(p.theta, 0.175 * kPi, 1e-15);
    // P_S: 6 + 3, P_C: 1 + 0, T1..T4: 1 + 3 + 3 + 9, eta1, eta3, eps1.
    EXPECT_EQ(p.scalar_count(), 29);
    EXPECT_EQ(p.posConstraints.size(), 5u);
}

TEST(Theorem1, StaticOutputFeedbackReduction) {
    const FoltiSystem sys = plant(0.65);
    const Envelope env = benchmark_envelope();
    const LmiProblem p = assemble_theorem1(sys, env, 0);
    EXPECT_EQ(p.negConstraints[0].expr.rows(), 12);
    EXPECT_EQ(p.find("PC"), nullptr);
    EXPECT_EQ(p.find("T1"), nullptr);
    EXPECT_EQ(p.find("T3"), nullptr);
    EXPECT_EQ(p.scalar_count(), 6 + 3 + 9 + 3);

    std::mt19937_64 rng(6);
    const Vector v = random_assignment(rng, p.scalar_count());
    const Matrix m = p.negConstraints[0].expr.evaluate(v);
    const double th = p.theta;
    const Matrix qs = 2 * std::cos(th) * p.value("PS.re", v) - 2 * std::sin(th) * p.value("PS.im", v);
    const Matrix t4 = p.value("T4", v);
    const double e1 = v(p.variable("eta1").offset), e3 = v(p.variable("eta3").offset);
    const Matrix k = sys.A * qs + sys.B * t4;
    const Matrix s11 = k + k.transpose() + e1 * env.G + (e3 + 1) * env.H;
    EXPECT_LT((m.topLeftCorner(3, 3) - s11).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((m.block(0, 9, 3, 3) - t4.transpose() * sys.B.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Theorem1, SchurComplementMatchesBound) {
    const FoltiSystem sys = plant(0.65, 2);
    const Envelope env = benchmark_envelope();
    const Eigen::Index n = 3, nc = 2;
    const LmiProblem p = assemble_theorem1(sys, env, nc);
    std::mt19937_64 rng(7);
    for (int t = 0; t < 20; ++t) {
        Vector v = random_assignment(rng, p.scalar_count());
        const double e1 = 0.5 + std::abs(v(0)), e3 = 0.3 + std::abs(v(1)), eps = 0.8;
        set_scalar(p, v, "eta1", e1);
        set_scalar(p, v, "eta3", e3);
        set_scalar(p, v, "eps1", eps);
        const Matrix m = p.negConstraints[0].expr.evaluate(v);
        ASSERT_EQ(m.rows(), 2 * (n + nc) + 2 * n);

        const double th = p.theta;
        auto comb = [&](const std::string& name) {
            return Matrix(2 * std::cos(th) * p.value(name + ".re", v) - 2 * std::sin(th) * p.value(name + ".im", v));
        };
        const Matrix qs = comb("PS"), qc = comb("PC");
        const Matrix t1 = p.value("T1", v), t2 = p.value("T2", v), t3 = p.value("T3", v), t4 = p.value("T4", v);
        Matrix k(n + nc, n + nc);
        k << sys.A * qs + sys.B * t4, sys.B * t3, t2, t1;
        const Matrix q = diag2(qs, qc);
        const Matrix z = Matrix::Zero(nc, nc);
        Matrix s11 = k + k.transpose() + e1 * diag2(env.G, z) + (e3 + 1) * diag2(env.H, z);
        Matrix y13 = Matrix::Zero(n + nc, n);
        y13.topRows(n) = qs.transpose() * sys.A.transpose();
        Matrix y14(n + nc, n);
        y14 << t4.transpose() * sys.B.transpose(), t3.transpose() * sys.B.transpose();
        const Matrix relief = (Matrix::Identity(n, n) - eps * env.G).inverse();
        const Matrix expected = s11 + q.transpose() * q / e1 + y13 * relief * y13.transpose() + y14 * y14.transpose() / e3;
        const Matrix got = schur_leading(m, n + nc);
        EXPECT_LT((got - expected).cwiseAbs().maxCoeff(), 1e-9 * (1.0 + expected.cwiseAbs().maxCoeff()));
    }
}

TEST(Theorem2, SizesAndKroneckerIdentity) {
    const LmiProblem p = assemble_theorem2(plant(1.25), benchmark_envelope(), 1);
    EXPECT_EQ(p.negConstraints[0].expr.rows(), 28);
    EXPECT_EQ(p.branch, LmiBranch::Theorem2);
    // P_S 6, P_C 1, T1..T4 1 + 3 + 3 + 9, three scalars.
    EXPECT_EQ(p.scalar_count(), 26);

    const double th = theorem2_angle(1.25);
    Matrix expected(2, 2);
    expected << std::sin(th), std::cos(th), -std::cos(th), std::sin(th);
    LmiProblem q;
    const DecisionVariable s = q.add_variable("s", VariableKind::Scalar, 1);
    const AffineMatrixExpr k = kron(Matrix(sector_rotation(th).transpose()), AffineMatrixExpr::of(s));
    Vector one = Vector::Ones(1);
    EXPECT_LT((k.evaluate(one) - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Theorem2, OrderOneDuplicatesIntegerStructure) {
    const FoltiSystem sys = plant(1.0);
    const LmiProblem p = assemble_certain(sys, 1);
    EXPECT_EQ(p.branch, LmiBranch::Certain2);
    EXPECT_NEAR(p.theta, kPi / 2, 1e-15);
    std::mt19937_64 rng(8);
    const Vector v = random_assignment(rng, p.scalar_count());
    const Matrix m = p.negConstraints[0].expr.evaluate(v);
    Matrix k(4, 4);
    k << sys.A * p.value("PS", v) + sys.B * p.value("T4", v), sys.B * p.value("T3", v), p.value("T2", v),
        p.value("T1", v);
    const Matrix s = k + k.transpose();
    EXPECT_LT((m - kron2(Matrix::Identity(2, 2), s)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Theorem2, SchurComplementMatchesBound) {
    const FoltiSystem sys = plant(1.25, 2);
    const Envelope env = benchmark_envelope();
    const Eigen::Index n = 3, nc = 1;
    const LmiProblem p = assemble_theorem2(sys, env, nc);
    const double th = p.theta;
    Matrix rot(2, 2);
    rot << std::sin(th), std::cos(th), -std::cos(th), std::sin(th);
    const Matrix i2 = Matrix::Identity(2, 2);
    std::mt19937_64 rng(9);
    for (int t = 0; t < 20; ++t) {
        Vector v = random_assignment(rng, p.scalar_count());
        const double e1 = 0.7, e3 = 1.3, eps = 0.5;
        set_scalar(p, v, "eta1", e1);
        set_scalar(p, v, "eta3", e3);
        set_scalar(p, v, "eps1", eps);
        const Matrix ps = p.value("PS", v), pc = p.value("PC", v);
        const Matrix t1 = p.value("T1", v), t2 = p.value("T2", v), t3 = p.value("T3", v), t4 = p.value("T4", v);
        Matrix k(n + nc, n + nc);
        k << sys.A * ps + sys.B * t4, sys.B * t3, t2, t1;
        const Matrix z = Matrix::Zero(nc, nc);
        const Matrix rk = kron2(rot, k);
        const Matrix s11 = rk + rk.transpose() + e1 * kron2(i2, diag2(env.G, z)) + (e3 + 1) * kron2(i2, diag2(env.H, z));
        const Matrix q = kron2(i2, diag2(ps, pc));
        Matrix y13i = Matrix::Zero(n + nc, n);
        y13i.topRows(n) = ps * sys.A.transpose();
        const Matrix y13 = kron2(i2, y13i);
        Matrix y14i(n + nc, n);
        y14i << t4.transpose() * sys.B.transpose(), t3.transpose() * sys.B.transpose();
        const Matrix y14 = kron2(i2, y14i);
        const Matrix relief = kron2(i2, Matrix((Matrix::Identity(n, n) - eps * env.G).inverse()));
        const Matrix expected = s11 + q * q.transpose() / e1 + y13 * relief * y13.transpose() + y14 * y14.transpose() / e3;
        const Matrix got = schur_leading(p.negConstraints[0].expr.evaluate(v), 2 * (n + nc));
        EXPECT_LT((got - expected).cwiseAbs().maxCoeff(), 1e-9 * (1.0 + expected.cwiseAbs().maxCoeff()));
    }
}

TEST(Certain, SizesAndScalarExample) {
    EXPECT_EQ(assemble_certain(plant(0.65), 1).negConstraints[0].expr.rows(), 4);
    EXPECT_EQ(assemble_certain(plant(1.25), 1).negConstraints[0].expr.rows(), 8);
    const LmiProblem p12 = assemble_certain(plant(1.25), 2);
    EXPECT_EQ(p12.negConstraints[0].expr.rows(), 10);
    EXPECT_EQ(p12.find("eta1"), nullptr);
    EXPECT_EQ(p12.find("eps1"), nullptr);

    FoltiSystem s;
    s.alpha = 0.5;
    s.A = -Matrix::Identity(1, 1);
    s.B = s.C = Matrix::Identity(1, 1);
    const LmiProblem p = assemble_certain(s, 0);
    Vector v = Vector::Zero(p.scalar_count());
    v(p.variable("PS.re").offset) = 1.0;  // P_S = 1, T4 = 0
    EXPECT_NEAR(p.negConstraints[0].expr.evaluate(v)(0, 0), -4 * std::cos(theorem1_angle(0.5)), 1e-14);
}

TEST(Assembly, AffinityAndSymmetry) {
    std::mt19937_64 rng(10);
    const Envelope env = benchmark_envelope();
    const std::vector<LmiProblem> problems{
        assemble_theorem1(plant(0.65), env, 0), assemble_theorem1(plant(0.3, 2), env, 2),
        assemble_theorem2(plant(1.0), env, 1),   assemble_theorem2(plant(1.6, 2), env, 0),
        assemble_certain(plant(0.65), 1),        assemble_certain(plant(1.25), 2)};
    for (const auto& p : problems) {
        for (int t = 0; t < 5; ++t) {
            const Vector v1 = 5.0 * random_assignment(rng, p.scalar_count());
            const Vector v2 = 5.0 * random_assignment(rng, p.scalar_count());
            std::vector<LmiConstraint> all = p.negConstraints;
            all.insert(all.end(), p.posConstraints.begin(), p.posConstraints.end());
            for (const auto& c : all) {
                const Matrix mid = c.expr.evaluate(0.5 * v1 + 0.5 * v2);
                const Matrix avg = 0.5 * c.expr.evaluate(v1) + 0.5 * c.expr.evaluate(v2);
                EXPECT_LT((mid - avg).cwiseAbs().maxCoeff(), 1e-12) << c.label;
                EXPECT_LT((mid - mid.transpose()).cwiseAbs().maxCoeff(), 1e-12) << c.label;
            }
        }
    }
}

TEST(Assembly, WrongBranch) {
    const Envelope env = benchmark_envelope();
    EXPECT_THROW(assemble_theorem1(plant(1.0), env, 1), WrongBranch);
    EXPECT_THROW(assemble_theorem1(plant(1.25), env, 0), WrongBranch);
    EXPECT_THROW(assemble_theorem2(plant(0.65), env, 1), WrongBranch);
    EXPECT_THROW(assemble_theorem2(plant(0.999), env, 0), WrongBranch);
    EXPECT_THROW(assemble_theorem1(plant(0.65), env, -1), DimensionError);
    Envelope bad{Matrix::Zero(2, 2), Matrix::Zero(2, 2)};
    EXPECT_THROW(assemble_theorem1(plant(0.65), bad, 1), DimensionError);
}

TEST(Assembly, DescribeListsBlocks) {
    const std::string text = describe(assemble_theorem1(plant(0.65), benchmark_envelope(), 1));
    EXPECT_NE(text.find("29 scalars"), std::string::npos);
    EXPECT_NE(text.find("Sigma11"), std::string::npos);
}

// X^T Y + Y^T X <= eta X^T X + eta^-1 Y^T Y.
TEST(MatrixInequalities, YoungInequality) {
    std::mt19937_64 rng(12);
    double worst = INFINITY;
    for (int t = 0; t < 100; ++t) {
        const Matrix x = oracle::random_matrix(rng, 4, 3), y = oracle::random_matrix(rng, 4, 3);
        for (double eta : {0.1, 1.0, 10.0}) {
            const Matrix gap = eta * x.transpose() * x + y.transpose() * y / eta - x.transpose() * y - y.transpose() * x;
            worst = std::min(worst, oracle::min_eig(gap));
        }
    }
    EXPECT_GE(worst, -1e-10);
}

// (X + Y)^T (X + Y) <= X^T (I - eps Y Y^T)^-1 X + eps^-1 I when I - eps Y Y^T > 0.
TEST(MatrixInequalities, PerturbedGramBound) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> frac(0.05, 0.95);
    double worst = INFINITY;
    for (int t = 0; t < 100; ++t) {
        const Matrix x = oracle::random_matrix(rng, 3, 3), y = oracle::random_matrix(rng, 3, 3);
        const double eps = frac(rng) / oracle::max_eig(y * y.transpose());
        const Matrix relief = Matrix::Identity(3, 3) - eps * y * y.transpose();
        ASSERT_GT(oracle::min_eig(relief), 0.0);
        const Matrix gap = x.transpose() * relief.inverse() * x + Matrix::Identity(3, 3) / eps -
                           (x + y).transpose() * (x + y);
        worst = std::min(worst, oracle::min_eig(gap));
    }
    EXPECT_GE(worst, -1e-10);
}

// (A + Delta_A)^T (A + Delta_A) <= A^T (I - eps G)^-1 A + eps^-1 I for admissible Delta_A.
TEST(MatrixInequalities, EnvelopeChain) {
    const UncertaintyModel u = benchmark_uncertainty();
    const Envelope env = uncertainty_bounds(u, 3);
    const Matrix a = benchmark_a();
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> frac(0.05, 0.95);
    const auto samples = sample_random(u, 15, 100);
    double worst = INFINITY;
    for (const auto& r : samples) {
        const Matrix da = perturbations(u, r, 3).second;
        const double eps = frac(rng) / oracle::max_eig(env.G);
        const Matrix relief = Matrix::Identity(3, 3) - eps * env.G;
        ASSERT_GT(oracle::min_eig(relief), 0.0);
        const Matrix gap =
            a.transpose() * relief.inverse() * a + Matrix::Identity(3, 3) / eps - (a + da).transpose() * (a + da);
        worst = std::min(worst, oracle::min_eig(gap));
    }
    EXPECT_GE(worst, -1e-10);
}
