#pragma once

// Benchmark plant used by the `repro` command, the data/ samples and the tests:
// a three-state unstable plant with two input and two state uncertainty generators.

#include <string>

#include "model.hpp"

namespace fraclmi {

struct BenchmarkCase {
    std::string name;
    FoltiSystem system;
    UncertaintyModel uncertainty;
};

inline Matrix benchmark_a() {
    Matrix a(3, 3);
    a << -2, 0, -1,
          0, 3,  0,
         -1, -1, 4;
    return a;
}

inline UncertaintyModel benchmark_uncertainty(double bound = 0.3) {
    UncertaintyModel u;
    Matrix m1 = Matrix::Zero(3, 3), m2 = Matrix::Zero(3, 3);
    m1(0, 1) = 1.0;
    m2(2, 2) = 1.0;
    Matrix n1 = Matrix::Zero(3, 3), n2 = Matrix::Zero(3, 3);
    n1(1, 1) = n1(2, 1) = 1.0;
    n2(1, 2) = n2(2, 2) = 1.0;
    u.iGenerators = {m1, m2};
    u.aGenerators = {n1, n2};
    u.iBound = u.aBound = bound;
    return u;
}

// B = I and, to make the output map well defined, C = I (full-state measurement).
inline BenchmarkCase benchmark_case(double alpha, const std::string& name = "benchmark") {
    BenchmarkCase c;
    c.name = name;
    c.system.alpha = alpha;
    c.system.A = benchmark_a();
    c.system.B = Matrix::Identity(3, 3);
    c.system.C = Matrix::Identity(3, 3);
    c.uncertainty = benchmark_uncertainty();
    return c;
}

inline BenchmarkCase benchmark_example(int which) {
    if (which == 1) return benchmark_case(0.65, "ex1");
    if (which == 2) return benchmark_case(1.25, "ex2");
    throw DimensionError("unknown example " + std::to_string(which) + " (expected 1 or 2)");
}

}  // namespace fraclmi
