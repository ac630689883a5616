#pragma once

#include <vector>

namespace peakopt::opt {

struct QpEntry {
    int row = 0;
    int col = 0;
    double value = 0.0;
};

/// min 1/2 sum_j h_j x_j^2 + q'x  s.t.  A x = b,  lower <= x <= upper.
/// Bounds may be infinite; h >= 0.
struct QuadraticProgram {
    std::vector<double> h;
    std::vector<double> q;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<QpEntry> a;
    std::vector<double> b;

    int n_variables() const { return static_cast<int>(q.size()); }
    int n_rows() const { return static_cast<int>(b.size()); }
    int add_variable(double cost, double lo, double hi, double curvature = 0.0);
    /// Returns the row index.
    int add_row(double rhs);
    void add_entry(int row, int col, double value) { a.push_back({row, col, value}); }
    double objective(const std::vector<double>& x) const;
};

struct QpOptions {
    int max_iterations = 200;
    double tolerance = 1e-10;
};

enum class QpStatus { optimal, not_converged };

struct QpResult {
    QpStatus status = QpStatus::not_converged;
    std::vector<double> x;
    double objective = 0.0;
    int iterations = 0;
};

/// Mehrotra predictor-corrector interior point method. Each step solves the
/// regularised quasi-definite KKT system with a sparse LDL' factorisation.
QpResult solve_qp(const QuadraticProgram& qp, const QpOptions& options = {});

} // namespace peakopt::opt
