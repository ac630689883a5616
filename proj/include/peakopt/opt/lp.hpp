#pragma once

#include <string>
#include <utility>
#include <vector>

namespace peakopt::opt {

struct LpRow {
    std::string name;
    std::vector<std::pair<int, double>> terms;
    double lower = 0.0; // may be -inf
    double upper = 0.0; // may be +inf
};

/// min cost'x subject to row bounds and finite variable bounds.
struct LinearProgram {
    std::vector<std::string> names;
    std::vector<double> cost;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<LpRow> rows;

    int n_variables() const { return static_cast<int>(cost.size()); }
    int add_variable(std::string name, double c, double lo, double hi);
    void add_row(std::string name, std::vector<std::pair<int, double>> terms, double lo, double hi);
};

enum class LpStatus { optimal, infeasible, iteration_limit };

/// Bounded dual simplex on a dense tableau. Rows are carried as bounded
/// activity variables r = a'x, so the slack basis with every structural
/// variable at its cost-preferred bound is dual feasible from the start.
/// Bound changes keep dual feasibility, which makes copies of a solved
/// instance cheap warm starts for branch-and-bound children.
class DualSimplex {
public:
    explicit DualSimplex(const LinearProgram& lp);

    void set_bounds(int j, double lo, double hi);
    double lower(int j) const { return lo_[static_cast<std::size_t>(j)]; }
    double upper(int j) const { return hi_[static_cast<std::size_t>(j)]; }

    LpStatus solve();

    double objective() const;
    double value(int j) const { return value_[static_cast<std::size_t>(j)]; }
    std::vector<double> primal() const;
    /// Rows combined in the infeasible tableau row after an infeasible solve.
    std::vector<int> conflict_rows() const;
    long iterations() const { return iterations_; }

private:
    void recompute_values();
    void pivot(int r, int q);
    double& at(int r, int j) { return tab_[static_cast<std::size_t>(r) * cols_ + static_cast<std::size_t>(j)]; }
    double at(int r, int j) const { return tab_[static_cast<std::size_t>(r) * cols_ + static_cast<std::size_t>(j)]; }

    int n_ = 0;
    int m_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> tab_; // row r: sum_j tab(r, j) z_j = 0, tab(r, basis[r]) = 1
    std::vector<double> cost_;
    std::vector<double> lo_;
    std::vector<double> hi_;
    std::vector<double> d_; // reduced costs
    std::vector<double> value_;
    std::vector<int> basis_;
    std::vector<int> pos_; // row of a basic variable, -1 when nonbasic
    std::vector<char> at_upper_;
    std::vector<int> scratch_;
    int conflict_row_ = -1;
    long iterations_ = 0;
};

} // namespace peakopt::opt
