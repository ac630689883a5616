#include "peakopt/opt/lp.hpp"

#include "peakopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace peakopt::opt {

namespace {

constexpr double kPrimalTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr double kRatioTie = 1e-12;

} // namespace

int LinearProgram::add_variable(std::string name, double c, double lo, double hi)
{
    names.push_back(std::move(name));
    cost.push_back(c);
    lower.push_back(lo);
    upper.push_back(hi);
    return n_variables() - 1;
}

void LinearProgram::add_row(std::string name, std::vector<std::pair<int, double>> terms, double lo, double hi)
{
    rows.push_back({std::move(name), std::move(terms), lo, hi});
}

DualSimplex::DualSimplex(const LinearProgram& lp)
    : n_(lp.n_variables()),
      m_(static_cast<int>(lp.rows.size())),
      cols_(static_cast<std::size_t>(n_ + m_)),
      tab_(static_cast<std::size_t>(m_) * cols_, 0.0),
      cost_(cols_, 0.0),
      lo_(cols_),
      hi_(cols_),
      value_(cols_, 0.0),
      basis_(static_cast<std::size_t>(m_)),
      pos_(cols_, -1),
      at_upper_(cols_, 0)
{
    for (int j = 0; j < n_; ++j) {
        const auto k = static_cast<std::size_t>(j);
        if (!std::isfinite(lp.lower[k]) || !std::isfinite(lp.upper[k]) || lp.lower[k] > lp.upper[k]) {
            throw ContractError("variable " + lp.names[k] + " needs finite, ordered bounds");
        }
        cost_[k] = lp.cost[k];
        lo_[k] = lp.lower[k];
        hi_[k] = lp.upper[k];
        at_upper_[k] = cost_[k] < 0.0;
    }
    for (int i = 0; i < m_; ++i) {
        const auto& row = lp.rows[static_cast<std::size_t>(i)];
        for (const auto& [j, a] : row.terms) {
            if (j < 0 || j >= n_) {
                throw ContractError("row " + row.name + " references an undeclared variable");
            }
            at(i, j) -= a;
        }
        const int slack = n_ + i;
        at(i, slack) = 1.0;
        lo_[static_cast<std::size_t>(slack)] = row.lower;
        hi_[static_cast<std::size_t>(slack)] = row.upper;
        basis_[static_cast<std::size_t>(i)] = slack;
        pos_[static_cast<std::size_t>(slack)] = i;
    }
    d_ = cost_;
}

void DualSimplex::set_bounds(int j, double lo, double hi)
{
    lo_[static_cast<std::size_t>(j)] = lo;
    hi_[static_cast<std::size_t>(j)] = hi;
}

void DualSimplex::recompute_values()
{
    scratch_.clear();
    for (std::size_t j = 0; j < cols_; ++j) {
        if (pos_[j] >= 0) {
            continue;
        }
        value_[j] = at_upper_[j] ? hi_[j] : lo_[j];
        if (value_[j] != 0.0) {
            scratch_.push_back(static_cast<int>(j));
        }
    }
    for (int r = 0; r < m_; ++r) {
        double v = 0.0;
        for (const int j : scratch_) {
            v -= at(r, j) * value_[static_cast<std::size_t>(j)];
        }
        value_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])] = v;
    }
}

void DualSimplex::pivot(int r, int q)
{
    const double p = at(r, q);
    scratch_.clear();
    for (std::size_t j = 0; j < cols_; ++j) {
        double& x = at(r, static_cast<int>(j));
        if (x != 0.0) {
            x /= p;
            scratch_.push_back(static_cast<int>(j));
        }
    }
    at(r, q) = 1.0;
    const double* pr = &tab_[static_cast<std::size_t>(r) * cols_];
    for (int i = 0; i < m_; ++i) {
        if (i == r) {
            continue;
        }
        const double f = at(i, q);
        if (f == 0.0) {
            continue;
        }
        double* pi = &tab_[static_cast<std::size_t>(i) * cols_];
        for (const int j : scratch_) {
            pi[j] -= f * pr[j];
        }
        pi[q] = 0.0;
    }
    const double f = d_[static_cast<std::size_t>(q)];
    if (f != 0.0) {
        for (const int j : scratch_) {
            d_[static_cast<std::size_t>(j)] -= f * pr[j];
        }
    }
    d_[static_cast<std::size_t>(q)] = 0.0;

    const int leaving = basis_[static_cast<std::size_t>(r)];
    pos_[static_cast<std::size_t>(leaving)] = -1;
    basis_[static_cast<std::size_t>(r)] = q;
    pos_[static_cast<std::size_t>(q)] = r;
}

LpStatus DualSimplex::solve()
{
    conflict_row_ = -1;
    const long size = static_cast<long>(m_) + static_cast<long>(cols_);
    const long bland_after = 20 * size + 100;
    const long limit = 200 * size + 1000;
    recompute_values();
    for (long iter = 0; iter < limit; ++iter) {
        const bool bland = iter >= bland_after;
        int r = -1;
        double worst = kPrimalTol;
        for (int i = 0; i < m_; ++i) {
            const auto b = static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)]);
            const double infeas = std::max(lo_[b] - value_[b], value_[b] - hi_[b]);
            if (infeas <= kPrimalTol) {
                continue;
            }
            if (bland ? (r < 0 || basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(r)]) : infeas > worst) {
                worst = infeas;
                r = i;
            }
        }
        if (r < 0) {
            return LpStatus::optimal;
        }
        const auto leaving = static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)]);
        const bool increase = value_[leaving] < lo_[leaving];

        int q = -1;
        double best_ratio = std::numeric_limits<double>::infinity();
        double best_pivot = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) {
            if (pos_[j] >= 0 || lo_[j] == hi_[j]) {
                continue;
            }
            const double a = at(r, static_cast<int>(j));
            if (std::abs(a) <= kPivotTol) {
                continue;
            }
            const bool can_rise = !at_upper_[j];
            const bool eligible = increase ? (can_rise ? a < 0.0 : a > 0.0) : (can_rise ? a > 0.0 : a < 0.0);
            if (!eligible) {
                continue;
            }
            const double ratio = std::abs(d_[j]) / std::abs(a);
            const bool better = ratio < best_ratio - kRatioTie
                                || (!bland && ratio <= best_ratio + kRatioTie && std::abs(a) > best_pivot);
            if (better) {
                best_ratio = ratio;
                best_pivot = std::abs(a);
                q = static_cast<int>(j);
            }
        }
        if (q < 0) {
            conflict_row_ = r;
            return LpStatus::infeasible;
        }
        pivot(r, q);
        at_upper_[leaving] = increase ? 0 : 1;
        ++iterations_;
        recompute_values();
    }
    return LpStatus::iteration_limit;
}

double DualSimplex::objective() const
{
    double z = 0.0;
    for (int j = 0; j < n_; ++j) {
        z += cost_[static_cast<std::size_t>(j)] * value_[static_cast<std::size_t>(j)];
    }
    return z;
}

std::vector<double> DualSimplex::primal() const
{
    return {value_.begin(), value_.begin() + n_};
}

std::vector<int> DualSimplex::conflict_rows() const
{
    std::vector<int> rows;
    if (conflict_row_ < 0) {
        return rows;
    }
    const int b = basis_[static_cast<std::size_t>(conflict_row_)];
    if (b >= n_) {
        rows.push_back(b - n_);
    }
    for (int i = 0; i < m_; ++i) {
        const int j = n_ + i;
        if (pos_[static_cast<std::size_t>(j)] < 0 && std::abs(at(conflict_row_, j)) > kPivotTol) {
            rows.push_back(i);
        }
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

} // namespace peakopt::opt
