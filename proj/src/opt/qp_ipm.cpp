#include "peakopt/opt/qp.hpp"

#include "peakopt/errors.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>

namespace peakopt::opt {

int QuadraticProgram::add_variable(double cost, double lo, double hi, double curvature)
{
    h.push_back(curvature);
    q.push_back(cost);
    lower.push_back(lo);
    upper.push_back(hi);
    return n_variables() - 1;
}

int QuadraticProgram::add_row(double rhs)
{
    b.push_back(rhs);
    return n_rows() - 1;
}

double QuadraticProgram::objective(const std::vector<double>& x) const
{
    double f = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        f += 0.5 * h[j] * x[j] * x[j] + q[j] * x[j];
    }
    return f;
}

namespace {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

constexpr double kRegPrimal = 1e-10;
constexpr double kRegDual = 1e-10;

double inf_norm(const Vec& v)
{
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

// Largest step in (0, 1] keeping v + alpha dv > 0 on the masked entries.
double max_step(const Vec& v, const Vec& dv, const std::vector<char>& mask)
{
    double alpha = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (mask[static_cast<std::size_t>(i)] && dv[i] < 0.0) {
            alpha = std::min(alpha, -v[i] / dv[i]);
        }
    }
    return alpha;
}

} // namespace

QpResult solve_qp(const QuadraticProgram& qp, const QpOptions& options)
{
    const int n = qp.n_variables();
    const int m = qp.n_rows();
    QpResult result;
    if (n == 0) {
        result.status = QpStatus::optimal;
        return result;
    }

    SpMat A(m, n);
    {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(qp.a.size());
        for (const auto& e : qp.a) {
            trip.emplace_back(e.row, e.col, e.value);
        }
        A.setFromTriplets(trip.begin(), trip.end());
    }
    const SpMat At = A.transpose();

    std::vector<char> has_l(static_cast<std::size_t>(n));
    std::vector<char> has_u(static_cast<std::size_t>(n));
    Vec l(n), u(n), h(n), c(n), b(m);
    int n_compl = 0;
    for (int j = 0; j < n; ++j) {
        const auto k = static_cast<std::size_t>(j);
        l[j] = qp.lower[k];
        u[j] = qp.upper[k];
        h[j] = qp.h[k];
        c[j] = qp.q[k];
        has_l[k] = std::isfinite(l[j]);
        has_u[k] = std::isfinite(u[j]);
        if (has_l[k] && has_u[k] && !(l[j] < u[j])) {
            throw ContractError("QP variable bounds must leave an interior");
        }
        n_compl += has_l[k] + has_u[k];
    }
    for (int i = 0; i < m; ++i) {
        b[i] = qp.b[static_cast<std::size_t>(i)];
    }

    // Starting point: centre of each box, unit duals.
    Vec x(n), y = Vec::Zero(m), zl = Vec::Zero(n), zu = Vec::Zero(n);
    for (int j = 0; j < n; ++j) {
        const auto k = static_cast<std::size_t>(j);
        if (has_l[k] && has_u[k]) {
            x[j] = 0.5 * (l[j] + u[j]);
        } else if (has_l[k]) {
            x[j] = l[j] + 1.0;
        } else if (has_u[k]) {
            x[j] = u[j] - 1.0;
        } else {
            x[j] = 0.0;
        }
        zl[j] = has_l[k] ? 1.0 : 0.0;
        zu[j] = has_u[k] ? 1.0 : 0.0;
    }

    // KKT pattern: lower triangle of [-(H + Sigma + rho) A'; A delta].
    SpMat K(n + m, n + m);
    {
        std::vector<Eigen::Triplet<double>> trip;
        for (int j = 0; j < n + m; ++j) {
            trip.emplace_back(j, j, 1.0);
        }
        for (const auto& e : qp.a) {
            trip.emplace_back(n + e.row, e.col, e.value);
        }
        K.setFromTriplets(trip.begin(), trip.end());
        K.makeCompressed();
    }
    std::vector<double*> diag(static_cast<std::size_t>(n + m));
    for (int j = 0; j < n + m; ++j) {
        diag[static_cast<std::size_t>(j)] = &K.coeffRef(j, j);
    }
    Eigen::SimplicialLDLT<SpMat, Eigen::Lower> ldlt;
    ldlt.analyzePattern(K);

    const double b_norm = 1.0 + inf_norm(b);
    const double c_norm = 1.0 + inf_norm(c);
    Vec sl(n), su(n), sigma(n);

    // Unregularised KKT product for iterative refinement.
    auto kkt_apply = [&](const Vec& v) {
        Vec out(n + m);
        const Vec vx = v.head(n);
        const Vec vy = v.tail(m);
        out.head(n) = -(h + sigma).cwiseProduct(vx) + At * vy;
        out.tail(m) = A * vx;
        return out;
    };
    auto kkt_solve = [&](const Vec& rhs) {
        Vec v = ldlt.solve(rhs);
        for (int k = 0; k < 2; ++k) {
            v += ldlt.solve(rhs - kkt_apply(v));
        }
        return v;
    };

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        result.iterations = iter;
        for (int j = 0; j < n; ++j) {
            sl[j] = has_l[static_cast<std::size_t>(j)] ? x[j] - l[j] : 1.0;
            su[j] = has_u[static_cast<std::size_t>(j)] ? u[j] - x[j] : 1.0;
        }
        const Vec rp = b - A * x;
        const Vec rd = h.cwiseProduct(x) + c - At * y - zl + zu;
        const double gap = sl.cwiseProduct(zl).sum() + su.cwiseProduct(zu).sum();
        const double mu = n_compl > 0 ? gap / n_compl : 0.0;
        const double pobj = 0.5 * x.dot(h.cwiseProduct(x)) + c.dot(x);

        if (inf_norm(rp) <= options.tolerance * b_norm && inf_norm(rd) <= options.tolerance * c_norm
            && gap <= options.tolerance * (1.0 + std::abs(pobj))) {
            result.status = QpStatus::optimal;
            break;
        }

        sigma = zl.cwiseQuotient(sl) + zu.cwiseQuotient(su);
        // Near the solution pivots can vanish; strengthen the regularisation
        // until the factorisation goes through.
        bool factored = false;
        for (double reg = 1.0; reg <= 1e6 && !factored; reg *= 100.0) {
            for (int j = 0; j < n; ++j) {
                *diag[static_cast<std::size_t>(j)] = -(h[j] + sigma[j] + reg * kRegPrimal);
            }
            for (int i = 0; i < m; ++i) {
                *diag[static_cast<std::size_t>(n + i)] = reg * kRegDual;
            }
            ldlt.factorize(K);
            factored = ldlt.info() == Eigen::Success;
        }
        if (!factored) {
            break;
        }

        // Complementarity targets tl, tu give dzl = (tl - zl dx) / sl and
        // dzu = (tu + zu dx) / su.
        auto direction = [&](const Vec& tl, const Vec& tu, Vec& dx, Vec& dy, Vec& dzl, Vec& dzu) {
            Vec r1 = -rd + tl.cwiseQuotient(sl) - tu.cwiseQuotient(su);
            Vec rhs(n + m);
            rhs.head(n) = -r1;
            rhs.tail(m) = rp;
            const Vec v = kkt_solve(rhs);
            dx = v.head(n);
            dy = v.tail(m);
            dzl = (tl - zl.cwiseProduct(dx)).cwiseQuotient(sl);
            dzu = (tu + zu.cwiseProduct(dx)).cwiseQuotient(su);
            for (int j = 0; j < n; ++j) {
                if (!has_l[static_cast<std::size_t>(j)]) {
                    dzl[j] = 0.0;
                }
                if (!has_u[static_cast<std::size_t>(j)]) {
                    dzu[j] = 0.0;
                }
            }
        };
        auto step_length = [&](const Vec& dx, const Vec& dzl, const Vec& dzu) {
            const Vec neg = -dx;
            return std::min({max_step(sl, dx, has_l), max_step(su, neg, has_u), max_step(zl, dzl, has_l),
                             max_step(zu, dzu, has_u)});
        };

        Vec tl = -sl.cwiseProduct(zl);
        Vec tu = -su.cwiseProduct(zu);
        Vec dx, dy, dzl, dzu;
        direction(tl, tu, dx, dy, dzl, dzu);
        const double a_aff = step_length(dx, dzl, dzu);
        double gap_aff = 0.0;
        for (int j = 0; j < n; ++j) {
            const auto k = static_cast<std::size_t>(j);
            if (has_l[k]) {
                gap_aff += (sl[j] + a_aff * dx[j]) * (zl[j] + a_aff * dzl[j]);
            }
            if (has_u[k]) {
                gap_aff += (su[j] - a_aff * dx[j]) * (zu[j] + a_aff * dzu[j]);
            }
        }
        const double sig = n_compl > 0 ? std::pow(gap_aff / gap, 3.0) : 0.0;
        for (int j = 0; j < n; ++j) {
            const auto k = static_cast<std::size_t>(j);
            tl[j] = has_l[k] ? sig * mu - sl[j] * zl[j] - dx[j] * dzl[j] : 0.0;
            tu[j] = has_u[k] ? sig * mu - su[j] * zu[j] + dx[j] * dzu[j] : 0.0;
        }
        direction(tl, tu, dx, dy, dzl, dzu);
        const double alpha = std::min(1.0, 0.995 * step_length(dx, dzl, dzu));
        x += alpha * dx;
        y += alpha * dy;
        zl += alpha * dzl;
        zu += alpha * dzu;
    }

    result.x.assign(x.data(), x.data() + n);
    result.objective = qp.objective(result.x);
    return result;
}

} // namespace peakopt::opt
