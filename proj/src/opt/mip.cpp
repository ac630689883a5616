#include "peakopt/opt/mip.hpp"

#include "peakopt/errors.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace peakopt::opt {

using sched::Activity;
using sched::Instance;
using sched::Schedule;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kIntTol = 1e-7;

int peak_periods(const Instance& inst, const Activity& a, int start)
{
    int count = 0;
    for (const auto& iv : sched::occurrences(inst, a, start)) {
        for (int t = iv.begin; t < iv.end; ++t) {
            count += inst.calendar.is_peak(t) ? 1 : 0;
        }
    }
    return count;
}

std::string var_name(const Activity& a, int s)
{
    return a.id + "@" + std::to_string(s);
}

// One row per period where the candidates could overflow the capacity left.
void add_room_rows(MipProblem& p, const Instance& inst, const std::vector<std::vector<std::pair<int, double>>>& cover,
                   const std::vector<int>& used)
{
    for (std::size_t t = 0; t < cover.size(); ++t) {
        if (cover[t].empty()) {
            continue;
        }
        double demand = 0.0;
        for (const auto& term : cover[t]) {
            demand += term.second;
        }
        const double capacity = inst.n_rooms_total - used[t];
        if (demand > capacity) {
            p.lp.add_row("rooms[" + std::to_string(t) + "]", cover[t], -kInf, capacity);
        }
    }
}

} // namespace

bool IncumbentPool::offer(Schedule s, double objective)
{
    if (!entries_.empty() && !(objective < entries_.back().objective)) {
        return false;
    }
    entries_.push_back({std::move(s), objective});
    return true;
}

std::string to_string(MipStatus s)
{
    switch (s) {
    case MipStatus::optimal: return "optimal";
    case MipStatus::feasible: return "feasible";
    case MipStatus::infeasible: return "infeasible";
    case MipStatus::node_limit: return "node_limit";
    }
    return "?";
}

MipProblem build_recurring_mip(const Instance& inst)
{
    MipProblem p;
    p.base = sched::empty_schedule(inst);
    const int window = inst.recurrence_window();
    std::vector<std::vector<std::pair<int, double>>> cover(static_cast<std::size_t>(window));
    std::map<std::string, std::vector<int>, std::less<>> vars_of;

    for (const auto& a : inst.activities) {
        if (!a.recurring()) {
            continue;
        }
        std::vector<std::pair<int, double>> assign;
        for (const int s : sched::admissible_starts(inst, a)) {
            const int j = p.lp.add_variable(var_name(a, s), a.load() * peak_periods(inst, a, s), 0.0, 1.0);
            p.vars.push_back({a.id, s});
            vars_of[a.id].push_back(j);
            assign.emplace_back(j, 1.0);
            for (int t = s; t < s + a.duration; ++t) {
                cover[static_cast<std::size_t>(t)].emplace_back(j, a.n_rooms);
            }
        }
        p.lp.add_row("assign[" + a.id + "]", std::move(assign), 1.0, 1.0);
    }
    add_room_rows(p, inst, cover, std::vector<int>(cover.size(), 0));

    for (const auto& pr : inst.precedences) {
        const auto& before = inst.activities[static_cast<std::size_t>(inst.activity_index(pr.before))];
        if (!before.recurring()) {
            continue;
        }
        std::vector<std::pair<int, double>> terms;
        for (const int j : vars_of[pr.after]) {
            terms.emplace_back(j, p.vars[static_cast<std::size_t>(j)].start);
        }
        for (const int j : vars_of[pr.before]) {
            terms.emplace_back(j, -(p.vars[static_cast<std::size_t>(j)].start + before.duration));
        }
        p.lp.add_row("prec[" + pr.before + "<" + pr.after + "]", std::move(terms), 0.0, kInf);
    }
    return p;
}

MipProblem extend_once_off(const Instance& inst, const Schedule& base)
{
    MipProblem p;
    p.base = base;
    const auto n = static_cast<std::size_t>(inst.n_periods());
    std::vector<int> used(n, 0);
    for (const auto& [id, start] : base.starts) {
        const int k = inst.activity_index(id);
        if (k < 0) {
            throw ContractError("base schedule names unknown activity " + id);
        }
        const auto& a = inst.activities[static_cast<std::size_t>(k)];
        if (!a.recurring()) {
            throw ContractError("base schedule must hold recurring activities only");
        }
        for (const auto& iv : sched::occurrences(inst, a, start)) {
            for (int t = iv.begin; t < iv.end; ++t) {
                used[static_cast<std::size_t>(t)] += a.n_rooms;
            }
        }
    }

    struct Candidate {
        const Activity* a;
        std::vector<int> starts;
    };
    std::vector<Candidate> cands;
    double secondary_bound = 0.0;
    for (const auto& a : inst.activities) {
        if (a.recurring()) {
            continue;
        }
        Candidate c{&a, {}};
        for (const int s : sched::admissible_starts(inst, a)) {
            if (sched::runs_in_peak(inst, a, s)) {
                c.starts.push_back(s);
            }
        }
        if (!c.starts.empty()) {
            secondary_bound += a.load() * a.duration;
        }
        cands.push_back(std::move(c));
    }
    const double weight = 1.0 + secondary_bound;

    std::vector<std::vector<std::pair<int, double>>> cover(n);
    std::map<std::string, std::vector<int>, std::less<>> vars_of;
    for (const auto& c : cands) {
        const Activity& a = *c.a;
        std::vector<std::pair<int, double>> once;
        for (const int s : c.starts) {
            const int j = p.lp.add_variable(var_name(a, s), -weight * a.value + a.load() * peak_periods(inst, a, s),
                                            0.0, 1.0);
            p.vars.push_back({a.id, s});
            vars_of[a.id].push_back(j);
            once.emplace_back(j, 1.0);
            for (int t = s; t < s + a.duration; ++t) {
                cover[static_cast<std::size_t>(t)].emplace_back(j, a.n_rooms);
            }
        }
        if (!once.empty()) {
            p.lp.add_row("once[" + a.id + "]", std::move(once), -kInf, 1.0);
        }
    }
    add_room_rows(p, inst, cover, used);

    for (const auto& pr : inst.precedences) {
        const auto& before = inst.activities[static_cast<std::size_t>(inst.activity_index(pr.before))];
        if (before.recurring()) {
            continue;
        }
        for (const int j : vars_of[pr.after]) {
            const int s = p.vars[static_cast<std::size_t>(j)].start;
            std::vector<std::pair<int, double>> terms{{j, 1.0}};
            for (const int i : vars_of[pr.before]) {
                if (p.vars[static_cast<std::size_t>(i)].start + before.duration <= s) {
                    terms.emplace_back(i, -1.0);
                }
            }
            p.lp.add_row("prec[" + pr.before + "<" + pr.after + "@" + std::to_string(s) + "]", std::move(terms), -kInf,
                         0.0);
        }
    }
    return p;
}

Schedule decode(const MipProblem& problem, const std::vector<double>& x)
{
    Schedule s = problem.base;
    for (std::size_t j = 0; j < problem.vars.size(); ++j) {
        if (x[j] > 0.5) {
            s.starts[problem.vars[j].activity] = problem.vars[j].start;
        }
    }
    return s;
}

MipResult solve_mip(const MipProblem& problem, const MipOptions& options)
{
    const auto& lp = problem.lp;
    const int n = lp.n_variables();
    MipResult result;

    struct Node {
        DualSimplex lp;
    };
    std::vector<Node> stack;
    stack.push_back({DualSimplex(lp)});

    bool have = false;
    double incumbent = kInf;
    bool exhausted = true;
    while (!stack.empty()) {
        if (result.nodes >= options.node_limit) {
            exhausted = false;
            break;
        }
        Node node = std::move(stack.back());
        stack.pop_back();
        ++result.nodes;

        const LpStatus st = node.lp.solve();
        if (st == LpStatus::iteration_limit) {
            throw ContractError("LP relaxation hit its iteration limit");
        }
        if (st == LpStatus::infeasible) {
            if (result.nodes == 1) {
                std::string names;
                for (const int r : node.lp.conflict_rows()) {
                    names += (names.empty() ? "" : ", ") + lp.rows[static_cast<std::size_t>(r)].name;
                }
                result.certificate = "LP relaxation infeasible; conflicting constraints: " + names;
            }
            continue;
        }
        const double bound = node.lp.objective();
        if (have && bound >= incumbent - 1e-9 * (1.0 + std::abs(incumbent))) {
            continue;
        }

        int branch = -1;
        double most = kIntTol;
        for (int j = 0; j < n; ++j) {
            const double v = node.lp.value(j);
            const double f = v - std::floor(v);
            const double frac = std::min(f, 1.0 - f);
            if (frac > most) {
                most = frac;
                branch = j;
            }
        }

        if (branch < 0) {
            std::vector<double> x(static_cast<std::size_t>(n));
            double obj = 0.0;
            for (int j = 0; j < n; ++j) {
                x[static_cast<std::size_t>(j)] = std::round(node.lp.value(j));
                obj += lp.cost[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
            }
            bool feasible = true;
            for (const auto& row : lp.rows) {
                double act = 0.0;
                for (const auto& [j, a] : row.terms) {
                    act += a * x[static_cast<std::size_t>(j)];
                }
                feasible = feasible && act >= row.lower - 1e-9 && act <= row.upper + 1e-9;
            }
            if (feasible && (!have || obj < incumbent)) {
                have = true;
                incumbent = obj;
                result.pool.offer(decode(problem, x), obj);
            }
            continue;
        }

        const double v = node.lp.value(branch);
        Node down{node.lp};
        down.lp.set_bounds(branch, down.lp.lower(branch), std::floor(v));
        node.lp.set_bounds(branch, std::ceil(v), node.lp.upper(branch));
        stack.push_back(std::move(down));
        stack.push_back(std::move(node));
    }

    if (have) {
        result.status = exhausted ? MipStatus::optimal : MipStatus::feasible;
        result.schedule = result.pool.best().schedule;
        result.objective = result.pool.best().objective;
    } else if (exhausted) {
        result.status = MipStatus::infeasible;
        if (result.certificate.empty()) {
            result.certificate = "search tree exhausted after " + std::to_string(result.nodes)
                                 + " nodes without an integer solution";
        }
    } else {
        result.status = MipStatus::node_limit;
        result.certificate = "node limit reached before an integer solution was found";
    }
    return result;
}

} // namespace peakopt::opt
