#pragma once

#include "peakopt/opt/lp.hpp"
#include "peakopt/sched/model.hpp"

#include <string>
#include <vector>

namespace peakopt::opt {

/// Binary x[activity, start] of the array formulation.
struct StartVar {
    std::string activity;
    int start = 0;
};

struct MipProblem {
    LinearProgram lp;         // every variable binary
    std::vector<StartVar> vars; // parallel to lp variables
    sched::Schedule base;     // fixed part; decoded solutions extend it
};

struct PoolEntry {
    sched::Schedule schedule;
    double objective = 0.0;
};

/// Incumbents in the order found; objectives strictly decrease.
class IncumbentPool {
public:
    /// Appends when the objective improves on the last entry; returns
    /// whether it was appended.
    bool offer(sched::Schedule s, double objective);
    const std::vector<PoolEntry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    const PoolEntry& best() const { return entries_.back(); }

private:
    std::vector<PoolEntry> entries_;
};

/// Recurring activities only: one start per activity (first-week starts
/// repeat weekly), room limits, precedences as start(after) >= end(before).
/// Objective: activity load summed over the peak periods it occupies.
MipProblem build_recurring_mip(const sched::Instance& inst);

/// Recurring starts fixed to `base`; once-off activities may take one start
/// whose whole run is in peak. Objective -W * value + added peak load with
/// W = 1 + the largest possible added peak load, so realised value ranks
/// first.
MipProblem extend_once_off(const sched::Instance& inst, const sched::Schedule& base);

enum class MipStatus { optimal, feasible, infeasible, node_limit };

std::string to_string(MipStatus s);

struct MipOptions {
    long node_limit = 200000;
};

struct MipResult {
    MipStatus status = MipStatus::infeasible;
    sched::Schedule schedule; // best incumbent when one exists
    double objective = 0.0;
    IncumbentPool pool;
    long nodes = 0;
    std::string certificate; // why no solution was found
};

/// Depth-first branch-and-bound with LP bounds. Branches on the most
/// fractional variable (lowest index on ties), up branch first.
MipResult solve_mip(const MipProblem& problem, const MipOptions& options = {});

/// Base schedule plus the starts selected by a 0/1 vector.
sched::Schedule decode(const MipProblem& problem, const std::vector<double>& x);

} // namespace peakopt::opt
