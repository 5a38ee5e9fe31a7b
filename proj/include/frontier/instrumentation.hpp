#pragma once

namespace frontier {

/// Per-thread tallies of the expensive subproblem solves.
struct SolveCounters {
  long prox_solves = 0;
  long min_variance_solves = 0;
  long mean_std_solves = 0;
};

SolveCounters& solve_counters();
inline void reset_solve_counters() { solve_counters() = SolveCounters{}; }

}  // namespace frontier
