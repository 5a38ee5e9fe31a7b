#include "frontier/instrumentation.hpp"

namespace frontier {

SolveCounters& solve_counters() {
  thread_local SolveCounters counters;
  return counters;
}

}  // namespace frontier
