#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "sfcsim/scenario.hpp"
#include "sfcsim/scenario_io.hpp"

namespace sfcsim {

struct SweepRun {
  std::string value;
  std::optional<SimResult> result;
  std::string error;       // empty on success
  bool input_error = false;  // distinguishes bad values from numerical failures
};

// Worker count: the request (0 = hardware concurrency) capped by the
// RAIL_SIM_THREADS environment variable when it is set.
inline unsigned sweep_threads(unsigned requested = 0) {
  unsigned n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RAIL_SIM_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || cap < 1) throw InputError("RAIL_SIM_THREADS must be a positive integer");
    n = std::min(n, static_cast<unsigned>(cap));
  }
  return n;
}

// One independent run per value of `param_path`. Runs share nothing; results
// come back in the order of `values` whatever the thread count.
inline std::vector<SweepRun> run_sweep(const Scenario& base, const std::string& param_path,
                                       const std::vector<std::string>& values, unsigned threads = 0) {
  std::vector<SweepRun> runs(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) runs[k].value = values[k];

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t k = next++; k < runs.size(); k = next++) {
      try {
        runs[k].result = run(apply_override(base, param_path, values[k]));
      } catch (const InputError& e) {
        runs[k].error = e.what();
        runs[k].input_error = true;
      } catch (const std::exception& e) {
        runs[k].error = e.what();
      }
    }
  };

  const unsigned n = std::min<unsigned>(sweep_threads(threads), static_cast<unsigned>(std::max<std::size_t>(1, runs.size())));
  std::vector<std::jthread> pool;
  for (unsigned w = 1; w < n; ++w) pool.emplace_back(worker);
  worker();
  return runs;
}

}  // namespace sfcsim
