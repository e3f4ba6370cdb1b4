#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ounts/ou_nts.hpp"
#include "ounts/rng.hpp"

namespace ounts {

// Observation times t_0 = 0 < t_1 < ... < t_M in years.
struct PathGrid {
    std::vector<double> times;

    void validate() const;
    std::size_t size() const { return times.size(); }
    static PathGrid uniform(double dt, std::size_t steps);
    // 0 followed by the given fixing times (a single large first step).
    static PathGrid forward_start(const std::vector<double>& fixing_times);
};

// Precomputes one step plan per distinct step length and draws OU paths.
class OuPathSimulator {
public:
    OuPathSimulator(PathGrid grid, OuNtsParams params, Scheme scheme);

    // Fills out[0..grid.size()) with N(t_m); out[0] = n0.
    void simulate(RngStream& rng, std::span<double> out) const;

    const PathGrid& grid() const { return grid_; }
    const OuNtsParams& params() const { return params_; }
    Scheme scheme() const { return scheme_; }

    // Exact steps with 2 alpha b dt above this are split into substeps.
    static constexpr double kMaxStepExponent = 2.0;

private:
    struct StepPlan {
        StepDecomposition dec;  // of the substep
        double decay = 1.0;     // e^{-b dt} over the full step
        int substeps = 1;
        int skipped = 0;        // leading substeps whose weight underflows
    };
    double advance(RngStream& rng, const StepPlan& plan, double n) const;

    PathGrid grid_;
    OuNtsParams params_;
    Scheme scheme_;
    std::vector<StepPlan> plans_;              // distinct plans
    std::vector<std::size_t> plan_of_step_;    // per grid step
};

std::vector<double> simulate_path(RngStream& rng, const PathGrid& grid, const OuNtsParams& p,
                                  Scheme scheme);

// Runs body(i) for i in [0, n) on up to `threads` workers (0 = hardware
// concurrency). Each index is visited exactly once; callers write into
// per-index slots so results do not depend on scheduling.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

unsigned default_threads();

}  // namespace ounts
