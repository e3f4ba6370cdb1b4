#include "ounts/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "ounts/errors.hpp"

namespace ounts {

void PathGrid::validate() const {
    if (times.empty()) throw DomainError("path grid is empty");
    if (times.front() != 0.0) throw DomainError("path grid must start at t=0");
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1]) || !std::isfinite(times[i])) {
            std::ostringstream msg;
            msg << "path grid must be strictly increasing; t[" << i << "]=" << times[i]
                << " after t[" << i - 1 << "]=" << times[i - 1];
            throw DomainError(msg.str());
        }
    }
}

PathGrid PathGrid::uniform(double dt, std::size_t steps) {
    if (!(dt > 0.0)) throw DomainError("grid step must be positive");
    PathGrid g;
    g.times.resize(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) g.times[i] = dt * static_cast<double>(i);
    return g;
}

PathGrid PathGrid::forward_start(const std::vector<double>& fixing_times) {
    PathGrid g;
    g.times.reserve(fixing_times.size() + 1);
    g.times.push_back(0.0);
    for (double t : fixing_times) {
        if (t == 0.0 && g.times.size() == 1) continue;
        g.times.push_back(t);
    }
    g.validate();
    return g;
}

OuPathSimulator::OuPathSimulator(PathGrid grid, OuNtsParams params, Scheme scheme)
    : grid_(std::move(grid)), params_(params), scheme_(scheme) {
    grid_.validate();
    params_.validate();
    std::map<double, std::size_t> by_dt;
    const double alpha = params_.nts.alpha;
    const double b = params_.b;
    for (std::size_t m = 1; m < grid_.size(); ++m) {
        const double dt = grid_.times[m] - grid_.times[m - 1];
        auto it = by_dt.find(dt);
        if (it == by_dt.end()) {
            StepPlan plan;
            plan.decay = std::exp(-b * dt);
            const double exponent = 2.0 * alpha * b * dt;
            if (scheme_ == Scheme::exact && exponent > kMaxStepExponent) {
                plan.substeps = static_cast<int>(std::ceil(exponent / kMaxStepExponent));
                const double h = dt / plan.substeps;
                // a_h^j < 1e-300 once j b h > 690.8
                const double live = std::floor(690.8 / (b * h)) + 1.0;
                plan.skipped = std::max(0, plan.substeps - static_cast<int>(std::min(live, 1e9)));
                plan.dec = step_decomposition(h, params_);
            } else {
                plan.dec = step_decomposition(dt, params_);
            }
            it = by_dt.emplace(dt, plans_.size()).first;
            plans_.push_back(plan);
        }
        plan_of_step_.push_back(it->second);
    }
}

double OuPathSimulator::advance(RngStream& rng, const StepPlan& plan, double n) const {
    if (scheme_ != Scheme::exact) {
        return plan.decay * n + sample_increment_approx(rng, plan.dec, params_, scheme_);
    }
    if (plan.substeps == 1) return plan.decay * n + sample_increment_exact(rng, plan.dec, params_);
    double noise = 0.0;
    for (int j = plan.skipped; j < plan.substeps; ++j) {
        noise = plan.dec.a * noise + sample_increment_exact(rng, plan.dec, params_);
    }
    return plan.decay * n + noise;
}

void OuPathSimulator::simulate(RngStream& rng, std::span<double> out) const {
    if (out.size() != grid_.size()) throw DomainError("output span does not match the grid");
    double n = params_.n0;
    out[0] = n;
    for (std::size_t m = 1; m < grid_.size(); ++m) {
        n = advance(rng, plans_[plan_of_step_[m - 1]], n);
        out[m] = n;
    }
}

std::vector<double> simulate_path(RngStream& rng, const PathGrid& grid, const OuNtsParams& p,
                                  Scheme scheme) {
    OuPathSimulator sim(grid, p, scheme);
    std::vector<double> out(grid.size());
    sim.simulate(rng, out);
    return out;
}

unsigned default_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
    if (threads == 0) threads = default_threads();
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    constexpr std::size_t kChunk = 256;
    auto worker = [&] {
        for (;;) {
            const std::size_t begin = next.fetch_add(kChunk);
            if (begin >= n) return;
            const std::size_t end = std::min(n, begin + kChunk);
            try {
                for (std::size_t i = begin; i < end; ++i) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace ounts
