#pragma once

#include <span>
#include <vector>

#include "silpose/filter.hpp"

namespace silpose {

struct BenchRow {
    unsigned workers = 1;
    double particles_per_second = 0.0;
    double speedup = 1.0;  // relative to the first row
    bool identical = true; // log-likelihoods bit-identical to the first row
};

/// Times Evaluator::evaluate on a fixed batch for each worker count. Each
/// count is repeated until `min_seconds` of wall time has elapsed.
std::vector<BenchRow> benchmark_evaluation(std::span<const Particle> particles,
                                           const TriangleMesh& mesh, const LogRatioCache& cache,
                                           std::span<const unsigned> worker_counts,
                                           double min_seconds = 0.5);

}  // namespace silpose
