#include "silpose/bench.hpp"

#include <chrono>
#include <cstring>

#include "silpose/error.hpp"

namespace silpose {

std::vector<BenchRow> benchmark_evaluation(std::span<const Particle> particles,
                                           const TriangleMesh& mesh, const LogRatioCache& cache,
                                           std::span<const unsigned> worker_counts,
                                           double min_seconds) {
    if (worker_counts.empty()) throw ValidationError("benchmark: empty worker list");
    if (particles.empty()) throw ValidationError("benchmark: empty particle batch");
    using clock = std::chrono::steady_clock;

    std::vector<BenchRow> rows;
    std::vector<double> reference;
    for (unsigned workers : worker_counts) {
        if (workers < 1) throw ValidationError("benchmark: worker count must be >= 1");
        const Evaluator eval(workers);
        auto lls = eval.evaluate(particles, mesh, cache);  // warm-up

        std::size_t evaluated = 0;
        const auto start = clock::now();
        double elapsed = 0.0;
        do {
            lls = eval.evaluate(particles, mesh, cache);
            evaluated += particles.size();
            elapsed = std::chrono::duration<double>(clock::now() - start).count();
        } while (elapsed < min_seconds);

        BenchRow row;
        row.workers = workers;
        row.particles_per_second = static_cast<double>(evaluated) / elapsed;
        if (reference.empty()) {
            reference = lls;
        } else {
            row.identical = std::memcmp(reference.data(), lls.data(), lls.size() * sizeof(double)) == 0;
        }
        row.speedup = rows.empty() ? 1.0 : row.particles_per_second / rows.front().particles_per_second;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace silpose
