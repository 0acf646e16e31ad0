#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "silpose/appearance.hpp"
#include "silpose/geometry.hpp"
#include "silpose/rng.hpp"

namespace silpose {

/// Standard deviations of the jitter motion model.
struct JitterStd {
    double angle = 0.05;         // radians
    double translation = 2.0;    // pixels
    double log_scale = 0.05;     // scale is multiplied by exp(N(0, log_scale))
    double articulation = 0.05;  // radians

    friend bool operator==(const JitterStd&, const JitterStd&) = default;
};

struct FilterConfig {
    std::size_t particle_count = 1000;
    JitterStd jitter;
    // Scale is clamped to this range after each jitter. See derive_bounds().
    double scale_min = 0.0;
    double scale_max = 0.0;
    // Image the object must overlap by at least half at initialization.
    int image_width = 0;
    int image_height = 0;
    std::uint64_t rng_seed = 0;
    unsigned workers = 1;

    /// Throws ValidationError when a field is out of range.
    void validate() const;
};

/// Fills scale and image bounds for `mesh` observed in a w x h image.
///
/// The smallest legal scale makes the largest possible projected box
/// diagonal (2*sqrt(2)*radius) a tenth of min(w, h); the largest makes the
/// mesh radius span min(w, h).
void derive_bounds(FilterConfig& config, const TriangleMesh& mesh, int width, int height);

struct Particle {
    PoseParams state;
    double weight = 0.0;
    double log_likelihood = 0.0;
};

struct ParticleSet {
    std::vector<Particle> particles;
    std::uint64_t iteration = 0;
    bool articulated = false;

    std::size_t size() const noexcept { return particles.size(); }
};

/// Fraction of `box` that lies inside [0, w] x [0, h]. A zero-extent axis
/// counts as fully inside when its coordinate is within the image.
double visible_fraction(const BoundingBox2& box, int width, int height);

/// Bounded uniform prior. Angles in [-pi, pi); scale so that the projected
/// box diagonal lies in [0.1, 1] * min(w, h); translation so that at least
/// half the projected box is inside the image.
ParticleSet init_particles(const FilterConfig& config, int width, int height,
                           const TriangleMesh& mesh);

/// Wraps an angle into [-pi, pi).
double wrap_angle(double a);

/// Independent jitter per particle, drawn from the stream keyed by
/// (rng_seed, iteration, particle index). Weights are unchanged.
ParticleSet motion_step(ParticleSet set, const FilterConfig& config);

/// All-background constant plus the cached ratios of every foreground pixel.
/// Throws ValidationError on a dimension mismatch.
double log_likelihood(const SilhouetteMask& mask, const LogRatioCache& cache);

/// Log-sum-exp normalized weights. Also stores each log-likelihood on its
/// particle.
ParticleSet normalize_weights(ParticleSet set, std::span<const double> log_liks);

/// Cumulative probabilities c[0] = 0, c[i] = c[i-1] + w[i-1] / sum(w).
std::vector<double> cumulative_weights(const ParticleSet& set);

/// Smallest j >= 1 with cumulative[j] >= r, returned as the particle index
/// j - 1.
std::size_t select_index(std::span<const double> cumulative, double r);

/// Multinomial resampling through the cumulative distribution. Output weights
/// are 1/N.
ParticleSet resample(const ParticleSet& set, StreamRng& rng);

/// Weighted arithmetic mean of every field, angles included.
PoseParams expected_state(const ParticleSet& set);

/// Index of the highest-weight particle, lowest index on ties.
std::size_t map_index(const ParticleSet& set);
const Particle& map_particle(const ParticleSet& set);

/// Evaluates particle likelihoods against one frame cache, split over a
/// fixed number of worker threads. Results are in particle order and do not
/// depend on the worker count.
class Evaluator {
public:
    explicit Evaluator(unsigned workers = 1);

    unsigned workers() const noexcept { return workers_; }

    std::vector<double> evaluate(std::span<const Particle> particles, const TriangleMesh& mesh,
                                 const LogRatioCache& cache) const;

    /// Single-particle path: apply_pose, rasterize, log_likelihood.
    static double evaluate_one(const PoseParams& pose, const TriangleMesh& mesh,
                               const LogRatioCache& cache, SilhouetteMask& scratch);

private:
    unsigned workers_;
};

/// One update: resample, jitter, cache the frame, evaluate, normalize.
/// `model.total` must be the histogram of `observed` (see make_model).
ParticleSet filter_update(const ParticleSet& set, const Image& observed, const TriangleMesh& mesh,
                          const AppearanceModel& model, const FilterConfig& config);

}  // namespace silpose
