#include "silpose/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <thread>

#include "silpose/error.hpp"

namespace silpose {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double uniform(StreamRng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform01(); }

double normal(StreamRng& rng, double stddev) {
    if (stddev <= 0.0) return 0.0;
    std::normal_distribution<double> dist(0.0, stddev);
    return dist(rng);
}

// Fraction of [lo, lo + extent] inside [0, limit].
double axis_fraction(double lo, double extent, double limit) {
    if (extent <= 0.0) return (lo >= 0.0 && lo <= limit) ? 1.0 : 0.0;
    const double overlap = std::min(lo + extent, limit) - std::max(lo, 0.0);
    return std::clamp(overlap / extent, 0.0, 1.0);
}

}  // namespace

void FilterConfig::validate() const {
    if (particle_count < 1) throw ValidationError("particle_count must be >= 1");
    if (!(jitter.angle >= 0.0) || !(jitter.translation >= 0.0) || !(jitter.log_scale >= 0.0) ||
        !(jitter.articulation >= 0.0)) {
        throw ValidationError("jitter standard deviations must be >= 0");
    }
    if (!(scale_min > 0.0) || !(scale_max >= scale_min)) {
        throw ValidationError("scale bounds must satisfy 0 < scale_min <= scale_max");
    }
    if (image_width <= 0 || image_height <= 0) throw ValidationError("image size must be positive");
    if (workers < 1) throw ValidationError("workers must be >= 1");
}

void derive_bounds(FilterConfig& config, const TriangleMesh& mesh, int width, int height) {
    if (width <= 0 || height <= 0) throw ValidationError("image size must be positive");
    const double radius = mesh.radius();
    if (!(radius > 0.0)) throw ValidationError("mesh has zero extent");
    const double m = std::min(width, height);
    config.scale_min = 0.1 * m / (2.0 * std::numbers::sqrt2 * radius);
    config.scale_max = m / radius;
    config.image_width = width;
    config.image_height = height;
}

double visible_fraction(const BoundingBox2& box, int width, int height) {
    return axis_fraction(box.x0, box.width(), width) * axis_fraction(box.y0, box.height(), height);
}

double wrap_angle(double a) {
    double r = a - kTwoPi * std::floor((a + kPi) / kTwoPi);
    if (r >= kPi) r -= kTwoPi;
    if (r < -kPi) r += kTwoPi;
    return r;
}

ParticleSet init_particles(const FilterConfig& config, int width, int height,
                           const TriangleMesh& mesh) {
    config.validate();
    ParticleSet set;
    set.articulated = mesh.articulated();
    set.particles.resize(config.particle_count);
    const double m = std::min(width, height);
    const double weight = 1.0 / static_cast<double>(config.particle_count);

    for (std::size_t i = 0; i < config.particle_count; ++i) {
        StreamRng rng(config.rng_seed, StreamPurpose::init, 0, i);
        PoseParams pose;
        pose.yaw = uniform(rng, -kPi, kPi);
        pose.pitch = uniform(rng, -kPi, kPi);
        pose.roll = uniform(rng, -kPi, kPi);
        pose.articulation = set.articulated ? uniform(rng, -kPi, kPi) : 0.0;

        // The projection is linear in scale and translation, so the unit-scale
        // box fixes the legal scale interval for this orientation.
        pose.scale = 1.0;
        const auto unit_pts = project_vertices(mesh, pose);
        const auto unit_box = bounding_box(unit_pts);
        const double diag = unit_box.diagonal();
        const double lo = 0.1 * m / diag;
        const double hi = std::max(lo, std::min(m / diag, config.scale_max));
        pose.scale = uniform(rng, lo, hi);

        const BoundingBox2 box{pose.scale * unit_box.x0, pose.scale * unit_box.y0,
                               pose.scale * unit_box.x1, pose.scale * unit_box.y1};
        const double bw = box.width(), bh = box.height();
        // Each axis alone must keep half its extent inside; the product check
        // rejects the corners where both axes are only partly inside.
        bool placed = false;
        for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
            const double left = uniform(rng, -0.5 * bw, width - 0.5 * bw);
            const double top = uniform(rng, -0.5 * bh, height - 0.5 * bh);
            const BoundingBox2 moved{left, top, left + bw, top + bh};
            if (visible_fraction(moved, width, height) >= 0.5) {
                pose.tx = left - box.x0;
                pose.ty = top - box.y0;
                placed = true;
            }
        }
        if (!placed) {
            pose.tx = 0.5 * (width - bw) - box.x0;
            pose.ty = 0.5 * (height - bh) - box.y0;
        }
        set.particles[i] = {pose, weight, 0.0};
    }
    return set;
}

ParticleSet motion_step(ParticleSet set, const FilterConfig& config) {
    const auto& j = config.jitter;
    for (std::size_t i = 0; i < set.particles.size(); ++i) {
        StreamRng rng(config.rng_seed, StreamPurpose::motion, set.iteration, i);
        auto& s = set.particles[i].state;
        if (j.angle > 0.0) {
            s.yaw = wrap_angle(s.yaw + normal(rng, j.angle));
            s.pitch = wrap_angle(s.pitch + normal(rng, j.angle));
            s.roll = wrap_angle(s.roll + normal(rng, j.angle));
        }
        if (j.translation > 0.0) {
            s.tx += normal(rng, j.translation);
            s.ty += normal(rng, j.translation);
        }
        if (j.log_scale > 0.0) {
            s.scale = std::clamp(s.scale * std::exp(normal(rng, j.log_scale)), config.scale_min,
                                 config.scale_max);
        }
        if (set.articulated && j.articulation > 0.0) {
            s.articulation = wrap_angle(s.articulation + normal(rng, j.articulation));
        }
    }
    return set;
}

double log_likelihood(const SilhouetteMask& mask, const LogRatioCache& cache) {
    if (mask.width() != cache.width || mask.height() != cache.height) {
        throw ValidationError("mask is " + std::to_string(mask.width()) + "x" +
                              std::to_string(mask.height()) + " but the frame is " +
                              std::to_string(cache.width) + "x" + std::to_string(cache.height));
    }
    double sum = 0.0;
    const auto bits = mask.bits();
    for (int y = mask.fg_y0(); y < mask.fg_y1(); ++y) {
        const std::size_t row = static_cast<std::size_t>(y) * mask.width();
        for (int x = mask.fg_x0(); x < mask.fg_x1(); ++x) {
            if (bits[row + x]) sum += cache.ratio_image[row + x];
        }
    }
    return cache.log_bg_minus_total_sum + sum;
}

ParticleSet normalize_weights(ParticleSet set, std::span<const double> log_liks) {
    if (log_liks.size() != set.particles.size()) {
        throw ValidationError("normalize_weights: " + std::to_string(log_liks.size()) +
                              " log-likelihoods for " + std::to_string(set.particles.size()) +
                              " particles");
    }
    double max_ll = -std::numeric_limits<double>::infinity();
    for (double ll : log_liks) {
        if (std::isnan(ll)) throw Error("normalize_weights: NaN log-likelihood");
        max_ll = std::max(max_ll, ll);
    }
    if (!std::isfinite(max_ll)) throw Error("normalize_weights: no finite log-likelihood");

    double total = 0.0;
    for (std::size_t i = 0; i < log_liks.size(); ++i) {
        const double w = std::exp(log_liks[i] - max_ll);
        set.particles[i].weight = w;
        set.particles[i].log_likelihood = log_liks[i];
        total += w;
    }
    for (auto& p : set.particles) p.weight /= total;
    return set;
}

std::vector<double> cumulative_weights(const ParticleSet& set) {
    double total = 0.0;
    for (const auto& p : set.particles) total += p.weight;
    if (!(total > 0.0)) throw ValidationError("cumulative_weights: zero total weight");
    std::vector<double> c(set.particles.size() + 1, 0.0);
    for (std::size_t i = 0; i < set.particles.size(); ++i) {
        c[i + 1] = c[i] + set.particles[i].weight / total;
    }
    return c;
}

std::size_t select_index(std::span<const double> cumulative, double r) {
    const auto first = cumulative.begin() + 1;
    const auto it = std::lower_bound(first, cumulative.end(), r);
    // Rounding can leave the last entry a hair under 1.
    if (it == cumulative.end()) return cumulative.size() - 2;
    return static_cast<std::size_t>(it - first);
}

ParticleSet resample(const ParticleSet& set, StreamRng& rng) {
    if (set.particles.empty()) throw ValidationError("resample: empty particle set");
    const auto c = cumulative_weights(set);
    const std::size_t n = set.particles.size();
    ParticleSet out;
    out.iteration = set.iteration;
    out.articulated = set.articulated;
    out.particles.reserve(n);
    const double weight = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = 1.0 - rng.uniform01();  // (0, 1]
        Particle p = set.particles[select_index(c, r)];
        p.weight = weight;
        out.particles.push_back(p);
    }
    return out;
}

PoseParams expected_state(const ParticleSet& set) {
    double total = 0.0;
    for (const auto& p : set.particles) total += p.weight;
    if (!(total > 0.0)) throw ValidationError("expected_state: zero total weight");
    PoseParams mean;
    for (std::size_t f = 0; f < PoseParams::kFieldCount; ++f) {
        double acc = 0.0;
        for (const auto& p : set.particles) acc += p.weight * p.state[f];
        mean[f] = acc / total;
    }
    return mean;
}

std::size_t map_index(const ParticleSet& set) {
    if (set.particles.empty()) throw ValidationError("map_index: empty particle set");
    std::size_t best = 0;
    for (std::size_t i = 1; i < set.particles.size(); ++i) {
        if (set.particles[i].weight > set.particles[best].weight) best = i;
    }
    return best;
}

const Particle& map_particle(const ParticleSet& set) { return set.particles[map_index(set)]; }

Evaluator::Evaluator(unsigned workers) : workers_(std::max(1u, workers)) {}

double Evaluator::evaluate_one(const PoseParams& pose, const TriangleMesh& mesh,
                               const LogRatioCache& cache, SilhouetteMask& scratch) {
    if (scratch.width() != cache.width || scratch.height() != cache.height) {
        scratch = SilhouetteMask(cache.width, cache.height);
    }
    const auto tris = apply_pose(mesh, pose);
    rasterize_silhouette_into(tris, scratch);
    return log_likelihood(scratch, cache);
}

std::vector<double> Evaluator::evaluate(std::span<const Particle> particles,
                                        const TriangleMesh& mesh,
                                        const LogRatioCache& cache) const {
    std::vector<double> out(particles.size());
    auto run = [&](std::size_t begin, std::size_t end) {
        SilhouetteMask scratch(cache.width, cache.height);
        for (std::size_t i = begin; i < end; ++i) {
            out[i] = evaluate_one(particles[i].state, mesh, cache, scratch);
        }
    };

    const std::size_t n = particles.size();
    const std::size_t workers = std::min<std::size_t>(workers_, std::max<std::size_t>(n, 1));
    if (workers <= 1) {
        run(0, n);
        return out;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers - 1);
        for (std::size_t w = 1; w < workers; ++w) {
            const std::size_t begin = std::min(n, w * chunk);
            const std::size_t end = std::min(n, begin + chunk);
            pool.emplace_back(run, begin, end);
        }
        run(0, std::min(n, chunk));
    }
    return out;
}

ParticleSet filter_update(const ParticleSet& set, const Image& observed, const TriangleMesh& mesh,
                          const AppearanceModel& model, const FilterConfig& config) {
    if (observed.width != config.image_width || observed.height != config.image_height) {
        throw ValidationError("frame is " + std::to_string(observed.width) + "x" +
                              std::to_string(observed.height) + " but the filter expects " +
                              std::to_string(config.image_width) + "x" +
                              std::to_string(config.image_height));
    }
    StreamRng rng(config.rng_seed, StreamPurpose::resample, set.iteration, 0);
    ParticleSet next = resample(set, rng);
    next.iteration = set.iteration + 1;
    next = motion_step(std::move(next), config);

    const auto cache = build_cache(model, observed);
    const auto lls = Evaluator(config.workers).evaluate(next.particles, mesh, cache);
    return normalize_weights(std::move(next), lls);
}

}  // namespace silpose
