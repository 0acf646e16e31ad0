#include "silpose/appearance.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "silpose/error.hpp"

namespace silpose {

namespace {

void accumulate(const Image& img, std::array<std::uint64_t, kIntensityLevels>& counts) {
    for (auto p : img.pixels) ++counts[p];
}

}  // namespace

IntensityHistogram IntensityHistogram::from_counts(
    std::span<const std::uint64_t, kIntensityLevels> counts, double eps) {
    const double n = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
    if (n <= 0.0) throw ValidationError("histogram of zero pixels");
    const double pad = eps * n / static_cast<double>(kIntensityLevels);
    const double denom = n + eps * n;
    IntensityHistogram h;
    for (std::size_t v = 0; v < kIntensityLevels; ++v) {
        h.bins[v] = (static_cast<double>(counts[v]) + pad) / denom;
    }
    return h;
}

IntensityHistogram learn_background(std::span<const Image> frames, double eps) {
    if (frames.empty()) throw ValidationError("learn_background: no frames given");
    std::array<std::uint64_t, kIntensityLevels> counts{};
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (frames[i].empty()) {
            throw ValidationError("learn_background: frame " + std::to_string(i) + " is empty");
        }
        accumulate(frames[i], counts);
    }
    return IntensityHistogram::from_counts(counts, eps);
}

IntensityHistogram uniform_foreground() {
    IntensityHistogram h;
    h.bins.fill(1.0 / static_cast<double>(kIntensityLevels));
    return h;
}

IntensityHistogram total_histogram(const Image& observed, double eps) {
    if (observed.empty()) throw ValidationError("total_histogram: empty image");
    std::array<std::uint64_t, kIntensityLevels> counts{};
    accumulate(observed, counts);
    return IntensityHistogram::from_counts(counts, eps);
}

AppearanceModel make_model(const IntensityHistogram& background, const Image& observed) {
    return {background, uniform_foreground(), total_histogram(observed)};
}

LogRatioCache build_cache(const AppearanceModel& model, const Image& observed) {
    // Per-intensity tables; each pixel then costs one lookup.
    std::array<double, kIntensityLevels> ratio{};
    std::array<double, kIntensityLevels> bg_minus_total{};
    for (std::size_t v = 0; v < kIntensityLevels; ++v) {
        const double lbg = std::log(model.background.bins[v]);
        ratio[v] = std::log(model.foreground.bins[v]) - lbg;
        bg_minus_total[v] = lbg - std::log(model.total.bins[v]);
    }

    LogRatioCache cache;
    cache.width = observed.width;
    cache.height = observed.height;
    cache.ratio_image.resize(observed.pixels.size());

    // Summing counts times table entries keeps the constant independent of
    // pixel order.
    std::array<std::uint64_t, kIntensityLevels> counts{};
    for (std::size_t i = 0; i < observed.pixels.size(); ++i) {
        const auto v = observed.pixels[i];
        cache.ratio_image[i] = ratio[v];
        ++counts[v];
    }
    double sum = 0.0;
    for (std::size_t v = 0; v < kIntensityLevels; ++v) {
        if (counts[v]) sum += static_cast<double>(counts[v]) * bg_minus_total[v];
    }
    cache.log_bg_minus_total_sum = sum;
    return cache;
}

void validate_histogram(const IntensityHistogram& h, double eps) {
    double sum = 0.0;
    // The smallest legal bin is eps/256/(1+eps).
    const double floor = eps / static_cast<double>(kIntensityLevels) / (1.0 + eps);
    for (std::size_t v = 0; v < kIntensityLevels; ++v) {
        const double b = h.bins[v];
        if (!std::isfinite(b) || b < floor * (1.0 - 1e-9)) {
            throw ValidationError("histogram bin " + std::to_string(v) + " below floor: " +
                                  std::to_string(b));
        }
        sum += b;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ValidationError("histogram bins sum to " + std::to_string(sum) + ", expected 1");
    }
}

}  // namespace silpose
