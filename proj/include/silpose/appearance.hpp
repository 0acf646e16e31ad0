#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace silpose {

/// 8-bit single-channel image, row-major.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    Image() = default;
    Image(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    bool empty() const noexcept { return pixels.empty(); }

    friend bool operator==(const Image&, const Image&) = default;
};

/// Additive floor: a fraction kHistogramFloor of the total mass is spread
/// evenly over the 256 bins so that no bin is zero.
inline constexpr double kHistogramFloor = 1e-6;
inline constexpr std::size_t kIntensityLevels = 256;

/// Probability over 8-bit intensities. Every bin >= floor, bins sum to 1.
struct IntensityHistogram {
    std::array<double, kIntensityLevels> bins{};

    double operator[](std::uint8_t v) const { return bins[v]; }

    /// Builds the smoothed histogram from raw counts over `total` pixels:
    /// bin[v] = (count[v] + eps*N/256) / (N + eps*N).
    static IntensityHistogram from_counts(std::span<const std::uint64_t, kIntensityLevels> counts,
                                          double eps = kHistogramFloor);

    friend bool operator==(const IntensityHistogram&, const IntensityHistogram&) = default;
};

struct AppearanceModel {
    IntensityHistogram background;
    IntensityHistogram foreground;
    IntensityHistogram total;
};

/// Per-frame cache. `log_bg_minus_total_sum` is the log of the all-background
/// factor; `ratio_image` holds log(fg/bg) per pixel.
struct LogRatioCache {
    int width = 0;
    int height = 0;
    double log_bg_minus_total_sum = 0.0;
    std::vector<double> ratio_image;

    double ratio(int x, int y) const { return ratio_image[static_cast<std::size_t>(y) * width + x]; }
};

/// Pools every pixel of every frame. Throws ValidationError on an empty list
/// or an empty frame.
IntensityHistogram learn_background(std::span<const Image> frames, double eps = kHistogramFloor);

IntensityHistogram uniform_foreground();

IntensityHistogram total_histogram(const Image& observed, double eps = kHistogramFloor);

/// Convenience: background + uniform foreground + total of `observed`.
AppearanceModel make_model(const IntensityHistogram& background, const Image& observed);

LogRatioCache build_cache(const AppearanceModel& model, const Image& observed);

/// Throws ValidationError when the histogram breaks its invariants.
void validate_histogram(const IntensityHistogram& h, double eps = kHistogramFloor);

}  // namespace silpose
