#include "silpose/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "silpose/error.hpp"
#include "silpose/rng.hpp"

namespace silpose {

namespace {

std::uint8_t noisy_pixel(StreamRng& rng, double mean, double stddev) {
    double v = mean;
    if (stddev > 0.0) {
        std::normal_distribution<double> dist(mean, stddev);
        v = dist(rng);
    }
    return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
}

std::string numbered(const char* prefix, std::size_t k) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%04zu.pgm", prefix, k);
    return buf;
}

}  // namespace

SilhouetteMask ground_truth_mask(const SceneSpec& spec, const TriangleMesh& mesh,
                                 std::size_t frame_index) {
    if (frame_index >= spec.trajectory.size()) {
        throw ValidationError("frame index " + std::to_string(frame_index) + " out of range (" +
                              std::to_string(spec.trajectory.size()) + " frames)");
    }
    const auto tris = apply_pose(mesh, spec.trajectory[frame_index]);
    return rasterize_silhouette(tris, spec.width, spec.height);
}

Image render_frame(const SceneSpec& spec, const TriangleMesh& mesh, std::size_t frame_index) {
    const auto mask = ground_truth_mask(spec, mesh, frame_index);
    StreamRng rng(spec.noise_seed, StreamPurpose::foreground_noise, frame_index, 0);
    Image img(spec.width, spec.height);
    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
            img.at(x, y) = mask.at(x, y)
                               ? noisy_pixel(rng, spec.foreground_mean, spec.foreground_std)
                               : noisy_pixel(rng, spec.background_mean, spec.background_std);
        }
    }
    return img;
}

std::vector<Image> render_background_frames(const SceneSpec& spec, std::size_t count) {
    if (count < 1) throw ValidationError("render_background_frames: count must be >= 1");
    std::vector<Image> frames;
    frames.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        StreamRng rng(spec.noise_seed, StreamPurpose::background_noise, k, 0);
        Image img(spec.width, spec.height);
        for (auto& p : img.pixels) p = noisy_pixel(rng, spec.background_mean, spec.background_std);
        frames.push_back(std::move(img));
    }
    return frames;
}

Image mask_image(const SilhouetteMask& mask) {
    Image img(mask.width(), mask.height());
    const auto bits = mask.bits();
    for (std::size_t i = 0; i < bits.size(); ++i) img.pixels[i] = bits[i] ? 255 : 0;
    return img;
}

void write_scene(const SceneSpec& spec, const TriangleMesh& mesh, const std::filesystem::path& out_dir) {
    spec.validate();
    namespace fs = std::filesystem;
    for (const char* sub : {"frames", "masks", "background"}) fs::create_directories(out_dir / sub);

    for (std::size_t k = 0; k < spec.trajectory.size(); ++k) {
        write_pgm(render_frame(spec, mesh, k), out_dir / "frames" / numbered("frame", k));
        write_pgm(mask_image(ground_truth_mask(spec, mesh, k)), out_dir / "masks" / numbered("mask", k));
    }
    const auto bg = render_background_frames(spec, spec.background_frame_count);
    for (std::size_t k = 0; k < bg.size(); ++k) {
        write_pgm(bg[k], out_dir / "background" / numbered("bg", k));
    }
    write_ground_truth(spec.trajectory, out_dir / "ground_truth.txt");
}

}  // namespace silpose
