#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "silpose/appearance.hpp"
#include "silpose/geometry.hpp"
#include "silpose/io.hpp"

namespace silpose {

/// Silhouette of trajectory[frame_index]; the ground-truth mask.
SilhouetteMask ground_truth_mask(const SceneSpec& spec, const TriangleMesh& mesh,
                                 std::size_t frame_index);

/// Foreground pixels ~ round(N(fg_mean, fg_std)), background pixels ~
/// round(N(bg_mean, bg_std)), both clamped to [0, 255]. Deterministic in
/// (noise_seed, frame_index). Throws ValidationError if the index is out of
/// range.
Image render_frame(const SceneSpec& spec, const TriangleMesh& mesh, std::size_t frame_index);

/// Object-free frames for background learning, deterministic in noise_seed.
std::vector<Image> render_background_frames(const SceneSpec& spec, std::size_t count);

/// Writes frames/, masks/, background/ and ground_truth.txt under `out_dir`.
void write_scene(const SceneSpec& spec, const TriangleMesh& mesh, const std::filesystem::path& out_dir);

/// 0 / 255 image of a mask.
Image mask_image(const SilhouetteMask& mask);

}  // namespace silpose
