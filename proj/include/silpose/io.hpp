#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "silpose/appearance.hpp"
#include "silpose/filter.hpp"
#include "silpose/geometry.hpp"

namespace silpose {

namespace fs = std::filesystem;

// Meshes ---------------------------------------------------------------------

/// Line-oriented mesh text. See docs/formats.md.
TriangleMesh parse_mesh(std::istream& in, const std::string& source = "<mesh>");
TriangleMesh load_mesh(const fs::path& path);

// Images ---------------------------------------------------------------------

/// Reads binary P5 (maxval 255). Binary P6 is accepted and reduced to
/// luminance round(0.299 R + 0.587 G + 0.114 B).
Image read_pgm(const fs::path& path);
Image parse_pnm(std::istream& in, const std::string& source = "<image>");
void write_pgm(const Image& image, const fs::path& path);

/// Sorted (lexicographic) list of *.pgm files in `dir`.
std::vector<fs::path> list_pgm_files(const fs::path& dir);

// Background histogram -------------------------------------------------------

inline constexpr const char* kHistogramHeader = "BGHIST v1";

void write_histogram(const IntensityHistogram& hist, const fs::path& path);
IntensityHistogram read_histogram(const fs::path& path);

// Run configuration ----------------------------------------------------------

struct RunConfig {
    fs::path mesh;
    std::optional<fs::path> background_hist;
    std::optional<fs::path> background_frames;
    fs::path frames;
    fs::path out = "run";
    std::size_t particle_count = 1000;
    JitterStd jitter;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    bool dump_overlays = false;
};

/// Flat `key = value` text. Relative paths resolve against the file's
/// directory. Unknown keys, duplicates and missing required keys are errors.
RunConfig parse_config(std::istream& in, const fs::path& base_dir,
                       const std::string& source = "<config>");
RunConfig read_config(const fs::path& path);

/// Throws IoError naming the first referenced path that does not exist.
void check_paths(const RunConfig& config);

// Synthetic scenes -----------------------------------------------------------

struct SceneSpec {
    fs::path mesh_path;
    std::vector<PoseParams> trajectory;
    int width = 0;
    int height = 0;
    double background_mean = 30.0;
    double background_std = 10.0;
    double foreground_mean = 180.0;
    double foreground_std = 10.0;
    std::uint64_t noise_seed = 0;
    std::size_t background_frame_count = 8;

    /// Throws ValidationError when an invariant is broken.
    void validate() const;
};

/// Keys: mesh, width, height, background_mean, background_std,
/// foreground_mean, foreground_std, noise_seed, background_frames,
/// frame_count, and one or more `pose = yaw pitch roll tx ty scale artic`.
SceneSpec parse_scene(std::istream& in, const fs::path& base_dir,
                      const std::string& source = "<scene>");
SceneSpec read_scene(const fs::path& path);

/// One line per frame: `k yaw pitch roll tx ty scale articulation`.
void write_ground_truth(const std::vector<PoseParams>& trajectory, const fs::path& path);
std::vector<PoseParams> read_ground_truth(const fs::path& path);

// Track results --------------------------------------------------------------

struct TrackRow {
    std::size_t frame = 0;
    PoseParams expected;
    PoseParams map;
    double map_log_likelihood = 0.0;
};

/// CSV with 9 significant digits per value. Throws ValidationError on an
/// empty list and IoError on an unwritable path.
void write_track(const std::vector<TrackRow>& rows, const fs::path& path);
std::vector<TrackRow> read_track(const fs::path& path);

/// The CSV header line, without the newline.
std::string track_header();

}  // namespace silpose
