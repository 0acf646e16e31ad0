#include "silpose/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "silpose/bench.hpp"
#include "silpose/error.hpp"
#include "silpose/filter.hpp"
#include "silpose/io.hpp"
#include "silpose/synth.hpp"

namespace silpose::cli {

namespace {

// Raised for failures that happen after setup, tagged with the frame index.
class FrameError : public Error {
public:
    using Error::Error;
};

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::vector<unsigned> threads;
    bool dump_overlays = false;
    std::optional<std::string> out;
};

IntensityHistogram load_background(const RunConfig& cfg) {
    if (cfg.background_hist) return read_histogram(*cfg.background_hist);
    const auto files = list_pgm_files(*cfg.background_frames);
    if (files.empty()) {
        throw IoError("no .pgm files in background directory '" + cfg.background_frames->string() + "'");
    }
    std::vector<Image> frames;
    for (const auto& f : files) frames.push_back(read_pgm(f));
    return learn_background(frames);
}

RunConfig load_run_config(const std::string& path, const Overrides& o) {
    RunConfig cfg = read_config(path);
    if (o.seed) cfg.seed = *o.seed;
    if (o.out) cfg.out = *o.out;
    if (o.dump_overlays) cfg.dump_overlays = true;
    check_paths(cfg);
    return cfg;
}

std::string frame_name(std::size_t k) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "overlay_%04zu.pgm", k);
    return buf;
}

Image overlay(const Image& frame, const SilhouetteMask& mask) {
    Image out = frame;
    for (std::size_t i = 0; i < out.pixels.size(); ++i) {
        if (mask.bits()[i]) out.pixels[i] = static_cast<std::uint8_t>(128 + out.pixels[i] / 2);
    }
    return out;
}

int cmd_learn_background(const std::string& dir, const std::string& out_path, std::ostream& out) {
    const auto files = list_pgm_files(dir);
    if (files.empty()) throw IoError("no .pgm files in '" + dir + "'");
    std::vector<Image> frames;
    frames.reserve(files.size());
    for (const auto& f : files) frames.push_back(read_pgm(f));
    const auto hist = learn_background(frames);
    write_histogram(hist, out_path);
    out << "learned background from " << files.size() << " frame(s) -> " << out_path << '\n';
    return kSuccess;
}

int cmd_synth(const std::string& scene_path, const std::string& out_dir, const Overrides& o,
              std::ostream& out) {
    SceneSpec spec = read_scene(scene_path);
    if (o.seed) spec.noise_seed = *o.seed;
    const auto mesh = load_mesh(spec.mesh_path);
    write_scene(spec, mesh, out_dir);
    out << "wrote " << spec.trajectory.size() << " frame(s) and " << spec.background_frame_count
        << " background frame(s) to " << out_dir << '\n';
    return kSuccess;
}

int cmd_track(const std::string& config_path, const Overrides& o, std::ostream& out) {
    const RunConfig cfg = load_run_config(config_path, o);
    if (o.threads.size() > 1) throw ValidationError("track accepts a single --threads value");
    const auto mesh = load_mesh(cfg.mesh);
    const auto background = load_background(cfg);
    const auto files = list_pgm_files(cfg.frames);
    if (files.empty()) throw IoError("no .pgm files in '" + cfg.frames.string() + "'");

    const Image first = read_pgm(files.front());
    FilterConfig fc;
    fc.particle_count = cfg.particle_count;
    fc.jitter = cfg.jitter;
    fc.rng_seed = cfg.seed;
    fc.workers = o.threads.empty() ? cfg.threads : o.threads.front();
    derive_bounds(fc, mesh, first.width, first.height);
    fc.validate();

    std::filesystem::create_directories(cfg.out);
    if (cfg.dump_overlays) std::filesystem::create_directories(cfg.out / "overlays");

    ParticleSet set = init_particles(fc, first.width, first.height, mesh);
    std::vector<TrackRow> rows;
    rows.reserve(files.size());
    for (std::size_t k = 0; k < files.size(); ++k) {
        try {
            const Image frame = k == 0 ? first : read_pgm(files[k]);
            set = filter_update(set, frame, mesh, make_model(background, frame), fc);
            const auto& best = map_particle(set);
            rows.push_back({k, expected_state(set), best.state, best.log_likelihood});
            if (cfg.dump_overlays) {
                const auto mask = rasterize_silhouette(apply_pose(mesh, best.state), frame.width, frame.height);
                write_pgm(overlay(frame, mask), cfg.out / "overlays" / frame_name(k));
            }
        } catch (const std::exception& e) {
            throw FrameError("frame " + std::to_string(k) + " (" + files[k].filename().string() +
                             "): " + e.what());
        }
    }
    const auto track_path = cfg.out / "track.csv";
    write_track(rows, track_path);
    out << "tracked " << rows.size() << " frame(s) -> " << track_path.string() << '\n';
    return kSuccess;
}

int cmd_bench(const std::string& config_path, const Overrides& o, std::ostream& out) {
    const RunConfig cfg = load_run_config(config_path, o);
    const auto mesh = load_mesh(cfg.mesh);
    const auto background = load_background(cfg);
    const auto files = list_pgm_files(cfg.frames);
    if (files.empty()) throw IoError("no .pgm files in '" + cfg.frames.string() + "'");
    const Image frame = read_pgm(files.front());

    FilterConfig fc;
    fc.particle_count = cfg.particle_count;
    fc.rng_seed = cfg.seed;
    derive_bounds(fc, mesh, frame.width, frame.height);
    const auto set = init_particles(fc, frame.width, frame.height, mesh);
    const auto cache = build_cache(make_model(background, frame), frame);

    std::vector<unsigned> workers = o.threads;
    if (workers.empty()) workers.push_back(cfg.threads);
    const auto rows = benchmark_evaluation(set.particles, mesh, cache, workers);

    std::filesystem::create_directories(cfg.out);
    const auto csv_path = cfg.out / "bench.csv";
    std::ofstream csv(csv_path);
    if (!csv) throw IoError("cannot open '" + csv_path.string() + "' for writing");
    csv << "workers,particles_per_second,speedup,identical\n";

    char line[160];
    std::snprintf(line, sizeof line, "%8s %20s %10s %10s\n", "workers", "particles/s", "speedup", "identical");
    out << line;
    bool all_identical = true;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%8u %20.1f %10.3f %10s\n", r.workers, r.particles_per_second,
                      r.speedup, r.identical ? "yes" : "NO");
        out << line;
        csv << r.workers << ',' << r.particles_per_second << ',' << r.speedup << ','
            << (r.identical ? 1 : 0) << '\n';
        all_identical = all_identical && r.identical;
    }
    if (!all_identical) throw Error("likelihoods differ between worker counts");
    return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Silhouette particle-filter pose estimation", "silpose"};
    app.require_subcommand(1, 1);

    Overrides o;
    std::string config_path, frames_dir, scene_path, out_path;

    auto* learn = app.add_subcommand("learn-background", "Learn a background histogram from empty frames");
    learn->add_option("frames-dir", frames_dir, "Directory of background .pgm frames")->required();
    learn->add_option("--out", out_path, "Output BGHIST file")->required();

    auto* synth = app.add_subcommand("synth", "Render a synthetic sequence from a scene file");
    synth->add_option("scene", scene_path, "Scene description file")->required();
    synth->add_option("--out", out_path, "Output directory")->required();
    synth->add_option("--seed", o.seed, "Override the scene noise seed");

    auto* track = app.add_subcommand("track", "Run the particle filter over a frame sequence");
    track->add_option("--config", config_path, "Run configuration file")->required();
    track->add_option("--seed", o.seed, "Override the configured seed");
    track->add_option("--threads", o.threads, "Worker count")->delimiter(',');
    track->add_flag("--dump-overlays", o.dump_overlays, "Write per-frame MAP overlays");
    track->add_option("--out", o.out, "Run directory");

    auto* bench = app.add_subcommand("bench", "Per-particle likelihood throughput per worker count");
    bench->add_option("--config", config_path, "Run configuration file")->required();
    bench->add_option("--threads", o.threads, "Comma-separated worker counts")->delimiter(',');
    bench->add_option("--seed", o.seed, "Override the configured seed");
    bench->add_option("--out", o.out, "Run directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsageError;
    }
    for (unsigned t : o.threads) {
        if (t < 1) {
            err << "error: --threads values must be >= 1\n";
            return kUsageError;
        }
    }

    try {
        if (*learn) return cmd_learn_background(frames_dir, out_path, out);
        if (*synth) return cmd_synth(scene_path, out_path, o, out);
        if (*track) return cmd_track(config_path, o, out);
        if (*bench) return cmd_bench(config_path, o, out);
    } catch (const FrameError& e) {
        err << "error: " << e.what() << '\n';
        return kInternalError;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternalError;
    }
    return kUsageError;
}

}  // namespace silpose::cli
