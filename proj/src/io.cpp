#include "silpose/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "silpose/error.hpp"

namespace silpose {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream iss(line);
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

std::string strip_comment(const std::string& line) {
    const auto pos = line.find('#');
    return pos == std::string::npos ? line : line.substr(0, pos);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

template <typename T>
std::optional<T> parse_number(const std::string& tok) {
    T value{};
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) return std::nullopt;
    return value;
}

template <typename T>
T number_or_throw(const std::string& tok, const std::string& source, std::size_t line,
                  const std::string& what) {
    auto v = parse_number<T>(tok);
    if (!v) throw ParseError(source, line, "invalid " + what + " '" + tok + "'");
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(*v)) throw ParseError(source, line, "non-finite " + what + " '" + tok + "'");
    }
    return *v;
}

std::ifstream open_input(const fs::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return in;
}

std::ofstream open_output(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

fs::path resolve(const fs::path& base, const std::string& value) {
    fs::path p(value);
    return p.is_absolute() ? p : base / p;
}

std::string fmt_g(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

// Reads `key = value` lines into an ordered list, rejecting malformed lines.
struct KeyValue {
    std::string key;
    std::string value;
    std::size_t line;
};

std::vector<KeyValue> read_key_values(std::istream& in, const std::string& source) {
    std::vector<KeyValue> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string body = trim(strip_comment(line));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ParseError(source, lineno, "expected 'key = value'");
        KeyValue kv{trim(body.substr(0, eq)), trim(body.substr(eq + 1)), lineno};
        if (kv.key.empty()) throw ParseError(source, lineno, "empty key");
        if (kv.value.empty()) throw ParseError(source, lineno, "empty value for '" + kv.key + "'");
        out.push_back(std::move(kv));
    }
    return out;
}

bool parse_bool(const KeyValue& kv, const std::string& source) {
    if (kv.value == "true" || kv.value == "1" || kv.value == "yes") return true;
    if (kv.value == "false" || kv.value == "0" || kv.value == "no") return false;
    throw ParseError(source, kv.line, "invalid boolean '" + kv.value + "' for " + kv.key);
}

PoseParams parse_pose_fields(const std::vector<std::string>& tok, std::size_t offset,
                             const std::string& source, std::size_t line) {
    if (tok.size() != offset + PoseParams::kFieldCount) {
        throw ParseError(source, line,
                         "pose needs 7 values: yaw pitch roll tx ty scale articulation");
    }
    PoseParams pose;
    for (std::size_t f = 0; f < PoseParams::kFieldCount; ++f) {
        pose[f] = number_or_throw<double>(tok[offset + f], source, line, "pose value");
    }
    if (!pose.valid()) throw ParseError(source, line, "pose scale must be > 0");
    return pose;
}

}  // namespace

// Meshes ---------------------------------------------------------------------

TriangleMesh parse_mesh(std::istream& in, const std::string& source) {
    TriangleMesh mesh;
    std::vector<std::size_t> face_lines;
    std::vector<std::pair<long long, std::size_t>> joint_faces;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto tok = split_ws(strip_comment(line));
        if (tok.empty()) continue;
        const auto& kind = tok[0];
        if (kind == "v") {
            if (tok.size() != 4) throw ParseError(source, lineno, "vertex needs 3 coordinates");
            mesh.vertices.push_back({number_or_throw<double>(tok[1], source, lineno, "coordinate"),
                                     number_or_throw<double>(tok[2], source, lineno, "coordinate"),
                                     number_or_throw<double>(tok[3], source, lineno, "coordinate")});
        } else if (kind == "f") {
            if (tok.size() != 4) throw ParseError(source, lineno, "face needs 3 vertex indices");
            std::array<std::uint32_t, 3> tri{};
            for (int k = 0; k < 3; ++k) {
                const auto idx = number_or_throw<long long>(tok[k + 1], source, lineno, "vertex index");
                if (idx < 1 || idx > std::numeric_limits<std::uint32_t>::max()) {
                    throw ParseError(source, lineno, "vertex index " + tok[k + 1] + " out of range");
                }
                tri[k] = static_cast<std::uint32_t>(idx - 1);
            }
            mesh.triangles.push_back(tri);
            face_lines.push_back(lineno);
        } else if (kind == "joint") {
            if (mesh.joint) throw ParseError(source, lineno, "only one joint is supported");
            if (tok.size() != 8) {
                throw ParseError(source, lineno, "joint needs: name ax ay az px py pz");
            }
            Joint j;
            j.name = tok[1];
            for (int k = 0; k < 3; ++k) {
                j.axis[k] = number_or_throw<double>(tok[2 + k], source, lineno, "joint axis");
                j.pivot[k] = number_or_throw<double>(tok[5 + k], source, lineno, "joint pivot");
            }
            mesh.joint = std::move(j);
        } else if (kind == "jf") {
            if (!mesh.joint) throw ParseError(source, lineno, "'jf' before any 'joint' line");
            if (tok.size() < 2) throw ParseError(source, lineno, "'jf' needs a triangle index");
            for (std::size_t k = 1; k < tok.size(); ++k) {
                joint_faces.emplace_back(
                    number_or_throw<long long>(tok[k], source, lineno, "triangle index"), lineno);
            }
        } else {
            throw ParseError(source, lineno, "unknown record '" + kind + "'");
        }
    }

    // Faces may precede their vertices, so ranges are checked at the end.
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        for (auto idx : mesh.triangles[t]) {
            if (idx >= mesh.vertices.size()) {
                throw ParseError(source, face_lines[t],
                                 "vertex index " + std::to_string(idx + 1) + " out of range (" +
                                     std::to_string(mesh.vertices.size()) + " vertices)");
            }
        }
    }
    for (const auto& [idx, ln] : joint_faces) {
        if (idx < 1 || static_cast<std::size_t>(idx) > mesh.triangles.size()) {
            throw ParseError(source, ln,
                             "triangle index " + std::to_string(idx) + " out of range (" +
                                 std::to_string(mesh.triangles.size()) + " triangles)");
        }
        mesh.joint->member_triangles.push_back(static_cast<std::size_t>(idx - 1));
    }
    mesh.validate();
    return mesh;
}

TriangleMesh load_mesh(const fs::path& path) {
    auto in = open_input(path);
    return parse_mesh(in, path.string());
}

// Images ---------------------------------------------------------------------

Image parse_pnm(std::istream& in, const std::string& source) {
    auto next_token = [&]() -> std::string {
        std::string tok;
        int c;
        while ((c = in.get()) != EOF) {
            if (c == '#') {
                while ((c = in.get()) != EOF && c != '\n') {}
                continue;
            }
            if (std::isspace(c)) {
                if (!tok.empty()) break;
                continue;
            }
            tok.push_back(static_cast<char>(c));
        }
        return tok;
    };

    const std::string magic = next_token();
    if (magic != "P5" && magic != "P6") {
        throw ParseError(source, 0, "unsupported magic '" + magic + "' (expected P5 or P6)");
    }
    const auto w = parse_number<int>(next_token());
    const auto h = parse_number<int>(next_token());
    const auto maxval = parse_number<int>(next_token());
    // next_token consumed exactly one whitespace byte after maxval.
    if (!w || !h || *w <= 0 || *h <= 0) throw ParseError(source, 0, "invalid image dimensions");
    if (!maxval) throw ParseError(source, 0, "invalid maxval");
    if (*maxval != 255) {
        throw ParseError(source, 0, "unsupported maxval " + std::to_string(*maxval) + " (only 255)");
    }

    const int channels = magic == "P6" ? 3 : 1;
    const std::size_t n = static_cast<std::size_t>(*w) * static_cast<std::size_t>(*h);
    std::vector<std::uint8_t> raw(n * channels);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
        throw ParseError(source, 0,
                         "truncated payload: expected " + std::to_string(raw.size()) +
                             " bytes, got " + std::to_string(in.gcount()));
    }

    Image img(*w, *h);
    if (channels == 1) {
        img.pixels = std::move(raw);
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double y = 0.299 * raw[3 * i] + 0.587 * raw[3 * i + 1] + 0.114 * raw[3 * i + 2];
            img.pixels[i] = static_cast<std::uint8_t>(std::min(255.0, std::round(y)));
        }
    }
    return img;
}

Image read_pgm(const fs::path& path) {
    auto in = open_input(path, std::ios::binary);
    return parse_pnm(in, path.string());
}

void write_pgm(const Image& image, const fs::path& path) {
    if (image.pixels.size() != static_cast<std::size_t>(image.width) * image.height) {
        throw ValidationError("write_pgm: pixel count does not match dimensions");
    }
    auto out = open_output(path, std::ios::binary);
    out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()),
              static_cast<std::streamsize>(image.pixels.size()));
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<fs::path> list_pgm_files(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("not a directory: '" + dir.string() + "'");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".pgm") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
    return files;
}

// Background histogram -------------------------------------------------------

void write_histogram(const IntensityHistogram& hist, const fs::path& path) {
    auto out = open_output(path);
    out << kHistogramHeader << '\n';
    for (std::size_t v = 0; v < kIntensityLevels; ++v) {
        out << fmt_g(hist.bins[v], 17) << ((v % 8 == 7) ? '\n' : ' ');
    }
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

IntensityHistogram read_histogram(const fs::path& path) {
    auto in = open_input(path);
    const auto source = path.string();
    std::string header;
    std::getline(in, header);
    if (trim(header) != kHistogramHeader) {
        throw ParseError(source, 1, "expected header '" + std::string(kHistogramHeader) + "'");
    }
    IntensityHistogram hist;
    std::size_t count = 0;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        for (const auto& tok : split_ws(line)) {
            if (count == kIntensityLevels) throw ParseError(source, lineno, "more than 256 values");
            hist.bins[count++] = number_or_throw<double>(tok, source, lineno, "probability");
        }
    }
    if (count != kIntensityLevels) {
        throw ParseError(source, lineno, "expected 256 values, found " + std::to_string(count));
    }
    validate_histogram(hist);
    return hist;
}

// Run configuration ----------------------------------------------------------

RunConfig parse_config(std::istream& in, const fs::path& base_dir, const std::string& source) {
    RunConfig cfg;
    std::set<std::string> seen;
    for (const auto& kv : read_key_values(in, source)) {
        if (!seen.insert(kv.key).second) throw ParseError(source, kv.line, "duplicate key '" + kv.key + "'");
        const auto& k = kv.key;
        const auto& v = kv.value;
        auto positive_double = [&](double& dst) {
            dst = number_or_throw<double>(v, source, kv.line, k);
            if (dst < 0.0) throw ValidationError(source + ":" + std::to_string(kv.line) + ": " + k + " must be >= 0");
        };
        if (k == "mesh") {
            cfg.mesh = resolve(base_dir, v);
        } else if (k == "background_hist") {
            cfg.background_hist = resolve(base_dir, v);
        } else if (k == "background_frames") {
            cfg.background_frames = resolve(base_dir, v);
        } else if (k == "frames") {
            cfg.frames = resolve(base_dir, v);
        } else if (k == "out") {
            cfg.out = resolve(base_dir, v);
        } else if (k == "particle_count") {
            const auto n = number_or_throw<long long>(v, source, kv.line, k);
            if (n < 1) {
                throw ValidationError(source + ":" + std::to_string(kv.line) +
                                      ": particle_count must be >= 1, got " + v);
            }
            cfg.particle_count = static_cast<std::size_t>(n);
        } else if (k == "jitter_angle") {
            positive_double(cfg.jitter.angle);
        } else if (k == "jitter_translation") {
            positive_double(cfg.jitter.translation);
        } else if (k == "jitter_log_scale") {
            positive_double(cfg.jitter.log_scale);
        } else if (k == "jitter_articulation") {
            positive_double(cfg.jitter.articulation);
        } else if (k == "seed") {
            cfg.seed = number_or_throw<std::uint64_t>(v, source, kv.line, k);
        } else if (k == "threads") {
            const auto n = number_or_throw<long long>(v, source, kv.line, k);
            if (n < 1 || n > 1024) {
                throw ValidationError(source + ":" + std::to_string(kv.line) + ": threads must be in [1, 1024]");
            }
            cfg.threads = static_cast<unsigned>(n);
        } else if (k == "dump_overlays") {
            cfg.dump_overlays = parse_bool(kv, source);
        } else {
            throw ParseError(source, kv.line, "unknown key '" + k + "'");
        }
    }
    for (const char* required : {"mesh", "frames"}) {
        if (!seen.count(required)) throw ValidationError(source + ": missing required key '" + required + "'");
    }
    if (cfg.background_hist.has_value() == cfg.background_frames.has_value()) {
        throw ValidationError(source +
                              ": exactly one of 'background_hist' or 'background_frames' is required");
    }
    return cfg;
}

RunConfig read_config(const fs::path& path) {
    auto in = open_input(path);
    return parse_config(in, path.parent_path(), path.string());
}

void check_paths(const RunConfig& config) {
    auto need = [](const fs::path& p, const char* what) {
        if (!fs::exists(p)) throw IoError(std::string(what) + " not found: '" + p.string() + "'");
    };
    need(config.mesh, "mesh");
    need(config.frames, "frames directory");
    if (config.background_hist) need(*config.background_hist, "background histogram");
    if (config.background_frames) need(*config.background_frames, "background frames directory");
}

// Synthetic scenes -----------------------------------------------------------

void SceneSpec::validate() const {
    if (trajectory.empty()) throw ValidationError("scene: trajectory is empty");
    if (width <= 0 || height <= 0) throw ValidationError("scene: width and height must be positive");
    auto in_range = [](double m) { return m >= 0.0 && m <= 255.0; };
    if (!in_range(background_mean) || !in_range(foreground_mean)) {
        throw ValidationError("scene: means must lie in [0, 255]");
    }
    if (!(background_std >= 0.0) || !(foreground_std >= 0.0)) {
        throw ValidationError("scene: standard deviations must be >= 0");
    }
    if (foreground_mean == background_mean) {
        throw ValidationError("scene: foreground_mean equals background_mean; the object is undetectable");
    }
    if (background_frame_count < 1) throw ValidationError("scene: background_frames must be >= 1");
    for (const auto& p : trajectory) {
        if (!p.valid()) throw ValidationError("scene: trajectory pose has non-finite field or scale <= 0");
    }
}

SceneSpec parse_scene(std::istream& in, const fs::path& base_dir, const std::string& source) {
    SceneSpec spec;
    std::set<std::string> seen;
    std::optional<std::size_t> frame_count;
    for (const auto& kv : read_key_values(in, source)) {
        const auto& k = kv.key;
        if (k != "pose" && !seen.insert(k).second) {
            throw ParseError(source, kv.line, "duplicate key '" + k + "'");
        }
        auto num = [&] { return number_or_throw<double>(kv.value, source, kv.line, k); };
        auto count = [&] {
            const auto n = number_or_throw<long long>(kv.value, source, kv.line, k);
            if (n < 1) throw ValidationError(source + ":" + std::to_string(kv.line) + ": " + k + " must be >= 1");
            return n;
        };
        if (k == "mesh") {
            spec.mesh_path = resolve(base_dir, kv.value);
        } else if (k == "width") {
            spec.width = static_cast<int>(count());
        } else if (k == "height") {
            spec.height = static_cast<int>(count());
        } else if (k == "background_mean") {
            spec.background_mean = num();
        } else if (k == "background_std") {
            spec.background_std = num();
        } else if (k == "foreground_mean") {
            spec.foreground_mean = num();
        } else if (k == "foreground_std") {
            spec.foreground_std = num();
        } else if (k == "noise_seed") {
            spec.noise_seed = number_or_throw<std::uint64_t>(kv.value, source, kv.line, k);
        } else if (k == "background_frames") {
            spec.background_frame_count = static_cast<std::size_t>(count());
        } else if (k == "frame_count") {
            frame_count = static_cast<std::size_t>(count());
        } else if (k == "pose") {
            spec.trajectory.push_back(parse_pose_fields(split_ws(kv.value), 0, source, kv.line));
        } else {
            throw ParseError(source, kv.line, "unknown key '" + k + "'");
        }
    }
    for (const char* required : {"mesh", "width", "height"}) {
        if (!seen.count(required)) throw ValidationError(source + ": missing required key '" + required + "'");
    }
    if (frame_count) {
        // A single pose with frame_count describes a static sequence.
        if (spec.trajectory.size() == 1) {
            spec.trajectory.assign(*frame_count, spec.trajectory.front());
        } else if (spec.trajectory.size() != *frame_count) {
            throw ValidationError(source + ": frame_count " + std::to_string(*frame_count) +
                                  " does not match " + std::to_string(spec.trajectory.size()) +
                                  " pose lines");
        }
    }
    spec.validate();
    return spec;
}

SceneSpec read_scene(const fs::path& path) {
    auto in = open_input(path);
    return parse_scene(in, path.parent_path(), path.string());
}

void write_ground_truth(const std::vector<PoseParams>& trajectory, const fs::path& path) {
    auto out = open_output(path);
    for (std::size_t k = 0; k < trajectory.size(); ++k) {
        out << k;
        for (std::size_t f = 0; f < PoseParams::kFieldCount; ++f) out << ' ' << fmt_g(trajectory[k][f], 17);
        out << '\n';
    }
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<PoseParams> read_ground_truth(const fs::path& path) {
    auto in = open_input(path);
    const auto source = path.string();
    std::vector<PoseParams> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto tok = split_ws(strip_comment(line));
        if (tok.empty()) continue;
        const auto k = number_or_throw<long long>(tok[0], source, lineno, "frame index");
        if (k != static_cast<long long>(out.size())) {
            throw ParseError(source, lineno, "frame index " + tok[0] + " out of sequence");
        }
        out.push_back(parse_pose_fields(tok, 1, source, lineno));
    }
    return out;
}

// Track results --------------------------------------------------------------

std::string track_header() {
    return "frame,yaw,pitch,roll,tx,ty,scale,artic,"
           "map_yaw,map_pitch,map_roll,map_tx,map_ty,map_scale,map_artic,map_loglik";
}

void write_track(const std::vector<TrackRow>& rows, const fs::path& path) {
    if (rows.empty()) throw ValidationError("write_track: no estimates to write");
    auto out = open_output(path);
    out << track_header() << '\n';
    for (const auto& r : rows) {
        out << r.frame;
        for (std::size_t f = 0; f < PoseParams::kFieldCount; ++f) out << ',' << fmt_g(r.expected[f], 9);
        for (std::size_t f = 0; f < PoseParams::kFieldCount; ++f) out << ',' << fmt_g(r.map[f], 9);
        out << ',' << fmt_g(r.map_log_likelihood, 9) << '\n';
    }
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<TrackRow> read_track(const fs::path& path) {
    auto in = open_input(path);
    const auto source = path.string();
    std::string line;
    if (!std::getline(in, line) || trim(line) != track_header()) {
        throw ParseError(source, 1, "missing or unexpected CSV header");
    }
    std::vector<TrackRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
        if (cells.size() != 16) throw ParseError(source, lineno, "expected 16 columns");
        TrackRow r;
        r.frame = number_or_throw<std::size_t>(cells[0], source, lineno, "frame");
        for (std::size_t f = 0; f < PoseParams::kFieldCount; ++f) {
            r.expected[f] = number_or_throw<double>(cells[1 + f], source, lineno, "value");
            r.map[f] = number_or_throw<double>(cells[8 + f], source, lineno, "value");
        }
        r.map_log_likelihood = number_or_throw<double>(cells[15], source, lineno, "value");
        rows.push_back(r);
    }
    return rows;
}

}  // namespace silpose
