#include "vidtl/video_io.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace vidtl {

namespace fs = std::filesystem;

namespace {

constexpr double kEps = 1e-9;

struct FrameDirMeta {
    double fps = 0.0;
    double duration = 0.0;
};

FrameDirMeta read_meta(const fs::path& dir) {
    std::ifstream in(dir / "meta.json");
    if (!in) {
        throw Error(Errc::unreadable_video, "missing meta.json in " + dir.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::unreadable_video,
                    "bad meta.json in " + dir.string() + ": " + e.what());
    }
    FrameDirMeta meta;
    meta.fps = j.at("fps").get<double>();
    meta.duration = j.at("duration").get<double>();
    if (meta.fps <= 0.0 || meta.duration <= 0.0) {
        throw Error(Errc::unreadable_video, "meta.json needs positive fps and duration");
    }
    return meta;
}

void write_meta(const fs::path& dir, double fps, double duration) {
    std::ofstream out(dir / "meta.json");
    if (!out) throw Error(Errc::io_error, "cannot write meta.json in " + dir.string());
    nlohmann::json j;
    j["fps"] = fps;
    j["duration"] = duration;
    out << j.dump(2) << "\n";
}

std::string frame_name(std::size_t index_1based, const std::string& extension) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%05zu", index_1based);
    return std::string(buf) + extension;
}

double probe_container_duration(const fs::path& path, const VideoToolConfig& tools,
                                double* fps_out) {
    std::string json_text;
    const int status = run_command(
        {tools.probe, "-v", "quiet", "-print_format", "json", "-show_format", "-show_streams",
         path.string()},
        &json_text);
    if (status != 0) {
        throw Error(Errc::unreadable_video,
                    tools.probe + " failed on " + path.string() + " (exit " +
                        std::to_string(status) + ")");
    }
    try {
        const auto j = nlohmann::json::parse(json_text);
        const double duration = std::stod(j.at("format").at("duration").get<std::string>());
        double fps = 0.0;
        for (const auto& stream : j.at("streams")) {
            if (stream.value("codec_type", "") != "video") continue;
            const std::string rate = stream.value("r_frame_rate", "0/1");
            const auto slash = rate.find('/');
            const double num = std::stod(rate.substr(0, slash));
            const double den = slash == std::string::npos ? 1.0 : std::stod(rate.substr(slash + 1));
            if (den > 0.0) fps = num / den;
            break;
        }
        if (fps_out) *fps_out = fps;
        return duration;
    } catch (const std::exception& e) {
        throw Error(Errc::unreadable_video,
                    "cannot parse probe output for " + path.string() + ": " + e.what());
    }
}

}  // namespace

std::vector<fs::path> list_frame_files(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        if (entry.path().filename() == "meta.json") continue;
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

VideoHandle open_video(const fs::path& path, const VideoToolConfig& tools) {
    if (fs::is_directory(path)) {
        const FrameDirMeta meta = read_meta(path);
        if (list_frame_files(path).empty()) {
            throw Error(Errc::unreadable_video, "frame directory " + path.string() + " is empty");
        }
        return VideoHandle{path, VideoBacking::frame_dir, meta.duration, meta.fps};
    }
    if (fs::is_regular_file(path)) {
        double fps = 0.0;
        const double duration = probe_container_duration(path, tools, &fps);
        if (duration <= 0.0) {
            throw Error(Errc::unreadable_video, "container reports no duration: " + path.string());
        }
        return VideoHandle{path, VideoBacking::container, duration, fps};
    }
    throw Error(Errc::unreadable_video, "no such video: " + path.string());
}

VideoHandle write_frame_dir(const fs::path& dir, const std::vector<fs::path>& frames,
                            double fps) {
    if (frames.empty()) {
        throw Error(Errc::invalid_argument, "refusing to write an empty frame directory");
    }
    if (fps <= 0.0) throw Error(Errc::invalid_argument, "fps must be positive");
    fs::create_directories(dir);
    for (const auto& old_file : list_frame_files(dir)) fs::remove(old_file);
    std::size_t index = 1;
    for (const auto& src : frames) {
        const auto dst = dir / frame_name(index, src.extension().string());
        fs::copy_file(src, dst, fs::copy_options::overwrite_existing);
        ++index;
    }
    const double duration = static_cast<double>(frames.size()) / fps;
    write_meta(dir, fps, duration);
    return VideoHandle{dir, VideoBacking::frame_dir, duration, fps};
}

FrameSequence sample_frames(const VideoHandle& v, double rate, const VideoToolConfig& tools) {
    if (rate <= 0.0) throw Error(Errc::invalid_argument, "sampling rate must be positive");
    if (v.fps > 0.0 && rate > v.fps + kEps) {
        throw Error(Errc::resample_error,
                    "sampling rate " + std::to_string(rate) + " exceeds source fps " +
                        std::to_string(v.fps));
    }
    const auto count = static_cast<std::size_t>(
        std::max(1.0, std::floor(v.duration_seconds * rate + kEps)));

    FrameSequence seq;
    seq.rate = rate;
    if (v.backing == VideoBacking::frame_dir) {
        const auto files = list_frame_files(v.path);
        for (std::size_t k = 0; k < count; ++k) {
            const double t = static_cast<double>(k) / rate;
            auto idx = static_cast<std::size_t>(std::floor(t * v.fps + kEps));
            idx = std::min(idx, files.size() - 1);
            seq.frames.push_back({files[idx], t});
        }
        return seq;
    }

    // Container: extract through the external tool into a sibling cache dir.
    const fs::path cache = v.path.string() + ".frames";
    fs::create_directories(cache);
    const fs::path pattern = cache / "frame_%05d.png";
    const int status = run_command(build_container_sample_command(tools, v.path, rate, pattern));
    if (status != 0) {
        throw Error(Errc::unreadable_video,
                    tools.tool + " frame extraction failed (exit " + std::to_string(status) + ")");
    }
    const auto files = list_frame_files(cache);
    if (files.empty()) {
        throw Error(Errc::unreadable_video, "frame extraction produced no frames");
    }
    for (std::size_t k = 0; k < std::min(count, files.size()); ++k) {
        seq.frames.push_back({files[k], static_cast<double>(k) / rate});
    }
    return seq;
}

VideoHandle trim(const VideoHandle& v, const FrameSequence& seq, std::size_t n_star,
                 const fs::path& out, const VideoToolConfig& tools) {
    if (n_star < 1 || n_star > seq.size()) {
        throw Error(Errc::index_out_of_range,
                    "trim index " + std::to_string(n_star) + " out of range [1, " +
                        std::to_string(seq.size()) + "]");
    }
    const double keyframe_ts = seq.frames[n_star - 1].timestamp;

    if (v.backing == VideoBacking::frame_dir) {
        const auto files = list_frame_files(v.path);
        std::vector<fs::path> kept;
        for (std::size_t i = 0; i < files.size(); ++i) {
            const double t = static_cast<double>(i) / v.fps;
            if (t <= keyframe_ts + kEps) kept.push_back(files[i]);
        }
        return write_frame_dir(out, kept, v.fps);
    }

    // Keep through the end of the keyframe's display interval.
    const double end = std::min(v.duration_seconds,
                                keyframe_ts + (v.fps > 0.0 ? 1.0 / v.fps : 1.0 / seq.rate));
    const int status = run_command(build_container_trim_command(tools, v.path, end, out));
    if (status != 0) {
        throw Error(Errc::io_error,
                    tools.tool + " trim failed (exit " + std::to_string(status) + ")");
    }
    return VideoHandle{out, VideoBacking::container, end, v.fps};
}

VideoHandle stitch(const VideoHandle& prefix, const VideoHandle& segment, const fs::path& out,
                   const VideoToolConfig& tools) {
    if (segment.duration_seconds <= 0.0) {
        throw Error(Errc::invalid_argument, "refusing to stitch an empty segment");
    }
    if (prefix.backing != segment.backing) {
        throw Error(Errc::incompatible_streams,
                    "cannot stitch frame-directory and container backings together");
    }

    if (prefix.backing == VideoBacking::frame_dir) {
        if (std::abs(prefix.fps - segment.fps) > kEps) {
            throw Error(Errc::incompatible_streams,
                        "frame-directory stitch requires equal fps (" +
                            std::to_string(prefix.fps) + " vs " + std::to_string(segment.fps) +
                            ")");
        }
        std::vector<fs::path> frames = list_frame_files(prefix.path);
        const auto tail = list_frame_files(segment.path);
        frames.insert(frames.end(), tail.begin(), tail.end());
        return write_frame_dir(out, frames, prefix.fps);
    }

    const fs::path list_file = out.string() + ".concat.txt";
    {
        std::ofstream list(list_file);
        if (!list) throw Error(Errc::io_error, "cannot write " + list_file.string());
        list << "file '" << fs::absolute(prefix.path).string() << "'\n";
        list << "file '" << fs::absolute(segment.path).string() << "'\n";
    }
    const int status = run_command(build_container_stitch_command(tools, list_file, out));
    if (status != 0) {
        throw Error(Errc::io_error,
                    tools.tool + " concat failed (exit " + std::to_string(status) + ")");
    }
    return VideoHandle{out, VideoBacking::container,
                       prefix.duration_seconds + segment.duration_seconds, prefix.fps};
}

std::vector<std::string> build_container_sample_command(const VideoToolConfig& tools,
                                                        const fs::path& input, double rate,
                                                        const fs::path& out_pattern) {
    std::ostringstream fps_filter;
    fps_filter << "fps=" << rate;
    return {tools.tool, "-y",    "-i", input.string(), "-vf", fps_filter.str(),
            "-start_number", "1", out_pattern.string()};
}

std::vector<std::string> build_container_trim_command(const VideoToolConfig& tools,
                                                      const fs::path& input, double end_seconds,
                                                      const fs::path& output) {
    std::ostringstream end;
    end << end_seconds;
    // Stream copy: cut at the timestamp without re-encoding.
    return {tools.tool, "-y", "-i", input.string(), "-t", end.str(), "-c", "copy",
            output.string()};
}

std::vector<std::string> build_container_stitch_command(const VideoToolConfig& tools,
                                                        const fs::path& list_file,
                                                        const fs::path& output) {
    return {tools.tool, "-y", "-f", "concat", "-safe", "0", "-i", list_file.string(),
            "-c", "copy", output.string()};
}

int run_command(const std::vector<std::string>& argv, std::string* captured_stdout) {
    if (argv.empty()) throw Error(Errc::invalid_argument, "empty command");
    int pipe_fds[2] = {-1, -1};
    if (captured_stdout && pipe(pipe_fds) != 0) {
        throw Error(Errc::io_error, "pipe() failed");
    }
    const pid_t pid = fork();
    if (pid < 0) throw Error(Errc::io_error, "fork() failed");
    if (pid == 0) {
        if (captured_stdout) {
            dup2(pipe_fds[1], STDOUT_FILENO);
            close(pipe_fds[0]);
            close(pipe_fds[1]);
        }
        std::vector<char*> args;
        args.reserve(argv.size() + 1);
        for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
        args.push_back(nullptr);
        execvp(args[0], args.data());
        _exit(127);
    }
    if (captured_stdout) {
        close(pipe_fds[1]);
        char buf[4096];
        ssize_t n;
        while ((n = read(pipe_fds[0], buf, sizeof(buf))) > 0) {
            captured_stdout->append(buf, static_cast<std::size_t>(n));
        }
        close(pipe_fds[0]);
    }
    int status = 0;
    waitpid(pid, &status, 0);
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return -1;
}

}  // namespace vidtl
