#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vidtl/errors.hpp"

namespace vidtl {

enum class VideoBacking {
    frame_dir,  // directory of frame_%05d.* plus meta.json — bit-exact, used by tests
    container,  // media file processed via an external tool
};

struct VideoHandle {
    std::filesystem::path path;
    VideoBacking backing = VideoBacking::frame_dir;
    double duration_seconds = 0.0;
    double fps = 0.0;
};

struct Frame {
    std::filesystem::path path;
    double timestamp = 0.0;  // seconds from the start of the source video
};

/// Frames sampled from a video at a nominal rate, first frame always included.
struct FrameSequence {
    std::vector<Frame> frames;
    double rate = 0.0;  // frames per second

    std::size_t size() const { return frames.size(); }
};

struct VideoToolConfig {
    std::string tool = "ffmpeg";
    std::string probe = "ffprobe";
};

/// Open either backing form. A directory containing meta.json is the native
/// frame-directory format; anything else is probed as a container file.
VideoHandle open_video(const std::filesystem::path& path, const VideoToolConfig& tools = {});

/// Write the native frame-directory format: frames copied in order as
/// frame_%05d with their original extensions, plus meta.json carrying fps
/// and duration.
VideoHandle write_frame_dir(const std::filesystem::path& dir,
                            const std::vector<std::filesystem::path>& frames, double fps);

/// Frame files of a native directory in lexicographic order.
std::vector<std::filesystem::path> list_frame_files(const std::filesystem::path& dir);

/// Uniform sampling at `rate` frames/second: N = max(1, floor(duration*rate)),
/// timestamps k/rate. Rates above the source fps are refused.
FrameSequence sample_frames(const VideoHandle& v, double rate,
                            const VideoToolConfig& tools = {});

/// Prefix of the video through the n_star-th sampled frame (1-based),
/// keyframe included. The backing form is preserved.
VideoHandle trim(const VideoHandle& v, const FrameSequence& seq, std::size_t n_star,
                 const std::filesystem::path& out, const VideoToolConfig& tools = {});

/// Concatenation, prefix first. Native directories are merged with renumbered
/// frames; containers go through the external tool's concat demuxer.
VideoHandle stitch(const VideoHandle& prefix, const VideoHandle& segment,
                   const std::filesystem::path& out, const VideoToolConfig& tools = {});

// Exact argv vectors for the external-tool paths; exposed for tests.
std::vector<std::string> build_container_sample_command(const VideoToolConfig& tools,
                                                        const std::filesystem::path& input,
                                                        double rate,
                                                        const std::filesystem::path& out_pattern);
std::vector<std::string> build_container_trim_command(const VideoToolConfig& tools,
                                                      const std::filesystem::path& input,
                                                      double end_seconds,
                                                      const std::filesystem::path& output);
std::vector<std::string> build_container_stitch_command(const VideoToolConfig& tools,
                                                        const std::filesystem::path& list_file,
                                                        const std::filesystem::path& output);

/// Run a command without a shell; returns the exit status and captures stdout.
int run_command(const std::vector<std::string>& argv, std::string* captured_stdout = nullptr);

}  // namespace vidtl
