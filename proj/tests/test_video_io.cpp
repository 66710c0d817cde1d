#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>

#include "support/fixtures.hpp"
#include "vidtl/video_io.hpp"

using namespace vidtl;
using vidtl::testing::make_frame_dir;
using vidtl::testing::temp_dir;

namespace {

std::vector<std::string> frame_contents(const std::filesystem::path& dir) {
    std::vector<std::string> out;
    for (const auto& f : list_frame_files(dir)) {
        std::ifstream in(f, std::ios::binary);
        out.emplace_back(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    return out;
}

std::vector<std::string> numbered(const std::string& tag, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 1; i <= n; ++i) out.push_back(tag + ":" + std::to_string(i));
    return out;
}

}  // namespace

TEST_CASE("sampling a ten-second clip at one fps yields ten frames at whole seconds") {
    const auto dir = temp_dir("sample");
    const VideoHandle v = open_video(make_frame_dir(dir / "v", 1.0, numbered("a", 10)));
    CHECK(v.duration_seconds == doctest::Approx(10.0));
    const FrameSequence seq = sample_frames(v, 1.0);
    REQUIRE(seq.size() == 10);
    for (std::size_t k = 0; k < 10; ++k) {
        CHECK(seq.frames[k].timestamp == doctest::Approx(static_cast<double>(k)));
    }
    // Native backing at the native rate returns the files verbatim, in order.
    const auto files = list_frame_files(v.path);
    for (std::size_t k = 0; k < 10; ++k) CHECK(seq.frames[k].path == files[k]);
}

TEST_CASE("sampling above the source fps is refused") {
    const auto dir = temp_dir("resample");
    const VideoHandle v = open_video(make_frame_dir(dir / "v", 1.0, numbered("a", 3)));
    try {
        sample_frames(v, 2.0);
        FAIL("expected ResampleError");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::resample_error);
    }
    CHECK_THROWS_AS(sample_frames(v, 0.0), Error);
}

TEST_CASE("subsampling picks the frame at each requested timestamp") {
    const auto dir = temp_dir("subsample");
    const VideoHandle v = open_video(make_frame_dir(dir / "v", 2.0, numbered("a", 10)));
    // 5 seconds at 2 fps; sample at 1 fps -> frames at t=0..4 -> native 1,3,5,7,9.
    const FrameSequence seq = sample_frames(v, 1.0);
    REQUIRE(seq.size() == 5);
    const auto files = list_frame_files(v.path);
    CHECK(seq.frames[0].path == files[0]);
    CHECK(seq.frames[1].path == files[2]);
    CHECK(seq.frames[4].path == files[8]);
}

TEST_CASE("open_video rejects junk") {
    const auto dir = temp_dir("junk");
    CHECK_THROWS_AS(open_video(dir / "missing"), Error);
    std::filesystem::create_directories(dir / "no_meta");
    CHECK_THROWS_AS(open_video(dir / "no_meta"), Error);
}

TEST_CASE("trim keeps the prefix through the keyframe") {
    const auto dir = temp_dir("trim");
    const VideoHandle v = open_video(make_frame_dir(dir / "v", 1.0, numbered("a", 10)));
    const FrameSequence seq = sample_frames(v, 1.0);

    const VideoHandle five = trim(v, seq, 5, dir / "five");
    CHECK(five.duration_seconds == doctest::Approx(5.0));
    CHECK(frame_contents(five.path) == numbered("a", 5));

    const VideoHandle whole = trim(v, seq, 10, dir / "whole");
    CHECK(frame_contents(whole.path) == numbered("a", 10));

    const VideoHandle first = trim(v, seq, 1, dir / "first");
    CHECK(first.duration_seconds == doctest::Approx(1.0));
    CHECK(frame_contents(first.path) == std::vector<std::string>{"a:1"});

    CHECK_THROWS_AS(trim(v, seq, 0, dir / "zero"), Error);
    CHECK_THROWS_AS(trim(v, seq, 11, dir / "eleven"), Error);
}

TEST_CASE("stitch concatenates and reports the summed duration") {
    const auto dir = temp_dir("stitch");
    const VideoHandle a = open_video(make_frame_dir(dir / "a", 1.0, numbered("a", 5)));
    const VideoHandle b = open_video(make_frame_dir(dir / "b", 1.0, numbered("b", 6)));
    const VideoHandle joined = stitch(a, b, dir / "joined");
    CHECK(joined.duration_seconds == doctest::Approx(11.0));
    auto expected = numbered("a", 5);
    const auto tail = numbered("b", 6);
    expected.insert(expected.end(), tail.begin(), tail.end());
    CHECK(frame_contents(joined.path) == expected);

    // Renumbering is contiguous in the merged directory.
    const auto files = list_frame_files(joined.path);
    CHECK(files.front().filename() == "frame_00001.png");
    CHECK(files.back().filename() == "frame_00011.png");
}

TEST_CASE("stitch guards against empty and mismatched inputs") {
    const auto dir = temp_dir("stitch_guard");
    const VideoHandle a = open_video(make_frame_dir(dir / "a", 1.0, numbered("a", 2)));
    VideoHandle empty = a;
    empty.duration_seconds = 0.0;
    CHECK_THROWS_AS(stitch(a, empty, dir / "bad"), Error);

    const VideoHandle other = open_video(make_frame_dir(dir / "b", 2.0, numbered("b", 2)));
    try {
        stitch(a, other, dir / "bad2");
        FAIL("expected IncompatibleStreams");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::incompatible_streams);
    }
}

TEST_CASE("trim then stitch with the removed suffix reproduces the frame count") {
    const auto dir = temp_dir("roundtrip");
    const VideoHandle v = open_video(make_frame_dir(dir / "v", 1.0, numbered("x", 8)));
    const FrameSequence seq = sample_frames(v, 1.0);
    const std::size_t n_star = 3;

    const VideoHandle prefix = trim(v, seq, n_star, dir / "prefix");

    // Rebuild the removed suffix as its own clip.
    const auto files = list_frame_files(v.path);
    const std::vector<std::filesystem::path> rest(files.begin() + n_star, files.end());
    const VideoHandle suffix = write_frame_dir(dir / "suffix", rest, v.fps);

    const VideoHandle rejoined = stitch(prefix, suffix, dir / "rejoined");
    CHECK(list_frame_files(rejoined.path).size() == 8);
    CHECK(frame_contents(rejoined.path) == numbered("x", 8));
    CHECK(rejoined.duration_seconds == doctest::Approx(8.0));
}

TEST_CASE("sampling a stitched clip equals the concatenated samplings") {
    const auto dir = temp_dir("sample_stitch");
    const VideoHandle a = open_video(make_frame_dir(dir / "a", 1.0, numbered("a", 4)));
    const VideoHandle b = open_video(make_frame_dir(dir / "b", 1.0, numbered("b", 3)));
    const VideoHandle joined = stitch(a, b, dir / "joined");
    const FrameSequence whole = sample_frames(joined, 1.0);
    const FrameSequence left = sample_frames(a, 1.0);
    const FrameSequence right = sample_frames(b, 1.0);
    REQUIRE(whole.size() == left.size() + right.size());

    std::vector<std::string> combined;
    for (const auto& f : left.frames) {
        std::ifstream in(f.path, std::ios::binary);
        combined.emplace_back(std::istreambuf_iterator<char>(in),
                              std::istreambuf_iterator<char>());
    }
    for (const auto& f : right.frames) {
        std::ifstream in(f.path, std::ios::binary);
        combined.emplace_back(std::istreambuf_iterator<char>(in),
                              std::istreambuf_iterator<char>());
    }
    CHECK(frame_contents(joined.path) == combined);
}

TEST_CASE("re-trimming at the full length is idempotent") {
    const auto dir = temp_dir("idem");
    const VideoHandle v = open_video(make_frame_dir(dir / "v", 1.0, numbered("y", 4)));
    const FrameSequence seq = sample_frames(v, 1.0);
    const VideoHandle once = trim(v, seq, 4, dir / "once");
    const FrameSequence seq2 = sample_frames(once, 1.0);
    const VideoHandle twice = trim(once, seq2, 4, dir / "twice");
    CHECK(frame_contents(once.path) == frame_contents(twice.path));
}

TEST_CASE("external tool command lines are the documented invocations") {
    const VideoToolConfig tools;
    const auto sample = build_container_sample_command(tools, "in.mp4", 1.0, "out/frame_%05d.png");
    CHECK(sample.front() == "ffmpeg");
    CHECK(std::find(sample.begin(), sample.end(), "fps=1") != sample.end());

    const auto cut = build_container_trim_command(tools, "in.mp4", 5.0, "out.mp4");
    REQUIRE(cut.size() >= 9);
    CHECK(std::find(cut.begin(), cut.end(), "-t") != cut.end());
    CHECK(std::find(cut.begin(), cut.end(), "copy") != cut.end());

    const auto cat = build_container_stitch_command(tools, "list.txt", "out.mp4");
    CHECK(std::find(cat.begin(), cat.end(), "concat") != cat.end());
    CHECK(std::find(cat.begin(), cat.end(), "-safe") != cat.end());
}

TEST_CASE("run_command captures stdout and exit codes") {
    std::string out;
    CHECK(run_command({"/bin/sh", "-c", "printf hello"}, &out) == 0);
    CHECK(out == "hello");
    CHECK(run_command({"/bin/sh", "-c", "exit 3"}) == 3);
    CHECK(run_command({"/nonexistent-tool-xyz"}) == 127);
}
