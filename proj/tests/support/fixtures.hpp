#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace vidtl::testing {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
}

/// Native frame directory whose frame files carry the given content strings;
/// mock scoring looks frames up by content, so stitching (which renumbers
/// files) does not disturb the scripted scores.
inline std::filesystem::path make_frame_dir(const std::filesystem::path& dir, double fps,
                                            const std::vector<std::string>& contents) {
    std::filesystem::create_directories(dir);
    std::size_t index = 1;
    for (const auto& content : contents) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%05zu.png", index++);
        write_file(dir / name, content);
    }
    nlohmann::json meta;
    meta["fps"] = fps;
    meta["duration"] = static_cast<double>(contents.size()) / fps;
    write_file(dir / "meta.json", meta.dump(2) + "\n");
    return dir;
}

constexpr const char* kMeditationPrompt =
    "A person meditates by the lake, and a few seconds later, stands up for a moment before "
    "leaving.";

// The scripted reply of the decomposition service for the meditation prompt,
// in the same surface form the service emits (unicode operators, bare
// proposition texts).
constexpr const char* kMeditationDecomposition =
    "Output Propositions: ['person is meditating', 'lake shore', 'person is standing', "
    "'person is walking away']\n"
    "Output Specification: (person is meditating ∧ lake shore) X person is standing X "
    "person is walking away";

enum class MeditationVariant {
    success,            // iteration-1 regeneration fixes the weak propositions
    stall,              // regenerated segments never improve
    already_satisfied,  // the initial video satisfies the specification
};

/// Write the full mock scenario (clips plus scenario.json) under `dir` and
/// return the scenario path.
inline std::filesystem::path write_meditation_scenario(const std::filesystem::path& dir,
                                                       MeditationVariant variant) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "clips");

    const bool satisfied = variant == MeditationVariant::already_satisfied;
    make_frame_dir(dir / "clips" / "init", 1.0, {"init:f1", "init:f2", "init:f3"});
    make_frame_dir(dir / "clips" / "good", 1.0, {"good:f1", "good:f2"});
    make_frame_dir(dir / "clips" / "bad", 1.0, {"bad:f1", "bad:f2"});

    nlohmann::json scenario;
    scenario["chat"] = nlohmann::json::array(
        {{{"match", "Input Prompt: A person meditates"},
          {"response", kMeditationDecomposition}},
         {{"match", "Feedback"},
          {"response",
           "Continuing from the final frame, the person stands up by the lake and walks away "
           "from the shore."}}});

    auto scores = nlohmann::json::array();
    auto add = [&scores](const char* prop, const char* frame, const char* verdict, double p) {
        scores.push_back({{"proposition", prop},
                          {"frame", frame},
                          {"verdict", verdict},
                          {"probability", p}});
    };
    // The opening scene is solid on all variants.
    add("person is meditating", "init:f1", "Yes", 0.95);
    add("person is meditating", "init:f2", "Yes", 0.95);
    add("person is meditating", "init:f3", "Yes", 0.90);
    add("lake shore", "init:f1", "Yes", 0.95);
    add("lake shore", "init:f2", "Yes", 0.95);
    add("lake shore", "init:f3", "Yes", 0.95);
    if (satisfied) {
        add("person is standing", "init:f2", "Yes", 0.95);
        add("person is walking away", "init:f3", "Yes", 0.95);
    } else {
        add("person is standing", "init:f1", "No", 0.99);
        add("person is standing", "init:f2", "No", 0.99);
        add("person is standing", "init:f3", "No", 0.99);
    }
    // The regenerated segment delivers the missing events.
    add("person is standing", "good:f1", "Yes", 0.95);
    add("person is walking away", "good:f2", "Yes", 0.95);

    scenario["frame_scores"] = std::move(scores);
    // Everything unscripted reads as a confident miss.
    scenario["frame_score_default"] = {{"verdict", "No"}, {"probability", 0.98}};

    auto generations = nlohmann::json::array();
    generations.push_back({{"frames", "clips/init"}});
    generations.push_back(
        {{"frames", variant == MeditationVariant::stall ? "clips/bad" : "clips/good"}});
    scenario["generations"] = std::move(generations);

    const fs::path scenario_path = dir / "scenario.json";
    write_file(scenario_path, scenario.dump(2) + "\n");
    return scenario_path;
}

/// Fresh uniquely-named directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
    static std::size_t counter = 0;
    const auto dir = std::filesystem::temp_directory_path() /
                     ("vidtl_" + tag + "_" + std::to_string(::getpid()) + "_" +
                      std::to_string(counter++));
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace vidtl::testing
