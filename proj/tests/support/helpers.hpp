#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include <gazemetric/types.hpp>

namespace test_helpers {

// Scratch directory removed on destruction.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("gazemetric_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline std::filesystem::path cli_binary() {
    const char* env = std::getenv("GAZEMETRIC_BIN");
    return env ? std::filesystem::path(env) : std::filesystem::path();
}

// A flat recording on a 10 ms grid: constant gaze with optional overrides.
inline gazemetric::Recording flat_recording(std::size_t n, double x = 500.0, double y = 500.0) {
    gazemetric::Recording rec;
    rec.participant_id = "T01";
    for (std::size_t i = 0; i < n; ++i) {
        gazemetric::GazeSample s;
        s.t_ms = static_cast<double>(i) * 10.0;
        s.gaze_x = x;
        s.gaze_y = y;
        s.valid = true;
        rec.samples.push_back(s);
    }
    return rec;
}

}  // namespace test_helpers
