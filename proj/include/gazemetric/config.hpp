#pragma once

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gazemetric/events.hpp"
#include "gazemetric/features.hpp"
#include "gazemetric/harness.hpp"
#include "gazemetric/ingest.hpp"
#include "gazemetric/svm.hpp"
#include "gazemetric/synth.hpp"

namespace gazemetric {

// Layered configuration: built-in defaults, then the config file (flat
// key=value lines, # comments), then command-line flags. Every output embeds
// the effective snapshot.
struct PipelineConfig {
    GapPolicy gap;
    double nominal_rate_hz = 100.0;
    double px_per_degree = 40.0;
    DetectorParams detector;
    FeatureOptions features;
    SvmConfig svm;
    int cv_runs = 1000;
    std::uint64_t cv_seed = 42;
    int cv_top_k = 4;
    int cv_threads = 1;
    SynthConfig synth;
    double synth_dispersion = 0.10;

    void apply(const std::string& key, const std::string& raw);
    nlohmann::ordered_json snapshot() const;
};

namespace detail {

inline double to_number(const std::string& key, const std::string& raw) {
    const auto v = parse_double(raw);
    if (!v) throw ConfigError(key + ": expected a number, got '" + raw + "'");
    return *v;
}

inline bool to_bool(const std::string& key, const std::string& raw) {
    if (raw == "1" || raw == "true") return true;
    if (raw == "0" || raw == "false") return false;
    throw ConfigError(key + ": expected 0/1, got '" + raw + "'");
}

}  // namespace detail

inline void PipelineConfig::apply(const std::string& key, const std::string& raw) {
    using detail::to_bool;
    using detail::to_number;
    if (key == "ingest.max_interp_gap_ms") gap.max_interp_gap_ms = to_number(key, raw);
    else if (key == "ingest.split_gap_ms") gap.split_gap_ms = to_number(key, raw);
    else if (key == "ingest.nominal_rate_hz") nominal_rate_hz = to_number(key, raw);
    else if (key == "ingest.px_per_degree") px_per_degree = to_number(key, raw);
    else if (key == "detector.threshold_px_ms") detector.threshold_px_ms = to_number(key, raw);
    else if (key == "detector.min_fixation_ms") detector.min_fixation_ms = to_number(key, raw);
    else if (key == "detector.min_saccade_ms") detector.min_saccade_ms = to_number(key, raw);
    else if (key == "detector.window") detector.window = static_cast<int>(to_number(key, raw));
    else if (key == "features.use_mean_velocity") features.use_mean_velocity = to_bool(key, raw);
    else if (key == "svm.kernel") svm.kernel = kernel_from_string(raw);
    else if (key == "svm.c") svm.c = to_number(key, raw);
    else if (key == "svm.gamma") svm.gamma = to_number(key, raw);
    else if (key == "svm.tol") svm.tol = to_number(key, raw);
    else if (key == "cv.runs") cv_runs = static_cast<int>(to_number(key, raw));
    else if (key == "cv.seed") cv_seed = static_cast<std::uint64_t>(to_number(key, raw));
    else if (key == "cv.top_k") cv_top_k = static_cast<int>(to_number(key, raw));
    else if (key == "cv.threads") cv_threads = static_cast<int>(to_number(key, raw));
    else if (key == "synth.per_class") synth.per_class = static_cast<int>(to_number(key, raw));
    else if (key == "synth.duration_s") synth.duration_s = to_number(key, raw);
    else if (key == "synth.noise_px") synth.noise_px = to_number(key, raw);
    else if (key == "synth.v_max_dps") synth.v_max_dps = to_number(key, raw);
    else if (key == "synth.a63_deg") synth.a63_deg = to_number(key, raw);
    else if (key == "synth.fix_dur_shape") synth.fix_dur_shape = to_number(key, raw);
    else if (key == "synth.fix_dur_mean_ms") synth.fix_dur_mean_ms = to_number(key, raw);
    else if (key == "synth.seed") synth.seed = static_cast<std::uint64_t>(to_number(key, raw));
    else if (key == "synth.min_amplitude_deg") synth.min_amplitude_deg = to_number(key, raw);
    else if (key == "synth.max_amplitude_deg") synth.max_amplitude_deg = to_number(key, raw);
    else if (key == "synth.target_amplitude_deg") synth.target_amplitude_deg = to_number(key, raw);
    else if (key == "synth.dispersion") synth_dispersion = to_number(key, raw);
    else throw ConfigError("unknown config key: " + key);
}

inline void load_config_file(PipelineConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string trimmed;
        for (char c : line)
            if (c != '\r') trimmed.push_back(c);
        const auto first = trimmed.find_first_not_of(" \t");
        if (first == std::string::npos || trimmed[first] == '#') continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
        auto strip = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        cfg.apply(strip(trimmed.substr(0, eq)), strip(trimmed.substr(eq + 1)));
    }
}

inline nlohmann::ordered_json PipelineConfig::snapshot() const {
    nlohmann::ordered_json j;
    j["ingest.max_interp_gap_ms"] = gap.max_interp_gap_ms;
    j["ingest.split_gap_ms"] = gap.split_gap_ms;
    j["ingest.nominal_rate_hz"] = nominal_rate_hz;
    j["ingest.px_per_degree"] = px_per_degree;
    j["detector.threshold_px_ms"] = detector.threshold_px_ms;
    j["detector.min_fixation_ms"] = detector.min_fixation_ms;
    j["detector.min_saccade_ms"] = detector.min_saccade_ms;
    j["detector.window"] = detector.window;
    j["features.use_mean_velocity"] = features.use_mean_velocity;
    j["svm.kernel"] = to_string(svm.kernel);
    j["svm.c"] = svm.c;
    j["svm.gamma"] = svm.gamma;
    j["svm.tol"] = svm.tol;
    j["cv.runs"] = cv_runs;
    j["cv.seed"] = cv_seed;
    j["cv.top_k"] = cv_top_k;
    j["synth.per_class"] = synth.per_class;
    j["synth.duration_s"] = synth.duration_s;
    j["synth.noise_px"] = synth.noise_px;
    j["synth.v_max_dps"] = synth.v_max_dps;
    j["synth.a63_deg"] = synth.a63_deg;
    j["synth.fix_dur_shape"] = synth.fix_dur_shape;
    j["synth.fix_dur_mean_ms"] = synth.fix_dur_mean_ms;
    j["synth.seed"] = synth.seed;
    j["synth.min_amplitude_deg"] = synth.min_amplitude_deg;
    j["synth.max_amplitude_deg"] = synth.max_amplitude_deg;
    j["synth.target_amplitude_deg"] = synth.target_amplitude_deg;
    j["synth.dispersion"] = synth_dispersion;
    return j;
}

}  // namespace gazemetric
