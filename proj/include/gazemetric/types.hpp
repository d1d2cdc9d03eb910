#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gazemetric/errors.hpp"

namespace gazemetric {

enum class ExpertiseClass : int { Expert = 0, Intermediate = 1, Novice = 2 };

inline constexpr std::array<ExpertiseClass, 3> kAllClasses = {
    ExpertiseClass::Expert, ExpertiseClass::Intermediate, ExpertiseClass::Novice};

inline const char* to_string(ExpertiseClass c) {
    switch (c) {
        case ExpertiseClass::Expert: return "Expert";
        case ExpertiseClass::Intermediate: return "Intermediate";
        case ExpertiseClass::Novice: return "Novice";
    }
    return "?";
}

inline ExpertiseClass class_from_string(const std::string& s) {
    std::string lower;
    for (char ch : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    if (lower == "expert") return ExpertiseClass::Expert;
    if (lower == "intermediate") return ExpertiseClass::Intermediate;
    if (lower == "novice") return ExpertiseClass::Novice;
    throw DataError("unknown expertise class: " + s);
}

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double distance(const Vec2& a, const Vec2& b) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

// One raw tracker sample. valid=false means the gaze coordinates are to be
// treated as missing whatever values the row stored. Pupil and gyro channels
// are optional per sample, independent of gaze validity.
struct GazeSample {
    double t_ms = 0.0;
    double gaze_x = 0.0;
    double gaze_y = 0.0;
    std::optional<double> pupil_left;
    std::optional<double> pupil_right;
    std::optional<double> gyro_x;
    std::optional<double> gyro_y;
    std::optional<double> gyro_z;
    bool valid = true;
    // set by clean_gaps when the gaze position was filled in; in-memory
    // annotation, not part of the canonical file format
    bool interpolated = false;

    // canonical-field equality (the interpolation mark is excluded)
    friend bool operator==(const GazeSample& a, const GazeSample& b) {
        return a.t_ms == b.t_ms && a.gaze_x == b.gaze_x && a.gaze_y == b.gaze_y &&
               a.pupil_left == b.pupil_left && a.pupil_right == b.pupil_right &&
               a.gyro_x == b.gyro_x && a.gyro_y == b.gyro_y && a.gyro_z == b.gyro_z &&
               a.valid == b.valid;
    }

    bool gaze_missing() const { return !valid; }

    std::optional<double> pupil_diameter() const {
        if (pupil_left && pupil_right) return (*pupil_left + *pupil_right) / 2.0;
        if (pupil_left) return pupil_left;
        return pupil_right;
    }
};

// Timestamp spacing deviation found at parse time. `index` is the sample
// following the hole.
struct TimingGap {
    std::size_t index = 0;
    double gap_ms = 0.0;
    friend bool operator==(const TimingGap&, const TimingGap&) = default;
};

struct Recording {
    std::string participant_id;
    ExpertiseClass label = ExpertiseClass::Novice;
    std::vector<GazeSample> samples;
    double nominal_rate_hz = 100.0;
    double px_per_degree = 40.0;
    // indices that start a hard segment; always begins with 0. Extended by
    // clean_gaps, which inserts a boundary at every unbridgeable gap.
    std::vector<std::size_t> segment_starts{0};
    std::vector<TimingGap> timing_gaps;

    double nominal_spacing_ms() const { return 1000.0 / nominal_rate_hz; }

    double duration_ms() const {
        return samples.empty() ? 0.0 : samples.back().t_ms - samples.front().t_ms;
    }

    // segment id of sample i, given segment_starts sorted ascending
    std::uint32_t segment_of(std::size_t i) const {
        std::uint32_t seg = 0;
        for (std::size_t k = 1; k < segment_starts.size() && segment_starts[k] <= i; ++k) ++seg;
        return seg;
    }

    std::vector<std::uint32_t> segment_ids() const {
        std::vector<std::uint32_t> ids(samples.size(), 0);
        std::size_t next = 1;
        std::uint32_t cur = 0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            while (next < segment_starts.size() && segment_starts[next] == i) {
                ++cur;
                ++next;
            }
            ids[i] = cur;
        }
        return ids;
    }

    friend bool operator==(const Recording& a, const Recording& b) {
        return a.participant_id == b.participant_id && a.label == b.label &&
               a.samples == b.samples && a.nominal_rate_hz == b.nominal_rate_hz &&
               a.px_per_degree == b.px_per_degree && a.segment_starts == b.segment_starts &&
               a.timing_gaps == b.timing_gaps;
    }
};

// Gap handling policy for clean_gaps. Runs of invalid samples shorter than
// max_interp_gap_ms are linearly interpolated; runs of at least split_gap_ms
// become hard segment boundaries that event detection must not bridge.
struct GapPolicy {
    double max_interp_gap_ms = 75.0;
    double split_gap_ms = 100.0;
};

}  // namespace gazemetric
