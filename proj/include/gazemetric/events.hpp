#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "gazemetric/types.hpp"

namespace gazemetric {

// Velocity-threshold event detection over sliding-window-averaged positions:
// positions are smoothed by a centered moving mean, per-sample speed comes
// from a central difference, and samples are classified against a fixed
// speed threshold (default 0.7 px/ms).

struct DetectorParams {
    double threshold_px_ms = 0.7;
    double min_fixation_ms = 60.0;
    double min_saccade_ms = 10.0;
    int window = 5;  // smoothing window, odd sample count
    double px_per_degree = 40.0;
    double nominal_rate_hz = 100.0;
};

inline DetectorParams detector_params_for(const Recording& rec) {
    DetectorParams p;
    p.px_per_degree = rec.px_per_degree;
    p.nominal_rate_hz = rec.nominal_rate_hz;
    return p;
}

struct Fixation {
    double start_ms = 0.0;
    double end_ms = 0.0;
    double centroid_x = 0.0;
    double centroid_y = 0.0;
    double duration_ms() const { return end_ms - start_ms; }
};

struct Saccade {
    double start_ms = 0.0;
    double end_ms = 0.0;
    double amplitude_deg = 0.0;      // chord between run endpoints
    double peak_velocity_dps = 0.0;  // max in-run speed, converted
    double duration_ms() const { return end_ms - start_ms; }
};

struct EventStream {
    std::vector<Fixation> fixations;
    std::vector<Saccade> saccades;
    double valid_duration_ms = 0.0;
};

struct VelocityTrace {
    std::vector<double> t_ms;
    std::vector<std::optional<Vec2>> position;  // smoothed, missing where no valid neighbor
    std::vector<std::optional<double>> speed;   // px/ms, missing at ends and across gaps
    std::vector<std::uint32_t> segment;
};

// Centered moving mean over valid positions, clipped to segment boundaries.
// A sample with no valid position anywhere in its clipped window stays missing.
inline std::vector<std::optional<Vec2>> smooth_positions(const Recording& rec, int window) {
    if (window < 1 || window % 2 == 0) throw ConfigError("smoothing window must be odd and >= 1");
    const std::size_t n = rec.samples.size();
    if (static_cast<std::size_t>(window) > n)
        throw WindowTooLarge(std::to_string(window) + " > " + std::to_string(n) + " samples");

    const auto seg = rec.segment_ids();
    const int half = window / 2;
    std::vector<std::optional<Vec2>> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double sx = 0.0, sy = 0.0;
        int count = 0;
        const std::ptrdiff_t lo = static_cast<std::ptrdiff_t>(i) - half;
        const std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(i) + half;
        for (std::ptrdiff_t k = std::max<std::ptrdiff_t>(lo, 0);
             k <= hi && k < static_cast<std::ptrdiff_t>(n); ++k) {
            const auto& s = rec.samples[static_cast<std::size_t>(k)];
            if (!s.valid || seg[static_cast<std::size_t>(k)] != seg[i]) continue;
            sx += s.gaze_x;
            sy += s.gaze_y;
            ++count;
        }
        if (count > 0) out[i] = Vec2{sx / count, sy / count};
    }
    return out;
}

// Central-difference speed in px/ms. Endpoints, samples next to missing
// positions, and samples whose difference would straddle a segment boundary
// all get missing speed.
inline VelocityTrace compute_velocity(const std::vector<std::optional<Vec2>>& smoothed,
                                      const std::vector<double>& t_ms,
                                      std::vector<std::uint32_t> segment = {}) {
    const std::size_t n = smoothed.size();
    if (t_ms.size() != n) throw DataError("position/timestamp length mismatch");
    if (n < 3) throw EmptyRecording("need at least 3 samples for velocity");
    if (segment.empty()) segment.assign(n, 0);

    VelocityTrace trace;
    trace.t_ms = t_ms;
    trace.position = smoothed;
    trace.segment = std::move(segment);
    trace.speed.assign(n, std::nullopt);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const auto& prev = smoothed[i - 1];
        const auto& next = smoothed[i + 1];
        if (!prev || !next) continue;
        if (trace.segment[i - 1] != trace.segment[i + 1]) continue;
        const double dt = t_ms[i + 1] - t_ms[i - 1];
        if (dt <= 0.0) continue;
        trace.speed[i] = distance(*next, *prev) / dt;
    }
    return trace;
}

namespace detail {

struct Run {
    bool above = false;  // speed > threshold
    std::size_t first = 0;
    std::size_t last = 0;  // inclusive
};

}  // namespace detail

// Classifies the trace into fixations and saccades. Maximal above-threshold
// runs of at least min_saccade become saccades; complementary runs of at
// least min_fixation become fixations. A sub-minimum above run flanked by
// below runs is folded into one fixation; other sub-minimum runs are dropped.
inline EventStream segment_events(const VelocityTrace& trace, const DetectorParams& params) {
    const std::size_t n = trace.speed.size();
    EventStream out;

    // valid duration: spans of position-defined samples within one segment
    {
        std::size_t i = 0;
        while (i < n) {
            if (!trace.position[i]) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j + 1 < n && trace.position[j + 1] && trace.segment[j + 1] == trace.segment[i])
                ++j;
            out.valid_duration_ms += trace.t_ms[j] - trace.t_ms[i];
            i = j + 1;
        }
    }

    bool any_speed = false;
    for (const auto& s : trace.speed) any_speed |= s.has_value();
    if (!any_speed) throw EmptyRecording("no defined speeds");

    std::vector<Fixation> fixations;
    std::vector<Saccade> saccades;
    std::vector<bool> claimed(n, false);

    const double thr = params.threshold_px_ms;
    std::size_t span_start = 0;
    while (span_start < n) {
        if (!trace.speed[span_start]) {
            ++span_start;
            continue;
        }
        // maximal span of defined-speed samples within one segment
        std::size_t span_end = span_start;
        while (span_end + 1 < n && trace.speed[span_end + 1] &&
               trace.segment[span_end + 1] == trace.segment[span_start])
            ++span_end;

        std::vector<detail::Run> runs;
        for (std::size_t i = span_start; i <= span_end;) {
            const bool above = *trace.speed[i] > thr;
            std::size_t j = i;
            while (j + 1 <= span_end && (*trace.speed[j + 1] > thr) == above) ++j;
            runs.push_back({above, i, j});
            i = j + 1;
        }

        auto run_ms = [&](const detail::Run& r) { return trace.t_ms[r.last] - trace.t_ms[r.first]; };

        // fold short velocity blips that sit between two below runs
        bool merged = true;
        while (merged) {
            merged = false;
            for (std::size_t r = 0; r < runs.size(); ++r) {
                if (!runs[r].above || run_ms(runs[r]) >= params.min_saccade_ms) continue;
                if (r == 0 || r + 1 == runs.size()) continue;
                runs[r - 1].last = runs[r + 1].last;  // neighbors are below by alternation
                runs.erase(runs.begin() + r, runs.begin() + r + 2);
                merged = true;
                break;
            }
        }

        for (const auto& r : runs) {
            const double dur = run_ms(r);
            if (r.above) {
                // a saccade needs positive duration even when min_saccade is 0
                if (dur < std::max(params.min_saccade_ms, 1e-9)) continue;
                Saccade s;
                s.start_ms = trace.t_ms[r.first];
                s.end_ms = trace.t_ms[r.last];
                s.amplitude_deg =
                    distance(*trace.position[r.last], *trace.position[r.first]) / params.px_per_degree;
                double peak = 0.0;
                for (std::size_t k = r.first; k <= r.last; ++k) peak = std::max(peak, *trace.speed[k]);
                s.peak_velocity_dps = peak * 1000.0 / params.px_per_degree;
                saccades.push_back(s);
                for (std::size_t k = r.first; k <= r.last; ++k) claimed[k] = true;
            } else {
                if (dur < params.min_fixation_ms) continue;
                // absorb flanking missing-speed samples that still have a
                // position in the same segment (recording/segment edges)
                std::size_t first = r.first, last = r.last;
                while (first > 0 && !claimed[first - 1] && !trace.speed[first - 1] &&
                       trace.position[first - 1] && trace.segment[first - 1] == trace.segment[r.first])
                    --first;
                while (last + 1 < n && !claimed[last + 1] && !trace.speed[last + 1] &&
                       trace.position[last + 1] && trace.segment[last + 1] == trace.segment[r.last])
                    ++last;
                Fixation f;
                f.start_ms = trace.t_ms[first];
                f.end_ms = trace.t_ms[last];
                double sx = 0.0, sy = 0.0;
                std::size_t count = 0;
                for (std::size_t k = first; k <= last; ++k) {
                    if (!trace.position[k]) continue;
                    sx += trace.position[k]->x;
                    sy += trace.position[k]->y;
                    ++count;
                }
                f.centroid_x = sx / static_cast<double>(count);
                f.centroid_y = sy / static_cast<double>(count);
                fixations.push_back(f);
                for (std::size_t k = first; k <= last; ++k) claimed[k] = true;
            }
        }
        span_start = span_end + 1;
    }

    out.fixations = std::move(fixations);
    out.saccades = std::move(saccades);
    return out;
}

// Full pipeline: smooth -> central-difference velocity -> classify.
inline EventStream detect_events(const Recording& rec, const DetectorParams& params) {
    const auto smoothed = smooth_positions(rec, params.window);
    std::vector<double> t;
    t.reserve(rec.samples.size());
    for (const auto& s : rec.samples) t.push_back(s.t_ms);
    const auto trace = compute_velocity(smoothed, t, rec.segment_ids());
    return segment_events(trace, params);
}

}  // namespace gazemetric
