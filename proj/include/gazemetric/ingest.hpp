#pragma once

#include <algorithm>
#include <charconv>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gazemetric/types.hpp"

namespace gazemetric {

// Canonical recording file: UTF-8, delimited text (comma or tab), first line
// header. Missing numeric = empty field, valid in {0,1}.
inline constexpr const char* kCanonicalHeader =
    "t_ms,gx_px,gy_px,pupil_l_mm,pupil_r_mm,gyro_x_dps,gyro_y_dps,gyro_z_dps,valid";

// Names the source column for each sample field. Timestamp/gaze columns are
// required; the rest may be empty strings, meaning "not present in this file".
struct ColumnMapping {
    std::string timestamp = "t_ms";
    std::string gaze_x = "gx_px";
    std::string gaze_y = "gy_px";
    std::string pupil_left = "pupil_l_mm";
    std::string pupil_right = "pupil_r_mm";
    std::string gyro_x = "gyro_x_dps";
    std::string gyro_y = "gyro_y_dps";
    std::string gyro_z = "gyro_z_dps";
    std::string valid = "valid";
};

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == delim) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

inline std::optional<double> parse_double(std::string_view s) {
    // trim ascii whitespace
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return v;
}

// shortest decimal that round-trips the double exactly
inline void append_double(std::string& out, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    out.append(buf, ptr);
}

inline void append_opt(std::string& out, const std::optional<double>& v) {
    if (v) append_double(out, *v);
}

}  // namespace detail

// Parses a delimited gaze log. Rows whose mapped numeric fields fail to parse
// become valid=false samples; a row whose timestamp fails to parse is dropped.
inline Recording parse_recording(std::istream& source, const ColumnMapping& format = {},
                                 std::string participant_id = {},
                                 double nominal_rate_hz = 100.0) {
    Recording rec;
    rec.participant_id = std::move(participant_id);
    rec.nominal_rate_hz = nominal_rate_hz;

    std::string header_line;
    if (!std::getline(source, header_line)) throw EmptyRecording("no header line");
    const char delim = header_line.find('\t') != std::string::npos ? '\t' : ',';
    const auto header = detail::split_fields(header_line, delim);

    std::map<std::string, std::size_t> col_index;
    for (std::size_t i = 0; i < header.size(); ++i) col_index[header[i]] = i;

    auto require = [&](const std::string& name) -> std::size_t {
        auto it = col_index.find(name);
        if (it == col_index.end()) throw MissingColumn(name);
        return it->second;
    };
    auto optional_col = [&](const std::string& name) -> std::optional<std::size_t> {
        if (name.empty()) return std::nullopt;
        auto it = col_index.find(name);
        if (it == col_index.end()) return std::nullopt;
        return it->second;
    };

    const std::size_t c_t = require(format.timestamp);
    const std::size_t c_gx = require(format.gaze_x);
    const std::size_t c_gy = require(format.gaze_y);
    const auto c_pl = optional_col(format.pupil_left);
    const auto c_pr = optional_col(format.pupil_right);
    const auto c_wx = optional_col(format.gyro_x);
    const auto c_wy = optional_col(format.gyro_y);
    const auto c_wz = optional_col(format.gyro_z);
    const auto c_valid = optional_col(format.valid);

    auto field = [&](const std::vector<std::string>& row, std::size_t i) -> std::string_view {
        return i < row.size() ? std::string_view(row[i]) : std::string_view();
    };

    std::string line;
    while (std::getline(source, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto row = detail::split_fields(line, delim);
        const auto t = detail::parse_double(field(row, c_t));
        if (!t) continue;  // timestamp must parse or the row is rejected

        GazeSample s;
        s.t_ms = *t;
        const auto gx = detail::parse_double(field(row, c_gx));
        const auto gy = detail::parse_double(field(row, c_gy));
        s.valid = gx.has_value() && gy.has_value();
        s.gaze_x = gx.value_or(0.0);
        s.gaze_y = gy.value_or(0.0);
        if (c_pl) s.pupil_left = detail::parse_double(field(row, *c_pl));
        if (c_pr) s.pupil_right = detail::parse_double(field(row, *c_pr));
        if (c_wx) s.gyro_x = detail::parse_double(field(row, *c_wx));
        if (c_wy) s.gyro_y = detail::parse_double(field(row, *c_wy));
        if (c_wz) s.gyro_z = detail::parse_double(field(row, *c_wz));
        if (c_valid) {
            const auto v = detail::parse_double(field(row, *c_valid));
            if (v && *v == 0.0) s.valid = false;
        }

        if (!rec.samples.empty()) {
            const double prev = rec.samples.back().t_ms;
            if (s.t_ms <= prev) {
                std::ostringstream msg;
                msg << "t=" << s.t_ms << " after t=" << prev;
                throw NonMonotoneTimestamps(msg.str());
            }
        } else if (s.t_ms < 0.0) {
            throw DataError("negative timestamp");
        }
        rec.samples.push_back(s);
    }

    if (rec.samples.empty()) throw EmptyRecording("zero parsable rows");

    // record spacing deviations (dropped frames); never silently ignored
    const double spacing = rec.nominal_spacing_ms();
    for (std::size_t i = 1; i < rec.samples.size(); ++i) {
        const double dt = rec.samples[i].t_ms - rec.samples[i - 1].t_ms;
        if (dt > 1.5 * spacing) rec.timing_gaps.push_back({i, dt});
    }
    return rec;
}

// Writes the canonical format. Finite values round-trip bit-exactly through
// parse_recording.
inline void write_recording(const Recording& rec, std::ostream& out) {
    std::string buf(kCanonicalHeader);
    buf.push_back('\n');
    for (const auto& s : rec.samples) {
        detail::append_double(buf, s.t_ms);
        buf.push_back(',');
        detail::append_double(buf, s.gaze_x);
        buf.push_back(',');
        detail::append_double(buf, s.gaze_y);
        buf.push_back(',');
        detail::append_opt(buf, s.pupil_left);
        buf.push_back(',');
        detail::append_opt(buf, s.pupil_right);
        buf.push_back(',');
        detail::append_opt(buf, s.gyro_x);
        buf.push_back(',');
        detail::append_opt(buf, s.gyro_y);
        buf.push_back(',');
        detail::append_opt(buf, s.gyro_z);
        buf.push_back(',');
        buf.push_back(s.valid ? '1' : '0');
        buf.push_back('\n');
    }
    out << buf;
}

// Fills short invalid runs by linear interpolation between the flanking valid
// samples and records hard segment boundaries at unbridgeable gaps (long
// invalid runs as well as holes in the timestamp grid). Sample count is
// preserved; valid samples are never modified. Idempotent.
inline Recording clean_gaps(const Recording& rec, const GapPolicy& policy = {}) {
    Recording out = rec;
    const double spacing = rec.nominal_spacing_ms();
    std::vector<std::size_t> boundaries;

    const auto& s = out.samples;
    const std::size_t n = s.size();
    std::size_t i = 0;
    while (i < n) {
        if (s[i].valid) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && !s[j].valid) ++j;  // invalid run [i, j)
        const bool has_before = i > 0;
        const bool has_after = j < n;
        double run_ms;
        if (has_before && has_after) {
            run_ms = s[j].t_ms - s[i - 1].t_ms - spacing;
        } else if (j > i) {
            run_ms = s[j - 1].t_ms - s[i].t_ms + spacing;
        } else {
            run_ms = 0.0;
        }

        if (has_before && has_after && run_ms < policy.max_interp_gap_ms) {
            const auto& a = s[i - 1];
            const auto& b = s[j];
            const double span = b.t_ms - a.t_ms;
            for (std::size_t k = i; k < j; ++k) {
                const double f = (s[k].t_ms - a.t_ms) / span;
                auto& m = out.samples[k];
                m.gaze_x = a.gaze_x + f * (b.gaze_x - a.gaze_x);
                m.gaze_y = a.gaze_y + f * (b.gaze_y - a.gaze_y);
                m.valid = true;
                m.interpolated = true;
            }
        } else if (run_ms >= policy.split_gap_ms && has_after) {
            boundaries.push_back(j);  // next segment starts after the gap
        }
        i = j;
    }

    // holes in the timestamp grid of at least split_gap_ms also split
    for (std::size_t k = 1; k < n; ++k) {
        const double dt = s[k].t_ms - s[k - 1].t_ms;
        if (dt >= policy.split_gap_ms + spacing) boundaries.push_back(k);
    }

    std::vector<std::size_t> starts{0};
    std::sort(boundaries.begin(), boundaries.end());
    for (std::size_t b : boundaries) {
        if (b != starts.back()) starts.push_back(b);
    }
    out.segment_starts = std::move(starts);
    return out;
}

}  // namespace gazemetric
