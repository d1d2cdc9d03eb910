#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "gazemetric/events.hpp"
#include "gazemetric/ingest.hpp"
#include "gazemetric/types.hpp"

namespace gazemetric {

inline constexpr std::size_t kFeatureCount = 35;

// Fixed feature order. Quads are mean, min, max, std.
inline const std::array<std::string, kFeatureCount>& feature_names() {
    static const std::array<std::string, kFeatureCount> names = {
        "sacc_peak_vel_mean", "sacc_peak_vel_min", "sacc_peak_vel_max", "sacc_peak_vel_std",
        "sacc_amp_mean",      "sacc_amp_min",      "sacc_amp_max",      "sacc_amp_std",
        "sacc_amp_total",
        "sacc_dur_mean",      "sacc_dur_min",      "sacc_dur_max",      "sacc_dur_std",
        "fix_dur_mean",       "fix_dur_min",       "fix_dur_max",       "fix_dur_std",
        "fix_freq",           "sacc_freq",
        "pupil_mean",         "pupil_min",         "pupil_max",         "pupil_std",
        "gyro_x_mean",        "gyro_x_min",        "gyro_x_max",        "gyro_x_std",
        "gyro_y_mean",        "gyro_y_min",        "gyro_y_max",        "gyro_y_std",
        "gyro_z_mean",        "gyro_z_min",        "gyro_z_max",        "gyro_z_std",
    };
    return names;
}

inline std::size_t feature_index(const std::string& name) {
    const auto& names = feature_names();
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw SchemaMismatch("unknown feature: " + name);
    return static_cast<std::size_t>(it - names.begin());
}

// mean/min/max and sample (n-1) standard deviation; n=1 gives std 0,
// an empty series gives zeros with computable=false.
struct StatQuad {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    double std = 0.0;
    bool computable = false;
};

inline StatQuad summarize(const std::vector<double>& values) {
    StatQuad q;
    if (values.empty()) return q;
    q.computable = true;
    q.min = values[0];
    q.max = values[0];
    double sum = 0.0;
    for (double v : values) {
        q.min = std::min(q.min, v);
        q.max = std::max(q.max, v);
        sum += v;
    }
    const double n = static_cast<double>(values.size());
    q.mean = sum / n;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - q.mean) * (v - q.mean);
        q.std = std::sqrt(ss / (n - 1.0));
    }
    return q;
}

struct FeatureVector {
    std::array<double, kFeatureCount> values{};
    std::array<bool, kFeatureCount> computable{};
};

struct FeatureOptions {
    // Table 1 names the peak-velocity derivative, so peak is the default;
    // the chord-based mean velocity is available for sensitivity studies.
    bool use_mean_velocity = false;
};

namespace detail {

inline void put_quad(FeatureVector& fv, std::size_t base, const StatQuad& q) {
    fv.values[base + 0] = q.mean;
    fv.values[base + 1] = q.min;
    fv.values[base + 2] = q.max;
    fv.values[base + 3] = q.std;
    for (std::size_t k = 0; k < 4; ++k) fv.computable[base + k] = q.computable;
}

}  // namespace detail

// The 35 per-participant features: saccade kinematics and timing from the
// event stream, pupil/gyro statistics from the raw samples, and the two
// event frequencies over the stream's valid duration.
inline FeatureVector extract_features(const EventStream& events, const Recording& rec,
                                      const FeatureOptions& opts = {}) {
    if (rec.samples.empty()) throw EmptyRecording(rec.participant_id);
    FeatureVector fv;

    std::vector<double> peak_vel, amps, sacc_dur;
    for (const auto& s : events.saccades) {
        if (opts.use_mean_velocity) {
            peak_vel.push_back(s.duration_ms() > 0.0 ? s.amplitude_deg / s.duration_ms() * 1000.0
                                                     : 0.0);
        } else {
            peak_vel.push_back(s.peak_velocity_dps);
        }
        amps.push_back(s.amplitude_deg);
        sacc_dur.push_back(s.duration_ms());
    }
    std::vector<double> fix_dur;
    for (const auto& f : events.fixations) fix_dur.push_back(f.duration_ms());

    detail::put_quad(fv, feature_index("sacc_peak_vel_mean"), summarize(peak_vel));
    detail::put_quad(fv, feature_index("sacc_amp_mean"), summarize(amps));
    detail::put_quad(fv, feature_index("sacc_dur_mean"), summarize(sacc_dur));
    detail::put_quad(fv, feature_index("fix_dur_mean"), summarize(fix_dur));

    const std::size_t i_total = feature_index("sacc_amp_total");
    double total = 0.0;
    for (double a : amps) total += a;
    fv.values[i_total] = total;
    fv.computable[i_total] = !amps.empty();

    const double seconds = events.valid_duration_ms / 1000.0;
    const std::size_t i_ff = feature_index("fix_freq");
    const std::size_t i_sf = feature_index("sacc_freq");
    if (seconds > 0.0) {
        fv.values[i_ff] = static_cast<double>(events.fixations.size()) / seconds;
        fv.values[i_sf] = static_cast<double>(events.saccades.size()) / seconds;
        fv.computable[i_ff] = fv.computable[i_sf] = true;
    }

    std::vector<double> pupil, gx, gy, gz;
    for (const auto& s : rec.samples) {
        if (const auto p = s.pupil_diameter()) pupil.push_back(*p);
        if (s.gyro_x) gx.push_back(*s.gyro_x);
        if (s.gyro_y) gy.push_back(*s.gyro_y);
        if (s.gyro_z) gz.push_back(*s.gyro_z);
    }
    detail::put_quad(fv, feature_index("pupil_mean"), summarize(pupil));
    detail::put_quad(fv, feature_index("gyro_x_mean"), summarize(gx));
    detail::put_quad(fv, feature_index("gyro_y_mean"), summarize(gy));
    detail::put_quad(fv, feature_index("gyro_z_mean"), summarize(gz));
    return fv;
}

struct FeatureRow {
    std::string participant_id;
    ExpertiseClass label = ExpertiseClass::Novice;
    std::vector<double> values;
    std::vector<bool> computable;
};

// Participants x features, with a stable column schema shared by all rows.
struct FeatureMatrix {
    std::vector<std::string> columns;  // defaults to the full 35-name schema
    std::vector<FeatureRow> rows;

    FeatureMatrix() {
        columns.assign(feature_names().begin(), feature_names().end());
    }

    std::size_t n_features() const { return columns.size(); }

    void add_row(std::string id, ExpertiseClass label, const FeatureVector& fv) {
        if (columns.size() != kFeatureCount) throw SchemaMismatch("matrix schema is restricted");
        FeatureRow row;
        row.participant_id = std::move(id);
        row.label = label;
        row.values.assign(fv.values.begin(), fv.values.end());
        row.computable.assign(fv.computable.begin(), fv.computable.end());
        rows.push_back(std::move(row));
    }

    // restrict to a named subset of columns, preserving row order
    FeatureMatrix select(const std::vector<std::string>& names) const {
        std::vector<std::size_t> idx;
        for (const auto& name : names) {
            const auto it = std::find(columns.begin(), columns.end(), name);
            if (it == columns.end()) throw SchemaMismatch("unknown feature: " + name);
            idx.push_back(static_cast<std::size_t>(it - columns.begin()));
        }
        FeatureMatrix out;
        out.columns = names;
        for (const auto& row : rows) {
            FeatureRow r;
            r.participant_id = row.participant_id;
            r.label = row.label;
            for (std::size_t i : idx) {
                r.values.push_back(row.values[i]);
                r.computable.push_back(row.computable[i]);
            }
            out.rows.push_back(std::move(r));
        }
        return out;
    }

    std::vector<std::size_t> rows_of(ExpertiseClass c) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (rows[i].label == c) out.push_back(i);
        return out;
    }
};

inline FeatureMatrix build_feature_matrix(
    const std::vector<std::pair<EventStream, Recording>>& cohort,
    const FeatureOptions& opts = {}) {
    if (cohort.empty()) throw DataError("cohort must contain at least one participant");
    FeatureMatrix m;
    for (const auto& [events, rec] : cohort) {
        m.add_row(rec.participant_id, rec.label, extract_features(events, rec, opts));
    }
    return m;
}

// CSV: participant_id,label,<feature columns>,<matching *_ok mask columns>
inline void write_feature_matrix(const FeatureMatrix& m, std::ostream& out) {
    std::string buf = "participant_id,label";
    for (const auto& c : m.columns) buf += "," + c;
    for (const auto& c : m.columns) buf += "," + c + "_ok";
    buf.push_back('\n');
    for (const auto& row : m.rows) {
        buf += row.participant_id;
        buf.push_back(',');
        buf += to_string(row.label);
        for (double v : row.values) {
            buf.push_back(',');
            detail::append_double(buf, v);
        }
        for (bool ok : row.computable) {
            buf.push_back(',');
            buf.push_back(ok ? '1' : '0');
        }
        buf.push_back('\n');
    }
    out << buf;
}

inline FeatureMatrix read_feature_matrix(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw DataError("feature matrix: no header");
    const auto cols = detail::split_fields(header, ',');
    if (cols.size() < 3 || cols[0] != "participant_id" || cols[1] != "label")
        throw SchemaMismatch("feature matrix header must start with participant_id,label");
    const std::size_t n_named = cols.size() - 2;
    const std::size_t n_feat = n_named / 2;
    if (n_named % 2 != 0) throw SchemaMismatch("feature/mask column count mismatch");
    for (std::size_t i = 0; i < n_feat; ++i) {
        if (cols[2 + n_feat + i] != cols[2 + i] + "_ok")
            throw SchemaMismatch("mask column order does not mirror features");
    }

    FeatureMatrix m;
    m.columns.assign(cols.begin() + 2, cols.begin() + 2 + static_cast<std::ptrdiff_t>(n_feat));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto f = detail::split_fields(line, ',');
        if (f.size() != cols.size()) throw DataError("feature matrix: ragged row");
        FeatureRow row;
        row.participant_id = f[0];
        row.label = class_from_string(f[1]);
        for (std::size_t i = 0; i < n_feat; ++i) {
            const auto v = detail::parse_double(f[2 + i]);
            if (!v) throw DataError("feature matrix: bad numeric in " + m.columns[i]);
            row.values.push_back(*v);
            row.computable.push_back(f[2 + n_feat + i] != "0");
        }
        m.rows.push_back(std::move(row));
    }
    if (m.rows.empty()) throw DataError("feature matrix: no rows");
    return m;
}

}  // namespace gazemetric
