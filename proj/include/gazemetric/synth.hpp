#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "gazemetric/features.hpp"
#include "gazemetric/rng.hpp"
#include "gazemetric/types.hpp"

namespace gazemetric {

// Synthetic stand-in data at two levels: feature vectors sampled around
// per-class profiles (fast, for harness tests) and full gaze recordings with
// scripted ground-truth events (for detector and end-to-end tests).

struct ClassProfile {
    std::string name;
    std::array<double, kFeatureCount> means{};
    std::array<double, kFeatureCount> dispersions{};  // relative, >= 0

    double mean_of(const std::string& feature) const { return means[feature_index(feature)]; }
};

struct SynthConfig {
    int per_class = 5;
    double duration_s = 60.0;
    double noise_px = 1.0;
    // main sequence: peak velocity saturates as v_max * (1 - exp(-A / a63))
    double v_max_dps = 400.0;
    double a63_deg = 6.0;
    // fixation durations are gamma-shaped, rescaled to fill the session
    double fix_dur_shape = 4.0;
    double fix_dur_mean_ms = 280.0;
    std::uint64_t seed = 1;  // mandatory; no ambient entropy
    double px_per_degree = 40.0;
    double rate_hz = 100.0;
    // amplitude shaping: keeps every scripted saccade comfortably detectable
    double min_amplitude_deg = 10.0;
    double max_amplitude_deg = 28.0;
    double target_amplitude_deg = 13.0;

    void validate() const {
        if (per_class < 1 || duration_s <= 0.0 || noise_px < 0.0 || v_max_dps <= 0.0 ||
            a63_deg <= 0.0 || fix_dur_shape <= 0.0 || fix_dur_mean_ms <= 0.0 ||
            px_per_degree <= 0.0 || rate_hz <= 0.0 || min_amplitude_deg <= 0.0 ||
            max_amplitude_deg < min_amplitude_deg)
            throw ConfigError("synth: all parameters must be positive");
    }
};

inline double main_sequence_peak_velocity(double amplitude_deg, double v_max_dps, double a63_deg) {
    return v_max_dps * (1.0 - std::exp(-amplitude_deg / a63_deg));
}

// The ordering Expert < Intermediate < Novice on total saccade amplitude
// (481.32 / 1120.74 / 1956.21 deg) is the built-in class signal, together
// with peak-velocity spread, minimum amplitude and gyro-z minimum.
inline std::array<ClassProfile, 3> builtin_profiles(double dispersion = 0.10) {
    std::array<double, kFeatureCount> base{};
    auto set = [&](const char* name, double v) { base[feature_index(name)] = v; };
    set("sacc_peak_vel_mean", 180.0);
    set("sacc_peak_vel_min", 45.0);
    set("sacc_peak_vel_max", 420.0);
    set("sacc_amp_mean", 5.0);
    set("sacc_amp_max", 17.0);
    set("sacc_amp_std", 3.5);
    set("sacc_dur_mean", 45.0);
    set("sacc_dur_min", 15.0);
    set("sacc_dur_max", 95.0);
    set("sacc_dur_std", 18.0);
    set("fix_dur_mean", 280.0);
    set("fix_dur_min", 90.0);
    set("fix_dur_max", 1300.0);
    set("fix_dur_std", 230.0);
    set("fix_freq", 2.4);
    set("sacc_freq", 2.3);
    set("pupil_mean", 3.8);
    set("pupil_min", 2.9);
    set("pupil_max", 4.9);
    set("pupil_std", 0.35);
    set("gyro_x_mean", 0.6);
    set("gyro_x_min", -48.0);
    set("gyro_x_max", 47.0);
    set("gyro_x_std", 14.0);
    set("gyro_y_mean", -0.4);
    set("gyro_y_min", -52.0);
    set("gyro_y_max", 50.0);
    set("gyro_y_std", 15.0);
    set("gyro_z_mean", 0.3);
    set("gyro_z_max", 68.0);
    set("gyro_z_std", 17.0);

    std::array<ClassProfile, 3> out;
    const std::array<std::string, 3> names = {"Expert", "Intermediate", "Novice"};
    const std::array<std::array<double, 4>, 3> table = {{
        // peak-vel std (deg/s), amp min (deg), amp total (deg), gyro-z min (deg/s)
        {93.26, 0.86, 481.32, -72.90},
        {121.72, 0.40, 1120.74, -66.47},
        {117.45, 0.64, 1956.21, -80.12},
    }};
    for (std::size_t c = 0; c < 3; ++c) {
        out[c].name = names[c];
        out[c].means = base;
        out[c].means[feature_index("sacc_peak_vel_std")] = table[c][0];
        out[c].means[feature_index("sacc_amp_min")] = table[c][1];
        out[c].means[feature_index("sacc_amp_total")] = table[c][2];
        out[c].means[feature_index("gyro_z_min")] = table[c][3];
        out[c].dispersions.fill(dispersion);
    }
    return out;
}

// true unless the feature is a signed gyro statistic
inline bool feature_is_non_negative(std::size_t index) {
    const std::string& name = feature_names()[index];
    return !(name.rfind("gyro_", 0) == 0 && name.find("_std") == std::string::npos);
}

inline std::string participant_name(ExpertiseClass c, int i) {
    const char prefix[3] = {'E', 'I', 'N'};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%c%02d", prefix[static_cast<int>(c)], i + 1);
    return buf;
}

// Feature-level cohort: each value is profile mean * (1 + dispersion * z),
// clamped at zero where the quantity cannot go negative. Deterministic under
// the seed; participants use derived per-participant streams.
inline FeatureMatrix generate_feature_cohort(const std::array<ClassProfile, 3>& profiles,
                                             int per_class, std::uint64_t seed) {
    if (per_class < 2) throw ConfigError("need at least 2 participants per class");
    FeatureMatrix m;
    for (std::size_t c = 0; c < 3; ++c) {
        for (int i = 0; i < per_class; ++i) {
            Rng rng(derive_seed(seed, c * 4096 + static_cast<std::uint64_t>(i)));
            FeatureVector fv;
            for (std::size_t j = 0; j < kFeatureCount; ++j) {
                double v = profiles[c].means[j] * (1.0 + profiles[c].dispersions[j] * rng.normal());
                if (feature_is_non_negative(j)) v = std::max(0.0, v);
                fv.values[j] = v;
                fv.computable[j] = true;
            }
            m.add_row(participant_name(static_cast<ExpertiseClass>(c), i),
                      static_cast<ExpertiseClass>(c), fv);
        }
    }
    return m;
}

struct TrueEvent {
    enum class Kind { Fixation, Saccade };
    Kind kind = Kind::Fixation;
    double start_ms = 0.0;
    double end_ms = 0.0;
    double amplitude_deg = 0.0;
    double peak_velocity_dps = 0.0;
};

struct GroundTruth {
    std::vector<TrueEvent> events;

    std::size_t saccade_count() const {
        std::size_t n = 0;
        for (const auto& e : events) n += e.kind == TrueEvent::Kind::Saccade ? 1 : 0;
        return n;
    }
    std::vector<TrueEvent> saccades() const {
        std::vector<TrueEvent> out;
        for (const auto& e : events)
            if (e.kind == TrueEvent::Kind::Saccade) out.push_back(e);
        return out;
    }
};

namespace detail {

inline double snap_ms(double t, double grid) { return std::round(t / grid) * grid; }

// reflecting bounded random walk used for the pupil and gyro channels
struct BoundedWalk {
    double value, lo, hi, step;
    double next(Rng& rng) {
        value += rng.normal(0.0, step);
        if (value > hi) value = 2.0 * hi - value;
        if (value < lo) value = 2.0 * lo - value;
        value = std::clamp(value, lo, hi);
        return value;
    }
};

}  // namespace detail

// Scripts alternating fixations and saccades whose amplitudes add up to the
// profile's total-amplitude budget, renders them at the configured sampling
// rate (raised-cosine saccade velocity profile), and returns the recording
// together with the exact scripted events.
inline std::pair<Recording, GroundTruth> generate_signal_recording(const ClassProfile& profile,
                                                                   const SynthConfig& config,
                                                                   Rng& rng,
                                                                   std::string participant_id = "S01",
                                                                   ExpertiseClass label = ExpertiseClass::Novice) {
    config.validate();
    if (config.duration_s < 5.0) throw ConfigError("synth: duration must be at least 5 s");

    const double grid = 1000.0 / config.rate_hz;
    const double duration_ms = config.duration_s * 1000.0;
    const double budget = profile.mean_of("sacc_amp_total");
    const double fix_floor_ms = 100.0;

    auto vpeak = [&](double amp) {
        return main_sequence_peak_velocity(amp, config.v_max_dps, config.a63_deg);
    };
    constexpr double pi = 3.14159265358979323846;
    auto rc_frac = [&](double tau) { return tau - std::sin(2.0 * pi * tau) / (2.0 * pi); };
    auto sacc_ms = [&](double amp) {
        // raised cosine: duration = 2 * amplitude / peak velocity
        const double raw = 2.0 * amp / vpeak(amp) * 1000.0;
        double t = std::max(4.0 * grid, detail::snap_ms(raw, grid));
        // shorten until the first-sample smoothed speed clears the default
        // 0.7 px/ms threshold with margin, so the detected onset is crisp
        const double amp_px = amp * config.px_per_degree;
        const double lead_target = 1.2 * 0.7 * 5.0 * 2.0 * grid;
        while (t > 4.0 * grid &&
               amp_px * (rc_frac(grid / t) + rc_frac(2.0 * grid / t)) < lead_target)
            t -= grid;
        return t;
    };

    // feasibility: saccades at the amplitude cap, separated by floor-length
    // fixations, bound the achievable amplitude rate
    const double cap = config.max_amplitude_deg;
    const double max_rate = cap / (sacc_ms(cap) + fix_floor_ms);
    if (budget / duration_ms > 0.95 * max_rate)
        throw BudgetInfeasible(std::to_string(budget) + " deg in " +
                               std::to_string(config.duration_s) + " s");

    // pick a saccade count that keeps amplitudes inside [min, max]; when the
    // session is short, fewer and larger saccades spend the budget faster
    const int n_min = std::max(1, static_cast<int>(std::ceil(budget / (cap * 0.95))));
    int n = std::max(1, static_cast<int>(std::lround(budget / config.target_amplitude_deg)));
    if (budget / n < config.min_amplitude_deg * 1.1)
        n = std::max(1, static_cast<int>(budget / (config.min_amplitude_deg * 1.1)));
    n = std::max(n, n_min);
    for (;;) {
        const double needed = n * sacc_ms(budget / n) + (n + 1) * fix_floor_ms;
        if (needed <= 0.95 * duration_ms) break;
        if (n <= n_min)
            throw BudgetInfeasible(std::to_string(budget) + " deg in " +
                                   std::to_string(config.duration_s) + " s");
        n = std::max(n_min, n - std::max(1, n / 10));
    }

    // draw amplitudes around the per-saccade target, rescale toward the budget
    const double amp_target = budget / n;
    std::vector<double> amps(n);
    for (auto& a : amps) {
        a = std::clamp(amp_target * std::exp(0.3 * rng.normal() - 0.045), config.min_amplitude_deg,
                       config.max_amplitude_deg);
    }
    for (int pass = 0; pass < 3; ++pass) {
        double sum = 0.0;
        for (double a : amps) sum += a;
        const double scale = budget / sum;
        for (auto& a : amps)
            a = std::clamp(a * scale, config.min_amplitude_deg, config.max_amplitude_deg);
    }

    std::vector<double> sacc_durs(n);
    double total_sacc_ms = 0.0;
    for (int i = 0; i < n; ++i) {
        sacc_durs[i] = sacc_ms(amps[i]);
        total_sacc_ms += sacc_durs[i];
    }
    if (total_sacc_ms + (n + 1) * fix_floor_ms > duration_ms)
        throw BudgetInfeasible("scripted events exceed the session duration");

    // gamma-shaped fixation durations rescaled so the script fills the session
    std::vector<double> fix_durs(n + 1);
    double fix_sum = 0.0;
    for (auto& f : fix_durs) {
        f = rng.gamma(config.fix_dur_shape, config.fix_dur_mean_ms / config.fix_dur_shape);
        fix_sum += f;
    }
    const double fix_budget = duration_ms - total_sacc_ms;
    for (auto& f : fix_durs)
        f = std::max(fix_floor_ms, detail::snap_ms(f * fix_budget / fix_sum, grid));

    // fixation centers wander inside a 4k screen, step length = amplitude
    const double margin = 250.0;
    const Vec2 box_lo{margin, margin};
    const Vec2 box_hi{3840.0 - margin, 2160.0 - margin};
    const Vec2 center{1920.0, 1080.0};
    std::vector<Vec2> centers(n + 1);
    centers[0] = center;
    for (int i = 0; i < n; ++i) {
        const double amp_px = amps[i] * config.px_per_degree;
        Vec2 next;
        bool placed = false;
        for (int attempt = 0; attempt < 24 && !placed; ++attempt) {
            const double ang = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
            next = {centers[i].x + amp_px * std::cos(ang), centers[i].y + amp_px * std::sin(ang)};
            placed = next.x >= box_lo.x && next.x <= box_hi.x && next.y >= box_lo.y && next.y <= box_hi.y;
        }
        if (!placed) {  // aim straight back toward the screen center
            const double dx = center.x - centers[i].x, dy = center.y - centers[i].y;
            const double norm = std::max(1e-9, std::sqrt(dx * dx + dy * dy));
            next = {centers[i].x + amp_px * dx / norm, centers[i].y + amp_px * dy / norm};
        }
        centers[i + 1] = next;
    }

    // assemble the script
    GroundTruth truth;
    double t = 0.0;
    for (int i = 0; i <= n; ++i) {
        TrueEvent fx;
        fx.kind = TrueEvent::Kind::Fixation;
        fx.start_ms = t;
        t += fix_durs[i];
        fx.end_ms = t;
        truth.events.push_back(fx);
        if (i == n) break;
        TrueEvent sc;
        sc.kind = TrueEvent::Kind::Saccade;
        sc.start_ms = t;
        t += sacc_durs[i];
        sc.end_ms = t;
        sc.amplitude_deg = amps[i];
        sc.peak_velocity_dps = 2.0 * amps[i] / (sacc_durs[i] / 1000.0);
        truth.events.push_back(sc);
    }
    const double total_ms = t;

    // render samples
    Recording rec;
    rec.participant_id = std::move(participant_id);
    rec.label = label;
    rec.nominal_rate_hz = config.rate_hz;
    rec.px_per_degree = config.px_per_degree;

    const auto p_lo = profile.mean_of("pupil_min"), p_hi = profile.mean_of("pupil_max");
    detail::BoundedWalk pupil{profile.mean_of("pupil_mean"), p_lo, p_hi, (p_hi - p_lo) * 0.02};
    auto gyro_walk = [&](const char* axis_mean, const char* axis_min, const char* axis_max) {
        // 4% steps let the reflected walk visit both bounds within a few
        // seconds, so the extracted extrema track the profile
        const double lo = profile.mean_of(axis_min), hi = profile.mean_of(axis_max);
        return detail::BoundedWalk{profile.mean_of(axis_mean), lo, hi, (hi - lo) * 0.04};
    };
    auto wx = gyro_walk("gyro_x_mean", "gyro_x_min", "gyro_x_max");
    auto wy = gyro_walk("gyro_y_mean", "gyro_y_min", "gyro_y_max");
    auto wz = gyro_walk("gyro_z_mean", "gyro_z_min", "gyro_z_max");

    const std::size_t n_samples = static_cast<std::size_t>(std::floor(total_ms / grid)) + 1;
    std::size_t event_idx = 0;
    std::size_t fixation_count = 0;
    for (std::size_t k = 0; k < n_samples; ++k) {
        const double tk = static_cast<double>(k) * grid;
        while (event_idx + 1 < truth.events.size() && tk >= truth.events[event_idx].end_ms)
            fixation_count += truth.events[event_idx++].kind == TrueEvent::Kind::Fixation ? 1 : 0;
        const auto& ev = truth.events[event_idx];

        Vec2 pos;
        if (ev.kind == TrueEvent::Kind::Fixation) {
            pos = centers[fixation_count];
        } else {
            // inside saccade i the preceding fixation i is already counted
            const Vec2 from = centers[fixation_count - 1];
            const Vec2 to = centers[fixation_count];
            const double T = ev.end_ms - ev.start_ms;
            const double tau = std::clamp((tk - ev.start_ms) / T, 0.0, 1.0);
            const double f = tau - std::sin(2.0 * 3.14159265358979323846 * tau) /
                                       (2.0 * 3.14159265358979323846);
            pos = {from.x + (to.x - from.x) * f, from.y + (to.y - from.y) * f};
        }
        GazeSample s;
        s.t_ms = tk;
        s.gaze_x = pos.x + (config.noise_px > 0.0 ? rng.normal(0.0, config.noise_px) : 0.0);
        s.gaze_y = pos.y + (config.noise_px > 0.0 ? rng.normal(0.0, config.noise_px) : 0.0);
        const double p = pupil.next(rng);
        s.pupil_left = p + 0.05;
        s.pupil_right = p - 0.05;
        s.gyro_x = wx.next(rng);
        s.gyro_y = wy.next(rng);
        s.gyro_z = wz.next(rng);
        s.valid = true;
        rec.samples.push_back(s);
    }
    return {std::move(rec), std::move(truth)};
}

// Signal-level cohort with per-participant derived streams.
inline std::vector<std::pair<Recording, GroundTruth>> generate_signal_cohort(
    const std::array<ClassProfile, 3>& profiles, const SynthConfig& config) {
    std::vector<std::pair<Recording, GroundTruth>> out;
    for (std::size_t c = 0; c < 3; ++c) {
        for (int i = 0; i < config.per_class; ++i) {
            Rng rng(derive_seed(config.seed, 0x51 * (c + 1) + 7919 * static_cast<std::uint64_t>(i)));
            out.push_back(generate_signal_recording(profiles[c], config, rng,
                                                    participant_name(static_cast<ExpertiseClass>(c), i),
                                                    static_cast<ExpertiseClass>(c)));
        }
    }
    return out;
}

}  // namespace gazemetric
