#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include <gazemetric/features.hpp>
#include <gazemetric/synth.hpp>

#include "support/helpers.hpp"

using namespace gazemetric;

namespace {

EventStream hand_stream(const std::vector<double>& saccade_amps, std::size_t n_fix,
                        double valid_ms) {
    EventStream ev;
    double t = 0.0;
    for (double amp : saccade_amps) {
        Saccade s;
        s.start_ms = t;
        s.end_ms = t + 40.0;
        s.amplitude_deg = amp;
        s.peak_velocity_dps = amp * 50.0;
        ev.saccades.push_back(s);
        t += 300.0;
    }
    for (std::size_t i = 0; i < n_fix; ++i) {
        Fixation f;
        f.start_ms = t;
        f.end_ms = t + 200.0;
        f.centroid_x = 100.0;
        f.centroid_y = 100.0;
        ev.fixations.push_back(f);
        t += 300.0;
    }
    ev.valid_duration_ms = valid_ms;
    return ev;
}

}  // namespace

TEST_CASE("summarize: singleton", "[features]") {
    const StatQuad q = summarize({5.0});
    CHECK(q.mean == 5.0);
    CHECK(q.min == 5.0);
    CHECK(q.max == 5.0);
    CHECK(q.std == 0.0);
    CHECK(q.computable);
}

TEST_CASE("summarize: two values, sample std", "[features]") {
    const StatQuad q = summarize({2.0, 4.0});
    CHECK(q.mean == Catch::Approx(3.0).epsilon(1e-12));
    CHECK(q.min == 2.0);
    CHECK(q.max == 4.0);
    CHECK(q.std == Catch::Approx(std::sqrt(2.0)).epsilon(1e-12));  // (n-1) convention
}

TEST_CASE("summarize: empty input is masked", "[features]") {
    const StatQuad q = summarize({});
    CHECK_FALSE(q.computable);
    CHECK(q.mean == 0.0);
    CHECK(q.std == 0.0);
}

TEST_CASE("features: schema is fixed and Table-1 columns exist", "[features]") {
    REQUIRE(feature_names().size() == 35);
    CHECK(feature_index("sacc_peak_vel_std") == 3);
    CHECK(feature_index("sacc_amp_min") == 5);
    CHECK(feature_index("sacc_amp_total") == 8);
    CHECK(feature_index("gyro_z_min") == 32);
    CHECK_THROWS_AS(feature_index("not_a_feature"), SchemaMismatch);
}

TEST_CASE("features: hand-computed saccade block", "[features]") {
    const auto ev = hand_stream({2.0, 4.0}, 3, 10'000.0);
    const Recording rec = test_helpers::flat_recording(10);
    const FeatureVector fv = extract_features(ev, rec);

    CHECK(fv.values[feature_index("sacc_amp_total")] == Catch::Approx(6.0).epsilon(1e-12));
    CHECK(fv.values[feature_index("sacc_amp_min")] == 2.0);
    CHECK(fv.values[feature_index("sacc_amp_max")] == 4.0);
    CHECK(fv.values[feature_index("sacc_amp_mean")] == Catch::Approx(3.0).epsilon(1e-12));
    CHECK(fv.values[feature_index("sacc_amp_std")] ==
          Catch::Approx(std::sqrt(2.0)).epsilon(1e-9));
    CHECK(fv.values[feature_index("sacc_dur_mean")] == Catch::Approx(40.0));
    CHECK(fv.values[feature_index("sacc_freq")] == Catch::Approx(0.2));
}

TEST_CASE("features: five fixations over ten seconds", "[features]") {
    const auto ev = hand_stream({}, 5, 10'000.0);
    const Recording rec = test_helpers::flat_recording(10);
    const FeatureVector fv = extract_features(ev, rec);
    CHECK(fv.values[feature_index("fix_freq")] == Catch::Approx(0.5).epsilon(1e-12));
    CHECK(fv.computable[feature_index("fix_freq")]);
}

TEST_CASE("features: zero saccades masks the saccade block only", "[features]") {
    const auto ev = hand_stream({}, 5, 10'000.0);
    const Recording rec = test_helpers::flat_recording(10);
    const FeatureVector fv = extract_features(ev, rec);

    for (const char* name : {"sacc_peak_vel_mean", "sacc_peak_vel_min", "sacc_peak_vel_max",
                             "sacc_peak_vel_std", "sacc_amp_mean", "sacc_amp_min", "sacc_amp_max",
                             "sacc_amp_std", "sacc_amp_total"}) {
        const std::size_t i = feature_index(name);
        CHECK_FALSE(fv.computable[i]);
        CHECK(fv.values[i] == 0.0);
    }
    // durations of an empty series are masked by the same policy
    CHECK_FALSE(fv.computable[feature_index("sacc_dur_mean")]);
    // a zero count over positive time is a real frequency, not missing data
    CHECK(fv.computable[feature_index("sacc_freq")]);
    CHECK(fv.values[feature_index("sacc_freq")] == 0.0);
    CHECK(fv.computable[feature_index("fix_dur_mean")]);
    CHECK(fv.values[feature_index("fix_dur_mean")] == Catch::Approx(200.0));
}

TEST_CASE("features: pupil pairing rules", "[features]") {
    Recording rec = test_helpers::flat_recording(4);
    rec.samples[0].pupil_left = 3.0;
    rec.samples[0].pupil_right = 4.0;  // both -> mean 3.5
    rec.samples[1].pupil_left = 5.0;   // single side -> as is
    rec.samples[2].pupil_right = 2.0;
    // sample 3 has neither -> skipped
    const auto ev = hand_stream({}, 1, 1'000.0);
    const FeatureVector fv = extract_features(ev, rec);
    CHECK(fv.values[feature_index("pupil_mean")] == Catch::Approx((3.5 + 5.0 + 2.0) / 3.0));
    CHECK(fv.values[feature_index("pupil_min")] == 2.0);
    CHECK(fv.values[feature_index("pupil_max")] == 5.0);
}

TEST_CASE("features: mean-velocity flag swaps the velocity derivative", "[features]") {
    const auto ev = hand_stream({2.0, 4.0}, 1, 10'000.0);  // 40 ms saccades
    const Recording rec = test_helpers::flat_recording(10);
    FeatureOptions opts;
    const FeatureVector peak = extract_features(ev, rec, opts);
    opts.use_mean_velocity = true;
    const FeatureVector mean = extract_features(ev, rec, opts);
    // peak velocities were scripted as amp * 50; chord mean is amp / 40ms
    CHECK(peak.values[feature_index("sacc_peak_vel_max")] == Catch::Approx(200.0));
    CHECK(mean.values[feature_index("sacc_peak_vel_max")] == Catch::Approx(4.0 / 40.0 * 1000.0));
    CHECK(peak.values[feature_index("sacc_amp_total")] ==
          mean.values[feature_index("sacc_amp_total")]);
}

TEST_CASE("features: empty recording is rejected", "[features]") {
    const auto ev = hand_stream({}, 1, 1'000.0);
    CHECK_THROWS_AS(extract_features(ev, Recording{}), EmptyRecording);
}

TEST_CASE("features: gyro stats come from raw samples", "[features]") {
    Recording rec = test_helpers::flat_recording(3);
    rec.samples[0].gyro_z = -10.0;
    rec.samples[1].gyro_z = 5.0;
    rec.samples[2].gyro_z = -80.0;
    const auto ev = hand_stream({}, 1, 1'000.0);
    const FeatureVector fv = extract_features(ev, rec);
    CHECK(fv.values[feature_index("gyro_z_min")] == -80.0);
    CHECK(fv.values[feature_index("gyro_z_max")] == 5.0);
    CHECK_FALSE(fv.computable[feature_index("gyro_x_mean")]);  // channel absent
}

TEST_CASE("features: StatQuad ordering invariant on every quad", "[features]") {
    const auto profiles = builtin_profiles();
    SynthConfig cfg;
    cfg.duration_s = 12.0;
    Rng rng(4242);
    const auto [rec, truth] = generate_signal_recording(profiles[1], cfg, rng);
    const EventStream ev = detect_events(rec, detector_params_for(rec));
    const FeatureVector fv = extract_features(ev, rec);
    const char* quads[] = {"sacc_peak_vel", "sacc_amp", "sacc_dur", "fix_dur",
                           "pupil",         "gyro_x",   "gyro_y",   "gyro_z"};
    for (const char* base : quads) {
        const std::string b(base);
        const double mean = fv.values[feature_index(b + "_mean")];
        const double lo = fv.values[feature_index(b + "_min")];
        const double hi = fv.values[feature_index(b + "_max")];
        const double sd = fv.values[feature_index(b + "_std")];
        CHECK(lo <= mean + 1e-12);
        CHECK(mean <= hi + 1e-12);
        CHECK(sd >= 0.0);
    }
}

TEST_CASE("features: deterministic and time-shift invariant", "[features]") {
    const auto profiles = builtin_profiles();
    SynthConfig cfg;
    cfg.duration_s = 10.0;
    Rng rng(7);
    auto [rec, truth] = generate_signal_recording(profiles[0], cfg, rng);

    const auto run = [](const Recording& r) {
        return extract_features(detect_events(r, detector_params_for(r)), r);
    };
    const FeatureVector a = run(rec);
    const FeatureVector b = run(rec);
    CHECK(a.values == b.values);

    Recording shifted = rec;
    for (auto& s : shifted.samples) s.t_ms += 123456.0;
    const FeatureVector c = run(shifted);
    for (std::size_t i = 0; i < kFeatureCount; ++i)
        CHECK(c.values[i] == Catch::Approx(a.values[i]).margin(1e-9));
}

TEST_CASE("matrix: cohort shapes", "[features]") {
    const auto profiles = builtin_profiles();
    const FeatureMatrix m15 = generate_feature_cohort(profiles, 5, 11);
    CHECK(m15.rows.size() == 15);
    CHECK(m15.n_features() == 35);
    for (ExpertiseClass c : kAllClasses) CHECK(m15.rows_of(c).size() == 5);

    const FeatureMatrix m6 = generate_feature_cohort(profiles, 2, 11);
    CHECK(m6.rows.size() == 6);
}

TEST_CASE("matrix: single participant via build_feature_matrix", "[features]") {
    const auto profiles = builtin_profiles();
    SynthConfig cfg;
    cfg.duration_s = 10.0;
    Rng rng(3);
    auto [rec, truth] = generate_signal_recording(profiles[0], cfg, rng, "E01",
                                                  ExpertiseClass::Expert);
    const EventStream ev = detect_events(rec, detector_params_for(rec));
    const FeatureMatrix m = build_feature_matrix({{ev, rec}});
    REQUIRE(m.rows.size() == 1);
    CHECK(m.rows[0].values.size() == 35);
    CHECK(m.rows[0].participant_id == "E01");
    CHECK(m.columns == std::vector<std::string>(feature_names().begin(), feature_names().end()));
}

TEST_CASE("matrix: csv round trip", "[features]") {
    const auto profiles = builtin_profiles();
    const FeatureMatrix m = generate_feature_cohort(profiles, 3, 5);
    std::ostringstream out;
    write_feature_matrix(m, out);
    std::istringstream in(out.str());
    const FeatureMatrix back = read_feature_matrix(in);
    REQUIRE(back.rows.size() == m.rows.size());
    CHECK(back.columns == m.columns);
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
        CHECK(back.rows[i].participant_id == m.rows[i].participant_id);
        CHECK(back.rows[i].label == m.rows[i].label);
        CHECK(back.rows[i].values == m.rows[i].values);  // bit-exact
        CHECK(back.rows[i].computable == m.rows[i].computable);
    }
}

TEST_CASE("matrix: select subset and schema errors", "[features]") {
    const auto profiles = builtin_profiles();
    const FeatureMatrix m = generate_feature_cohort(profiles, 2, 5);
    const FeatureMatrix sub = m.select({"sacc_amp_total", "gyro_z_min"});
    CHECK(sub.n_features() == 2);
    CHECK(sub.rows[0].values[0] == m.rows[0].values[feature_index("sacc_amp_total")]);
    CHECK_THROWS_AS(m.select({"nope"}), SchemaMismatch);
}
