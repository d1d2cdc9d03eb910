#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include <gazemetric/ingest.hpp>
#include <gazemetric/rng.hpp>
#include <gazemetric/synth.hpp>

#include "support/helpers.hpp"

using namespace gazemetric;

static Recording parse_text(const std::string& text) {
    std::istringstream in(text);
    return parse_recording(in);
}

TEST_CASE("parse: minimal well-formed file", "[ingest]") {
    const auto rec = parse_text(
        "t_ms,gx_px,gy_px,pupil_l_mm,pupil_r_mm,gyro_x_dps,gyro_y_dps,gyro_z_dps,valid\n"
        "0,500,500,,,,,,1\n"
        "10,500,500,,,,,,1\n"
        "20,500,500,,,,,,1\n");
    REQUIRE(rec.samples.size() == 3);
    CHECK(rec.duration_ms() == 20.0);
    for (const auto& s : rec.samples) {
        CHECK(s.valid);
        CHECK(s.gaze_x == 500.0);
        CHECK_FALSE(s.pupil_left.has_value());
    }
}

TEST_CASE("parse: empty gaze field makes the sample invalid", "[ingest]") {
    const auto rec = parse_text(
        "t_ms,gx_px,gy_px,pupil_l_mm,pupil_r_mm,gyro_x_dps,gyro_y_dps,gyro_z_dps,valid\n"
        "0,500,500,,,,,,1\n"
        "10,,500,,,,,,1\n"
        "20,500,500,,,,,,1\n");
    REQUIRE(rec.samples.size() == 3);
    CHECK(rec.samples[0].valid);
    CHECK_FALSE(rec.samples[1].valid);
    CHECK(rec.samples[2].valid);
}

TEST_CASE("parse: valid column forces invalid", "[ingest]") {
    const auto rec = parse_text(
        "t_ms,gx_px,gy_px,pupil_l_mm,pupil_r_mm,gyro_x_dps,gyro_y_dps,gyro_z_dps,valid\n"
        "0,500,500,,,,,,0\n"
        "10,500,500,,,,,,1\n");
    CHECK_FALSE(rec.samples[0].valid);
    CHECK(rec.samples[0].gaze_x == 500.0);  // stored values are kept
    CHECK(rec.samples[1].valid);
}

TEST_CASE("parse: tab separated input", "[ingest]") {
    const auto rec = parse_text("t_ms\tgx_px\tgy_px\n0\t1\t2\n10\t3\t4\n");
    REQUIRE(rec.samples.size() == 2);
    CHECK(rec.samples[1].gaze_y == 4.0);
}

TEST_CASE("parse: custom column mapping adapts a foreign export", "[ingest]") {
    ColumnMapping vendor;
    vendor.timestamp = "RecordingTimestamp";
    vendor.gaze_x = "GazePointX";
    vendor.gaze_y = "GazePointY";
    vendor.pupil_left = "PupilLeft";
    vendor.pupil_right = "";  // not exported
    vendor.gyro_x = vendor.gyro_y = vendor.gyro_z = "";
    vendor.valid = "ValidityLeft";
    std::istringstream in(
        "RecordingTimestamp,GazePointX,GazePointY,PupilLeft,Extra,ValidityLeft\n"
        "0,100,200,3.5,junk,1\n"
        "10,110,210,3.6,junk,0\n");
    const Recording rec = parse_recording(in, vendor, "V01");
    REQUIRE(rec.samples.size() == 2);
    CHECK(rec.samples[0].gaze_x == 100.0);
    CHECK(rec.samples[0].pupil_left == 3.5);
    CHECK_FALSE(rec.samples[0].pupil_right.has_value());
    CHECK_FALSE(rec.samples[1].valid);
    CHECK(rec.participant_id == "V01");
}

TEST_CASE("parse: error taxonomy", "[ingest]") {
    CHECK_THROWS_AS(parse_text("t_ms,gy_px\n0,1\n"), MissingColumn);
    CHECK_THROWS_AS(parse_text("t_ms,gx_px,gy_px\n0,1,1\n10,1,1\n5,1,1\n"), NonMonotoneTimestamps);
    CHECK_THROWS_AS(parse_text("t_ms,gx_px,gy_px\n10,1,1\n10,1,1\n"), NonMonotoneTimestamps);
    CHECK_THROWS_AS(parse_text("t_ms,gx_px,gy_px\n"), EmptyRecording);
    // unparsable timestamps reject the row; none left -> empty
    CHECK_THROWS_AS(parse_text("t_ms,gx_px,gy_px\nabc,1,1\n"), EmptyRecording);
}

TEST_CASE("parse: timing gaps are recorded, never dropped", "[ingest]") {
    const auto rec = parse_text("t_ms,gx_px,gy_px\n0,1,1\n10,1,1\n200,1,1\n210,1,1\n");
    REQUIRE(rec.timing_gaps.size() == 1);
    CHECK(rec.timing_gaps[0].index == 2);
    CHECK(rec.timing_gaps[0].gap_ms == 190.0);
}

TEST_CASE("round trip: writer output reparses bit-exactly", "[ingest]") {
    const auto profiles = builtin_profiles();
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        Rng rng(seed);
        SynthConfig cfg;
        cfg.duration_s = 15.0;
        cfg.seed = seed;
        auto [rec, truth] = generate_signal_recording(profiles[seed % 3], cfg, rng, "P01");
        REQUIRE(rec.samples.size() >= 1000);

        std::ostringstream out;
        write_recording(rec, out);
        std::istringstream in(out.str());
        const Recording back = parse_recording(in, ColumnMapping{}, rec.participant_id);
        REQUIRE(back.samples.size() == rec.samples.size());
        CHECK(back.samples == rec.samples);
    }
}

TEST_CASE("round trip: optional channels and invalid rows survive", "[ingest]") {
    Recording rec = test_helpers::flat_recording(5, 0.375e-3, -17.25);
    rec.samples[1].valid = false;
    rec.samples[2].pupil_left = 3.123456789012345;
    rec.samples[2].pupil_right = 4.2;
    rec.samples[3].gyro_x = -0.1;
    rec.samples[3].gyro_y = 1e-17;
    rec.samples[3].gyro_z = 123456.789;
    std::ostringstream out;
    write_recording(rec, out);
    std::istringstream in(out.str());
    const Recording back = parse_recording(in);
    CHECK(back.samples == rec.samples);
}

TEST_CASE("clean_gaps: identity on clean data", "[ingest]") {
    const Recording rec = test_helpers::flat_recording(50);
    const Recording cleaned = clean_gaps(rec);
    CHECK(cleaned.samples == rec.samples);
    CHECK(cleaned.segment_starts == std::vector<std::size_t>{0});
}

TEST_CASE("clean_gaps: short run is linearly interpolated", "[ingest]") {
    // 3 invalid samples (30 ms) between (0,0)@100 and (30,30)@140
    Recording rec;
    auto add = [&](double t, double x, double y, bool valid) {
        GazeSample s;
        s.t_ms = t;
        s.gaze_x = x;
        s.gaze_y = y;
        s.valid = valid;
        rec.samples.push_back(s);
    };
    add(100, 0, 0, true);
    add(110, 999, 999, false);
    add(120, 999, 999, false);
    add(130, 999, 999, false);
    add(140, 30, 30, true);

    const Recording cleaned = clean_gaps(rec);
    REQUIRE(cleaned.samples.size() == 5);
    for (std::size_t i = 1; i <= 3; ++i) {
        CHECK(cleaned.samples[i].valid);
        CHECK(cleaned.samples[i].interpolated);
    }
    CHECK(cleaned.samples[1].gaze_x == Catch::Approx(7.5));
    CHECK(cleaned.samples[1].gaze_y == Catch::Approx(7.5));
    CHECK(cleaned.samples[2].gaze_x == Catch::Approx(15.0));
    CHECK(cleaned.samples[3].gaze_x == Catch::Approx(22.5));
    CHECK(cleaned.segment_starts == std::vector<std::size_t>{0});
}

TEST_CASE("clean_gaps: long run becomes a hard boundary", "[ingest]") {
    Recording rec = test_helpers::flat_recording(40);
    for (std::size_t i = 10; i < 25; ++i) rec.samples[i].valid = false;  // 15 samples, 150 ms
    const Recording cleaned = clean_gaps(rec);
    for (std::size_t i = 10; i < 25; ++i) {
        CHECK_FALSE(cleaned.samples[i].valid);
        CHECK_FALSE(cleaned.samples[i].interpolated);
    }
    CHECK(cleaned.segment_starts == std::vector<std::size_t>({0, 25}));
    CHECK(cleaned.segment_of(24) == 0);
    CHECK(cleaned.segment_of(25) == 1);
}

TEST_CASE("clean_gaps: mid-length run stays missing without a boundary", "[ingest]") {
    Recording rec = test_helpers::flat_recording(40);
    for (std::size_t i = 10; i < 18; ++i) rec.samples[i].valid = false;  // 80 ms
    const Recording cleaned = clean_gaps(rec);
    for (std::size_t i = 10; i < 18; ++i) CHECK_FALSE(cleaned.samples[i].valid);
    CHECK(cleaned.segment_starts == std::vector<std::size_t>{0});
}

TEST_CASE("clean_gaps: timestamp hole splits segments", "[ingest]") {
    Recording rec = test_helpers::flat_recording(20);
    for (std::size_t i = 10; i < 20; ++i) rec.samples[i].t_ms += 500.0;
    const Recording cleaned = clean_gaps(rec);
    CHECK(cleaned.segment_starts == std::vector<std::size_t>({0, 10}));
}

TEST_CASE("clean_gaps: idempotent and never touches valid samples", "[ingest]") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        Rng rng(seed);
        Recording rec = test_helpers::flat_recording(200);
        for (auto& s : rec.samples) {
            s.gaze_x = 500.0 + rng.normal() * 20.0;
            s.gaze_y = 400.0 + rng.normal() * 20.0;
        }
        // random invalid runs of random lengths
        std::size_t i = 5;
        while (i < 190) {
            if (rng.uniform() < 0.3) {
                const std::size_t len = 1 + rng.below(16);
                for (std::size_t k = i; k < std::min<std::size_t>(i + len, 200); ++k)
                    rec.samples[k].valid = false;
                i += len + 2 + rng.below(10);
            } else {
                i += 1 + rng.below(10);
            }
        }

        const Recording once = clean_gaps(rec);
        const Recording twice = clean_gaps(once);
        CHECK(once == twice);
        for (std::size_t k = 0; k < once.samples.size(); ++k) {
            CHECK(once.samples[k].interpolated == twice.samples[k].interpolated);
            if (rec.samples[k].valid) {
                CHECK(once.samples[k] == rec.samples[k]);
                CHECK_FALSE(once.samples[k].interpolated);
            }
        }
        CHECK(once.samples.size() == rec.samples.size());
    }
}

TEST_CASE("clean_gaps: fully invalid recording stays missing", "[ingest]") {
    Recording rec = test_helpers::flat_recording(30);
    for (auto& s : rec.samples) s.valid = false;
    const Recording cleaned = clean_gaps(rec);
    for (const auto& s : cleaned.samples) CHECK_FALSE(s.valid);
}
