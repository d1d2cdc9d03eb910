// gazemetric: eye-movement expertise classification pipeline.
//
// Subcommands: synth, detect, features, train, predict, cv, rank, report.
// Exit codes: 0 ok, 2 configuration/usage error, 3 data error, 4 numeric
// failure. Outputs are written atomically (temp file + rename); CSV outputs
// get a sibling <name>.config.json with the effective configuration.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <gazemetric/config.hpp>
#include <gazemetric/gazemetric.hpp>

namespace fs = std::filesystem;
using namespace gazemetric;

namespace {

void log_line(const std::string& stage, const std::string& msg) {
    std::cerr << "[gazemetric] stage=" << stage << " " << msg << "\n";
}

void atomic_write(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open for writing: " + tmp.string());
        out << content;
        if (!out) throw DataError("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

void write_config_sidecar(const fs::path& out_path, const PipelineConfig& cfg,
                          const std::string& subcommand) {
    nlohmann::ordered_json j;
    j["tool"] = "gazemetric";
    j["subcommand"] = subcommand;
    j["config"] = cfg.snapshot();
    atomic_write(out_path.string() + ".config.json", j.dump(2) + "\n");
}

// flag overrides collected as (key, value) pairs so precedence is simply
// defaults -> file -> flags, all through PipelineConfig::apply
struct ConfigLayer {
    std::string file;
    std::vector<std::pair<std::string, std::string>> overrides;

    PipelineConfig build() const {
        PipelineConfig cfg;
        std::string path = file;
        if (path.empty()) {
            if (const char* env = std::getenv("GAZEMETRIC_CONFIG")) path = env;
        }
        if (!path.empty()) load_config_file(cfg, path);
        for (const auto& [k, v] : overrides) cfg.apply(k, v);
        return cfg;
    }
};

void add_override_option(CLI::App* cmd, ConfigLayer& layer, const std::string& flag,
                         const std::string& key, const std::string& desc) {
    cmd->add_option_function<std::string>(
        flag, [&layer, key](const std::string& v) { layer.overrides.emplace_back(key, v); }, desc);
}

Recording load_recording(const fs::path& path, const PipelineConfig& cfg,
                         const std::string& id = {}) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open recording: " + path.string());
    Recording rec = parse_recording(in, ColumnMapping{}, id.empty() ? path.stem().string() : id,
                                    cfg.nominal_rate_hz);
    rec.px_per_degree = cfg.px_per_degree;
    return rec;
}

DetectorParams make_detector(const PipelineConfig& cfg) {
    DetectorParams p = cfg.detector;
    p.px_per_degree = cfg.px_per_degree;
    p.nominal_rate_hz = cfg.nominal_rate_hz;
    if (p.threshold_px_ms <= 0.0 || p.min_saccade_ms <= 0.0 || p.min_fixation_ms <= 0.0 ||
        p.window < 1 || p.window % 2 == 0)
        throw ConfigError("detector: threshold/min durations must be positive, window odd");
    return p;
}

std::string render_events_csv(const EventStream& events) {
    std::string buf = "kind,start_ms,end_ms,duration_ms,amp_deg,peak_vel_dps,cx_px,cy_px\n";
    std::size_t fi = 0, si = 0;
    auto emit_fix = [&](const Fixation& f) {
        buf += "fixation,";
        detail::append_double(buf, f.start_ms);
        buf.push_back(',');
        detail::append_double(buf, f.end_ms);
        buf.push_back(',');
        detail::append_double(buf, f.duration_ms());
        buf += ",,,";
        detail::append_double(buf, f.centroid_x);
        buf.push_back(',');
        detail::append_double(buf, f.centroid_y);
        buf.push_back('\n');
    };
    auto emit_sacc = [&](const Saccade& s) {
        buf += "saccade,";
        detail::append_double(buf, s.start_ms);
        buf.push_back(',');
        detail::append_double(buf, s.end_ms);
        buf.push_back(',');
        detail::append_double(buf, s.duration_ms());
        buf.push_back(',');
        detail::append_double(buf, s.amplitude_deg);
        buf.push_back(',');
        detail::append_double(buf, s.peak_velocity_dps);
        buf += ",,\n";
    };
    // merge the two ordered lists by start time
    while (fi < events.fixations.size() || si < events.saccades.size()) {
        const bool take_fix =
            si >= events.saccades.size() ||
            (fi < events.fixations.size() &&
             events.fixations[fi].start_ms <= events.saccades[si].start_ms);
        if (take_fix) emit_fix(events.fixations[fi++]);
        else emit_sacc(events.saccades[si++]);
    }
    return buf;
}

struct ManifestEntry {
    std::string participant_id;
    ExpertiseClass label;
    fs::path file;
};

std::vector<ManifestEntry> read_manifest(const fs::path& dir) {
    std::ifstream in(dir / "cohort.csv");
    if (!in) throw DataError("cannot open manifest: " + (dir / "cohort.csv").string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty manifest");
    std::vector<ManifestEntry> out;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto f = detail::split_fields(line, ',');
        if (f.size() < 3) throw DataError("manifest row needs participant_id,label,file");
        out.push_back({f[0], class_from_string(f[1]), dir / f[2]});
    }
    if (out.empty()) throw DataError("manifest has no rows");
    return out;
}

FeatureMatrix matrix_from_cohort_dir(const fs::path& dir, const PipelineConfig& cfg) {
    const auto manifest = read_manifest(dir);
    FeatureMatrix m;
    for (const auto& entry : manifest) {
        Recording rec = load_recording(entry.file, cfg, entry.participant_id);
        rec.label = entry.label;
        const Recording cleaned = clean_gaps(rec, cfg.gap);
        const EventStream events = detect_events(cleaned, make_detector(cfg));
        m.add_row(entry.participant_id, entry.label, extract_features(events, cleaned, cfg.features));
    }
    return m;
}

std::array<ClassProfile, 3> profiles_for_preset(const std::string& preset, double dispersion) {
    if (preset == "table2") return builtin_profiles(dispersion);
    if (preset == "chance") {
        // one shared profile: downstream accuracy should sit at chance level
        auto p = builtin_profiles(dispersion);
        p[1] = p[0];
        p[2] = p[0];
        p[1].name = "Intermediate";
        p[2].name = "Novice";
        return p;
    }
    throw ConfigError("unknown preset: " + preset + " (expected table2 or chance)");
}

// ---- subcommand bodies ----

int run_synth(const PipelineConfig& cfg, const std::string& preset, const std::string& level,
              const fs::path& out_dir) {
    auto profiles = profiles_for_preset(preset, cfg.synth_dispersion);
    fs::create_directories(out_dir);

    nlohmann::ordered_json sidecar;
    sidecar["tool"] = "gazemetric";
    sidecar["subcommand"] = "synth";
    sidecar["preset"] = preset;
    sidecar["level"] = level;
    sidecar["config"] = cfg.snapshot();
    atomic_write(out_dir / "synth_config.json", sidecar.dump(2) + "\n");

    if (level == "features") {
        const FeatureMatrix m = generate_feature_cohort(profiles, cfg.synth.per_class, cfg.synth.seed);
        std::ostringstream os;
        write_feature_matrix(m, os);
        atomic_write(out_dir / "features.csv", os.str());
        std::cout << "synth: wrote feature-level cohort (" << m.rows.size() << " participants) to "
                  << out_dir.string() << "\n";
        return 0;
    }
    if (level != "signal") throw ConfigError("unknown level: " + level);

    const auto cohort = generate_signal_cohort(profiles, cfg.synth);
    std::string manifest = "participant_id,label,file\n";
    std::string truth_csv = "participant_id,kind,start_ms,end_ms,amp_deg,peak_vel_dps\n";
    std::size_t total_saccades = 0;
    for (const auto& [rec, truth] : cohort) {
        const std::string file = rec.participant_id + ".csv";
        std::ostringstream os;
        write_recording(rec, os);
        atomic_write(out_dir / file, os.str());
        manifest += rec.participant_id + "," + to_string(rec.label) + "," + file + "\n";
        for (const auto& e : truth.events) {
            truth_csv += rec.participant_id;
            truth_csv += e.kind == TrueEvent::Kind::Saccade ? ",saccade," : ",fixation,";
            detail::append_double(truth_csv, e.start_ms);
            truth_csv.push_back(',');
            detail::append_double(truth_csv, e.end_ms);
            truth_csv.push_back(',');
            detail::append_double(truth_csv, e.amplitude_deg);
            truth_csv.push_back(',');
            detail::append_double(truth_csv, e.peak_velocity_dps);
            truth_csv.push_back('\n');
        }
        total_saccades += truth.saccade_count();
    }
    atomic_write(out_dir / "cohort.csv", manifest);
    atomic_write(out_dir / "ground_truth.csv", truth_csv);
    std::cout << "synth: wrote " << cohort.size() << " recordings (" << total_saccades
              << " scripted saccades) to " << out_dir.string() << "\n";
    return 0;
}

int run_detect(const PipelineConfig& cfg, const fs::path& in_path, const fs::path& out_path) {
    const Recording rec = clean_gaps(load_recording(in_path, cfg), cfg.gap);
    const EventStream events = detect_events(rec, make_detector(cfg));
    atomic_write(out_path, render_events_csv(events));
    write_config_sidecar(out_path, cfg, "detect");
    log_line("detect", "in=" + in_path.string() + " samples=" + std::to_string(rec.samples.size()));
    std::cout << "detect: " << events.fixations.size() << " fixations, " << events.saccades.size()
              << " saccades, valid " << events.valid_duration_ms / 1000.0 << " s -> "
              << out_path.string() << "\n";
    return 0;
}

int run_features(const PipelineConfig& cfg, const fs::path& cohort_dir, const fs::path& out_path) {
    const FeatureMatrix m = matrix_from_cohort_dir(cohort_dir, cfg);
    std::ostringstream os;
    write_feature_matrix(m, os);
    atomic_write(out_path, os.str());
    write_config_sidecar(out_path, cfg, "features");
    std::cout << "features: " << m.rows.size() << " participants x " << m.n_features()
              << " features -> " << out_path.string() << "\n";
    return 0;
}

std::vector<std::string> parse_feature_list(const std::string& spec) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : spec) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

int run_train(const PipelineConfig& cfg, const fs::path& matrix_path, const fs::path& out_path,
              const std::string& feature_spec) {
    std::ifstream in(matrix_path);
    if (!in) throw DataError("cannot open matrix: " + matrix_path.string());
    FeatureMatrix m = read_feature_matrix(in);
    if (!feature_spec.empty() && feature_spec != "all") m = m.select(parse_feature_list(feature_spec));

    SvmConfig svm = cfg.svm;
    svm.seed = cfg.cv_seed;
    const MulticlassModel model = train_multiclass(m, svm);
    std::ostringstream os(std::ios::binary);
    save_model(model, os);
    atomic_write(out_path, os.str());
    write_config_sidecar(out_path, cfg, "train");

    std::size_t hits = 0;
    for (const auto& row : m.rows) hits += predict(model, row.values) == row.label ? 1 : 0;
    std::cout << "train: " << m.rows.size() << " rows, " << m.n_features() << " features, training acc "
              << static_cast<double>(hits) / m.rows.size() << " -> " << out_path.string() << "\n";
    return 0;
}

int run_predict(const PipelineConfig& cfg, const fs::path& model_path, const fs::path& matrix_path,
                const fs::path& out_path) {
    std::ifstream min(model_path, std::ios::binary);
    if (!min) throw DataError("cannot open model: " + model_path.string());
    const MulticlassModel model = load_model(min);

    std::ifstream in(matrix_path);
    if (!in) throw DataError("cannot open matrix: " + matrix_path.string());
    const FeatureMatrix full = read_feature_matrix(in);
    const FeatureMatrix m = full.select(model.schema);

    std::string buf = "participant_id,label,predicted\n";
    std::size_t hits = 0;
    for (const auto& row : m.rows) {
        const ExpertiseClass p = predict(model, row.values);
        hits += p == row.label ? 1 : 0;
        buf += row.participant_id;
        buf.push_back(',');
        buf += to_string(row.label);
        buf.push_back(',');
        buf += to_string(p);
        buf.push_back('\n');
    }
    if (!out_path.empty()) {
        atomic_write(out_path, buf);
        write_config_sidecar(out_path, cfg, "predict");
    } else {
        std::cout << buf;
    }
    std::cout << "predict: " << m.rows.size() << " rows, accuracy "
              << static_cast<double>(hits) / m.rows.size() << "\n";
    return 0;
}

int run_cv(const PipelineConfig& cfg, const fs::path& cohort_dir, const fs::path& matrix_path,
           const std::string& feature_spec, const fs::path& out_path) {
    FeatureMatrix m;
    if (!cohort_dir.empty()) {
        m = matrix_from_cohort_dir(cohort_dir, cfg);
    } else {
        std::ifstream in(matrix_path);
        if (!in) throw DataError("cannot open matrix: " + matrix_path.string());
        m = read_feature_matrix(in);
    }

    CvConfig cv;
    cv.runs = cfg.cv_runs;
    cv.seed = cfg.cv_seed;
    cv.svm = cfg.svm;
    cv.top_k = cfg.cv_top_k;
    cv.threads = cfg.cv_threads;

    if (feature_spec == "top4") {
        const auto wf = reduced_model_workflow(m, cv.runs, cv.seed, cv.svm, cv.top_k, cv.threads);
        nlohmann::ordered_json reduced = to_json(wf.reduced);
        reduced["pipeline_config"] = cfg.snapshot();
        nlohmann::ordered_json full = to_json(wf.full);
        full["pipeline_config"] = cfg.snapshot();
        atomic_write(out_path, reduced.dump(2) + "\n");
        fs::path full_path = out_path;
        full_path.replace_extension(".full.json");
        atomic_write(full_path, full.dump(2) + "\n");
        std::string subset;
        for (const auto& s : wf.subset) subset += (subset.empty() ? "" : ",") + s;
        std::cout << "cv: " << cv.runs << " runs full mean acc " << wf.full.accuracy.mean
                  << ", top-" << cv.top_k << " [" << subset << "] reduced mean acc "
                  << wf.reduced.accuracy.mean << " -> " << out_path.string() << "\n";
        return 0;
    }

    if (!feature_spec.empty() && feature_spec != "all")
        cv.feature_subset = parse_feature_list(feature_spec);
    const AggregateReport report = run_repeated_cv(m, cv);
    nlohmann::ordered_json j = to_json(report);
    j["pipeline_config"] = cfg.snapshot();
    atomic_write(out_path, j.dump(2) + "\n");
    std::cout << "cv: " << cv.runs << " runs, mean acc " << report.accuracy.mean << ", mean f1 "
              << report.f1.mean << " -> " << out_path.string() << "\n";
    return 0;
}

int run_rank(const fs::path& report_path, int k) {
    std::ifstream in(report_path);
    if (!in) throw DataError("cannot open report: " + report_path.string());
    nlohmann::ordered_json j;
    in >> j;
    const AggregateReport report = report_from_json(j);

    std::vector<RunResult> runs = report.per_run;
    const FrequencyTable table = rank_feature_frequency(runs, k, report.feature_names);
    std::cout << "rank: top-" << k << " frequency over " << table.runs << " runs\n";
    const auto top = table.top(table.features.size());
    for (std::size_t i = 0; i < top.size() && i < 12; ++i) {
        const auto it = std::find(table.features.begin(), table.features.end(), top[i]);
        std::cout << "  " << i + 1 << ". " << top[i] << "  "
                  << table.counts[static_cast<std::size_t>(it - table.features.begin())] << "\n";
    }
    return 0;
}

int run_report(const fs::path& report_path) {
    std::ifstream in(report_path);
    if (!in) throw DataError("cannot open report: " + report_path.string());
    nlohmann::ordered_json j;
    in >> j;
    render_report(report_from_json(j), std::cout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"eye-movement expertise classification pipeline"};
    app.require_subcommand(1);
    ConfigLayer layer;
    app.add_option("--config", layer.file, "config file (key = value lines)");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic cohort");
    std::string preset = "table2", level = "signal";
    std::string synth_out;
    synth->add_option("--preset", preset, "table2 | chance");
    synth->add_option("--level", level, "signal | features");
    synth->add_option("--out", synth_out, "output directory")->required();
    add_override_option(synth, layer, "--per-class", "synth.per_class", "participants per class");
    add_override_option(synth, layer, "--seed", "synth.seed", "master seed");
    add_override_option(synth, layer, "--duration", "synth.duration_s", "session seconds");
    add_override_option(synth, layer, "--noise", "synth.noise_px", "gaze noise sigma (px)");
    add_override_option(synth, layer, "--dispersion", "synth.dispersion", "relative dispersion");

    // detect
    auto* detect = app.add_subcommand("detect", "classify one recording into events");
    std::string detect_in, detect_out = "events.csv";
    detect->add_option("--in", detect_in, "recording csv")->required();
    detect->add_option("--out", detect_out, "events csv");
    add_override_option(detect, layer, "--threshold", "detector.threshold_px_ms", "px/ms");
    add_override_option(detect, layer, "--window", "detector.window", "smoothing window (odd)");
    add_override_option(detect, layer, "--min-fixation", "detector.min_fixation_ms", "ms");
    add_override_option(detect, layer, "--min-saccade", "detector.min_saccade_ms", "ms");
    add_override_option(detect, layer, "--px-per-degree", "ingest.px_per_degree", "px per degree");

    // features
    auto* features = app.add_subcommand("features", "extract the feature matrix for a cohort");
    std::string feat_dir, feat_out = "features.csv";
    features->add_option("--cohort", feat_dir, "cohort directory with cohort.csv")->required();
    features->add_option("--out", feat_out, "output csv");
    add_override_option(features, layer, "--threshold", "detector.threshold_px_ms", "px/ms");
    add_override_option(features, layer, "--px-per-degree", "ingest.px_per_degree", "px per degree");
    add_override_option(features, layer, "--use-mean-velocity", "features.use_mean_velocity", "0/1");

    // train
    auto* train = app.add_subcommand("train", "train a multiclass model");
    std::string train_matrix, train_out = "model.bin", train_features = "all";
    train->add_option("--matrix", train_matrix, "features csv")->required();
    train->add_option("--out", train_out, "model file");
    train->add_option("--features", train_features, "all | comma list");
    add_override_option(train, layer, "--kernel", "svm.kernel", "linear | rbf");
    add_override_option(train, layer, "--c", "svm.c", "soft margin C");
    add_override_option(train, layer, "--gamma", "svm.gamma", "rbf gamma");
    add_override_option(train, layer, "--tol", "svm.tol", "KKT tolerance");
    add_override_option(train, layer, "--seed", "cv.seed", "seed");

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "predict classes with a trained model");
    std::string pred_model, pred_matrix, pred_out;
    predict_cmd->add_option("--model", pred_model, "model file")->required();
    predict_cmd->add_option("--matrix", pred_matrix, "features csv")->required();
    predict_cmd->add_option("--out", pred_out, "predictions csv (default: stdout)");

    // cv
    auto* cv = app.add_subcommand("cv", "repeated leave-one-per-group-out evaluation");
    std::string cv_dir, cv_matrix, cv_features = "all", cv_out = "report.json";
    cv->add_option("--cohort", cv_dir, "cohort directory (signal level)");
    cv->add_option("--matrix", cv_matrix, "features csv (feature level)");
    cv->add_option("--features", cv_features, "all | top4 | comma list");
    cv->add_option("--out", cv_out, "report json");
    add_override_option(cv, layer, "--runs", "cv.runs", "number of runs");
    add_override_option(cv, layer, "--seed", "cv.seed", "master seed");
    add_override_option(cv, layer, "--kernel", "svm.kernel", "linear | rbf");
    add_override_option(cv, layer, "--c", "svm.c", "soft margin C");
    add_override_option(cv, layer, "--gamma", "svm.gamma", "rbf gamma");
    add_override_option(cv, layer, "--tol", "svm.tol", "KKT tolerance");
    add_override_option(cv, layer, "--top-k", "cv.top_k", "frequency table depth");
    add_override_option(cv, layer, "--threads", "cv.threads", "worker threads");
    add_override_option(cv, layer, "--threshold", "detector.threshold_px_ms", "px/ms");

    // rank
    auto* rank = app.add_subcommand("rank", "feature-frequency ranking from a report");
    std::string rank_report;
    int rank_k = 4;
    rank->add_option("--report", rank_report, "report json")->required();
    rank->add_option("--k", rank_k, "top-k depth");

    // report
    auto* report_cmd = app.add_subcommand("report", "render a report as text");
    std::string report_path;
    report_cmd->add_option("--report", report_path, "report json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        const PipelineConfig cfg = layer.build();
        if (synth->parsed()) return run_synth(cfg, preset, level, synth_out);
        if (detect->parsed()) return run_detect(cfg, detect_in, detect_out);
        if (features->parsed()) return run_features(cfg, feat_dir, feat_out);
        if (train->parsed()) return run_train(cfg, train_matrix, train_out, train_features);
        if (predict_cmd->parsed()) return run_predict(cfg, pred_model, pred_matrix, pred_out);
        if (cv->parsed()) {
            if (cv_dir.empty() == cv_matrix.empty())
                throw ConfigError("cv: provide exactly one of --cohort or --matrix");
            return run_cv(cfg, cv_dir, cv_matrix, cv_features, cv_out);
        }
        if (rank->parsed()) return run_rank(rank_report, rank_k);
        if (report_cmd->parsed()) return run_report(report_path);
        return 2;
    } catch (const ConfigError& e) {
        log_line("error", std::string("kind=config msg=\"") + e.what() + "\"");
        return 2;
    } catch (const NumericError& e) {
        log_line("error", std::string("kind=numeric msg=\"") + e.what() + "\"");
        return 4;
    } catch (const DataError& e) {
        log_line("error", std::string("kind=data msg=\"") + e.what() + "\"");
        return 3;
    } catch (const nlohmann::json::exception& e) {
        log_line("error", std::string("kind=data msg=\"") + e.what() + "\"");
        return 3;
    } catch (const std::exception& e) {
        log_line("error", std::string("kind=internal msg=\"") + e.what() + "\"");
        return 4;
    }
}
