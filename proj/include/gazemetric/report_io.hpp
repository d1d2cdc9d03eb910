#pragma once

#include <cstdio>
#include <ostream>
#include <string>

#include <json.hpp>

#include "gazemetric/harness.hpp"

namespace gazemetric {

// Versioned report document. Key order is fixed (insertion order), doubles
// use the shortest round-trip representation, so identical reports serialize
// to identical bytes.
inline constexpr const char* kReportSchema = "gazemetric-report/1";

using Json = nlohmann::ordered_json;

inline Json to_json(const DistSummary& d) {
    return Json{{"min", d.min},           {"q1", d.q1},
                {"median", d.median},     {"q3", d.q3},
                {"max", d.max},           {"mean", d.mean},
                {"whisker_lo", d.whisker_lo}, {"whisker_hi", d.whisker_hi}};
}

inline DistSummary dist_from_json(const Json& j) {
    DistSummary d;
    d.min = j.at("min");
    d.q1 = j.at("q1");
    d.median = j.at("median");
    d.q3 = j.at("q3");
    d.max = j.at("max");
    d.mean = j.at("mean");
    d.whisker_lo = j.at("whisker_lo");
    d.whisker_hi = j.at("whisker_hi");
    return d;
}

inline Json config_snapshot(const CvConfig& cfg) {
    // threads deliberately excluded: execution layout must not change results
    return Json{{"runs", cfg.runs},
                {"seed", cfg.seed},
                {"features", cfg.feature_subset.empty() ? Json("all") : Json(cfg.feature_subset)},
                {"kernel", to_string(cfg.svm.kernel)},
                {"c", cfg.svm.c},
                {"gamma", cfg.svm.gamma},
                {"tol", cfg.svm.tol},
                {"top_k", cfg.top_k},
                {"averaging", "macro"}};
}

inline Json to_json(const AggregateReport& report) {
    Json j;
    j["schema"] = kReportSchema;
    j["master_seed"] = report.master_seed;
    j["config"] = config_snapshot(report.config);
    j["feature_names"] = report.feature_names;
    j["metrics"] = Json{{"accuracy", to_json(report.accuracy)},
                        {"precision", to_json(report.precision)},
                        {"recall", to_json(report.recall)},
                        {"miss_rate", to_json(report.miss_rate)},
                        {"f1", to_json(report.f1)}};

    Json freq = Json::object();
    for (std::size_t i = 0; i < report.frequency.features.size(); ++i)
        freq[report.frequency.features[i]] = report.frequency.counts[i];
    j["feature_frequency"] = Json{{"top_k", report.frequency.top_k},
                                  {"runs", report.frequency.runs},
                                  {"counts", freq}};

    Json runs = Json::array();
    for (const auto& r : report.per_run) {
        // rankings stored as indices into feature_names to keep the file small
        std::vector<int> ranking;
        for (const auto& name : r.ranking.features) {
            const auto it = std::find(report.feature_names.begin(), report.feature_names.end(), name);
            ranking.push_back(static_cast<int>(it - report.feature_names.begin()));
        }
        Json cm = Json::array();
        for (int a = 0; a < 3; ++a) {
            Json row = Json::array();
            for (int b = 0; b < 3; ++b) row.push_back(r.confusion.counts[a][b]);
            cm.push_back(row);
        }
        runs.push_back(Json{{"run", r.run_index},
                            {"held_out", r.held_out},
                            {"confusion", cm},
                            {"accuracy", r.metrics.accuracy},
                            {"precision", r.metrics.precision},
                            {"recall", r.metrics.recall},
                            {"miss_rate", r.metrics.miss_rate},
                            {"f1", r.metrics.f1},
                            {"ranking", ranking}});
    }
    j["per_run"] = std::move(runs);
    return j;
}

inline AggregateReport report_from_json(const Json& j) {
    if (!j.contains("schema") || j.at("schema") != kReportSchema)
        throw DataError("not a gazemetric report (schema mismatch)");
    AggregateReport report;
    report.master_seed = j.at("master_seed");
    report.feature_names = j.at("feature_names").get<std::vector<std::string>>();

    const auto& cfg = j.at("config");
    report.config.runs = cfg.at("runs");
    report.config.seed = cfg.at("seed");
    if (cfg.at("features").is_array())
        report.config.feature_subset = cfg.at("features").get<std::vector<std::string>>();
    report.config.svm.kernel = kernel_from_string(cfg.at("kernel"));
    report.config.svm.c = cfg.at("c");
    report.config.svm.gamma = cfg.at("gamma");
    report.config.svm.tol = cfg.at("tol");
    report.config.top_k = cfg.at("top_k");

    const auto& m = j.at("metrics");
    report.accuracy = dist_from_json(m.at("accuracy"));
    report.precision = dist_from_json(m.at("precision"));
    report.recall = dist_from_json(m.at("recall"));
    report.miss_rate = dist_from_json(m.at("miss_rate"));
    report.f1 = dist_from_json(m.at("f1"));

    const auto& fq = j.at("feature_frequency");
    report.frequency.top_k = fq.at("top_k");
    report.frequency.runs = fq.at("runs");
    for (const auto& name : report.feature_names) {
        report.frequency.features.push_back(name);
        report.frequency.counts.push_back(fq.at("counts").at(name).get<long>());
    }

    for (const auto& rj : j.at("per_run")) {
        RunResult r;
        r.run_index = rj.at("run");
        const auto held = rj.at("held_out").get<std::vector<std::string>>();
        for (std::size_t i = 0; i < 3 && i < held.size(); ++i) r.held_out[i] = held[i];
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) r.confusion.counts[a][b] = rj.at("confusion")[a][b];
        r.metrics.accuracy = rj.at("accuracy");
        r.metrics.precision = rj.at("precision");
        r.metrics.recall = rj.at("recall");
        r.metrics.miss_rate = rj.at("miss_rate");
        r.metrics.f1 = rj.at("f1");
        for (int idx : rj.at("ranking").get<std::vector<int>>())
            r.ranking.features.push_back(report.feature_names[static_cast<std::size_t>(idx)]);
        report.per_run.push_back(std::move(r));
    }
    return report;
}

// Fig-2 style text rendering: one five-number row per metric plus the
// frequency table.
inline void render_report(const AggregateReport& report, std::ostream& out) {
    auto line = [&](const char* name, const DistSummary& d) {
        char buf[200];
        std::snprintf(buf, sizeof(buf),
                      "%-10s min %.4f  q1 %.4f  median %.4f  q3 %.4f  max %.4f  mean %.4f  "
                      "whiskers [%.4f, %.4f]\n",
                      name, d.min, d.q1, d.median, d.q3, d.max, d.mean, d.whisker_lo, d.whisker_hi);
        out << buf;
    };
    out << "runs: " << report.per_run.size() << "  seed: " << report.master_seed
        << "  features: " << report.feature_names.size() << "  averaging: macro\n";
    line("accuracy", report.accuracy);
    line("precision", report.precision);
    line("recall", report.recall);
    line("miss_rate", report.miss_rate);
    line("f1", report.f1);

    out << "top-" << report.frequency.top_k << " frequency over " << report.frequency.runs
        << " runs:\n";
    std::vector<std::size_t> order(report.frequency.features.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return report.frequency.counts[a] > report.frequency.counts[b];
    });
    for (std::size_t i = 0; i < order.size() && i < 10; ++i) {
        out << "  " << report.frequency.features[order[i]] << ": "
            << report.frequency.counts[order[i]] << "\n";
    }
}

}  // namespace gazemetric
