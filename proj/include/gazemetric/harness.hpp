#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "gazemetric/features.hpp"
#include "gazemetric/metrics.hpp"
#include "gazemetric/rng.hpp"
#include "gazemetric/svm.hpp"

namespace gazemetric {

// Repeated leave-one-participant-per-group-out evaluation. Every run draws
// one held-out participant per class, trains on the rest (12 of 15 in the
// reference cohort) and scores the three held-out predictions. Run i uses an
// RNG stream derived from (seed, i), so parallel and serial execution give
// identical reports.

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;  // one row per class, class order
};

inline Split split_leave_one_per_group(const FeatureMatrix& cohort, Rng& rng) {
    Split split;
    std::array<std::size_t, 3> held{};
    for (ExpertiseClass c : kAllClasses) {
        const auto rows = cohort.rows_of(c);
        if (rows.empty()) throw ClassMissing(to_string(c));
        held[static_cast<int>(c)] = rows[rng.below(rows.size())];
    }
    for (std::size_t h : held) split.test.push_back(h);
    for (std::size_t i = 0; i < cohort.rows.size(); ++i) {
        if (std::find(split.test.begin(), split.test.end(), i) == split.test.end())
            split.train.push_back(i);
    }
    return split;
}

struct CvConfig {
    int runs = 1000;
    std::uint64_t seed = 42;
    std::vector<std::string> feature_subset;  // empty = all columns
    SvmConfig svm;
    int top_k = 4;
    int threads = 1;  // execution detail, not part of the report snapshot
};

struct RunResult {
    int run_index = 0;
    std::array<std::string, 3> held_out;  // one id per class
    ConfusionMatrix confusion;
    MetricSet metrics;
    ImportanceRanking ranking;
};

struct FrequencyTable {
    std::vector<std::string> features;  // fixed column order of the pass
    std::vector<long> counts;           // top-k appearances per feature
    int top_k = 4;
    int runs = 0;

    // ties broken by the fixed column order
    std::vector<std::string> top(std::size_t m) const {
        std::vector<std::size_t> order(features.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });
        std::vector<std::string> out;
        for (std::size_t i = 0; i < order.size() && i < m; ++i) out.push_back(features[order[i]]);
        return out;
    }
};

// Counts top-k appearances per feature across runs. `schema` fixes the column
// order used for tie-breaking; when omitted, the sorted feature names stand in.
inline FrequencyTable rank_feature_frequency(const std::vector<RunResult>& results, int k,
                                             std::vector<std::string> schema = {}) {
    if (results.empty()) throw DataError("no runs to rank");
    if (schema.empty()) {
        schema = results[0].ranking.features;
        std::sort(schema.begin(), schema.end());
    }
    std::vector<std::string> sorted_ref = schema;
    std::sort(sorted_ref.begin(), sorted_ref.end());

    FrequencyTable table;
    table.top_k = k;
    table.runs = static_cast<int>(results.size());
    table.features = std::move(schema);
    table.counts.assign(table.features.size(), 0);

    for (const auto& r : results) {
        auto check = r.ranking.features;
        std::sort(check.begin(), check.end());
        if (check != sorted_ref) throw InconsistentSchema("run rankings differ");
        const std::size_t kk = std::min<std::size_t>(k, r.ranking.features.size());
        for (std::size_t i = 0; i < kk; ++i) {
            const auto it = std::find(table.features.begin(), table.features.end(),
                                      r.ranking.features[i]);
            table.counts[static_cast<std::size_t>(it - table.features.begin())] += 1;
        }
    }
    return table;
}

struct DistSummary {
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0, mean = 0.0;
    double whisker_lo = 0.0, whisker_hi = 0.0;  // Tukey, 1.5 IQR
};

inline DistSummary summarize_distribution(std::vector<double> values) {
    DistSummary d;
    if (values.empty()) return d;
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    auto quantile = [&](double p) {
        const double h = p * static_cast<double>(n - 1);
        const std::size_t lo = static_cast<std::size_t>(h);
        const std::size_t hi = std::min(lo + 1, n - 1);
        return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
    };
    d.min = values.front();
    d.max = values.back();
    d.q1 = quantile(0.25);
    d.median = quantile(0.5);
    d.q3 = quantile(0.75);
    double sum = 0.0;
    for (double v : values) sum += v;
    d.mean = sum / static_cast<double>(n);
    const double iqr = d.q3 - d.q1;
    d.whisker_lo = d.min;
    d.whisker_hi = d.max;
    for (double v : values) {
        if (v >= d.q1 - 1.5 * iqr) {
            d.whisker_lo = v;
            break;
        }
    }
    for (auto it = values.rbegin(); it != values.rend(); ++it) {
        if (*it <= d.q3 + 1.5 * iqr) {
            d.whisker_hi = *it;
            break;
        }
    }
    return d;
}

struct AggregateReport {
    std::vector<std::string> feature_names;  // selected schema of this pass
    std::vector<RunResult> per_run;
    DistSummary accuracy, precision, recall, miss_rate, f1;
    FrequencyTable frequency;
    CvConfig config;
    std::uint64_t master_seed = 0;
};

namespace detail {

inline RunResult execute_run(const FeatureMatrix& cohort, const CvConfig& cfg, int run_index) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(2 * run_index)));
    const Split split = split_leave_one_per_group(cohort, rng);

    FeatureMatrix train;
    train.columns = cohort.columns;
    for (std::size_t i : split.train) train.rows.push_back(cohort.rows[i]);

    SvmConfig svm_cfg = cfg.svm;
    svm_cfg.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(2 * run_index + 1));
    const MulticlassModel model = train_multiclass(train, svm_cfg);

    RunResult result;
    result.run_index = run_index;
    for (std::size_t t = 0; t < split.test.size(); ++t) {
        const auto& row = cohort.rows[split.test[t]];
        result.held_out[t] = row.participant_id;
        result.confusion.add(row.label, predict(model, row.values));
    }
    result.metrics = compute_metrics(result.confusion);
    result.ranking = feature_importance(model);
    return result;
}

}  // namespace detail

inline AggregateReport run_repeated_cv(const FeatureMatrix& cohort, const CvConfig& cfg) {
    if (cfg.runs < 1) throw ConfigError("cv: runs must be >= 1");
    for (ExpertiseClass c : kAllClasses) {
        if (cohort.rows_of(c).size() < 2)
            throw ClassMissing(std::string(to_string(c)) + " needs >= 2 participants");
    }

    const FeatureMatrix working =
        cfg.feature_subset.empty() ? cohort : cohort.select(cfg.feature_subset);

    std::vector<RunResult> results(static_cast<std::size_t>(cfg.runs));
    const int threads = std::max(1, cfg.threads);
    if (threads == 1) {
        for (int i = 0; i < cfg.runs; ++i) results[static_cast<std::size_t>(i)] =
            detail::execute_run(working, cfg, i);
    } else {
        // any run failure aborts the whole report
        std::atomic<int> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&]() {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= cfg.runs) return;
                try {
                    results[static_cast<std::size_t>(i)] = detail::execute_run(working, cfg, i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next.store(cfg.runs);
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    AggregateReport report;
    report.feature_names = working.columns;
    report.config = cfg;
    report.master_seed = cfg.seed;

    std::vector<double> acc, prec, rec, miss, f1;
    for (const auto& r : results) {
        acc.push_back(r.metrics.accuracy);
        prec.push_back(r.metrics.precision);
        rec.push_back(r.metrics.recall);
        miss.push_back(r.metrics.miss_rate);
        f1.push_back(r.metrics.f1);
    }
    report.accuracy = summarize_distribution(acc);
    report.precision = summarize_distribution(prec);
    report.recall = summarize_distribution(rec);
    report.miss_rate = summarize_distribution(miss);
    report.f1 = summarize_distribution(f1);
    report.frequency = rank_feature_frequency(results, cfg.top_k, working.columns);
    report.per_run = std::move(results);
    return report;
}

struct ReducedWorkflowResult {
    AggregateReport full;
    FrequencyTable frequency;        // from the full pass
    std::vector<std::string> subset; // the selected top-k features
    AggregateReport reduced;
};

// Full-feature pass, top-k frequency selection, then a second pass restricted
// to the selected subset under a fresh derived seed.
inline ReducedWorkflowResult reduced_model_workflow(const FeatureMatrix& cohort, int runs,
                                                    std::uint64_t seed, const SvmConfig& svm = {},
                                                    int top_k = 4, int threads = 1) {
    CvConfig full_cfg;
    full_cfg.runs = runs;
    full_cfg.seed = seed;
    full_cfg.svm = svm;
    full_cfg.top_k = top_k;
    full_cfg.threads = threads;

    ReducedWorkflowResult out;
    out.full = run_repeated_cv(cohort, full_cfg);
    out.frequency = out.full.frequency;
    out.subset = out.frequency.top(static_cast<std::size_t>(top_k));

    CvConfig reduced_cfg = full_cfg;
    reduced_cfg.seed = derive_seed(seed, 0x52454455u);  // distinct phase stream
    reduced_cfg.feature_subset = out.subset;
    out.reduced = run_repeated_cv(cohort, reduced_cfg);
    return out;
}

}  // namespace gazemetric
