#pragma once

#include <array>
#include <cstddef>

#include "gazemetric/errors.hpp"
#include "gazemetric/types.hpp"

namespace gazemetric {

// 3x3 counts, rows = true class, columns = predicted class.
struct ConfusionMatrix {
    std::array<std::array<long, 3>, 3> counts{};

    void add(ExpertiseClass truth, ExpertiseClass predicted, long n = 1) {
        counts[static_cast<int>(truth)][static_cast<int>(predicted)] += n;
    }

    long total() const {
        long t = 0;
        for (const auto& row : counts)
            for (long v : row) t += v;
        return t;
    }

    long row_total(int c) const { return counts[c][0] + counts[c][1] + counts[c][2]; }
    long col_total(int c) const { return counts[0][c] + counts[1][c] + counts[2][c]; }

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

// Macro-averaged over classes with at least one true instance. A class that
// was never predicted has undefined precision; it contributes 0 and raises
// the flag.
struct MetricSet {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double miss_rate = 0.0;
    double f1 = 0.0;
    bool undefined_precision = false;

    friend bool operator==(const MetricSet&, const MetricSet&) = default;
};

inline MetricSet compute_metrics(const ConfusionMatrix& cm) {
    const long total = cm.total();
    if (total == 0) throw EmptyMatrix("total count is zero");

    MetricSet m;
    long diag = 0;
    for (int c = 0; c < 3; ++c) diag += cm.counts[c][c];
    m.accuracy = static_cast<double>(diag) / static_cast<double>(total);

    double sum_p = 0.0, sum_r = 0.0, sum_f1 = 0.0;
    int included = 0;
    for (int c = 0; c < 3; ++c) {
        const long truths = cm.row_total(c);
        if (truths == 0) continue;  // class absent from this evaluation
        ++included;
        const long tp = cm.counts[c][c];
        const long predicted = cm.col_total(c);
        double p = 0.0;
        if (predicted > 0) {
            p = static_cast<double>(tp) / static_cast<double>(predicted);
        } else {
            m.undefined_precision = true;
        }
        const double r = static_cast<double>(tp) / static_cast<double>(truths);
        sum_p += p;
        sum_r += r;
        sum_f1 += (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    }
    m.precision = sum_p / included;
    m.recall = sum_r / included;
    m.miss_rate = 1.0 - m.recall;
    m.f1 = sum_f1 / included;
    return m;
}

}  // namespace gazemetric
