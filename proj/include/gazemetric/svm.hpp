#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "gazemetric/features.hpp"
#include "gazemetric/rng.hpp"
#include "gazemetric/types.hpp"

namespace gazemetric {

// Soft-margin SVM trained with sequential minimal optimization (two-variable
// analytic subproblems, first/second choice heuristics, error cache). The
// multiclass layer is one-vs-one with majority vote.

enum class KernelId : int { Linear = 0, Rbf = 1 };

inline const char* to_string(KernelId k) { return k == KernelId::Linear ? "linear" : "rbf"; }

inline KernelId kernel_from_string(const std::string& s) {
    if (s == "linear") return KernelId::Linear;
    if (s == "rbf") return KernelId::Rbf;
    throw ConfigError("unknown kernel: " + s);
}

struct SvmConfig {
    KernelId kernel = KernelId::Linear;
    double c = 1.0;
    double gamma = 0.5;  // rbf only
    double tol = 1e-3;
    std::uint64_t seed = 1;
    int max_epochs = 2000;  // hard bound on outer sweeps
};

// alphas closer than this to 0 or C are treated as sitting on the bound
inline double bound_epsilon(double c) { return 1e-8 * std::max(1.0, c); }

inline double kernel_eval(KernelId kernel, double gamma, const std::vector<double>& a,
                          const std::vector<double>& b) {
    if (kernel == KernelId::Linear) {
        double dot = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
        return dot;
    }
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

// Per-feature affine map fit on training rows only. Constant features
// (std below the floor) map to zero.
class Standardizer {
public:
    Standardizer() = default;

    static Standardizer fit(const std::vector<std::vector<double>>& rows) {
        Standardizer s;
        if (rows.empty()) throw DataError("standardizer: no rows");
        const std::size_t d = rows[0].size();
        s.mean_.assign(d, 0.0);
        s.scale_.assign(d, 0.0);
        for (const auto& r : rows)
            for (std::size_t j = 0; j < d; ++j) s.mean_[j] += r[j];
        for (std::size_t j = 0; j < d; ++j) s.mean_[j] /= static_cast<double>(rows.size());
        std::vector<double> ss(d, 0.0);
        for (const auto& r : rows)
            for (std::size_t j = 0; j < d; ++j) {
                const double dv = r[j] - s.mean_[j];
                ss[j] += dv * dv;
            }
        const double denom = rows.size() > 1 ? static_cast<double>(rows.size() - 1) : 1.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double sd = std::sqrt(ss[j] / denom);
            s.scale_[j] = sd > 1e-12 ? 1.0 / sd : 0.0;
        }
        return s;
    }

    std::vector<double> transform(const std::vector<double>& row) const {
        if (row.size() != mean_.size()) throw SchemaMismatch("standardizer dimension");
        std::vector<double> out(row.size());
        for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean_[j]) * scale_[j];
        return out;
    }

    std::size_t dimension() const { return mean_.size(); }
    const std::vector<double>& mean() const { return mean_; }
    const std::vector<double>& inv_std() const { return scale_; }

    void set(std::vector<double> mean, std::vector<double> inv_std) {
        mean_ = std::move(mean);
        scale_ = std::move(inv_std);
    }

private:
    std::vector<double> mean_;
    std::vector<double> scale_;
};

struct BinarySvmModel {
    KernelId kernel = KernelId::Linear;
    double gamma = 0.5;
    double c = 1.0;
    double bias = 0.0;
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> coefficients;  // alpha_i * y_i per support vector

    double decision(const std::vector<double>& x) const {
        double f = bias;
        for (std::size_t i = 0; i < support_vectors.size(); ++i)
            f += coefficients[i] * kernel_eval(kernel, gamma, support_vectors[i], x);
        return f;
    }

    // |w_j| summed from the support expansion; linear kernel only
    std::vector<double> primal_weights() const {
        if (support_vectors.empty()) return {};
        std::vector<double> w(support_vectors[0].size(), 0.0);
        for (std::size_t i = 0; i < support_vectors.size(); ++i)
            for (std::size_t j = 0; j < w.size(); ++j)
                w[j] += coefficients[i] * support_vectors[i][j];
        return w;
    }
};

namespace smo {

struct Problem {
    const std::vector<std::vector<double>>* x = nullptr;
    const std::vector<double>* y = nullptr;
    std::vector<std::vector<double>> gram;
    std::vector<double> alpha;
    std::vector<double> error;  // f(x_i) - y_i
    double bias = 0.0;
    double c = 1.0;
    double tol = 1e-3;
    // optional instrumentation: dual objective after every successful step
    std::vector<double>* objective_trace = nullptr;

    double dual_objective() const {
        const std::size_t n = alpha.size();
        double obj = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            obj += alpha[i];
            if (alpha[i] == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (alpha[j] == 0.0) continue;
                obj -= 0.5 * alpha[i] * alpha[j] * (*y)[i] * (*y)[j] * gram[i][j];
            }
        }
        return obj;
    }

    bool take_step(std::size_t i1, std::size_t i2) {
        if (i1 == i2) return false;
        const double y1 = (*y)[i1], y2 = (*y)[i2];
        const double a1_old = alpha[i1], a2_old = alpha[i2];
        const double e1 = error[i1], e2 = error[i2];
        const double s = y1 * y2;

        double lo, hi;
        if (y1 != y2) {
            lo = std::max(0.0, a2_old - a1_old);
            hi = std::min(c, c + a2_old - a1_old);
        } else {
            lo = std::max(0.0, a1_old + a2_old - c);
            hi = std::min(c, a1_old + a2_old);
        }
        if (lo >= hi) return false;

        const double k11 = gram[i1][i1], k12 = gram[i1][i2], k22 = gram[i2][i2];
        const double eta = k11 + k22 - 2.0 * k12;

        double a2;
        if (eta > 0.0) {
            a2 = a2_old + y2 * (e1 - e2) / eta;
            a2 = std::clamp(a2, lo, hi);
        } else {
            // objective is flat or concave along this direction: check ends
            const double f1 = y1 * (e1 - bias) - a1_old * k11 - s * a2_old * k12;
            const double f2 = y2 * (e2 - bias) - s * a1_old * k12 - a2_old * k22;
            const double l1 = a1_old + s * (a2_old - lo);
            const double h1 = a1_old + s * (a2_old - hi);
            const double obj_lo = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 +
                                  s * lo * l1 * k12;
            const double obj_hi = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 +
                                  s * hi * h1 * k12;
            const double eps = 1e-12;
            if (obj_lo < obj_hi - eps)
                a2 = lo;
            else if (obj_lo > obj_hi + eps)
                a2 = hi;
            else
                return false;
        }
        if (std::abs(a2 - a2_old) < 1e-12 * (a2 + a2_old + 1e-12)) return false;

        const double a1 = a1_old + s * (a2_old - a2);
        const double d1 = a1 - a1_old, d2 = a2 - a2_old;

        const double b1 = bias - e1 - y1 * d1 * k11 - y2 * d2 * k12;
        const double b2 = bias - e2 - y1 * d1 * k12 - y2 * d2 * k22;
        double b_new;
        if (a1 > 0.0 && a1 < c)
            b_new = b1;
        else if (a2 > 0.0 && a2 < c)
            b_new = b2;
        else
            b_new = 0.5 * (b1 + b2);
        const double db = b_new - bias;

        alpha[i1] = a1;
        alpha[i2] = a2;
        bias = b_new;
        for (std::size_t k = 0; k < error.size(); ++k)
            error[k] += y1 * d1 * gram[i1][k] + y2 * d2 * gram[i2][k] + db;

        if (objective_trace) objective_trace->push_back(dual_objective());
        return true;
    }

    bool examine(std::size_t i2, Rng& rng) {
        const double y2 = (*y)[i2];
        const double e2 = error[i2];
        const double r2 = e2 * y2;
        const bool violates = (r2 < -tol && alpha[i2] < c) || (r2 > tol && alpha[i2] > 0.0);
        if (!violates) return false;

        const std::size_t n = alpha.size();
        // heuristic: pick the non-bound point with the largest |e1 - e2|
        std::size_t best = n;
        double best_gap = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (alpha[i] <= 0.0 || alpha[i] >= c) continue;
            const double gap = std::abs(error[i] - e2);
            if (gap > best_gap) {
                best_gap = gap;
                best = i;
            }
        }
        if (best < n && take_step(best, i2)) return true;

        const std::size_t start1 = static_cast<std::size_t>(rng.below(n));
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t i = (start1 + k) % n;
            if (alpha[i] <= 0.0 || alpha[i] >= c) continue;
            if (take_step(i, i2)) return true;
        }
        const std::size_t start2 = static_cast<std::size_t>(rng.below(n));
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t i = (start2 + k) % n;
            if (take_step(i, i2)) return true;
        }
        return false;
    }
};

}  // namespace smo

// Trains one soft-margin binary model on pre-standardized rows. Deterministic
// for a fixed row order and seed. Throws NumericError if the sweep bound is
// exhausted before the KKT conditions hold at tolerance.
inline BinarySvmModel train_binary_smo(const std::vector<std::vector<double>>& x,
                                       const std::vector<double>& y, const SvmConfig& cfg = {},
                                       std::vector<double>* objective_trace = nullptr) {
    const std::size_t n = x.size();
    if (n == 0 || y.size() != n) throw DataError("svm: empty or mismatched training data");
    bool has_pos = false, has_neg = false;
    for (double v : y) {
        if (v == 1.0) has_pos = true;
        else if (v == -1.0) has_neg = true;
        else throw DataError("svm: labels must be +1/-1");
    }
    if (!has_pos || !has_neg) throw SingleClassInput(has_pos ? "only +1 rows" : "only -1 rows");
    for (const auto& row : x)
        for (double v : row)
            if (!std::isfinite(v)) throw NonFiniteFeature("in training row");
    if (cfg.c <= 0.0) throw ConfigError("svm: C must be positive");

    smo::Problem p;
    p.x = &x;
    p.y = &y;
    p.c = cfg.c;
    p.tol = cfg.tol;
    p.alpha.assign(n, 0.0);
    p.error.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) p.error[i] = -y[i];  // f = 0 initially
    p.gram.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            p.gram[i][j] = p.gram[j][i] = kernel_eval(cfg.kernel, cfg.gamma, x[i], x[j]);
    p.objective_trace = objective_trace;

    Rng rng(derive_seed(cfg.seed, 0x534d4f));
    bool examine_all = true;
    int changed = 0;
    int epochs = 0;
    while (changed > 0 || examine_all) {
        if (++epochs > cfg.max_epochs) throw NumericError("smo did not converge");
        changed = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!examine_all && (p.alpha[i] <= 0.0 || p.alpha[i] >= p.c)) continue;
            changed += p.examine(i, rng) ? 1 : 0;
        }
        if (examine_all)
            examine_all = false;
        else if (changed == 0)
            examine_all = true;
    }

    // Final bias from the converged alphas. Alphas within rounding of a bound
    // count as bound (clipping can strand them a few ulps short); free
    // vectors then pin the bias exactly, otherwise take the midpoint of the
    // feasible interval.
    {
        std::vector<double> net(n, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (p.alpha[j] == 0.0) continue;
            for (std::size_t i = 0; i < n; ++i) net[i] += p.alpha[j] * y[j] * p.gram[i][j];
        }
        const double eps = bound_epsilon(p.c);
        double sum = 0.0;
        std::size_t free_count = 0;
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            const bool at_lo = p.alpha[i] <= eps;
            const bool at_hi = p.alpha[i] >= p.c - eps;
            if (!at_lo && !at_hi) {
                sum += y[i] - net[i];
                ++free_count;
            }
            if (!at_hi) {  // alpha < C: margin at least 1
                if (y[i] > 0) lo = std::max(lo, 1.0 - net[i]);
                else hi = std::min(hi, -1.0 - net[i]);
            }
            if (!at_lo) {  // alpha > 0: margin at most 1
                if (y[i] > 0) hi = std::min(hi, 1.0 - net[i]);
                else lo = std::max(lo, -1.0 - net[i]);
            }
        }
        if (free_count > 0) p.bias = sum / static_cast<double>(free_count);
        else if (std::isfinite(lo) && std::isfinite(hi)) p.bias = 0.5 * (lo + hi);
        else if (std::isfinite(lo)) p.bias = lo;
        else if (std::isfinite(hi)) p.bias = hi;
        else p.bias = 0.0;
    }

    BinarySvmModel model;
    model.kernel = cfg.kernel;
    model.gamma = cfg.gamma;
    model.c = cfg.c;
    model.bias = p.bias;
    for (std::size_t i = 0; i < n; ++i) {
        if (p.alpha[i] > 0.0) {
            model.support_vectors.push_back(x[i]);
            model.coefficients.push_back(p.alpha[i] * y[i]);
        }
    }
    return model;
}

// Diagnostics for solver verification: the largest KKT residual and the
// equality-constraint residual of a trained model on its training set.
struct KktReport {
    double max_violation = 0.0;
    double equality_residual = 0.0;
};

inline KktReport kkt_report(const BinarySvmModel& model, const std::vector<std::vector<double>>& x,
                            const std::vector<double>& y, const std::vector<double>& alpha) {
    KktReport rep;
    const double eps = bound_epsilon(model.c);
    double sum_ay = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double m = y[i] * model.decision(x[i]);
        double v = 0.0;
        if (alpha[i] <= eps)
            v = std::max(0.0, 1.0 - m);
        else if (alpha[i] >= model.c - eps)
            v = std::max(0.0, m - 1.0);
        else
            v = std::abs(m - 1.0);
        rep.max_violation = std::max(rep.max_violation, v);
        sum_ay += alpha[i] * y[i];
    }
    rep.equality_residual = std::abs(sum_ay);
    return rep;
}

// alpha vector of a model relative to its own training rows (support rows
// carry |coefficient|, the rest zero) for KKT checking
inline std::vector<double> recover_alpha(const BinarySvmModel& model,
                                         const std::vector<std::vector<double>>& x) {
    std::vector<double> alpha(x.size(), 0.0);
    std::size_t sv = 0;
    for (std::size_t i = 0; i < x.size() && sv < model.support_vectors.size(); ++i) {
        if (x[i] == model.support_vectors[sv]) alpha[i] = std::abs(model.coefficients[sv]), ++sv;
    }
    return alpha;
}

struct ClassPair {
    ExpertiseClass positive;
    ExpertiseClass negative;
};

inline constexpr std::array<ClassPair, 3> kClassPairs = {{
    {ExpertiseClass::Expert, ExpertiseClass::Intermediate},
    {ExpertiseClass::Expert, ExpertiseClass::Novice},
    {ExpertiseClass::Intermediate, ExpertiseClass::Novice},
}};

struct MulticlassModel {
    Standardizer standardizer;
    std::array<BinarySvmModel, 3> pairwise;  // order of kClassPairs
    std::vector<std::string> schema;         // selected feature names
    SvmConfig config;
    // retained training set (standardized) for permutation importance
    std::vector<std::vector<double>> train_rows;
    std::vector<ExpertiseClass> train_labels;
};

// Fits the standardizer and the three pairwise models. Rows are sorted into
// a canonical order first so that predictions do not depend on the caller's
// row order.
inline MulticlassModel train_multiclass(const FeatureMatrix& matrix, const SvmConfig& cfg = {}) {
    for (ExpertiseClass c : kAllClasses) {
        if (matrix.rows_of(c).empty()) throw ClassMissing(to_string(c));
    }

    std::vector<std::size_t> order(matrix.rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ra = matrix.rows[a];
        const auto& rb = matrix.rows[b];
        if (ra.label != rb.label) return static_cast<int>(ra.label) < static_cast<int>(rb.label);
        if (ra.values != rb.values) return ra.values < rb.values;
        return ra.participant_id < rb.participant_id;
    });

    std::vector<std::vector<double>> raw;
    std::vector<ExpertiseClass> labels;
    for (std::size_t i : order) {
        raw.push_back(matrix.rows[i].values);
        labels.push_back(matrix.rows[i].label);
    }

    MulticlassModel model;
    model.schema = matrix.columns;
    model.config = cfg;
    model.standardizer = Standardizer::fit(raw);
    for (const auto& row : raw) model.train_rows.push_back(model.standardizer.transform(row));
    model.train_labels = labels;

    for (std::size_t pair = 0; pair < kClassPairs.size(); ++pair) {
        std::vector<std::vector<double>> x;
        std::vector<double> y;
        for (std::size_t i = 0; i < model.train_rows.size(); ++i) {
            if (labels[i] == kClassPairs[pair].positive) {
                x.push_back(model.train_rows[i]);
                y.push_back(1.0);
            } else if (labels[i] == kClassPairs[pair].negative) {
                x.push_back(model.train_rows[i]);
                y.push_back(-1.0);
            }
        }
        SvmConfig pair_cfg = cfg;
        pair_cfg.seed = derive_seed(cfg.seed, 100 + pair);
        model.pairwise[pair] = train_binary_smo(x, y, pair_cfg);
    }
    return model;
}

// One-vs-one majority vote; a 3-way tie goes to the class with the largest
// summed absolute decision margin, then fixed class order.
inline ExpertiseClass predict(const MulticlassModel& model, const std::vector<double>& raw_row) {
    if (raw_row.size() != model.standardizer.dimension())
        throw SchemaMismatch("probe has " + std::to_string(raw_row.size()) + " features, model has " +
                             std::to_string(model.standardizer.dimension()));
    for (double v : raw_row)
        if (!std::isfinite(v)) throw NonFiniteFeature("in probe row");

    const auto x = model.standardizer.transform(raw_row);
    std::array<int, 3> votes{};
    std::array<double, 3> margin{};
    for (std::size_t pair = 0; pair < kClassPairs.size(); ++pair) {
        const double f = model.pairwise[pair].decision(x);
        const ExpertiseClass winner = f >= 0.0 ? kClassPairs[pair].positive : kClassPairs[pair].negative;
        votes[static_cast<int>(winner)] += 1;
        margin[static_cast<int>(winner)] += std::abs(f);
    }
    int best = 0;
    for (int c = 1; c < 3; ++c) {
        if (votes[c] > votes[best] || (votes[c] == votes[best] && margin[c] > margin[best])) best = c;
    }
    return static_cast<ExpertiseClass>(best);
}

struct ImportanceRanking {
    // descending score; ties keep the fixed column order
    std::vector<std::string> features;
    std::vector<double> scores;
};

namespace detail {

inline ImportanceRanking sort_ranking(const std::vector<std::string>& names,
                                      std::vector<double> scores) {
    std::vector<std::size_t> order(names.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    ImportanceRanking r;
    for (std::size_t i : order) {
        r.features.push_back(names[i]);
        r.scores.push_back(scores[i]);
    }
    return r;
}

}  // namespace detail

// Linear kernel: importance of feature j is the sum over the pairwise models
// of |w_j| recovered from the support expansion. Rbf falls back to seeded
// permutation importance over the model's own training rows.
inline ImportanceRanking feature_importance(const MulticlassModel& model) {
    const std::size_t d = model.schema.size();
    std::vector<double> scores(d, 0.0);

    if (model.config.kernel == KernelId::Linear) {
        for (const auto& bin : model.pairwise) {
            const auto w = bin.primal_weights();
            for (std::size_t j = 0; j < w.size(); ++j) scores[j] += std::abs(w[j]);
        }
        return detail::sort_ranking(model.schema, std::move(scores));
    }

    // permutation importance: accuracy drop on the training rows when one
    // standardized column is shuffled
    auto vote = [&](const std::vector<double>& x) {
        std::array<int, 3> votes{};
        std::array<double, 3> margin{};
        for (std::size_t pair = 0; pair < kClassPairs.size(); ++pair) {
            const double f = model.pairwise[pair].decision(x);
            const ExpertiseClass w = f >= 0.0 ? kClassPairs[pair].positive : kClassPairs[pair].negative;
            votes[static_cast<int>(w)] += 1;
            margin[static_cast<int>(w)] += std::abs(f);
        }
        int best = 0;
        for (int c = 1; c < 3; ++c)
            if (votes[c] > votes[best] || (votes[c] == votes[best] && margin[c] > margin[best]))
                best = c;
        return static_cast<ExpertiseClass>(best);
    };
    auto accuracy_of = [&](const std::vector<std::vector<double>>& rows) {
        std::size_t hit = 0;
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (vote(rows[i]) == model.train_labels[i]) ++hit;
        return static_cast<double>(hit) / static_cast<double>(rows.size());
    };

    const double baseline = accuracy_of(model.train_rows);
    Rng rng(derive_seed(model.config.seed, 0x504552));
    const std::size_t n = model.train_rows.size();
    for (std::size_t j = 0; j < d; ++j) {
        auto rows = model.train_rows;
        for (std::size_t i = n - 1; i > 0; --i) {  // Fisher-Yates on column j
            const std::size_t k = static_cast<std::size_t>(rng.below(i + 1));
            std::swap(rows[i][j], rows[k][j]);
        }
        scores[j] = std::max(0.0, baseline - accuracy_of(rows));
    }
    return detail::sort_ranking(model.schema, std::move(scores));
}

}  // namespace gazemetric
