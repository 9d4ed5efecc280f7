#pragma once

#include <string>
#include <utility>
#include <vector>

namespace aml {

struct ScoreMatrix {
    std::vector<std::pair<std::string, int>> observations;  // (dataset, size)
    std::vector<std::string> methods;
    std::vector<std::vector<double>> values;  // [observation][method]
};

/// Rows of `dataset,size,method,f1`. Only listed methods are kept; every
/// (observation, method) cell must be present exactly once.
/// Throws std::runtime_error listing duplicate or missing cells.
ScoreMatrix load_scores_csv(const std::string& path,
                            const std::vector<std::string>& methods);

/// Unweighted mean of per-class F1. A class with no predictions and no truths
/// scores 0 unless dropped from `classes`.
double macro_f1(const std::vector<int>& predictions, const std::vector<int>& truths,
                int classes);

/// Per-method average of within-observation ranks (descending score,
/// mid-ranks for ties).
std::vector<double> mean_ranks(const ScoreMatrix& m);

struct FriedmanResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Tie-corrected Friedman chi-square with k-1 degrees of freedom.
/// Every observation tied flat gives statistic 0, p 1.
FriedmanResult friedman_test(const ScoreMatrix& m);

/// Two-sided signed-rank p. Zero differences are dropped. Uses the exact
/// signed-rank distribution when n < 50 with no zeros and no tied |d|,
/// otherwise the tie-corrected normal approximation with continuity
/// correction. Throws std::invalid_argument when every difference is zero.
double wilcoxon_signed_rank(const std::vector<double>& x, const std::vector<double>& y);

/// Holm step-down: i-th smallest p scaled by (m-i+1), monotone, capped at 1.
std::vector<double> holm_adjust(const std::vector<double>& raw);

struct HodgesLehmann {
    double estimate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

/// Median of Walsh averages of x - y; 95% CI from Walsh-average order
/// statistics at the normal-approximated signed-rank critical rank.
HodgesLehmann hodges_lehmann(const std::vector<double>& x, const std::vector<double>& y);

struct PairResult {
    std::size_t a = 0;  // method indices into ScoreMatrix::methods
    std::size_t b = 0;
    double raw_p = 1.0;
    double adjusted_p = 1.0;
    HodgesLehmann hl;
    bool reject = false;
};

struct ComparisonReport {
    FriedmanResult friedman;
    std::vector<double> ranks;
    std::vector<PairResult> pairs;             // all C(k,2), lexicographic
    std::vector<std::vector<std::size_t>> cliques;
    double alpha = 0.05;
    bool friedman_rejects = false;
};

/// Friedman, all pairwise signed-rank tests with Holm correction, effect
/// sizes, and cliques in one pass.
ComparisonReport compare_methods(const ScoreMatrix& m, double alpha = 0.05);

/// Maximal rank-contiguous method groups with no rejected pair inside.
std::vector<std::vector<std::size_t>> cliques(
    const std::vector<std::vector<bool>>& reject, const std::vector<double>& ranks);

/// Deterministic critical-difference diagram; byte-identical for equal input.
void emit_cd_diagram(const std::vector<std::string>& methods,
                     const std::vector<double>& ranks,
                     const std::vector<std::vector<std::size_t>>& clique_list,
                     const std::string& path);

std::string report_to_json(const ComparisonReport& report,
                           const std::vector<std::string>& methods);

// distribution helpers shared with the tests
double normal_cdf(double z);
double chi_squared_sf(double x, int df);

}  // namespace aml
