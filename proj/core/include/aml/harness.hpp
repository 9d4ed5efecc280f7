#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aml/encoders.hpp"
#include "aml/stats.hpp"
#include "aml/trainer.hpp"

namespace aml {

struct DatasetEntry {
    std::string name;
    std::string csv_path;
    std::string schema_path;
    bool is_image = false;
};

struct ExperimentPlan {
    std::vector<DatasetEntry> datasets;
    std::vector<int> sizes;
    std::uint64_t seed = 0;
    TrainConfig trainer;
    double test_fraction = 0.10;
    std::string out_dir;
    bool force = false;
};

struct RunRecord {
    std::string dataset;
    int size = 0;
    std::string method;  // aml-readout | aml-fewest-misses | external:<name>
    std::uint64_t seed = 0;
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    std::vector<double> per_class_f1;
    double train_seconds = 0.0;
    std::uint64_t model_fingerprint = 0;
};

/// Seeded shuffle of 0..n-1; first ceil(test_fraction*n) indices form the
/// test set, the rest the ordered training pool.
/// Throws std::invalid_argument when n < 10.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_dataset(
    std::size_t n, double test_fraction, std::uint64_t seed);

/// Prefix of the pool; nested across n. Throws naming the dataset when the
/// pool is too small.
std::vector<std::size_t> take_first_n(const std::vector<std::size_t>& pool, std::size_t n,
                                      const std::string& dataset);

/// Runs encode -> train -> reduce -> evaluate for every (dataset, size) cell,
/// appending RunRecords to <out_dir>/runs.jsonl. Completed cells are skipped
/// unless plan.force. Returns all records (existing plus new); failed cells
/// are reported via the failures out-param.
std::vector<RunRecord> run_experiment(const ExperimentPlan& plan,
                                      std::vector<std::string>* failures = nullptr);

/// Merges run records and an optional external score CSV into one matrix over
/// the given method order. Throws std::runtime_error on duplicate or missing
/// cells (the message lists them).
ScoreMatrix aggregate(const std::vector<RunRecord>& records,
                      const std::string& external_csv,
                      const std::vector<std::string>& methods);

/// One sub-matrix per training size, keyed in ascending size order.
std::vector<std::pair<int, ScoreMatrix>> per_size_matrices(const ScoreMatrix& m);

/// Writes report.json, report.txt and cd_diagram.svg into out_dir.
ComparisonReport write_report(const ScoreMatrix& m, double alpha,
                              const std::string& out_dir);

std::string record_to_json(const RunRecord& r);
RunRecord record_from_json(const std::string& text);
std::vector<RunRecord> load_records(const std::string& path);

/// Binary task: label 1 iff the first feature exceeds its median; three
/// uninformative noise features. Deterministic in (n, seed).
std::pair<TabularSchema, std::vector<TabularRow>> make_threshold_dataset(
    std::size_t n, std::uint64_t seed);

}  // namespace aml
