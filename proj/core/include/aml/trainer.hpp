#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "aml/encoders.hpp"

namespace aml {

struct TrainConfig {
    int max_batches = 1000;
    double initial_fraction = 1.0 / 3.0;
    int full_batch_at = 666;
    int patience = 40;
    int crossing_candidates = 8;
    std::uint64_t seed = 0;
    double reduction_target = 0.10;
    // accepted for config-file compatibility; the mechanisms they tune are
    // not part of this implementation
    double simplification_threshold = 1.5;
    double union_fraction = 0.1;
};

struct BatchTrace {
    int batch = 0;
    int batch_size = 0;
    std::size_t master_atoms = 0;
    std::size_t union_atoms = 0;
    int violated_negatives = 0;
    int crossings = 0;
    int perfect_streak = 0;
};

struct TrainResult {
    Atomization master;
    Atomization union_model;
    std::vector<BatchTrace> trace;
    bool early_stopped = false;
    int batches_run = 0;
    int contradictions = 0;  // undiscriminable negatives seen
};

/// Batch size at index b: linear ramp from ceil(total*initial_fraction) at
/// b=0 up to total at b=full_batch_at, clamped to total afterwards.
int batch_size(int b, int total, const TrainConfig& cfg);

/// Uniform sample of `size` duple indices without replacement.
std::vector<std::size_t> sample_batch(std::size_t total, std::size_t size,
                                      std::mt19937_64& rng);

/// Inserts singleton-lhs atoms until every discriminable negative in the batch
/// is discriminated. Returns the number of undiscriminable negatives skipped.
int repair_negatives(Atomization& master, const std::vector<Duple>& duples,
                     const std::vector<std::size_t>& negatives);

/// Crosses every atom discriminating the positive duple with a partner chosen
/// from <= k sampled atoms below d.rhs, preferring partners below the fewest
/// batch-negative rhs terms. Returns the number of crossings performed.
int enforce_positive(Atomization& master, const Duple& d,
                     const std::vector<Duple>& duples,
                     const std::vector<std::size_t>& negatives, int k,
                     std::mt19937_64& rng);

/// All training negatives discriminated and fewest-misses classification
/// correct on every training example.
bool union_encodes_perfectly(const Atomization& union_model, const EncodedDataset& dataset);

TrainResult train(const EncodedDataset& dataset, const TrainConfig& cfg);

std::string trace_to_jsonl(const std::vector<BatchTrace>& trace);

}  // namespace aml
