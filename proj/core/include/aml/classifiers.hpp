#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "aml/algebra.hpp"

namespace aml {

/// Label whose classification duple (c_l, t) is discriminated by the fewest
/// atoms; ties go to the smallest label index.
int fewest_misses(const Atomization& m, const Term& t,
                  const std::vector<ConstantId>& label_constants);

/// +1 per atom below t, -1 otherwise, in stable atom-id order.
std::vector<double> atom_features(const Atomization& m, const Term& t);

struct ReadoutConfig {
    double learning_rate = 0.05;
    int max_epochs = 200000;
    double stop_loss = 1e-7;
};

struct LinearReadout {
    std::vector<std::vector<double>> weights;  // [classes][features]
    std::vector<double> bias;                  // [classes]
    std::uint64_t atom_order_fingerprint = 0;
    int epochs_run = 0;
    double final_loss = 0.0;
    bool stopped_on_loss = false;
};

/// Mean softmax cross-entropy over the dataset and its analytic gradient
/// (flattened weights then bias). Shared by training and the gradient tests.
double readout_loss_and_grad(const std::vector<std::vector<double>>& features,
                             const std::vector<int>& labels, std::size_t classes,
                             const std::vector<double>& params,
                             std::vector<double>* grad);

/// Full-batch gradient descent on mean cross-entropy; stops when the mean
/// loss drops below cfg.stop_loss or at cfg.max_epochs.
/// Throws std::invalid_argument on empty input, std::runtime_error if the
/// loss becomes non-finite (the message names the epoch).
LinearReadout train_readout(const std::vector<std::vector<double>>& features,
                            const std::vector<int>& labels, std::size_t classes,
                            const ReadoutConfig& cfg = {});

/// Argmax of linear scores; ties to the smallest label index.
/// Throws std::invalid_argument on a feature-length mismatch.
int predict_readout(const LinearReadout& r, const std::vector<double>& features);

std::string readout_to_json(const LinearReadout& r);
LinearReadout readout_from_json(const std::string& text);

}  // namespace aml
