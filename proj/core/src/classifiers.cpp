#include "aml/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace aml {

int fewest_misses(const Atomization& m, const Term& t,
                  const std::vector<ConstantId>& label_constants) {
    if (label_constants.empty()) throw std::invalid_argument("no labels");
    int best = 0;
    std::size_t best_misses = 0;
    for (std::size_t l = 0; l < label_constants.size(); ++l) {
        const ConstantSet& lhs_down = m.universe().downset(label_constants[l]);
        std::size_t misses = 0;
        for (const Atom& a : m.atoms())
            if (a.constants().intersects(lhs_down) && !atom_below(a, t)) ++misses;
        if (l == 0 || misses < best_misses) {
            best = static_cast<int>(l);
            best_misses = misses;
        }
    }
    return best;
}

std::vector<double> atom_features(const Atomization& m, const Term& t) {
    std::vector<double> out;
    out.reserve(m.size());
    for (const Atom& a : m.atoms()) out.push_back(atom_below(a, t) ? 1.0 : -1.0);
    return out;
}

double readout_loss_and_grad(const std::vector<std::vector<double>>& features,
                             const std::vector<int>& labels, std::size_t classes,
                             const std::vector<double>& params,
                             std::vector<double>* grad) {
    const std::size_t n = features.size();
    const std::size_t f = n ? features[0].size() : 0;
    if (params.size() != classes * (f + 1))
        throw std::invalid_argument("parameter vector has wrong length");
    if (grad) grad->assign(params.size(), 0.0);

    double loss = 0.0;
    std::vector<double> scores(classes);
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<double>& x = features[i];
        for (std::size_t c = 0; c < classes; ++c) {
            double s = params[classes * f + c];  // bias block after weights
            const double* w = params.data() + c * f;
            for (std::size_t j = 0; j < f; ++j) s += w[j] * x[j];
            scores[c] = s;
        }
        const double mx = *std::max_element(scores.begin(), scores.end());
        double z = 0.0;
        for (std::size_t c = 0; c < classes; ++c) z += std::exp(scores[c] - mx);
        const double log_z = std::log(z) + mx;
        const int y = labels[i];
        loss += log_z - scores[static_cast<std::size_t>(y)];
        if (grad) {
            for (std::size_t c = 0; c < classes; ++c) {
                const double p = std::exp(scores[c] - log_z);
                const double g = p - (static_cast<int>(c) == y ? 1.0 : 0.0);
                double* gw = grad->data() + c * f;
                for (std::size_t j = 0; j < f; ++j) gw[j] += g * x[j];
                (*grad)[classes * f + c] += g;
            }
        }
    }
    loss /= static_cast<double>(n);
    if (grad)
        for (double& g : *grad) g /= static_cast<double>(n);
    return loss;
}

LinearReadout train_readout(const std::vector<std::vector<double>>& features,
                            const std::vector<int>& labels, std::size_t classes,
                            const ReadoutConfig& cfg) {
    if (features.empty() || features.size() != labels.size())
        throw std::invalid_argument("train_readout: empty or mismatched input");
    const std::size_t f = features[0].size();
    for (const auto& row : features)
        if (row.size() != f)
            throw std::invalid_argument("train_readout: ragged feature rows");
    for (int y : labels)
        if (y < 0 || static_cast<std::size_t>(y) >= classes)
            throw std::invalid_argument("train_readout: label out of range");

    std::vector<double> params(classes * (f + 1), 0.0);
    std::vector<double> grad;
    LinearReadout r;
    double loss = 0.0;
    int epoch = 0;
    for (; epoch < cfg.max_epochs; ++epoch) {
        loss = readout_loss_and_grad(features, labels, classes, params, &grad);
        if (!std::isfinite(loss))
            throw std::runtime_error("readout loss non-finite at epoch " +
                                     std::to_string(epoch));
        if (loss < cfg.stop_loss) {
            r.stopped_on_loss = true;
            break;
        }
        for (std::size_t j = 0; j < params.size(); ++j)
            params[j] -= cfg.learning_rate * grad[j];
    }
    r.epochs_run = epoch;
    r.final_loss = loss;
    r.weights.resize(classes);
    for (std::size_t c = 0; c < classes; ++c)
        r.weights[c].assign(params.begin() + static_cast<std::ptrdiff_t>(c * f),
                            params.begin() + static_cast<std::ptrdiff_t>((c + 1) * f));
    r.bias.assign(params.begin() + static_cast<std::ptrdiff_t>(classes * f), params.end());
    return r;
}

int predict_readout(const LinearReadout& r, const std::vector<double>& features) {
    if (r.weights.empty()) throw std::invalid_argument("readout has no classes");
    int best = 0;
    double best_score = 0.0;
    for (std::size_t c = 0; c < r.weights.size(); ++c) {
        if (r.weights[c].size() != features.size())
            throw std::invalid_argument("feature length does not match readout");
        double s = r.bias[c];
        for (std::size_t j = 0; j < features.size(); ++j)
            s += r.weights[c][j] * features[j];
        if (c == 0 || s > best_score) {
            best = static_cast<int>(c);
            best_score = s;
        }
    }
    return best;
}

std::string readout_to_json(const LinearReadout& r) {
    nlohmann::json j{{"atom_order_fingerprint", r.atom_order_fingerprint},
                     {"weights", r.weights},
                     {"bias", r.bias},
                     {"epochs", r.epochs_run},
                     {"final_loss", r.final_loss},
                     {"stopped_on_loss", r.stopped_on_loss}};
    return j.dump(2);
}

LinearReadout readout_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    LinearReadout r;
    r.atom_order_fingerprint = j.at("atom_order_fingerprint").get<std::uint64_t>();
    r.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    r.bias = j.at("bias").get<std::vector<double>>();
    r.epochs_run = j.value("epochs", 0);
    r.final_loss = j.value("final_loss", 0.0);
    r.stopped_on_loss = j.value("stopped_on_loss", false);
    return r;
}

}  // namespace aml
