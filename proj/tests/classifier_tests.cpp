#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>

#include "aml/classifiers.hpp"

using namespace aml;

namespace {

std::shared_ptr<const ConstantUniverse> label_universe() {
    // 0: feature x, 1: feature z, 2..3: labels
    std::vector<Constant> cs{{0, ConstantKind::kCategoricalValue, "x", 0},
                             {1, ConstantKind::kCategoricalValue, "z", 0},
                             {2, ConstantKind::kLabel, "y", 0},
                             {3, ConstantKind::kLabel, "y", 1}};
    return std::make_shared<const ConstantUniverse>(std::move(cs),
                                                    std::vector<std::pair<ConstantId, ConstantId>>{});
}

}  // namespace

TEST_CASE("fewest misses picks the least-discriminated label") {
    auto u = label_universe();
    Atomization m(u);
    m.insert(Atom(ConstantSet::singleton(4, 2)));  // {c_0}
    Term t(*u, {0});
    // {c_0} discriminates (c_0, t); nothing discriminates label 1... both
    // labels: label 0 has 1 miss, label 1 has 0
    m.insert(Atom(ConstantSet::singleton(4, 0)));
    CHECK(fewest_misses(m, t, {2, 3}) == 1);
}

TEST_CASE("fewest misses tie breaks to the smallest label") {
    auto u = label_universe();
    Atomization m(u);
    m.insert(Atom(ConstantSet::singleton(4, 2)));
    m.insert(Atom(ConstantSet::singleton(4, 3)));
    ConstantSet mixed(4);
    mixed.insert(3);
    mixed.insert(0);  // below t through constant 0
    m.insert(Atom(mixed));
    Term t(*u, {0});
    // misses: label 0 -> {c_0} = 1; label 1 -> {c_1} = 1 (mixed atom is below t)
    CHECK(fewest_misses(m, t, {2, 3}) == 0);

    // break the tie against label 0, then permute the label order
    ConstantSet heavy(4);
    heavy.insert(2);
    heavy.insert(1);  // not below t: an extra miss for label 0 only
    m.insert(Atom(heavy));
    CHECK(fewest_misses(m, t, {2, 3}) == 1);
    CHECK(fewest_misses(m, t, {3, 2}) == 0);  // same winning constant
}

TEST_CASE("atom_features emits plus-minus one in stable order") {
    auto u = label_universe();
    Atomization m(u);
    CHECK(atom_features(m, Term(*u, {0})).empty());
    m.insert(Atom(ConstantSet::singleton(4, 0)));
    m.insert(Atom(ConstantSet::singleton(4, 1)));
    const std::vector<double> f = atom_features(m, Term(*u, {0}));
    CHECK(f == std::vector<double>{1.0, -1.0});
    for (double v : f) CHECK(std::fabs(v) == 1.0);
}

TEST_CASE("gradient matches central finite differences") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t n = 3, feats = 4, classes = 3;
    std::vector<std::vector<double>> x(n, std::vector<double>(feats));
    for (auto& row : x)
        for (double& v : row) v = gauss(rng);
    std::vector<int> y{0, 2, 1};
    std::vector<double> params(classes * (feats + 1));
    for (double& p : params) p = gauss(rng);

    std::vector<double> grad;
    readout_loss_and_grad(x, y, classes, params, &grad);
    const double eps = 1e-6;
    for (std::size_t j = 0; j < params.size(); ++j) {
        std::vector<double> lo = params, hi = params;
        lo[j] -= eps;
        hi[j] += eps;
        const double numeric = (readout_loss_and_grad(x, y, classes, hi, nullptr) -
                                readout_loss_and_grad(x, y, classes, lo, nullptr)) /
                               (2 * eps);
        CHECK(grad[j] == doctest::Approx(numeric).epsilon(1e-6));
    }
}

TEST_CASE("readout converges on a separable toy and stops on loss") {
    // features are the class sign
    std::vector<std::vector<double>> x{{1.0}, {1.0}, {-1.0}, {-1.0}};
    std::vector<int> y{0, 0, 1, 1};
    ReadoutConfig cfg;
    cfg.learning_rate = 50.0;  // softmax loss decays ~1/t; a large step makes
                               // the 1e-7 stop reachable on this symmetric toy
    const LinearReadout r = train_readout(x, y, 2, cfg);
    CHECK(r.stopped_on_loss);
    CHECK(r.final_loss < 1e-7);
    CHECK(predict_readout(r, {1.0}) == 0);
    CHECK(predict_readout(r, {-1.0}) == 1);
}

TEST_CASE("loss is monotone non-increasing for a small learning rate") {
    std::vector<std::vector<double>> x{{1.0, -1.0}, {-1.0, 1.0}, {1.0, 1.0}};
    std::vector<int> y{0, 1, 0};
    const std::size_t classes = 2;
    std::vector<double> params(classes * 3, 0.1);
    std::vector<double> grad;
    double prev = readout_loss_and_grad(x, y, classes, params, &grad);
    for (int epoch = 0; epoch < 200; ++epoch) {
        for (std::size_t j = 0; j < params.size(); ++j) params[j] -= 1e-3 * grad[j];
        const double loss = readout_loss_and_grad(x, y, classes, params, &grad);
        CHECK(loss <= prev + 1e-12);
        prev = loss;
    }
}

TEST_CASE("single-class training predicts that class everywhere") {
    std::vector<std::vector<double>> x{{1.0}, {-1.0}};
    std::vector<int> y{0, 0};
    const LinearReadout r = train_readout(x, y, 1);
    CHECK(predict_readout(r, {5.0}) == 0);
    CHECK(predict_readout(r, {-5.0}) == 0);
}

TEST_CASE("predict_readout ties break to the smallest index") {
    LinearReadout r;
    r.weights = {{0.0}, {0.0}};
    r.bias = {0.0, 0.0};
    CHECK(predict_readout(r, {3.0}) == 0);
    r.weights = {{0.0, 1.0}, {1.0, 0.0}};
    r.bias = {0.0, 0.0};
    CHECK(predict_readout(r, {1.0, -1.0}) == 1);
    CHECK_THROWS_AS(predict_readout(r, {1.0}), std::invalid_argument);
}

TEST_CASE("readout errors") {
    CHECK_THROWS_AS(train_readout({}, {}, 2), std::invalid_argument);
    CHECK_THROWS_AS(train_readout({{1.0}, {1.0, 2.0}}, {0, 1}, 2), std::invalid_argument);
    CHECK_THROWS_AS(train_readout({{1.0}}, {4}, 2), std::invalid_argument);
}

TEST_CASE("readout JSON round-trip") {
    std::vector<std::vector<double>> x{{1.0}, {-1.0}};
    std::vector<int> y{0, 1};
    LinearReadout r = train_readout(x, y, 2);
    r.atom_order_fingerprint = 0xdeadbeef;
    const LinearReadout back = readout_from_json(readout_to_json(r));
    CHECK(back.atom_order_fingerprint == r.atom_order_fingerprint);
    CHECK(back.weights == r.weights);
    CHECK(back.bias == r.bias);
}
