#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "aml/stats.hpp"

using namespace aml;

namespace {

ScoreMatrix matrix(std::vector<std::vector<double>> values,
                   std::vector<std::string> methods) {
    ScoreMatrix m;
    m.methods = std::move(methods);
    for (std::size_t i = 0; i < values.size(); ++i)
        m.observations.push_back({"d" + std::to_string(i), 100});
    m.values = std::move(values);
    return m;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("macro F1") {
    CHECK(macro_f1({0, 1, 0, 1}, {0, 1, 0, 1}, 2) == 1.0);
    // per class: TP=1, FP=1, FN=1 -> F1 = 0.5 each
    CHECK(macro_f1({0, 0, 1, 1}, {0, 1, 0, 1}, 2) == 0.5);
    // all predictions one class on balanced binary truth: F1 = {2/3, 0}
    CHECK(macro_f1({0, 0, 0, 0}, {0, 0, 1, 1}, 2) == doctest::Approx(1.0 / 3.0));
    CHECK_THROWS_AS(macro_f1({}, {}, 2), std::invalid_argument);
}

TEST_CASE("mean ranks with mid-rank ties") {
    const ScoreMatrix m = matrix({{0.9, 0.5}, {0.8, 0.6}}, {"A", "B"});
    CHECK(mean_ranks(m) == std::vector<double>{1.0, 2.0});
    const ScoreMatrix tied = matrix({{0.7, 0.7}, {0.9, 0.1}}, {"A", "B"});
    CHECK(mean_ranks(tied) == std::vector<double>{1.25, 1.75});
}

TEST_CASE("Friedman: flat scores give statistic 0, p 1") {
    const ScoreMatrix m = matrix({{0.5, 0.5, 0.5}, {0.2, 0.2, 0.2}}, {"A", "B", "C"});
    const FriedmanResult r = friedman_test(m);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == 1.0);
}

TEST_CASE("Friedman p matches a permutation oracle") {
    // 3 methods x 4 observations, method A dominant
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> noise(0.0, 0.05);
    std::vector<std::vector<double>> values;
    for (int i = 0; i < 4; ++i)
        values.push_back({0.8 + noise(rng), 0.5 + noise(rng), 0.45 + noise(rng)});
    const ScoreMatrix m = matrix(values, {"A", "B", "C"});
    const FriedmanResult r = friedman_test(m);

    // exhaustive within-row permutations of the rank assignments
    const std::vector<std::vector<int>> perms{{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                             {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    auto statistic_of = [](const std::vector<std::vector<double>>& ranks) {
        const double k = 3, n = static_cast<double>(ranks.size());
        std::vector<double> sums(3, 0.0);
        for (const auto& row : ranks)
            for (int j = 0; j < 3; ++j) sums[j] += row[j];
        double ss = 0.0;
        for (double s : sums) {
            const double mean = s / n - (k + 1) / 2;
            ss += mean * mean;
        }
        return 12.0 * n / (k * (k + 1)) * ss;
    };
    std::vector<std::vector<double>> base_ranks{{1, 2, 3}, {1, 2, 3}, {1, 2, 3}, {1, 2, 3}};
    int at_least = 0, total = 0;
    for (const auto& p0 : perms)
        for (const auto& p1 : perms)
            for (const auto& p2 : perms)
                for (const auto& p3 : perms) {
                    std::vector<std::vector<double>> ranks(4, std::vector<double>(3));
                    const std::vector<const std::vector<int>*> ps{&p0, &p1, &p2, &p3};
                    for (int i = 0; i < 4; ++i)
                        for (int j = 0; j < 3; ++j)
                            ranks[i][j] = base_ranks[i][(*ps[i])[j]];
                    ++total;
                    at_least += statistic_of(ranks) >= r.statistic - 1e-9;
                }
    const double exact_p = static_cast<double>(at_least) / total;
    CHECK(std::fabs(r.p_value - exact_p) < 0.02);
}

TEST_CASE("signed-rank test basics") {
    std::vector<double> x(20), y(20);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        x[i] = u(rng);
        y[i] = x[i] + 0.3 + 0.01 * u(rng);
    }
    const double p = wilcoxon_signed_rank(x, y);
    CHECK(p < 0.001);
    CHECK(wilcoxon_signed_rank(y, x) == doctest::Approx(p));  // two-sided symmetry
    CHECK_THROWS_AS(wilcoxon_signed_rank(x, x), std::invalid_argument);
}

TEST_CASE("signed-rank exact distribution for small untied samples") {
    // d = {1, 2, 3}: W = 6, exact two-sided p = 2 * P(W >= 6) = 2/8
    const double p = wilcoxon_signed_rank({2, 4, 6}, {1, 2, 3});
    CHECK(p == doctest::Approx(0.25));
    // antisymmetric direction
    CHECK(wilcoxon_signed_rank({1, 2, 3}, {2, 4, 6}) == doctest::Approx(0.25));
}

TEST_CASE("signed-rank p is invariant under positive affine transforms") {
    // dyadic values keep differences and ties exact under v -> 2v + 1
    std::vector<double> x{0.5, 0.75, 0.25, 1.0, 0.375, 0.875, 0.625, 0.125};
    std::vector<double> y{0.25, 0.5, 0.375, 0.5, 0.5, 0.625, 0.5, 0.25};
    const double p = wilcoxon_signed_rank(x, y);
    std::vector<double> xt = x, yt = y;
    for (double& v : xt) v = 2.0 * v + 1.0;
    for (double& v : yt) v = 2.0 * v + 1.0;
    CHECK(wilcoxon_signed_rank(xt, yt) == doctest::Approx(p));
}

TEST_CASE("Holm step-down adjustment") {
    CHECK(holm_adjust({0.2}) == std::vector<double>{0.2});
    const std::vector<double> adj = holm_adjust({0.01, 0.04, 0.03});
    CHECK(adj[0] == doctest::Approx(0.03));
    CHECK(adj[1] == doctest::Approx(0.06));
    CHECK(adj[2] == doctest::Approx(0.06));
    // monotone and >= raw
    const std::vector<double> raw{0.001, 0.2, 0.04, 0.9, 0.01};
    const std::vector<double> a = holm_adjust(raw);
    for (std::size_t i = 0; i < raw.size(); ++i) CHECK(a[i] >= raw[i]);
    CHECK_THROWS_AS(holm_adjust({1.5}), std::invalid_argument);
}

TEST_CASE("Hodges-Lehmann estimate and degenerate CI") {
    // d = {1,2,3} -> Walsh {1, 1.5, 2, 2, 2.5, 3}, median 2
    const HodgesLehmann hl = hodges_lehmann({2, 4, 6}, {1, 2, 3});
    CHECK(hl.estimate == doctest::Approx(2.0));

    const HodgesLehmann flat = hodges_lehmann({1, 1, 1, 1}, {0, 0, 0, 0});
    CHECK(flat.estimate == 1.0);
    CHECK(flat.ci_low == 1.0);
    CHECK(flat.ci_high == 1.0);

    // antisymmetry
    const HodgesLehmann fwd = hodges_lehmann({2, 4, 7, 9}, {1, 2, 3, 4});
    const HodgesLehmann rev = hodges_lehmann({1, 2, 3, 4}, {2, 4, 7, 9});
    CHECK(fwd.estimate == doctest::Approx(-rev.estimate));
}

TEST_CASE("cliques from the reject matrix") {
    const std::vector<double> ranks{1.0, 2.0, 3.0, 4.0};
    SUBCASE("nothing rejected: one clique") {
        std::vector<std::vector<bool>> reject(4, std::vector<bool>(4, false));
        const auto c = cliques(reject, ranks);
        REQUIRE(c.size() == 1);
        CHECK(c[0].size() == 4);
    }
    SUBCASE("everything rejected: singletons") {
        std::vector<std::vector<bool>> reject(4, std::vector<bool>(4, true));
        for (int i = 0; i < 4; ++i) reject[i][i] = false;
        const auto c = cliques(reject, ranks);
        CHECK(c.size() == 4);
        for (const auto& clique : c) CHECK(clique.size() == 1);
    }
    SUBCASE("one method split off") {
        // method 0 rejected against everyone else
        std::vector<std::vector<bool>> reject(4, std::vector<bool>(4, false));
        for (int j = 1; j < 4; ++j) reject[0][j] = reject[j][0] = true;
        const auto c = cliques(reject, ranks);
        REQUIRE(c.size() == 2);
        CHECK(c[0] == std::vector<std::size_t>{0});
        CHECK(c[1] == std::vector<std::size_t>{1, 2, 3});
    }
    SUBCASE("every method appears; no clique holds a rejected pair") {
        std::vector<std::vector<bool>> reject(4, std::vector<bool>(4, false));
        reject[1][3] = reject[3][1] = true;
        const auto c = cliques(reject, ranks);
        std::vector<bool> seen(4, false);
        for (const auto& clique : c)
            for (std::size_t m : clique) seen[m] = true;
        CHECK(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }));
        for (const auto& clique : c)
            for (std::size_t a : clique)
                for (std::size_t b : clique) CHECK_FALSE(reject[a][b]);
    }
}

TEST_CASE("rank invariance under positive affine transforms") {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<double>> values;
    for (int i = 0; i < 8; ++i) values.push_back({u(rng), u(rng), u(rng)});
    const ScoreMatrix m = matrix(values, {"A", "B", "C"});
    ScoreMatrix scaled = m;
    for (auto& row : scaled.values)
        for (double& v : row) v = 3.0 * v + 0.5;
    CHECK(mean_ranks(m) == mean_ranks(scaled));
    CHECK(friedman_test(m).statistic == doctest::Approx(friedman_test(scaled).statistic));
}

TEST_CASE("CD diagram output is deterministic and complete") {
    const std::vector<std::string> methods{"alpha", "beta", "gamma"};
    const std::vector<double> ranks{1.2, 2.1, 2.7};
    const std::vector<std::vector<std::size_t>> cl{{0}, {1, 2}};
    const std::string p1 = std::filesystem::temp_directory_path() / "cd_a.svg";
    const std::string p2 = std::filesystem::temp_directory_path() / "cd_b.svg";
    emit_cd_diagram(methods, ranks, cl, p1);
    emit_cd_diagram(methods, ranks, cl, p2);
    const std::string a = slurp(p1);
    CHECK(a == slurp(p2));
    for (const std::string& name : methods)
        CHECK(a.find(name) != std::string::npos);
    CHECK(a.rfind("<svg", 0) == 0);
    CHECK_THROWS_AS(emit_cd_diagram(methods, ranks, cl, "/nonexistent-dir/x.svg"),
                    std::runtime_error);
}

TEST_CASE("score CSV loader validates cells") {
    const std::string path = std::filesystem::temp_directory_path() / "scores_test.csv";
    {
        std::ofstream out(path);
        out << "dataset,size,method,f1\n";
        out << "d1,50,A,0.5\nd1,50,B,0.6\nd2,100,A,0.7\nd2,100,B,0.8\n";
        out << "d1,50,ignored,0.9\n";
    }
    const ScoreMatrix m = load_scores_csv(path, {"A", "B"});
    CHECK(m.observations.size() == 2);
    CHECK(m.values[0] == std::vector<double>{0.5, 0.6});
    {
        std::ofstream out(path, std::ios::app);
        out << "d2,100,B,0.9\n";  // duplicate cell
    }
    CHECK_THROWS_AS(load_scores_csv(path, {"A", "B"}), std::runtime_error);
}

TEST_CASE("chi-squared tail helper") {
    // reference values: P(X2 > 3.84, df=1) ~ 0.05; P(X2 > 12.59, df=6) ~ 0.05
    CHECK(chi_squared_sf(3.841, 1) == doctest::Approx(0.05).epsilon(0.01));
    CHECK(chi_squared_sf(12.592, 6) == doctest::Approx(0.05).epsilon(0.01));
    CHECK(chi_squared_sf(0.0, 3) == 1.0);
}
