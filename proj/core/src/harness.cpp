#include "aml/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "aml/classifiers.hpp"
#include "aml/reducer.hpp"

namespace aml {
namespace {

namespace fs = std::filesystem;

std::uint64_t mix64(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
}

std::uint64_t cell_seed(std::uint64_t base, const std::string& dataset, int size) {
    std::uint64_t h = base;
    for (char c : dataset) h = mix64(h, static_cast<unsigned char>(c));
    return mix64(h, static_cast<std::uint64_t>(size));
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

std::vector<double> per_class_f1_scores(const std::vector<int>& predictions,
                                        const std::vector<int>& truths, int classes) {
    std::vector<double> out;
    for (int c = 0; c < classes; ++c) {
        long tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            tp += predictions[i] == c && truths[i] == c;
            fp += predictions[i] == c && truths[i] != c;
            fn += predictions[i] != c && truths[i] == c;
        }
        const long denom = 2 * tp + fp + fn;
        out.push_back(denom ? 2.0 * static_cast<double>(tp) / static_cast<double>(denom)
                            : 0.0);
    }
    return out;
}

struct CellMetrics {
    double accuracy = 0.0;
    double f1 = 0.0;
    std::vector<double> per_class;
};

CellMetrics score_predictions(const std::vector<int>& predictions,
                              const std::vector<int>& truths, int classes) {
    CellMetrics m;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        hits += predictions[i] == truths[i];
    m.accuracy = static_cast<double>(hits) / static_cast<double>(predictions.size());
    m.f1 = macro_f1(predictions, truths, classes);
    m.per_class = per_class_f1_scores(predictions, truths, classes);
    return m;
}

}  // namespace

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_dataset(
    std::size_t n, double test_fraction, std::uint64_t seed) {
    if (n < 10) throw std::invalid_argument("need at least 10 rows to split");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto test_n = static_cast<std::size_t>(
        std::ceil(test_fraction * static_cast<double>(n)));
    std::vector<std::size_t> test(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(test_n));
    std::vector<std::size_t> pool(idx.begin() + static_cast<std::ptrdiff_t>(test_n), idx.end());
    return {std::move(pool), std::move(test)};
}

std::vector<std::size_t> take_first_n(const std::vector<std::size_t>& pool, std::size_t n,
                                      const std::string& dataset) {
    if (n > pool.size())
        throw std::invalid_argument("dataset " + dataset + ": requested " +
                                    std::to_string(n) + " of " +
                                    std::to_string(pool.size()) + " pooled examples");
    return {pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n)};
}

std::string record_to_json(const RunRecord& r) {
    nlohmann::json j{{"dataset", r.dataset},
                     {"size", r.size},
                     {"method", r.method},
                     {"seed", r.seed},
                     {"accuracy", r.accuracy},
                     {"macro_f1", r.macro_f1},
                     {"per_class_f1", r.per_class_f1},
                     {"train_seconds", r.train_seconds},
                     {"model_fingerprint", r.model_fingerprint}};
    return j.dump();
}

RunRecord record_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    RunRecord r;
    r.dataset = j.at("dataset").get<std::string>();
    r.size = j.at("size").get<int>();
    r.method = j.at("method").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.accuracy = j.at("accuracy").get<double>();
    r.macro_f1 = j.at("macro_f1").get<double>();
    r.per_class_f1 = j.value("per_class_f1", std::vector<double>{});
    r.train_seconds = j.value("train_seconds", 0.0);
    r.model_fingerprint = j.value("model_fingerprint", std::uint64_t{0});
    return r;
}

std::vector<RunRecord> load_records(const std::string& path) {
    std::vector<RunRecord> out;
    std::ifstream in(path);
    if (!in) return out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(record_from_json(line));
    }
    return out;
}

std::vector<RunRecord> run_experiment(const ExperimentPlan& plan,
                                      std::vector<std::string>* failures) {
    const std::string records_path =
        plan.out_dir.empty() ? std::string{} : plan.out_dir + "/runs.jsonl";
    std::vector<RunRecord> records;
    if (!records_path.empty()) {
        fs::create_directories(plan.out_dir);
        if (!plan.force) records = load_records(records_path);
    }
    std::set<std::tuple<std::string, int, std::string>> done;
    for (const RunRecord& r : records) done.insert({r.dataset, r.size, r.method});

    std::ofstream out;
    if (!records_path.empty())
        out.open(records_path, plan.force ? std::ios::trunc : std::ios::app);

    for (const DatasetEntry& entry : plan.datasets) {
        TabularSchema schema;
        std::vector<TabularRow> rows;
        ImageSchema image_schema;
        std::vector<std::vector<int>> images;
        std::vector<std::string> image_labels;
        try {
            if (entry.is_image) {
                image_schema = ImageSchema::from_json_file(entry.schema_path);
                read_image_csv(entry.csv_path,
                               image_schema.width * image_schema.height *
                                   image_schema.channels,
                               images, image_labels);
            } else {
                schema = TabularSchema::from_json_file(entry.schema_path);
                rows = read_tabular_csv(entry.csv_path, schema);
            }
        } catch (const std::exception& e) {
            if (failures) failures->push_back(entry.name + ": " + e.what());
            continue;
        }
        const std::size_t total = entry.is_image ? images.size() : rows.size();

        for (int size : plan.sizes) {
            const bool have_fm = done.count({entry.name, size, "aml-fewest-misses"}) > 0;
            const bool have_ro = done.count({entry.name, size, "aml-readout"}) > 0;
            if (have_fm && have_ro) continue;
            const std::uint64_t seed = cell_seed(plan.seed, entry.name, size);
            try {
                auto [pool, test] = split_dataset(total, plan.test_fraction, plan.seed);
                const std::vector<std::size_t> train_idx =
                    take_first_n(pool, static_cast<std::size_t>(size), entry.name);

                EncodedDataset train_set, test_set;
                if (entry.is_image) {
                    std::set<std::string> classes(image_labels.begin(), image_labels.end());
                    ImageEncoder enc(image_schema,
                                     {classes.begin(), classes.end()});
                    auto select = [&](const std::vector<std::size_t>& idx) {
                        std::vector<std::vector<int>> im;
                        std::vector<std::string> lb;
                        for (std::size_t i : idx) {
                            im.push_back(images[i]);
                            lb.push_back(image_labels[i]);
                        }
                        return std::pair{im, lb};
                    };
                    auto [tr_im, tr_lb] = select(train_idx);
                    auto [te_im, te_lb] = select(test);
                    train_set = enc.encode(tr_im, tr_lb,
                                           {entry.name, "train", seed, tr_im.size()});
                    test_set = enc.encode(te_im, te_lb,
                                          {entry.name, "test", seed, te_im.size()});
                } else {
                    std::vector<TabularRow> train_rows, test_rows;
                    for (std::size_t i : train_idx) train_rows.push_back(rows[i]);
                    for (std::size_t i : test) test_rows.push_back(rows[i]);
                    std::set<std::string> classes;
                    for (const TabularRow& r : rows) classes.insert(r.label);
                    TabularSchema s = schema;
                    if (s.label_values.empty())
                        s.label_values.assign(classes.begin(), classes.end());
                    TabularEncoder enc(s, train_rows);
                    train_set = enc.encode(train_rows,
                                           {entry.name, "train", seed, train_rows.size()});
                    test_set = enc.encode(test_rows,
                                          {entry.name, "test", seed, test_rows.size()});
                }

                TrainConfig cfg = plan.trainer;
                cfg.seed = seed;
                const auto t0 = std::chrono::steady_clock::now();
                const TrainResult trained = train(train_set, cfg);

                std::vector<Duple> negatives;
                for (const Duple& d : train_set.duples)
                    if (d.sign == DupleSign::kNegative) negatives.push_back(d);
                std::mt19937_64 reduce_rng(seed ^ 0x5eedu);
                const Atomization model = reduce(trained.union_model, negatives,
                                                 cfg.reduction_target, reduce_rng);
                const double seconds =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                        .count();
                const std::uint64_t fingerprint = fnv1a(model_to_json(model));
                const int classes = static_cast<int>(train_set.label_names.size());

                if (!have_fm) {
                    std::vector<int> preds;
                    for (const Term& t : test_set.terms)
                        preds.push_back(fewest_misses(model, t, test_set.label_constants));
                    const CellMetrics m = score_predictions(preds, test_set.labels, classes);
                    RunRecord rec{entry.name, size, "aml-fewest-misses", seed,
                                  m.accuracy,  m.f1, m.per_class,      seconds,
                                  fingerprint};
                    records.push_back(rec);
                    if (out.is_open()) out << record_to_json(rec) << '\n';
                }
                if (!have_ro) {
                    std::vector<std::vector<double>> train_x, test_x;
                    for (const Term& t : train_set.terms)
                        train_x.push_back(atom_features(model, t));
                    for (const Term& t : test_set.terms)
                        test_x.push_back(atom_features(model, t));
                    LinearReadout readout = train_readout(
                        train_x, train_set.labels, static_cast<std::size_t>(classes));
                    readout.atom_order_fingerprint = fingerprint;
                    std::vector<int> preds;
                    for (const auto& x : test_x)
                        preds.push_back(predict_readout(readout, x));
                    const CellMetrics m = score_predictions(preds, test_set.labels, classes);
                    RunRecord rec{entry.name, size, "aml-readout", seed,
                                  m.accuracy,  m.f1, m.per_class,  seconds,
                                  fingerprint};
                    records.push_back(rec);
                    if (out.is_open()) out << record_to_json(rec) << '\n';
                }
            } catch (const std::exception& e) {
                if (failures)
                    failures->push_back(entry.name + "/" + std::to_string(size) + ": " +
                                        e.what());
            }
        }
    }
    return records;
}

ScoreMatrix aggregate(const std::vector<RunRecord>& records,
                      const std::string& external_csv,
                      const std::vector<std::string>& methods) {
    std::map<std::string, std::size_t> method_index;
    for (std::size_t i = 0; i < methods.size(); ++i) method_index[methods[i]] = i;

    std::map<std::pair<std::string, int>, std::vector<std::pair<bool, double>>> cells;
    std::string duplicates;
    auto put = [&](const std::string& dataset, int size, const std::string& method,
                   double f1) {
        auto mi = method_index.find(method);
        if (mi == method_index.end()) return;
        auto& row = cells[{dataset, size}];
        if (row.empty()) row.assign(methods.size(), {false, 0.0});
        auto& cell = row[mi->second];
        if (cell.first)
            duplicates += " " + dataset + "/" + std::to_string(size) + "/" + method;
        cell = {true, f1};
    };

    for (const RunRecord& r : records) {
        std::string method = r.method;
        if (method.rfind("external:", 0) == 0) method = method.substr(9);
        put(r.dataset, r.size, method, r.macro_f1);
    }
    if (!external_csv.empty()) {
        std::ifstream in(external_csv);
        if (!in) throw std::runtime_error("cannot open " + external_csv);
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            if (line.empty() || line == "\r") continue;
            std::istringstream ss(line);
            std::string dataset, size_s, method, f1_s;
            std::getline(ss, dataset, ',');
            std::getline(ss, size_s, ',');
            std::getline(ss, method, ',');
            std::getline(ss, f1_s);
            put(dataset, std::stoi(size_s), method, std::stod(f1_s));
        }
    }
    if (!duplicates.empty()) throw std::runtime_error("duplicate cells:" + duplicates);

    ScoreMatrix m;
    m.methods = methods;
    std::string missing;
    for (const auto& [key, row] : cells) {
        for (std::size_t j = 0; j < methods.size(); ++j)
            if (!row[j].first)
                missing +=
                    " " + key.first + "/" + std::to_string(key.second) + "/" + methods[j];
        m.observations.push_back(key);
        std::vector<double> vals;
        for (const auto& [ok, v] : row) vals.push_back(v);
        m.values.push_back(std::move(vals));
    }
    if (!missing.empty()) throw std::runtime_error("missing cells:" + missing);
    return m;
}

std::vector<std::pair<int, ScoreMatrix>> per_size_matrices(const ScoreMatrix& m) {
    std::map<int, ScoreMatrix> by_size;
    for (std::size_t i = 0; i < m.observations.size(); ++i) {
        ScoreMatrix& sub = by_size[m.observations[i].second];
        if (sub.methods.empty()) sub.methods = m.methods;
        sub.observations.push_back(m.observations[i]);
        sub.values.push_back(m.values[i]);
    }
    return {by_size.begin(), by_size.end()};
}

ComparisonReport write_report(const ScoreMatrix& m, double alpha,
                              const std::string& out_dir) {
    fs::create_directories(out_dir);
    const ComparisonReport report = compare_methods(m, alpha);

    {
        std::ofstream out(out_dir + "/report.json");
        if (!out) throw std::runtime_error("cannot write " + out_dir + "/report.json");
        out << report_to_json(report, m.methods) << '\n';
    }
    {
        std::ofstream out(out_dir + "/report.txt");
        char buf[256];
        std::snprintf(buf, sizeof buf, "Friedman chi2 = %.4f, p = %.4g (%s at alpha=%g)\n",
                      report.friedman.statistic, report.friedman.p_value,
                      report.friedman_rejects ? "rejects" : "does not reject", alpha);
        out << buf << "Mean ranks:\n";
        for (std::size_t i = 0; i < m.methods.size(); ++i) {
            std::snprintf(buf, sizeof buf, "  %-20s %.4f\n", m.methods[i].c_str(),
                          report.ranks[i]);
            out << buf;
        }
        out << "\nPairwise comparisons (signed-rank, Holm-adjusted):\n";
        for (const PairResult& pr : report.pairs) {
            std::snprintf(buf, sizeof buf,
                          "  %s vs %s: HL=%+.4f CI95=[%+.4f, %+.4f] raw_p=%.4g "
                          "adj_p=%.4g reject=%s\n",
                          m.methods[pr.a].c_str(), m.methods[pr.b].c_str(),
                          pr.hl.estimate, pr.hl.ci_low, pr.hl.ci_high, pr.raw_p,
                          pr.adjusted_p, pr.reject ? "Yes" : "No");
            out << buf;
        }
    }
    emit_cd_diagram(m.methods, report.ranks, report.cliques, out_dir + "/cd_diagram.svg");
    return report;
}

std::pair<TabularSchema, std::vector<TabularRow>> make_threshold_dataset(
    std::size_t n, std::uint64_t seed) {
    TabularSchema schema;
    // an even bin count keeps the label threshold (the median) on a bin edge,
    // so the task stays noiseless after encoding; two bins keep the share of
    // discriminating atoms in the trained union high enough for reduction
    for (int c = 0; c < 4; ++c)
        schema.columns.push_back({"f" + std::to_string(c), ColumnKind::kNumeric, 2});
    schema.label_column = "y";
    schema.label_values = {"0", "1"};

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::vector<double>> features(n, std::vector<double>(4));
    for (auto& row : features)
        for (double& v : row) v = unit(rng);
    std::vector<double> first;
    for (const auto& row : features) first.push_back(row[0]);
    std::vector<double> sorted_first = first;
    std::sort(sorted_first.begin(), sorted_first.end());
    const double median = sorted_first[n / 2];

    std::vector<TabularRow> rows;
    char buf[32];
    for (std::size_t i = 0; i < n; ++i) {
        TabularRow r;
        for (double v : features[i]) {
            std::snprintf(buf, sizeof buf, "%.6f", v);
            r.cells.emplace_back(std::string(buf));
        }
        r.label = first[i] >= median ? "1" : "0";
        rows.push_back(std::move(r));
    }
    return {std::move(schema), std::move(rows)};
}

}  // namespace aml
