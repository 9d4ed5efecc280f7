// Command-line front end: encode/train/reduce/eval plus the score-based
// statistical comparison pipeline (scores import, stats, report).
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "aml/classifiers.hpp"
#include "aml/harness.hpp"
#include "aml/reducer.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCellFailure = 1;
constexpr int kExitInvalidInput = 2;

struct DataArgs {
    std::string data;
    std::string schema;
    bool image = false;
    int bins = 0;    // override for every numeric column when > 0
    int levels = 0;  // override for image quantization when > 0
};

void add_data_options(CLI::App* cmd, DataArgs& args) {
    cmd->add_option("--data", args.data, "input CSV")->required();
    cmd->add_option("--schema", args.schema, "schema sidecar JSON")->required();
    cmd->add_flag("--image", args.image, "treat input as pixel rows");
    cmd->add_option("--bins", args.bins, "override bins for all numeric columns");
    cmd->add_option("--levels", args.levels, "override image intensity levels");
}

aml::EncodedDataset load_encoded(const DataArgs& args, std::uint64_t seed,
                                 const std::string& split = "all") {
    if (args.image) {
        aml::ImageSchema schema = aml::ImageSchema::from_json_file(args.schema);
        if (args.levels > 0) schema.levels = args.levels;
        std::vector<std::vector<int>> images;
        std::vector<std::string> labels;
        aml::read_image_csv(args.data,
                            schema.width * schema.height * schema.channels, images,
                            labels);
        std::set<std::string> classes(labels.begin(), labels.end());
        aml::ImageEncoder enc(schema, {classes.begin(), classes.end()});
        return enc.encode(images, labels, {args.data, split, seed, images.size()});
    }
    aml::TabularSchema schema = aml::TabularSchema::from_json_file(args.schema);
    if (args.bins > 0)
        for (auto& col : schema.columns)
            if (col.kind == aml::ColumnKind::kNumeric) col.bins = args.bins;
    const std::vector<aml::TabularRow> rows = aml::read_tabular_csv(args.data, schema);
    aml::TabularEncoder enc(schema, rows);
    return enc.encode(rows, {args.data, split, seed, rows.size()});
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::istringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

void print_pairs(const aml::ComparisonReport& report,
                 const std::vector<std::string>& methods) {
    std::printf("Friedman chi2 = %.4f, p = %.4g (%s)\n", report.friedman.statistic,
                report.friedman.p_value,
                report.friedman_rejects ? "rejects" : "does not reject");
    for (std::size_t i = 0; i < methods.size(); ++i)
        std::printf("  rank %-22s %.4f\n", methods[i].c_str(), report.ranks[i]);
    for (const aml::PairResult& pr : report.pairs)
        std::printf("  %s vs %s: HL=%+.4f CI95=[%+.4f, %+.4f] raw=%.4g adj=%.4g %s\n",
                    methods[pr.a].c_str(), methods[pr.b].c_str(), pr.hl.estimate,
                    pr.hl.ci_low, pr.hl.ci_high, pr.raw_p, pr.adjusted_p,
                    pr.reject ? "reject" : "keep");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"algebraic semilattice classifier pipeline"};
    app.require_subcommand(1);

    // --- encode ---
    DataArgs encode_args;
    std::string encode_out;
    CLI::App* encode_cmd = app.add_subcommand("encode", "encode a dataset and summarize");
    add_data_options(encode_cmd, encode_args);
    encode_cmd->add_option("--out", encode_out, "write summary JSON here");

    // --- train ---
    DataArgs train_args;
    aml::TrainConfig train_cfg;
    std::string train_out = "out";
    std::string sizes_csv;
    bool force = false;
    double reduction = 0.10;
    CLI::App* train_cmd = app.add_subcommand("train", "train on a dataset");
    add_data_options(train_cmd, train_args);
    train_cmd->add_option("--seed", train_cfg.seed, "rng seed");
    train_cmd->add_option("--max-batches", train_cfg.max_batches)->capture_default_str();
    train_cmd->add_option("--patience", train_cfg.patience)->capture_default_str();
    train_cmd->add_option("--reduction", reduction)->capture_default_str();
    train_cmd->add_option("--sizes", sizes_csv,
                          "comma-separated training sizes: run the full "
                          "per-cell experiment instead of one training run");
    train_cmd->add_option("--out", train_out, "output directory")->capture_default_str();
    train_cmd->add_flag("--force", force, "recompute completed cells");

    // --- reduce ---
    DataArgs reduce_args;
    std::string reduce_model, reduce_out = "reduced.json";
    std::uint64_t reduce_seed = 0;
    double reduce_target = 0.10;
    CLI::App* reduce_cmd = app.add_subcommand("reduce", "shrink a union model");
    add_data_options(reduce_cmd, reduce_args);
    reduce_cmd->add_option("--model", reduce_model, "union model JSON")->required();
    reduce_cmd->add_option("--seed", reduce_seed, "rng seed");
    reduce_cmd->add_option("--reduction", reduce_target)->capture_default_str();
    reduce_cmd->add_option("--out", reduce_out)->capture_default_str();

    // --- eval ---
    DataArgs eval_args;
    std::string eval_model;
    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a model on a dataset");
    add_data_options(eval_cmd, eval_args);
    eval_cmd->add_option("--model", eval_model, "reduced model JSON")->required();

    // --- scores import ---
    std::string scores_csv, scores_out, scores_methods;
    CLI::App* scores_cmd = app.add_subcommand("scores", "score-file utilities");
    CLI::App* import_cmd = scores_cmd->add_subcommand("import", "validate a score CSV");
    import_cmd->add_option("--csv", scores_csv, "dataset,size,method,f1")->required();
    import_cmd->add_option("--methods", scores_methods, "comma-separated method filter")
        ->required();
    import_cmd->add_option("--out", scores_out, "write the validated copy here");

    // --- stats ---
    std::string stats_csv, stats_methods, stats_out;
    double stats_alpha = 0.05;
    CLI::App* stats_cmd = app.add_subcommand("stats", "compare methods from a score CSV");
    stats_cmd->add_option("--scores", stats_csv)->required();
    stats_cmd->add_option("--methods", stats_methods, "comma-separated, rank order fixed")
        ->required();
    stats_cmd->add_option("--alpha", stats_alpha)->capture_default_str();
    stats_cmd->add_option("--out", stats_out, "also write report files here");

    // --- report ---
    std::string report_csv, report_methods, report_out = "report";
    double report_alpha = 0.05;
    bool per_size = false;
    CLI::App* report_cmd =
        app.add_subcommand("report", "full report with CD diagram and per-size views");
    report_cmd->add_option("--scores", report_csv)->required();
    report_cmd->add_option("--methods", report_methods)->required();
    report_cmd->add_option("--alpha", report_alpha)->capture_default_str();
    report_cmd->add_option("--out", report_out)->capture_default_str();
    report_cmd->add_flag("--per-size", per_size, "emit one report per training size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? kExitOk : kExitInvalidInput;
    }

    try {
        if (encode_cmd->parsed()) {
            const aml::EncodedDataset ds = load_encoded(encode_args, 0);
            nlohmann::json j{{"constants", ds.universe->size()},
                             {"order_pairs", ds.universe->order_pairs().size()},
                             {"terms", ds.terms.size()},
                             {"classes", ds.label_names.size()},
                             {"duples", ds.duples.size()},
                             {"universe_fingerprint", ds.universe->fingerprint()}};
            std::cout << j.dump(2) << '\n';
            if (!encode_out.empty()) {
                std::ofstream out(encode_out);
                out << j.dump(2) << '\n';
            }
        } else if (train_cmd->parsed()) {
            train_cfg.reduction_target = reduction;
            if (!sizes_csv.empty()) {
                aml::ExperimentPlan plan;
                plan.datasets.push_back({std::filesystem::path(train_args.data).stem(),
                                         train_args.data, train_args.schema,
                                         train_args.image});
                for (const std::string& s : split_list(sizes_csv))
                    plan.sizes.push_back(std::stoi(s));
                plan.seed = train_cfg.seed;
                plan.trainer = train_cfg;
                plan.out_dir = train_out;
                plan.force = force;
                std::vector<std::string> failures;
                aml::run_experiment(plan, &failures);
                for (const std::string& f : failures)
                    std::cerr << "cell failed: " << f << '\n';
                return failures.empty() ? kExitOk : kExitCellFailure;
            }
            const aml::EncodedDataset ds = load_encoded(train_args, train_cfg.seed, "train");
            const aml::TrainResult r = aml::train(ds, train_cfg);
            std::filesystem::create_directories(train_out);
            std::ofstream(train_out + "/union.json") << aml::model_to_json(r.union_model);
            std::ofstream(train_out + "/master.json") << aml::model_to_json(r.master);
            std::ofstream(train_out + "/trace.jsonl") << aml::trace_to_jsonl(r.trace);
            std::printf("batches=%d early_stop=%s master=%zu union=%zu\n", r.batches_run,
                        r.early_stopped ? "yes" : "no", r.master.size(),
                        r.union_model.size());
        } else if (reduce_cmd->parsed()) {
            const aml::EncodedDataset ds = load_encoded(reduce_args, reduce_seed);
            std::ifstream in(reduce_model);
            if (!in) throw std::runtime_error("cannot open " + reduce_model);
            std::stringstream buf;
            buf << in.rdbuf();
            const aml::Atomization union_model =
                aml::model_from_json(buf.str(), ds.universe);
            std::vector<aml::Duple> negatives;
            for (const aml::Duple& d : ds.duples)
                if (d.sign == aml::DupleSign::kNegative) negatives.push_back(d);
            std::mt19937_64 rng(reduce_seed);
            const aml::Atomization reduced =
                aml::reduce(union_model, negatives, reduce_target, rng);
            std::ofstream(reduce_out) << aml::model_to_json(reduced);
            std::printf("union=%zu reduced=%zu\n", union_model.size(), reduced.size());
        } else if (eval_cmd->parsed()) {
            const aml::EncodedDataset ds = load_encoded(eval_args, 0, "test");
            std::ifstream in(eval_model);
            if (!in) throw std::runtime_error("cannot open " + eval_model);
            std::stringstream buf;
            buf << in.rdbuf();
            const aml::Atomization model = aml::model_from_json(buf.str(), ds.universe);
            std::vector<int> fm_preds;
            for (const aml::Term& t : ds.terms)
                fm_preds.push_back(aml::fewest_misses(model, t, ds.label_constants));
            const int classes = static_cast<int>(ds.label_names.size());
            std::printf("fewest-misses: macro_f1=%.4f\n",
                        aml::macro_f1(fm_preds, ds.labels, classes));
            std::vector<std::vector<double>> x;
            for (const aml::Term& t : ds.terms) x.push_back(aml::atom_features(model, t));
            const aml::LinearReadout readout =
                aml::train_readout(x, ds.labels, static_cast<std::size_t>(classes));
            std::vector<int> ro_preds;
            for (const auto& row : x) ro_preds.push_back(aml::predict_readout(readout, row));
            std::printf("readout (refit on this data): macro_f1=%.4f\n",
                        aml::macro_f1(ro_preds, ds.labels, classes));
        } else if (import_cmd->parsed()) {
            const aml::ScoreMatrix m =
                aml::load_scores_csv(scores_csv, split_list(scores_methods));
            std::printf("observations=%zu methods=%zu\n", m.observations.size(),
                        m.methods.size());
            if (!scores_out.empty()) {
                std::ofstream out(scores_out);
                out << "dataset,size,method,f1\n";
                for (std::size_t i = 0; i < m.observations.size(); ++i)
                    for (std::size_t j = 0; j < m.methods.size(); ++j)
                        out << m.observations[i].first << ',' << m.observations[i].second
                            << ',' << m.methods[j] << ',' << m.values[i][j] << '\n';
            }
        } else if (stats_cmd->parsed()) {
            const aml::ScoreMatrix m =
                aml::load_scores_csv(stats_csv, split_list(stats_methods));
            const aml::ComparisonReport report =
                stats_out.empty() ? aml::compare_methods(m, stats_alpha)
                                  : aml::write_report(m, stats_alpha, stats_out);
            print_pairs(report, m.methods);
        } else if (report_cmd->parsed()) {
            const aml::ScoreMatrix m =
                aml::load_scores_csv(report_csv, split_list(report_methods));
            aml::write_report(m, report_alpha, report_out);
            if (per_size) {
                for (const auto& [size, sub] : aml::per_size_matrices(m))
                    aml::write_report(sub, report_alpha,
                                      report_out + "/size-" + std::to_string(size));
            }
            std::printf("report written to %s\n", report_out.c_str());
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalidInput;
    }
    return kExitOk;
}
