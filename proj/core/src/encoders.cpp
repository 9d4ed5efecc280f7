#include "aml/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace aml {
namespace {

using nlohmann::json;

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    return j;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cell));
            cell.clear();
        } else if (c != '\r') {
            cell += c;
        }
    }
    out.push_back(std::move(cell));
    return out;
}

double parse_numeric(const std::string& s, const std::string& column) {
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("non-numeric value '" + s + "' in column " + column);
    }
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos != s.size())
        throw std::invalid_argument("non-numeric value '" + s + "' in column " + column);
    return v;
}

}  // namespace

TabularSchema TabularSchema::from_json_file(const std::string& path) {
    const json j = load_json(path);
    TabularSchema s;
    for (const auto& col : j.at("columns")) {
        ColumnSpec spec;
        spec.name = col.at("name").get<std::string>();
        const std::string kind = col.at("kind").get<std::string>();
        if (kind == "categorical") {
            spec.kind = ColumnKind::kCategorical;
        } else if (kind == "numeric") {
            spec.kind = ColumnKind::kNumeric;
            spec.bins = col.value("bins", 10);
            if (spec.bins < 2) throw std::invalid_argument("bins must be >= 2 for " + spec.name);
        } else {
            throw std::invalid_argument("unknown column kind '" + kind + "'");
        }
        s.columns.push_back(std::move(spec));
    }
    s.label_column = j.at("label").get<std::string>();
    if (j.contains("label_values"))
        s.label_values = j.at("label_values").get<std::vector<std::string>>();
    std::set<std::string> names;
    for (const auto& c : s.columns)
        if (!names.insert(c.name).second)
            throw std::invalid_argument("duplicate column name " + c.name);
    return s;
}

ImageSchema ImageSchema::from_json_file(const std::string& path) {
    const json j = load_json(path);
    ImageSchema s;
    s.width = j.at("width").get<int>();
    s.height = j.at("height").get<int>();
    s.channels = j.value("channels", 1);
    s.levels = j.value("levels", 8);
    s.label_column = j.value("label", std::string("label"));
    if (s.width <= 0 || s.height <= 0 || s.channels <= 0 || s.levels < 2)
        throw std::invalid_argument("invalid image schema");
    return s;
}

std::vector<double> fit_bins(std::vector<double> values, int bins) {
    if (values.empty()) throw std::invalid_argument("fit_bins: no values");
    if (bins < 2) throw std::invalid_argument("fit_bins: bins must be >= 2");
    std::sort(values.begin(), values.end());
    std::vector<double> distinct(values);
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::vector<double> edges;
    if (static_cast<int>(distinct.size()) <= bins) {
        // one bin per distinct value: cut between neighbours
        for (std::size_t i = 0; i + 1 < distinct.size(); ++i)
            edges.push_back((distinct[i] + distinct[i + 1]) / 2.0);
        return edges;
    }
    const std::size_t n = values.size();
    for (int i = 1; i < bins; ++i) {
        const double p = static_cast<double>(i) * static_cast<double>(n) / bins;
        const double fl = std::floor(p);
        double e;
        if (p == fl) {
            const auto idx = static_cast<std::size_t>(p);
            e = (values[idx - 1] + values[idx]) / 2.0;
        } else {
            e = values[static_cast<std::size_t>(fl)];
        }
        if (edges.empty() || e > edges.back()) edges.push_back(e);
    }
    return edges;
}

int bin_index(double v, const std::vector<double>& edges) {
    return static_cast<int>(
        std::lower_bound(edges.begin(), edges.end(), v) - edges.begin());
}

TabularEncoder::TabularEncoder(const TabularSchema& schema,
                               const std::vector<TabularRow>& fit_rows)
    : schema_(schema) {
    numeric_.resize(schema_.columns.size());
    categorical_.resize(schema_.columns.size());

    std::vector<Constant> constants;
    std::vector<std::pair<ConstantId, ConstantId>> pairs;
    auto next_id = [&constants] { return static_cast<ConstantId>(constants.size()); };

    for (std::size_t c = 0; c < schema_.columns.size(); ++c) {
        const ColumnSpec& col = schema_.columns[c];
        if (col.kind == ColumnKind::kNumeric) {
            std::vector<double> vals;
            for (const TabularRow& r : fit_rows)
                if (r.cells.at(c)) vals.push_back(parse_numeric(*r.cells[c], col.name));
            if (vals.empty()) continue;  // wholly missing column: contributes nothing
            NumericColumn& nc = numeric_[c];
            nc.edges = fit_bins(std::move(vals), col.bins);
            const int k = static_cast<int>(nc.edges.size()) + 1;
            for (int b = 0; b < k; ++b) {
                nc.ascending.push_back(next_id());
                constants.push_back({nc.ascending.back(), ConstantKind::kChainAscending,
                                     col.name, b});
            }
            for (int b = 0; b < k; ++b) {
                nc.descending.push_back(next_id());
                constants.push_back({nc.descending.back(), ConstantKind::kChainDescending,
                                     col.name, b});
            }
            // ascending: bin 0 is the chain bottom; descending: bin k-1 is
            for (int b = 0; b + 1 < k; ++b) {
                pairs.emplace_back(nc.ascending[b], nc.ascending[b + 1]);
                pairs.emplace_back(nc.descending[b + 1], nc.descending[b]);
            }
        } else {
            std::set<std::string> seen;
            for (const TabularRow& r : fit_rows)
                if (r.cells.at(c)) seen.insert(*r.cells[c]);
            CategoricalColumn& cc = categorical_[c];
            for (const std::string& v : seen) {
                cc.constants.push_back(next_id());
                constants.push_back({cc.constants.back(), ConstantKind::kCategoricalValue,
                                     col.name,
                                     static_cast<std::int64_t>(cc.values.size())});
                cc.values.push_back(v);
            }
        }
    }

    if (!schema_.label_values.empty()) {
        label_values_ = schema_.label_values;
    } else {
        std::set<std::string> seen;
        for (const TabularRow& r : fit_rows) seen.insert(r.label);
        label_values_.assign(seen.begin(), seen.end());
    }
    for (std::size_t l = 0; l < label_values_.size(); ++l) {
        label_constants_.push_back(next_id());
        constants.push_back({label_constants_.back(), ConstantKind::kLabel,
                             schema_.label_column, static_cast<std::int64_t>(l)});
    }

    universe_ = std::make_shared<const ConstantUniverse>(std::move(constants),
                                                         std::move(pairs));
}

Term TabularEncoder::encode_row(const TabularRow& row) const {
    if (row.cells.size() != schema_.columns.size())
        throw std::invalid_argument("row has wrong cell count");
    std::vector<ConstantId> ids;
    for (std::size_t c = 0; c < schema_.columns.size(); ++c) {
        if (!row.cells[c]) continue;
        const ColumnSpec& col = schema_.columns[c];
        if (col.kind == ColumnKind::kNumeric) {
            const NumericColumn& nc = numeric_[c];
            if (nc.ascending.empty()) continue;
            const double v = parse_numeric(*row.cells[c], col.name);
            const int b = bin_index(v, nc.edges);
            ids.push_back(nc.ascending[static_cast<std::size_t>(b)]);
            ids.push_back(nc.descending[static_cast<std::size_t>(b)]);
        } else {
            const CategoricalColumn& cc = categorical_[c];
            auto it = std::lower_bound(cc.values.begin(), cc.values.end(), *row.cells[c]);
            if (it != cc.values.end() && *it == *row.cells[c])
                ids.push_back(cc.constants[static_cast<std::size_t>(it - cc.values.begin())]);
            // unseen categories contribute nothing
        }
    }
    return Term(*universe_, std::move(ids));
}

EncodedDataset TabularEncoder::encode(const std::vector<TabularRow>& rows,
                                      Provenance provenance) const {
    EncodedDataset out;
    out.universe = universe_;
    out.label_names = label_values_;
    out.label_constants = label_constants_;
    out.provenance = std::move(provenance);
    for (const TabularRow& r : rows) {
        out.terms.push_back(encode_row(r));
        auto it = std::find(label_values_.begin(), label_values_.end(), r.label);
        if (it == label_values_.end())
            throw std::invalid_argument("unknown label '" + r.label + "'");
        out.labels.push_back(static_cast<int>(it - label_values_.begin()));
    }
    out.duples = make_task_duples(*universe_, out.terms, out.labels, label_constants_);
    return out;
}

ImageEncoder::ImageEncoder(const ImageSchema& schema, std::vector<std::string> label_values)
    : schema_(schema), label_values_(std::move(label_values)) {
    const int pixels = schema_.width * schema_.height * schema_.channels;
    const int L = schema_.levels;
    std::vector<Constant> constants;
    std::vector<std::pair<ConstantId, ConstantId>> pairs;
    constants.reserve(static_cast<std::size_t>(pixels) * 2 * L + label_values_.size());
    for (int p = 0; p < pixels; ++p) {
        const auto base = static_cast<ConstantId>(constants.size());
        const std::string name = "px" + std::to_string(p);
        for (int b = 0; b < L; ++b)
            constants.push_back({base + static_cast<ConstantId>(b),
                                 ConstantKind::kChainAscending, name, b});
        for (int b = 0; b < L; ++b)
            constants.push_back({base + static_cast<ConstantId>(L + b),
                                 ConstantKind::kChainDescending, name, b});
        for (int b = 0; b + 1 < L; ++b) {
            pairs.emplace_back(base + b, base + b + 1);
            pairs.emplace_back(base + L + b + 1, base + L + b);
        }
    }
    for (std::size_t l = 0; l < label_values_.size(); ++l) {
        label_constants_.push_back(static_cast<ConstantId>(constants.size()));
        constants.push_back({label_constants_.back(), ConstantKind::kLabel,
                             schema_.label_column, static_cast<std::int64_t>(l)});
    }
    universe_ = std::make_shared<const ConstantUniverse>(std::move(constants),
                                                         std::move(pairs));
}

Term ImageEncoder::encode_image(const std::vector<int>& pixels) const {
    const int expected = schema_.width * schema_.height * schema_.channels;
    if (static_cast<int>(pixels.size()) != expected)
        throw std::invalid_argument("expected " + std::to_string(expected) + " pixels, got " +
                                    std::to_string(pixels.size()));
    const int L = schema_.levels;
    std::vector<ConstantId> ids;
    ids.reserve(pixels.size() * 2);
    for (int p = 0; p < expected; ++p) {
        const int intensity = std::clamp(pixels[static_cast<std::size_t>(p)], 0, 255);
        const int b = std::min(L - 1, intensity * L / 256);
        const auto base = static_cast<ConstantId>(p) * static_cast<ConstantId>(2 * L);
        ids.push_back(base + static_cast<ConstantId>(b));
        ids.push_back(base + static_cast<ConstantId>(L + b));
    }
    return Term(*universe_, std::move(ids));
}

EncodedDataset ImageEncoder::encode(const std::vector<std::vector<int>>& images,
                                    const std::vector<std::string>& labels,
                                    Provenance provenance) const {
    if (images.size() != labels.size())
        throw std::invalid_argument("images/labels length mismatch");
    EncodedDataset out;
    out.universe = universe_;
    out.label_names = label_values_;
    out.label_constants = label_constants_;
    out.provenance = std::move(provenance);
    for (std::size_t i = 0; i < images.size(); ++i) {
        out.terms.push_back(encode_image(images[i]));
        auto it = std::find(label_values_.begin(), label_values_.end(), labels[i]);
        if (it == label_values_.end())
            throw std::invalid_argument("unknown label '" + labels[i] + "'");
        out.labels.push_back(static_cast<int>(it - label_values_.begin()));
    }
    out.duples = make_task_duples(*universe_, out.terms, out.labels, label_constants_);
    return out;
}

std::vector<Duple> make_task_duples(const ConstantUniverse& universe,
                                    const std::vector<Term>& terms,
                                    const std::vector<int>& labels,
                                    const std::vector<ConstantId>& label_constants) {
    if (terms.size() != labels.size())
        throw std::invalid_argument("terms/labels length mismatch");
    std::vector<Duple> out;
    out.reserve(terms.size() * label_constants.size());
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const int l = labels[i];
        if (l < 0 || static_cast<std::size_t>(l) >= label_constants.size())
            throw std::invalid_argument("label index out of range");
        for (std::size_t j = 0; j < label_constants.size(); ++j) {
            Term lhs(universe, {label_constants[j]});
            out.push_back({std::move(lhs), terms[i],
                           static_cast<int>(j) == l ? DupleSign::kPositive
                                                    : DupleSign::kNegative});
        }
    }
    return out;
}

std::vector<TabularRow> read_tabular_csv(const std::string& path,
                                         const TabularSchema& schema) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty file " + path);
    const std::vector<std::string> header = split_csv_line(line);
    std::vector<std::size_t> col_index(schema.columns.size());
    auto locate = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw std::runtime_error("column '" + name + "' missing from " + path);
        return static_cast<std::size_t>(it - header.begin());
    };
    for (std::size_t c = 0; c < schema.columns.size(); ++c)
        col_index[c] = locate(schema.columns[c].name);
    const std::size_t label_index = locate(schema.label_column);

    std::vector<TabularRow> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error("ragged row in " + path);
        TabularRow row;
        for (std::size_t c = 0; c < schema.columns.size(); ++c) {
            const std::string& v = cells[col_index[c]];
            if (v.empty() || v == "?")
                row.cells.emplace_back(std::nullopt);
            else
                row.cells.emplace_back(v);
        }
        row.label = cells[label_index];
        rows.push_back(std::move(row));
    }
    return rows;
}

void read_image_csv(const std::string& path, int expected_pixels,
                    std::vector<std::vector<int>>& images,
                    std::vector<std::string>& labels) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (first) {
            first = false;
            // allow a header row: skip when the first pixel cell is non-numeric
            if (cells.size() >= 2) {
                try {
                    (void)parse_numeric(cells[1], "p0");
                } catch (const std::invalid_argument&) {
                    continue;
                }
            }
        }
        if (static_cast<int>(cells.size()) != expected_pixels + 1)
            throw std::runtime_error("row with " + std::to_string(cells.size() - 1) +
                                     " pixels, expected " + std::to_string(expected_pixels));
        std::vector<int> px;
        px.reserve(static_cast<std::size_t>(expected_pixels));
        for (int i = 0; i < expected_pixels; ++i)
            px.push_back(static_cast<int>(
                parse_numeric(cells[static_cast<std::size_t>(i) + 1], "pixel")));
        images.push_back(std::move(px));
        labels.push_back(cells[0]);
    }
}

}  // namespace aml
