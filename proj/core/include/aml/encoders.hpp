#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "aml/algebra.hpp"

namespace aml {

enum class ColumnKind { kCategorical, kNumeric };

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::kCategorical;
    int bins = 10;  // numeric columns only
};

struct TabularSchema {
    std::vector<ColumnSpec> columns;
    std::string label_column;
    std::vector<std::string> label_values;  // empty: derived from data, sorted

    static TabularSchema from_json_file(const std::string& path);
};

/// One raw cell; nullopt encodes a missing value.
using Cell = std::optional<std::string>;

struct TabularRow {
    std::vector<Cell> cells;  // one per schema column, in schema order
    std::string label;
};

struct ImageSchema {
    int width = 0;
    int height = 0;
    int channels = 1;
    int levels = 8;
    std::string label_column = "label";

    static ImageSchema from_json_file(const std::string& path);
};

struct Provenance {
    std::string dataset;
    std::string split;
    std::uint64_t seed = 0;
    std::size_t size = 0;
};

struct EncodedDataset {
    std::shared_ptr<const ConstantUniverse> universe;
    std::vector<Term> terms;
    std::vector<int> labels;                 // index into label_names
    std::vector<std::string> label_names;
    std::vector<ConstantId> label_constants; // one per label, same order
    std::vector<Duple> duples;               // task duples, grouped per example
    Provenance provenance;
};

/// Quantile bin edges: <= bins-1 strictly increasing cut points. Values with
/// at most `bins` distinct values get one bin per distinct value.
/// Throws std::invalid_argument when every value is missing (empty input).
std::vector<double> fit_bins(std::vector<double> values, int bins);

/// Bin index for v given edges from fit_bins: count of edges strictly below v.
int bin_index(double v, const std::vector<double>& edges);

/// Fitted tabular encoder: owns the universe and the per-column vocabulary
/// learned from the training rows. Unseen categorical values and missing
/// cells contribute no constants at transform time.
class TabularEncoder {
public:
    TabularEncoder(const TabularSchema& schema, const std::vector<TabularRow>& fit_rows);

    const std::shared_ptr<const ConstantUniverse>& universe() const { return universe_; }
    const std::vector<std::string>& label_values() const { return label_values_; }
    const std::vector<ConstantId>& label_constants() const { return label_constants_; }

    Term encode_row(const TabularRow& row) const;
    EncodedDataset encode(const std::vector<TabularRow>& rows, Provenance provenance) const;

private:
    struct NumericColumn {
        std::vector<double> edges;
        std::vector<ConstantId> ascending;   // one per bin, chain bottom first
        std::vector<ConstantId> descending;  // one per bin, chain bottom last
    };
    struct CategoricalColumn {
        std::vector<std::string> values;     // sorted
        std::vector<ConstantId> constants;   // aligned with values
    };

    TabularSchema schema_;
    std::vector<NumericColumn> numeric_;         // aligned with schema columns
    std::vector<CategoricalColumn> categorical_; // aligned with schema columns
    std::vector<std::string> label_values_;
    std::vector<ConstantId> label_constants_;
    std::shared_ptr<const ConstantUniverse> universe_;
};

/// Shared universe for fixed-geometry images: two oppositely-ordered chains of
/// length `levels` per (pixel, channel), plus one label constant per class.
class ImageEncoder {
public:
    ImageEncoder(const ImageSchema& schema, std::vector<std::string> label_values);

    const std::shared_ptr<const ConstantUniverse>& universe() const { return universe_; }
    const std::vector<std::string>& label_values() const { return label_values_; }
    const std::vector<ConstantId>& label_constants() const { return label_constants_; }

    /// Pixels row-major, channel-interleaved, intensities in [0, 255].
    /// Throws std::invalid_argument on a size mismatch.
    Term encode_image(const std::vector<int>& pixels) const;

    EncodedDataset encode(const std::vector<std::vector<int>>& images,
                          const std::vector<std::string>& labels,
                          Provenance provenance) const;

private:
    ImageSchema schema_;
    std::vector<std::string> label_values_;
    std::vector<ConstantId> label_constants_;
    ConstantId chain_base_ = 0;  // pixel constants start here (0)
    std::shared_ptr<const ConstantUniverse> universe_;
};

/// 1 positive + (K-1) negative duples per example.
/// Throws std::invalid_argument for a label outside the declared values.
std::vector<Duple> make_task_duples(const ConstantUniverse& universe,
                                    const std::vector<Term>& terms,
                                    const std::vector<int>& labels,
                                    const std::vector<ConstantId>& label_constants);

/// CSV with header; cells empty or "?" are missing.
std::vector<TabularRow> read_tabular_csv(const std::string& path, const TabularSchema& schema);

/// CSV rows of `label,p0,p1,...` (no header required; a header row whose first
/// cell is non-numeric in p0 is skipped).
void read_image_csv(const std::string& path, int expected_pixels,
                    std::vector<std::vector<int>>& images, std::vector<std::string>& labels);

}  // namespace aml
