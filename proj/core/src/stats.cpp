#include "aml/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace aml {
namespace {

constexpr double kZ975 = 1.959963984540054;

/// Mid-ranks of v under the given comparison order (rank 1 = first).
std::vector<double> mid_ranks(const std::vector<double>& v, bool descending) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return descending ? v[a] > v[b] : v[a] < v[b];
    });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
        i = j + 1;
    }
    return ranks;
}

/// Sum of t^3 - t over tie groups.
double tie_term(const std::vector<double>& v) {
    std::vector<double> s(v);
    std::sort(s.begin(), s.end());
    double total = 0.0;
    std::size_t i = 0;
    while (i < s.size()) {
        std::size_t j = i;
        while (j + 1 < s.size() && s[j + 1] == s[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        total += t * t * t - t;
        i = j + 1;
    }
    return total;
}

double regularized_gamma_p(double a, double x);

double regularized_gamma_q_cf(double a, double x) {
    // Lentz continued fraction for Q(a, x), x >= a + 1
    const double eps = 1e-14;
    double b = x + 1.0 - a;
    double c = 1.0 / 1e-300;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::fabs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < eps) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double regularized_gamma_p(double a, double x) {
    // series expansion, x < a + 1
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-14) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

/// Exact two-sided signed-rank p for untied |d| over ranks 1..n.
double exact_signed_rank_p(double w, int n) {
    const int max_w = n * (n + 1) / 2;
    std::vector<double> counts(static_cast<std::size_t>(max_w) + 1, 0.0);
    counts[0] = 1.0;
    for (int i = 1; i <= n; ++i)
        for (int s = max_w; s >= i; --s)
            counts[static_cast<std::size_t>(s)] += counts[static_cast<std::size_t>(s - i)];
    const double total = std::ldexp(1.0, n);  // 2^n
    const double mu = static_cast<double>(max_w) / 2.0;
    double p;
    if (w > mu) {
        double tail = 0.0;
        for (int s = static_cast<int>(std::ceil(w)); s <= max_w; ++s)
            tail += counts[static_cast<std::size_t>(s)];
        p = tail / total;
    } else {
        double tail = 0.0;
        for (int s = 0; s <= static_cast<int>(std::floor(w)); ++s)
            tail += counts[static_cast<std::size_t>(s)];
        p = tail / total;
    }
    return std::min(1.0, 2.0 * p);
}

std::string fmt(double v, int decimals = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double chi_squared_sf(double x, int df) {
    if (x <= 0.0) return 1.0;
    const double a = df / 2.0;
    const double half = x / 2.0;
    if (half < a + 1.0) return 1.0 - regularized_gamma_p(a, half);
    return regularized_gamma_q_cf(a, half);
}

ScoreMatrix load_scores_csv(const std::string& path,
                            const std::vector<std::string>& methods) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::map<std::string, std::size_t> method_index;
    for (std::size_t i = 0; i < methods.size(); ++i) method_index[methods[i]] = i;

    std::map<std::pair<std::string, int>, std::vector<std::pair<bool, double>>> cells;
    std::string line;
    std::getline(in, line);  // header
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        std::istringstream ss(line);
        std::string dataset, size_s, method, f1_s;
        if (!std::getline(ss, dataset, ',') || !std::getline(ss, size_s, ',') ||
            !std::getline(ss, method, ',') || !std::getline(ss, f1_s))
            throw std::runtime_error(path + ": bad row at line " + std::to_string(line_no));
        auto mi = method_index.find(method);
        if (mi == method_index.end()) continue;
        auto& row = cells[{dataset, std::stoi(size_s)}];
        if (row.empty()) row.assign(methods.size(), {false, 0.0});
        auto& cell = row[mi->second];
        if (cell.first)
            throw std::runtime_error("duplicate cell " + dataset + "/" + size_s + "/" +
                                     method);
        cell = {true, std::stod(f1_s)};
    }

    ScoreMatrix m;
    m.methods = methods;
    std::string missing;
    for (const auto& [key, row] : cells) {
        for (std::size_t j = 0; j < methods.size(); ++j)
            if (!row[j].first)
                missing += " " + key.first + "/" + std::to_string(key.second) + "/" +
                           methods[j];
        m.observations.push_back(key);
        std::vector<double> vals;
        for (const auto& [ok, v] : row) vals.push_back(v);
        m.values.push_back(std::move(vals));
    }
    if (!missing.empty()) throw std::runtime_error("missing cells:" + missing);
    return m;
}

double macro_f1(const std::vector<int>& predictions, const std::vector<int>& truths,
                int classes) {
    if (predictions.empty() || predictions.size() != truths.size())
        throw std::invalid_argument("macro_f1: empty or mismatched input");
    double total = 0.0;
    for (int c = 0; c < classes; ++c) {
        long tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            const bool p = predictions[i] == c;
            const bool t = truths[i] == c;
            tp += p && t;
            fp += p && !t;
            fn += !p && t;
        }
        const long denom = 2 * tp + fp + fn;
        total += denom ? 2.0 * static_cast<double>(tp) / static_cast<double>(denom) : 0.0;
    }
    return total / classes;
}

std::vector<double> mean_ranks(const ScoreMatrix& m) {
    if (m.methods.size() < 2) throw std::invalid_argument("need >= 2 methods");
    std::vector<double> sums(m.methods.size(), 0.0);
    for (const auto& row : m.values) {
        const std::vector<double> r = mid_ranks(row, /*descending=*/true);
        for (std::size_t j = 0; j < r.size(); ++j) sums[j] += r[j];
    }
    for (double& s : sums) s /= static_cast<double>(m.values.size());
    return sums;
}

FriedmanResult friedman_test(const ScoreMatrix& m) {
    const std::size_t k = m.methods.size();
    const std::size_t n = m.values.size();
    if (k < 2 || n < 2) throw std::invalid_argument("need >= 2 methods and observations");
    const std::vector<double> rbar = mean_ranks(m);
    const double mid = (static_cast<double>(k) + 1.0) / 2.0;
    double ss = 0.0;
    for (double r : rbar) ss += (r - mid) * (r - mid);
    const double uncorrected = 12.0 * static_cast<double>(n) /
                               (static_cast<double>(k) * (static_cast<double>(k) + 1.0)) *
                               ss;
    double ties = 0.0;
    for (const auto& row : m.values) ties += tie_term(row);
    const double kd = static_cast<double>(k);
    const double correction =
        1.0 - ties / (static_cast<double>(n) * kd * (kd * kd - 1.0));
    FriedmanResult out;
    if (correction <= 0.0) return out;  // every row fully tied
    out.statistic = uncorrected / correction;
    out.p_value = chi_squared_sf(out.statistic, static_cast<int>(k) - 1);
    return out;
}

double wilcoxon_signed_rank(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.empty())
        throw std::invalid_argument("wilcoxon: empty or mismatched input");
    std::vector<double> d;
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double diff = x[i] - y[i];
        if (diff == 0.0)
            ++zeros;
        else
            d.push_back(diff);
    }
    if (d.empty()) throw std::invalid_argument("wilcoxon: all differences zero");
    const std::size_t n = d.size();
    std::vector<double> abs_d(n);
    for (std::size_t i = 0; i < n; ++i) abs_d[i] = std::fabs(d[i]);
    const std::vector<double> ranks = mid_ranks(abs_d, /*descending=*/false);
    double w = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (d[i] > 0.0) w += ranks[i];

    const double ties = tie_term(abs_d);
    if (n < 50 && zeros == 0 && ties == 0.0)
        return exact_signed_rank_p(w, static_cast<int>(n));

    const double nd = static_cast<double>(n);
    const double mu = nd * (nd + 1.0) / 4.0;
    const double sigma2 = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - ties / 48.0;
    double z = w - mu;
    if (z > 0.0)
        z -= 0.5;
    else if (z < 0.0)
        z += 0.5;
    z /= std::sqrt(sigma2);
    return std::min(1.0, 2.0 * std::min(normal_cdf(z), 1.0 - normal_cdf(z)));
}

std::vector<double> holm_adjust(const std::vector<double>& raw) {
    const std::size_t m = raw.size();
    for (double p : raw)
        if (p < 0.0 || p > 1.0 || !std::isfinite(p))
            throw std::invalid_argument("p-value outside [0, 1]");
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return raw[a] < raw[b]; });
    std::vector<double> adjusted(m);
    double running = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double scaled = static_cast<double>(m - i) * raw[order[i]];
        running = std::max(running, scaled);
        adjusted[order[i]] = std::min(1.0, running);
    }
    return adjusted;
}

HodgesLehmann hodges_lehmann(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.empty())
        throw std::invalid_argument("hodges_lehmann: empty or mismatched input");
    const std::size_t n = x.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = x[i] - y[i];
    std::vector<double> walsh;
    walsh.reserve(n * (n + 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) walsh.push_back((d[i] + d[j]) / 2.0);
    std::sort(walsh.begin(), walsh.end());
    const std::size_t m = walsh.size();

    HodgesLehmann out;
    out.estimate = (m % 2) ? walsh[m / 2] : (walsh[m / 2 - 1] + walsh[m / 2]) / 2.0;

    const double nd = static_cast<double>(n);
    const double sigma = std::sqrt(nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0);
    const double crit = static_cast<double>(m) / 2.0 - kZ975 * sigma;
    const auto lo = static_cast<std::ptrdiff_t>(std::floor(crit));
    const auto hi = static_cast<std::ptrdiff_t>(std::ceil(static_cast<double>(m) - crit)) - 1;
    out.ci_low = walsh[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(
        lo, 0, static_cast<std::ptrdiff_t>(m) - 1))];
    out.ci_high = walsh[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(
        hi, 0, static_cast<std::ptrdiff_t>(m) - 1))];
    return out;
}

std::vector<std::vector<std::size_t>> cliques(
    const std::vector<std::vector<bool>>& reject, const std::vector<double>& ranks) {
    const std::size_t k = ranks.size();
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return ranks[a] < ranks[b]; });

    std::vector<std::vector<std::size_t>> out;
    std::size_t last_end = 0;  // one past the end of the previous clique
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i;
        bool clean = true;
        while (clean && j + 1 < k) {
            for (std::size_t t = i; t <= j; ++t) {
                if (reject[order[t]][order[j + 1]]) {
                    clean = false;
                    break;
                }
            }
            if (clean) ++j;
        }
        if (out.empty() || j + 1 > last_end) {  // drop intervals nested in the last
            std::vector<std::size_t> clique(order.begin() + static_cast<std::ptrdiff_t>(i),
                                            order.begin() + static_cast<std::ptrdiff_t>(j) + 1);
            out.push_back(std::move(clique));
            last_end = j + 1;
        }
    }
    return out;
}

ComparisonReport compare_methods(const ScoreMatrix& m, double alpha) {
    const std::size_t k = m.methods.size();
    ComparisonReport report;
    report.alpha = alpha;
    report.ranks = mean_ranks(m);
    report.friedman = friedman_test(m);
    report.friedman_rejects = report.friedman.p_value < alpha;

    std::vector<double> raw;
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            std::vector<double> xa, xb;
            for (const auto& row : m.values) {
                xa.push_back(row[a]);
                xb.push_back(row[b]);
            }
            PairResult pr;
            pr.a = a;
            pr.b = b;
            pr.raw_p = wilcoxon_signed_rank(xa, xb);
            pr.hl = hodges_lehmann(xa, xb);
            report.pairs.push_back(pr);
            raw.push_back(pr.raw_p);
        }
    }
    const std::vector<double> adjusted = holm_adjust(raw);
    std::vector<std::vector<bool>> reject(k, std::vector<bool>(k, false));
    for (std::size_t i = 0; i < report.pairs.size(); ++i) {
        PairResult& pr = report.pairs[i];
        pr.adjusted_p = adjusted[i];
        pr.reject = pr.adjusted_p < alpha;
        reject[pr.a][pr.b] = reject[pr.b][pr.a] = pr.reject;
    }
    report.cliques = cliques(reject, report.ranks);
    return report;
}

void emit_cd_diagram(const std::vector<std::string>& methods,
                     const std::vector<double>& ranks,
                     const std::vector<std::vector<std::size_t>>& clique_list,
                     const std::string& path) {
    const std::size_t k = methods.size();
    const double width = 760.0, margin = 60.0, axis_y = 70.0;
    const double lo = 1.0, hi = static_cast<double>(k);
    auto x_at = [&](double rank) {
        return margin + (rank - lo) / (hi - lo) * (width - 2.0 * margin);
    };

    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return ranks[a] < ranks[b]; });

    const double height = axis_y + 40.0 + 18.0 * static_cast<double>(clique_list.size()) +
                          22.0 * static_cast<double>((k + 1) / 2);
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width, 0)
        << "\" height=\"" << fmt(height, 0) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<line x1=\"" << fmt(x_at(lo)) << "\" y1=\"" << fmt(axis_y) << "\" x2=\""
        << fmt(x_at(hi)) << "\" y2=\"" << fmt(axis_y) << "\" stroke=\"black\"/>\n";
    for (std::size_t t = 1; t <= k; ++t) {
        const double x = x_at(static_cast<double>(t));
        svg << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(axis_y - 5.0) << "\" x2=\""
            << fmt(x) << "\" y2=\"" << fmt(axis_y) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(axis_y - 10.0)
            << "\" text-anchor=\"middle\">" << t << "</text>\n";
    }
    // clique bars just under the axis
    for (std::size_t c = 0; c < clique_list.size(); ++c) {
        double rmin = 1e300, rmax = -1e300;
        for (std::size_t mi : clique_list[c]) {
            rmin = std::min(rmin, ranks[mi]);
            rmax = std::max(rmax, ranks[mi]);
        }
        const double y = axis_y + 10.0 + 18.0 * static_cast<double>(c);
        svg << "<line x1=\"" << fmt(x_at(rmin) - 3.0) << "\" y1=\"" << fmt(y) << "\" x2=\""
            << fmt(x_at(rmax) + 3.0) << "\" y2=\"" << fmt(y)
            << "\" stroke=\"black\" stroke-width=\"4\"/>\n";
    }
    // method labels fan out below, best rank first
    const double label_top = axis_y + 20.0 + 18.0 * static_cast<double>(clique_list.size());
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t mi = order[i];
        const bool left = i < (k + 1) / 2;
        const double y = label_top + 22.0 * static_cast<double>(left ? i : k - 1 - i);
        const double x_text = left ? margin - 55.0 : width - margin + 55.0;
        const double x_rank = x_at(ranks[mi]);
        svg << "<polyline fill=\"none\" stroke=\"black\" points=\"" << fmt(x_rank) << ","
            << fmt(axis_y) << " " << fmt(x_rank) << "," << fmt(y - 4.0) << " "
            << fmt(x_text + (left ? 5.0 : -5.0)) << "," << fmt(y - 4.0) << "\"/>\n";
        svg << "<text x=\"" << fmt(x_text) << "\" y=\"" << fmt(y)
            << "\" text-anchor=\"" << (left ? "end" : "start") << "\">" << methods[mi]
            << " (" << fmt(ranks[mi], 4) << ")</text>\n";
    }
    svg << "</svg>\n";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << svg.str();
}

std::string report_to_json(const ComparisonReport& report,
                           const std::vector<std::string>& methods) {
    nlohmann::json j;
    j["alpha"] = report.alpha;
    j["friedman"] = {{"statistic", report.friedman.statistic},
                     {"p_value", report.friedman.p_value},
                     {"rejects", report.friedman_rejects}};
    j["mean_ranks"] = nlohmann::json::object();
    for (std::size_t i = 0; i < methods.size(); ++i)
        j["mean_ranks"][methods[i]] = report.ranks[i];
    j["pairs"] = nlohmann::json::array();
    for (const PairResult& pr : report.pairs) {
        j["pairs"].push_back({{"a", methods[pr.a]},
                              {"b", methods[pr.b]},
                              {"raw_p", pr.raw_p},
                              {"adjusted_p", pr.adjusted_p},
                              {"hl_estimate", pr.hl.estimate},
                              {"ci95", {pr.hl.ci_low, pr.hl.ci_high}},
                              {"reject", pr.reject}});
    }
    j["cliques"] = nlohmann::json::array();
    for (const auto& clique : report.cliques) {
        nlohmann::json names = nlohmann::json::array();
        for (std::size_t mi : clique) names.push_back(methods[mi]);
        j["cliques"].push_back(names);
    }
    return j.dump(2);
}

}  // namespace aml
