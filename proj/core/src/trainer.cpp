#include "aml/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "aml/classifiers.hpp"

namespace aml {

int batch_size(int b, int total, const TrainConfig& cfg) {
    if (b < 0) throw std::invalid_argument("batch index must be >= 0");
    if (b >= cfg.full_batch_at) return total;
    const double start = total * cfg.initial_fraction;
    const double frac = static_cast<double>(b) / cfg.full_batch_at;
    const double size = start + (total - start) * frac;
    return std::min(total, static_cast<int>(std::ceil(size)));
}

std::vector<std::size_t> sample_batch(std::size_t total, std::size_t size,
                                      std::mt19937_64& rng) {
    if (size > total) throw std::invalid_argument("batch size exceeds duple count");
    std::vector<std::size_t> idx(total);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // partial Fisher-Yates: only the first `size` positions matter
    for (std::size_t i = 0; i < size; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, total - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(size);
    return idx;
}

int repair_negatives(Atomization& master, const std::vector<Duple>& duples,
                     const std::vector<std::size_t>& negatives) {
    int contradictions = 0;
    const std::size_t n = master.universe().size();
    for (std::size_t di : negatives) {
        const Duple& d = duples[di];
        if (!duple_holds(master, d)) continue;  // already discriminated
        bool inserted = false;
        for (ConstantId c : d.lhs.closure().ids()) {
            if (!d.rhs.closure().contains(c)) {
                master.insert(Atom(ConstantSet::singleton(n, c)));
                inserted = true;
                break;
            }
        }
        if (!inserted) ++contradictions;  // lhs closure inside rhs closure
    }
    return contradictions;
}

int enforce_positive(Atomization& master, const Duple& d,
                     const std::vector<Duple>& duples,
                     const std::vector<std::size_t>& negatives, int k,
                     std::mt19937_64& rng) {
    std::vector<std::size_t> offenders = discriminant_set(master, d);
    if (offenders.empty()) return 0;

    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < master.size(); ++i)
        if (atom_below(master.atom(i), d.rhs)) candidates.push_back(i);

    const std::size_t universe_size = master.universe().size();
    std::vector<Atom> replacements;
    replacements.reserve(offenders.size());
    for (std::size_t oi : offenders) {
        Atom partner = [&] {
            if (candidates.empty()) {
                // nothing below rhs yet: fall back to a random rhs constant
                const auto ids = d.rhs.closure().ids();
                std::uniform_int_distribution<std::size_t> pick(0, ids.size() - 1);
                return Atom(ConstantSet::singleton(universe_size, ids[pick(rng)]));
            }
            std::vector<std::size_t> pool = candidates;
            const std::size_t draws = std::min<std::size_t>(pool.size(),
                                                            static_cast<std::size_t>(k));
            std::size_t best = pool.size();
            int best_score = -1;
            int best_reach = -1;
            for (std::size_t i = 0; i < draws; ++i) {
                std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
                std::swap(pool[i], pool[pick(rng)]);
                const Atom& cand = master.atom(pool[i]);
                // the crossed atom stays below d.lhs, so only negatives sharing
                // that lhs can lose a discrimination; score those
                int score = 0;
                for (std::size_t ni : negatives)
                    if (duples[ni].lhs.constants() == d.lhs.constants() &&
                        atom_below(cand, duples[ni].rhs))
                        ++score;
                // tie-break: prefer partners below many same-label positive rhs
                // terms, so the crossed atom keeps covering its own class
                int reach = 0;
                for (const Duple& other : duples)
                    if (other.sign == DupleSign::kPositive &&
                        other.lhs.constants() == d.lhs.constants() &&
                        atom_below(cand, other.rhs))
                        ++reach;
                if (best_score < 0 || score < best_score ||
                    (score == best_score && reach > best_reach)) {
                    best_score = score;
                    best_reach = reach;
                    best = pool[i];
                }
            }
            return master.atom(best);
        }();
        replacements.push_back(cross(master.atom(oi), partner));
    }

    std::sort(offenders.rbegin(), offenders.rend());
    for (std::size_t oi : offenders) master.erase(oi);
    for (Atom& a : replacements) master.insert(std::move(a));
    return static_cast<int>(replacements.size());
}

bool union_encodes_perfectly(const Atomization& union_model,
                             const EncodedDataset& dataset) {
    for (const Duple& d : dataset.duples)
        if (d.sign == DupleSign::kNegative && duple_holds(union_model, d)) return false;
    for (std::size_t i = 0; i < dataset.terms.size(); ++i) {
        const int predicted = fewest_misses(union_model, dataset.terms[i],
                                            dataset.label_constants);
        if (predicted != dataset.labels[i]) return false;
    }
    return true;
}

TrainResult train(const EncodedDataset& dataset, const TrainConfig& cfg) {
    if (dataset.duples.empty()) throw std::invalid_argument("dataset has no duples");
    std::mt19937_64 rng(cfg.seed);

    TrainResult result{initial_atomization(dataset.universe),
                       Atomization(dataset.universe),
                       {},
                       false,
                       0,
                       0};
    Atomization& master = result.master;
    Atomization& union_model = result.union_model;

    const int total = static_cast<int>(dataset.duples.size());
    int streak = 0;
    for (int b = 0; b < cfg.max_batches; ++b) {
        const int size = batch_size(b, total, cfg);
        const std::vector<std::size_t> batch =
            sample_batch(dataset.duples.size(), static_cast<std::size_t>(size), rng);
        std::vector<std::size_t> positives, negatives;
        for (std::size_t di : batch) {
            (dataset.duples[di].sign == DupleSign::kPositive ? positives : negatives)
                .push_back(di);
        }

        int violated = 0;
        for (std::size_t ni : negatives)
            if (duple_holds(master, dataset.duples[ni])) ++violated;

        result.contradictions += repair_negatives(master, dataset.duples, negatives);
        // alternate crossing and repair until the batch is consistent: crossing
        // can orphan a negative, and its repair atom violates positives again.
        // The master is merged into the union after each enforcement sweep (once
        // offending label singletons have been crossed away) so the transient
        // crossed atoms stay available to the reducer.
        int crossings = 0;
        for (int round = 0; round < 25; ++round) {
            int crossed = 0;
            for (std::size_t pi : positives)
                crossed += enforce_positive(master, dataset.duples[pi], dataset.duples,
                                            negatives, cfg.crossing_candidates, rng);
            crossings += crossed;
            for (const Atom& a : master.atoms()) union_model.insert(a);
            const std::size_t before = master.size();
            repair_negatives(master, dataset.duples, negatives);
            if (crossed == 0 && master.size() == before) break;
        }

        if (union_encodes_perfectly(union_model, dataset))
            ++streak;
        else
            streak = 0;

        result.trace.push_back({b, size, master.size(), union_model.size(), violated,
                                crossings, streak});
        result.batches_run = b + 1;
        if (streak >= cfg.patience) {
            result.early_stopped = true;
            break;
        }
    }
    return result;
}

std::string trace_to_jsonl(const std::vector<BatchTrace>& trace) {
    std::ostringstream out;
    for (const BatchTrace& t : trace) {
        nlohmann::json j{{"batch", t.batch},
                         {"batch_size", t.batch_size},
                         {"master_atoms", t.master_atoms},
                         {"union_atoms", t.union_atoms},
                         {"violated_negatives", t.violated_negatives},
                         {"crossings", t.crossings},
                         {"perfect_streak", t.perfect_streak}};
        out << j.dump() << '\n';
    }
    return out.str();
}

}  // namespace aml
