#include "aml/algebra.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>

namespace aml {
namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
}

}  // namespace

ConstantUniverse::ConstantUniverse(
    std::vector<Constant> constants,
    std::vector<std::pair<ConstantId, ConstantId>> order_pairs)
    : constants_(std::move(constants)), order_pairs_(std::move(order_pairs)) {
    const std::size_t n = constants_.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (constants_[i].id != i)
            throw std::invalid_argument("constant ids must be contiguous from 0");
    }
    std::vector<std::vector<ConstantId>> preds(n);
    std::vector<std::size_t> indegree(n, 0);
    std::vector<std::vector<ConstantId>> succs(n);
    for (const auto& [lo, hi] : order_pairs_) {
        if (lo >= n || hi >= n)
            throw std::invalid_argument("order pair references unknown constant id");
        if (constants_[lo].kind == ConstantKind::kLabel ||
            constants_[hi].kind == ConstantKind::kLabel)
            throw std::invalid_argument("label constants cannot appear in order pairs");
        preds[hi].push_back(lo);
        succs[lo].push_back(hi);
        ++indegree[hi];
    }

    // topological order; leftover nodes expose a cycle
    std::vector<ConstantId> order;
    order.reserve(n);
    std::queue<ConstantId> ready;
    auto indeg = indegree;
    for (ConstantId c = 0; c < n; ++c)
        if (indeg[c] == 0) ready.push(c);
    while (!ready.empty()) {
        ConstantId c = ready.front();
        ready.pop();
        order.push_back(c);
        for (ConstantId s : succs[c])
            if (--indeg[s] == 0) ready.push(s);
    }
    if (order.size() != n) {
        for (const auto& [lo, hi] : order_pairs_) {
            if (indeg[lo] > 0 && indeg[hi] > 0)
                throw std::invalid_argument("cycle in order pairs through edge (" +
                                            std::to_string(lo) + ", " +
                                            std::to_string(hi) + ")");
        }
        throw std::invalid_argument("cycle in order pairs");
    }

    downsets_.reserve(n);
    for (ConstantId c = 0; c < n; ++c)
        downsets_.push_back(ConstantSet::singleton(n, c));
    for (ConstantId c : order) {
        for (ConstantId p : preds[c]) downsets_[c].merge(downsets_[p]);
    }

    std::uint64_t h = n;
    for (const Constant& c : constants_) {
        h = mix(h, static_cast<std::uint64_t>(c.kind));
        for (char ch : c.feature) h = mix(h, static_cast<unsigned char>(ch));
        h = mix(h, static_cast<std::uint64_t>(c.value));
    }
    for (const auto& [lo, hi] : order_pairs_) h = mix(mix(h, lo), hi);
    fingerprint_ = h;
}

Term::Term(const ConstantUniverse& universe, std::vector<ConstantId> constants)
    : constants_(std::move(constants)), closure_(universe.size()) {
    std::sort(constants_.begin(), constants_.end());
    constants_.erase(std::unique(constants_.begin(), constants_.end()), constants_.end());
    if (constants_.empty()) throw std::invalid_argument("term must be non-empty");
    for (ConstantId c : constants_) closure_.merge(universe.downset(c));
}

Atom::Atom(ConstantSet constants) : constants_(std::move(constants)) {
    if (constants_.empty()) throw std::invalid_argument("atom must be non-empty");
}

Atomization::Atomization(std::shared_ptr<const ConstantUniverse> universe)
    : universe_(std::move(universe)) {
    if (!universe_) throw std::invalid_argument("atomization requires a universe");
}

std::optional<std::size_t> Atomization::find(const Atom& atom) const {
    auto [lo, hi] = index_.equal_range(atom.constants().hash());
    for (auto it = lo; it != hi; ++it) {
        if (atoms_[it->second].constants() == atom.constants()) return it->second;
    }
    return std::nullopt;
}

bool Atomization::insert(Atom atom) {
    if (find(atom)) return false;
    index_.emplace(atom.constants().hash(), atoms_.size());
    atoms_.push_back(std::move(atom));
    return true;
}

bool Atomization::contains(const Atom& atom) const { return find(atom).has_value(); }

void Atomization::erase(std::size_t id) {
    if (id >= atoms_.size()) throw std::out_of_range("atom id out of range");
    atoms_.erase(atoms_.begin() + static_cast<std::ptrdiff_t>(id));
    index_.clear();
    for (std::size_t i = 0; i < atoms_.size(); ++i)
        index_.emplace(atoms_[i].constants().hash(), i);
}

ConstantUniverse build_universe(
    std::vector<Constant> constants,
    std::vector<std::pair<ConstantId, ConstantId>> order_pairs) {
    return ConstantUniverse(std::move(constants), std::move(order_pairs));
}

bool atom_below(const Atom& a, const Term& t) {
    return a.constants().intersects(t.closure());
}

bool discriminates(const Atom& a, const Duple& d) {
    return atom_below(a, d.lhs) && !atom_below(a, d.rhs);
}

bool duple_holds(const Atomization& m, const Duple& d) {
    for (const Atom& a : m.atoms())
        if (discriminates(a, d)) return false;
    return true;
}

std::vector<std::size_t> discriminant_set(const Atomization& m, const Duple& d) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < m.size(); ++i)
        if (discriminates(m.atom(i), d)) out.push_back(i);
    return out;
}

Atom cross(const Atom& a, const Atom& b) {
    ConstantSet merged = a.constants();
    merged.merge(b.constants());
    return Atom(std::move(merged));
}

Atomization initial_atomization(std::shared_ptr<const ConstantUniverse> universe) {
    Atomization m(universe);
    const std::size_t n = m.universe().size();
    for (ConstantId c = 0; c < n; ++c)
        m.insert(Atom(ConstantSet::singleton(n, c)));
    return m;
}

}  // namespace aml
