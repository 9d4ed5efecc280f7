#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "aml/constant_set.hpp"

namespace aml {

using ConstantId = std::uint32_t;

enum class ConstantKind {
    kCategoricalValue,
    kChainAscending,
    kChainDescending,
    kLabel,
    kPixelChain,
};

struct Constant {
    ConstantId id = 0;
    ConstantKind kind = ConstantKind::kCategoricalValue;
    std::string feature;      // source feature / column / pixel name
    std::int64_t value = 0;   // value or bin index within the feature
};

/// All constants plus the reflexive-transitive down-set closure of the
/// declared order pairs. Immutable after construction.
class ConstantUniverse {
public:
    /// Throws std::invalid_argument on non-contiguous ids, dangling pair ids,
    /// label constants in order pairs, or a cycle (the message names an edge).
    ConstantUniverse(std::vector<Constant> constants,
                     std::vector<std::pair<ConstantId, ConstantId>> order_pairs);

    std::size_t size() const { return constants_.size(); }
    const Constant& constant(ConstantId id) const { return constants_.at(id); }
    const std::vector<Constant>& constants() const { return constants_; }
    const std::vector<std::pair<ConstantId, ConstantId>>& order_pairs() const {
        return order_pairs_;
    }

    /// Set of constant ids <= id (always contains id itself).
    const ConstantSet& downset(ConstantId id) const { return downsets_.at(id); }

    ConstantSet empty_set() const { return ConstantSet(constants_.size()); }

    /// Stable content hash (ids, kinds, order pairs), used to pair serialized
    /// models with the universe they were built over.
    std::uint64_t fingerprint() const { return fingerprint_; }

private:
    std::vector<Constant> constants_;
    std::vector<std::pair<ConstantId, ConstantId>> order_pairs_;
    std::vector<ConstantSet> downsets_;
    std::uint64_t fingerprint_ = 0;
};

/// A data point: a set of constants with its cached order closure.
class Term {
public:
    Term(const ConstantUniverse& universe, std::vector<ConstantId> constants);

    const std::vector<ConstantId>& constants() const { return constants_; }
    const ConstantSet& closure() const { return closure_; }

private:
    std::vector<ConstantId> constants_;  // sorted, deduplicated
    ConstantSet closure_;
};

/// A discriminator determined by a non-empty set of constants.
class Atom {
public:
    explicit Atom(ConstantSet constants);

    const ConstantSet& constants() const { return constants_; }

private:
    ConstantSet constants_;
};

enum class DupleSign { kPositive, kNegative };

struct Duple {
    Term lhs;
    Term rhs;
    DupleSign sign = DupleSign::kPositive;
};

/// Deduplicated collection of atoms with stable ids (insertion order).
class Atomization {
public:
    explicit Atomization(std::shared_ptr<const ConstantUniverse> universe);

    const ConstantUniverse& universe() const { return *universe_; }
    std::shared_ptr<const ConstantUniverse> universe_ptr() const { return universe_; }

    std::size_t size() const { return atoms_.size(); }
    const Atom& atom(std::size_t id) const { return atoms_.at(id); }
    const std::vector<Atom>& atoms() const { return atoms_; }

    /// Inserts unless an atom with the same constant set is present.
    /// Returns true when the atom was new.
    bool insert(Atom atom);
    bool contains(const Atom& atom) const;

    /// Removes the atom with the given id; ids above shift down.
    void erase(std::size_t id);

private:
    std::optional<std::size_t> find(const Atom& atom) const;

    std::shared_ptr<const ConstantUniverse> universe_;
    std::vector<Atom> atoms_;
    std::unordered_multimap<std::size_t, std::size_t> index_;  // hash -> id
};

ConstantUniverse build_universe(std::vector<Constant> constants,
                                std::vector<std::pair<ConstantId, ConstantId>> order_pairs);

/// a < t: one of a's constants lies in t's order closure.
bool atom_below(const Atom& a, const Term& t);

/// a discriminates (lhs, rhs): below lhs and not below rhs.
bool discriminates(const Atom& a, const Duple& d);

/// lhs <= rhs holds in the model: no atom discriminates the duple.
bool duple_holds(const Atomization& m, const Duple& d);

/// Ids of every atom in m discriminating d.
std::vector<std::size_t> discriminant_set(const Atomization& m, const Duple& d);

/// Union of constant sets; below every term either operand is below.
Atom cross(const Atom& a, const Atom& b);

/// The freest model: one singleton atom per constant.
Atomization initial_atomization(std::shared_ptr<const ConstantUniverse> universe);

}  // namespace aml
