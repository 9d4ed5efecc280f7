#include <doctest.h>

#include <stdexcept>

#include <memory>

#include "aml/algebra.hpp"
#include "oracle.hpp"

using namespace aml;

namespace {

std::shared_ptr<const ConstantUniverse> chain_universe() {
    // 0 <= 1 <= 2, label 3
    std::vector<Constant> cs{{0, ConstantKind::kChainAscending, "x", 0},
                             {1, ConstantKind::kChainAscending, "x", 1},
                             {2, ConstantKind::kChainAscending, "x", 2},
                             {3, ConstantKind::kLabel, "y", 0}};
    return std::make_shared<const ConstantUniverse>(
        std::move(cs), std::vector<std::pair<ConstantId, ConstantId>>{{0, 1}, {1, 2}});
}

}  // namespace

TEST_CASE("universe validates its input") {
    std::vector<Constant> cs{{0, ConstantKind::kCategoricalValue, "a", 0},
                             {1, ConstantKind::kCategoricalValue, "a", 1}};
    SUBCASE("non-contiguous ids") {
        std::vector<Constant> bad{{0, ConstantKind::kCategoricalValue, "a", 0},
                                  {2, ConstantKind::kCategoricalValue, "a", 1}};
        CHECK_THROWS_AS(ConstantUniverse(bad, {}), std::invalid_argument);
    }
    SUBCASE("dangling pair id") {
        CHECK_THROWS_AS(ConstantUniverse(cs, {{0, 7}}), std::invalid_argument);
    }
    SUBCASE("cycle names an edge") {
        try {
            ConstantUniverse u(cs, {{0, 1}, {1, 0}});
            FAIL("expected a cycle error");
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find("cycle") != std::string::npos);
            CHECK(std::string(e.what()).find("(") != std::string::npos);
        }
    }
    SUBCASE("labels cannot be ordered") {
        std::vector<Constant> with_label{{0, ConstantKind::kCategoricalValue, "a", 0},
                                         {1, ConstantKind::kLabel, "y", 0}};
        CHECK_THROWS_AS(ConstantUniverse(with_label, {{0, 1}}), std::invalid_argument);
    }
}

TEST_CASE("downsets are reflexive-transitive") {
    auto u = chain_universe();
    CHECK(u->downset(0).ids() == std::vector<std::uint32_t>{0});
    CHECK(u->downset(1).ids() == std::vector<std::uint32_t>{0, 1});
    CHECK(u->downset(2).ids() == std::vector<std::uint32_t>{0, 1, 2});
    CHECK(u->downset(3).ids() == std::vector<std::uint32_t>{3});
}

TEST_CASE("term closure merges constant downsets") {
    auto u = chain_universe();
    Term t(*u, {2, 3, 3});
    CHECK(t.constants() == std::vector<ConstantId>{2, 3});  // deduplicated
    CHECK(t.closure().ids() == std::vector<std::uint32_t>{0, 1, 2, 3});
    CHECK_THROWS_AS(Term(*u, {}), std::invalid_argument);
}

TEST_CASE("atom below term via closure intersection") {
    auto u = chain_universe();
    Term high(*u, {2});
    Term low(*u, {0});
    Atom bottom(ConstantSet::singleton(4, 0));
    Atom top(ConstantSet::singleton(4, 2));
    CHECK(atom_below(bottom, high));   // 0 is in the closure of {2}
    CHECK_FALSE(atom_below(top, low)); // 2 is not below 0
}

TEST_CASE("discrimination and duple_holds") {
    auto u = chain_universe();
    Term label(*u, {3});
    Term example(*u, {1});
    Duple negative{label, example, DupleSign::kNegative};

    Atomization m(u);
    CHECK(duple_holds(m, negative));  // empty model: vacuous
    m.insert(Atom(ConstantSet::singleton(4, 3)));
    CHECK_FALSE(duple_holds(m, negative));
    CHECK(discriminant_set(m, negative) == std::vector<std::size_t>{0});
}

TEST_CASE("order pairs hold structurally in any model") {
    auto u = chain_universe();
    Atomization m = initial_atomization(u);
    for (const auto& [lo, hi] : u->order_pairs()) {
        Duple d{Term(*u, {lo}), Term(*u, {hi}), DupleSign::kPositive};
        CHECK(duple_holds(m, d));
    }
}

TEST_CASE("cross is constant-set union with exists semantics") {
    auto u = chain_universe();
    Atom a(ConstantSet::singleton(4, 0));
    Atom b(ConstantSet::singleton(4, 3));
    Atom ab = cross(a, b);
    CHECK(ab.constants().ids() == std::vector<std::uint32_t>{0, 3});
    Term t(*u, {1});
    CHECK(atom_below(ab, t) == (atom_below(a, t) || atom_below(b, t)));
}

TEST_CASE("atomization deduplicates and keeps stable ids") {
    auto u = chain_universe();
    Atomization m(u);
    CHECK(m.insert(Atom(ConstantSet::singleton(4, 1))));
    CHECK(m.insert(Atom(ConstantSet::singleton(4, 2))));
    CHECK_FALSE(m.insert(Atom(ConstantSet::singleton(4, 1))));
    CHECK(m.size() == 2);
    m.erase(0);
    CHECK(m.size() == 1);
    CHECK(m.atom(0).constants().contains(2));
    CHECK_FALSE(m.contains(Atom(ConstantSet::singleton(4, 1))));
}

TEST_CASE("library agrees with the brute-force oracle on small universes") {
    std::mt19937_64 rng(12345);
    for (int round = 0; round < 200; ++round) {
        const oracle::SmallUniverse su = oracle::random_universe(rng);
        const std::size_t n = su.universe->size();

        const std::vector<ConstantId> term_ids = oracle::random_subset(rng, n);
        const Term t(*su.universe, term_ids);
        const auto closure = oracle::closure_of(term_ids, su.order_pairs);
        const std::vector<std::uint32_t> closure_ids = t.closure().ids();
        CHECK(std::set<std::uint32_t>(closure_ids.begin(), closure_ids.end()) ==
              std::set<std::uint32_t>(closure.begin(), closure.end()));

        const std::vector<ConstantId> atom_ids = oracle::random_subset(rng, n);
        ConstantSet atom_set(n);
        for (ConstantId c : atom_ids) atom_set.insert(c);
        const Atom a(atom_set);
        CHECK(atom_below(a, t) == oracle::atom_below(atom_ids, closure));

        const std::vector<ConstantId> rhs_ids = oracle::random_subset(rng, n);
        const Term rhs(*su.universe, rhs_ids);
        const auto rhs_closure = oracle::closure_of(rhs_ids, su.order_pairs);
        const Duple d{t, rhs, DupleSign::kNegative};
        const bool expect = oracle::atom_below(atom_ids, closure) &&
                            !oracle::atom_below(atom_ids, rhs_closure);
        CHECK(discriminates(a, d) == expect);
    }
}
