#include "aml/reducer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace aml {

Atomization reduce(const Atomization& union_model, const std::vector<Duple>& negatives,
                   double target_fraction, std::mt19937_64& rng, bool skip_uncovered) {
    std::vector<std::size_t> covered;
    std::vector<std::size_t> uncovered;
    for (std::size_t i = 0; i < negatives.size(); ++i) {
        if (duple_holds(union_model, negatives[i]))
            uncovered.push_back(i);
        else
            covered.push_back(i);
    }
    if (!uncovered.empty() && !skip_uncovered) {
        std::string msg = "union fails to discriminate " +
                          std::to_string(uncovered.size()) + " negative(s):";
        for (std::size_t i = 0; i < std::min<std::size_t>(uncovered.size(), 10); ++i)
            msg += " #" + std::to_string(uncovered[i]);
        throw std::runtime_error(msg);
    }

    Atomization result(union_model.universe_ptr());
    if (covered.empty() || union_model.size() == 0) return result;

    // only atoms that discriminate at least one negative are selectable, so the
    // size target cannot exceed their count
    std::size_t selectable = 0;
    for (const Atom& a : union_model.atoms()) {
        for (std::size_t di : covered) {
            if (discriminates(a, negatives[di])) {
                ++selectable;
                break;
            }
        }
    }
    const auto target = std::min<std::size_t>(
        selectable, static_cast<std::size_t>(std::ceil(
                        target_fraction * static_cast<double>(union_model.size()))));
    while (result.size() < target) {
        std::vector<std::size_t> order = covered;
        std::shuffle(order.begin(), order.end(), rng);
        Atomization pass(union_model.universe_ptr());
        for (std::size_t di : order) {
            const Duple& d = negatives[di];
            if (!duple_holds(pass, d)) continue;
            // draw union atoms without replacement until one discriminates
            std::vector<std::size_t> pool(union_model.size());
            std::iota(pool.begin(), pool.end(), std::size_t{0});
            for (std::size_t i = 0; i < pool.size(); ++i) {
                std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
                std::swap(pool[i], pool[pick(rng)]);
                const Atom& a = union_model.atom(pool[i]);
                if (discriminates(a, d)) {
                    pass.insert(a);
                    break;
                }
            }
        }
        for (const Atom& a : pass.atoms()) result.insert(a);
        if (pass.size() == 0) break;  // nothing left to add
    }
    return result;
}

std::string model_to_json(const Atomization& m) {
    nlohmann::json atoms = nlohmann::json::array();
    for (const Atom& a : m.atoms()) atoms.push_back(a.constants().ids());
    const nlohmann::json j{{"universe", m.universe().fingerprint()}, {"atoms", atoms}};
    return j.dump(2);
}

Atomization model_from_json(const std::string& text,
                            std::shared_ptr<const ConstantUniverse> universe) {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("universe").get<std::uint64_t>() != universe->fingerprint())
        throw std::runtime_error("model was built over a different universe");
    Atomization m(std::move(universe));
    for (const auto& ids : j.at("atoms")) {
        ConstantSet s(m.universe().size());
        for (const auto& id : ids) s.insert(id.get<std::uint32_t>());
        m.insert(Atom(std::move(s)));
    }
    return m;
}

}  // namespace aml
