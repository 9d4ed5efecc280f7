#pragma once

#include <random>
#include <string>
#include <vector>

#include "aml/algebra.hpp"

namespace aml {

/// Shrinks the union model by accumulating independent shuffled covering
/// passes over the negatives until the target fraction of |union| is reached.
/// Every negative stays discriminated; every selected atom discriminated at
/// least one negative when it was picked.
/// Throws std::runtime_error listing up to 10 negatives the union itself
/// fails to discriminate, unless skip_uncovered is set (warn-and-skip).
Atomization reduce(const Atomization& union_model, const std::vector<Duple>& negatives,
                   double target_fraction, std::mt19937_64& rng,
                   bool skip_uncovered = false);

/// {"universe": fingerprint, "atoms": [[constant ids], ...]}
std::string model_to_json(const Atomization& m);

/// Throws std::runtime_error when the stored fingerprint does not match.
Atomization model_from_json(const std::string& text,
                            std::shared_ptr<const ConstantUniverse> universe);

}  // namespace aml
