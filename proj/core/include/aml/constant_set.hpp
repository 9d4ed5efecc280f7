#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace aml {

/// Set of constant ids over a fixed-size universe.
///
/// Uses a dense bit-vector (word-parallel intersection) when the universe is
/// small enough, and a sorted id list above `sparse_threshold`. Both modes
/// expose the same value semantics; the representation is fixed per universe
/// so two sets from the same universe always share a mode.
class ConstantSet {
public:
    static constexpr std::size_t kDefaultSparseThreshold = 1u << 16;

    ConstantSet() = default;
    explicit ConstantSet(std::size_t universe_size,
                         std::size_t sparse_threshold = kDefaultSparseThreshold);

    static ConstantSet singleton(std::size_t universe_size, std::uint32_t id);

    void insert(std::uint32_t id);
    bool contains(std::uint32_t id) const;
    bool intersects(const ConstantSet& other) const;
    void merge(const ConstantSet& other);

    bool empty() const { return size_ == 0; }
    std::size_t size() const { return size_; }
    std::size_t universe_size() const { return universe_size_; }

    /// Sorted list of member ids.
    std::vector<std::uint32_t> ids() const;

    bool operator==(const ConstantSet& other) const;
    std::size_t hash() const;

private:
    bool dense() const { return !words_.empty() || sparse_.empty(); }

    std::size_t universe_size_ = 0;
    std::size_t size_ = 0;
    bool use_dense_ = true;
    std::vector<std::uint64_t> words_;       // dense mode
    std::vector<std::uint32_t> sparse_;      // sparse mode, sorted
};

}  // namespace aml
