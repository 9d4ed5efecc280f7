#include "aml/constant_set.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace aml {

ConstantSet::ConstantSet(std::size_t universe_size, std::size_t sparse_threshold)
    : universe_size_(universe_size), use_dense_(universe_size <= sparse_threshold) {
    if (use_dense_) words_.resize((universe_size + 63) / 64, 0);
}

ConstantSet ConstantSet::singleton(std::size_t universe_size, std::uint32_t id) {
    ConstantSet s(universe_size);
    s.insert(id);
    return s;
}

void ConstantSet::insert(std::uint32_t id) {
    if (id >= universe_size_) throw std::out_of_range("constant id outside universe");
    if (use_dense_) {
        std::uint64_t& w = words_[id / 64];
        const std::uint64_t bit = std::uint64_t{1} << (id % 64);
        if (!(w & bit)) {
            w |= bit;
            ++size_;
        }
    } else {
        auto it = std::lower_bound(sparse_.begin(), sparse_.end(), id);
        if (it == sparse_.end() || *it != id) {
            sparse_.insert(it, id);
            ++size_;
        }
    }
}

bool ConstantSet::contains(std::uint32_t id) const {
    if (id >= universe_size_) return false;
    if (use_dense_) return (words_[id / 64] >> (id % 64)) & 1;
    return std::binary_search(sparse_.begin(), sparse_.end(), id);
}

bool ConstantSet::intersects(const ConstantSet& other) const {
    if (use_dense_ && other.use_dense_) {
        const std::size_t n = std::min(words_.size(), other.words_.size());
        for (std::size_t i = 0; i < n; ++i)
            if (words_[i] & other.words_[i]) return true;
        return false;
    }
    // iterate the smaller sparse side, probe the other
    const ConstantSet* probe = this;
    const ConstantSet* iter = &other;
    if (!use_dense_ && (other.use_dense_ || size_ < other.size_)) {
        probe = &other;
        iter = this;
    }
    for (std::uint32_t id : iter->sparse_)
        if (probe->contains(id)) return true;
    return false;
}

void ConstantSet::merge(const ConstantSet& other) {
    if (use_dense_) {
        size_ = 0;
        for (std::size_t i = 0; i < words_.size(); ++i) {
            words_[i] |= other.words_[i];
            size_ += static_cast<std::size_t>(std::popcount(words_[i]));
        }
    } else {
        std::vector<std::uint32_t> merged;
        merged.reserve(sparse_.size() + other.sparse_.size());
        std::set_union(sparse_.begin(), sparse_.end(), other.sparse_.begin(),
                       other.sparse_.end(), std::back_inserter(merged));
        sparse_ = std::move(merged);
        size_ = sparse_.size();
    }
}

std::vector<std::uint32_t> ConstantSet::ids() const {
    if (!use_dense_) return sparse_;
    std::vector<std::uint32_t> out;
    out.reserve(size_);
    for (std::size_t i = 0; i < words_.size(); ++i) {
        std::uint64_t w = words_[i];
        while (w) {
            const int b = std::countr_zero(w);
            out.push_back(static_cast<std::uint32_t>(i * 64 + b));
            w &= w - 1;
        }
    }
    return out;
}

bool ConstantSet::operator==(const ConstantSet& other) const {
    if (size_ != other.size_ || universe_size_ != other.universe_size_) return false;
    if (use_dense_) return words_ == other.words_;
    return sparse_ == other.sparse_;
}

std::size_t ConstantSet::hash() const {
    // FNV-1a over member ids; identical across representations
    std::size_t h = 1469598103934665603ull;
    for (std::uint32_t id : ids()) {
        h ^= id;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace aml
