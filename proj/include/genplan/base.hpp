#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace genplan {

//! Fixed-capacity dynamic bitset used for denotations and subset masks.
class Bits {
public:
    Bits() = default;
    explicit Bits(std::size_t n) : size_(n), words_((n + 63) / 64, 0) {}

    std::size_t size() const { return size_; }

    void set(std::size_t i) { words_[i >> 6] |= (uint64_t{1} << (i & 63)); }
    void reset(std::size_t i) { words_[i >> 6] &= ~(uint64_t{1} << (i & 63)); }
    bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1; }

    void clear() { for (auto& w : words_) w = 0; }

    std::size_t count() const {
        std::size_t c = 0;
        for (auto w : words_) c += __builtin_popcountll(w);
        return c;
    }

    bool any() const {
        for (auto w : words_) if (w) return true;
        return false;
    }

    bool intersects(const Bits& o) const {
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & o.words_[i]) return true;
        return false;
    }

    bool is_subset_of(const Bits& o) const {
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & ~o.words_[i]) return false;
        return true;
    }

    Bits& operator|=(const Bits& o) {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
        return *this;
    }

    Bits& operator&=(const Bits& o) {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
        return *this;
    }

    bool operator==(const Bits& o) const { return size_ == o.size_ && words_ == o.words_; }

    uint64_t hash() const {
        uint64_t h = 0x9e3779b97f4a7c15ull ^ size_;
        for (auto w : words_) {
            h ^= w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        }
        return h;
    }

    //! Indices of the set bits, ascending.
    std::vector<uint32_t> to_indices() const {
        std::vector<uint32_t> out;
        for (std::size_t wi = 0; wi < words_.size(); ++wi) {
            uint64_t w = words_[wi];
            while (w) {
                unsigned b = __builtin_ctzll(w);
                out.push_back(static_cast<uint32_t>(wi * 64 + b));
                w &= w - 1;
            }
        }
        return out;
    }

private:
    std::size_t size_ = 0;
    std::vector<uint64_t> words_;
};

inline uint64_t hash_combine(uint64_t h, uint64_t v) {
    return h ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2));
}

//! Search/learning budget. Zero node limit or unset deadline means unlimited.
struct Budget {
    uint64_t max_nodes = 0;
    std::optional<std::chrono::steady_clock::time_point> deadline;

    static Budget unlimited() { return {}; }
    static Budget nodes(uint64_t n) { return Budget{n, std::nullopt}; }

    bool nodes_exhausted(uint64_t expanded) const {
        return max_nodes != 0 && expanded >= max_nodes;
    }
    bool time_exhausted() const {
        return deadline && std::chrono::steady_clock::now() >= *deadline;
    }
};

//! Thrown when a bounded operation hits its node or time budget.
struct BudgetExceeded : std::runtime_error {
    explicit BudgetExceeded(uint64_t expanded_, bool timed_out_)
        : std::runtime_error(timed_out_ ? "time budget exceeded" : "node budget exceeded"),
          expanded(expanded_), timed_out(timed_out_) {}
    uint64_t expanded;
    bool timed_out;
};

}  // namespace genplan
