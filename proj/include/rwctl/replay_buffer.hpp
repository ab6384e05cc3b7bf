#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "rwctl/environment.hpp"

namespace rwctl {

/// Fixed-capacity FIFO of transitions with uniform minibatch sampling.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity = 1'000'000);

    void add(Transition tr);

    [[nodiscard]] std::size_t size() const { return data_.size(); }
    [[nodiscard]] std::size_t capacity() const { return capacity_; }
    [[nodiscard]] bool empty() const { return data_.empty(); }
    /// Total number of add() calls, including evicted entries.
    [[nodiscard]] std::size_t total_added() const { return added_; }

    /// i-th stored transition in insertion order (0 = oldest retained).
    [[nodiscard]] const Transition &at(std::size_t i) const;

    /// `n` distinct indices, uniform over the buffer (Floyd's algorithm).
    /// Throws std::invalid_argument if n > size().
    [[nodiscard]] std::vector<std::size_t> sample_indices(std::size_t n, std::mt19937_64 &rng) const;

private:
    std::size_t capacity_;
    std::vector<Transition> data_;
    std::size_t head_ = 0;  // oldest element once full
    std::size_t added_ = 0;
};

}  // namespace rwctl
