#include "rwctl/replay_buffer.hpp"

#include <algorithm>
#include <stdexcept>

namespace rwctl {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) {
        throw std::invalid_argument("replay buffer capacity must be > 0");
    }
}

void ReplayBuffer::add(Transition tr) {
    ++added_;
    if (data_.size() < capacity_) {
        data_.push_back(std::move(tr));
        return;
    }
    data_[head_] = std::move(tr);
    head_ = (head_ + 1) % capacity_;
}

const Transition &ReplayBuffer::at(std::size_t i) const {
    if (i >= data_.size()) {
        throw std::out_of_range("ReplayBuffer::at");
    }
    return data_[(head_ + i) % data_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n, std::mt19937_64 &rng) const {
    const std::size_t N = data_.size();
    if (n > N) {
        throw std::invalid_argument("ReplayBuffer::sample_indices: batch larger than buffer");
    }
    std::vector<std::size_t> out;
    out.reserve(n);
    for (std::size_t j = N - n; j < N; ++j) {
        std::uniform_int_distribution<std::size_t> pick(0, j);
        const std::size_t t = pick(rng);
        if (std::find(out.begin(), out.end(), t) == out.end()) {
            out.push_back(t);
        } else {
            out.push_back(j);
        }
    }
    return out;
}

}  // namespace rwctl
