#ifndef SBMMRF_BINARY_NETWORK_HPP
#define SBMMRF_BINARY_NETWORK_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sbmmrf/errors.hpp"
#include "sbmmrf/matrix.hpp"

namespace sbmmrf {

// Undirected simple graph over labelled nodes: symmetric 0/1 adjacency with zero diagonal.
// Used both for the co-occurrence network G and the same-parent network Q.
class BinaryNetwork {
public:
    BinaryNetwork() = default;
    explicit BinaryNetwork(std::vector<std::string> labels)
        : labels_(std::move(labels)), adjacency_(labels_.size(), labels_.size(), 0) {}

    // Validates an externally supplied adjacency.
    BinaryNetwork(std::vector<std::string> labels, Matrix<std::uint8_t> adjacency)
        : labels_(std::move(labels)), adjacency_(std::move(adjacency)) {
        const std::size_t p = labels_.size();
        if (adjacency_.rows() != p || adjacency_.cols() != p)
            throw ValidationError("adjacency dimensions do not match label count");
        for (std::size_t i = 0; i < p; ++i) {
            if (adjacency_(i, i) != 0) throw ValidationError("adjacency has a non-zero diagonal at " + labels_[i]);
            for (std::size_t j = 0; j < p; ++j) {
                if (adjacency_(i, j) > 1) throw ValidationError("adjacency entries must be 0 or 1");
                if (adjacency_(i, j) != adjacency_(j, i)) throw ValidationError("adjacency is not symmetric");
            }
        }
    }

    std::size_t size() const noexcept { return labels_.size(); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const Matrix<std::uint8_t>& adjacency() const noexcept { return adjacency_; }

    bool has_edge(std::size_t i, std::size_t j) const { return adjacency_(i, j) != 0; }

    void set_edge(std::size_t i, std::size_t j, bool present = true) {
        if (i == j) throw ValidationError("self-loops are not allowed");
        adjacency_(i, j) = adjacency_(j, i) = present ? 1 : 0;
    }

    std::size_t edge_count() const {
        std::size_t m = 0;
        for (std::size_t i = 0; i < size(); ++i)
            for (std::size_t j = i + 1; j < size(); ++j) m += adjacency_(i, j);
        return m;
    }

    // Neighbour lists, ascending.
    std::vector<std::vector<std::uint32_t>> neighbours() const {
        std::vector<std::vector<std::uint32_t>> out(size());
        for (std::size_t i = 0; i < size(); ++i)
            for (std::size_t j = 0; j < size(); ++j)
                if (adjacency_(i, j)) out[i].push_back(static_cast<std::uint32_t>(j));
        return out;
    }

    bool operator==(const BinaryNetwork&) const = default;

private:
    std::vector<std::string> labels_;
    Matrix<std::uint8_t> adjacency_;
};

} // namespace sbmmrf

#endif // SBMMRF_BINARY_NETWORK_HPP
