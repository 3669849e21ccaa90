#ifndef UWISE_SUBSETS_HPP
#define UWISE_SUBSETS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "uwise/rng.hpp"

namespace uwise {

enum class SetKind { Disjoint, Complete, Random, PermutedBlock };

// Thrown when a complete enumeration would exceed the configured cap.
// Carries the offending count so callers (and the CLI) can surface it.
class EnumerationCapError : public std::runtime_error {
public:
    EnumerationCapError(double count, double cap, std::string msg)
        : std::runtime_error(std::move(msg)), count(count), cap(cap) {}
    double count;
    double cap;
};

constexpr double kDefaultSetCap = 1e6;

// C(n, m) in floating point (exact for every count the library will
// materialize; used for cap checks, not for weights).
double binomial(int n, int m);

// A multiset of size-m index subsets of {0..n-1}, each stored as strictly
// increasing indices, flattened row-major (set j occupies
// [j*m, (j+1)*m)).
class IndexSetCollection {
public:
    int n() const { return n_; }
    int m() const { return m_; }
    int num_sets() const { return static_cast<int>(flat_.size()) / m_; }
    SetKind kind() const { return kind_; }
    // ell for PermutedBlock, k for Random, 0 otherwise.
    int meta() const { return meta_; }

    const int* set(int j) const { return flat_.data() + static_cast<std::size_t>(j) * m_; }
    const std::vector<int>& flat() const { return flat_; }

    // JSON array-of-arrays with 1-based indices, for --dump-sets.
    std::string to_json() const;

    static IndexSetCollection disjoint_blocks(int n, int m);
    static IndexSetCollection all_subsets(int n, int m, double cap = kDefaultSetCap);
    static IndexSetCollection random_subsets(int n, int m, int k, RngStream& rng);
    static IndexSetCollection permuted_blocks(int n, int m, int ell, RngStream& rng);

private:
    IndexSetCollection(int n, int m, SetKind kind, int meta) : n_(n), m_(m), kind_(kind), meta_(meta) {}
    int n_;
    int m_;
    SetKind kind_;
    int meta_;
    std::vector<int> flat_;
};

// Lexicographic streaming enumeration of all C(n, m) size-m subsets of
// {0..n-1}; fn receives each subset as a pointer to m increasing ints.
// Memory stays O(m) regardless of the count.
template <typename Fn>
void for_each_subset(int n, int m, Fn&& fn) {
    std::vector<int> idx(m);
    for (int i = 0; i < m; ++i) idx[i] = i;
    for (;;) {
        fn(idx.data());
        int j = m - 1;
        while (j >= 0 && idx[j] == n - m + j) --j;
        if (j < 0) break;
        ++idx[j];
        for (int t = j + 1; t < m; ++t) idx[t] = idx[t - 1] + 1;
    }
}

}  // namespace uwise

#endif
