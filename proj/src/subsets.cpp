#include "uwise/subsets.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace uwise {

double binomial(int n, int m) {
    if (m < 0 || m > n) return 0.0;
    m = std::min(m, n - m);
    double r = 1.0;
    for (int i = 1; i <= m; ++i) r = r * (n - m + i) / i;
    return r;
}

std::string IndexSetCollection::to_json() const {
    std::string out = "[";
    const int k = num_sets();
    for (int j = 0; j < k; ++j) {
        out += (j ? ",[" : "[");
        for (int t = 0; t < m_; ++t) {
            if (t) out += ',';
            out += std::to_string(set(j)[t] + 1);
        }
        out += ']';
    }
    out += ']';
    return out;
}

IndexSetCollection IndexSetCollection::disjoint_blocks(int n, int m) {
    if (m < 1 || m > n) throw std::invalid_argument("disjoint_blocks: need 1 <= m <= n");
    if (n % m != 0) throw std::invalid_argument("disjoint_blocks: m must divide n");
    IndexSetCollection c(n, m, SetKind::Disjoint, 0);
    c.flat_.resize(n);
    std::iota(c.flat_.begin(), c.flat_.end(), 0);
    return c;
}

IndexSetCollection IndexSetCollection::all_subsets(int n, int m, double cap) {
    if (m < 1 || m > n) throw std::invalid_argument("all_subsets: need 1 <= m <= n");
    const double count = binomial(n, m);
    if (count > cap) {
        char buf[256];
        std::snprintf(buf, sizeof(buf),
                      "all_subsets: C(%d,%d) = %.0f exceeds cap %.0f; "
                      "consider the permuted-block estimator (ell permutations "
                      "achieve a 1-1/ell fraction of the complete variance reduction)",
                      n, m, count, cap);
        throw EnumerationCapError(count, cap, buf);
    }
    IndexSetCollection c(n, m, SetKind::Complete, 0);
    c.flat_.reserve(static_cast<std::size_t>(count) * m);
    for_each_subset(n, m, [&](const int* s) { c.flat_.insert(c.flat_.end(), s, s + m); });
    return c;
}

IndexSetCollection IndexSetCollection::random_subsets(int n, int m, int k, RngStream& rng) {
    if (m < 1 || m > n) throw std::invalid_argument("random_subsets: need 1 <= m <= n");
    if (k < 1) throw std::invalid_argument("random_subsets: need k >= 1");
    IndexSetCollection c(n, m, SetKind::Random, k);
    c.flat_.reserve(static_cast<std::size_t>(k) * m);
    for (int j = 0; j < k; ++j) {
        std::vector<int> s = rng.sample_without_replacement(n, m);
        std::sort(s.begin(), s.end());
        c.flat_.insert(c.flat_.end(), s.begin(), s.end());
    }
    return c;
}

IndexSetCollection IndexSetCollection::permuted_blocks(int n, int m, int ell, RngStream& rng) {
    if (m < 1 || m > n) throw std::invalid_argument("permuted_blocks: need 1 <= m <= n");
    if (n % m != 0) throw std::invalid_argument("permuted_blocks: m must divide n");
    if (ell < 1) throw std::invalid_argument("permuted_blocks: need ell >= 1");
    const int r = n / m;
    IndexSetCollection c(n, m, SetKind::PermutedBlock, ell);
    c.flat_.reserve(static_cast<std::size_t>(ell) * n);
    std::vector<int> perm(n);
    for (int p = 0; p < ell; ++p) {
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm);
        for (int b = 0; b < r; ++b) {
            std::sort(perm.begin() + static_cast<std::ptrdiff_t>(b) * m,
                      perm.begin() + static_cast<std::ptrdiff_t>(b + 1) * m);
            c.flat_.insert(c.flat_.end(), perm.begin() + static_cast<std::ptrdiff_t>(b) * m,
                           perm.begin() + static_cast<std::ptrdiff_t>(b + 1) * m);
        }
    }
    return c;
}

}  // namespace uwise
