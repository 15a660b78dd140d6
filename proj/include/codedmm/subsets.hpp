#pragma once

// Fixed-size subset enumeration in lexicographic order. Batch placement,
// decodability checks and shuffle groups all agree on this order, so it
// lives in one place.

#include <functional>
#include <numeric>
#include <vector>

namespace codedmm {

// Calls visit with each size-r subset of {0..k-1}, ascending entries,
// subsets in lexicographic order.
template <class Visit>
void for_each_subset_lex(int k, int r, Visit&& visit) {
  if (r < 0 || r > k) return;
  std::vector<int> cur(static_cast<size_t>(r));
  std::iota(cur.begin(), cur.end(), 0);
  while (true) {
    visit(static_cast<const std::vector<int>&>(cur));
    int i = r - 1;
    while (i >= 0 && cur[static_cast<size_t>(i)] == k - r + i) --i;
    if (i < 0) break;
    ++cur[static_cast<size_t>(i)];
    for (int j = i + 1; j < r; ++j)
      cur[static_cast<size_t>(j)] = cur[static_cast<size_t>(j - 1)] + 1;
  }
}

inline std::vector<std::vector<int>> subsets_lex(int k, int r) {
  std::vector<std::vector<int>> out;
  for_each_subset_lex(k, r, [&](const std::vector<int>& s) { out.push_back(s); });
  return out;
}

}  // namespace codedmm
