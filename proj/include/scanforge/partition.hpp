#pragma once

#include <cstddef>
#include <vector>

namespace scanforge {

struct Block {
  std::size_t first = 0;  ///< l_I
  std::size_t last = 0;   ///< r_I, inclusive
  std::size_t size() const noexcept { return last - first + 1; }
};

/// Contiguous block distribution; the first n mod p workers get one extra element.
struct Partition {
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<Block> blocks;

  bool even() const noexcept { return p != 0 && n % p == 0; }
  std::size_t max_block() const noexcept;
  std::vector<std::size_t> sizes() const;
};

/// Throws SizeError unless 1 <= p <= n.
Partition partition(std::size_t n, std::size_t p);

}  // namespace scanforge
