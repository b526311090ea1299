#include "scanforge/partition.hpp"

#include <algorithm>
#include <string>

#include "scanforge/error.hpp"

namespace scanforge {

std::size_t Partition::max_block() const noexcept {
  std::size_t m = 0;
  for (const Block& b : blocks) m = std::max(m, b.size());
  return m;
}

std::vector<std::size_t> Partition::sizes() const {
  std::vector<std::size_t> out;
  out.reserve(blocks.size());
  for (const Block& b : blocks) out.push_back(b.size());
  return out;
}

Partition partition(std::size_t n, std::size_t p) {
  if (p == 0) throw SizeError("worker count must be positive");
  if (p > n) {
    throw SizeError("more workers (" + std::to_string(p) + ") than elements (" +
                    std::to_string(n) + ")");
  }
  Partition part;
  part.n = n;
  part.p = p;
  part.blocks.reserve(p);
  const std::size_t base = n / p;
  const std::size_t extra = n % p;
  std::size_t next = 0;
  for (std::size_t w = 0; w < p; ++w) {
    const std::size_t size = base + (w < extra ? 1 : 0);
    part.blocks.push_back({next, next + size - 1});
    next += size;
  }
  return part;
}

}  // namespace scanforge
