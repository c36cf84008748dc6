#pragma once

#include <cstddef>
#include <vector>

namespace skewfib::par {

// Parallelism is a pure speedup: every kernel writes one slot per index, so
// the result is identical in serial and parallel runs. Tests pin the serial
// path as the reference.
void setEnabled(bool enabled);
bool enabled();

// Thread cap, resolved from SKEWFIB_THREADS at first use (0 = library default).
int threadCap();

namespace detail {
void runIndexed(std::size_t n, void* ctx, void (*body)(void*, std::size_t));
}

template <class F>
void forIndex(std::size_t n, F&& f) {
  detail::runIndexed(n, &f, [](void* ctx, std::size_t i) {
    (*static_cast<F*>(ctx))(i);
  });
}

template <class T, class F>
std::vector<T> mapIndex(std::size_t n, F&& f) {
  std::vector<T> out(n);
  forIndex(n, [&](std::size_t i) { out[i] = f(i); });
  return out;
}

}  // namespace skewfib::par
