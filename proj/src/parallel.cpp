#include "skewfib/parallel.hpp"

#include <atomic>
#include <exception>
#include <cstdlib>

#ifdef SKEWFIB_HAVE_OPENMP
#include <omp.h>
#endif

namespace skewfib::par {

namespace {
std::atomic<bool> g_enabled{true};

int readThreadCap() {
  if (const char* env = std::getenv("SKEWFIB_THREADS")) {
    int v = std::atoi(env);
    if (v >= 0) return v;
  }
  return 0;
}
}  // namespace

void setEnabled(bool enabled) { g_enabled.store(enabled); }
bool enabled() { return g_enabled.load(); }

int threadCap() {
  static int cap = readThreadCap();
  return cap;
}

namespace detail {

void runIndexed(std::size_t n, void* ctx, void (*body)(void*, std::size_t)) {
#ifdef SKEWFIB_HAVE_OPENMP
  int cap = threadCap();
  bool par = enabled() && n > 1 && cap != 1;
  if (par) {
    // exceptions must not escape the parallel region; keep the first one
    std::exception_ptr first;
    std::atomic<bool> failed{false};
    long long nn = static_cast<long long>(n);
    auto guarded = [&](long long i) {
      if (failed.load(std::memory_order_relaxed)) return;
      try {
        body(ctx, static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical(skewfib_par_exc)
        {
          if (!failed.load()) {
            first = std::current_exception();
            failed.store(true);
          }
        }
      }
    };
    if (cap > 0) {
#pragma omp parallel for schedule(static) num_threads(cap)
      for (long long i = 0; i < nn; ++i) guarded(i);
    } else {
#pragma omp parallel for schedule(static)
      for (long long i = 0; i < nn; ++i) guarded(i);
    }
    if (first) std::rethrow_exception(first);
    return;
  }
#endif
  for (std::size_t i = 0; i < n; ++i) body(ctx, i);
}

}  // namespace detail
}  // namespace skewfib::par
