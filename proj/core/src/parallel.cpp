#include "mvlevy/parallel.hpp"

#include <algorithm>
#include <exception>

#include <omp.h>

namespace mvlevy {

int resolve_threads(int threads) { return threads > 0 ? threads : omp_get_max_threads(); }

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  const int workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(threads)), n));
  if (workers <= 1) {
    body(0, n);
    return;
  }
  std::exception_ptr error;
#pragma omp parallel num_threads(workers)
  {
    const auto w = static_cast<std::size_t>(omp_get_thread_num());
    const auto nw = static_cast<std::size_t>(omp_get_num_threads());
    const std::size_t begin = n * w / nw;
    const std::size_t end = n * (w + 1) / nw;
    try {
      if (begin < end) body(begin, end);
    } catch (...) {
#pragma omp critical(mvlevy_parallel_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace mvlevy
