#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace msym {

// Evaluates f(0..m-1) into a vector. The OpenMP loop writes disjoint slots,
// so the result is identical to the serial loop; exceptions thrown by f are
// captured inside the parallel region and the first one is rethrown.
template <class F>
auto parallel_map(std::size_t m, F&& f, bool par = true) -> std::vector<decltype(f(std::size_t{}))> {
    using T = decltype(f(std::size_t{}));
    std::vector<T> out(m);
    if (!par) {
        for (std::size_t i = 0; i < m; ++i) out[i] = f(i);
        return out;
    }
    std::exception_ptr err = nullptr;
    const long mm = static_cast<long>(m);
#pragma omp parallel for schedule(dynamic, 4)
    for (long i = 0; i < mm; ++i) {
        try {
            out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(msym_parallel_map_error)
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    return out;
}

}  // namespace msym
