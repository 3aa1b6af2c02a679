#pragma once

#include <exception>
#include <limits>
#include <vector>

namespace riskeig::kernels {

template <class Fn>
void for_each_index(Exec exec, std::size_t count, Fn&& fn) {
    if (exec == Exec::serial) {
        serial::for_each_index(count, fn);
        return;
    }
    std::vector<std::exception_ptr> errors(count);
    bool any = false;
    omp::for_each_index(count, [&](std::size_t i) {
        try {
            fn(i);
        } catch (...) {
            errors[i] = std::current_exception();
#pragma omp atomic write
            any = true;
        }
    });
    if (any) {
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
}

}  // namespace riskeig::kernels
