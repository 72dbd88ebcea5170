#include "gridfit/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace gridfit {

unsigned thread_budget() {
    static const unsigned budget = [] {
        unsigned hw = std::thread::hardware_concurrency();
        if (hw == 0) hw = 1;
        if (const char* env = std::getenv("GRIDFIT_THREADS")) {
            char* end = nullptr;
            const long v = std::strtol(env, &end, 10);
            if (end != env && *end == '\0' && v > 0 && static_cast<unsigned>(v) < hw)
                hw = static_cast<unsigned>(v);
        }
        return hw;
    }();
    return budget;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const unsigned budget = thread_budget();
    if (n <= 1 || budget <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(budget, n));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace gridfit
