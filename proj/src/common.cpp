#include <dss/common.hpp>

#include <cstdlib>
#include <thread>

namespace dss {

int worker_count() {
    static const int n = [] {
        if (const char* env = std::getenv("DSS_THREADS")) {
            const int v = std::atoi(env);
            if (v >= 1) return v;
        }
        return 1;
    }();
    return n;
}

void parallel_for(int n, const std::function<void(int)>& fn) {
    const int workers = std::min(worker_count(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const int chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const int begin = w * chunk, end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] {
            for (int i = begin; i < end; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace dss
