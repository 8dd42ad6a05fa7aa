#include "tpms/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <thread>
#include <vector>

namespace tpms {

unsigned thread_count()
{
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("TPMS_CPIA_THREADS")) {
        unsigned cap = 0;
        auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), cap);
        if (ec == std::errc() && cap > 0)
            hw = std::min(hw, cap);
    }
    return hw;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body)
{
    if (count == 0)
        return;
    // Small loops are not worth a thread launch.
    constexpr std::size_t kMinChunk = 1024;
    std::size_t workers = std::min<std::size_t>(thread_count(), (count + kMinChunk - 1) / kMinChunk);
    if (workers <= 1) {
        body(0, count);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 1; w < workers; ++w) {
        std::size_t begin = w * chunk;
        std::size_t end = std::min(count, begin + chunk);
        if (begin < end)
            pool.emplace_back(body, begin, end);
    }
    body(0, std::min(count, chunk));
    for (auto& t : pool)
        t.join();
}

}  // namespace tpms
