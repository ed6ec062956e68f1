#include "wkam/parallel.hpp"

#include <atomic>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace wkam {
namespace {

int g_workers = 0;  // 0 = uninitialized, resolve lazily

int resolve_workers() {
    if (g_workers > 0) return g_workers;
    unsigned hc = std::thread::hardware_concurrency();
    g_workers = hc == 0 ? 1 : static_cast<int>(hc);
    return g_workers;
}

// Each run publishes one Job; workers hold a shared_ptr so a straggler from
// a previous generation can never touch a newer job's state.
struct Job {
    const std::function<void(std::size_t, std::size_t, int)>* f = nullptr;
    std::size_t count = 0;
    int chunks = 0;
    std::atomic<int> next{0};
    std::atomic<int> remaining{0};
};

void drain(Job& job, std::mutex& mu, std::condition_variable& done_cv) {
    while (true) {
        int k = job.next.fetch_add(1);
        if (k >= job.chunks) return;
        std::size_t b = job.count * static_cast<std::size_t>(k) /
                        static_cast<std::size_t>(job.chunks);
        std::size_t e = job.count * static_cast<std::size_t>(k + 1) /
                        static_cast<std::size_t>(job.chunks);
        if (b < e) (*job.f)(b, e, k);
        if (job.remaining.fetch_sub(1) == 1) {
            std::unique_lock<std::mutex> lk(mu);
            done_cv.notify_all();
        }
    }
}

class Pool {
public:
    explicit Pool(int nthreads) {
        for (int t = 0; t < nthreads; ++t)
            threads_.emplace_back([this] { worker(); });
    }
    ~Pool() {
        {
            std::unique_lock<std::mutex> lk(mu_);
            stop_ = true;
        }
        cv_.notify_all();
        for (auto& th : threads_) th.join();
    }

    void run(std::size_t count, int chunks,
             const std::function<void(std::size_t, std::size_t, int)>& f) {
        auto job = std::make_shared<Job>();
        job->f = &f;
        job->count = count;
        job->chunks = chunks;
        job->remaining.store(chunks);
        {
            std::unique_lock<std::mutex> lk(mu_);
            current_ = job;
            ++generation_;
        }
        cv_.notify_all();
        drain(*job, mu_, done_cv_);
        std::unique_lock<std::mutex> lk(mu_);
        done_cv_.wait(lk, [&] { return job->remaining.load() == 0; });
        current_.reset();
    }

private:
    void worker() {
        long seen = 0;
        while (true) {
            std::shared_ptr<Job> job;
            {
                std::unique_lock<std::mutex> lk(mu_);
                cv_.wait(lk, [&] { return stop_ || generation_ != seen; });
                if (stop_) return;
                seen = generation_;
                job = current_;
            }
            if (job) drain(*job, mu_, done_cv_);
        }
    }

    std::mutex mu_;
    std::condition_variable cv_, done_cv_;
    std::vector<std::thread> threads_;
    std::shared_ptr<Job> current_;
    long generation_ = 0;
    bool stop_ = false;
};

Pool* pool_instance() {
    static Pool pool(resolve_workers() - 1 > 0 ? resolve_workers() - 1 : 0);
    return &pool;
}

}  // namespace

void set_worker_count(int n) { g_workers = n > 0 ? n : 1; }

int worker_count() { return resolve_workers(); }

int parallel_chunk_count(std::size_t count) {
    if (count == 0) return 0;
    if (count < 64) return 1;
    return 64;
}

void parallel_for(std::size_t count,
                  const std::function<void(std::size_t, std::size_t, int)>& f) {
    if (count == 0) return;
    int chunks = parallel_chunk_count(count);
    if (resolve_workers() == 1 || chunks == 1) {
        for (int k = 0; k < chunks; ++k) {
            std::size_t b = count * static_cast<std::size_t>(k) /
                            static_cast<std::size_t>(chunks);
            std::size_t e = count * static_cast<std::size_t>(k + 1) /
                            static_cast<std::size_t>(chunks);
            if (b < e) f(b, e, k);
        }
        return;
    }
    pool_instance()->run(count, chunks, f);
}

}  // namespace wkam
