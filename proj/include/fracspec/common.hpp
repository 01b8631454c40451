// Small shared utilities: argument checking, p-power kernels, deterministic RNG,
// and the worker-count cap honored by the parallel assembly paths.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fracspec {

namespace detail {

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

} // namespace detail

// |t|^p, with branch-free fast paths for the exponents that dominate the hot loops.
inline double abs_pow(double t, double p) {
    const double a = std::abs(t);
    if (p == 2.0) return a * a;
    if (p == 3.0) return a * a * a;
    if (p == 4.0) return (a * a) * (a * a);
    if (p == 1.5) return a * std::sqrt(a);
    if (p == 2.5) return a * a * std::sqrt(a);
    if (a == 0.0) return 0.0;
    return std::pow(a, p);
}

// Phi_p(t) = |t|^{p-2} t, the odd p-power. Phi_p(0) = 0 for every p > 1,
// including p < 2 where |t|^{p-2} alone would blow up.
inline double phi_p(double t, double p) {
    if (t == 0.0) return 0.0;
    if (p == 2.0) return t;
    const double a = std::abs(t);
    if (p == 3.0) return a * t;
    if (p == 4.0) return a * a * t;
    if (p == 1.5) return t / std::sqrt(a);
    if (p == 2.5) return std::sqrt(a) * t;
    return std::pow(a, p - 2.0) * t;
}

// mt19937_64 with an explicit 53-bit mapping to doubles, so streams do not
// depend on the standard library's distribution implementation.
class UniformRng {
public:
    explicit UniformRng(std::uint64_t seed) : eng_(seed) {}

    // in [0, 1)
    double next() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    // in [lo, hi)
    double next(double lo, double hi) { return lo + (hi - lo) * next(); }

private:
    std::mt19937_64 eng_;
};

// Worker cap: hardware concurrency, optionally capped by FRACSPEC_THREADS.
inline unsigned worker_count() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("FRACSPEC_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
    }
    return n;
}

// Runs fn(i) for i in [0, n). Rows are split into contiguous blocks, one block
// per worker; every fn(i) must write only row-i data so the result is
// bit-identical for any thread count.
template <class Fn>
void for_rows(int n, Fn&& fn) {
    const unsigned workers = worker_count();
    if (workers <= 1 || n < 256) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    const int block = (n + static_cast<int>(workers) - 1) / static_cast<int>(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        const int lo = static_cast<int>(w) * block;
        const int hi = std::min(n, lo + block);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (int i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace fracspec
