#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace edmrec {

// mt19937_64 wrapper with fixed draw algorithms. The standard
// distributions are implementation-defined, so every draw used for a
// reproducible artifact goes through these helpers instead.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n); n must be positive.
    int uniform_int(int n) {
        return static_cast<int>(engine_() % static_cast<std::uint64_t>(n));
    }

    // Standard normal via Box-Muller, one value per call.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.14159265358979323846 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (int i = static_cast<int>(values.size()) - 1; i > 0; --i)
            std::swap(values[i], values[uniform_int(i + 1)]);
    }

    // m distinct values from [0, n) via partial Fisher-Yates; requires m <= n.
    std::vector<int> sample_distinct(int n, int m) {
        std::vector<int> pool(n);
        for (int i = 0; i < n; ++i) pool[i] = i;
        for (int i = 0; i < m; ++i) std::swap(pool[i], pool[i + uniform_int(n - i)]);
        pool.resize(m);
        return pool;
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace edmrec
