#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace owsc {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Invalid configuration or argument values. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// File / format problems. CLI maps this to exit code 3.
class IoError : public std::runtime_error {
public:
    enum class Kind {
        OpenFailed,
        WriteFailed,
        BadMagic,
        BadVersion,
        Truncated,
        DimMismatch,
    };

    IoError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Non-finite values reached the optimizer. CLI maps this to exit code 4.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// ---------------------------------------------------------------------------
// Deterministic RNG
//
// All randomness in the project flows through this wrapper. Distributions are
// hand-rolled on top of mt19937_64 because the standard distribution objects
// are implementation-defined; the generator/draw sequence is part of the
// reproducibility contract (identical seeds must give identical bytes).
// ---------------------------------------------------------------------------

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a path of tags.
/// Sub-streams keyed by identifying indices (e.g. per-(category,state) warp
/// parameters) stay stable no matter the order they are instantiated in.
inline uint64_t derive_seed(uint64_t base, std::initializer_list<uint64_t> path) {
    uint64_t s = splitmix64(base);
    for (uint64_t p : path) s = splitmix64(s ^ (p + 0x632be59bd9b4e019ull));
    return s;
}

class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(splitmix64(seed)) {}

    uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Unbiased uniform integer in [0, n). n must be >= 1.
    uint64_t uniform_below(uint64_t n) {
        if (n == 0) throw ConfigError("uniform_below: n must be >= 1");
        const uint64_t rem = std::numeric_limits<uint64_t>::max() % n;
        const uint64_t limit = std::numeric_limits<uint64_t>::max() - rem;
        uint64_t v;
        do {
            v = next_u64();
        } while (v > limit);
        return v % n;
    }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(uniform_below(static_cast<uint64_t>(hi - lo + 1)));
    }

    /// Standard normal via Box-Muller with a cached spare.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * M_PI * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {  // Fisher-Yates
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(uniform_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// k distinct indices drawn from [0, n), in draw order.
    std::vector<size_t> sample_distinct(size_t n, size_t k) {
        if (k > n) throw ConfigError("sample_distinct: k > n");
        std::vector<size_t> idx(n);
        for (size_t i = 0; i < n; ++i) idx[i] = i;
        for (size_t i = 0; i < k; ++i) {
            const size_t j = i + static_cast<size_t>(uniform_below(n - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(k);
        return idx;
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Small dense matrix (row-major, double)
// ---------------------------------------------------------------------------

struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

    double& operator()(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }

    double* row(int r) { return a.data() + static_cast<size_t>(r) * cols; }
    const double* row(int r) const { return a.data() + static_cast<size_t>(r) * cols; }

    void zero() { std::fill(a.begin(), a.end(), 0.0); }
};

/// C = A * B, optionally accumulating into C.
void matmul(const Mat& A, const Mat& B, Mat& C, bool accumulate = false);
/// C = A * B^T
void matmul_nt(const Mat& A, const Mat& B, Mat& C, bool accumulate = false);
/// C = A^T * B
void matmul_tn(const Mat& A, const Mat& B, Mat& C, bool accumulate = false);

inline double sq(double x) { return x * x; }

inline double squared_l2(const double* a, const double* b, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += sq(a[i] - b[i]);
    return s;
}

inline double squared_l2(const std::vector<double>& a, const std::vector<double>& b) {
    return squared_l2(a.data(), b.data(), static_cast<int>(a.size()));
}

inline double l2(const std::vector<double>& a, const std::vector<double>& b) {
    return std::sqrt(squared_l2(a, b));
}

// ---------------------------------------------------------------------------
// Hashing / formatting helpers
// ---------------------------------------------------------------------------

inline uint64_t fnv1a64(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

std::string hex64(uint64_t v);

/// Deterministic decimal rendering used in CSV output.
std::string fmt_g(double v);

}  // namespace owsc
