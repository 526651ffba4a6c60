#pragma once

// Shared plumbing: error type with stable labels, deterministic RNG,
// angle helpers, hashing, and small numeric utilities.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace panelbot {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

// Every failure carries a stable label (e.g. "degenerate-input") so the CLI
// can propagate module error categories verbatim.
class Error : public std::runtime_error {
public:
    Error(std::string label, const std::string& message)
        : std::runtime_error(label + ": " + message), label_(std::move(label)) {}

    const std::string& label() const noexcept { return label_; }

private:
    std::string label_;
};

[[noreturn]] inline void fail(std::string label, const std::string& message) {
    throw Error(std::move(label), message);
}

inline void require(bool cond, const char* label, const std::string& message) {
    if (!cond) fail(label, message);
}

// ---------------------------------------------------------------------------
// Deterministic RNG
// ---------------------------------------------------------------------------

// splitmix64 core. Self-contained so streams are bit-stable across standard
// library versions (std distributions make no such promise).
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : state_(seed) {
        // Warm up so that nearby seeds diverge immediately.
        splitmix64(state_);
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return n ? next_u64() % n : 0; }

    // Box-Muller; draws two uniforms per call, no cached spare.
    double normal(double mean = 0.0, double sigma = 1.0) {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sigma * r * std::cos(2.0 * std::numbers::pi * u2);
    }

    // Normal clamped to +/- clamp_sigmas standard deviations.
    double normal_clamped(double sigma, double clamp_sigmas = 4.0) {
        double v = normal(0.0, sigma);
        double lim = clamp_sigmas * sigma;
        return std::clamp(v, -lim, lim);
    }

    bool bernoulli(double p) { return uniform() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

// Fixed sub-seed derivation: one command-level seed fans out to per-module
// streams that stay reproducible in isolation.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
    std::uint64_t s = master ^ fnv1a64(tag);
    return splitmix64(s);
}

inline Rng derived_rng(std::uint64_t master, std::string_view tag) {
    return Rng(derive_seed(master, tag));
}

// ---------------------------------------------------------------------------
// Angles (degrees at public boundaries, radians internally)
// ---------------------------------------------------------------------------

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

// Wrap into (-180, 180].
inline double wrap_deg(double d) {
    d = std::fmod(d, 360.0);
    if (d <= -180.0) d += 360.0;
    if (d > 180.0) d -= 360.0;
    return d;
}

// Fold into [0, m) for undirected quantities (m = 180 for lines, 90 for squares).
inline double fold_deg(double d, double m) {
    d = std::fmod(d, m);
    if (d < 0.0) d += m;
    return d;
}

// Circular distance between two angles under a fold of period m.
inline double circ_dist_deg(double a, double b, double m) {
    double x = std::fabs(fold_deg(a, m) - fold_deg(b, m));
    return std::min(x, m - x);
}

// ---------------------------------------------------------------------------
// Scalar statistics (Average/Median/Max/Min/Stddev report columns)
// ---------------------------------------------------------------------------

struct Stats {
    double average = 0.0;
    double median = 0.0;
    double max = 0.0;
    double min = 0.0;
    double stddev = 0.0;
    std::size_t count = 0;
};

inline double median_of(std::vector<double> v) {
    if (v.empty()) fail("degenerate-input", "median of empty sequence");
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline Stats summarize(const std::vector<double>& v) {
    if (v.empty()) fail("degenerate-input", "summary of empty sequence");
    Stats s;
    s.count = v.size();
    s.min = *std::min_element(v.begin(), v.end());
    s.max = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double x : v) sum += x;
    s.average = sum / static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - s.average) * (x - s.average);
    s.stddev = v.size() > 1 ? std::sqrt(acc / static_cast<double>(v.size() - 1)) : 0.0;
    s.median = median_of(v);
    return s;
}

}  // namespace panelbot
