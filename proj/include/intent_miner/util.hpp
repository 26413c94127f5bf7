#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace im {

// Deterministic RNG wrapper. mt19937_64 has a standardized sequence, so
// fixed seeds reproduce bit-identically across platforms. Uniform draws
// are done by hand because std distributions are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // uniform in [0, 1)
    double next_double() { return (eng_() >> 11) * (1.0 / 9007199254740992.0); }

    // uniform in [0, n)
    std::uint64_t next_below(std::uint64_t n) { return eng_() % n; }

    // uniform integer in [lo, hi] inclusive
    std::int64_t next_in(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(next_below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    // uniform real in [lo, hi)
    double next_real(double lo, double hi) { return lo + (hi - lo) * next_double(); }

private:
    std::mt19937_64 eng_;
};

inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 1469598103934665603ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 1469598103934665603ull) {
    return fnv1a(s.data(), s.size(), h);
}

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);
std::string join(const std::vector<std::string>& parts, const std::string& sep);

// %.9g formatting used by all model/report serializers.
std::string format_g9(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace im
