#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace embias {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input bytes (bad header, truncated record, inconsistent row).
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

// A token that is not present in the vocabulary. Carries the token so
// callers can name it in diagnostics.
class MissingWordError : public Error {
public:
    explicit MissingWordError(const std::string& token)
        : Error("word not in vocabulary: \"" + token + "\""), token_(token) {}
    const std::string& token() const noexcept { return token_; }

private:
    std::string token_;
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& msg) : Error(msg) {}
};

// Neumaier-compensated accumulator. Partial sums merge deterministically,
// so chunked parallel reductions reproduce the sequential result as long
// as chunk boundaries are fixed and merges happen in chunk order.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    void merge(const CompensatedSum& other) noexcept {
        add(other.sum_);
        add(other.comp_);
    }

    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// mt19937_64 is fully specified by the standard, so seeded draws are
// reproducible across platforms. The bounded sampler below avoids
// uniform_int_distribution, whose output is implementation-defined.
using Rng = std::mt19937_64;

inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
    if (n == 0) throw InvalidArgument("uniform_below: n must be positive");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % n);
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return v % n;
}

// FNV-1a, used for provenance hashes and cache invalidation.
class Fnv1a64 {
public:
    void update(const void* data, std::size_t len) noexcept {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            hash_ ^= p[i];
            hash_ *= 0x100000001b3ull;
        }
    }
    void update(std::string_view s) noexcept { update(s.data(), s.size()); }
    std::uint64_t digest() const noexcept { return hash_; }

private:
    std::uint64_t hash_ = 0xcbf29ce484222325ull;
};

std::uint64_t file_checksum(const std::string& path);

// Newline-delimited token file; blank lines and trailing '\r' are dropped.
std::vector<std::string> read_token_list(const std::string& path);

std::string to_hex(std::uint64_t v);

// Formats a double with `digits` fractional digits (CLI print precision).
std::string format_fixed(double v, int digits = 4);

}  // namespace embias
