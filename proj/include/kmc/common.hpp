#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace kmc {

/// Evaluation ran into a vanishing denominator (point on or near a mirror).
class pole_proximity : public std::runtime_error {
public:
    pole_proximity(const std::string& what, double denom,
                   std::int64_t r = 0, std::int64_t p = 0)
        : std::runtime_error(what), denom(denom), r(r), p(p) {}
    double denom;
    std::int64_t r; ///< offending modulus / form coefficient, 0 if n/a
    std::int64_t p; ///< offending residue, 0 if n/a
};

/// A sieve table was asked for moduli beyond its r_max.
class table_too_small : public std::runtime_error {
public:
    table_too_small(std::uint64_t needed, std::uint64_t have)
        : std::runtime_error("sieve table too small: need r_max >= " +
                             std::to_string(needed) + ", have " + std::to_string(have)),
          needed(needed), have(have) {}
    std::uint64_t needed, have;
};

/// Exact integer sequence would exceed the 64-bit range.
class sequence_overflow : public std::runtime_error {
public:
    explicit sequence_overflow(const std::string& what) : std::runtime_error(what) {}
};

/// A truncated sum could not attach a trustworthy tail bound.
class tail_not_certified : public std::runtime_error {
public:
    explicit tail_not_certified(const std::string& what) : std::runtime_error(what) {}
};

/// Sieve construction would exceed the configured memory budget.
class memory_budget_exceeded : public std::runtime_error {
public:
    explicit memory_budget_exceeded(const std::string& what) : std::runtime_error(what) {}
};

class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

/// Compensated accumulator (Kahan-Babuska / Neumaier variant).
///
/// value() == sum + comp.  merge() folds another accumulator in with a fixed
/// formula, so a chunked reduction merged in a fixed order is bit-reproducible
/// regardless of how many workers produced the chunks.
struct kahan_sum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }

    void merge(const kahan_sum& o) {
        add(o.sum);
        comp += o.comp;
    }

    double value() const { return sum + comp; }
};

/// Double-double accumulator (~106-bit significand), kept around to validate
/// the compensated reduction on long sums.
struct dd_sum {
    double hi = 0.0;
    double lo = 0.0;

    void add(double x) {
        // two_sum(hi, x) followed by renormalization
        const double s = hi + x;
        const double b = s - hi;
        const double e = (hi - (s - b)) + (x - b);
        const double t = lo + e;
        hi = s + t;
        lo = t - (hi - s);
    }

    double value() const { return hi + lo; }
};

/// FNV-1a, used as the trailing checksum of the binary file formats.
struct fnv1a {
    std::uint64_t state = 14695981039346656037ull;
    void update(const void* data, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            state ^= b[i];
            state *= 1099511628211ull;
        }
    }
    std::uint64_t digest() const { return state; }
};

} // namespace kmc
