#ifndef RJIP_COMMON_HPP
#define RJIP_COMMON_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rjip {

// Precondition violation in an API contract.
class ContractError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input file. Carries the byte offset of the first bad byte.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, size_t offset)
        : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
          offset_(offset) {}
    size_t offset() const { return offset_; }

private:
    size_t offset_;
};

// Corrupted compressed stream detected while decoding.
class DecodeError : public std::runtime_error {
public:
    DecodeError(const std::string& what, size_t offset)
        : std::runtime_error(what + " (at stream offset " + std::to_string(offset) + ")"),
          offset_(offset) {}
    size_t offset() const { return offset_; }

private:
    size_t offset_;
};

// Requested rate cannot be met (budget below the minimal header, or no
// feasible parameter combination).
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const char* msg) {
    if (!cond) throw ContractError(msg);
}

using Plane = std::vector<double>;

inline double clamp255(double v) { return std::clamp(v, 0.0, 255.0); }

// Worker cap for parallel regions. RJIP_THREADS limits the OpenMP thread
// count; 0 or unset means "use what the runtime gives us".
int worker_count();

// Deterministic bounded uniform integer in [0, n). std::uniform_int_distribution
// is implementation-defined, so streams that feed bitstream decisions roll
// their own mapping.
template <typename Rng>
uint32_t bounded_rand(Rng& rng, uint32_t n) {
    // rejection sampling on the top of the 32-bit range
    const uint32_t limit = UINT32_MAX - UINT32_MAX % n;
    uint32_t r;
    do {
        r = static_cast<uint32_t>(rng());
    } while (r >= limit);
    return r % n;
}

template <typename Rng, typename T>
void shuffle_deterministic(std::vector<T>& v, Rng& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        size_t j = bounded_rand(rng, static_cast<uint32_t>(i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace rjip

#endif
