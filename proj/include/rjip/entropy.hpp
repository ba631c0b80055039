#ifndef RJIP_ENTROPY_HPP
#define RJIP_ENTROPY_HPP

#include <cstdint>
#include <unordered_map>

#include "rjip/common.hpp"

namespace rjip {

// Carry-less range coder (Subbotin variant), 32-bit registers. Cumulative
// totals passed to encode/decode must stay below 2^16. Integer-only, so
// streams are bit-identical across runs and platforms.
class RangeEncoder {
public:
    explicit RangeEncoder(std::vector<uint8_t>& out) : out_(out) {}

    void encode(uint32_t cum, uint32_t freq, uint32_t total);
    void flush();

private:
    std::vector<uint8_t>& out_;
    uint32_t low_ = 0;
    uint32_t range_ = 0xFFFFFFFFu;
};

class RangeDecoder {
public:
    RangeDecoder(const uint8_t* data, size_t size);

    // Scaled target in [0, total); pass the same total to decode().
    uint32_t get_freq(uint32_t total);
    void decode(uint32_t cum, uint32_t freq);

    size_t consumed() const { return pos_; }

private:
    uint8_t next_byte();
    const uint8_t* data_;
    size_t size_;
    size_t pos_ = 0;
    uint32_t low_ = 0;
    uint32_t range_ = 0xFFFFFFFFu;
    uint32_t code_ = 0;
};

// Order-0 adaptive frequency table. Increment 32, halving once the total
// reaches 2^16; frequencies never drop below 1. These constants are part of
// the stream format.
class AdaptiveModel {
public:
    explicit AdaptiveModel(int alphabet);

    int alphabet() const { return static_cast<int>(freq_.size()); }
    void encode(RangeEncoder& enc, int symbol);
    int decode(RangeDecoder& dec);

    // -log2 probability the model would charge for `symbol` right now.
    double cost_bits(int symbol) const;

    // Instrumentation: order-insensitive digest of the model state, for
    // encoder/decoder lockstep tests.
    uint64_t digest() const;

private:
    void update(int symbol);
    std::vector<uint32_t> freq_;
    uint32_t total_;
};

// Residual coding for the scalar pipelines: r = (level - prediction) mod q,
// one adaptive model per stream. Exact round-trip given identical prediction
// sequences on both sides.
std::vector<uint8_t> residual_encode(const std::vector<int>& levels,
                                     const std::vector<int>& predictions, int q);
std::vector<int> residual_decode(const std::vector<uint8_t>& bytes,
                                 const std::vector<int>& predictions, int q);

// Batch symbol coding with a fresh AdaptiveModel (spec surface; the codec
// drives models and coders directly for interleaved streams).
std::vector<uint8_t> range_encode(const std::vector<int>& symbols, int alphabet);
std::vector<int> range_decode(const std::vector<uint8_t>& bytes, int alphabet,
                              size_t count);

// PPM with 2-D contexts over a label grid. Contexts are the causal grid
// neighbours (left, above, above-left); out-of-bounds neighbours shrink the
// context. Escapes use PPM-C (escape count = distinct symbols seen), highest
// order first, final fallback is a uniform distribution over the alphabet.
class Ppm2dModel {
public:
    explicit Ppm2dModel(int alphabet);

    void encode(RangeEncoder& enc, const std::vector<int>& labels, int rows, int cols);
    std::vector<int> decode(RangeDecoder& dec, int rows, int cols);

    uint64_t digest() const;

private:
    struct Context {
        std::vector<std::pair<uint16_t, uint16_t>> counts;  // (symbol, count), symbol-sorted
        uint32_t total = 0;
    };

    int encode_symbol(RangeEncoder* enc, RangeDecoder* dec, int symbol,
                      const uint64_t* keys, int nkeys);
    void update_contexts(int symbol, const uint64_t* keys, int nkeys);
    static int context_keys(const std::vector<int>& labels, int rows, int cols,
                            int r, int c, uint64_t* keys);

    int alphabet_;
    Context order0_;
    std::unordered_map<uint64_t, Context> contexts_;
};

std::vector<uint8_t> ppm2d_encode(const std::vector<int>& labels, int rows,
                                  int cols, int alphabet);
std::vector<int> ppm2d_decode(const std::vector<uint8_t>& bytes, int rows,
                              int cols, int alphabet);

}  // namespace rjip

#endif
