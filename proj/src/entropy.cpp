#include "rjip/entropy.hpp"

#include <algorithm>
#include <cmath>

namespace rjip {

namespace {
constexpr uint32_t kTop = 1u << 24;
constexpr uint32_t kBot = 1u << 16;

constexpr uint32_t kModelIncrement = 32;
constexpr uint32_t kModelRescale = 1u << 16;

constexpr uint32_t kPpmRescale = 1u << 13;
}  // namespace

void RangeEncoder::encode(uint32_t cum, uint32_t freq, uint32_t total) {
    low_ += cum * (range_ /= total);
    range_ *= freq;
    while ((low_ ^ (low_ + range_)) < kTop ||
           (range_ < kBot && ((range_ = (0u - low_) & (kBot - 1)), true))) {
        out_.push_back(static_cast<uint8_t>(low_ >> 24));
        low_ <<= 8;
        range_ <<= 8;
    }
}

void RangeEncoder::flush() {
    for (int i = 0; i < 4; ++i) {
        out_.push_back(static_cast<uint8_t>(low_ >> 24));
        low_ <<= 8;
    }
}

RangeDecoder::RangeDecoder(const uint8_t* data, size_t size)
    : data_(data), size_(size) {
    for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
}

uint8_t RangeDecoder::next_byte() {
    if (pos_ >= size_) throw DecodeError("compressed stream exhausted", pos_);
    return data_[pos_++];
}

uint32_t RangeDecoder::get_freq(uint32_t total) {
    uint32_t f = (code_ - low_) / (range_ /= total);
    if (f >= total) throw DecodeError("range coder state out of bounds", pos_);
    return f;
}

void RangeDecoder::decode(uint32_t cum, uint32_t freq) {
    low_ += cum * range_;
    range_ *= freq;
    while ((low_ ^ (low_ + range_)) < kTop ||
           (range_ < kBot && ((range_ = (0u - low_) & (kBot - 1)), true))) {
        code_ = (code_ << 8) | next_byte();
        low_ <<= 8;
        range_ <<= 8;
    }
}

AdaptiveModel::AdaptiveModel(int alphabet) {
    require(alphabet >= 1 && alphabet <= 256, "AdaptiveModel: alphabet must be 1..256");
    freq_.assign(alphabet, 1);
    total_ = static_cast<uint32_t>(alphabet);
}

void AdaptiveModel::update(int symbol) {
    freq_[symbol] += kModelIncrement;
    total_ += kModelIncrement;
    if (total_ >= kModelRescale) {
        total_ = 0;
        for (auto& f : freq_) {
            f = (f >> 1) | 1;  // keep every frequency >= 1
            total_ += f;
        }
    }
}

void AdaptiveModel::encode(RangeEncoder& enc, int symbol) {
    require(symbol >= 0 && symbol < alphabet(), "AdaptiveModel: symbol out of range");
    uint32_t cum = 0;
    for (int s = 0; s < symbol; ++s) cum += freq_[s];
    enc.encode(cum, freq_[symbol], total_);
    update(symbol);
}

int AdaptiveModel::decode(RangeDecoder& dec) {
    uint32_t target = dec.get_freq(total_);
    uint32_t cum = 0;
    int symbol = 0;
    while (cum + freq_[symbol] <= target) {
        cum += freq_[symbol];
        ++symbol;
    }
    dec.decode(cum, freq_[symbol]);
    update(symbol);
    return symbol;
}

double AdaptiveModel::cost_bits(int symbol) const {
    return -std::log2(static_cast<double>(freq_[symbol]) / total_);
}

uint64_t AdaptiveModel::digest() const {
    uint64_t h = 1469598103934665603ull;
    auto mix = [&h](uint64_t v) {
        h ^= v;
        h *= 1099511628211ull;
    };
    for (uint32_t f : freq_) mix(f);
    mix(total_);
    return h;
}

std::vector<uint8_t> residual_encode(const std::vector<int>& levels,
                                     const std::vector<int>& predictions, int q) {
    require(levels.size() == predictions.size(), "residual_encode: length mismatch");
    std::vector<uint8_t> out;
    RangeEncoder enc(out);
    AdaptiveModel model(q);
    for (size_t i = 0; i < levels.size(); ++i) {
        require(levels[i] >= 0 && levels[i] < q, "residual_encode: level out of range");
        require(predictions[i] >= 0 && predictions[i] < q,
                "residual_encode: prediction out of range");
        int r = levels[i] - predictions[i];
        if (r < 0) r += q;
        model.encode(enc, r);
    }
    enc.flush();
    return out;
}

std::vector<int> residual_decode(const std::vector<uint8_t>& bytes,
                                 const std::vector<int>& predictions, int q) {
    std::vector<int> levels(predictions.size());
    RangeDecoder dec(bytes.data(), bytes.size());
    AdaptiveModel model(q);
    for (size_t i = 0; i < predictions.size(); ++i) {
        int r = model.decode(dec);
        levels[i] = (predictions[i] + r) % q;
    }
    return levels;
}

std::vector<uint8_t> range_encode(const std::vector<int>& symbols, int alphabet) {
    std::vector<uint8_t> out;
    RangeEncoder enc(out);
    AdaptiveModel model(alphabet);
    for (int s : symbols) model.encode(enc, s);
    enc.flush();
    return out;
}

std::vector<int> range_decode(const std::vector<uint8_t>& bytes, int alphabet,
                              size_t count) {
    std::vector<int> out(count);
    RangeDecoder dec(bytes.data(), bytes.size());
    AdaptiveModel model(alphabet);
    for (size_t i = 0; i < count; ++i) out[i] = model.decode(dec);
    return out;
}

Ppm2dModel::Ppm2dModel(int alphabet) : alphabet_(alphabet) {
    require(alphabet >= 1 && alphabet <= 256, "Ppm2dModel: alphabet must be 1..256");
}

// Keys for the back-off chain at (r,c), longest context first. Out-of-bounds
// neighbours are dropped from the slot list before prefixes are formed, and
// the slot identity is part of the key so a lone "above" context never mixes
// with a lone "left" one.
int Ppm2dModel::context_keys(const std::vector<int>& labels, int rows, int cols,
                             int r, int c, uint64_t* keys) {
    (void)rows;
    uint32_t slot_label[3];
    int have = 0;
    if (c > 0) slot_label[have++] = (0u << 8) | static_cast<uint32_t>(labels[r * cols + c - 1]);
    if (r > 0) slot_label[have++] = (1u << 8) | static_cast<uint32_t>(labels[(r - 1) * cols + c]);
    if (r > 0 && c > 0)
        slot_label[have++] = (2u << 8) | static_cast<uint32_t>(labels[(r - 1) * cols + c - 1]);

    int n = 0;
    for (int order = have; order >= 1; --order) {
        uint64_t key = static_cast<uint64_t>(order);
        for (int e = 0; e < order; ++e) key = (key << 11) | slot_label[e];
        keys[n++] = key;
    }
    return n;
}

int Ppm2dModel::encode_symbol(RangeEncoder* enc, RangeDecoder* dec, int symbol,
                              const uint64_t* keys, int nkeys) {
    // Try contexts from the longest down, then order-0, then uniform. Empty
    // contexts cost nothing on either side.
    for (int ki = 0; ki <= nkeys; ++ki) {
        Context* ctx;
        if (ki < nkeys) {
            auto it = contexts_.find(keys[ki]);
            if (it == contexts_.end()) continue;
            ctx = &it->second;
        } else {
            ctx = &order0_;
        }
        uint32_t distinct = static_cast<uint32_t>(ctx->counts.size());
        if (distinct == 0) continue;
        uint32_t total = ctx->total + distinct;

        if (enc) {
            uint32_t cum = 0, freq = 0;
            for (const auto& [sym, cnt] : ctx->counts) {
                if (sym == symbol) {
                    freq = cnt;
                    break;
                }
                cum += cnt;
            }
            if (freq > 0) {
                enc->encode(cum, freq, total);
                return symbol;
            }
            enc->encode(ctx->total, distinct, total);  // escape
        } else {
            uint32_t target = dec->get_freq(total);
            if (target < ctx->total) {
                uint32_t cum = 0;
                for (const auto& [sym, cnt] : ctx->counts) {
                    if (target < cum + cnt) {
                        dec->decode(cum, cnt);
                        return sym;
                    }
                    cum += cnt;
                }
            }
            dec->decode(ctx->total, distinct);  // escape
        }
    }
    // uniform fallback
    if (enc) {
        enc->encode(static_cast<uint32_t>(symbol), 1, static_cast<uint32_t>(alphabet_));
        return symbol;
    }
    uint32_t target = dec->get_freq(static_cast<uint32_t>(alphabet_));
    dec->decode(target, 1);
    return static_cast<int>(target);
}

void Ppm2dModel::update_contexts(int symbol, const uint64_t* keys, int nkeys) {
    auto bump = [this, symbol](Context& ctx) {
        auto it = std::lower_bound(
            ctx.counts.begin(), ctx.counts.end(), symbol,
            [](const auto& a, int s) { return a.first < s; });
        if (it != ctx.counts.end() && it->first == symbol) {
            it->second += 1;
        } else {
            ctx.counts.insert(it, {static_cast<uint16_t>(symbol), 1});
        }
        ctx.total += 1;
        if (ctx.total + ctx.counts.size() >= kPpmRescale) {
            uint32_t total = 0;
            auto keep = ctx.counts.begin();
            for (auto& e : ctx.counts) {
                uint16_t c = e.second >> 1;
                if (c > 0) {
                    *keep++ = {e.first, c};
                    total += c;
                }
            }
            ctx.counts.erase(keep, ctx.counts.end());
            ctx.total = total;
        }
    };
    for (int ki = 0; ki < nkeys; ++ki) bump(contexts_[keys[ki]]);
    bump(order0_);
}

void Ppm2dModel::encode(RangeEncoder& enc, const std::vector<int>& labels,
                        int rows, int cols) {
    require(static_cast<size_t>(rows) * cols == labels.size(),
            "Ppm2dModel: grid size mismatch");
    uint64_t keys[3];
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            int symbol = labels[r * cols + c];
            require(symbol >= 0 && symbol < alphabet_, "Ppm2dModel: label out of range");
            int n = context_keys(labels, rows, cols, r, c, keys);
            encode_symbol(&enc, nullptr, symbol, keys, n);
            update_contexts(symbol, keys, n);
        }
    }
}

std::vector<int> Ppm2dModel::decode(RangeDecoder& dec, int rows, int cols) {
    std::vector<int> labels(static_cast<size_t>(rows) * cols, 0);
    uint64_t keys[3];
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            int n = context_keys(labels, rows, cols, r, c, keys);
            int symbol = encode_symbol(nullptr, &dec, -1, keys, n);
            labels[r * cols + c] = symbol;
            update_contexts(symbol, keys, n);
        }
    }
    return labels;
}

uint64_t Ppm2dModel::digest() const {
    // Key-sorted so the digest is independent of hash-map iteration order.
    std::vector<uint64_t> keys;
    keys.reserve(contexts_.size());
    for (const auto& [k, _] : contexts_) keys.push_back(k);
    std::sort(keys.begin(), keys.end());

    uint64_t h = 1469598103934665603ull;
    auto mix = [&h](uint64_t v) {
        h ^= v;
        h *= 1099511628211ull;
    };
    auto mix_ctx = [&mix](const Context& ctx) {
        mix(ctx.total);
        for (const auto& [sym, cnt] : ctx.counts) mix((uint64_t(sym) << 32) | cnt);
    };
    mix_ctx(order0_);
    for (uint64_t k : keys) {
        mix(k);
        mix_ctx(contexts_.at(k));
    }
    return h;
}

std::vector<uint8_t> ppm2d_encode(const std::vector<int>& labels, int rows,
                                  int cols, int alphabet) {
    std::vector<uint8_t> out;
    RangeEncoder enc(out);
    Ppm2dModel model(alphabet);
    model.encode(enc, labels, rows, cols);
    enc.flush();
    return out;
}

std::vector<int> ppm2d_decode(const std::vector<uint8_t>& bytes, int rows,
                              int cols, int alphabet) {
    RangeDecoder dec(bytes.data(), bytes.size());
    Ppm2dModel model(alphabet);
    return model.decode(dec, rows, cols);
}

}  // namespace rjip
