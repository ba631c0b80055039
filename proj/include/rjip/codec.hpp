#ifndef RJIP_CODEC_HPP
#define RJIP_CODEC_HPP

#include <optional>

#include "rjip/entropy.hpp"
#include "rjip/image.hpp"
#include "rjip/mask.hpp"
#include "rjip/quantize.hpp"
#include "rjip/tonal.hpp"

namespace rjip {

enum class Mode : uint8_t { ScalarRgb = 0, ScalarLp = 1, VectorRgb = 2 };

const char* mode_name(Mode m);
std::optional<Mode> mode_from_name(const std::string& name);

// Grid and quantisation parameters of one channel group. q holds the scalar
// level count, or the palette size in vector mode.
struct GroupParams {
    RegularGrid grid;
    int q = 0;
    bool operator==(const GroupParams&) const = default;
};

// Container header. Big-endian throughout; see FORMAT.md for the byte layout.
struct Header {
    uint8_t version = 1;
    Mode mode = Mode::ScalarRgb;
    uint16_t width = 0;
    uint16_t height = 0;
    std::vector<GroupParams> groups;  // 1 group (modes 0,2) or 2 (mode 1: Y, CbCr)
    int luma_index = -1;              // mode 1: f = 0.5 + 0.1 * index
    Codebook codebook;                // mode 2

    void serialize(std::vector<uint8_t>& out) const;
    static Header parse(const std::vector<uint8_t>& bytes, size_t& pos);
    size_t serialized_size() const;

    double luma_factor() const { return 0.5 + 0.1 * luma_index; }
};

// floor(3*width*height / ratio); the whole encoded file must fit inside.
size_t budget_bytes(int width, int height, double ratio);

// Resolved parameters of one encode.
struct ModeConfig {
    Mode mode = Mode::ScalarRgb;
    std::vector<GroupParams> groups;
    int luma_index = -1;
    Codebook codebook;
};

struct EncodeOptions {
    uint32_t seed = 1;
    enum class Tonal { Direct, RandomWalk, Off };
    Tonal tonal = Tonal::Direct;
    int tonal_max_sweeps = 30;
    std::optional<double> luma_factor;  // pin f instead of sweeping the grid
    bool luma_split_literal = false;    // B_Y = f*B_CbCr instead of B_Y = f*B
    int kmeans_iters = 25;
    int kmeans_restarts = 1;
    int refine_sweeps = 20;
};

struct EncodeResult {
    std::vector<uint8_t> bytes;
    RasterImage reconstruction;  // identical to what decode() returns
    Header header;
    double rgb_mse = 0.0;
    double ratio_achieved = 0.0;
    size_t distinct_mask_colors = 0;
    double luma_factor = -1.0;  // mode 1 only
    TonalStats tonal_stats;
};

struct DecodeResult {
    RasterImage image;
    Header header;
};

// Candidate grids for the parameter search. Defaults: h geometric in
// [1.5, 32] (12 samples); q in {2,4,...,256}; k in {4,8,...,256}.
struct SearchGrid {
    std::vector<double> h;
    std::vector<int> q;
    bool refine = true;
};
SearchGrid default_scalar_grid(int width, int height);
SearchGrid default_vector_grid(int width, int height);

// Best reachable configuration within the byte budget. Candidates are encoded
// without tonal optimisation; over-budget ones are discarded; minimum MSE
// wins, then h is refined locally around the winner.
ModeConfig parameter_search(const RasterImage& img, size_t budget, Mode mode,
                            const EncodeOptions& opts = {},
                            const SearchGrid* grid_override = nullptr);

// Full pipeline: search, post-processing on the winner, container emission.
// The emitted file never exceeds budget_bytes(width, height, ratio).
EncodeResult encode(const RasterImage& img, double ratio, Mode mode,
                    const EncodeOptions& opts = {});

// Encode with pinned parameters, no search and no budget enforcement
// (analysis and golden-file tooling).
EncodeResult encode_with_config(const RasterImage& img, const ModeConfig& config,
                                const EncodeOptions& opts = {});

DecodeResult decode(const std::vector<uint8_t>& bytes);

}  // namespace rjip

#endif
