#ifndef RJIP_TONAL_HPP
#define RJIP_TONAL_HPP

#include <memory>
#include <optional>

#include "rjip/inpaint.hpp"
#include "rjip/quantize.hpp"

namespace rjip {

// What values a stored sample may take after optimisation.
enum class AdmissibleKind {
    FreeReals,     // no projection (testing / analysis)
    ScalarLevels,  // nearest uniform quantisation level per channel
    CodebookSet,   // joint projection of the channel triple onto the palette
};

// State for post-processing the stored values of one channel group. The
// accumulator stays consistent with `stored` across accepted changes; both
// optimisers patch it incrementally.
struct TonalProblem {
    int width = 0, height = 0, channels = 0;
    std::vector<PixelCoord> positions;             // coding order
    std::vector<std::array<double, 3>> stored;     // current stored values
    std::vector<const Plane*> target;              // per-channel originals
    std::shared_ptr<const ShepardWeights> weights;
    AccumulatorField acc{1, 1, 1};
    std::vector<uint8_t> is_mask;

    AdmissibleKind kind = AdmissibleKind::FreeReals;
    std::optional<UniformQuantizer> quantizer;  // ScalarLevels
    const Codebook* codebook = nullptr;         // CodebookSet
    std::vector<int> labels;                    // CodebookSet, kept in sync
};

TonalProblem make_tonal_problem(int width, int height,
                                std::vector<PixelCoord> positions,
                                std::vector<std::array<double, 3>> stored,
                                std::vector<const Plane*> target,
                                std::shared_ptr<const ShepardWeights> weights);

// Unconstrained minimiser of the local squared error over the pixel's
// truncation window (non-mask pixels only). Returns the current value when
// the window is empty.
double optimal_value(const TonalProblem& p, size_t i, int channel);

// Exact change of the global squared-error sum if stored[i][channel] moves by
// delta: window term plus the mask pixel's own copied-value term.
double tonal_delta_error(const TonalProblem& p, size_t i, int channel, double delta);

struct TonalStats {
    int sweeps = 0;
    size_t changes = 0;
};

// Sweeps in coding order; per pixel/channel takes the Eq-style optimum,
// projects it onto the admissible set, and keeps the change only when the
// local (hence global) error does not increase.
TonalStats tonal_optimize_direct(TonalProblem& p, int max_sweeps = 30);

// Trial-and-error baseline: seeded random permutations over all stored channel
// values, moving one quantisation level up or down when that strictly lowers
// the global error. Scalar admissible sets only.
TonalStats tonal_optimize_random_walk(TonalProblem& p, uint32_t seed,
                                      int max_sweeps = 30);

}  // namespace rjip

#endif
