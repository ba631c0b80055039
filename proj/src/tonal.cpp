#include "rjip/tonal.hpp"

#include <cmath>
#include <random>

namespace rjip {

TonalProblem make_tonal_problem(int width, int height,
                                std::vector<PixelCoord> positions,
                                std::vector<std::array<double, 3>> stored,
                                std::vector<const Plane*> target,
                                std::shared_ptr<const ShepardWeights> weights) {
    require(!positions.empty(), "tonal: empty mask");
    require(positions.size() == stored.size(), "tonal: positions/stored mismatch");
    require(!target.empty() && target.size() <= 3, "tonal: 1..3 target planes");

    TonalProblem p;
    p.width = width;
    p.height = height;
    p.channels = static_cast<int>(target.size());
    p.positions = std::move(positions);
    p.stored = std::move(stored);
    p.target = std::move(target);
    p.weights = std::move(weights);
    p.acc = AccumulatorField(width, height, p.channels);
    p.is_mask.assign(static_cast<size_t>(width) * height, 0);
    for (size_t i = 0; i < p.positions.size(); ++i) {
        p.acc.add_known_pixel(p.positions[i], p.stored[i], *p.weights);
        p.is_mask[p.acc.index(p.positions[i])] = 1;
    }
    return p;
}

namespace {

// One window scan: S2 = sum w^2/W^2 and, per channel, S1_c = sum
// (w/W)(f - v/W) over in-bounds non-mask pixels.
struct WindowSums {
    double s2 = 0.0;
    std::array<double, 3> s1{0.0, 0.0, 0.0};
};

WindowSums window_sums(const TonalProblem& p, size_t i) {
    WindowSums out;
    const ShepardWeights& w = *p.weights;
    const PixelCoord pos = p.positions[i];
    const int R = w.radius_int();
    const int ylo = std::max(-R, -pos.y);
    const int yhi = std::min(R, p.height - 1 - pos.y);
    const double* ws = p.acc.weight_sums().data();
    for (int dy = ylo; dy <= yhi; ++dy) {
        const double* row = w.row(dy);
        const int xlo = std::max(w.span_lo(dy), -pos.x);
        const int xhi = std::min(w.span_hi(dy), p.width - 1 - pos.x);
        size_t base = static_cast<size_t>(pos.y + dy) * p.width + pos.x;
        for (int dx = xlo; dx <= xhi; ++dx) {
            size_t idx = base + dx;
            if (p.is_mask[idx] || ws[idx] <= 0.0) continue;
            double a = row[dx + R] / ws[idx];
            out.s2 += a * a;
            for (int c = 0; c < p.channels; ++c) {
                double resid = (*p.target[c])[idx] - p.acc.value_sum_at(c, idx) / ws[idx];
                out.s1[c] += a * resid;
            }
        }
    }
    return out;
}

double own_term(const TonalProblem& p, size_t i, int channel, double delta) {
    size_t idx = p.acc.index(p.positions[i]);
    double f = (*p.target[channel])[idx];
    double u = p.stored[i][channel];
    double e_new = f - (u + delta);
    double e_old = f - u;
    return e_new * e_new - e_old * e_old;
}

void apply_change(TonalProblem& p, size_t i, int channel, double delta) {
    p.acc.patch_known_pixel(p.positions[i], channel, delta, *p.weights);
    p.stored[i][channel] += delta;
}

// Nearest admissible dequantised value; checks level neighbours so the
// clamped top interval is handled exactly.
int project_level(double u, const UniformQuantizer& qz) {
    int l = static_cast<int>(std::lround(u * qz.q / 256.0 - 0.5));
    l = std::clamp(l, 0, qz.q - 1);
    int best = l;
    double best_d = std::abs(qz.dequantize(l) - u);
    for (int cand : {l - 1, l + 1}) {
        if (cand < 0 || cand >= qz.q) continue;
        double d = std::abs(qz.dequantize(cand) - u);
        if (d < best_d || (d == best_d && cand < best)) {
            best_d = d;
            best = cand;
        }
    }
    return best;
}

}  // namespace

double optimal_value(const TonalProblem& p, size_t i, int channel) {
    require(i < p.positions.size(), "optimal_value: index out of range");
    require(channel >= 0 && channel < p.channels, "optimal_value: bad channel");
    WindowSums s = window_sums(p, i);
    if (s.s2 <= 0.0) return p.stored[i][channel];
    return p.stored[i][channel] + s.s1[channel] / s.s2;
}

double tonal_delta_error(const TonalProblem& p, size_t i, int channel, double delta) {
    WindowSums s = window_sums(p, i);
    return delta * delta * s.s2 - 2.0 * delta * s.s1[channel] +
           own_term(p, i, channel, delta);
}

TonalStats tonal_optimize_direct(TonalProblem& p, int max_sweeps) {
    TonalStats stats;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        size_t changes = 0;
        for (size_t i = 0; i < p.positions.size(); ++i) {
            WindowSums s = window_sums(p, i);
            if (s.s2 <= 0.0) continue;

            if (p.kind == AdmissibleKind::CodebookSet) {
                std::array<double, 3> want;
                for (int c = 0; c < 3; ++c)
                    want[c] = p.stored[i][c] + s.s1[c] / s.s2;
                size_t idx = assign_nearest(want, *p.codebook);
                if (static_cast<int>(idx) == p.labels[i]) continue;
                double delta_err = 0.0;
                std::array<double, 3> delta;
                for (int c = 0; c < 3; ++c) {
                    delta[c] = p.codebook->centers[idx][c] - p.stored[i][c];
                    delta_err += delta[c] * delta[c] * s.s2 - 2.0 * delta[c] * s.s1[c] +
                                 own_term(p, i, c, delta[c]);
                }
                if (delta_err <= 0.0) {
                    for (int c = 0; c < 3; ++c)
                        if (delta[c] != 0.0) apply_change(p, i, c, delta[c]);
                    p.labels[i] = static_cast<int>(idx);
                    ++changes;
                }
                continue;
            }

            for (int c = 0; c < p.channels; ++c) {
                double want = p.stored[i][c] + s.s1[c] / s.s2;
                double projected;
                if (p.kind == AdmissibleKind::ScalarLevels) {
                    projected = p.quantizer->dequantize(project_level(want, *p.quantizer));
                } else {
                    projected = want;
                }
                double delta = projected - p.stored[i][c];
                if (std::abs(delta) < 1e-9) continue;  // admissible spacings are >= 0.5
                double delta_err = delta * delta * s.s2 - 2.0 * delta * s.s1[c] +
                                   own_term(p, i, c, delta);
                if (delta_err <= 0.0) {
                    apply_change(p, i, c, delta);
                    ++changes;
                    // refresh residual sums for the remaining channels
                    if (c + 1 < p.channels) s = window_sums(p, i);
                }
            }
        }
        stats.sweeps = sweep + 1;
        stats.changes += changes;
        if (changes == 0) break;
    }
    return stats;
}

TonalStats tonal_optimize_random_walk(TonalProblem& p, uint32_t seed,
                                      int max_sweeps) {
    require(p.kind == AdmissibleKind::ScalarLevels,
            "random walk requires a scalar admissible set");
    const UniformQuantizer& qz = *p.quantizer;

    std::vector<std::pair<uint32_t, uint32_t>> items;  // (mask index, channel)
    items.reserve(p.positions.size() * p.channels);
    for (uint32_t i = 0; i < p.positions.size(); ++i)
        for (uint32_t c = 0; c < static_cast<uint32_t>(p.channels); ++c)
            items.emplace_back(i, c);

    std::mt19937 rng(seed);
    TonalStats stats;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        shuffle_deterministic(items, rng);
        size_t accepted = 0;
        for (auto [i, c] : items) {
            int level = qz.quantize(clamp255(p.stored[i][c]));
            WindowSums s = window_sums(p, i);
            double best_delta_err = 0.0;
            double best_delta = 0.0;
            for (int step : {1, -1}) {
                int nl = level + step;
                if (nl < 0 || nl >= qz.q) continue;
                double delta = qz.dequantize(nl) - p.stored[i][c];
                double derr = delta * delta * s.s2 - 2.0 * delta * s.s1[c] +
                              own_term(p, i, c, delta);
                if (derr < best_delta_err) {
                    best_delta_err = derr;
                    best_delta = delta;
                }
            }
            if (best_delta_err < 0.0) {
                apply_change(p, i, c, best_delta);
                ++accepted;
            }
        }
        stats.sweeps = sweep + 1;
        stats.changes += accepted;
        if (accepted == 0) break;
    }
    return stats;
}

}  // namespace rjip
