#include "rjip/quantize.hpp"

#include <cmath>
#include <random>
#include <unordered_map>

namespace rjip {

bool Codebook::has_duplicates() const {
    for (size_t i = 0; i < centers.size(); ++i)
        for (size_t j = i + 1; j < centers.size(); ++j)
            if (centers[i] == centers[j]) return true;
    return false;
}

void Codebook::serialize(std::vector<uint8_t>& out) const {
    require(!centers.empty() && centers.size() <= 256, "Codebook: size must be 1..256");
    out.push_back(static_cast<uint8_t>(centers.size() - 1));
    for (const auto& c : centers) {
        out.push_back(static_cast<uint8_t>(c[0]));
        out.push_back(static_cast<uint8_t>(c[1]));
        out.push_back(static_cast<uint8_t>(c[2]));
    }
}

Codebook Codebook::deserialize(const std::vector<uint8_t>& bytes, size_t& pos) {
    if (pos >= bytes.size()) throw ParseError("codebook: missing size byte", pos);
    size_t k = static_cast<size_t>(bytes[pos]) + 1;
    ++pos;
    if (bytes.size() - pos < 3 * k)
        throw ParseError("codebook: truncated centre list", bytes.size());
    Codebook cb;
    cb.centers.resize(k);
    for (size_t i = 0; i < k; ++i) {
        cb.centers[i] = {bytes[pos], bytes[pos + 1], bytes[pos + 2]};
        pos += 3;
    }
    return cb;
}

size_t assign_nearest(const std::array<double, 3>& color, const Codebook& cb) {
    require(!cb.centers.empty(), "assign_nearest: empty codebook");
    size_t best = 0;
    double best_d = -1.0;
    for (size_t i = 0; i < cb.centers.size(); ++i) {
        double d = 0.0;
        for (int c = 0; c < 3; ++c) {
            double t = color[c] - cb.centers[i][c];
            d += t * t;
        }
        if (best_d < 0.0 || d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

namespace {

struct DistinctColors {
    std::vector<std::array<uint8_t, 3>> color;  // first-occurrence order
    std::vector<int64_t> count;
    std::vector<int> of_input;  // input index -> distinct index
};

DistinctColors dedup(const std::vector<std::array<uint8_t, 3>>& colors) {
    DistinctColors d;
    d.of_input.resize(colors.size());
    std::unordered_map<uint32_t, int> seen;
    seen.reserve(colors.size() * 2);
    for (size_t i = 0; i < colors.size(); ++i) {
        uint32_t key = (uint32_t(colors[i][0]) << 16) | (uint32_t(colors[i][1]) << 8) |
                       colors[i][2];
        auto [it, inserted] = seen.emplace(key, static_cast<int>(d.color.size()));
        if (inserted) {
            d.color.push_back(colors[i]);
            d.count.push_back(0);
        }
        d.count[it->second] += 1;
        d.of_input[i] = it->second;
    }
    return d;
}

}  // namespace

KmeansResult kmeans(const std::vector<std::array<uint8_t, 3>>& colors, int k,
                    uint32_t seed, int max_iters) {
    require(!colors.empty(), "kmeans: empty input");
    require(k >= 1 && k <= 256, "kmeans: k must be in [1,256]");

    DistinctColors d = dedup(colors);
    const int n = static_cast<int>(d.color.size());
    const int kk = std::min(k, n);

    // Seeded selection of kk distinct colours as initial centres.
    std::mt19937 rng(seed);
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    for (int i = 0; i < kk; ++i) {
        int j = i + static_cast<int>(bounded_rand(rng, static_cast<uint32_t>(n - i)));
        std::swap(order[i], order[j]);
    }
    std::vector<std::array<double, 3>> centers(kk);
    for (int i = 0; i < kk; ++i)
        centers[i] = {double(d.color[order[i]][0]), double(d.color[order[i]][1]),
                      double(d.color[order[i]][2])};

    std::vector<int> label(n, -1);
    std::vector<double> dist(n, 0.0);
    KmeansResult res;

    for (int it = 0; it < max_iters; ++it) {
        // Assignment: nearest mean, ties to the lowest index.
        bool changed = false;
#pragma omp parallel for schedule(static) reduction(|| : changed) \
    num_threads(worker_count())
        for (int i = 0; i < n; ++i) {
            double best_d = -1.0;
            int best = 0;
            for (int l = 0; l < kk; ++l) {
                double s = 0.0;
                for (int c = 0; c < 3; ++c) {
                    double t = d.color[i][c] - centers[l][c];
                    s += t * t;
                }
                if (best_d < 0.0 || s < best_d) {
                    best_d = s;
                    best = l;
                }
            }
            if (label[i] != best) {
                label[i] = best;
                changed = true;
            }
            dist[i] = best_d;
        }
        double energy = 0.0;
        for (int i = 0; i < n; ++i) energy += d.count[i] * dist[i];
        res.energy_history.push_back(energy);
        res.iterations = it + 1;
        if (!changed && it > 0) break;

        // Update: centroids via exact integer sums, so the result does not
        // depend on accumulation order.
        std::vector<std::array<int64_t, 3>> sum(kk, {0, 0, 0});
        std::vector<int64_t> cnt(kk, 0);
        for (int i = 0; i < n; ++i) {
            int l = label[i];
            for (int c = 0; c < 3; ++c) sum[l][c] += d.count[i] * d.color[i][c];
            cnt[l] += d.count[i];
        }
        std::vector<int> empty;
        for (int l = 0; l < kk; ++l) {
            if (cnt[l] == 0) {
                empty.push_back(l);
                continue;
            }
            for (int c = 0; c < 3; ++c)
                centers[l][c] = static_cast<double>(sum[l][c]) / cnt[l];
        }
        if (!empty.empty()) {
            // Re-seed each empty cluster to the point farthest from its centre.
            std::vector<double> far(n);
            for (int i = 0; i < n; ++i) {
                double s = 0.0;
                for (int c = 0; c < 3; ++c) {
                    double t = d.color[i][c] - centers[label[i]][c];
                    s += t * t;
                }
                far[i] = s;
            }
            for (int l : empty) {
                int pick = 0;
                for (int i = 1; i < n; ++i)
                    if (far[i] > far[pick]) pick = i;
                centers[l] = {double(d.color[pick][0]), double(d.color[pick][1]),
                              double(d.color[pick][2])};
                far[pick] = -1.0;
            }
        }
    }

    res.codebook.centers.resize(kk);
    for (int l = 0; l < kk; ++l)
        for (int c = 0; c < 3; ++c)
            res.codebook.centers[l][c] =
                std::clamp<int>(static_cast<int>(std::lround(centers[l][c])), 0, 255);
    res.labels.resize(colors.size());
    for (size_t i = 0; i < colors.size(); ++i) res.labels[i] = label[d.of_input[i]];
    return res;
}

KmeansResult kmeans_best_of(const std::vector<std::array<uint8_t, 3>>& colors,
                            int k, uint32_t seed, int restarts, int max_iters) {
    require(restarts >= 1, "kmeans_best_of: restarts must be >= 1");
    KmeansResult best;
    for (int r = 0; r < restarts; ++r) {
        KmeansResult run = kmeans(colors, k, seed + static_cast<uint32_t>(r), max_iters);
        if (r == 0 || run.energy() < best.energy()) best = std::move(run);
    }
    return best;
}

Codebook refine_codebook(const Codebook& cb, const std::vector<int>& labels,
                         const std::vector<PixelCoord>& positions,
                         const RasterImage& original, const ShepardWeights& weights,
                         int max_sweeps) {
    require(labels.size() == positions.size(), "refine_codebook: label/position mismatch");
    const int k = static_cast<int>(cb.centers.size());
    for (int l : labels) require(l >= 0 && l < k, "refine_codebook: label out of range");

    const int W = original.width, H = original.height;
    const size_t npix = original.pixel_count();

    Codebook out = cb;
    AccumulatorField acc(W, H, 3);
    std::vector<uint8_t> is_mask(npix, 0);
    std::vector<std::vector<int>> members(k);
    for (size_t i = 0; i < positions.size(); ++i) {
        std::array<double, 3> val = {double(out.centers[labels[i]][0]),
                                     double(out.centers[labels[i]][1]),
                                     double(out.centers[labels[i]][2])};
        acc.add_known_pixel(positions[i], val, weights);
        is_mask[acc.index(positions[i])] = 1;
        members[labels[i]].push_back(static_cast<int>(i));
    }

    Plane wl(npix, 0.0);          // per-label weight field
    std::vector<uint32_t> stamp(npix, 0);
    uint32_t epoch = 0;
    std::vector<int> touched;
    const int R = weights.radius_int();

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool any = false;
        for (int l = 0; l < k; ++l) {
            if (members[l].empty()) continue;
            ++epoch;
            touched.clear();
            for (int mi : members[l]) {
                const PixelCoord pos = positions[mi];
                const int ylo = std::max(-R, -pos.y), yhi = std::min(R, H - 1 - pos.y);
                for (int dy = ylo; dy <= yhi; ++dy) {
                    const double* row = weights.row(dy);
                    const int xlo = std::max(weights.span_lo(dy), -pos.x);
                    const int xhi = std::min(weights.span_hi(dy), W - 1 - pos.x);
                    size_t base = static_cast<size_t>(pos.y + dy) * W + pos.x;
                    for (int dx = xlo; dx <= xhi; ++dx) {
                        size_t idx = base + dx;
                        if (stamp[idx] != epoch) {
                            stamp[idx] = epoch;
                            wl[idx] = row[dx + R];
                            if (!is_mask[idx]) touched.push_back(static_cast<int>(idx));
                        } else {
                            wl[idx] += row[dx + R];
                        }
                    }
                }
            }

            double best_delta = 0.0;
            int best_c = -1, best_step = 0;
            for (int c = 0; c < 3; ++c) {
                for (int step : {-1, 1}) {
                    int nc = out.centers[l][c] + step;
                    if (nc < 0 || nc > 255) continue;
                    const double* f = original.planes[c].data();
                    const double* v = acc.value_sums(c).data();
                    const double* ws = acc.weight_sums().data();
                    double delta = 0.0;
                    for (int idx : touched) {
                        double rec_old = v[idx] / ws[idx];
                        double rec_new = (v[idx] + step * wl[idx]) / ws[idx];
                        double e_new = f[idx] - rec_new;
                        double e_old = f[idx] - rec_old;
                        delta += e_new * e_new - e_old * e_old;
                    }
                    for (int mi : members[l]) {
                        size_t idx = acc.index(positions[mi]);
                        double e_new = f[idx] - nc;
                        double e_old = f[idx] - out.centers[l][c];
                        delta += e_new * e_new - e_old * e_old;
                    }
                    if (delta < best_delta) {
                        best_delta = delta;
                        best_c = c;
                        best_step = step;
                    }
                }
            }
            if (best_c >= 0) {
                out.centers[l][best_c] += best_step;
                // patch the accumulator for the accepted move
                for (int mi : members[l])
                    acc.patch_known_pixel(positions[mi], best_c, best_step, weights);
                any = true;
            }
        }
        if (!any) break;
    }
    return out;
}

}  // namespace rjip
