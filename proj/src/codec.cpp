#include "rjip/codec.hpp"

#include <cmath>
#include <map>
#include <unordered_set>

#include "rjip/inpaint.hpp"

namespace rjip {

namespace {

constexpr char kMagic[4] = {'R', 'J', 'P', 'C'};
constexpr double kLumaGrid[5] = {0.5, 0.6, 0.7, 0.8, 0.9};
constexpr double kMaxFixedH = 65535.0 / 256.0;

void put_be16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v & 0xFF));
}

void put_be32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v & 0xFF));
}

uint16_t get_be16(const std::vector<uint8_t>& b, size_t& pos) {
    if (b.size() - pos < 2) throw ParseError("truncated header field", pos);
    uint16_t v = static_cast<uint16_t>((b[pos] << 8) | b[pos + 1]);
    pos += 2;
    return v;
}

uint32_t get_be32(const std::vector<uint8_t>& b, size_t& pos) {
    if (b.size() - pos < 4) throw ParseError("truncated length field", pos);
    uint32_t v = (uint32_t(b[pos]) << 24) | (uint32_t(b[pos + 1]) << 16) |
                 (uint32_t(b[pos + 2]) << 8) | b[pos + 3];
    pos += 4;
    return v;
}

uint8_t get_u8(const std::vector<uint8_t>& b, size_t& pos, const char* what) {
    if (pos >= b.size()) throw ParseError(std::string("missing ") + what, pos);
    return b[pos++];
}

int stream_count(Mode mode) {
    switch (mode) {
        case Mode::ScalarRgb: return 3;
        case Mode::ScalarLp: return 2;
        case Mode::VectorRgb: return 1;
    }
    return 0;
}

}  // namespace

const char* mode_name(Mode m) {
    switch (m) {
        case Mode::ScalarRgb: return "rgb";
        case Mode::ScalarLp: return "lp";
        case Mode::VectorRgb: return "vector";
    }
    return "?";
}

std::optional<Mode> mode_from_name(const std::string& name) {
    if (name == "rgb") return Mode::ScalarRgb;
    if (name == "lp") return Mode::ScalarLp;
    if (name == "vector") return Mode::VectorRgb;
    return std::nullopt;
}

size_t Header::serialized_size() const {
    size_t s = 10 + groups.size() * 3;
    if (mode == Mode::ScalarLp) s += 1;
    if (mode == Mode::VectorRgb) s += codebook.serialized_size();
    return s;
}

void Header::serialize(std::vector<uint8_t>& out) const {
    require(width >= 1 && height >= 1, "header: empty dimensions");
    out.insert(out.end(), kMagic, kMagic + 4);
    out.push_back(version);
    out.push_back(static_cast<uint8_t>(mode));
    put_be16(out, width);
    put_be16(out, height);
    switch (mode) {
        case Mode::ScalarRgb:
            require(groups.size() == 1, "header: mode 0 has one group");
            break;
        case Mode::ScalarLp:
            require(groups.size() == 2, "header: mode 1 has two groups");
            require(luma_index >= 0 && luma_index <= 4, "header: bad luma index");
            out.push_back(static_cast<uint8_t>(luma_index));
            break;
        case Mode::VectorRgb:
            require(groups.size() == 1, "header: mode 2 has one group");
            require(groups[0].q == static_cast<int>(codebook.size()),
                    "header: palette size mismatch");
            break;
    }
    for (const auto& g : groups) {
        require(g.q >= 1 && g.q <= 256, "header: q out of range");
        put_be16(out, g.grid.h_fixed);
        out.push_back(static_cast<uint8_t>(g.q - 1));
    }
    if (mode == Mode::VectorRgb) codebook.serialize(out);
}

Header Header::parse(const std::vector<uint8_t>& bytes, size_t& pos) {
    if (bytes.size() < pos + 10)
        throw ParseError("file shorter than fixed header", pos);
    for (int i = 0; i < 4; ++i)
        if (bytes[pos + i] != static_cast<uint8_t>(kMagic[i]))
            throw ParseError("bad magic (expected RJPC)", pos + i);
    pos += 4;
    Header h;
    h.version = get_u8(bytes, pos, "version");
    if (h.version != 1) throw ParseError("unsupported version", pos - 1);
    uint8_t mode_byte = get_u8(bytes, pos, "mode");
    if (mode_byte > 2) throw ParseError("unknown mode", pos - 1);
    h.mode = static_cast<Mode>(mode_byte);
    h.width = get_be16(bytes, pos);
    h.height = get_be16(bytes, pos);
    if (h.width == 0 || h.height == 0) throw ParseError("zero dimension", pos - 4);

    if (h.mode == Mode::ScalarLp) {
        h.luma_index = get_u8(bytes, pos, "luma factor index");
        if (h.luma_index > 4)
            throw ParseError("luma factor index out of range", pos - 1);
    }
    int ngroups = h.mode == Mode::ScalarLp ? 2 : 1;
    for (int g = 0; g < ngroups; ++g) {
        GroupParams p;
        size_t field_pos = pos;
        p.grid.h_fixed = get_be16(bytes, pos);
        if (p.grid.h_fixed < 256) throw ParseError("grid spacing below 1", field_pos);
        if (p.grid.h() > std::min(h.width, h.height))
            throw ParseError("grid spacing exceeds image", field_pos);
        p.q = get_u8(bytes, pos, "q") + 1;
        if (h.mode != Mode::VectorRgb && p.q < 2)
            throw ParseError("scalar q below 2", pos - 1);
        h.groups.push_back(p);
    }
    if (h.mode == Mode::VectorRgb) {
        size_t cb_pos = pos;
        h.codebook = Codebook::deserialize(bytes, pos);
        if (static_cast<int>(h.codebook.size()) != h.groups[0].q)
            throw ParseError("palette size disagrees with group parameter", cb_pos);
    }
    return h;
}

size_t budget_bytes(int width, int height, double ratio) {
    require(width > 0 && height > 0, "budget_bytes: empty image");
    require(ratio > 1.0, "budget_bytes: ratio must exceed 1");
    return static_cast<size_t>(std::floor(3.0 * width * height / ratio));
}

// ---------------------------------------------------------------------------
// Scalar channel groups: joint inpainting and prediction.
// ---------------------------------------------------------------------------

namespace {

enum class StreamLayout { PerChannel, SingleShared };

struct ScalarArtifacts {
    int width = 0, height = 0;
    RegularGrid grid;
    int q = 0;
    int channels = 0;
    StreamLayout layout = StreamLayout::SingleShared;
    std::vector<PixelCoord> positions;
    std::shared_ptr<const ShepardWeights> weights;
    std::vector<std::vector<int>> levels;  // [channel][point]
    std::vector<Plane> recon;
    std::vector<std::vector<uint8_t>> streams;

    size_t payload_bytes() const {
        size_t s = 0;
        for (const auto& b : streams) s += 4 + b.size();
        return s;
    }

    std::vector<std::array<double, 3>> stored() const {
        UniformQuantizer qz(q);
        std::vector<std::array<double, 3>> out(positions.size(), {0.0, 0.0, 0.0});
        for (size_t t = 0; t < positions.size(); ++t)
            for (int c = 0; c < channels; ++c) out[t][c] = qz.dequantize(levels[c][t]);
        return out;
    }
};

// One pass of the mirrored encoder/decoder state machine. `code` receives
// (point index, channel, predicted level) and returns the coded level; it
// either emits a residual or consumes one. Prediction quantises the partial
// inpainting of everything coded before the current point.
template <typename CodeFn>
AccumulatorField scalar_pass(int width, int height,
                             const std::vector<PixelCoord>& mask,
                             const ShepardWeights& wts, int q, int channels,
                             CodeFn&& code) {
    UniformQuantizer qz(q);
    AccumulatorField acc(width, height, channels);
    std::array<double, 3> vals{0.0, 0.0, 0.0};
    for (size_t t = 0; t < mask.size(); ++t) {
        for (int c = 0; c < channels; ++c) {
            double pred = clamp255(acc.predict_at(mask[t], c));
            int pred_level = qz.quantize(pred);
            int level = code(t, c, pred_level);
            vals[c] = qz.dequantize(level);
        }
        acc.add_known_pixel(mask[t], vals, wts);
    }
    return acc;
}

ScalarArtifacts scalar_encode_with_levels(int width, int height, RegularGrid grid,
                                          int q, StreamLayout layout, int channels,
                                          std::vector<PixelCoord> positions,
                                          std::shared_ptr<const ShepardWeights> wts,
                                          std::vector<std::vector<int>> levels) {
    ScalarArtifacts art;
    art.width = width;
    art.height = height;
    art.grid = grid;
    art.q = q;
    art.channels = channels;
    art.layout = layout;
    art.positions = std::move(positions);
    art.weights = std::move(wts);
    art.levels = std::move(levels);

    const int nstreams = layout == StreamLayout::PerChannel ? channels : 1;
    art.streams.assign(nstreams, {});
    std::vector<RangeEncoder> encs;
    std::vector<AdaptiveModel> models;
    encs.reserve(nstreams);
    models.reserve(nstreams);
    for (int s = 0; s < nstreams; ++s) {
        encs.emplace_back(art.streams[s]);
        models.emplace_back(q);
    }
    auto slot = [&](int c) { return layout == StreamLayout::PerChannel ? c : 0; };

    AccumulatorField acc = scalar_pass(
        width, height, art.positions, *art.weights, q, channels,
        [&](size_t t, int c, int pred_level) {
            int level = art.levels[c][t];
            int r = level - pred_level;
            if (r < 0) r += q;
            models[slot(c)].encode(encs[slot(c)], r);
            return level;
        });
    for (auto& e : encs) e.flush();
    art.recon = finalize_reconstruction(acc, art.positions, art.stored());
    return art;
}

ScalarArtifacts scalar_encode_group(const std::vector<const Plane*>& src,
                                    int width, int height, RegularGrid grid, int q,
                                    StreamLayout layout) {
    const int channels = static_cast<int>(src.size());
    auto positions = build_regular_mask(width, height, grid);
    auto wts = weights_for(compute_sigma(width, height, positions.size()));

    UniformQuantizer qz(q);
    std::vector<std::vector<int>> levels(channels,
                                         std::vector<int>(positions.size()));
    for (size_t t = 0; t < positions.size(); ++t) {
        size_t idx = static_cast<size_t>(positions[t].y) * width + positions[t].x;
        for (int c = 0; c < channels; ++c)
            levels[c][t] = qz.quantize(clamp255((*src[c])[idx]));
    }
    return scalar_encode_with_levels(width, height, grid, q, layout, channels,
                                     std::move(positions), std::move(wts),
                                     std::move(levels));
}

ScalarArtifacts scalar_decode_group(const std::vector<std::vector<uint8_t>>& streams,
                                    int width, int height, RegularGrid grid, int q,
                                    int channels, StreamLayout layout) {
    ScalarArtifacts art;
    art.width = width;
    art.height = height;
    art.grid = grid;
    art.q = q;
    art.channels = channels;
    art.layout = layout;
    art.positions = build_regular_mask(width, height, grid);
    art.weights = weights_for(compute_sigma(width, height, art.positions.size()));
    art.levels.assign(channels, std::vector<int>(art.positions.size()));
    art.streams = streams;

    const int nstreams = layout == StreamLayout::PerChannel ? channels : 1;
    require(static_cast<int>(streams.size()) == nstreams,
            "scalar_decode_group: stream count mismatch");
    std::vector<RangeDecoder> decs;
    std::vector<AdaptiveModel> models;
    decs.reserve(nstreams);
    models.reserve(nstreams);
    for (int s = 0; s < nstreams; ++s) {
        decs.emplace_back(streams[s].data(), streams[s].size());
        models.emplace_back(q);
    }
    auto slot = [&](int c) { return layout == StreamLayout::PerChannel ? c : 0; };

    AccumulatorField acc = scalar_pass(
        width, height, art.positions, *art.weights, q, channels,
        [&](size_t t, int c, int pred_level) {
            int r = models[slot(c)].decode(decs[slot(c)]);
            int level = (pred_level + r) % q;
            art.levels[c][t] = level;
            return level;
        });
    art.recon = finalize_reconstruction(acc, art.positions, art.stored());
    return art;
}

// Tonal optimisation on one scalar group, then re-encode. The optimised
// levels are kept only when the re-encoded payload still fits the group
// budget; residual statistics can shift after optimisation.
void tonal_scalar_group(ScalarArtifacts& art, const std::vector<const Plane*>& targets,
                        const EncodeOptions& opts, size_t group_budget,
                        TonalStats* stats_out) {
    if (opts.tonal == EncodeOptions::Tonal::Off) return;
    TonalProblem p = make_tonal_problem(art.width, art.height, art.positions,
                                        art.stored(), targets, art.weights);
    p.kind = AdmissibleKind::ScalarLevels;
    p.quantizer = UniformQuantizer(art.q);
    TonalStats stats;
    if (opts.tonal == EncodeOptions::Tonal::Direct)
        stats = tonal_optimize_direct(p, opts.tonal_max_sweeps);
    else
        stats = tonal_optimize_random_walk(p, opts.seed, opts.tonal_max_sweeps);
    if (stats_out) {
        stats_out->sweeps += stats.sweeps;
        stats_out->changes += stats.changes;
    }
    if (stats.changes == 0) return;

    UniformQuantizer qz(art.q);
    std::vector<std::vector<int>> levels(art.channels,
                                         std::vector<int>(art.positions.size()));
    for (size_t t = 0; t < art.positions.size(); ++t)
        for (int c = 0; c < art.channels; ++c)
            levels[c][t] = qz.quantize(clamp255(p.stored[t][c]));

    ScalarArtifacts opt = scalar_encode_with_levels(
        art.width, art.height, art.grid, art.q, art.layout, art.channels,
        art.positions, art.weights, std::move(levels));
    if (opt.payload_bytes() <= group_budget) art = std::move(opt);
}

// ---------------------------------------------------------------------------
// Vector channel group: palette labels coded with 2-D PPM.
// ---------------------------------------------------------------------------

struct VectorArtifacts {
    int width = 0, height = 0;
    RegularGrid grid;
    GridDims dims;
    std::vector<PixelCoord> positions;
    std::shared_ptr<const ShepardWeights> weights;
    Codebook codebook;
    std::vector<int> labels;
    std::vector<Plane> recon;  // 3 planes
    std::vector<uint8_t> stream;

    size_t payload_bytes() const { return 4 + stream.size(); }
    size_t file_bytes() const {
        Header h;
        h.mode = Mode::VectorRgb;
        h.width = static_cast<uint16_t>(width);
        h.height = static_cast<uint16_t>(height);
        h.groups.push_back({grid, static_cast<int>(codebook.size())});
        h.codebook = codebook;
        return h.serialized_size() + payload_bytes();
    }

    std::vector<std::array<double, 3>> stored() const {
        std::vector<std::array<double, 3>> out(positions.size());
        for (size_t t = 0; t < positions.size(); ++t) {
            const auto& c = codebook.centers[labels[t]];
            out[t] = {double(c[0]), double(c[1]), double(c[2])};
        }
        return out;
    }
};

std::vector<Plane> vector_reconstruct(int width, int height,
                                      const std::vector<PixelCoord>& positions,
                                      const ShepardWeights& wts,
                                      const std::vector<std::array<double, 3>>& stored) {
    AccumulatorField acc(width, height, 3);
    for (size_t t = 0; t < positions.size(); ++t)
        acc.add_known_pixel(positions[t], stored[t], wts);
    return finalize_reconstruction(acc, positions, stored);
}

VectorArtifacts vector_from_labels(int width, int height, RegularGrid grid,
                                   GridDims dims, std::vector<PixelCoord> positions,
                                   std::shared_ptr<const ShepardWeights> wts,
                                   Codebook cb, std::vector<int> labels) {
    VectorArtifacts art;
    art.width = width;
    art.height = height;
    art.grid = grid;
    art.dims = dims;
    art.positions = std::move(positions);
    art.weights = std::move(wts);
    art.codebook = std::move(cb);
    art.labels = std::move(labels);
    art.stream = ppm2d_encode(art.labels, art.dims.rows, art.dims.cols,
                              static_cast<int>(art.codebook.size()));
    art.recon = vector_reconstruct(width, height, art.positions, *art.weights,
                                   art.stored());
    return art;
}

VectorArtifacts vector_encode_group(const RasterImage& img, RegularGrid grid, int k,
                                    const EncodeOptions& opts) {
    auto positions = build_regular_mask(img.width, img.height, grid);
    GridDims dims = grid_dims(img.width, img.height, grid);
    auto wts = weights_for(compute_sigma(img.width, img.height, positions.size()));

    std::vector<std::array<uint8_t, 3>> colors(positions.size());
    for (size_t t = 0; t < positions.size(); ++t) {
        size_t idx = static_cast<size_t>(positions[t].y) * img.width + positions[t].x;
        for (int c = 0; c < 3; ++c)
            colors[t][c] =
                static_cast<uint8_t>(std::lround(clamp255(img.planes[c][idx])));
    }
    KmeansResult km = kmeans_best_of(colors, k, opts.seed, opts.kmeans_restarts,
                                     opts.kmeans_iters);
    return vector_from_labels(img.width, img.height, grid, dims,
                              std::move(positions), std::move(wts),
                              std::move(km.codebook), std::move(km.labels));
}

VectorArtifacts vector_decode_group(const std::vector<uint8_t>& stream, int width,
                                    int height, RegularGrid grid,
                                    const Codebook& cb) {
    GridDims dims = grid_dims(width, height, grid);
    std::vector<int> labels = ppm2d_decode(stream, dims.rows, dims.cols,
                                           static_cast<int>(cb.size()));
    VectorArtifacts art;
    art.width = width;
    art.height = height;
    art.grid = grid;
    art.dims = dims;
    art.positions = build_regular_mask(width, height, grid);
    art.weights = weights_for(compute_sigma(width, height, art.positions.size()));
    art.codebook = cb;
    art.labels = std::move(labels);
    art.stream = stream;
    art.recon = vector_reconstruct(width, height, art.positions, *art.weights,
                                   art.stored());
    return art;
}

// ---------------------------------------------------------------------------
// Parameter search.
// ---------------------------------------------------------------------------

struct CandidateEval {
    double mse = HUGE_VAL;
    size_t bytes = SIZE_MAX;  // group payload (scalar) or whole file (vector)
};

using EvalKey = std::pair<uint16_t, int>;
using EvalMemo = std::map<EvalKey, CandidateEval>;

std::optional<uint16_t> snap_h(double h, int width, int height) {
    if (h < 1.0 || h > kMaxFixedH) return std::nullopt;
    RegularGrid g = RegularGrid::from_real(h);
    if (g.h() > std::min(width, height)) return std::nullopt;
    return g.h_fixed;
}

// Coarse grid scan, then local geometric refinement of h at the winning q.
// Evaluations are budget-independent and memoised, so repeated searches with
// different budgets (the luma-factor sweep) reuse them.
template <typename EvalFn>
std::optional<GroupParams> pick_best(const SearchGrid& grid, int width, int height,
                                     size_t budget, EvalFn&& eval, EvalMemo& memo) {
    std::vector<EvalKey> todo;
    std::vector<EvalKey> order;
    for (double h : grid.h) {
        auto hfp = snap_h(h, width, height);
        if (!hfp) continue;
        for (int q : grid.q) {
            EvalKey key{*hfp, q};
            if (std::find(order.begin(), order.end(), key) != order.end()) continue;
            order.push_back(key);
            if (!memo.count(key)) todo.push_back(key);
        }
    }
    if (order.empty()) return std::nullopt;

    std::vector<CandidateEval> results(todo.size());
#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
    for (long long i = 0; i < static_cast<long long>(todo.size()); ++i) {
        RegularGrid g;
        g.h_fixed = todo[i].first;
        results[i] = eval(g, todo[i].second);
    }
    for (size_t i = 0; i < todo.size(); ++i) memo[todo[i]] = results[i];

    std::optional<EvalKey> best;
    double best_mse = HUGE_VAL;
    for (const EvalKey& key : order) {
        const CandidateEval& e = memo[key];
        if (e.bytes > budget) continue;
        if (e.mse < best_mse) {
            best_mse = e.mse;
            best = key;
        }
    }
    if (!best) return std::nullopt;

    auto eval_memo = [&](uint16_t hfp, int q) -> const CandidateEval& {
        EvalKey key{hfp, q};
        auto it = memo.find(key);
        if (it == memo.end()) {
            RegularGrid g;
            g.h_fixed = hfp;
            it = memo.emplace(key, eval(g, q)).first;
        }
        return it->second;
    };

    if (grid.refine && grid.h.size() >= 2) {
        const int q = best->second;
        double step = grid.h[1] / grid.h[0];
        if (step > 1.0) {
            double h_best = best->first / 256.0;
            double lo = std::max(1.0, h_best / step);
            double hi = std::min({kMaxFixedH, double(std::min(width, height)),
                                  h_best * step});
            for (int round = 0; round < 3; ++round) {
                double m1 = std::pow(lo, 2.0 / 3) * std::pow(hi, 1.0 / 3);
                double m2 = std::pow(lo, 1.0 / 3) * std::pow(hi, 2.0 / 3);
                double e1 = HUGE_VAL, e2 = HUGE_VAL;
                if (auto fp = snap_h(m1, width, height)) {
                    const CandidateEval& e = eval_memo(*fp, q);
                    if (e.bytes <= budget) e1 = e.mse;
                    if (e1 < best_mse) {
                        best_mse = e1;
                        best = EvalKey{*fp, q};
                    }
                }
                if (auto fp = snap_h(m2, width, height)) {
                    const CandidateEval& e = eval_memo(*fp, q);
                    if (e.bytes <= budget) e2 = e.mse;
                    if (e2 < best_mse) {
                        best_mse = e2;
                        best = EvalKey{*fp, q};
                    }
                }
                if (e1 <= e2)
                    hi = m2;
                else
                    lo = m1;
            }
        }
    }

    GroupParams out;
    out.grid.h_fixed = best->first;
    out.q = best->second;
    return out;
}

std::vector<double> geometric_h_samples() {
    std::vector<double> h(12);
    for (int i = 0; i < 12; ++i)
        h[i] = 1.5 * std::pow(32.0 / 1.5, i / 11.0);
    return h;
}

}  // namespace

SearchGrid default_scalar_grid(int width, int height) {
    (void)width;
    (void)height;
    SearchGrid g;
    g.h = geometric_h_samples();
    g.q = {2, 4, 8, 16, 32, 64, 128, 256};
    return g;
}

SearchGrid default_vector_grid(int width, int height) {
    (void)width;
    (void)height;
    SearchGrid g;
    g.h = geometric_h_samples();
    g.q = {4, 8, 16, 32, 64, 128, 256};
    return g;
}

// ---------------------------------------------------------------------------
// Mode pipelines.
// ---------------------------------------------------------------------------

namespace {

size_t distinct_scalar_colors(const std::vector<std::array<double, 3>>& stored,
                              int channels) {
    std::unordered_set<uint32_t> keys;
    keys.reserve(stored.size());
    for (const auto& s : stored) {
        uint32_t key = 0;
        for (int c = 0; c < channels; ++c)
            key = (key << 8) | static_cast<uint32_t>(std::lround(clamp255(s[c])));
        keys.insert(key);
    }
    return keys.size();
}

size_t distinct_vector_colors(const Codebook& cb, const std::vector<int>& labels) {
    std::unordered_set<uint32_t> keys;
    for (int l : labels) {
        const auto& c = cb.centers[l];
        keys.insert((uint32_t(c[0]) << 16) | (uint32_t(c[1]) << 8) | uint32_t(c[2]));
    }
    return keys.size();
}

std::vector<uint8_t> emit_container(const Header& h,
                                    const std::vector<const std::vector<uint8_t>*>& streams) {
    require(static_cast<int>(streams.size()) == stream_count(h.mode),
            "emit_container: stream count mismatch");
    std::vector<uint8_t> out;
    h.serialize(out);
    for (const auto* s : streams) {
        put_be32(out, static_cast<uint32_t>(s->size()));
        out.insert(out.end(), s->begin(), s->end());
    }
    return out;
}

struct LpPick {
    int luma_index;
    GroupParams y, c;
    size_t budget_y, budget_c;
};

std::pair<size_t, size_t> lp_split(size_t payload_budget, double f, bool literal) {
    size_t by = literal
                    ? static_cast<size_t>(std::floor(payload_budget * f / (1.0 + f)))
                    : static_cast<size_t>(std::floor(payload_budget * f));
    return {by, payload_budget - by};
}

int luma_index_for(double f) {
    for (int i = 0; i < 5; ++i)
        if (std::abs(f - kLumaGrid[i]) < 1e-9) return i;
    throw ContractError("luma factor must be one of {0.5,0.6,0.7,0.8,0.9}");
}

// Shared search for both encode() and parameter_search(). Returns the chosen
// luma index and per-group parameters; artifacts are rebuilt by the caller.
std::optional<LpPick> lp_search(const RasterImage& ycc, const RasterImage& rgb,
                                size_t payload_budget, const EncodeOptions& opts,
                                const SearchGrid& grid) {
    std::vector<int> f_indices;
    if (opts.luma_factor)
        f_indices.push_back(luma_index_for(*opts.luma_factor));
    else
        f_indices = {0, 1, 2, 3, 4};

    const std::vector<const Plane*> ty{&ycc.planes[0]};
    const std::vector<const Plane*> tc{&ycc.planes[1], &ycc.planes[2]};
    EvalMemo memo_y, memo_c;
    auto eval_y = [&](RegularGrid g, int q) -> CandidateEval {
        ScalarArtifacts a = scalar_encode_group(ty, ycc.width, ycc.height, g, q,
                                                StreamLayout::SingleShared);
        return {mean_sq_err({&a.recon[0]}, ty), a.payload_bytes()};
    };
    auto eval_c = [&](RegularGrid g, int q) -> CandidateEval {
        ScalarArtifacts a = scalar_encode_group(tc, ycc.width, ycc.height, g, q,
                                                StreamLayout::SingleShared);
        return {mean_sq_err({&a.recon[0], &a.recon[1]}, tc), a.payload_bytes()};
    };

    std::optional<LpPick> best;
    double best_mse = HUGE_VAL;
    for (int fi : f_indices) {
        auto [by, bc] = lp_split(payload_budget, kLumaGrid[fi], opts.luma_split_literal);
        auto py = pick_best(grid, ycc.width, ycc.height, by, eval_y, memo_y);
        if (!py) continue;
        auto pc = pick_best(grid, ycc.width, ycc.height, bc, eval_c, memo_c);
        if (!pc) continue;

        // pre-tonal RGB error of the combined reconstruction decides f
        ScalarArtifacts ay = scalar_encode_group(ty, ycc.width, ycc.height, py->grid,
                                                 py->q, StreamLayout::SingleShared);
        ScalarArtifacts ac = scalar_encode_group(tc, ycc.width, ycc.height, pc->grid,
                                                 pc->q, StreamLayout::SingleShared);
        RasterImage rec(ycc.width, ycc.height, ColorSpace::YCbCr);
        rec.planes[0] = ay.recon[0];
        rec.planes[1] = ac.recon[0];
        rec.planes[2] = ac.recon[1];
        double m = mse(rgb, ycbcr_to_rgb(rec));
        if (m < best_mse) {
            best_mse = m;
            best = LpPick{fi, *py, *pc, by, bc};
        }
    }
    return best;
}

EncodeResult finish(const RasterImage& orig, std::vector<uint8_t> bytes,
                    RasterImage recon, Header header, size_t distinct,
                    TonalStats stats, double luma_f) {
    EncodeResult res;
    res.reconstruction = std::move(recon);
    res.header = std::move(header);
    res.rgb_mse = mse(orig, res.reconstruction);
    res.ratio_achieved =
        3.0 * orig.pixel_count() / static_cast<double>(bytes.size());
    res.bytes = std::move(bytes);
    res.distinct_mask_colors = distinct;
    res.tonal_stats = stats;
    res.luma_factor = luma_f;
    return res;
}

EncodeResult encode_scalar_rgb(const RasterImage& img, size_t budget,
                               const EncodeOptions& opts, const SearchGrid& grid,
                               const GroupParams* pinned) {
    const size_t header_size = 13;
    const std::vector<const Plane*> targets{&img.planes[0], &img.planes[1],
                                            &img.planes[2]};
    GroupParams params;
    size_t payload_budget;
    if (pinned) {
        params = *pinned;
        payload_budget = SIZE_MAX;
    } else {
        if (budget <= header_size)
            throw InfeasibleError("budget below minimal header size");
        payload_budget = budget - header_size;
        EvalMemo memo;
        auto eval = [&](RegularGrid g, int q) -> CandidateEval {
            ScalarArtifacts a = scalar_encode_group(targets, img.width, img.height,
                                                    g, q, StreamLayout::PerChannel);
            return {mean_sq_err({&a.recon[0], &a.recon[1], &a.recon[2]}, targets),
                    a.payload_bytes()};
        };
        auto best = pick_best(grid, img.width, img.height, payload_budget, eval, memo);
        if (!best) throw InfeasibleError("no feasible (h,q) for the requested ratio");
        params = *best;
    }

    ScalarArtifacts art = scalar_encode_group(targets, img.width, img.height,
                                              params.grid, params.q,
                                              StreamLayout::PerChannel);
    TonalStats stats;
    tonal_scalar_group(art, targets, opts, payload_budget, &stats);

    Header h;
    h.mode = Mode::ScalarRgb;
    h.width = static_cast<uint16_t>(img.width);
    h.height = static_cast<uint16_t>(img.height);
    h.groups.push_back(params);
    auto bytes = emit_container(h, {&art.streams[0], &art.streams[1], &art.streams[2]});

    RasterImage recon(img.width, img.height, ColorSpace::RGB);
    for (int c = 0; c < 3; ++c) recon.planes[c] = art.recon[c];
    size_t distinct = distinct_scalar_colors(art.stored(), 3);
    return finish(img, std::move(bytes), std::move(recon), std::move(h), distinct,
                  stats, -1.0);
}

EncodeResult encode_scalar_lp(const RasterImage& img, size_t budget,
                              const EncodeOptions& opts, const SearchGrid& grid,
                              const Header* pinned) {
    const size_t header_size = 17;
    RasterImage ycc = rgb_to_ycbcr(img);
    const std::vector<const Plane*> ty{&ycc.planes[0]};
    const std::vector<const Plane*> tc{&ycc.planes[1], &ycc.planes[2]};

    int luma_index;
    GroupParams py, pc;
    size_t budget_y, budget_c;
    if (pinned) {
        luma_index = pinned->luma_index;
        py = pinned->groups[0];
        pc = pinned->groups[1];
        budget_y = budget_c = SIZE_MAX;
    } else {
        if (budget <= header_size)
            throw InfeasibleError("budget below minimal header size");
        auto pick = lp_search(ycc, img, budget - header_size, opts, grid);
        if (!pick)
            throw InfeasibleError("no feasible LP configuration for the requested ratio");
        luma_index = pick->luma_index;
        py = pick->y;
        pc = pick->c;
        budget_y = pick->budget_y;
        budget_c = pick->budget_c;
    }

    ScalarArtifacts ay = scalar_encode_group(ty, img.width, img.height, py.grid,
                                             py.q, StreamLayout::SingleShared);
    ScalarArtifacts ac = scalar_encode_group(tc, img.width, img.height, pc.grid,
                                             pc.q, StreamLayout::SingleShared);
    TonalStats stats;
    tonal_scalar_group(ay, ty, opts, budget_y, &stats);
    tonal_scalar_group(ac, tc, opts, budget_c, &stats);

    Header h;
    h.mode = Mode::ScalarLp;
    h.width = static_cast<uint16_t>(img.width);
    h.height = static_cast<uint16_t>(img.height);
    h.luma_index = luma_index;
    h.groups.push_back(py);
    h.groups.push_back(pc);
    auto bytes = emit_container(h, {&ay.streams[0], &ac.streams[0]});

    RasterImage rec_ycc(img.width, img.height, ColorSpace::YCbCr);
    rec_ycc.planes[0] = ay.recon[0];
    rec_ycc.planes[1] = ac.recon[0];
    rec_ycc.planes[2] = ac.recon[1];
    RasterImage recon = ycbcr_to_rgb(rec_ycc);

    size_t distinct = distinct_scalar_colors(ay.stored(), 1) +
                      distinct_scalar_colors(ac.stored(), 2);
    return finish(img, std::move(bytes), std::move(recon), std::move(h), distinct,
                  stats, kLumaGrid[luma_index]);
}

EncodeResult encode_vector(const RasterImage& img, size_t budget,
                           const EncodeOptions& opts, const SearchGrid& grid,
                           const GroupParams* pinned) {
    GroupParams params;
    if (pinned) {
        params = *pinned;
    } else {
        if (budget <= 14) throw InfeasibleError("budget below minimal header size");
        EvalMemo memo;
        auto eval = [&](RegularGrid g, int k) -> CandidateEval {
            VectorArtifacts a = vector_encode_group(img, g, k, opts);
            const std::vector<const Plane*> t{&img.planes[0], &img.planes[1],
                                              &img.planes[2]};
            return {mean_sq_err({&a.recon[0], &a.recon[1], &a.recon[2]}, t),
                    a.file_bytes()};
        };
        auto best = pick_best(grid, img.width, img.height, budget, eval, memo);
        if (!best) throw InfeasibleError("no feasible (h,k) for the requested ratio");
        params = *best;
    }

    VectorArtifacts art = vector_encode_group(img, params.grid, params.q, opts);

    if (opts.refine_sweeps > 0) {
        Codebook refined = refine_codebook(art.codebook, art.labels, art.positions,
                                           img, *art.weights, opts.refine_sweeps);
        if (!(refined.centers == art.codebook.centers)) {
            // label stream is unchanged; only centres and reconstruction move
            art.codebook = std::move(refined);
            art.recon = vector_reconstruct(art.width, art.height, art.positions,
                                           *art.weights, art.stored());
        }
    }

    TonalStats stats;
    if (opts.tonal != EncodeOptions::Tonal::Off) {
        require(opts.tonal == EncodeOptions::Tonal::Direct,
                "random-walk tonal optimisation is undefined for vector mode");
        const std::vector<const Plane*> t{&img.planes[0], &img.planes[1],
                                          &img.planes[2]};
        TonalProblem p = make_tonal_problem(art.width, art.height, art.positions,
                                            art.stored(), t, art.weights);
        p.kind = AdmissibleKind::CodebookSet;
        p.codebook = &art.codebook;
        p.labels = art.labels;
        stats = tonal_optimize_direct(p, opts.tonal_max_sweeps);
        if (stats.changes > 0) {
            VectorArtifacts opt = vector_from_labels(art.width, art.height, art.grid,
                                                     art.dims, art.positions,
                                                     art.weights, art.codebook,
                                                     std::move(p.labels));
            if (pinned || opt.file_bytes() <= budget) art = std::move(opt);
        }
    }

    Header h;
    h.mode = Mode::VectorRgb;
    h.width = static_cast<uint16_t>(img.width);
    h.height = static_cast<uint16_t>(img.height);
    h.groups.push_back({art.grid, static_cast<int>(art.codebook.size())});
    h.codebook = art.codebook;
    auto bytes = emit_container(h, {&art.stream});

    RasterImage recon(img.width, img.height, ColorSpace::RGB);
    for (int c = 0; c < 3; ++c) recon.planes[c] = art.recon[c];
    size_t distinct = distinct_vector_colors(art.codebook, art.labels);
    return finish(img, std::move(bytes), std::move(recon), std::move(h), distinct,
                  stats, -1.0);
}

}  // namespace

EncodeResult encode(const RasterImage& img, double ratio, Mode mode,
                    const EncodeOptions& opts) {
    require(img.space == ColorSpace::RGB, "encode: input must be RGB");
    require(ratio >= 5.0 && ratio <= 200.0, "encode: ratio must be in [5,200]");
    const size_t budget = budget_bytes(img.width, img.height, ratio);

    EncodeResult res;
    switch (mode) {
        case Mode::ScalarRgb:
            res = encode_scalar_rgb(img, budget,
                                    opts, default_scalar_grid(img.width, img.height),
                                    nullptr);
            break;
        case Mode::ScalarLp:
            res = encode_scalar_lp(img, budget, opts,
                                   default_scalar_grid(img.width, img.height),
                                   nullptr);
            break;
        case Mode::VectorRgb:
            res = encode_vector(img, budget, opts,
                                default_vector_grid(img.width, img.height), nullptr);
            break;
    }
    require(res.bytes.size() <= budget, "encode: emitted file exceeds budget");
    return res;
}

EncodeResult encode_with_config(const RasterImage& img, const ModeConfig& config,
                                const EncodeOptions& opts) {
    require(img.space == ColorSpace::RGB, "encode: input must be RGB");
    switch (config.mode) {
        case Mode::ScalarRgb: {
            require(config.groups.size() == 1, "config: mode 0 needs one group");
            return encode_scalar_rgb(img, SIZE_MAX, opts,
                                     default_scalar_grid(img.width, img.height),
                                     &config.groups[0]);
        }
        case Mode::ScalarLp: {
            require(config.groups.size() == 2, "config: mode 1 needs two groups");
            Header pin;
            pin.luma_index = config.luma_index;
            pin.groups = config.groups;
            return encode_scalar_lp(img, SIZE_MAX, opts,
                                    default_scalar_grid(img.width, img.height), &pin);
        }
        case Mode::VectorRgb: {
            require(config.groups.size() == 1, "config: mode 2 needs one group");
            return encode_vector(img, SIZE_MAX, opts,
                                 default_vector_grid(img.width, img.height),
                                 &config.groups[0]);
        }
    }
    throw ContractError("encode_with_config: unknown mode");
}

ModeConfig parameter_search(const RasterImage& img, size_t budget, Mode mode,
                            const EncodeOptions& opts,
                            const SearchGrid* grid_override) {
    require(img.space == ColorSpace::RGB, "parameter_search: input must be RGB");
    ModeConfig cfg;
    cfg.mode = mode;
    switch (mode) {
        case Mode::ScalarRgb: {
            SearchGrid grid = grid_override ? *grid_override
                                            : default_scalar_grid(img.width, img.height);
            if (budget <= 13) throw InfeasibleError("budget below minimal header size");
            const std::vector<const Plane*> targets{&img.planes[0], &img.planes[1],
                                                    &img.planes[2]};
            EvalMemo memo;
            auto eval = [&](RegularGrid g, int q) -> CandidateEval {
                ScalarArtifacts a = scalar_encode_group(
                    targets, img.width, img.height, g, q, StreamLayout::PerChannel);
                return {mean_sq_err({&a.recon[0], &a.recon[1], &a.recon[2]}, targets),
                        a.payload_bytes()};
            };
            auto best = pick_best(grid, img.width, img.height, budget - 13, eval, memo);
            if (!best) throw InfeasibleError("no feasible (h,q) for this budget");
            cfg.groups.push_back(*best);
            return cfg;
        }
        case Mode::ScalarLp: {
            SearchGrid grid = grid_override ? *grid_override
                                            : default_scalar_grid(img.width, img.height);
            if (budget <= 17) throw InfeasibleError("budget below minimal header size");
            RasterImage ycc = rgb_to_ycbcr(img);
            auto pick = lp_search(ycc, img, budget - 17, opts, grid);
            if (!pick) throw InfeasibleError("no feasible LP configuration");
            cfg.luma_index = pick->luma_index;
            cfg.groups.push_back(pick->y);
            cfg.groups.push_back(pick->c);
            return cfg;
        }
        case Mode::VectorRgb: {
            SearchGrid grid = grid_override ? *grid_override
                                            : default_vector_grid(img.width, img.height);
            if (budget <= 14) throw InfeasibleError("budget below minimal header size");
            EvalMemo memo;
            auto eval = [&](RegularGrid g, int k) -> CandidateEval {
                VectorArtifacts a = vector_encode_group(img, g, k, opts);
                const std::vector<const Plane*> t{&img.planes[0], &img.planes[1],
                                                  &img.planes[2]};
                return {mean_sq_err({&a.recon[0], &a.recon[1], &a.recon[2]}, t),
                        a.file_bytes()};
            };
            auto best = pick_best(grid, img.width, img.height, budget, eval, memo);
            if (!best) throw InfeasibleError("no feasible (h,k) for this budget");
            cfg.groups.push_back(*best);
            VectorArtifacts art = vector_encode_group(img, best->grid, best->q, opts);
            cfg.codebook = std::move(art.codebook);
            return cfg;
        }
    }
    throw ContractError("parameter_search: unknown mode");
}

DecodeResult decode(const std::vector<uint8_t>& bytes) {
    size_t pos = 0;
    Header h = Header::parse(bytes, pos);

    std::vector<std::vector<uint8_t>> streams;
    for (int s = 0; s < stream_count(h.mode); ++s) {
        uint32_t len = get_be32(bytes, pos);
        if (bytes.size() - pos < len)
            throw ParseError("payload stream extends past end of file", pos);
        streams.emplace_back(bytes.begin() + pos, bytes.begin() + pos + len);
        pos += len;
    }
    if (pos != bytes.size()) throw ParseError("trailing bytes after payload", pos);

    DecodeResult out;
    out.header = h;
    switch (h.mode) {
        case Mode::ScalarRgb: {
            ScalarArtifacts art = scalar_decode_group(
                streams, h.width, h.height, h.groups[0].grid, h.groups[0].q, 3,
                StreamLayout::PerChannel);
            out.image = RasterImage(h.width, h.height, ColorSpace::RGB);
            for (int c = 0; c < 3; ++c) out.image.planes[c] = std::move(art.recon[c]);
            return out;
        }
        case Mode::ScalarLp: {
            ScalarArtifacts ay = scalar_decode_group(
                {streams[0]}, h.width, h.height, h.groups[0].grid, h.groups[0].q, 1,
                StreamLayout::SingleShared);
            ScalarArtifacts ac = scalar_decode_group(
                {streams[1]}, h.width, h.height, h.groups[1].grid, h.groups[1].q, 2,
                StreamLayout::SingleShared);
            RasterImage ycc(h.width, h.height, ColorSpace::YCbCr);
            ycc.planes[0] = std::move(ay.recon[0]);
            ycc.planes[1] = std::move(ac.recon[0]);
            ycc.planes[2] = std::move(ac.recon[1]);
            out.image = ycbcr_to_rgb(ycc);
            return out;
        }
        case Mode::VectorRgb: {
            VectorArtifacts art = vector_decode_group(streams[0], h.width, h.height,
                                                      h.groups[0].grid, h.codebook);
            out.image = RasterImage(h.width, h.height, ColorSpace::RGB);
            for (int c = 0; c < 3; ++c) out.image.planes[c] = std::move(art.recon[c]);
            return out;
        }
    }
    throw ParseError("unknown mode", 5);
}

}  // namespace rjip
