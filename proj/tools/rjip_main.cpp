#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "CLI11.hpp"
#include "rjip/bench.hpp"
#include "rjip/codec.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

rjip::EncodeOptions make_options(uint32_t seed, const std::string& tonal,
                                 double luma_factor, const std::string& luma_split) {
    rjip::EncodeOptions opts;
    opts.seed = seed;
    if (tonal == "direct")
        opts.tonal = rjip::EncodeOptions::Tonal::Direct;
    else if (tonal == "walk")
        opts.tonal = rjip::EncodeOptions::Tonal::RandomWalk;
    else if (tonal == "off")
        opts.tonal = rjip::EncodeOptions::Tonal::Off;
    else
        throw CLI::ValidationError("--tonal must be direct, walk or off");
    if (luma_factor >= 0) opts.luma_factor = luma_factor;
    opts.luma_split_literal = luma_split == "literal";
    return opts;
}

std::vector<double> parse_ratios(const std::string& spec) {
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        double lo, hi, step;
        if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 ||
            step <= 0 || hi < lo)
            throw CLI::ValidationError("--ratios expects lo:hi:step or a comma list");
        for (double r = lo; r <= hi + 1e-9; r += step) out.push_back(r);
    } else {
        std::string item;
        for (size_t pos = 0; pos <= spec.size(); ++pos) {
            if (pos == spec.size() || spec[pos] == ',') {
                if (!item.empty()) out.push_back(std::stod(item));
                item.clear();
            } else {
                item += spec[pos];
            }
        }
    }
    if (out.empty()) throw CLI::ValidationError("--ratios produced no values");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rjip - inpainting-based colour image codec"};
    app.require_subcommand(1);

    // compress
    std::string in_path, out_path, mode_name_ = "rgb", tonal = "direct",
                luma_split = "total";
    double ratio = 20.0, luma_factor = -1.0;
    uint32_t seed = 1;
    auto* comp = app.add_subcommand("compress", "compress a PPM image");
    comp->add_option("input", in_path, "input PPM (P6)")->required();
    comp->add_option("output", out_path, "output .rjc bitstream")->required();
    comp->add_option("--ratio", ratio, "target compression ratio (5..200)")
        ->required();
    comp->add_option("--mode", mode_name_, "rgb | lp | vector");
    comp->add_option("--luma-factor", luma_factor,
                     "pin the LP luma factor (one of 0.5..0.9)");
    comp->add_option("--seed", seed, "rng seed (default 1)");
    comp->add_option("--tonal", tonal, "direct | walk | off (default direct)");
    comp->add_option("--luma-split", luma_split,
                     "total: B_Y=f*B (default) | literal: B_Y=f*B_CbCr");

    // decompress
    std::string din_path, dout_path;
    auto* dec = app.add_subcommand("decompress", "decode a .rjc bitstream");
    dec->add_option("input", din_path, "input .rjc")->required();
    dec->add_option("output", dout_path, "output PPM")->required();

    // sweep
    std::string corpus_dir, ratios_spec = "20:120:10", modes_spec = "all",
                out_csv = "results.csv";
    bool verbose = false;
    auto* sw = app.add_subcommand("sweep", "rate-distortion sweep over a corpus");
    sw->add_option("corpus", corpus_dir, "directory of PPM images")->required();
    sw->add_option("--ratios", ratios_spec, "lo:hi:step or comma list");
    sw->add_option("--modes", modes_spec, "all or comma list of rgb,lp,vector");
    sw->add_option("--out", out_csv, "output CSV path");
    sw->add_option("--seed", seed, "rng seed");
    sw->add_option("--tonal", tonal, "direct | walk | off");
    sw->add_flag("--verbose", verbose, "progress lines on stderr");

    CLI11_PARSE(app, argc, argv);

    try {
        if (comp->parsed()) {
            auto mode = rjip::mode_from_name(mode_name_);
            if (!mode) throw std::runtime_error("unknown mode '" + mode_name_ + "'");
            rjip::RasterImage img = rjip::load_ppm_file(in_path);
            auto opts = make_options(seed, tonal, luma_factor, luma_split);
            auto t0 = std::chrono::steady_clock::now();
            rjip::EncodeResult res = rjip::encode(img, ratio, *mode, opts);
            double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                    .count();
            write_file(out_path, res.bytes);
            std::string id = fs::path(in_path).stem().string();
            std::printf("%s\n",
                        rjip::rd_csv_row(rjip::rd_point_from(id, ratio, secs, res))
                            .c_str());
            return 0;
        }
        if (dec->parsed()) {
            auto bytes = read_file(din_path);
            rjip::DecodeResult res = rjip::decode(bytes);
            rjip::save_ppm_file(res.image, dout_path);
            const auto& h = res.header;
            std::printf("mode=%s %ux%u", rjip::mode_name(h.mode), h.width, h.height);
            for (size_t g = 0; g < h.groups.size(); ++g)
                std::printf(" h%zu=%.6g q%zu=%d", g, h.groups[g].grid.h(), g,
                            h.groups[g].q);
            if (h.mode == rjip::Mode::ScalarLp)
                std::printf(" f=%.1f", h.luma_factor());
            if (h.mode == rjip::Mode::VectorRgb)
                std::printf(" k=%zu", h.codebook.size());
            std::printf("\n");
            return 0;
        }
        if (sw->parsed()) {
            rjip::SweepOptions opts;
            opts.ratios = parse_ratios(ratios_spec);
            opts.enc = make_options(seed, tonal, -1.0, "total");
            if (modes_spec != "all") {
                opts.modes.clear();
                std::string item;
                for (size_t pos = 0; pos <= modes_spec.size(); ++pos) {
                    if (pos == modes_spec.size() || modes_spec[pos] == ',') {
                        if (!item.empty()) {
                            auto m = rjip::mode_from_name(item);
                            if (!m)
                                throw std::runtime_error("unknown mode '" + item + "'");
                            opts.modes.push_back(*m);
                            item.clear();
                        }
                    } else {
                        item += modes_spec[pos];
                    }
                }
            }
            std::vector<std::string> paths;
            for (const auto& entry : fs::directory_iterator(corpus_dir))
                if (entry.path().extension() == ".ppm")
                    paths.push_back(entry.path().string());
            std::sort(paths.begin(), paths.end());
            if (paths.empty()) throw std::runtime_error("no .ppm files in corpus");

            rjip::SweepOutcome res = rjip::sweep_corpus(paths, opts, verbose);
            if (res.points.empty())
                throw std::runtime_error("all sweep jobs failed");
            std::ofstream csv(out_csv, std::ios::trunc);
            if (!csv) throw std::runtime_error("cannot write '" + out_csv + "'");
            csv << rjip::rd_csv_header() << '\n';
            for (const auto& p : res.points) csv << rjip::rd_csv_row(p) << '\n';
            std::fprintf(stderr, "wrote %zu rows to %s (%zu failed jobs)\n",
                         res.points.size(), out_csv.c_str(), res.failed_jobs);
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
