// End-to-end acceptance suite. Runs every headline claim of the harness at
// full scale against canonical MNIST (located via FOVEA_DATA_DIR) and prints
// one PASS/FAIL line per criterion. Exit code = number of failed criteria.
//
// Heavy steps (three 5-epoch trainings and the rotation/scale sweeps) run at
// the same scale as the real experiments; expect tens of minutes on a laptop.

#include "fovea/experiments.hpp"
#include "fovea/parallel.hpp"
#include "fovea/sha256.hpp"
#include "gradcheck.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace fovea;

namespace {

struct CriterionResult {
    int id = 0;
    bool pass = false;
    std::string detail;
};

std::map<int, CriterionResult> g_results;

void record(int id, bool pass, const std::string& detail) {
    g_results[id] = {id, pass, detail};
    std::fprintf(stderr, "[acceptance] criterion %d %s: %s\n", id,
                 pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stderr);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), f, a, b, c, d);
    return buf;
}

double now_s() {
    using clock = std::chrono::steady_clock;
    static const auto t0 = clock::now();
    return std::chrono::duration<double>(clock::now() - t0).count();
}

void progress(const std::string& msg) {
    std::fprintf(stderr, "[acceptance %7.1fs] %s\n", now_s(), msg.c_str());
    std::fflush(stderr);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return "<missing:" + p.string() + ">";
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// contiguous scale band (percent of the last scale still above 0.90),
// walking down from 100%; 0 when even 100% fails
int band_end_pct(const AccuracyMatrix& m, std::size_t rot_index) {
    int band = 0;
    for (std::size_t si = 0; si < m.scales.size(); ++si) {
        if (m.cell(rot_index, si) > 0.90)
            band = static_cast<int>(std::lround(m.scales[si] * 100.0));
        else
            break;
    }
    return band;
}

} // namespace

int main() {
    const char* data_env = std::getenv("FOVEA_DATA_DIR");
    if (!data_env) {
        std::fprintf(stderr,
                     "acceptance: FOVEA_DATA_DIR must point at the canonical MNIST "
                     "files (run the CLI fetch subcommand first)\n");
        return 99;
    }
    const std::string data_dir = data_env;
    const fs::path out_dir = fs::temp_directory_path() / "fovea_acceptance";
    fs::create_directories(out_dir);

    // ---- criterion 8: parser golden tests -----------------------------------
    Dataset train_ds, test_ds;
    try {
        const MnistPaths paths = mnist_paths(data_dir);
        const auto raw_imgs = read_file_maybe_gzip(paths.train_images);
        const auto raw_labs = read_file_maybe_gzip(paths.train_labels);
        train_ds.images = parse_idx_images(raw_imgs);
        train_ds.labels = parse_idx_labels(raw_labs);
        train_ds.split = Split::train;
        test_ds = load_dataset(paths.test_images, paths.test_labels, Split::test);

        bool ok = train_ds.images.size() == 60000 && train_ds.labels.size() == 60000 &&
                  test_ds.size() == 10000 && train_ds.images[0].w == 28 &&
                  train_ds.images[0].h == 28;
        // byte-exact round-trip
        ok = ok && serialize_idx_images(train_ds.images) == raw_imgs;
        ok = ok && serialize_idx_labels(train_ds.labels) == raw_labs;
        // magic handling
        bool magic_ok = false;
        try {
            parse_idx_images(raw_labs);
        } catch (const BadMagic&) {
            magic_ok = true;
        }
        record(8, ok && magic_ok,
               fmt("60000/10000 items of 28x28 parsed (%g/%g), byte-exact "
                   "round-trip, magic checks enforced",
                   static_cast<double>(train_ds.images.size()),
                   static_cast<double>(test_ds.size())));
    } catch (const std::exception& e) {
        record(8, false, std::string("exception: ") + e.what());
        std::fprintf(stderr, "acceptance: cannot continue without the dataset\n");
        return 9;
    }

    // ---- criterion 7: gradient oracle ---------------------------------------
    try {
        progress("criterion 7: finite-difference gradient checks (100 trials/kind)");
        const auto kinds = gradcheck::check_all_layer_kinds(100);
        double worst = 0.0;
        std::string worst_kind = "none";
        for (const auto& r : kinds)
            if (r.stats.max_rel_f32 > worst) {
                worst = r.stats.max_rel_f32;
                worst_kind = r.kind;
            }
        record(7, worst <= 1e-3,
               fmt("max relative error %.2e <= 1e-3 across 7 layer kinds, worst: ", worst) +
                   worst_kind);
    } catch (const std::exception& e) {
        record(7, false, std::string("exception: ") + e.what());
    }

    // ---- criterion 6: equivariance property suite ----------------------------
    try {
        progress("criterion 6: equivariance properties on 100 random digits");
        LogPolarConfig lp;
        const SampleGrid grid = make_grid(lp);
        Rng rng(2024);
        std::vector<const Image*> digits;
        for (int i = 0; i < 100; ++i)
            digits.push_back(&test_ds.images[rng.below(test_ds.size())]);

        double rot_total = 0.0, rot_worst = 0.0;
        std::size_t rot_pairs = 0;
        for (int k = 1; k <= 11; ++k) {
            const float deg = static_cast<float>(k * 360.0 / 28.0);
            for (const Image* img : digits) {
                const Image lhs = to_logpolar(rotate(*img, deg, 13.5f, 13.5f), grid);
                const Image rhs = circular_shift_columns(to_logpolar(*img, grid), k);
                double s = 0.0;
                for (std::size_t i = 0; i < lhs.size(); ++i)
                    s += std::abs(lhs.data[i] - rhs.data[i]);
                const double d = s / static_cast<double>(lhs.size());
                rot_total += d;
                rot_worst = std::max(rot_worst, d);
                ++rot_pairs;
            }
        }
        const double rot_mean = rot_total / static_cast<double>(rot_pairs);

        double sc_total = 0.0, sc_worst = 0.0;
        std::size_t sc_pairs = 0;
        for (double s : {0.9, 0.8, 0.7, 0.6, 0.5}) {
            const int k = static_cast<int>(std::lround(
                (lp.n_rho - 1) * std::log(1.0 / s) / std::log(lp.r_max / lp.r_min)));
            for (const Image* img : digits) {
                const Image lhs =
                    to_logpolar(scale(*img, static_cast<float>(s), 13.5f, 13.5f), grid);
                const Image base = to_logpolar(*img, grid);
                // content moves toward the innermost rows; exclude the k
                // vacated bottom rows from the comparison
                double sum = 0.0;
                std::size_t n = 0;
                for (int y = 0; y < lp.n_rho - k; ++y)
                    for (int x = 0; x < lp.n_theta; ++x) {
                        sum += std::abs(lhs.at(x, y) - base.at(x, y + k));
                        ++n;
                    }
                const double d = sum / static_cast<double>(n);
                sc_total += d;
                sc_worst = std::max(sc_worst, d);
                ++sc_pairs;
            }
        }
        const double sc_mean = sc_total / static_cast<double>(sc_pairs);

        const bool rot_ok = rot_mean <= 0.02;
        const bool sc_ok = sc_mean <= 0.03;
        record(6, rot_ok && sc_ok,
               fmt("rotation mean abs diff %.4f (bound 0.02, worst pair %.4f); "
                   "scale mean abs diff %.4f (bound 0.03, worst pair %.4f)",
                   rot_mean, rot_worst, sc_mean, sc_worst));
    } catch (const std::exception& e) {
        record(6, false, std::string("exception: ") + e.what());
    }

    // ---- criterion 9: CLI determinism ----------------------------------------
    try {
        progress("criterion 9: two seeded `train --threads 1` invocations");
        const fs::path det = out_dir / "determinism";
        fs::remove_all(det);
        const std::string common =
            std::string(" --data-dir ") + data_dir + " --out-dir " + det.string() +
            " --seed 123 --threads 1 train --variant euclidean --epochs 2" +
            " --train-subset 4096 --test-subset 1000";
        const std::string quiet = " >/dev/null 2>&1";
        const int rc1 = std::system((std::string(FOVEA_CLI_PATH) + " --run-id r1" + common + quiet).c_str());
        const int rc2 = std::system((std::string(FOVEA_CLI_PATH) + " --run-id r2" + common + quiet).c_str());
        const bool ran = WEXITSTATUS(rc1) == 0 && WEXITSTATUS(rc2) == 0;
        const bool weights_eq =
            ran && slurp(det / "r1" / "weights.fw") == slurp(det / "r2" / "weights.fw");
        const bool report_eq = ran && slurp(det / "r1" / "train_report.csv") ==
                                          slurp(det / "r2" / "train_report.csv");
        record(9, ran && weights_eq && report_eq,
               std::string("seeded reruns produce byte-identical weight files (") +
                   (weights_eq ? "yes" : "NO") + ") and reports (" +
                   (report_eq ? "yes" : "NO") +
                   ") [epochs 2, 4096-sample subset, threads 1]");
    } catch (const std::exception& e) {
        record(9, false, std::string("exception: ") + e.what());
    }

    // ---- criterion 1: euclidean baseline -------------------------------------
    ExperimentConfig cfg; // 5 epochs, adam, batch 128, seed 42, 28x28 lp grid
    std::optional<BaselineResult> eu, lpr;
    try {
        progress("criterion 1: training the euclidean baseline (5 epochs, full MNIST)");
        eu = run_baseline(Variant::euclidean, train_ds, test_ds, cfg,
                          [](const nn::EpochStat& s) {
                              progress(fmt("  epoch %g: loss %.4f, test acc %.4f",
                                           s.epoch, s.train_loss, s.test_accuracy));
                          });
        record(1, eu->report.final_test_accuracy >= 0.975,
               fmt("euclidean 5-epoch test accuracy %.4f >= 0.975",
                   eu->report.final_test_accuracy));
        nn::save_weights(eu->net, (out_dir / "weights_euclidean.fw").string());
        export_train_report_csv(eu->report, (out_dir / "train_euclidean.csv").string());
    } catch (const std::exception& e) {
        record(1, false, std::string("exception: ") + e.what());
    }

    // ---- criterion 2: log-polar baseline --------------------------------------
    try {
        progress("criterion 2: training the log-polar baseline (28x28 grid)");
        lpr = run_baseline(Variant::logpolar, train_ds, test_ds, cfg,
                           [](const nn::EpochStat& s) {
                               progress(fmt("  epoch %g: loss %.4f, test acc %.4f",
                                            s.epoch, s.train_loss, s.test_accuracy));
                           });
        record(2, lpr->report.final_test_accuracy >= 0.965,
               fmt("log-polar 5-epoch test accuracy %.4f >= 0.965",
                   lpr->report.final_test_accuracy));
        nn::save_weights(lpr->net, (out_dir / "weights_logpolar.fw").string());
        export_train_report_csv(lpr->report, (out_dir / "train_logpolar.csv").string());
    } catch (const std::exception& e) {
        record(2, false, std::string("exception: ") + e.what());
    }

    // ---- criteria 3 & 4: scale bands and rotation improvement -----------------
    try {
        if (!eu || !lpr) throw Error("baseline training unavailable for the sweeps");

        SweepSpec scale_spec;
        scale_spec.rotations_deg = {0.0};
        scale_spec.scales = SweepSpec::default_scales();

        SweepSpec rot_spec;
        rot_spec.rotations_deg = {30, 60, 90, 270, 300, 330};
        rot_spec.scales = {1.0};

        progress("criterion 3: scale sweeps at rotation 0 (full test set per cell)");
        scale_spec.variant = Variant::euclidean;
        const AccuracyMatrix eu_scales = run_sweep(eu->net, scale_spec, test_ds, cfg);
        scale_spec.variant = Variant::logpolar;
        const AccuracyMatrix lp_scales = run_sweep(lpr->net, scale_spec, test_ds, cfg);
        export_matrix_csv(eu_scales, (out_dir / "scales_euclidean.csv").string());
        export_matrix_csv(lp_scales, (out_dir / "scales_logpolar.csv").string());

        const int eu_band = band_end_pct(eu_scales, 0);
        const int lp_band = band_end_pct(lp_scales, 0);
        const bool eu_ok = eu_band == 90 || eu_band == 80 || eu_band == 70;
        const bool lp_ok = lp_band == 70 || lp_band == 60 || lp_band == 50;
        std::string row = "eu row:";
        for (std::size_t i = 0; i < eu_scales.scales.size(); ++i)
            row += fmt(" %.3f", eu_scales.cell(0, i));
        row += "; lp row:";
        for (std::size_t i = 0; i < lp_scales.scales.size(); ++i)
            row += fmt(" %.3f", lp_scales.cell(0, i));
        record(3, eu_ok && lp_ok,
               fmt(">90%% scale band ends: euclidean %g%% (expect 80+-10), "
                   "log-polar %g%% (expect 60+-10); ",
                   eu_band, lp_band) + row);

        progress("criterion 4: rotation sweep at scale 100%");
        rot_spec.variant = Variant::euclidean;
        const AccuracyMatrix eu_rot = run_sweep(eu->net, rot_spec, test_ds, cfg);
        rot_spec.variant = Variant::logpolar;
        const AccuracyMatrix lp_rot = run_sweep(lpr->net, rot_spec, test_ds, cfg);
        export_matrix_csv(eu_rot, (out_dir / "rotations_euclidean.csv").string());
        export_matrix_csv(lp_rot, (out_dir / "rotations_logpolar.csv").string());
        const AccuracyMatrix delta = diff_map(lp_rot, eu_rot);
        double mean_delta = 0.0;
        for (double v : delta.accuracy) mean_delta += v;
        mean_delta /= static_cast<double>(delta.accuracy.size());
        record(4, mean_delta > 0.0,
               fmt("mean accuracy delta (log-polar - euclidean) over +-30/60/90 "
                   "degrees at scale 100%%: %+.4f (strictly positive required)",
                   mean_delta));
    } catch (const std::exception& e) {
        if (!g_results.count(3)) record(3, false, std::string("exception: ") + e.what());
        record(4, false, std::string("exception: ") + e.what());
    }

    // ---- criterion 5: compression ---------------------------------------------
    try {
        progress("criterion 5: compression sweep {28x28, 16x10} (two retrainings)");
        const auto points = compression_sweep({{28, 28}, {16, 10}}, train_ds, test_ds, cfg,
                                              [](const CompressionPoint& p) {
                                                  progress(fmt("  grid %gx%g: factor %.4f, acc %.4f",
                                                               p.n_theta, p.n_rho, p.factor,
                                                               p.accuracy));
                                              });
        export_compression_csv(points, (out_dir / "compression.csv").string());
        const CompressionPoint* low = nullptr;
        const CompressionPoint* full = nullptr;
        for (const auto& p : points) {
            if (p.factor >= 0.19 && p.factor <= 0.21) low = &p;
            if (std::abs(p.factor - 1.0) < 1e-9) full = &p;
        }
        const bool low_ok = low && low->accuracy >= 0.92;
        const bool full_ok = full && lpr &&
                             std::abs(full->accuracy - lpr->report.final_test_accuracy) <= 0.005;
        record(5, low_ok && full_ok,
               fmt("factor %.4f accuracy %.4f (>= 0.92 required); factor-1.0 "
                   "entry %.4f vs baseline %.4f (within 0.005)",
                   low ? low->factor : -1, low ? low->accuracy : -1,
                   full ? full->accuracy : -1,
                   lpr ? lpr->report.final_test_accuracy : -1));
    } catch (const std::exception& e) {
        record(5, false, std::string("exception: ") + e.what());
    }

    // ---- summary ----------------------------------------------------------------
    std::printf("\n=== acceptance results ===\n");
    int failures = 0;
    for (int id = 1; id <= 9; ++id) {
        const auto it = g_results.find(id);
        if (it == g_results.end()) {
            std::printf("criterion %d: FAIL — not executed\n", id);
            ++failures;
            continue;
        }
        std::printf("criterion %d: %s — %s\n", id, it->second.pass ? "PASS" : "FAIL",
                    it->second.detail.c_str());
        if (!it->second.pass) ++failures;
    }
    std::printf("%d/9 criteria passed; artifacts under %s\n", 9 - failures,
                out_dir.string().c_str());
    return failures;
}
