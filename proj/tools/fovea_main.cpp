// fovea: log-polar retinal pre-processing for small CNNs, with an MNIST
// experiment harness (baselines, rotation/scale sweeps, compression sweep).
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "CLI11.hpp"

#include "fovea/errors.hpp"
#include "fovea/experiments.hpp"
#include "fovea/manifest.hpp"
#include "fovea/parallel.hpp"
#include "fovea/pgm.hpp"
#include "fovea/sha256.hpp"

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <thread>

namespace fs = std::filesystem;
using namespace fovea;

namespace {

struct GlobalOpts {
    std::string data_dir;
    std::string out_dir = "runs";
    std::string run_id; // default: UTC timestamp + command
    std::uint64_t seed = 42;
    int threads = 0; // 0 = hardware
};

std::string default_data_dir() {
    const char* env = std::getenv("FOVEA_DATA_DIR");
    return env ? env : "data";
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", std::gmtime(&t));
    return buf;
}

fs::path make_run_dir(const GlobalOpts& g, const std::string& command) {
    const std::string id = g.run_id.empty() ? timestamp_utc() + "-" + command : g.run_id;
    const fs::path dir = fs::path(g.out_dir) / id;
    fs::create_directories(dir);
    return dir;
}

int effective_threads(const GlobalOpts& g) {
    if (g.threads > 0) return g.threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

// --- fetch -------------------------------------------------------------------

struct FetchEntry {
    const char* name; // uncompressed canonical name
    const char* gz_sha256;
    const char* raw_sha256;
};

constexpr FetchEntry kMnistFiles[] = {
    {"train-images-idx3-ubyte",
     "440fcabf73cc546fa21475e81ea370265605f56be210a4024d2ca8f203523609",
     "ba891046e6505d7aadcbbe25680a0738ad16aec93bde7f9b65e87a2fc25776db"},
    {"train-labels-idx1-ubyte",
     "3552534a0a558bbed6aed32b30c495cca23d567ec52cac8be1a0730e8010255c",
     "65a50cbbf4e906d70832878ad85ccda5333a97f0f4c3dd2ef09a8a9eef7101c5"},
    {"t10k-images-idx3-ubyte",
     "8d422c7b0a1c1c79245a5bcf07fe86e33eeafee792b84584aec276f5a2dbc4e6",
     "0fa7898d509279e482958e8ce81c8e77db3f2f8254e26661ceb7762c4d494ce7"},
    {"t10k-labels-idx1-ubyte",
     "f7ae60f92e00ec6debd23a6088c31dbd2371eca3ffa0defaefb259924204aec6",
     "ff7bcfd416de33731a308c3f266cc351222c34898ecbeaf847f06e48f7ec33f2"},
};

std::map<std::string, std::string> load_checksums_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("fetch: cannot open checksums file " + path);
    std::map<std::string, std::string> out;
    std::string sha, name;
    while (in >> sha >> name) out[name] = sha;
    return out;
}

void write_checksums_file(const fs::path& path) {
    std::ofstream out(path);
    for (const auto& e : kMnistFiles) {
        out << e.gz_sha256 << "  " << e.name << ".gz\n";
        out << e.raw_sha256 << "  " << e.name << "\n";
    }
}

bool file_matches(const fs::path& p, const std::string& want_sha) {
    return fs::exists(p) && sha256_file(p.string()) == want_sha;
}

int cmd_fetch(const GlobalOpts& g, const std::string& base_url,
              const std::string& checksums_path) {
    fs::create_directories(g.data_dir);
    const fs::path run_dir = make_run_dir(g, "fetch");
    RunManifest manifest("fetch", g.seed, effective_threads(g));
    manifest.set_config({{"base_url", base_url}, {"data_dir", g.data_dir}});
    manifest.write((run_dir / "manifest.json").string());

    std::map<std::string, std::string> overrides;
    if (!checksums_path.empty()) overrides = load_checksums_file(checksums_path);
    auto sha_for = [&overrides](const std::string& name, const char* fallback) {
        auto it = overrides.find(name);
        return it != overrides.end() ? it->second : std::string(fallback);
    };

    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& e : kMnistFiles) {
        const fs::path raw = fs::path(g.data_dir) / e.name;
        const fs::path gz = fs::path(g.data_dir) / (std::string(e.name) + ".gz");
        const std::string want_gz = sha_for(std::string(e.name) + ".gz", e.gz_sha256);
        const std::string want_raw = sha_for(e.name, e.raw_sha256);
        if (file_matches(raw, want_raw) || file_matches(gz, want_gz)) {
            std::printf("fetch: %s present, checksum ok\n", e.name);
            continue;
        }
        if (fs::exists(raw) || fs::exists(gz))
            throw ChecksumMismatch("fetch: existing file fails verification: " +
                                   (fs::exists(raw) ? raw : gz).string());

        // split scheme://host[:port]/prefix
        const auto scheme_end = base_url.find("://");
        if (scheme_end == std::string::npos)
            throw Error("fetch: base url must start with http:// or https://");
        const auto path_start = base_url.find('/', scheme_end + 3);
        const std::string host = base_url.substr(0, path_start);
        std::string prefix = path_start == std::string::npos ? "/" : base_url.substr(path_start);
        if (prefix.back() != '/') prefix += '/';

        const std::string target = prefix + e.name + ".gz";
        std::printf("fetch: downloading %s%s\n", host.c_str(), target.c_str());
        httplib::Client client(host);
        client.set_follow_location(true);
        client.set_read_timeout(120, 0);
        auto res = client.Get(target);
        if (!res || res->status != 200)
            throw NetworkError("fetch: GET " + host + target + " failed (" +
                               (res ? std::to_string(res->status) : "no response") + ")");
        const std::string got =
            sha256_hex(reinterpret_cast<const std::uint8_t*>(res->body.data()),
                       res->body.size());
        if (got != want_gz)
            throw ChecksumMismatch("fetch: checksum mismatch for " + gz.string() +
                                   " (got " + got + ")");
        std::ofstream out(gz, std::ios::binary);
        out.write(res->body.data(), static_cast<std::streamsize>(res->body.size()));
        if (!out) throw IoError("fetch: cannot write " + gz.string());
    }
    write_checksums_file(fs::path(g.data_dir) / "mnist.sha256");
    manifest.set_timing_seconds(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    manifest.write((run_dir / "manifest.json").string());
    std::printf("fetch: dataset ready in %s\n", g.data_dir.c_str());
    return 0;
}

// --- shared dataset / config plumbing ---------------------------------------

Dataset load_split(const GlobalOpts& g, Split split) {
    const MnistPaths paths = mnist_paths(g.data_dir);
    return split == Split::train
               ? load_dataset(paths.train_images, paths.train_labels, Split::train)
               : load_dataset(paths.test_images, paths.test_labels, Split::test);
}

void record_dataset(RunManifest& m, const GlobalOpts& g) {
    const MnistPaths paths = mnist_paths(g.data_dir);
    for (const auto& p : {paths.train_images, paths.train_labels, paths.test_images,
                          paths.test_labels})
        if (fs::exists(p)) m.add_dataset_file(p);
}

nlohmann::json lp_json(const LogPolarConfig& lp) {
    return {{"xc", lp.xc},           {"yc", lp.yc},
            {"r_min", lp.r_min},     {"r_max", lp.r_max},
            {"n_theta", lp.n_theta}, {"n_rho", lp.n_rho},
            {"theta_zero", lp.theta_zero}};
}

// --- report ------------------------------------------------------------------

std::string read_first_line(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

int run_report(const std::string& dir, const GlobalOpts& g) {
    if (!fs::exists(dir)) throw NoResults("report: no such directory: " + dir);
    std::vector<fs::path> csvs;
    for (const auto& entry : fs::recursive_directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".csv")
            csvs.push_back(entry.path());
    std::sort(csvs.begin(), csvs.end());

    std::map<std::string, AccuracyMatrix> matrices; // by variant, first wins
    std::vector<std::pair<fs::path, std::vector<CompressionPoint>>> compressions;
    std::vector<std::pair<fs::path, std::vector<std::array<double, 3>>>> reports;

    for (const auto& p : csvs) {
        const std::string header = read_first_line(p);
        if (header == "rotation_deg,scale_pct,variant,accuracy,n_samples") {
            AccuracyMatrix m = import_matrix_csv(p.string());
            const std::string v = variant_name(m.variant);
            if (!matrices.count(v)) matrices.emplace(v, std::move(m));
        } else if (header == "n_theta,n_rho,compression_factor,test_accuracy,epochs") {
            std::ifstream in(p);
            std::string line;
            std::getline(in, line);
            std::vector<CompressionPoint> pts;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                CompressionPoint pt;
                if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%d", &pt.n_theta, &pt.n_rho,
                                &pt.factor, &pt.accuracy, &pt.epochs) == 5)
                    pts.push_back(pt);
            }
            if (!pts.empty()) compressions.emplace_back(p, std::move(pts));
        } else if (header == "epoch,train_loss,test_accuracy") {
            std::ifstream in(p);
            std::string line;
            std::getline(in, line);
            std::vector<std::array<double, 3>> rows;
            while (std::getline(in, line)) {
                std::array<double, 3> row{};
                if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &row[0], &row[1], &row[2]) == 3)
                    rows.push_back(row);
            }
            if (!rows.empty()) reports.emplace_back(p, std::move(rows));
        }
    }
    if (matrices.empty() && compressions.empty() && reports.empty())
        throw NoResults("report: no result CSVs under " + dir);

    const fs::path run_dir = make_run_dir(g, "report");
    RunManifest manifest("report", g.seed, effective_threads(g));
    manifest.set_config({{"results_dir", dir}});
    manifest.write((run_dir / "manifest.json").string());
    std::string text;
    auto add = [&text](const std::string& s) { text += s + "\n"; };
    add("results under " + dir);
    add("");

    for (const auto& [p, rows] : reports) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "training %s: final test accuracy %.4f after %d epochs",
                      p.string().c_str(), rows.back()[2], static_cast<int>(rows.back()[0]));
        add(buf);
        add(rows.back()[2] >= 0.965 ? "  meets the >=0.965 baseline band"
                                    : "  below the 0.965 baseline band");
    }
    if (!reports.empty()) add("");

    for (const auto& [v, m] : matrices) {
        add("sweep (" + v + "), " + std::to_string(m.rotations_deg.size()) + " rotations x " +
            std::to_string(m.scales.size()) + " scales, n=" + std::to_string(m.n_samples));
        // the scale band at rotation 0 is the headline robustness number
        const auto rit = std::find(m.rotations_deg.begin(), m.rotations_deg.end(), 0.0);
        if (rit != m.rotations_deg.end()) {
            const std::size_t ri = static_cast<std::size_t>(rit - m.rotations_deg.begin());
            std::string band = "  scale band with accuracy > 0.90 at rotation 0:";
            for (std::size_t si = 0; si < m.scales.size(); ++si)
                if (m.cell(ri, si) > 0.90) {
                    char buf[32];
                    std::snprintf(buf, sizeof(buf), " %g%%", m.scales[si] * 100.0);
                    band += buf;
                }
            add(band);
        }
    }
    if (!matrices.empty()) add("");

    if (matrices.count("euclidean") && matrices.count("logpolar")) {
        try {
            const AccuracyMatrix d =
                diff_map(matrices.at("logpolar"), matrices.at("euclidean"));
            double mean = 0.0;
            for (double v : d.accuracy) mean += v;
            mean /= static_cast<double>(d.accuracy.size());
            char buf[128];
            std::snprintf(buf, sizeof(buf),
                          "logpolar - euclidean improvement map: mean delta %+.4f", mean);
            add(buf);
            // heatmap shifted to map delta -1..+1 onto 0..1
            AccuracyMatrix shifted = d;
            for (double& v : shifted.accuracy) v = 0.5 + 0.5 * v;
            export_matrix_pgm(shifted, (run_dir / "diff_map.pgm").string());
            export_matrix_csv(d, (run_dir / "diff_map.csv").string());
            add("diff map written to " + (run_dir / "diff_map.pgm").string());
            add("");
        } catch (const GridMismatch&) {
            add("sweep grids differ between variants; no diff map");
            add("");
        }
    }

    for (const auto& [p, pts] : compressions) {
        add("compression sweep " + p.string() + ":");
        for (const auto& pt : pts) {
            char buf[128];
            std::snprintf(buf, sizeof(buf),
                          "  %2dx%-2d  factor %.4f  accuracy %.4f  (%d epochs)", pt.n_theta,
                          pt.n_rho, pt.factor, pt.accuracy, pt.epochs);
            add(buf);
            if (pt.factor >= 0.19 && pt.factor <= 0.21) {
                add(pt.accuracy >= 0.92
                        ? "        ~5x compression point holds >= 0.92 accuracy"
                        : "        ~5x compression point below the 0.92 band");
            }
        }
        add("");
    }

    std::ofstream out(run_dir / "summary.txt", std::ios::binary);
    out << text;
    std::fputs(text.c_str(), stdout);
    std::printf("report: summary written to %s\n", (run_dir / "summary.txt").string().c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"log-polar retinal pre-processing and CNN experiment harness"};
    app.set_config("--config", "", "key=value config file; explicit flags win");
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand name

    GlobalOpts g;
    g.data_dir = default_data_dir();
    app.add_option("--data-dir", g.data_dir, "dataset directory");
    app.add_option("--out-dir", g.out_dir, "output root; runs go to out-dir/run-id");
    app.add_option("--run-id", g.run_id, "run directory name (default: timestamp)");
    app.add_option("--seed", g.seed, "rng seed");
    app.add_option("--threads", g.threads, "worker threads (0 = hardware, 1 = reference)");

    LogPolarConfig lp;
    auto add_lp_flags = [&lp](CLI::App* cmd) {
        cmd->add_option("--n-theta", lp.n_theta, "log-polar angular resolution");
        cmd->add_option("--n-rho", lp.n_rho, "log-polar radial resolution");
        cmd->add_option("--r-min", lp.r_min, "innermost sampling radius (px)");
        cmd->add_option("--r-max", lp.r_max, "outermost sampling radius (px)");
        cmd->add_option("--theta-zero", lp.theta_zero, "angle of column 0 (rad)");
    };

    // fetch
    auto* fetch = app.add_subcommand("fetch", "download+verify the four MNIST files");
    std::string base_url = "https://ossci-datasets.s3.amazonaws.com/mnist/";
    std::string checksums_path;
    fetch->add_option("--base-url", base_url, "mirror base url");
    fetch->add_option("--checksums", checksums_path, "override checksum table file");

    // transform
    auto* transform = app.add_subcommand("transform", "log-polar transform one image to PGM");
    std::string t_input, t_output;
    int t_index = -1;
    bool t_inverse = false;
    std::string t_split = "test";
    transform->add_option("--input", t_input, "input PGM path");
    transform->add_option("--mnist-index", t_index, "take input from the dataset");
    transform->add_option("--split", t_split, "train|test for --mnist-index")
        ->check(CLI::IsMember({"train", "test"}));
    transform->add_flag("--inverse", t_inverse, "apply the approximate inverse instead");
    transform->add_option("--output", t_output, "output PGM path (default in run dir)");
    add_lp_flags(transform);

    // train
    auto* train_cmd = app.add_subcommand("train", "train a baseline CNN (experiments A/B)");
    std::string variant_name_s = "euclidean";
    nn::TrainConfig tc;
    int train_subset = 0, test_subset = 0;
    std::string optimizer = "adam";
    train_cmd->add_option("--variant", variant_name_s, "euclidean|logpolar")
        ->check(CLI::IsMember({"euclidean", "logpolar"}));
    train_cmd->add_option("--epochs", tc.epochs, "training epochs")->check(CLI::PositiveNumber);
    train_cmd->add_option("--batch-size", tc.batch_size)->check(CLI::PositiveNumber);
    train_cmd->add_option("--lr", tc.learning_rate, "learning rate");
    train_cmd->add_option("--optimizer", optimizer, "adam|sgd")
        ->check(CLI::IsMember({"adam", "sgd"}));
    train_cmd->add_option("--train-subset", train_subset, "limit training samples (0 = all)");
    train_cmd->add_option("--test-subset", test_subset, "limit test samples (0 = all)");
    add_lp_flags(train_cmd);

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "rotation x scale accuracy matrix (C/D)");
    std::string s_weights, s_variant = "euclidean";
    std::vector<double> s_rotations, s_scales;
    int s_test_subset = 0;
    sweep_cmd->add_option("--weights", s_weights, "weight file from `train`")->required();
    sweep_cmd->add_option("--variant", s_variant, "euclidean|logpolar")
        ->check(CLI::IsMember({"euclidean", "logpolar"}));
    sweep_cmd->add_option("--rotations", s_rotations, "rotation angles in degrees");
    sweep_cmd->add_option("--scales", s_scales, "scale factors in (0,1]");
    sweep_cmd->add_option("--test-subset", s_test_subset, "limit test samples (0 = all)");
    add_lp_flags(sweep_cmd);

    // compress-sweep
    auto* comp_cmd = app.add_subcommand("compress-sweep",
                                        "retrain across log-polar grid sizes (Fig.11-style)");
    std::vector<std::string> c_grids = {"28x28", "24x24", "20x20", "16x16",
                                        "16x10", "14x11", "12x10", "10x8"};
    nn::TrainConfig ctc;
    int c_train_subset = 0, c_test_subset = 0;
    comp_cmd->add_option("--grids", c_grids, "grid list, e.g. 28x28,16x10 (n_theta x n_rho)")
        ->delimiter(',');
    comp_cmd->add_option("--epochs", ctc.epochs)->check(CLI::PositiveNumber);
    comp_cmd->add_option("--batch-size", ctc.batch_size)->check(CLI::PositiveNumber);
    comp_cmd->add_option("--lr", ctc.learning_rate);
    comp_cmd->add_option("--train-subset", c_train_subset);
    comp_cmd->add_option("--test-subset", c_test_subset);
    add_lp_flags(comp_cmd);

    // report
    auto* report_cmd = app.add_subcommand("report", "summarize result CSVs in a directory");
    std::string r_dir;
    report_cmd->add_option("--results-dir", r_dir, "directory containing result CSVs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        ThreadPool::instance().set_threads(effective_threads(g));
        tc.seed = g.seed;
        ctc.seed = g.seed;

        if (*fetch) return cmd_fetch(g, base_url, checksums_path);

        if (*transform) {
            const fs::path run_dir = make_run_dir(g, "transform");
            RunManifest manifest("transform", g.seed, effective_threads(g));
            manifest.set_config({{"lp", lp_json(lp)},
                                 {"inverse", t_inverse},
                                 {"input", t_input},
                                 {"mnist_index", t_index}});
            manifest.write((run_dir / "manifest.json").string());
            Image input;
            if (t_index >= 0) {
                const Dataset ds =
                    load_split(g, t_split == "train" ? Split::train : Split::test);
                if (static_cast<std::size_t>(t_index) >= ds.size())
                    throw Error("transform: --mnist-index out of range");
                input = ds.images[t_index];
            } else if (!t_input.empty()) {
                input = read_pgm(t_input);
            } else {
                throw Error("transform: need --input or --mnist-index");
            }
            Image out;
            if (t_inverse) {
                LogPolarConfig icfg = lp;
                icfg.n_theta = input.w;
                icfg.n_rho = input.h;
                out = from_logpolar(input, icfg, 28, 28);
            } else {
                lp.validate();
                out = to_logpolar(input, make_grid(lp));
            }
            const std::string out_path =
                t_output.empty() ? (run_dir / "transform.pgm").string() : t_output;
            write_pgm(out, out_path);
            std::printf("transform: wrote %s (%dx%d)\n", out_path.c_str(), out.w, out.h);
            return 0;
        }

        if (*train_cmd) {
            const Variant variant = variant_from_name(variant_name_s);
            const fs::path run_dir = make_run_dir(g, std::string("train-") + variant_name_s);
            tc.optimizer = optimizer == "sgd" ? nn::Optimizer::sgd : nn::Optimizer::adam;
            ExperimentConfig cfg;
            cfg.lp = lp;
            cfg.train = tc;
            cfg.train_subset = train_subset;
            cfg.test_subset = test_subset;
            RunManifest manifest("train", g.seed, effective_threads(g));
            manifest.set_config({{"variant", variant_name_s},
                                 {"epochs", tc.epochs},
                                 {"batch_size", tc.batch_size},
                                 {"learning_rate", tc.learning_rate},
                                 {"optimizer", optimizer},
                                 {"train_subset", train_subset},
                                 {"test_subset", test_subset},
                                 {"lp", lp_json(lp)}});
            record_dataset(manifest, g);
            manifest.write((run_dir / "manifest.json").string());

            const auto t0 = std::chrono::steady_clock::now();
            const Dataset train_ds = load_split(g, Split::train);
            const Dataset test_ds = load_split(g, Split::test);
            BaselineResult result = run_baseline(variant, train_ds, test_ds, cfg,
                                                 [](const nn::EpochStat& s) {
                                                     std::printf(
                                                         "epoch %d: loss %.4f, test acc %.4f (%.1fs)\n",
                                                         s.epoch, s.train_loss,
                                                         s.test_accuracy, s.seconds);
                                                     std::fflush(stdout);
                                                 });
            nn::save_weights(result.net, (run_dir / "weights.fw").string());
            export_train_report_csv(result.report, (run_dir / "train_report.csv").string());
            manifest.set_timing_seconds(
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            manifest.write((run_dir / "manifest.json").string());
            std::printf("train: final test accuracy %.4f; artifacts in %s\n",
                        result.report.final_test_accuracy, run_dir.string().c_str());
            return 0;
        }

        if (*sweep_cmd) {
            const Variant variant = variant_from_name(s_variant);
            SweepSpec spec;
            spec.variant = variant;
            spec.rotations_deg =
                s_rotations.empty() ? SweepSpec::default_rotations() : s_rotations;
            spec.scales = s_scales.empty() ? SweepSpec::default_scales() : s_scales;
            spec.validate();

            nn::Network<float> net = nn::load_weights(s_weights);
            ExperimentConfig cfg;
            cfg.lp = lp;
            cfg.test_subset = s_test_subset;
            const nn::Shape3 want = variant == Variant::logpolar
                                        ? nn::Shape3{1, lp.n_rho, lp.n_theta}
                                        : nn::Shape3{1, 28, 28};
            if (!(net.input_shape() == want))
                throw ArchMismatch("sweep: weight file input " +
                                   std::to_string(net.input_shape().h) + "x" +
                                   std::to_string(net.input_shape().w) +
                                   " does not match the " + s_variant + " pipeline");

            const fs::path run_dir = make_run_dir(g, std::string("sweep-") + s_variant);
            RunManifest manifest("sweep", g.seed, effective_threads(g));
            manifest.set_config({{"variant", s_variant},
                                 {"weights", s_weights},
                                 {"rotations", spec.rotations_deg},
                                 {"scales", spec.scales},
                                 {"test_subset", s_test_subset},
                                 {"lp", lp_json(lp)}});
            record_dataset(manifest, g);
            manifest.write((run_dir / "manifest.json").string());

            const auto t0 = std::chrono::steady_clock::now();
            const Dataset test_ds = load_split(g, Split::test);
            const AccuracyMatrix m = run_sweep(net, spec, test_ds, cfg);
            export_matrix_csv(m, (run_dir / ("sweep_" + s_variant + ".csv")).string());
            export_matrix_pgm(m, (run_dir / ("sweep_" + s_variant + ".pgm")).string());
            manifest.set_timing_seconds(
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            manifest.write((run_dir / "manifest.json").string());
            std::printf("sweep: %zu x %zu matrix written to %s\n",
                        m.rotations_deg.size(), m.scales.size(), run_dir.string().c_str());
            return 0;
        }

        if (*comp_cmd) {
            // parse + dedupe grids
            std::vector<std::pair<int, int>> grids;
            std::set<std::pair<int, int>> seen;
            for (const std::string& s : c_grids) {
                const auto x = s.find('x');
                if (x == std::string::npos)
                    throw Error("compress-sweep: grid '" + s + "' is not WxH");
                const std::pair<int, int> grid = {std::stoi(s.substr(0, x)),
                                                  std::stoi(s.substr(x + 1))};
                if (!seen.insert(grid).second) {
                    std::fprintf(stderr, "compress-sweep: duplicate grid %s ignored\n",
                                 s.c_str());
                    continue;
                }
                grids.push_back(grid);
            }
            const fs::path run_dir = make_run_dir(g, "compress-sweep");
            ExperimentConfig cfg;
            cfg.lp = lp;
            cfg.train = ctc;
            cfg.train_subset = c_train_subset;
            cfg.test_subset = c_test_subset;
            RunManifest manifest("compress-sweep", g.seed, effective_threads(g));
            manifest.set_config({{"grids", c_grids},
                                 {"epochs", ctc.epochs},
                                 {"batch_size", ctc.batch_size},
                                 {"learning_rate", ctc.learning_rate},
                                 {"lp", lp_json(lp)}});
            record_dataset(manifest, g);
            manifest.write((run_dir / "manifest.json").string());

            const auto t0 = std::chrono::steady_clock::now();
            const Dataset train_ds = load_split(g, Split::train);
            const Dataset test_ds = load_split(g, Split::test);
            const auto points = compression_sweep(
                grids, train_ds, test_ds, cfg, [](const CompressionPoint& p) {
                    std::printf("grid %dx%d: factor %.4f, accuracy %.4f\n", p.n_theta,
                                p.n_rho, p.factor, p.accuracy);
                    std::fflush(stdout);
                });
            export_compression_csv(points, (run_dir / "compression.csv").string());
            manifest.set_timing_seconds(
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            manifest.write((run_dir / "manifest.json").string());
            std::printf("compress-sweep: %zu rows written to %s\n", points.size(),
                        run_dir.string().c_str());
            return 0;
        }

        if (*report_cmd) {
            const std::string dir = r_dir.empty() ? g.out_dir : r_dir;
            return run_report(dir, g);
        }
    } catch (const Divergence& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return 3;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
