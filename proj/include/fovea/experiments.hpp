#pragma once

#include "fovea/idx.hpp"
#include "fovea/logpolar.hpp"
#include "fovea/nn/train.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fovea {

enum class Variant { euclidean, logpolar };

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);

// The rotation x scale evaluation grid. Defaults follow the experiment
// harness: 30-degree rotation steps over the full circle, 10% scale steps
// from 100% down to 40%.
struct SweepSpec {
    std::vector<double> rotations_deg;
    std::vector<double> scales;
    Variant variant = Variant::euclidean;

    static std::vector<double> default_rotations(); // 0,30,...,330
    static std::vector<double> default_scales(); // 1.0,0.9,...,0.4
    void validate() const;
};

struct AccuracyMatrix {
    std::vector<double> rotations_deg;
    std::vector<double> scales;
    Variant variant = Variant::euclidean;
    std::vector<double> accuracy; // [rotation][scale] row-major
    std::size_t n_samples = 0;
    std::string manifest_id;

    double& cell(std::size_t r, std::size_t s) { return accuracy[r * scales.size() + s]; }
    double cell(std::size_t r, std::size_t s) const { return accuracy[r * scales.size() + s]; }
};

// Optional instrumentation: called once per (image, stage) application in
// pipeline order. Stages are applied rotate -> scale -> logpolar pre-filter.
enum class TransformStage { rotate, scale, logpolar };
using TransformHook = std::function<void(TransformStage, std::size_t image_index)>;

struct ExperimentConfig {
    LogPolarConfig lp; // grid for the logpolar variant
    nn::TrainConfig train;
    int train_subset = 0; // 0 = all samples
    int test_subset = 0;
    double center_x = 13.5; // warp center for rotation/scale transforms
    double center_y = 13.5;
};

struct BaselineResult {
    nn::Network<float> net;
    nn::TrainReport report;
};

// Applies the variant's pre-filter to a dataset (identity for euclidean).
nn::Samples<float> prepare_samples(const Dataset& ds, Variant variant,
                                   const LogPolarConfig& lp, int subset = 0);

// Experiment A / B: train the variant's CNN from scratch.
BaselineResult run_baseline(Variant variant, const Dataset& train_ds,
                            const Dataset& test_ds, const ExperimentConfig& cfg,
                            const std::function<void(const nn::EpochStat&)>& on_epoch = {});

// Experiment C / D: evaluate a trained network over the grid without
// retraining. For each cell every test image is rotated, then scaled, then
// (logpolar variant) passed through the pre-filter, then classified.
AccuracyMatrix run_sweep(nn::Network<float>& net, const SweepSpec& spec,
                         const Dataset& test_ds, const ExperimentConfig& cfg,
                         const TransformHook& hook = {});

// Cellwise lp - eu. Throws GridMismatch when the grids differ.
AccuracyMatrix diff_map(const AccuracyMatrix& lp, const AccuracyMatrix& eu);

struct CompressionPoint {
    int n_theta = 0;
    int n_rho = 0;
    double factor = 0.0;
    double accuracy = 0.0;
    int epochs = 0;
};

// Fig-11 style sweep: retrain a fresh CNN per grid geometry on the log-polar
// datasets at that resolution; results sorted by compression factor.
std::vector<CompressionPoint> compression_sweep(
    const std::vector<std::pair<int, int>>& grids, const Dataset& train_ds,
    const Dataset& test_ds, const ExperimentConfig& cfg,
    const std::function<void(const CompressionPoint&)>& on_point = {});

// CSV schema: rotation_deg,scale_pct,variant,accuracy,n_samples (one header
// line); heatmap: 8-bit PGM, rows = scales, cols = rotations, accuracy 0 ->
// black, 1 -> white. Byte-stable for identical inputs.
void export_matrix_csv(const AccuracyMatrix& m, const std::string& path);
void export_matrix_pgm(const AccuracyMatrix& m, const std::string& path);
AccuracyMatrix import_matrix_csv(const std::string& path);

// CSV schema: n_theta,n_rho,compression_factor,test_accuracy,epochs
void export_compression_csv(const std::vector<CompressionPoint>& pts,
                            const std::string& path);

void export_train_report_csv(const nn::TrainReport& r, const std::string& path);

} // namespace fovea
