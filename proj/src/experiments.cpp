#include "fovea/experiments.hpp"

#include "fovea/parallel.hpp"
#include "fovea/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fovea {

const char* variant_name(Variant v) {
    return v == Variant::euclidean ? "euclidean" : "logpolar";
}

Variant variant_from_name(const std::string& name) {
    if (name == "euclidean") return Variant::euclidean;
    if (name == "logpolar") return Variant::logpolar;
    throw Error("unknown variant '" + name + "'");
}

std::vector<double> SweepSpec::default_rotations() {
    std::vector<double> r;
    for (int d = 0; d < 360; d += 30) r.push_back(d);
    return r;
}

std::vector<double> SweepSpec::default_scales() {
    return {1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4};
}

void SweepSpec::validate() const {
    if (rotations_deg.empty() || scales.empty())
        throw Error("sweep: rotation and scale lists must be nonempty");
    for (double r : rotations_deg)
        if (!(r >= 0.0) || r >= 360.0)
            throw Error("sweep: rotations must lie in [0,360)");
    for (double s : scales)
        if (!(s > 0.0) || s > 1.0)
            throw Error("sweep: scales must lie in (0,1]");
}

namespace {

int effective_count(std::size_t total, int subset) {
    if (subset <= 0 || static_cast<std::size_t>(subset) >= total)
        return static_cast<int>(total);
    return subset;
}

} // namespace

nn::Samples<float> prepare_samples(const Dataset& ds, Variant variant,
                                   const LogPolarConfig& lp, int subset) {
    const int n = effective_count(ds.size(), subset);
    if (n == 0) throw ShapeMismatch("prepare_samples: empty dataset");
    nn::Samples<float> s;
    s.y.assign(ds.labels.begin(), ds.labels.begin() + n);
    if (variant == Variant::euclidean) {
        const Image& first = ds.images.front();
        s.shape = {1, first.h, first.w};
        s.x.resize(static_cast<std::size_t>(n) * s.shape.size());
        for (int i = 0; i < n; ++i)
            std::copy(ds.images[i].data.begin(), ds.images[i].data.end(),
                      s.x.begin() + static_cast<std::size_t>(i) * s.shape.size());
        return s;
    }
    const SampleGrid grid = make_grid(lp);
    s.shape = {1, lp.n_rho, lp.n_theta};
    s.x.resize(static_cast<std::size_t>(n) * s.shape.size());
    parallel_for(n, [&](std::int64_t b0, std::int64_t b1, int) {
        for (std::int64_t i = b0; i < b1; ++i) {
            const Image out = to_logpolar(ds.images[i], grid);
            std::copy(out.data.begin(), out.data.end(),
                      s.x.begin() + static_cast<std::size_t>(i) * s.shape.size());
        }
    });
    return s;
}

BaselineResult run_baseline(Variant variant, const Dataset& train_ds,
                            const Dataset& test_ds, const ExperimentConfig& cfg,
                            const std::function<void(const nn::EpochStat&)>& on_epoch) {
    const nn::Samples<float> train =
        prepare_samples(train_ds, variant, cfg.lp, cfg.train_subset);
    const nn::Samples<float> test =
        prepare_samples(test_ds, variant, cfg.lp, cfg.test_subset);
    nn::Network<float> net =
        nn::make_mnist_cnn<float>(train.shape.h, train.shape.w, cfg.train.seed);
    nn::TrainReport report = nn::train(net, train, test, cfg.train, on_epoch);
    return {std::move(net), std::move(report)};
}

AccuracyMatrix run_sweep(nn::Network<float>& net, const SweepSpec& spec,
                         const Dataset& test_ds, const ExperimentConfig& cfg,
                         const TransformHook& hook) {
    spec.validate();
    const int n = effective_count(test_ds.size(), cfg.test_subset);
    if (n == 0) throw ShapeMismatch("sweep: empty test set");
    const float xc = static_cast<float>(cfg.center_x);
    const float yc = static_cast<float>(cfg.center_y);
    std::optional<SampleGrid> grid;
    if (spec.variant == Variant::logpolar) grid = make_grid(cfg.lp);

    AccuracyMatrix m;
    m.rotations_deg = spec.rotations_deg;
    m.scales = spec.scales;
    m.variant = spec.variant;
    m.n_samples = static_cast<std::size_t>(n);
    m.accuracy.resize(spec.rotations_deg.size() * spec.scales.size());

    const nn::Shape3 in_shape = net.input_shape();
    const int transformed_size =
        spec.variant == Variant::logpolar
            ? cfg.lp.n_rho * cfg.lp.n_theta
            : test_ds.images.front().w * test_ds.images.front().h;
    if (transformed_size != in_shape.size())
        throw ArchMismatch("sweep: transformed image size " +
                           std::to_string(transformed_size) +
                           " does not match network input " +
                           std::to_string(in_shape.size()));
    nn::Samples<float> cell_samples;
    cell_samples.shape = in_shape;
    cell_samples.y.assign(test_ds.labels.begin(), test_ds.labels.begin() + n);
    cell_samples.x.resize(static_cast<std::size_t>(n) * in_shape.size());

    for (std::size_t ri = 0; ri < spec.rotations_deg.size(); ++ri) {
        const float deg = static_cast<float>(spec.rotations_deg[ri]);
        for (std::size_t si = 0; si < spec.scales.size(); ++si) {
            const float factor = static_cast<float>(spec.scales[si]);
            // transform -> (pre-filter) -> classify, per image
            parallel_for(n, [&](std::int64_t b0, std::int64_t b1, int) {
                for (std::int64_t i = b0; i < b1; ++i) {
                    Image img = rotate(test_ds.images[i], deg, xc, yc);
                    if (hook) hook(TransformStage::rotate, static_cast<std::size_t>(i));
                    img = scale(img, factor, xc, yc);
                    if (hook) hook(TransformStage::scale, static_cast<std::size_t>(i));
                    if (grid) {
                        img = to_logpolar(img, *grid);
                        if (hook) hook(TransformStage::logpolar, static_cast<std::size_t>(i));
                    }
                    std::copy(img.data.begin(), img.data.end(),
                              cell_samples.x.begin() +
                                  static_cast<std::size_t>(i) * in_shape.size());
                }
            });
            m.cell(ri, si) = nn::evaluate(net, cell_samples);
        }
    }
    return m;
}

AccuracyMatrix diff_map(const AccuracyMatrix& lp, const AccuracyMatrix& eu) {
    if (lp.rotations_deg != eu.rotations_deg || lp.scales != eu.scales)
        throw GridMismatch("diff_map: sweep grids differ");
    AccuracyMatrix d = lp;
    d.manifest_id.clear();
    for (std::size_t i = 0; i < d.accuracy.size(); ++i)
        d.accuracy[i] = lp.accuracy[i] - eu.accuracy[i];
    return d;
}

std::vector<CompressionPoint> compression_sweep(
    const std::vector<std::pair<int, int>>& grids, const Dataset& train_ds,
    const Dataset& test_ds, const ExperimentConfig& cfg,
    const std::function<void(const CompressionPoint&)>& on_point) {
    if (grids.empty()) throw Error("compression sweep: empty grid list");
    const int src_w = train_ds.images.front().w;
    const int src_h = train_ds.images.front().h;
    std::vector<CompressionPoint> out;
    for (const auto& [n_theta, n_rho] : grids) {
        ExperimentConfig sub = cfg;
        sub.lp.n_theta = n_theta;
        sub.lp.n_rho = n_rho;
        BaselineResult base = run_baseline(Variant::logpolar, train_ds, test_ds, sub);
        CompressionPoint pt;
        pt.n_theta = n_theta;
        pt.n_rho = n_rho;
        pt.factor = compression_factor(sub.lp, src_w, src_h);
        pt.accuracy = base.report.final_test_accuracy;
        pt.epochs = cfg.train.epochs;
        out.push_back(pt);
        if (on_point) on_point(pt);
    }
    std::sort(out.begin(), out.end(), [](const CompressionPoint& a, const CompressionPoint& b) {
        return a.factor < b.factor;
    });
    return out;
}

namespace {

std::string fmt_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::string fmt_acc(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

} // namespace

void export_matrix_csv(const AccuracyMatrix& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("csv: cannot write " + path);
    out << "rotation_deg,scale_pct,variant,accuracy,n_samples\n";
    for (std::size_t ri = 0; ri < m.rotations_deg.size(); ++ri)
        for (std::size_t si = 0; si < m.scales.size(); ++si)
            out << fmt_num(m.rotations_deg[ri]) << ',' << fmt_num(m.scales[si] * 100.0)
                << ',' << variant_name(m.variant) << ',' << fmt_acc(m.cell(ri, si))
                << ',' << m.n_samples << '\n';
    if (!out) throw IoError("csv: short write to " + path);
}

AccuracyMatrix import_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "rotation_deg,scale_pct,variant,accuracy,n_samples")
        throw BadFormat("csv: unexpected header in " + path);
    std::vector<double> rot, sc, acc;
    std::string variant;
    std::size_t n_samples = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f[5];
        for (int i = 0; i < 5; ++i)
            if (!std::getline(ss, f[i], i == 4 ? '\n' : ','))
                throw BadFormat("csv: malformed row in " + path);
        rot.push_back(std::stod(f[0]));
        sc.push_back(std::stod(f[1]) / 100.0);
        variant = f[2];
        acc.push_back(std::stod(f[3]));
        n_samples = static_cast<std::size_t>(std::stoull(f[4]));
    }
    if (rot.empty()) throw BadFormat("csv: no data rows in " + path);
    AccuracyMatrix m;
    for (double r : rot)
        if (m.rotations_deg.empty() || m.rotations_deg.back() != r) {
            if (std::find(m.rotations_deg.begin(), m.rotations_deg.end(), r) !=
                m.rotations_deg.end())
                throw BadFormat("csv: rows out of grid order in " + path);
            m.rotations_deg.push_back(r);
        }
    const std::size_t ns = rot.size() / m.rotations_deg.size();
    m.scales.assign(sc.begin(), sc.begin() + ns);
    m.variant = variant_from_name(variant);
    m.accuracy = acc;
    m.n_samples = n_samples;
    if (m.accuracy.size() != m.rotations_deg.size() * m.scales.size())
        throw BadFormat("csv: ragged matrix in " + path);
    return m;
}

void export_matrix_pgm(const AccuracyMatrix& m, const std::string& path) {
    // rows = scales, cols = rotations
    Image img(static_cast<int>(m.rotations_deg.size()), static_cast<int>(m.scales.size()));
    for (std::size_t si = 0; si < m.scales.size(); ++si)
        for (std::size_t ri = 0; ri < m.rotations_deg.size(); ++ri)
            img.at(static_cast<int>(ri), static_cast<int>(si)) =
                static_cast<float>(std::clamp(m.cell(ri, si), 0.0, 1.0));
    write_pgm(img, path);
}

void export_compression_csv(const std::vector<CompressionPoint>& pts,
                            const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("csv: cannot write " + path);
    out << "n_theta,n_rho,compression_factor,test_accuracy,epochs\n";
    for (const auto& p : pts)
        out << p.n_theta << ',' << p.n_rho << ',' << fmt_acc(p.factor) << ','
            << fmt_acc(p.accuracy) << ',' << p.epochs << '\n';
    if (!out) throw IoError("csv: short write to " + path);
}

void export_train_report_csv(const nn::TrainReport& r, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("csv: cannot write " + path);
    out << "epoch,train_loss,test_accuracy\n";
    for (const auto& e : r.epochs)
        out << e.epoch << ',' << fmt_acc(e.train_loss) << ',' << fmt_acc(e.test_accuracy)
            << '\n';
    if (!out) throw IoError("csv: short write to " + path);
}

} // namespace fovea
