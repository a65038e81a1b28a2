#include "prunelab/datagen.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "prunelab/common.hpp"

namespace prunelab {

void TaskDatasetSpec::validate() const {
    if (extrinsic_dim < 1) throw std::invalid_argument("TaskDatasetSpec: extrinsic_dim must be >= 1");
    if (intrinsic_dim < 1) throw std::invalid_argument("TaskDatasetSpec: intrinsic_dim must be >= 1");
    if (task_dim < 1) throw std::invalid_argument("TaskDatasetSpec: task_dim must be >= 1");
    if (task_dim > intrinsic_dim)
        throw std::invalid_argument("TaskDatasetSpec: task_dim must be <= intrinsic_dim");
    if (intrinsic_dim > extrinsic_dim)
        throw std::invalid_argument("TaskDatasetSpec: intrinsic_dim must be <= extrinsic_dim");
    if (n_train < 1 || n_test < 1)
        throw std::invalid_argument("TaskDatasetSpec: n_train and n_test must be >= 1");
    if (embedding == Embedding::nonlinear_manifold && intrinsic_dim > kManifoldLatentDim)
        throw std::invalid_argument("TaskDatasetSpec: manifold intrinsic_dim is capped at " +
                                    std::to_string(kManifoldLatentDim));
}

Eigen::MatrixXd sample_embedding(int extrinsic_dim, int intrinsic_dim, std::uint64_t seed) {
    if (intrinsic_dim > extrinsic_dim)
        throw std::invalid_argument("sample_embedding: intrinsic_dim must be <= extrinsic_dim");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::MatrixXd a(extrinsic_dim, intrinsic_dim);
    for (int r = 0; r < extrinsic_dim; ++r)
        for (int c = 0; c < intrinsic_dim; ++c) a(r, c) = dist(rng);
    return a;
}

RowMatrixXd sample_latents(long n, int d_full, int active_dims, std::uint64_t seed) {
    if (active_dims > d_full)
        throw std::invalid_argument("sample_latents: active_dims must be <= d_full");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit;
    RowMatrixXd z = RowMatrixXd::Zero(n, d_full);
    for (long i = 0; i < n; ++i)
        for (int j = 0; j < active_dims; ++j) z(i, j) = unit(rng);
    return z;
}

Hyperplane make_hyperplane(int intrinsic_dim, int task_dim, std::uint64_t seed) {
    if (task_dim < 1) throw std::invalid_argument("make_hyperplane: task_dim must be >= 1");
    if (task_dim > intrinsic_dim)
        throw std::invalid_argument("make_hyperplane: task_dim must be <= intrinsic_dim");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);

    Hyperplane h;
    h.normal = Eigen::VectorXd::Zero(intrinsic_dim);

    // Uniform task_dim-subset via partial Fisher-Yates.
    std::vector<int> idx(static_cast<std::size_t>(intrinsic_dim));
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < task_dim; ++i) {
        std::uniform_int_distribution<int> pick(i, intrinsic_dim - 1);
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
    }
    h.retained.assign(idx.begin(), idx.begin() + task_dim);
    std::sort(h.retained.begin(), h.retained.end());

    // Redraw on the measure-zero event of an exactly-zero retained component.
    bool ok = false;
    while (!ok) {
        ok = true;
        for (int k : h.retained) {
            h.normal(k) = dist(rng);
            if (h.normal(k) == 0.0) ok = false;
        }
    }
    return h;
}

namespace {

std::vector<int> label_latents(const RowMatrixXd& latents, const Hyperplane& h) {
    const int d = static_cast<int>(h.normal.size());
    std::vector<int> labels(static_cast<std::size_t>(latents.rows()));
    for (long i = 0; i < latents.rows(); ++i) {
        const double dot = latents.row(i).head(d).dot(h.normal.transpose());
        labels[static_cast<std::size_t>(i)] = dot >= 0.0 ? 1 : 0;  // sign(0) counts as class 1
    }
    return labels;
}

bool balanced(const std::vector<int>& labels) {
    long ones = 0;
    for (int y : labels) ones += y;
    const double frac = static_cast<double>(ones) / static_cast<double>(labels.size());
    return frac >= 0.45 && frac <= 0.55;
}

constexpr int kMaxBalanceResamples = 10;

// Draws train/test latents (redrawing on class imbalance) and fills labels
// and provenance; input synthesis differs per embedding and happens after.
void draw_latents_and_labels(const TaskDatasetSpec& spec, int d_full, const Hyperplane& h,
                             Dataset& ds) {
    for (int attempt = 0;; ++attempt) {
        if (attempt > kMaxBalanceResamples)
            throw std::runtime_error(
                "dataset generation: class balance not reached after " +
                std::to_string(kMaxBalanceResamples) + " resamples");
        ds.provenance.train_latents = sample_latents(
            spec.n_train, d_full, spec.intrinsic_dim,
            mix_seed(spec.seed, fnv1a64("latents-train"), attempt));
        ds.provenance.test_latents = sample_latents(
            spec.n_test, d_full, spec.intrinsic_dim,
            mix_seed(spec.seed, fnv1a64("latents-test"), attempt));
        ds.train.labels = label_latents(ds.provenance.train_latents, h);
        ds.test.labels = label_latents(ds.provenance.test_latents, h);
        if (balanced(ds.train.labels) && balanced(ds.test.labels)) {
            ds.provenance.resample_attempts = attempt;
            return;
        }
    }
}

}  // namespace

Dataset gen_linear_task_dataset(const TaskDatasetSpec& spec) {
    spec.validate();
    if (spec.embedding != Embedding::linear)
        throw std::invalid_argument("gen_linear_task_dataset: spec.embedding must be linear");

    Dataset ds;
    ds.provenance.spec = spec;
    ds.provenance.embedding_matrix = sample_embedding(spec.extrinsic_dim, spec.intrinsic_dim,
                                                      mix_seed(spec.seed, fnv1a64("embedding")));
    ds.provenance.hyperplane = make_hyperplane(spec.intrinsic_dim, spec.task_dim,
                                               mix_seed(spec.seed, fnv1a64("hyperplane")));
    draw_latents_and_labels(spec, spec.intrinsic_dim, ds.provenance.hyperplane, ds);

    ds.train.inputs.noalias() =
        ds.provenance.train_latents * ds.provenance.embedding_matrix.transpose();
    ds.test.inputs.noalias() =
        ds.provenance.test_latents * ds.provenance.embedding_matrix.transpose();
    return ds;
}

Dataset gen_manifold_dataset(const TaskDatasetSpec& spec) {
    spec.validate();
    if (spec.embedding != Embedding::nonlinear_manifold)
        throw std::invalid_argument("gen_manifold_dataset: spec.embedding must be nonlinear_manifold");

    Dataset ds;
    ds.provenance.spec = spec;
    ds.provenance.hyperplane = make_hyperplane(spec.intrinsic_dim, spec.task_dim,
                                               mix_seed(spec.seed, fnv1a64("hyperplane")));
    draw_latents_and_labels(spec, kManifoldLatentDim, ds.provenance.hyperplane, ds);

    const ManifoldMap map(kManifoldLatentDim, spec.extrinsic_dim,
                          mix_seed(spec.seed, fnv1a64("manifold-map")));
    ds.train.inputs = map.apply(ds.provenance.train_latents);
    ds.test.inputs = map.apply(ds.provenance.test_latents);
    return ds;
}

ManifoldMap::ManifoldMap(int latent_dim, int out_dim, std::uint64_t seed, double weight_scale)
    : latent_dim_(latent_dim), out_dim_(out_dim) {
    if (latent_dim < 1 || out_dim < 1)
        throw std::invalid_argument("ManifoldMap: dimensions must be >= 1");
    const int hidden = 4 * out_dim;
    std::mt19937_64 rng(seed);
    auto draw = [&](int fan_out, int fan_in) {
        const double s = weight_scale / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-s, s);
        Eigen::MatrixXd w(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c) w(r, c) = dist(rng);
        return w;
    };
    w1_ = draw(hidden, latent_dim);
    w2_ = draw(hidden, hidden);
    w3_ = draw(out_dim, hidden);
}

RowMatrixXd ManifoldMap::apply(const RowMatrixXd& latents) const {
    if (latents.cols() != latent_dim_)
        throw std::invalid_argument("ManifoldMap: latent width mismatch");
    RowMatrixXd out(latents.rows(), out_dim_);
    // Chunked to keep the 4*D-wide hidden activations off the peak-memory path.
    const long chunk = 2048;
    for (long start = 0; start < latents.rows(); start += chunk) {
        const long rows = std::min(chunk, latents.rows() - start);
        Eigen::MatrixXd h1 = (latents.middleRows(start, rows) * w1_.transpose()).array().tanh();
        Eigen::MatrixXd h2 = (h1 * w2_.transpose()).array().tanh();
        out.middleRows(start, rows).noalias() = h2 * w3_.transpose();
    }
    return out;
}

Image nn_resize(const Image& image, int out_height, int out_width) {
    if (image.height < 1 || image.width < 1 || image.channels < 1)
        throw std::invalid_argument("nn_resize: source dimensions must be positive");
    if (out_height < 1 || out_width < 1)
        throw std::invalid_argument("nn_resize: target dimensions must be positive");

    Image out;
    out.height = out_height;
    out.width = out_width;
    out.channels = image.channels;
    out.data.resize(static_cast<std::size_t>(out_height) * out_width * image.channels);
    for (int i = 0; i < out_height; ++i) {
        const int src_i = static_cast<int>((static_cast<long>(i) * image.height) / out_height);
        for (int j = 0; j < out_width; ++j) {
            const int src_j = static_cast<int>((static_cast<long>(j) * image.width) / out_width);
            for (int c = 0; c < image.channels; ++c) out.at(i, j, c) = image.at(src_i, src_j, c);
        }
    }
    return out;
}

}  // namespace prunelab
