#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "prunelab/data.hpp"

namespace prunelab {

enum class Embedding { linear, nonlinear_manifold };

// Latent-space width of the nonlinear generator. Varying intrinsic_dim below
// this keeps the generator architecture fixed and only changes how many latent
// coordinates are active.
inline constexpr int kManifoldLatentDim = 128;

struct TaskDatasetSpec {
    int extrinsic_dim = 0;  // D: input width
    int intrinsic_dim = 0;  // d: latent dimensions actually varied
    int task_dim = 0;       // t: latent dimensions the label depends on
    long n_train = 50000;
    long n_test = 10000;
    std::uint64_t seed = 0;
    Embedding embedding = Embedding::linear;

    void validate() const;  // enforces 1 <= t <= d <= D and positive sizes
};

/// Labeling hyperplane in the intrinsic space: zero outside `retained`.
struct Hyperplane {
    Eigen::VectorXd normal;     // d entries
    std::vector<int> retained;  // the t indices left nonzero, ascending
};

struct Provenance {
    TaskDatasetSpec spec;
    Eigen::MatrixXd embedding_matrix;  // D x d (linear embedding only, else empty)
    Hyperplane hyperplane;
    RowMatrixXd train_latents;  // n_train x d (linear) or x kManifoldLatentDim
    RowMatrixXd test_latents;
    int resample_attempts = 0;  // latent redraws forced by the class-balance guard
};

struct Dataset {
    DataSplit train;
    DataSplit test;
    Provenance provenance;
};

/// D x d embedding with entries i.i.d. uniform on (-1, 1); row-major draw order.
Eigen::MatrixXd sample_embedding(int extrinsic_dim, int intrinsic_dim, std::uint64_t seed);

/// n x d_full latents: the first active_dims coordinates are i.i.d. standard
/// normal, the rest exactly 0. Drawn row by row.
RowMatrixXd sample_latents(long n, int d_full, int active_dims, std::uint64_t seed);

/// Normal vector with entries uniform on (-1, 1), then zeroed outside a
/// uniformly chosen subset of `task_dim` indices.
Hyperplane make_hyperplane(int intrinsic_dim, int task_dim, std::uint64_t seed);

/// Linear construction: x = A z with z standard normal in d dimensions,
/// label = 1 iff h . z >= 0. Train and test share the same (A, h).
Dataset gen_linear_task_dataset(const TaskDatasetSpec& spec);

/// Fixed random two-hidden-layer tanh map from a kManifoldLatentDim-wide
/// latent space to D dimensions; intrinsic_dim latent coordinates stay active,
/// the rest are zeroed. Labels come from a hyperplane over the active
/// coordinates, as in the linear construction.
Dataset gen_manifold_dataset(const TaskDatasetSpec& spec);

/// The manifold generator network: latent -> tanh(4D) -> tanh(4D) -> D,
/// weights uniform scaled by weight_scale / sqrt(fan_in), no biases.
class ManifoldMap {
  public:
    ManifoldMap(int latent_dim, int out_dim, std::uint64_t seed, double weight_scale = 1.0);
    RowMatrixXd apply(const RowMatrixXd& latents) const;
    int latent_dim() const { return latent_dim_; }
    int out_dim() const { return out_dim_; }

  private:
    int latent_dim_;
    int out_dim_;
    Eigen::MatrixXd w1_, w2_, w3_;  // fan_out x fan_in each
};

/// H x W x C image stored row-major as (row, col, channel).
struct Image {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> data;

    double& at(int i, int j, int c) {
        return data[(static_cast<std::size_t>(i) * width + j) * channels + c];
    }
    double at(int i, int j, int c) const {
        return data[(static_cast<std::size_t>(i) * width + j) * channels + c];
    }
};

/// Nearest-neighbor resample: output pixel (i, j) copies input pixel
/// (floor(i*H/H'), floor(j*W/W')). Pure index remap, no pixel arithmetic.
Image nn_resize(const Image& image, int out_height, int out_width);

}  // namespace prunelab
