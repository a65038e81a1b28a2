#pragma once

#include <Eigen/Dense>
#include <vector>

namespace prunelab {

// Sample-major storage so mini-batch row gathers are contiguous copies.
using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A labeled batch: one sample per row, labels in [0, n_classes).
struct DataSplit {
    RowMatrixXd inputs;       // n x D
    std::vector<int> labels;  // n

    long size() const { return inputs.rows(); }
};

}  // namespace prunelab
