#include "prunelab/dataset_io.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include "prunelab/common.hpp"

namespace prunelab {

namespace {

constexpr char kMagic[4] = {'P', 'L', 'D', 'S'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& os, const T& value) {
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T value{};
    is.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!is) throw std::runtime_error("dataset file truncated");
    return value;
}

template <typename Mat>
void write_rowmajor(std::ostream& os, const Mat& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) write_pod<double>(os, m(r, c));
}

template <typename Mat>
void read_rowmajor(std::istream& is, Mat& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = read_pod<double>(is);
}

void write_labels(std::ostream& os, const std::vector<int>& labels) {
    for (int y : labels) write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(y));
}

void read_labels(std::istream& is, std::vector<int>& labels, long n) {
    labels.resize(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i)
        labels[static_cast<std::size_t>(i)] = read_pod<std::uint8_t>(is);
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    const TaskDatasetSpec& spec = ds.provenance.spec;

    os.write(kMagic, 4);
    write_pod(os, kVersion);
    write_pod(os, static_cast<std::int32_t>(spec.extrinsic_dim));
    write_pod(os, static_cast<std::int32_t>(spec.intrinsic_dim));
    write_pod(os, static_cast<std::int32_t>(spec.task_dim));
    write_pod(os, static_cast<std::int64_t>(spec.n_train));
    write_pod(os, static_cast<std::int64_t>(spec.n_test));
    write_pod(os, spec.seed);
    write_pod(os, static_cast<std::uint8_t>(spec.embedding));
    write_pod(os, static_cast<std::int32_t>(ds.provenance.resample_attempts));

    const bool has_a = ds.provenance.embedding_matrix.size() > 0;
    write_pod(os, static_cast<std::uint8_t>(has_a ? 1 : 0));
    if (has_a) write_rowmajor(os, ds.provenance.embedding_matrix);

    write_rowmajor(os, ds.provenance.hyperplane.normal.transpose());
    write_pod(os, static_cast<std::int32_t>(ds.provenance.hyperplane.retained.size()));
    for (int k : ds.provenance.hyperplane.retained) write_pod(os, static_cast<std::int32_t>(k));

    write_pod(os, static_cast<std::int32_t>(ds.provenance.train_latents.cols()));
    write_rowmajor(os, ds.provenance.train_latents);
    write_rowmajor(os, ds.provenance.test_latents);

    write_rowmajor(os, ds.train.inputs);
    write_labels(os, ds.train.labels);
    write_rowmajor(os, ds.test.inputs);
    write_labels(os, ds.test.labels);
    if (!os) throw std::runtime_error("write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("not a dataset file (bad magic): " + path);
    if (read_pod<std::uint32_t>(is) != kVersion)
        throw std::runtime_error("unsupported dataset format version");

    Dataset ds;
    TaskDatasetSpec& spec = ds.provenance.spec;
    spec.extrinsic_dim = read_pod<std::int32_t>(is);
    spec.intrinsic_dim = read_pod<std::int32_t>(is);
    spec.task_dim = read_pod<std::int32_t>(is);
    spec.n_train = read_pod<std::int64_t>(is);
    spec.n_test = read_pod<std::int64_t>(is);
    spec.seed = read_pod<std::uint64_t>(is);
    spec.embedding = static_cast<Embedding>(read_pod<std::uint8_t>(is));
    ds.provenance.resample_attempts = read_pod<std::int32_t>(is);

    if (read_pod<std::uint8_t>(is)) {
        ds.provenance.embedding_matrix.resize(spec.extrinsic_dim, spec.intrinsic_dim);
        read_rowmajor(is, ds.provenance.embedding_matrix);
    }

    ds.provenance.hyperplane.normal.resize(spec.intrinsic_dim);
    for (int i = 0; i < spec.intrinsic_dim; ++i)
        ds.provenance.hyperplane.normal(i) = read_pod<double>(is);
    const auto n_retained = read_pod<std::int32_t>(is);
    for (int i = 0; i < n_retained; ++i)
        ds.provenance.hyperplane.retained.push_back(read_pod<std::int32_t>(is));

    const auto latent_width = read_pod<std::int32_t>(is);
    ds.provenance.train_latents.resize(spec.n_train, latent_width);
    read_rowmajor(is, ds.provenance.train_latents);
    ds.provenance.test_latents.resize(spec.n_test, latent_width);
    read_rowmajor(is, ds.provenance.test_latents);

    ds.train.inputs.resize(spec.n_train, spec.extrinsic_dim);
    read_rowmajor(is, ds.train.inputs);
    read_labels(is, ds.train.labels, spec.n_train);
    ds.test.inputs.resize(spec.n_test, spec.extrinsic_dim);
    read_rowmajor(is, ds.test.inputs);
    read_labels(is, ds.test.labels, spec.n_test);
    return ds;
}

namespace {

void export_split_csv(const DataSplit& split, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    for (Eigen::Index c = 0; c < split.inputs.cols(); ++c) os << "x" << c << ",";
    os << "label\n";
    for (Eigen::Index r = 0; r < split.inputs.rows(); ++r) {
        for (Eigen::Index c = 0; c < split.inputs.cols(); ++c)
            os << format_double(split.inputs(r, c)) << ",";
        os << split.labels[static_cast<std::size_t>(r)] << "\n";
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace

void export_dataset_csv(const Dataset& ds, const std::string& train_path,
                        const std::string& test_path) {
    export_split_csv(ds.train, train_path);
    export_split_csv(ds.test, test_path);
}

}  // namespace prunelab
