#pragma once

#include <Eigen/Dense>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace cobs {

using Matrix = Eigen::MatrixXd;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a normalized test statistic has a zero denominator at some
/// cell, i.e. a variable pair with no covariance variability in either group.
struct DegenerateVarianceError : std::runtime_error {
    DegenerateVarianceError(int i, int j);
    int var_i;
    int var_j;
};

/// Samples x variables block of one partition.
struct Partition {
    int id = 0;
    std::optional<std::string> window;
    Matrix data; // n_p x d
    bool centered = false;

    Eigen::Index n() const { return data.rows(); }
    Eigen::Index d() const { return data.cols(); }
};

struct PartitionedDataset {
    std::vector<Partition> partitions;
    Eigen::Index d = 0;
    std::vector<std::string> variable_names;

    int r() const { return static_cast<int>(partitions.size()); }
    Eigen::Index total_samples() const;
};

/// Cached ingredients of the covariance test for one centered partition:
/// sigma_hat = X'X/n and s_hat_ij = sum_m (X_mi X_mj - sigma_ij)^2 / n.
struct PartitionStats {
    Matrix sigma_hat;
    Matrix s_hat;
    Eigen::Index n = 0;
};

/// Simulation-only labels: which partitions carry the shared covariance.
struct MixtureGroundTruth {
    std::vector<int> indicator;                                 // per partition, 0/1
    std::vector<std::pair<std::string, double>> gamma_w;        // per window
    std::set<int> target_set;                                   // {p : indicator[p] == 1}
};

/// Subtract each column mean. Idempotent; a single sample becomes all zero.
Partition center_partition(const Partition& p);
void center_partition_inplace(Partition& p);

/// Center every partition of a dataset.
PartitionedDataset center_dataset(const PartitionedDataset& ds);

PartitionStats partition_stats(const Partition& p);

/// Load a samples-x-variables CSV (header row of variable names) together with
/// a manifest CSV `sample_id,partition_id[,window]` where sample_id is the
/// 0-based data row. Partitions with fewer than min_samples samples are
/// dropped; survivors are re-indexed 0..r-1 in manifest order.
PartitionedDataset load_dataset(const std::string& matrix_file,
                                const std::string& manifest_file,
                                int min_samples);

/// Write the matrix/manifest pair consumed by load_dataset.
void save_dataset(const PartitionedDataset& ds,
                  const std::string& matrix_file,
                  const std::string& manifest_file);

/// Canonical textual form used by the determinism tests.
std::string serialize_dataset(const PartitionedDataset& ds);

} // namespace cobs
