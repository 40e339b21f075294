#include "cobs/core.hpp"
#include "cobs/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace cobs {

namespace {
std::atomic<int> g_threads{1};
} // namespace

void set_threads(int n) { g_threads.store(n < 1 ? 1 : n); }
int threads() { return g_threads.load(); }

DegenerateVarianceError::DegenerateVarianceError(int i, int j)
    : std::runtime_error("degenerate variance denominator at variable pair (" +
                         std::to_string(i) + ", " + std::to_string(j) + ")"),
      var_i(i), var_j(j) {}

Eigen::Index PartitionedDataset::total_samples() const {
    Eigen::Index n = 0;
    for (const auto& p : partitions) n += p.n();
    return n;
}

void center_partition_inplace(Partition& p) {
    const Eigen::RowVectorXd means = p.data.colwise().mean();
    p.data.rowwise() -= means;
    p.centered = true;
}

Partition center_partition(const Partition& p) {
    Partition out = p;
    center_partition_inplace(out);
    return out;
}

PartitionedDataset center_dataset(const PartitionedDataset& ds) {
    PartitionedDataset out = ds;
    for (auto& p : out.partitions) center_partition_inplace(p);
    return out;
}

PartitionStats partition_stats(const Partition& p) {
    if (!p.centered)
        throw InvalidInput("partition_stats requires a centered partition (id " +
                           std::to_string(p.id) + ")");
    const double n = static_cast<double>(p.n());
    PartitionStats st;
    st.n = p.n();
    st.sigma_hat = (p.data.transpose() * p.data) / n;
    // Force exact symmetry against floating point noise in the product.
    st.sigma_hat = ((st.sigma_hat + Matrix(st.sigma_hat.transpose())) * 0.5).eval();
    // s_ij = mean_m (X_mi X_mj)^2 - sigma_ij^2
    const Matrix sq = p.data.array().square().matrix();
    st.s_hat = (sq.transpose() * sq) / n - st.sigma_hat.array().square().matrix();
    st.s_hat = st.s_hat.cwiseMax(0.0);
    return st;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_cell(const std::string& s, int row, int col) {
    double v;
    const char* b = s.data();
    const char* e = b + s.size();
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{} || res.ptr != e)
        throw InvalidInput("non-numeric cell '" + s + "' at data row " +
                           std::to_string(row) + ", column " + std::to_string(col));
    if (!std::isfinite(v))
        throw InvalidInput("non-finite cell at data row " + std::to_string(row) +
                           ", column " + std::to_string(col));
    return v;
}

} // namespace

PartitionedDataset load_dataset(const std::string& matrix_file,
                                const std::string& manifest_file,
                                int min_samples) {
    std::ifstream mf(matrix_file);
    if (!mf) throw IoError("cannot open matrix file: " + matrix_file);
    std::string line;
    if (!std::getline(mf, line)) throw InvalidInput("matrix file is empty: " + matrix_file);
    std::vector<std::string> names = split_csv_line(line);
    const Eigen::Index d = static_cast<Eigen::Index>(names.size());

    std::vector<std::vector<double>> rows;
    int row_idx = 0;
    while (std::getline(mf, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (static_cast<Eigen::Index>(cells.size()) != d)
            throw InvalidInput("matrix row " + std::to_string(row_idx) + " has " +
                               std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(d));
        std::vector<double> vals(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c)
            vals[c] = parse_cell(cells[c], row_idx, static_cast<int>(c));
        rows.push_back(std::move(vals));
        ++row_idx;
    }

    std::ifstream man(manifest_file);
    if (!man) throw IoError("cannot open manifest file: " + manifest_file);
    if (!std::getline(man, line)) throw InvalidInput("manifest file is empty: " + manifest_file);

    struct Group {
        std::vector<int> sample_rows;
        std::optional<std::string> window;
    };
    std::vector<std::string> order;               // partition ids in first-appearance order
    std::map<std::string, Group> groups;
    int man_row = 1;
    while (std::getline(man, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() < 2)
            throw InvalidInput("manifest line " + std::to_string(man_row) +
                               " needs at least sample_id,partition_id");
        int sample;
        const auto res = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), sample);
        if (res.ec != std::errc{})
            throw InvalidInput("manifest line " + std::to_string(man_row) +
                               ": bad sample_id '" + cells[0] + "'");
        if (sample < 0 || sample >= static_cast<int>(rows.size()))
            throw InvalidInput("manifest references missing data row " + std::to_string(sample));
        auto it = groups.find(cells[1]);
        if (it == groups.end()) {
            order.push_back(cells[1]);
            it = groups.emplace(cells[1], Group{}).first;
        }
        it->second.sample_rows.push_back(sample);
        if (cells.size() >= 3 && !cells[2].empty()) it->second.window = cells[2];
        ++man_row;
    }

    PartitionedDataset ds;
    ds.d = d;
    ds.variable_names = std::move(names);
    int next_id = 0;
    for (const auto& key : order) {
        const Group& g = groups.at(key);
        if (static_cast<int>(g.sample_rows.size()) < min_samples) continue;
        Partition p;
        p.id = next_id++;
        p.window = g.window;
        p.data.resize(static_cast<Eigen::Index>(g.sample_rows.size()), d);
        for (std::size_t i = 0; i < g.sample_rows.size(); ++i)
            for (Eigen::Index j = 0; j < d; ++j)
                p.data(static_cast<Eigen::Index>(i), j) = rows[g.sample_rows[i]][j];
        ds.partitions.push_back(std::move(p));
    }
    if (ds.partitions.empty())
        throw InvalidInput("no partitions with at least " + std::to_string(min_samples) +
                           " samples after filtering");
    return ds;
}

void save_dataset(const PartitionedDataset& ds,
                  const std::string& matrix_file,
                  const std::string& manifest_file) {
    std::ofstream mf(matrix_file);
    if (!mf) throw IoError("cannot write matrix file: " + matrix_file);
    mf.precision(17);
    for (Eigen::Index j = 0; j < ds.d; ++j) {
        if (j) mf << ',';
        mf << (j < static_cast<Eigen::Index>(ds.variable_names.size())
                   ? ds.variable_names[j]
                   : "v" + std::to_string(j));
    }
    mf << '\n';
    std::ofstream man(manifest_file);
    if (!man) throw IoError("cannot write manifest file: " + manifest_file);
    man << "sample_id,partition_id,window\n";
    int row = 0;
    for (const auto& p : ds.partitions) {
        for (Eigen::Index i = 0; i < p.n(); ++i) {
            for (Eigen::Index j = 0; j < ds.d; ++j) {
                if (j) mf << ',';
                mf << p.data(i, j);
            }
            mf << '\n';
            man << row << ',' << p.id << ',' << (p.window ? *p.window : "") << '\n';
            ++row;
        }
    }
}

std::string serialize_dataset(const PartitionedDataset& ds) {
    std::ostringstream os;
    os.precision(17);
    os << "d=" << ds.d << ";r=" << ds.r() << '\n';
    for (const auto& p : ds.partitions) {
        os << p.id << '|' << (p.window ? *p.window : "-") << '|' << p.n() << '|';
        for (Eigen::Index i = 0; i < p.n(); ++i)
            for (Eigen::Index j = 0; j < p.d(); ++j) os << p.data(i, j) << ' ';
        os << '\n';
    }
    return os.str();
}

} // namespace cobs
