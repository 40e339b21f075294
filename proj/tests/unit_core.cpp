#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cobs/core.hpp"
#include "cobs/rng.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

using namespace cobs;

namespace {

Partition random_partition(int n, int d, std::uint64_t seed) {
    Partition p;
    p.data.resize(n, d);
    Rng r(seed);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) p.data(i, j) = r.next_gaussian();
    return p;
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("cobs_core_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const char* name) const { return (path / name).string(); }
};

void write(const std::string& p, const std::string& text) {
    std::ofstream os(p);
    os << text;
}

} // namespace

TEST_CASE("centering removes column means and is idempotent") {
    Partition p = random_partition(5, 3, 1);
    const Partition c = center_partition(p);
    CHECK(c.centered);
    for (int j = 0; j < 3; ++j) CHECK(std::abs(c.data.col(j).mean()) < 1e-12);
    const Partition cc = center_partition(c);
    CHECK((cc.data - c.data).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("centering a single sample yields zeros") {
    Partition p;
    p.data.resize(1, 4);
    p.data << 3.0, -1.0, 0.5, 9.0;
    const Partition c = center_partition(p);
    CHECK(c.data.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("centering the column (1,3) gives (-1,1)") {
    Partition p;
    p.data.resize(2, 1);
    p.data << 1.0, 3.0;
    const Partition c = center_partition(p);
    CHECK(c.data(0, 0) == doctest::Approx(-1.0));
    CHECK(c.data(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("one-dimensional stats by hand: samples (+1,-1)") {
    Partition p;
    p.data.resize(2, 1);
    p.data << 1.0, -1.0;
    p.centered = true;
    const PartitionStats st = partition_stats(p);
    CHECK(st.sigma_hat(0, 0) == doctest::Approx(1.0));
    CHECK(st.s_hat(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("stats of a single centered sample are zero") {
    Partition p;
    p.data = Matrix::Zero(1, 3);
    p.centered = true;
    const PartitionStats st = partition_stats(p);
    CHECK(st.sigma_hat.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("stats match the elementwise loop oracle") {
    Partition p = center_partition(random_partition(6, 4, 2));
    const PartitionStats st = partition_stats(p);
    const int n = 6, d = 4;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            double sigma = 0.0;
            for (int m = 0; m < n; ++m) sigma += p.data(m, i) * p.data(m, j);
            sigma /= n;
            CHECK(st.sigma_hat(i, j) == doctest::Approx(sigma).epsilon(1e-12));
            double s = 0.0;
            for (int m = 0; m < n; ++m) {
                const double dev = p.data(m, i) * p.data(m, j) - sigma;
                s += dev * dev;
            }
            s /= n;
            CHECK(st.s_hat(i, j) == doctest::Approx(s).epsilon(1e-10));
            CHECK(st.s_hat(i, j) >= 0.0);
        }
    }
    CHECK((st.sigma_hat - st.sigma_hat.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("load_dataset drops small partitions and reindexes") {
    TempDir tmp;
    std::string matrix = "v0,v1\n";
    std::string manifest = "sample_id,partition_id\n";
    int row = 0;
    for (int p = 0; p < 3; ++p) {
        const int sizes[3] = {5, 3, 2};
        for (int k = 0; k < sizes[p]; ++k) {
            matrix += std::to_string(row) + ".0,1.5\n";
            manifest += std::to_string(row) + "," + std::to_string(p + 10) + "\n";
            ++row;
        }
    }
    write(tmp.file("m.csv"), matrix);
    write(tmp.file("g.csv"), manifest);
    const PartitionedDataset ds = load_dataset(tmp.file("m.csv"), tmp.file("g.csv"), 5);
    CHECK(ds.r() == 1);
    CHECK(ds.partitions[0].id == 0);
    CHECK(ds.partitions[0].n() == 5);
    CHECK(ds.d == 2);
    CHECK(ds.variable_names[1] == "v1");
}

TEST_CASE("size profile with 125 of 212 groups above the threshold") {
    // Synthetic manifest shaped like a corpus where 125 of 212 partitions have
    // at least 5 samples.
    TempDir tmp;
    std::string matrix = "x\n";
    std::string manifest = "sample_id,partition_id\n";
    int row = 0;
    for (int p = 0; p < 212; ++p) {
        const int size = p < 125 ? 5 + (p % 3) : 1 + (p % 4);
        for (int k = 0; k < size; ++k) {
            matrix += "0.5\n";
            manifest += std::to_string(row) + "," + std::to_string(p) + "\n";
            ++row;
        }
    }
    write(tmp.file("m.csv"), matrix);
    write(tmp.file("g.csv"), manifest);
    const PartitionedDataset ds = load_dataset(tmp.file("m.csv"), tmp.file("g.csv"), 5);
    CHECK(ds.r() == 125);
}

TEST_CASE("manifest referencing a missing row fails") {
    TempDir tmp;
    write(tmp.file("m.csv"), "a,b\n1,2\n");
    write(tmp.file("g.csv"), "sample_id,partition_id\n0,0\n5,0\n");
    CHECK_THROWS_AS(load_dataset(tmp.file("m.csv"), tmp.file("g.csv"), 1), InvalidInput);
}

TEST_CASE("non-numeric cells fail") {
    TempDir tmp;
    write(tmp.file("m.csv"), "a,b\n1,oops\n");
    write(tmp.file("g.csv"), "sample_id,partition_id\n0,0\n");
    CHECK_THROWS_AS(load_dataset(tmp.file("m.csv"), tmp.file("g.csv"), 1), InvalidInput);
}

TEST_CASE("empty dataset after filtering fails") {
    TempDir tmp;
    write(tmp.file("m.csv"), "a\n1\n");
    write(tmp.file("g.csv"), "sample_id,partition_id\n0,0\n");
    CHECK_THROWS_AS(load_dataset(tmp.file("m.csv"), tmp.file("g.csv"), 5), InvalidInput);
}

TEST_CASE("save/load round trip preserves the serialized dataset") {
    TempDir tmp;
    PartitionedDataset ds;
    ds.d = 3;
    ds.variable_names = {"a", "b", "c"};
    for (int p = 0; p < 2; ++p) {
        Partition part = random_partition(6, 3, 40 + p);
        part.id = p;
        part.window = p == 0 ? std::optional<std::string>("w0") : std::nullopt;
        ds.partitions.push_back(std::move(part));
    }
    save_dataset(ds, tmp.file("m.csv"), tmp.file("g.csv"));
    const PartitionedDataset back = load_dataset(tmp.file("m.csv"), tmp.file("g.csv"), 1);
    CHECK(serialize_dataset(back) == serialize_dataset(ds));
    const PartitionedDataset again = load_dataset(tmp.file("m.csv"), tmp.file("g.csv"), 1);
    CHECK(serialize_dataset(back) == serialize_dataset(again));
    CHECK(back.partitions[0].window.has_value());
    CHECK(*back.partitions[0].window == "w0");
}
