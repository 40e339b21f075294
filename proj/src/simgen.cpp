#include "cobs/simgen.hpp"
#include "cobs/parallel.hpp"
#include "cobs/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace cobs {

namespace {

double norm_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

Matrix sbm_covariance(const std::vector<int>& cluster, double a, double b) {
    const int d = static_cast<int>(cluster.size());
    Matrix m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            m(i, j) = (i == j) ? 1.0 : (cluster[i] == cluster[j] ? a : b);
    return m;
}

std::vector<int> two_clusters(int d) {
    std::vector<int> c(d);
    for (int i = 0; i < d; ++i) c[i] = (i < d / 2) ? 0 : 1;
    return c;
}

constexpr double kHeavyTailScale = 0.5513288954217921; // sqrt(3)/pi, unit variance

} // namespace

Matrix sigma1(int d) {
    if (d < 2) throw InvalidInput("sigma1 requires d >= 2");
    return sbm_covariance(two_clusters(d), 0.9, 0.1);
}

Matrix sigma2(int d, double beta) {
    if (beta < 0.0 || beta > 1.0) throw InvalidInput("beta must lie in [0, 1]");
    return sbm_covariance(two_clusters(d), 0.9 - beta * 0.4, 0.1 + beta * 0.4);
}

Matrix sigma3(int d, double beta) {
    if (beta < 0.0 || beta > 1.0) throw InvalidInput("beta must lie in [0, 1]");
    // 1-based boundaries: cluster 1 = [1, t] u [d/2 + 1, u]; cluster 2 fills
    // the first half, cluster 3 the rest.
    const int t = static_cast<int>(std::floor(beta * d / 6.0));
    const int half = d / 2;
    const int u = static_cast<int>(std::floor(d / 2.0 + beta * d / 6.0));
    std::vector<int> cluster(d);
    for (int i = 0; i < d; ++i) {
        const int pos = i + 1;
        if (pos <= t || (pos > half && pos <= u)) cluster[i] = 0;
        else if (pos <= half) cluster[i] = 1;
        else cluster[i] = 2;
    }
    return sbm_covariance(cluster, 0.9, 0.1);
}

Matrix proxy_covariance(ProxyConstruction c, int d, double beta) {
    switch (c) {
        case ProxyConstruction::Sigma1: return sigma1(d);
        case ProxyConstruction::Sigma2: return sigma2(d, beta);
        case ProxyConstruction::Sigma3: return sigma3(d, beta);
    }
    throw InvalidInput("unreachable proxy construction");
}

MarginalFamily MarginalFamily::gaussian_identity() {
    return MarginalFamily(Kind::Identity, "gaussian-identity");
}
MarginalFamily MarginalFamily::bimodal() { return MarginalFamily(Kind::Bimodal, "bimodal"); }
MarginalFamily MarginalFamily::heavytail() {
    return MarginalFamily(Kind::HeavyTail, "heavytail");
}

MarginalFamily MarginalFamily::empirical(const std::string& sample_file) {
    std::ifstream in(sample_file);
    if (!in) throw IoError("cannot open marginal sample file: " + sample_file);
    std::vector<double> xs;
    double v;
    while (in >> v) xs.push_back(v);
    if (xs.size() < 2) throw InvalidInput("marginal sample file needs >= 2 values");
    std::sort(xs.begin(), xs.end());

    // Gaussian KDE with Silverman bandwidth, CDF tabulated on a 4096 grid.
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= n;
    const double sd = std::sqrt(var);
    const double iqr = xs[static_cast<std::size_t>(0.75 * (n - 1))] -
                       xs[static_cast<std::size_t>(0.25 * (n - 1))];
    double h = 0.9 * std::min(sd, iqr / 1.34) * std::pow(n, -0.2);
    if (h <= 0.0) h = sd > 0.0 ? sd * std::pow(n, -0.2) : 1.0;

    constexpr int kGrid = 4096;
    auto grid = std::make_shared<std::vector<std::pair<double, double>>>();
    grid->reserve(kGrid);
    const double lo = xs.front() - 4.0 * h;
    const double hi = xs.back() + 4.0 * h;
    for (int k = 0; k < kGrid; ++k) {
        const double x = lo + (hi - lo) * k / (kGrid - 1);
        double c = 0.0;
        for (double xi : xs) c += norm_cdf((x - xi) / h);
        grid->emplace_back(x, c / n);
    }
    MarginalFamily out(Kind::Empirical, "empirical");
    out.grid_ = std::move(grid);
    return out;
}

MarginalFamily MarginalFamily::from_string(const std::string& name) {
    if (name == "gaussian-identity" || name == "identity") return gaussian_identity();
    if (name == "bimodal") return bimodal();
    if (name == "heavytail") return heavytail();
    throw InvalidInput("unknown marginal family: " + name +
                       " (use gaussian-identity|bimodal|heavytail)");
}

double MarginalFamily::cdf(double x) const {
    switch (kind_) {
        case Kind::Identity:
            return norm_cdf(x);
        case Kind::Bimodal:
            return 0.5 * norm_cdf(x + 2.0) + 0.5 * norm_cdf(x - 2.0);
        case Kind::HeavyTail:
            return 1.0 / (1.0 + std::exp(-x / kHeavyTailScale));
        case Kind::Empirical: {
            const auto& g = *grid_;
            if (x <= g.front().first) return g.front().second;
            if (x >= g.back().first) return g.back().second;
            auto it = std::lower_bound(g.begin(), g.end(), x,
                                       [](const auto& p, double v) { return p.first < v; });
            const auto& [x1, c1] = *it;
            const auto& [x0, c0] = *(it - 1);
            return c0 + (c1 - c0) * (x - x0) / (x1 - x0);
        }
    }
    return 0.0;
}

double MarginalFamily::quantile(double u) const {
    u = std::clamp(u, 1e-15, 1.0 - 1e-15);
    switch (kind_) {
        case Kind::Identity: {
            // Bisection against the normal CDF (only used by the oracles;
            // transform() short-circuits the identity family).
            double lo = -10.0, hi = 10.0;
            while (hi - lo > 1e-9) {
                const double mid = 0.5 * (lo + hi);
                (norm_cdf(mid) < u ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
        case Kind::Bimodal: {
            double lo = -12.0, hi = 12.0;
            while (hi - lo > 1e-9) {
                const double mid = 0.5 * (lo + hi);
                (cdf(mid) < u ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
        case Kind::HeavyTail:
            return kHeavyTailScale * std::log(u / (1.0 - u));
        case Kind::Empirical: {
            const auto& g = *grid_;
            if (u <= g.front().second) return g.front().first;
            if (u >= g.back().second) return g.back().first;
            auto it = std::lower_bound(g.begin(), g.end(), u,
                                       [](const auto& p, double v) { return p.second < v; });
            const auto& [x1, c1] = *it;
            const auto& [x0, c0] = *(it - 1);
            if (c1 == c0) return x0;
            return x0 + (x1 - x0) * (u - c0) / (c1 - c0);
        }
    }
    return 0.0;
}

double MarginalFamily::transform(double z, double var) const {
    if (kind_ == Kind::Identity) return z;
    return quantile(norm_cdf(z / std::sqrt(var)));
}

namespace {

Matrix symmetric_sqrt(const Matrix& psd) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(psd);
    if (eig.info() != Eigen::Success)
        throw InvalidInput("covariance factorization failed");
    // Numerically borderline matrices get negative eigenvalues clamped at 0.
    Eigen::VectorXd ev = eig.eigenvalues().cwiseMax(0.0);
    return eig.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
           eig.eigenvectors().transpose();
}

} // namespace

std::pair<PartitionedDataset, MixtureGroundTruth> sample_dataset(const SimSpec& spec) {
    if (spec.r1 < 1 || spec.r2 < 0 || spec.r3 < 0 || spec.n < 1 || spec.d < 2)
        throw InvalidInput("sample_dataset: invalid SimSpec");
    const int r = spec.r1 + spec.r2 + spec.r3;

    struct Group {
        Matrix factor;
        Eigen::VectorXd diag;
        std::string window;
    };
    std::vector<Group> groups;
    {
        const Matrix s1 = sigma1(spec.d);
        groups.push_back({symmetric_sqrt(s1), s1.diagonal(), "group1"});
        if (spec.r2 > 0 || spec.r3 > 0) {
            const Matrix s2 = sigma2(spec.d, spec.beta);
            groups.push_back({symmetric_sqrt(s2), s2.diagonal(), "group2"});
            const Matrix s3 = sigma3(spec.d, spec.beta);
            groups.push_back({symmetric_sqrt(s3), s3.diagonal(), "group3"});
        }
    }

    PartitionedDataset ds;
    ds.d = spec.d;
    ds.variable_names.reserve(spec.d);
    for (int j = 0; j < spec.d; ++j) ds.variable_names.push_back("v" + std::to_string(j));
    ds.partitions.resize(r);

    std::exception_ptr err;
    parallel_for(r, [&](std::int64_t p) {
        try {
            const int gidx = p < spec.r1 ? 0 : (p < spec.r1 + spec.r2 ? 1 : 2);
            const Group& grp = groups[static_cast<std::size_t>(gidx)];
            Rng rng(spec.seed, {0x5A17ull, static_cast<std::uint64_t>(p)});
            Partition part;
            part.id = static_cast<int>(p);
            part.window = grp.window;
            part.data.resize(spec.n, spec.d);
            Eigen::VectorXd g(spec.d);
            for (int i = 0; i < spec.n; ++i) {
                for (int j = 0; j < spec.d; ++j) g(j) = rng.next_gaussian();
                Eigen::VectorXd z = grp.factor * g;
                for (int j = 0; j < spec.d; ++j)
                    part.data(i, j) = spec.marginals.transform(z(j), grp.diag(j));
            }
            ds.partitions[static_cast<std::size_t>(p)] = std::move(part);
        } catch (...) {
            if (!err) err = std::current_exception();
        }
    });
    if (err) std::rethrow_exception(err);

    MixtureGroundTruth truth;
    truth.indicator.resize(r);
    for (int p = 0; p < r; ++p) {
        truth.indicator[p] = p < spec.r1 ? 1 : 0;
        if (truth.indicator[p]) truth.target_set.insert(p);
    }
    truth.gamma_w.emplace_back("group1", 1.0);
    if (spec.r2 > 0 || spec.r3 > 0) {
        truth.gamma_w.emplace_back("group2", 0.0);
        truth.gamma_w.emplace_back("group3", 0.0);
    }
    return {std::move(ds), std::move(truth)};
}

Matrix reference_covariance(ProxyConstruction c, int d, double beta,
                            const MarginalFamily& marginals, long long mc_n) {
    if (mc_n < 10000) throw InvalidInput("reference_covariance: mc_n must be >= 10^4");
    const Matrix proxy = proxy_covariance(c, d, beta);
    const Matrix factor = symmetric_sqrt(proxy);
    const Eigen::VectorXd diag = proxy.diagonal();

    Matrix second = Matrix::Zero(d, d);
    Eigen::VectorXd first = Eigen::VectorXd::Zero(d);
    Rng rng(0x2EFC07ull, {static_cast<std::uint64_t>(c),
                                          static_cast<std::uint64_t>(d),
                                          static_cast<std::uint64_t>(beta * 1e6)});
    Eigen::VectorXd g(d), x(d);
    for (long long m = 0; m < mc_n; ++m) {
        for (int j = 0; j < d; ++j) g(j) = rng.next_gaussian();
        Eigen::VectorXd z = factor * g;
        for (int j = 0; j < d; ++j) x(j) = marginals.transform(z(j), diag(j));
        first += x;
        second.selfadjointView<Eigen::Lower>().rankUpdate(x);
    }
    const double n = static_cast<double>(mc_n);
    Matrix cov = Matrix(second.selfadjointView<Eigen::Lower>()) / n;
    first /= n;
    cov.noalias() -= first * first.transpose();
    return cov;
}

} // namespace cobs
