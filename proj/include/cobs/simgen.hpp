#pragma once

#include "cobs/core.hpp"

#include <cstdint>
#include <memory>
#include <string>

namespace cobs {

enum class ProxyConstruction { Sigma1, Sigma2, Sigma3 };

/// Two-cluster SBM covariance: unit diagonal, 0.9 within, 0.1 between.
Matrix sigma1(int d);
/// Same blocks with a, b shrunk toward 0.5: a = 0.9 - 0.4*beta, b = 0.1 + 0.4*beta.
Matrix sigma2(int d, double beta);
/// Three clusters; a fraction of each half breaks off as beta grows.
Matrix sigma3(int d, double beta);

Matrix proxy_covariance(ProxyConstruction c, int d, double beta);

/// Per-variable monotone quantile transform defining the nonparanormal
/// marginals. Built-ins: identity (Gaussian setting), a symmetric two-mode
/// normal mixture, a heavy-tailed scaled-logistic, or a kernel-density fit to
/// a user sample file (one numeric value per line, applied to all variables).
class MarginalFamily {
public:
    static MarginalFamily gaussian_identity();
    static MarginalFamily bimodal();
    static MarginalFamily heavytail();
    static MarginalFamily empirical(const std::string& sample_file);
    static MarginalFamily from_string(const std::string& name);

    bool is_identity() const { return kind_ == Kind::Identity; }
    const std::string& name() const { return name_; }

    /// Quantile function of the target marginal, u in (0, 1).
    double quantile(double u) const;

    /// CDF of the target marginal (used by the test oracles).
    double cdf(double x) const;

    /// Transform one latent Gaussian coordinate with marginal variance var.
    double transform(double z, double var) const;

private:
    enum class Kind { Identity, Bimodal, HeavyTail, Empirical };
    MarginalFamily(Kind k, std::string name) : kind_(k), name_(std::move(name)) {}

    Kind kind_;
    std::string name_;
    // Tabulated CDF for the empirical family.
    std::shared_ptr<const std::vector<std::pair<double, double>>> grid_;
};

struct SimSpec {
    int r1 = 15;
    int r2 = 5;
    int r3 = 5;
    int n = 15;
    int d = 1000;
    double beta = 0.0;
    MarginalFamily marginals = MarginalFamily::gaussian_identity();
    std::uint64_t seed = 0;
};

/// Draw the three-group nonparanormal dataset: partitions 0..r1-1 from
/// sigma1, the next r2 from sigma2(beta), the last r3 from sigma3(beta).
std::pair<PartitionedDataset, MixtureGroundTruth> sample_dataset(const SimSpec& spec);

/// Monte Carlo estimate of the observed (post-transform) covariance, which
/// differs from the proxy matrix for non-identity marginals.
Matrix reference_covariance(ProxyConstruction c, int d, double beta,
                            const MarginalFamily& marginals, long long mc_n);

} // namespace cobs
