#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cxr::stats {

struct ShapiroResult {
    double w = 0.0;
    double p = 0.0;
    std::size_t n_used = 0;
    std::optional<std::uint64_t> subsample_seed; // set when n > kShapiroMaxN
};

inline constexpr std::size_t kShapiroMaxN = 5000;

/// Shapiro-Wilk normality test, Royston's AS R94 approximation. Inputs larger
/// than 5000 observations are reduced to a seeded random subsample of 5000.
ShapiroResult shapiro_wilk(std::span<const double> x, std::uint64_t subsample_seed = 0);

struct Group {
    std::string name;
    std::vector<double> values;
};

struct AnovaResult {
    double f = 0.0;
    double p = 1.0;
    int df_between = 0;
    int df_within = 0;
    double ms_within = 0.0;
};

AnovaResult anova_oneway(std::span<const Group> groups);

struct TukeyRow {
    std::string group_a;
    std::string group_b;
    double mean_difference = 0.0; // mean(b) - mean(a)
    double q = 0.0;
    double p = 1.0;
    double q_critical = 0.0;
    bool significant = false;
};

/// Tukey-Kramer HSD, one row per unordered pair in input order:
/// q = |mean_a - mean_b| / sqrt(MSW / 2 * (1/n_a + 1/n_b)), significant iff
/// q exceeds the studentized-range (1 - alpha) quantile for k groups and the
/// within-group degrees of freedom.
std::vector<TukeyRow> tukey_kramer(std::span<const Group> groups, double alpha);

/// P(Q <= q) for the studentized range of k means with df degrees of freedom,
/// by adaptive Gauss-Kronrod quadrature over the chi scale factor and the
/// normal range density.
double studentized_range_cdf(double q, int k, double df);

/// Inverse of studentized_range_cdf in q.
double studentized_range_quantile(double p, int k, double df);

} // namespace cxr::stats
