#include "cxr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <tuple>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include "cxr/error.hpp"
#include "cxr/random.hpp"

namespace cxr::stats {

namespace {

const boost::math::normal_distribution<double> kStdNormal(0.0, 1.0);

// Horner evaluation of c[0] + c[1] x + ...
template <std::size_t N>
double poly(const double (&c)[N], double x) {
    double r = 0.0;
    for (std::size_t i = N; i-- > 0;) r = r * x + c[i];
    return r;
}

// Half of the antisymmetric AS R94 coefficient vector: a[i] pairs with the
// i-th largest and (negated) i-th smallest order statistic.
std::vector<double> shapiro_coefficients(std::size_t n) {
    const std::size_t half = n / 2;
    std::vector<double> a(half);
    if (n == 3) {
        a[0] = std::sqrt(0.5);
        return a;
    }
    static constexpr double c1[] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
    static constexpr double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};

    const auto an = static_cast<double>(n);
    std::vector<double> m(half);
    double summ2 = 0.0;
    for (std::size_t i = 0; i < half; ++i) {
        m[i] = boost::math::quantile(kStdNormal, (static_cast<double>(i + 1) - 0.375) / (an + 0.25));
        summ2 += m[i] * m[i];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(an);
    const double a1 = poly(c1, rsn) - m[0] / ssumm2;

    std::size_t first_plain = 1;
    double fac = 0.0;
    if (n > 5) {
        const double a2 = -m[1] / ssumm2 + poly(c2, rsn);
        fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) /
                        (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
        a[1] = a2;
        first_plain = 2;
    } else {
        fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
    }
    a[0] = a1;
    for (std::size_t i = first_plain; i < half; ++i) a[i] = -m[i] / fac;
    return a;
}

double shapiro_pvalue(double w, std::size_t n) {
    const auto an = static_cast<double>(n);
    if (n == 3) {
        constexpr double pi6 = 1.90985931710274; // 6 / pi
        constexpr double stqr = 1.04719755119660; // pi / 3
        return std::clamp(pi6 * (std::asin(std::sqrt(w)) - stqr), 0.0, 1.0);
    }
    static constexpr double g[] = {-2.273, 0.459};
    static constexpr double c3[] = {0.5440, -0.39978, 0.025054, -6.714e-4};
    static constexpr double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
    static constexpr double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
    static constexpr double c6[] = {-0.4803, -0.082676, 0.0030302};

    double y = std::log(1.0 - w);
    double mean = 0.0;
    double sd = 0.0;
    if (n <= 11) {
        const double gamma = poly(g, an);
        if (y >= gamma) return 1e-99;
        y = -std::log(gamma - y);
        mean = poly(c3, an);
        sd = std::exp(poly(c4, an));
    } else {
        const double xx = std::log(an);
        mean = poly(c5, xx);
        sd = std::exp(poly(c6, xx));
    }
    return boost::math::cdf(boost::math::complement(kStdNormal, (y - mean) / sd));
}

} // namespace

ShapiroResult shapiro_wilk(std::span<const double> x, std::uint64_t subsample_seed) {
    if (x.size() < 3) throw Error("too few observations for Shapiro-Wilk (need >= 3)");
    for (double v : x) {
        if (!std::isfinite(v)) throw Error("Shapiro-Wilk: non-finite observation");
    }
    ShapiroResult result;
    std::vector<double> sample(x.begin(), x.end());
    if (sample.size() > kShapiroMaxN) {
        Rng rng(subsample_seed);
        rng.shuffle(sample.begin(), sample.end());
        sample.resize(kShapiroMaxN);
        result.subsample_seed = subsample_seed;
    }
    std::sort(sample.begin(), sample.end());
    const std::size_t n = sample.size();
    result.n_used = n;

    const double range = sample.back() - sample.front();
    if (!(range > 1e-19 * std::max(1.0, std::abs(sample.front())))) {
        throw Error("Shapiro-Wilk: zero-variance sample");
    }

    const auto a = shapiro_coefficients(n);
    const double mean = std::accumulate(sample.begin(), sample.end(), 0.0) / static_cast<double>(n);
    double numerator = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) numerator += a[i] * (sample[n - 1 - i] - sample[i]);
    double ss = 0.0;
    for (double v : sample) ss += (v - mean) * (v - mean);

    result.w = std::min(1.0, numerator * numerator / ss);
    result.p = std::clamp(shapiro_pvalue(result.w, n), 0.0, 1.0);
    return result;
}

namespace {

struct GroupStats {
    double n = 0.0;
    double mean = 0.0;
    double ss = 0.0;
};

std::vector<GroupStats> describe(std::span<const Group> groups) {
    if (groups.size() < 2) throw Error("ANOVA needs at least 2 groups");
    std::vector<GroupStats> out;
    for (const auto& g : groups) {
        if (g.values.size() < 2) throw Error("group '" + g.name + "' has fewer than 2 observations");
        GroupStats s;
        s.n = static_cast<double>(g.values.size());
        for (double v : g.values) {
            if (!std::isfinite(v)) throw Error("group '" + g.name + "' contains a non-finite value");
            s.mean += v;
        }
        s.mean /= s.n;
        for (double v : g.values) s.ss += (v - s.mean) * (v - s.mean);
        out.push_back(s);
    }
    return out;
}

} // namespace

AnovaResult anova_oneway(std::span<const Group> groups) {
    const auto stats = describe(groups);
    double total_n = 0.0;
    double grand = 0.0;
    double ss_within = 0.0;
    for (const auto& s : stats) {
        total_n += s.n;
        grand += s.n * s.mean;
        ss_within += s.ss;
    }
    grand /= total_n;
    double ss_between = 0.0;
    for (const auto& s : stats) ss_between += s.n * (s.mean - grand) * (s.mean - grand);

    AnovaResult r;
    r.df_between = static_cast<int>(stats.size()) - 1;
    r.df_within = static_cast<int>(total_n) - static_cast<int>(stats.size());
    if (!(ss_within > 0.0)) throw Error("zero within-group variance in every group");
    r.ms_within = ss_within / r.df_within;
    r.f = (ss_between / r.df_between) / r.ms_within;
    if (r.f <= 0.0) {
        r.p = 1.0;
    } else {
        boost::math::fisher_f_distribution<double> dist(r.df_between, r.df_within);
        r.p = std::clamp(boost::math::cdf(boost::math::complement(dist, r.f)), 0.0, 1.0);
    }
    return r;
}

namespace {

// P(range of k iid standard normals <= w).
double normal_range_cdf(double w, int k) {
    if (w <= 0.0) return 0.0;
    // Plain erfc/exp here: this runs hundreds of thousands of times per
    // studentized-range evaluation.
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    constexpr double inv_sqrt2pi = 0.39894228040143267794;
    auto phi = [](double x) { return 0.5 * std::erfc(-x * inv_sqrt2); };
    auto integrand = [&](double z) {
        const double inner = phi(z) - phi(z - w);
        if (inner <= 0.0) return 0.0;
        return inv_sqrt2pi * std::exp(-0.5 * z * z) * std::pow(inner, k - 1);
    };
    using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
    const double value = Quad::integrate(integrand, -8.5, 0.0, 15, 1e-13) +
                         Quad::integrate(integrand, 0.0, 8.5 + w, 15, 1e-13);
    return std::clamp(k * value, 0.0, 1.0);
}

} // namespace

double studentized_range_cdf(double q, int k, double df) {
    if (k < 2) throw Error("studentized range needs k >= 2");
    if (!(df > 0.0)) throw Error("studentized range needs df > 0");
    if (q <= 0.0) return 0.0;
    if (!std::isfinite(q)) return 1.0;
    if (df > 1e7) return normal_range_cdf(q, k);

    // Density of s = sqrt(chi2_df / df).
    const double log_norm = 0.5 * df * std::log(df) - boost::math::lgamma(0.5 * df) -
                            (0.5 * df - 1.0) * std::log(2.0);
    auto integrand = [&](double s) {
        if (s <= 0.0) return 0.0;
        const double log_density = log_norm + (df - 1.0) * std::log(s) - 0.5 * df * s * s;
        return std::exp(log_density) * normal_range_cdf(q * s, k);
    };

    boost::math::chi_squared_distribution<double> chi2(df);
    const double s_lo = std::sqrt(boost::math::quantile(chi2, 1e-16) / df);
    const double s_hi = std::sqrt(boost::math::quantile(boost::math::complement(chi2, 1e-16)) / df);
    const double mode = std::clamp(std::sqrt(std::max(df - 1.0, 0.0) / df), s_lo, s_hi);

    using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
    double total = 0.0;
    if (mode > s_lo) total += Quad::integrate(integrand, s_lo, mode, 15, 1e-12);
    total += Quad::integrate(integrand, mode, s_hi, 15, 1e-12);
    return std::clamp(total, 0.0, 1.0);
}

double studentized_range_quantile(double p, int k, double df) {
    if (!(p > 0.0 && p < 1.0)) throw Error("studentized range quantile needs p in (0, 1)");
    auto f = [&](double q) { return studentized_range_cdf(q, k, df) - p; };
    double hi = 4.0;
    while (f(hi) < 0.0) {
        hi *= 2.0;
        if (hi > 1e6) throw Error("studentized range quantile did not bracket");
    }
    std::uintmax_t max_iter = 200;
    const auto [lo_q, hi_q] = boost::math::tools::toms748_solve(
        f, 0.0, hi, -p, f(hi), boost::math::tools::eps_tolerance<double>(45), max_iter);
    return 0.5 * (lo_q + hi_q);
}

namespace {

// Batch reports call tukey_kramer once per feature with the same (alpha, k,
// df); the quantile inversion dominates the cost, so remember it.
double cached_quantile(double p, int k, double df) {
    static std::mutex mutex;
    static std::map<std::tuple<double, int, double>, double> cache;
    const auto key = std::make_tuple(p, k, df);
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    const double q = studentized_range_quantile(p, k, df);
    std::lock_guard lock(mutex);
    cache.emplace(key, q);
    return q;
}

} // namespace

std::vector<TukeyRow> tukey_kramer(std::span<const Group> groups, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must be in (0, 1)");
    const auto stats = describe(groups);
    const AnovaResult anova = anova_oneway(groups);
    const int k = static_cast<int>(groups.size());
    const double df = anova.df_within;
    const double q_crit = cached_quantile(1.0 - alpha, k, df);

    std::vector<TukeyRow> rows;
    for (std::size_t i = 0; i < stats.size(); ++i) {
        for (std::size_t j = i + 1; j < stats.size(); ++j) {
            TukeyRow row;
            row.group_a = groups[i].name;
            row.group_b = groups[j].name;
            row.mean_difference = stats[j].mean - stats[i].mean;
            const double se = std::sqrt(anova.ms_within / 2.0 * (1.0 / stats[i].n + 1.0 / stats[j].n));
            row.q = std::abs(row.mean_difference) / se;
            row.p = std::clamp(1.0 - studentized_range_cdf(row.q, k, df), 0.0, 1.0);
            row.q_critical = q_crit;
            row.significant = row.q > q_crit;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

} // namespace cxr::stats
