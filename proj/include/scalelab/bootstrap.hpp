#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "scalelab/errors.hpp"
#include "scalelab/numerics/linalg.hpp"
#include "scalelab/ols.hpp"

namespace scalelab {

namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Independent stream for replicate `index` of a run seeded with `seed`.
inline std::mt19937_64 replicate_stream(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(index)));
}

/// Uniform integer in [0, n) by rejection; identical on every platform,
/// unlike std::uniform_int_distribution.
inline std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = gen();
    } while (x >= limit);
    return x % n;
}

} // namespace rng

struct BootstrapOptions {
    std::size_t replicates = 10000;
    std::uint64_t seed = 20240611;
    unsigned workers = 0; ///< 0 = hardware concurrency
    /// Give up on a replicate after this many consecutive rank-deficient draws.
    std::size_t max_attempts_per_replicate = 1000;
};

/// Coefficient vectors from row-resampled refits, one row per replicate.
struct BootstrapDraws {
    Matrix coefficients; ///< replicates x k
    std::size_t rejected = 0; ///< rank-deficient resamples that were redrawn
    std::uint64_t seed = 0;
};

/// Resamples rows of (X, y) with replacement and refits by least squares.
/// Rank-deficient resamples are discarded and redrawn from the same replicate
/// stream, so the result depends only on (seed, replicate count).
inline BootstrapDraws bootstrap_coefficients(const RegressionFrame& frame, const BootstrapOptions& opt) {
    if (opt.replicates < 1) throw InvalidParameter("bootstrap needs at least one replicate");
    const std::size_t n = frame.n();
    const std::size_t k = frame.k();
    if (n < k) throw DimensionMismatch("bootstrap needs at least as many rows as coefficients");

    BootstrapDraws out;
    out.seed = opt.seed;
    out.coefficients = Matrix(opt.replicates, k);
    std::vector<std::size_t> rejected(opt.replicates, 0);
    std::atomic<bool> exhausted{false};

    auto run_range = [&](std::size_t begin, std::size_t end) {
        std::vector<std::size_t> idx(n);
        Vector y(n);
        for (std::size_t r = begin; r < end && !exhausted.load(std::memory_order_relaxed); ++r) {
            auto gen = rng::replicate_stream(opt.seed, r);
            for (std::size_t attempt = 0;; ++attempt) {
                if (attempt >= opt.max_attempts_per_replicate) {
                    exhausted = true;
                    break;
                }
                for (auto& i : idx) i = static_cast<std::size_t>(rng::uniform_below(gen, n));
                const Matrix xs = frame.x.select_rows(idx);
                for (std::size_t i = 0; i < n; ++i) y[i] = frame.y[idx[i]];
                const LstSqSolution sol = solve_least_squares(xs, y, RankPolicy::pseudo_inverse);
                if (sol.rank < k) {
                    ++rejected[r];
                    continue;
                }
                std::copy(sol.coefficients.begin(), sol.coefficients.end(), out.coefficients.row(r).begin());
                break;
            }
        }
    };

    unsigned workers = opt.workers ? opt.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, opt.replicates));
    if (workers <= 1) {
        run_range(0, opt.replicates);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (opt.replicates + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t b = w * chunk;
            const std::size_t e = std::min(opt.replicates, b + chunk);
            if (b >= e) break;
            pool.emplace_back(run_range, b, e);
        }
        for (auto& t : pool) t.join();
    }

    for (std::size_t r : rejected) out.rejected += r;
    const std::size_t attempts = opt.replicates + out.rejected;
    if (exhausted || 2 * out.rejected > attempts)
        throw TooFewValidResamples("more than half of the bootstrap resamples were rank deficient");
    return out;
}

/// Linear-interpolation quantile (order statistics at h = q (n - 1)).
inline double quantile_linear(std::vector<double> values, double q) {
    if (values.empty()) throw EmptyInput("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double h = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

/// Percentile interval for w' beta over the bootstrap draws; the point is the
/// full-data estimate `point`.
inline IntervalEstimate percentile_interval(const BootstrapDraws& draws, std::span<const double> weights,
                                            double point, double level = 0.95) {
    if (weights.size() != draws.coefficients.cols()) throw DimensionMismatch("weights length != coefficients");
    if (!(level > 0.0 && level < 1.0)) throw InvalidParameter("confidence level must be in (0, 1)");
    std::vector<double> stats(draws.coefficients.rows());
    for (std::size_t r = 0; r < stats.size(); ++r) stats[r] = dot(draws.coefficients.row(r), weights);
    const double alpha = 1.0 - level;
    IntervalEstimate out;
    out.method = IntervalMethod::bootstrap_percentile;
    out.level = level;
    out.point = point;
    out.lower = quantile_linear(stats, 0.5 * alpha);
    out.upper = quantile_linear(std::move(stats), 1.0 - 0.5 * alpha);
    return out;
}

/// Bootstrap percentile interval for the contrast `weights` (a unit vector
/// selects a single coefficient).
inline IntervalEstimate bootstrap_ci(const RegressionFrame& frame, std::span<const double> weights,
                                     const BootstrapOptions& opt, double level = 0.95) {
    const OlsFit full = fit(frame);
    if (weights.size() != full.k) throw DimensionMismatch("weights length != coefficients");
    const BootstrapDraws draws = bootstrap_coefficients(frame, opt);
    return percentile_interval(draws, weights, dot(weights, full.coefficients), level);
}

} // namespace scalelab
