#include "scanpick/monte_carlo.hpp"

#include "scanpick/error.hpp"
#include "scanpick/percolation.hpp"
#include "scanpick/random.hpp"
#include "scanpick/scan_estimator.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>

namespace scanpick {

namespace {

// Runs fn(k) for k in [0, trials) on `jobs` threads; results land at index k.
template <typename Fn>
auto run_trials(int trials, int jobs, Fn fn) {
    using Result = decltype(fn(0));
    std::vector<Result> out(static_cast<std::size_t>(std::max(trials, 0)));
    const int workers = std::clamp(jobs, 1, std::max(trials, 1));
    if (workers == 1) {
        for (int k = 0; k < trials; ++k) out[k] = fn(k);
        return out;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (int k = next++; k < trials; k = next++) {
                    try {
                        out[k] = fn(k);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

void check_trials(const McOptions& options) {
    if (options.trials < 1) throw InputDomainError("trials must be at least 1");
}

double quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::string summary_fields(const ErrorSummary& s) {
    return format_number(s.mean) + "," + format_number(s.median) + "," + format_number(s.q25) +
           "," + format_number(s.q75) + "," + format_number(s.q90) + "," + format_number(s.max);
}

}  // namespace

BoundResult misselection_bound(std::span<const long> s1, std::span<const long> excess,
                               double contrast, double sigma, double bound_m) {
    if (s1.size() != excess.size()) throw InputDomainError("s1 and excess lists differ in length");
    if (!(contrast > 0.0)) throw InputDomainError("contrast b - a must be positive");
    if (!(sigma > 0.0)) throw InputDomainError("sigma must be positive");
    if (!(bound_m > 0.0)) throw InputDomainError("noise bound M must be positive");

    const double c1 = 3.0 * contrast * contrast;
    const double c2 = 12.0 * sigma * sigma;
    const double c3 = 4.0 * bound_m * contrast;
    double total = 0.0;
    for (std::size_t i = 0; i < s1.size(); ++i) {
        if (s1[i] < 0 || excess[i] < 0) throw InputDomainError("window counts must be non-negative");
        if (s1[i] == 0) {
            total += 1.0;
            continue;
        }
        const double s = static_cast<double>(s1[i]);
        total += std::exp(-c1 * s * s / (c2 * static_cast<double>(excess[i]) + c3 * s));
    }
    return {total, std::min(total, 1.0)};
}

ErrorSummary summarize(std::vector<double> values) {
    ErrorSummary s;
    s.count = values.size();
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    s.median = quantile(values, 0.5);
    s.q25 = quantile(values, 0.25);
    s.q75 = quantile(values, 0.75);
    s.q90 = quantile(values, 0.90);
    s.max = values.back();
    return s;
}

std::string format_number(double v) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), round_sig6(v));
    return std::string(buf.data(), ptr);
}

// ---------------------------------------------------------------------------

ConsistencyResult mc_consistency(const ConsistencyFamily& family, const NoiseModel& noise,
                                 const std::vector<int>& phi0_grid, const McOptions& options) {
    check_trials(options);
    if (phi0_grid.empty()) throw InputDomainError("phi0 grid is empty");

    struct Trial {
        std::vector<double> lower;
        double upper = 0.0;
        double naive = 0.0;
        double coverage = 0.0;
    };
    const auto trials = run_trials(options.trials, options.jobs, [&](int k) {
        Rng layout(derive_seed(options.seed, static_cast<std::uint64_t>(2 * k)));
        const SceneSpec spec = sample_consistency_scene(family, layout);
        const Scene scene =
            generate_scene(spec, noise, derive_seed(options.seed, static_cast<std::uint64_t>(2 * k + 1)));
        const IntegralImage ii = build_integral(scene.image);
        Trial t;
        for (const int phi0 : phi0_grid) {
            t.lower.push_back(std::abs(scan_min_window(ii, phi0).mean - family.a));
        }
        t.upper = std::abs(scan_max_window(ii, family.phi1).mean - family.b);
        t.naive = std::abs(naive_mean(scene.image) - family.a);
        t.coverage = scene.coverage;
        return t;
    });

    ConsistencyResult result;
    result.phi0_grid = phi0_grid;
    result.phi1 = family.phi1;
    result.trials = options.trials;
    for (std::size_t g = 0; g < phi0_grid.size(); ++g) {
        std::vector<double> errs;
        for (const auto& t : trials) errs.push_back(t.lower[g]);
        result.lower_error.push_back(summarize(std::move(errs)));
    }
    std::vector<double> upper, naive, coverage;
    for (const auto& t : trials) {
        upper.push_back(t.upper);
        naive.push_back(t.naive);
        coverage.push_back(t.coverage);
    }
    result.upper_error = summarize(std::move(upper));
    result.naive_error = summarize(std::move(naive));
    result.coverage = summarize(std::move(coverage));
    return result;
}

std::string consistency_csv(const ConsistencyResult& r) {
    std::string out = "estimator,window,trials,mean,median,q25,q75,q90,max\n";
    const std::string trials = std::to_string(r.trials);
    for (std::size_t g = 0; g < r.phi0_grid.size(); ++g) {
        out += "scan_lower," + std::to_string(r.phi0_grid[g]) + "," + trials + "," +
               summary_fields(r.lower_error[g]) + "\n";
    }
    out += "scan_upper," + std::to_string(r.phi1) + "," + trials + "," +
           summary_fields(r.upper_error) + "\n";
    out += "naive_mean,0," + trials + "," + summary_fields(r.naive_error) + "\n";
    return out;
}

// ---------------------------------------------------------------------------

DetectionResult mc_detection(const DetectionFamily& family, const NoiseModel& noise,
                             const DetectParams& params, const McOptions& options) {
    check_trials(options);
    params.validate();

    struct Trial {
        bool degenerate = false;
        std::size_t detected = 0;
        bool all = false;
        std::size_t false_clusters = 0;
    };
    const auto trials = run_trials(options.trials, options.jobs, [&](int k) {
        Rng layout(derive_seed(options.seed, static_cast<std::uint64_t>(2 * k)));
        const SceneSpec spec = sample_detection_scene(family, layout);
        const Scene scene =
            generate_scene(spec, noise, derive_seed(options.seed, static_cast<std::uint64_t>(2 * k + 1)));
        Trial t;
        try {
            const DetectionReport report = run_detection(scene.image, params);
            // Truth masks live in scene coordinates; map them through the downsampling.
            std::vector<ParticleMask> truth = scene.truth;
            const int factor = 1 << params.downsample_passes;
            if (factor > 1) {
                for (auto& m : truth) {
                    std::vector<Pixel> mapped;
                    for (const auto& px : m.pixels) {
                        const Pixel q{px.row / factor, px.col / factor};
                        if (q.row < report.height && q.col < report.width) mapped.push_back(q);
                    }
                    std::sort(mapped.begin(), mapped.end());
                    mapped.erase(std::unique(mapped.begin(), mapped.end()), mapped.end());
                    m.pixels = std::move(mapped);
                }
            }
            const MatchSummary match = match_detections(report, truth);
            t.detected = match.detected_count;
            t.all = match.all_detected();
            t.false_clusters = match.false_clusters;
        } catch (const DegenerateEstimatesError&) {
            t.degenerate = true;
        }
        return t;
    });

    DetectionResult r;
    r.trials = options.trials;
    r.particles = family.particles;
    double all = 0, frac = 0, false_trials = 0, false_total = 0;
    for (const auto& t : trials) {
        if (t.degenerate) {
            ++r.degenerate_trials;
            continue;
        }
        all += t.all ? 1 : 0;
        frac += family.particles > 0 ? static_cast<double>(t.detected) / family.particles : 1.0;
        false_trials += t.false_clusters > 0 ? 1 : 0;
        false_total += static_cast<double>(t.false_clusters);
    }
    // Degenerate trials count as failures to detect.
    const double n = static_cast<double>(options.trials);
    r.all_detected_rate = all / n;
    r.mean_detected_fraction = frac / n;
    r.false_cluster_trial_rate = false_trials / n;
    r.mean_false_clusters = false_total / n;
    return r;
}

double threshold_for_black_fraction(double a, const NoiseModel& noise, double fraction) {
    return a + noise.upper_quantile(fraction);
}

std::vector<FalseAlarmRow> mc_false_alarm(const std::vector<int>& sizes, double a,
                                          const NoiseModel& noise, double theta,
                                          std::size_t min_cluster_pixels,
                                          const McOptions& options) {
    check_trials(options);
    std::vector<FalseAlarmRow> rows;
    for (std::size_t s = 0; s < sizes.size(); ++s) {
        const int n = sizes[s];
        if (n < 1) throw InputDomainError("image side must be positive");
        struct Trial {
            bool alarm = false;
            std::size_t largest = 0;
            double black = 0.0;
        };
        const auto trials = run_trials(options.trials, options.jobs, [&](int k) {
            SceneSpec spec;
            spec.n = n;
            spec.a = a;
            spec.b = a + 1.0;
            spec.phi0 = 1;
            const std::uint64_t stream = (static_cast<std::uint64_t>(s) << 32) | static_cast<std::uint64_t>(k);
            const Scene scene = generate_scene(spec, noise, derive_seed(options.seed, stream));
            const auto tc = threshold_and_cluster(scene.image, theta, min_cluster_pixels);
            Trial t;
            t.alarm = !tc.kept.empty();
            t.largest = largest_cluster_size(tc.thresholded);
            t.black = static_cast<double>(tc.thresholded.black_count()) /
                      static_cast<double>(tc.thresholded.size());
            return t;
        });
        FalseAlarmRow row;
        row.n = n;
        row.trials = options.trials;
        row.theta = theta;
        row.black_fraction = noise.exceedance(theta - a);
        std::vector<double> largest;
        double alarms = 0, black = 0;
        for (const auto& t : trials) {
            alarms += t.alarm ? 1 : 0;
            black += t.black;
            largest.push_back(static_cast<double>(t.largest));
            row.max_largest_cluster = std::max(row.max_largest_cluster, t.largest);
        }
        row.false_alarm_rate = alarms / options.trials;
        row.observed_black_fraction = black / options.trials;
        row.median_largest_cluster = summarize(std::move(largest)).median;
        rows.push_back(row);
    }
    return rows;
}

std::string detection_csv(const DetectionResult& r) {
    return "trials,particles,all_detected_rate,mean_detected_fraction,false_cluster_trial_rate,"
           "mean_false_clusters,degenerate_trials\n" +
           std::to_string(r.trials) + "," + std::to_string(r.particles) + "," +
           format_number(r.all_detected_rate) + "," + format_number(r.mean_detected_fraction) +
           "," + format_number(r.false_cluster_trial_rate) + "," +
           format_number(r.mean_false_clusters) + "," + std::to_string(r.degenerate_trials) + "\n";
}

std::string false_alarm_csv(const std::vector<FalseAlarmRow>& rows) {
    std::string out =
        "n,trials,theta,black_fraction,observed_black_fraction,false_alarm_rate,"
        "median_largest_cluster,max_largest_cluster\n";
    for (const auto& r : rows) {
        out += std::to_string(r.n) + "," + std::to_string(r.trials) + "," + format_number(r.theta) +
               "," + format_number(r.black_fraction) + "," +
               format_number(r.observed_black_fraction) + "," + format_number(r.false_alarm_rate) +
               "," + format_number(r.median_largest_cluster) + "," +
               std::to_string(r.max_largest_cluster) + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------

PhaseRow mc_percolation_phase(int n, double p, const McOptions& options) {
    check_trials(options);
    if (n < 1) throw InputDomainError("lattice side must be positive");
    PhaseRow row;
    row.n = n;
    row.p = p;
    row.trials = options.trials;
    row.largest_fraction = run_trials(options.trials, options.jobs, [&](int k) {
        const BinaryImage field =
            bernoulli_field(n, n, p, derive_seed(options.seed, static_cast<std::uint64_t>(k)));
        return static_cast<double>(largest_cluster_size(field)) / (static_cast<double>(n) * n);
    });
    row.summary = summarize(row.largest_fraction);
    return row;
}

std::string phase_csv(const std::vector<PhaseRow>& rows) {
    std::string out = "p,n,trials,mean,median,q25,q75,q90,max,share_ge_0.10,share_lt_0.05\n";
    for (const auto& r : rows) {
        const auto share = [&](auto pred) {
            const auto hits = std::count_if(r.largest_fraction.begin(), r.largest_fraction.end(), pred);
            return static_cast<double>(hits) / static_cast<double>(r.largest_fraction.size());
        };
        out += format_number(r.p) + "," + std::to_string(r.n) + "," + std::to_string(r.trials) +
               "," + summary_fields(r.summary) + "," +
               format_number(share([](double f) { return f >= 0.10; })) + "," +
               format_number(share([](double f) { return f < 0.05; })) + "\n";
    }
    return out;
}

}  // namespace scanpick
