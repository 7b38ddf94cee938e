#include "cli.hpp"

#include "scanpick/detect.hpp"
#include "scanpick/error.hpp"
#include "scanpick/image_io.hpp"
#include "scanpick/monte_carlo.hpp"
#include "scanpick/scan_estimator.hpp"
#include "scanpick/synth.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <thread>

namespace scanpick::cli {

namespace {

namespace fs = std::filesystem;

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct PipelineFlags {
    DetectParams params;
    bool no_normalize = false;

    void add_to(CLI::App& app) {
        app.add_option("--phi0", params.phi0,
                       "Background window side in pixels (GroEL pipeline: 65)")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        app.add_option("--phi1", params.phi1,
                       "Particle window side in pixels (GroEL pipeline: 9)")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        app.add_option("--downsample", params.downsample_passes,
                       "Number of 2x2 block-mean downsampling passes (GroEL pipeline: 2)")
            ->capture_default_str()
            ->check(CLI::NonNegativeNumber);
        app.add_flag("--no-normalize", no_normalize,
                     "Skip scaling the preprocessed image to maximum 1 (GroEL pipeline normalizes)");
    }

    DetectParams resolved() const {
        DetectParams p = params;
        p.normalize = !no_normalize;
        return p;
    }
};

struct NoiseFlags {
    std::string kind = "uniform";
    double m = 0.2;
    double sigma = 0.1;

    void add_to(CLI::App& app, double default_m) {
        m = default_m;
        app.add_option("--noise", kind, "Noise law: uniform or truncated_gaussian")
            ->capture_default_str()
            ->check(CLI::IsMember({"uniform", "truncated_gaussian"}));
        app.add_option("--noise-m", m, "Noise bound M (uniform half-width)")->capture_default_str();
        app.add_option("--noise-sigma", sigma,
                       "Untruncated standard deviation for truncated_gaussian noise")
            ->capture_default_str();
    }

    NoiseModel model() const {
        return kind == "uniform" ? NoiseModel::uniform(m) : NoiseModel::truncated_gaussian(sigma, m);
    }
};

struct McFlags {
    McOptions options;

    void add_to(CLI::App& app, int default_trials) {
        options.trials = default_trials;
        app.add_option("--trials", options.trials, "Number of seeded trials")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        app.add_option("--seed", options.seed, "Base seed; trial k uses a seed derived from (seed, k)")
            ->capture_default_str();
        app.add_option("--jobs", options.jobs, "Worker threads (results do not depend on this)")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
    }
};

void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << content;
    } else {
        write_file_atomic(path, content);
    }
}

// ---------------------------------------------------------------------------

int cmd_estimate(const std::string& in, const PipelineFlags& flags, std::ostream& out) {
    const DetectParams params = flags.resolved();
    const Micrograph work = preprocess(read_image(in), params);
    if (std::min(work.width(), work.height()) < std::max(params.phi0, params.phi1)) {
        throw InputDomainError("image is " + std::to_string(work.width()) + "x" +
                               std::to_string(work.height()) +
                               " after preprocessing, too small for the windows");
    }
    const IntensityEstimates est = estimate_intensities(work, params.phi0, params.phi1);
    out << "a_hat " << fmt6(est.a_hat) << "\n";
    out << "b_hat " << fmt6(est.b_hat) << "\n";
    out << "theta " << fmt6(compute_threshold(est.a_hat, est.b_hat)) << "\n";
    return kOk;
}

struct DetectOutputs {
    std::string report;
    std::string out_dir;
    std::string binary_out;
    std::string filtered_out;
    int jobs = 1;
};

int detect_one(const std::string& in, const std::string& report_path, const DetectOutputs& o,
               const DetectParams& params, std::ostream& out) {
    const DetectionReport report = run_detection(read_image(in), params);
    const std::string json = report_to_json(report);
    emit(report_path, json, out);
    if (!o.binary_out.empty()) write_file_atomic(o.binary_out, encode_binary_pgm(report.thresholded));
    if (!o.filtered_out.empty()) {
        write_file_atomic(o.filtered_out,
                          encode_binary_pgm(render_clusters(report.clusters_kept, report.width,
                                                            report.height)));
    }
    if (!report_path.empty() && report_path != "-") {
        out << in << ": " << to_string(report.decision) << ", " << report.clusters_kept.size()
            << " of " << report.clusters_total << " clusters kept, theta " << fmt6(report.theta)
            << "\n";
    }
    return kOk;
}

int classify(const std::exception& e) {
    return dynamic_cast<const DegenerateEstimatesError*>(&e) ? kDegenerate : kInputError;
}

int cmd_detect(const std::vector<std::string>& inputs, const DetectOutputs& o,
               const PipelineFlags& flags, std::ostream& out, std::ostream& err) {
    const DetectParams params = flags.resolved();
    params.validate();
    if (inputs.size() == 1 && o.out_dir.empty()) {
        return detect_one(inputs.front(), o.report, o, params, out);
    }
    if (o.out_dir.empty()) throw InputDomainError("several inputs need --out-dir");
    if (!o.binary_out.empty() || !o.filtered_out.empty() || !o.report.empty()) {
        throw InputDomainError("--out, --binary-out and --filtered-out apply to a single input only");
    }
    fs::create_directories(o.out_dir);

    // Batch mode: one report per input, named after the input's stem.
    std::vector<int> codes(inputs.size(), kOk);
    std::vector<std::string> lines(inputs.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t k = next++; k < inputs.size(); k = next++) {
            std::ostringstream line;
            try {
                const fs::path target = fs::path(o.out_dir) / (fs::path(inputs[k]).stem().string() + ".json");
                DetectOutputs single;
                codes[k] = detect_one(inputs[k], target.string(), single, params, line);
            } catch (const std::exception& e) {
                codes[k] = classify(e);
                line << "error: " << inputs[k] << ": " << e.what() << "\n";
            }
            lines[k] = line.str();
        }
    };
    {
        std::vector<std::jthread> pool;
        const int workers = std::clamp<int>(o.jobs, 1, static_cast<int>(inputs.size()));
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    int code = kOk;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        (codes[k] == kOk ? out : err) << lines[k];
        code = std::max(code, codes[k]);
    }
    return code;
}

int cmd_synth(const std::string& scene_path, std::uint64_t seed, const std::string& image_out,
              const std::string& truth_out, int pgm_maxval, std::ostream& out) {
    const SceneDocument doc = parse_scene_json(read_file(scene_path));
    const Scene scene = generate_scene(doc.spec, doc.noise, seed);
    if (!image_out.empty()) {
        const auto format = format_from_path(image_out);
        if (!format) throw InputDomainError("output must end in .pgm or .csv: " + image_out);
        PgmWriteOptions pgm;
        pgm.maxval = pgm_maxval;
        pgm.scale = pgm_maxval;
        write_image(scene.image, image_out, *format, pgm);
    }
    if (!truth_out.empty()) write_file_atomic(truth_out, encode_truth_pgm(doc.spec.n, scene.truth));
    out << "particles " << scene.truth.size() << "\n";
    out << "coverage " << fmt6(scene.coverage) << "\n";
    out << "noise_square " << scene.noise_square.row << " " << scene.noise_square.col << " "
        << scene.noise_square.side << "\n";
    return kOk;
}

int cmd_bound(const std::vector<long>& s1, const std::vector<long>& excess, double contrast,
              double sigma, double bound_m, std::ostream& out) {
    const BoundResult r = misselection_bound(s1, excess, contrast, sigma, bound_m);
    out << "bound " << fmt6(r.raw) << "\n";
    out << "clipped " << fmt6(r.clipped) << "\n";
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"scanpick: scan-estimator thresholding and percolation particle detection"};
    app.name("scanpick");
    app.require_subcommand(1);

    // estimate
    auto* estimate = app.add_subcommand("estimate", "Print background/particle intensity estimates and the midpoint threshold");
    std::string estimate_in;
    PipelineFlags estimate_flags;
    estimate->add_option("--in", estimate_in, "Input image (.pgm or .csv)")->required();
    estimate_flags.add_to(*estimate);

    // detect
    auto* detect = app.add_subcommand("detect", "Run the full detection pipeline and write a JSON report");
    std::vector<std::string> detect_in;
    DetectOutputs detect_out;
    PipelineFlags detect_flags;
    detect->add_option("--in", detect_in, "Input image(s) (.pgm or .csv)")->required();
    detect->add_option("--out", detect_out.report, "Report path for a single input (default: stdout)");
    detect->add_option("--out-dir", detect_out.out_dir, "Directory for per-input reports in batch mode");
    detect->add_option("--binary-out", detect_out.binary_out, "Write the thresholded picture as PGM (maxval 1)");
    detect->add_option("--filtered-out", detect_out.filtered_out, "Write the kept clusters as PGM (maxval 1)");
    detect->add_option("--min-cluster", detect_flags.params.min_cluster_pixels,
                       "Discard clusters with fewer pixels (GroEL pipeline: 30)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    detect->add_option("--jobs", detect_out.jobs, "Worker threads for batch mode")->capture_default_str();
    detect_flags.add_to(*detect);

    // synth
    auto* synth = app.add_subcommand("synth", "Render a synthetic scene from a JSON scene document");
    std::string scene_path, synth_out, truth_out;
    std::uint64_t synth_seed = 1;
    int pgm_maxval = 65535;
    synth->add_option("--scene", scene_path, "Scene document (JSON)")->required();
    synth->add_option("--seed", synth_seed, "Noise seed")->capture_default_str();
    synth->add_option("--out", synth_out, "Image output (.csv lossless, .pgm quantized)");
    synth->add_option("--truth-out", truth_out, "Particle label picture (PGM, 0 = background)");
    synth->add_option("--pgm-maxval", pgm_maxval, "PGM output stores round(value * maxval)")
        ->capture_default_str()
        ->check(CLI::Range(1, 65535));

    // mc-consistency
    auto* consistency = app.add_subcommand("mc-consistency", "Error table of the background estimator across window sides");
    ConsistencyFamily cfam;
    NoiseFlags cnoise;
    McFlags cmc;
    std::vector<int> phi0_grid{16, 32, 64};
    std::string consistency_out;
    consistency->add_option("--n", cfam.n, "Image side")->capture_default_str();
    consistency->add_option("--a", cfam.a, "Background intensity")->capture_default_str();
    consistency->add_option("--b", cfam.b, "Particle intensity")->capture_default_str();
    consistency->add_option("--coverage", cfam.coverage, "Target particle share of pixels")->capture_default_str();
    consistency->add_option("--noise-square", cfam.noise_square, "Side of the guaranteed all-noise square")->capture_default_str();
    consistency->add_option("--band", cfam.band_fraction, "Particles confined to this share of the width (1 = scattered)")->capture_default_str();
    consistency->add_option("--phi0", phi0_grid, "Background window sides to compare")->delimiter(',')->capture_default_str();
    consistency->add_option("--phi1", cfam.phi1, "Particle window side")->capture_default_str();
    consistency->add_option("--out", consistency_out, "CSV output (default: stdout)");
    cnoise.add_to(*consistency, 0.2);
    cmc.add_to(*consistency, 100);

    // mc-detection
    auto* detection = app.add_subcommand("mc-detection", "Detection power on synthetic scenes, optionally false alarms on pure noise");
    DetectionFamily dfam;
    NoiseFlags dnoise;
    McFlags dmc;
    DetectParams dparams;
    dparams.phi0 = 64;
    dparams.phi1 = 12;
    dparams.downsample_passes = 0;
    dparams.normalize = false;
    std::vector<int> fa_sizes;
    double black_fraction = 0.25;
    int fa_trials = 200;
    std::string detection_out, fa_out;
    detection->add_option("--n", dfam.n, "Image side")->capture_default_str();
    detection->add_option("--a", dfam.a, "Background intensity")->capture_default_str();
    detection->add_option("--b", dfam.b, "Particle intensity")->capture_default_str();
    detection->add_option("--particles", dfam.particles, "Particles per scene")->capture_default_str();
    detection->add_option("--noise-square", dfam.noise_square, "Side of the guaranteed all-noise square")->capture_default_str();
    detection->add_option("--phi0", dparams.phi0, "Background window side")->capture_default_str();
    detection->add_option("--phi1", dparams.phi1, "Particle window side; particles contain this square")->capture_default_str();
    detection->add_option("--min-cluster", dparams.min_cluster_pixels, "Discard clusters with fewer pixels")->capture_default_str();
    detection->add_option("--out", detection_out, "Power table CSV (default: stdout)");
    detection->add_option("--false-alarm-sizes", fa_sizes, "Also run pure-noise false-alarm trials at these image sides")->delimiter(',');
    detection->add_option("--black-fraction", black_fraction, "Background black fraction that fixes the false-alarm threshold")->capture_default_str();
    detection->add_option("--false-alarm-trials", fa_trials, "Trials per false-alarm image side")->capture_default_str();
    detection->add_option("--false-alarm-out", fa_out, "False-alarm table CSV (default: stdout)");
    dnoise.add_to(*detection, 0.25);
    dmc.add_to(*detection, 100);

    // bound
    auto* bound = app.add_subcommand("bound", "Evaluate the bound on choosing a window over the all-noise square");
    std::vector<long> s1, excess;
    double contrast = 1.0, sigma = 1.0, bound_m = 1.0;
    bound->add_option("--s1", s1, "Particle pixels inside each window K")->delimiter(',')->required();
    bound->add_option("--excess", excess, "|K minus K0| for each window K")->delimiter(',')->required();
    bound->add_option("--contrast", contrast, "b - a")->capture_default_str();
    bound->add_option("--sigma", sigma, "Noise standard deviation")->capture_default_str();
    bound->add_option("--bound-m", bound_m, "Almost-sure noise bound M")->capture_default_str();

    // percolation-phase
    auto* phase = app.add_subcommand("percolation-phase", "Largest-cluster share of i.i.d. site fields on the triangular lattice");
    int phase_n = 256;
    std::vector<double> probs{0.4, 0.6};
    McFlags pmc;
    std::string phase_out;
    phase->add_option("--n", phase_n, "Lattice side")->capture_default_str();
    phase->add_option("--p", probs, "Site probabilities (critical value 0.5)")->delimiter(',')->capture_default_str();
    phase->add_option("--out", phase_out, "CSV output (default: stdout)");
    pmc.add_to(*phase, 200);

    std::vector<std::string> argv_store{"scanpick"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        // Subcommand help lands here too when requested after the subcommand name.
        if (e.get_exit_code() == 0) {
            for (auto* sub : app.get_subcommands()) out << sub->help();
            if (app.get_subcommands().empty()) out << app.help();
            return kOk;
        }
        err << "error: " << e.what() << "\n";
        return kInputError;
    }

    try {
        if (estimate->parsed()) return cmd_estimate(estimate_in, estimate_flags, out);
        if (detect->parsed()) return cmd_detect(detect_in, detect_out, detect_flags, out, err);
        if (synth->parsed()) return cmd_synth(scene_path, synth_seed, synth_out, truth_out, pgm_maxval, out);
        if (consistency->parsed()) {
            const auto result = mc_consistency(cfam, cnoise.model(), phi0_grid, cmc.options);
            emit(consistency_out, consistency_csv(result), out);
            return kOk;
        }
        if (detection->parsed()) {
            dfam.phi1 = dparams.phi1;
            const NoiseModel noise = dnoise.model();
            emit(detection_out, detection_csv(mc_detection(dfam, noise, dparams, dmc.options)), out);
            if (!fa_sizes.empty()) {
                McOptions fa = dmc.options;
                fa.trials = fa_trials;
                const double theta = threshold_for_black_fraction(dfam.a, noise, black_fraction);
                emit(fa_out,
                     false_alarm_csv(mc_false_alarm(fa_sizes, dfam.a, noise, theta,
                                                    dparams.min_cluster_pixels, fa)),
                     out);
            }
            return kOk;
        }
        if (bound->parsed()) return cmd_bound(s1, excess, contrast, sigma, bound_m, out);
        if (phase->parsed()) {
            std::vector<PhaseRow> rows;
            for (const double p : probs) rows.push_back(mc_percolation_phase(phase_n, p, pmc.options));
            emit(phase_out, phase_csv(rows), out);
            return kOk;
        }
    } catch (const DegenerateEstimatesError& e) {
        err << "error: " << e.what() << "\n";
        return kDegenerate;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
    return kInputError;
}

}  // namespace scanpick::cli
