#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <ostream>
#include <sstream>
#include <thread>

#include "resguide/embedding.hpp"
#include "resguide/hill.hpp"
#include "resguide/io.hpp"
#include "resguide/kernels.hpp"
#include "resguide/metrics.hpp"
#include "resguide/optimizer.hpp"
#include "resguide/synthetic.hpp"

namespace resguide::cli {
namespace fs = std::filesystem;

namespace {

struct RunConfig {
    std::vector<std::string> inputs;
    std::string out_dir;
    double q = 0.4;
    std::uint64_t seed = 0;
    std::string method = "resguide";
    std::string ablate;
    std::size_t steps = 400;
    double lr = 0.05;
    double lambda_slope = 60.0;
    double r = 0.5;
    double alpha = 1.0;
    double beta = 10.0;
    double gamma = 1000.0;
    double delta = 1e-4;
    std::size_t workers = 1;
    std::string config_path;

    OptimizerConfig optimizer() const {
        OptimizerConfig cfg;
        cfg.steps = steps;
        cfg.learning_rate = lr;
        cfg.lambda_slope = lambda_slope;
        cfg.seed = seed;
        cfg.guidance.r = r;
        cfg.weights = {alpha, beta, gamma, delta};
        cfg.active = ComponentSet::all();
        const ComponentSet removed = ComponentSet::parse(ablate);
        cfg.active = ComponentSet(cfg.active.bits() & ~removed.bits());
        cfg.validate();
        return cfg;
    }
};

std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void add_optimizer_flags(CLI::App& sub, RunConfig& rc) {
    sub.add_option("--q", rc.q, "Payload in bits per pixel");
    sub.add_option("--seed", rc.seed, "Noise seed");
    sub.add_option("--ablate", rc.ablate, "Guidance components to disable, e.g. rdg,lvg");
    sub.add_option("--steps", rc.steps, "Optimizer iterations")->check(CLI::Range(std::size_t{1}, std::size_t{1} << 30));
    sub.add_option("--lr", rc.lr, "Learning rate");
    sub.add_option("--lambda-slope", rc.lambda_slope, "Double-tanh slope");
    sub.add_option("--r", rc.r, "Smooth-region fraction");
    sub.add_option("--alpha", rc.alpha, "Residual guidance weight");
    sub.add_option("--beta", rc.beta, "Residual-distance guidance weight");
    sub.add_option("--gamma", rc.gamma, "Local-variance guidance weight");
    sub.add_option("--delta", rc.delta, "Payload constraint weight");
    sub.add_option("--config", rc.config_path, "key=value configuration file");
}

fs::path output_path(const RunConfig& rc, const std::string& input, const std::string& suffix) {
    return fs::path(rc.out_dir) / (fs::path(input).stem().string() + suffix);
}

void ensure_out_dir(const RunConfig& rc) {
    if (rc.out_dir.empty()) throw std::invalid_argument("--out-dir is required");
    std::error_code ec;
    fs::create_directories(rc.out_dir, ec);
    if (ec || !fs::is_directory(rc.out_dir)) throw IoError("cannot create output directory " + rc.out_dir);
}

struct EmbedOutcome {
    ProbabilityMap prob;
    Image stego;
    std::vector<LossBreakdown> trace;
};

EmbedOutcome embed_with_method(const Image& cover, const RunConfig& rc, const OptimizerConfig& cfg) {
    if (rc.method == "resguide") {
        OptimizationResult res = optimize(cover, rc.q, cfg);
        return {std::move(res.probabilities), std::move(res.stego), std::move(res.loss_trace)};
    }
    ProbabilityMap prob;
    if (rc.method == "hill") {
        prob = costs_to_probabilities(hill_cost(cover), rc.q);
    } else if (rc.method == "random-uniform") {
        prob = ProbabilityMap::uniform(cover.width(), cover.height(), probability_for_payload(rc.q));
    } else {
        throw std::invalid_argument("unknown method '" + rc.method + "'");
    }
    const auto mods = hard_sample(prob, make_noise(cover.width(), cover.height(), rc.seed, kFinalSampleStream));
    Image stego = apply_modifications(cover, mods);
    return {std::move(prob), std::move(stego), {}};
}

std::string trace_csv(const std::vector<LossBreakdown>& trace) {
    std::string out = loss_csv_header() + '\n';
    for (std::size_t i = 0; i < trace.size(); ++i) out += loss_csv_row(i, trace[i]) + '\n';
    return out;
}

void embed_one(const std::string& input, const RunConfig& rc, const OptimizerConfig& cfg) {
    const Image cover = load_cover(input);
    EmbedOutcome res;
    try {
        res = embed_with_method(cover, rc, cfg);
    } catch (const OptimizationDiverged& e) {
        write_file(output_path(rc, input, ".loss.csv"), trace_csv(e.trace()));
        throw;
    }
    const MetricsReport metrics = compute_metrics(cover, res.stego, res.prob, cfg.guidance);
    write_pgm(output_path(rc, input, ".stego.pgm"), res.stego);
    write_rgpm(output_path(rc, input, ".prob.rgpm"), res.prob);
    if (rc.method == "resguide") write_file(output_path(rc, input, ".loss.csv"), trace_csv(res.trace));
    write_file(output_path(rc, input, ".metrics.csv"), "method,seed," + metrics_csv_header() + '\n' + rc.method + ',' +
                                                           std::to_string(rc.seed) + ',' + metrics_csv_row(metrics) + '\n');
}

int cmd_embed(const RunConfig& rc, std::ostream& out) {
    if (rc.inputs.empty()) throw std::invalid_argument("--in is required");
    require_payload(rc.q);
    const OptimizerConfig cfg = rc.optimizer();
    ensure_out_dir(rc);

    const std::size_t n = rc.inputs.size();
    std::vector<std::string> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                embed_one(rc.inputs[i], rc, cfg);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(rc.workers, 1, n);
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    for (std::size_t i = 0; i < n; ++i) {
        if (!errors[i].empty()) throw std::runtime_error(rc.inputs[i] + ": " + errors[i]);
        out << "wrote " << output_path(rc, rc.inputs[i], ".stego.pgm").string() << '\n';
    }
    return 0;
}

int cmd_metrics(const std::string& cover_path, const std::string& stego_path, const std::string& prob_path, double r,
                std::ostream& out) {
    const Image cover = load_cover(cover_path);
    const Image stego = load_cover(stego_path);
    const ProbabilityMap prob = read_rgpm(prob_path);
    GuidanceConfig g;
    g.r = r;
    g.validate();
    const MetricsReport m = compute_metrics(cover, stego, prob, g);
    out << metrics_csv_header() << '\n' << metrics_csv_row(m) << '\n';
    return 0;
}

int cmd_gradcheck(const RunConfig& rc, std::size_t size, std::size_t trials, std::ostream& out) {
    OptimizerConfig cfg = rc.optimizer();
    const Image cover = make_textured_cover(size, size, rc.seed);
    GradcheckOptions opts;
    opts.trials = trials;
    opts.q = rc.q;
    bool all_passed = true;
    out << "subset,max_relative_error,checked,excluded,status\n";
    for (ComponentSet subset : ComponentSet::all_subsets()) {
        cfg.active = subset;
        const GradcheckReport rep = gradcheck(cover, cfg, opts);
        std::size_t checked = 0;
        std::size_t excluded = 0;
        for (const auto& t : rep.trials) {
            checked += t.checked;
            excluded += t.excluded;
        }
        const bool ok = rep.passed && checked > 0;
        all_passed = all_passed && ok;
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s,%.3e,%zu,%zu,%s\n", subset.to_string().c_str(), rep.max_relative_error, checked,
                      excluded, ok ? "pass" : "FAIL");
        out << buf;
    }
    return all_passed ? 0 : 1;
}

int cmd_ablate(const RunConfig& rc, std::ostream& out) {
    if (rc.inputs.size() != 1) throw std::invalid_argument("ablate takes exactly one --in image");
    require_payload(rc.q);
    OptimizerConfig cfg = rc.optimizer();
    ensure_out_dir(rc);
    const Image cover = load_cover(rc.inputs.front());

    std::string csv = "subset,l1,l2,l3,l4,total," + metrics_csv_header() + '\n';
    for (ComponentSet subset : ComponentSet::nonempty_subsets()) {
        cfg.active = subset;
        const OptimizationResult res = optimize(cover, rc.q, cfg);
        const LossBreakdown& last = res.loss_trace.back();
        const MetricsReport m = compute_metrics(cover, res.stego, res.probabilities, cfg.guidance);
        csv += subset.to_string() + ',' + format_double(last.l1) + ',' + format_double(last.l2) + ',' +
               format_double(last.l3) + ',' + format_double(last.l4) + ',' + format_double(last.total) + ',' +
               metrics_csv_row(m) + '\n';
    }
    const fs::path path = output_path(rc, rc.inputs.front(), ".ablation.csv");
    write_file(path, csv);
    out << "wrote " << path.string() << '\n';
    return 0;
}

// Adds "--key value" for every config entry whose flag is not already given.
std::vector<std::string> merge_config(const std::vector<std::string>& args) {
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    }
    if (config_path.empty()) return args;
    const auto bytes = read_file(config_path);
    std::vector<std::string> merged = args;
    for (const auto& [key, value] : parse_config(std::string(bytes.begin(), bytes.end()))) {
        const std::string flag = "--" + key;
        const bool given = std::any_of(args.begin(), args.end(), [&flag](const std::string& a) {
            return a == flag || a.rfind(flag + "=", 0) == 0;
        });
        if (given || key == "config") continue;
        merged.push_back(flag);
        merged.push_back(value);
    }
    return merged;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_config(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> entries;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        entries.emplace_back(std::move(key), std::move(value));
    }
    return entries;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Residual-guided embedding probability maps for grayscale steganography", "resguide"};
    app.require_subcommand(1);

    RunConfig rc;
    auto* embed = app.add_subcommand("embed", "Compute a probability map and simulate embedding");
    embed->add_option("--in", rc.inputs, "Cover images (PGM or grayscale PNG)")->required();
    embed->add_option("--out-dir", rc.out_dir, "Output directory")->required();
    embed->add_option("--method", rc.method, "resguide | hill | random-uniform")
        ->check(CLI::IsMember({"resguide", "hill", "random-uniform"}));
    embed->add_option("--workers", rc.workers, "Images processed in parallel")->check(CLI::Range(1, 1024));
    add_optimizer_flags(*embed, rc);

    std::string cover_path;
    std::string stego_path;
    std::string prob_path;
    auto* metrics = app.add_subcommand("metrics", "Compare a cover/stego pair and its probability map");
    metrics->add_option("--cover", cover_path, "Cover image")->required();
    metrics->add_option("--stego", stego_path, "Stego image")->required();
    metrics->add_option("--prob", prob_path, "RGPM probability sidecar")->required();
    metrics->add_option("--r", rc.r, "Smooth-region fraction");

    std::size_t gc_size = 16;
    std::size_t gc_trials = 1;
    auto* grad = app.add_subcommand("gradcheck", "Check analytic gradients against finite differences");
    grad->add_option("--size", gc_size, "Side of the synthetic test image")->check(CLI::Range(8, 512));
    grad->add_option("--trials", gc_trials, "Random logit fields per subset")->check(CLI::Range(1, 1000));
    add_optimizer_flags(*grad, rc);

    auto* ablate = app.add_subcommand("ablate", "Optimize under every non-empty guidance subset");
    ablate->add_option("--in", rc.inputs, "Cover image")->required();
    ablate->add_option("--out-dir", rc.out_dir, "Output directory")->required();
    add_optimizer_flags(*ablate, rc);

    auto* kernel = app.add_subcommand("kernel", "Kernel bank utilities");
    kernel->require_subcommand(1);
    auto* dump = kernel->add_subcommand("dump", "Print every kernel in the bank");

    std::vector<std::string> args;
    try {
        args = merge_config(raw_args);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        err << "error: usage: " << msg << '\n';
        return 2;
    }

    try {
        if (*embed) return cmd_embed(rc, out);
        if (*metrics) return cmd_metrics(cover_path, stego_path, prob_path, rc.r, out);
        if (*grad) return cmd_gradcheck(rc, gc_size, gc_trials, out);
        if (*ablate) return cmd_ablate(rc, out);
        if (*dump) {
            out << dump_kernels(kernel_bank_load());
            return 0;
        }
    } catch (const std::exception& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        err << "error: " << msg << '\n';
        return 1;
    }
    return 2;
}

}  // namespace resguide::cli
