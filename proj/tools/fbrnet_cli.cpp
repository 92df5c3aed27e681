#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fbr/experiment.hpp"
#include "fbr/numerics.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitConvergence = 3;

struct Subcommand {
    std::string name;
    std::string help;
    std::vector<std::string> options;  // long flag names; key = name with '-' -> '_'
    std::vector<std::string> switches;
};

const std::vector<std::string> kNetworkOptions = {"lambda", "eta", "snr-db", "power-dbm", "noise-dbm"};

std::vector<Subcommand> subcommands() {
    auto with_net = [](std::vector<std::string> v) {
        v.insert(v.end(), kNetworkOptions.begin(), kNetworkOptions.end());
        return v;
    };
    return {
        {"rate", "Average FBR rate with Gaussian codebooks",
         with_net({"snr-grid", "alpha0-grid", "n", "eps", "r0"}), {"spatial"}},
        {"rate-qam", "Average FBR rate with M-QAM",
         with_net({"snr-grid", "alpha0-grid", "n", "eps", "r0", "mod"}), {"spatial"}},
        {"outage", "Outage bounds, optionally with a Monte Carlo estimate",
         with_net({"rt", "n", "eps-bar", "r0", "mod", "samples", "region-scale"}), {"spatial"}},
        {"meta", "Meta distribution of the coding rate",
         with_net({"rt", "n", "eps-bar", "r0", "pt-grid", "method", "samples", "fading-draws",
                   "region-scale", "regime"}),
         {"include-noise"}},
        {"simulate", "Monte Carlo next to the analytic value (what = rate, rate-qam, outage)",
         with_net({"what", "snr-grid", "alpha0-grid", "n", "eps", "eps-bar", "rt", "r0", "mod",
                   "samples", "fading-draws", "region-scale"}),
         {"spatial"}},
        {"mlpcm", "Multilevel polar-coded modulation rate sweep",
         with_net({"mod", "n", "target-fer", "snr-grid", "frames", "channel", "labeling", "k-step",
                   "r0"}),
         {}},
    };
}

std::string to_key(std::string name) {
    for (auto& c : name)
        if (c == '-') c = '_';
    return name;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-blocklength performance of Poisson cellular downlinks"};
    app.require_subcommand(1);

    std::string config_path, out_path;
    std::uint64_t seed = 1;
    int threads = 1;
    bool verbose = false;
    std::vector<std::string> sets;
    app.add_option("--config", config_path, "key = value parameter file")->option_text("FILE");
    app.add_option("--out", out_path, "CSV output path (default: stdout)");
    app.add_option("--seed", seed, "Random seed");
    app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--verbose", verbose, "Progress on stderr");
    app.add_option("--set", sets, "Extra parameter key=value (repeatable)");

    const auto specs = subcommands();
    std::map<std::string, std::map<std::string, std::string>> values;
    std::map<std::string, std::map<std::string, bool>> flags;
    std::map<std::string, CLI::App*> apps;
    for (const auto& spec : specs) {
        CLI::App* sub = app.add_subcommand(spec.name, spec.help);
        apps[spec.name] = sub;
        for (const auto& o : spec.options) sub->add_option("--" + o, values[spec.name][o]);
        for (const auto& s : spec.switches) sub->add_flag("--" + s, flags[spec.name][s]);
    }
    std::string experiment_id;
    CLI::App* exp = app.add_subcommand("experiment", "Run a registered experiment preset");
    exp->add_option("id", experiment_id, "Experiment id")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    const auto start = std::chrono::steady_clock::now();
    try {
        fbr::Params params;
        if (!config_path.empty()) params = fbr::Params::from_file(config_path);
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw fbr::ConfigError("--set", "expected key=value, got '" + s + "'");
            params.set(s.substr(0, eq), s.substr(eq + 1));
        }

        fbr::ExperimentConfig config;
        config.seed = seed;
        config.threads = threads;
        config.out = out_path;
        if (exp->parsed()) {
            config.id = experiment_id;
        } else {
            config.id = "custom";
            for (const auto& [name, sub] : apps) {
                if (!sub->parsed()) continue;
                params.set("command", name);
                for (const auto& [o, v] : values[name])
                    if (!v.empty()) params.set(to_key(o), v);
                for (const auto& [s, on] : flags[name])
                    if (on) params.set(to_key(s), "true");
            }
        }
        if (app.count("--seed")) params.set("seed", std::to_string(seed));
        config.params = params;
        config.validate();

        fbr::RunContext ctx;
        ctx.seed = seed;
        ctx.threads = threads;
        if (verbose) ctx.log = [](const std::string& m) { std::cerr << m << '\n'; };

        std::unique_ptr<std::ofstream> file;
        if (!out_path.empty()) {
            file = std::make_unique<std::ofstream>(out_path);
            if (!*file) throw fbr::ConfigError("--out", "cannot write '" + out_path + "'");
        }
        fbr::run_experiment(config, ctx, file ? *file : std::cout);
    } catch (const fbr::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const fbr::DomainError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const fbr::ConvergenceError& e) {
        std::cerr << "numerical non-convergence: " << e.what() << '\n';
        return kExitConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::fprintf(stderr, "wall time: %.2f s\n", secs);
    return 0;
}
