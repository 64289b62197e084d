#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <orbitgauge/experiments.hpp>

namespace og = orbitgauge;

namespace {

enum Exit { kPass = 0, kTolerance = 1, kUsage = 2, kPrecision = 3 };

struct Options {
    std::string config_path;
    std::vector<std::string> sets;
    std::string out = "runs";
    bool dry_run = false;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw og::ConfigError(path + ": cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// defaults, then the experiment preset, then the file, then --set
og::Config build_config(const std::string& command, const Options& o) {
    std::string text = o.config_path.empty() ? "" : read_file(o.config_path);
    auto layer = [&](og::Config& c) {
        if (!text.empty()) c.parse(text, o.config_path);
        for (const auto& s : o.sets) c.apply_override(s);
    };
    og::Config probe;
    layer(probe);
    og::Config c;
    if (command == "experiment")
        for (const auto& [k, v] : og::experiment_preset(probe.raw("experiment.name"))) c.set(k, v, "preset");
    layer(c);
    return c;
}

og::RunReport dispatch(const std::string& command, const og::Config& c) {
    if (command == "orbit-complexity") return og::run_orbit_complexity(c);
    if (command == "gen-entropy") return og::run_gen_entropy(c);
    if (command == "track") return og::run_track(c);
    if (command == "reconstruct-rotation") return og::run_reconstruct(c);
    return og::run_experiment(c);
}

int run_command(const std::string& command, const Options& o) {
    try {
        og::Config c = build_config(command, o);
        std::filesystem::path dir = og::run_directory(o.out, command, c);
        if (o.dry_run) {
            std::cout << "command " << command << "\n" << c.resolved() << "output " << dir.string() << "\n";
            return kPass;
        }
        og::RunReport r = dispatch(command, c);
        og::write_report(r, dir, c);
        std::cout << og::summary_text(r) << "artifacts " << dir.string() << "\n";
        return r.passed() ? kPass : kTolerance;
    } catch (const og::PrecisionExhausted& e) {
        std::cerr << "precision exhausted: " << e.what() << "\n";
        return kPrecision;
    } catch (const og::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
}

int run_report(const std::string& dir) {
    og::Aggregate a = og::aggregate_reports(dir);
    if (a.runs == 0) {
        std::cerr << "no artifacts in " << dir << "\n";
        return kUsage;
    }
    for (const auto& l : a.lines) std::cout << l << "\n";
    std::cout << a.runs << " runs, " << a.failures << " failed checks\n";
    return a.failures == 0 ? kPass : kTolerance;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"orbitgauge: orbit complexity and generalized entropy of interval and circle maps"};
    app.require_subcommand(1);
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"orbit-complexity", "information profiles and complexity indicators of sampled orbits"},
        {"gen-entropy", "separated-set and net counts, generalized entropy"},
        {"track", "certified orbit approximation to 2^-m"},
        {"reconstruct-rotation", "rotation number from a symbolic orbit"},
        {"experiment", "named experiment (experiment.name)"},
        {"report", "collect PASS/FAIL lines from earlier runs"},
    };
    std::vector<Options> opts(commands.size());
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < commands.size(); ++i) {
        auto* s = app.add_subcommand(commands[i].first, commands[i].second);
        auto& o = opts[i];
        if (commands[i].first != "report") s->add_option("-c,--config", o.config_path, "config file")->check(CLI::ExistingFile);
        s->add_option("--set", o.sets, "override key=value (repeatable)");
        s->add_option("-o,--out", o.out, "output directory")->capture_default_str();
        s->add_flag("--dry-run", o.dry_run, "print the resolved config and stop");
        subs.push_back(s);
    }
    std::string report_dir;
    subs.back()->add_option("dir", report_dir, "directory holding earlier runs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    for (std::size_t i = 0; i < commands.size(); ++i) {
        if (!subs[i]->parsed()) continue;
        const auto& o = opts[i];
        if (commands[i].first == "report") {
            std::string dir = report_dir.empty() ? o.out : report_dir;
            if (o.dry_run) {
                std::cout << "command report\ndir " << dir << "\n";
                return kPass;
            }
            try {
                og::Config c;
                for (const auto& s : o.sets) c.apply_override(s);
            } catch (const og::ConfigError& e) {
                std::cerr << "config error: " << e.what() << "\n";
                return kUsage;
            }
            return run_report(dir);
        }
        return run_command(commands[i].first, o);
    }
    return kUsage;
}
