// Runs the ten acceptance experiments and prints one PASS/FAIL line each.
#include <chrono>
#include <iostream>
#include <string>
#include <vector>

#include <orbitgauge/experiments.hpp>

using namespace orbitgauge;

namespace {

struct Criterion {
    int id;
    std::string name;
    double budget_s;
    std::vector<std::vector<std::pair<std::string, std::string>>> runs;  // extra settings per run
};

Config configure(const std::string& name, const std::vector<std::pair<std::string, std::string>>& extra) {
    Config c;
    c.set("experiment.name", name);
    for (const auto& [k, v] : experiment_preset(name)) c.set(k, v);
    for (const auto& [k, v] : extra) c.set(k, v);
    return c;
}

}  // namespace

int main() {
    const std::vector<Criterion> crits = {
        {1, "periodic", 30, {{}}},
        {2, "brudno", 120, {{}}},
        {3, "doubling-entropy", 120, {{}}},
        {4, "isometry", 60, {{}}},
        {5,
         "sandwich",
         60,
         {{{"system.kind", "doubling"}},
          {{"system.kind", "rotation"}, {"system.r", "3/8"}},
          {{"system.kind", "tent"}}}},
        {6, "tracker", 60, {{}}},
        {7, "rotation-reconstruction", 120, {{}}},
        {8,
         "local-vs-global",
         300,
         {{{"system.kind", "rotation"}, {"system.r", "5/16"}},
          {{"system.kind", "doubling"}},
          {{"system.kind", "tent"}},
          {{"system.kind", "manneville"}, {"system.z", "3"}, {"system.a", "1/2"}}}},
        {9, "manneville-scan", 300, {{}}},
        {10, "feigenbaum", 180, {{}}},
    };
    int failed = 0;
    for (const auto& c : crits) {
        auto t0 = std::chrono::steady_clock::now();
        bool ok = true;
        std::string detail;
        for (const auto& extra : c.runs) {
            try {
                RunReport r = run_experiment(configure(c.name, extra));
                for (const auto& ch : r.checks) {
                    if (!ch.pass) ok = false;
                    if (!detail.empty()) detail += "; ";
                    detail += (ch.pass ? "" : "FAILED ") + ch.name + (ch.detail.empty() ? "" : " (" + ch.detail + ")");
                }
                std::cout << summary_text(r);
            } catch (const std::exception& e) {
                ok = false;
                detail += std::string(detail.empty() ? "" : "; ") + "error: " + e.what();
            }
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool in_time = secs <= c.budget_s;
        if (!in_time) detail += "; over budget";
        bool pass = ok && in_time;
        if (!pass) ++failed;
        std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << " [" << c.name << "] " << fmt(secs, 3)
                  << "s/" << c.budget_s << "s: " << detail << std::endl;
    }
    std::cout << (10 - failed) << "/10 criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
