// Named experiment presets: each one wires samplers, operators, flows, and
// the verification suite into a reproducible pipeline that writes a fixed
// report schema (reports.csv), a human-readable summary, a metadata sidecar
// (the only place timestamps appear), and tidy plot-ready CSVs. Same
// preset + seed + config always produces byte-identical report CSVs.

#pragma once

#include "gibbsflow/config.hpp"
#include "gibbsflow/report.hpp"
#include "gibbsflow/rng.hpp"
#include "gibbsflow/suite.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gibbsflow {

struct ExperimentConfig {
    std::string preset = "all";
    Config overrides;
    std::string output_dir = "gibbsflow-out";
    std::uint64_t seed = 20260823;
    int jobs = 1;

    void validate() const;  // throws on unknown preset names
};

// {covariance, spectral, gibbs, feynman_kac, invariance, nonlocalization,
//  tightness, all}
const std::vector<std::string>& preset_names();

// Accepted configuration keys; Config::require_known_keys against this set
// rejects typos at parse time.
const std::vector<std::string>& known_config_keys();

// Extra sampling controls that sit outside TestPlan.
struct PresetScales {
    long covariance_replicas = 100000;
    long pcn_samples = 40000;  // pCN draws for the marginal run (post-thinning)
};

// TestPlan + PresetScales assembled from the overrides; throws on unknown
// keys or malformed values.
TestPlan plan_from_config(const Config& cfg, std::uint64_t seed);
PresetScales scales_from_config(const Config& cfg);

// Check bundles, one per preset. out_dir = "" suppresses plot-data files.
std::vector<StatReport> covariance_checks(long n_replicas, SeedStream seed,
                                          const std::string& out_dir);
std::vector<StatReport> spectral_checks();
std::vector<StatReport> marginal_checks(const TestPlan& plan, long pcn_samples,
                                        const std::string& out_dir);
std::vector<StatReport> nonlocalization_checks(const TestPlan& plan,
                                               const std::string& out_dir);
std::vector<StatReport> feynman_kac_checks(const TestPlan& plan, const std::string& out_dir);
std::vector<StatReport> tightness_checks(const TestPlan& plan, const std::string& out_dir);

struct PresetRun {
    std::string directory;  // resolved output directory (run-id suffixed)
    std::vector<StatReport> reports;
    int exit_code = 0;  // 0 = all gating checks pass (or inconclusive), 1 = failure
};

// Runs the preset pipeline and writes reports.csv / reports_full.csv /
// summary.txt / metadata.json plus the preset's plot CSVs under a fresh
// directory derived from config.output_dir.
PresetRun run_preset(const ExperimentConfig& config);

// Collects the plot-ready CSVs found below report_dir into report_dir/plots;
// throws with the list of expected files when none are present.
void emit_plot_data(const std::string& report_dir);

}  // namespace gibbsflow
