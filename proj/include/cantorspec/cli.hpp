// Batch command surface: job configuration (flat key=value or JSON),
// validation, a content hash for reproducibility headers, the command
// dispatcher, and plot-data export from written artifacts.
#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "cantorspec/kset.hpp"

namespace cantorspec {

inline constexpr const char* kVersion = "0.1.0";

struct JobConfig {
    // frequency: a named preset or explicit components (radians)
    std::string alpha_preset = "golden";
    std::vector<double> alpha_values;

    GevreyParams gevrey;  // s, lambda

    // scale schedule
    ScaleMode scale_mode = ScaleMode::Toy;
    double scale_base = 3.0;
    int scale_count = 8;
    std::vector<double> scale_values;  // toy override, optional
    double target_epsilon = 0.0;       // kset covering target

    // energy window and scan resolution
    double e_min = -2.5, e_max = 2.5;
    double resolution = 0.02;
    double energy = 0.0;  // kam-run probe energy

    // iteration budgets
    long long rot_n = 20000;
    int phases = 4;
    double zeta_threshold = 1.0005;
    int label_bound = 8;
    int cf_depth = 20;
    int kam_max_steps = 6;
    double kam_gate = 0.5;
    double kam_tail_stop = 1e-13;
    double resonance_bound = 40.0;

    // plumbing
    std::uint64_t seed = 2024;
    int threads = 1;
    std::string out_dir = ".";

    // resolved frequency vector
    std::vector<double> alpha() const;
};

// flat key=value text (one pair per line, '#' comments) or, when the first
// non-space byte is '{', the JSON equivalent with the same keys
JobConfig parse_config(const std::string& text);
JobConfig load_config(const std::string& path);

// throws std::runtime_error naming the offending key
void validate_config(const JobConfig& cfg);

// canonical sorted key=value serialization (the hash input)
std::string canonical_config(const JobConfig& cfg);
// FNV-1a of the canonical serialization, 16 hex digits
std::string config_hash(const JobConfig& cfg);

// dispatch one batch command; artifacts land in cfg.out_dir, a human summary
// goes to `out`; returns a process exit status
int run(const JobConfig& cfg, const std::string& command, std::ostream& out);

// derived plot columns from a written artifact; kind in
// {gap-widths, step-trace, ids}
std::string export_plot_data(const std::string& artifact_path,
                             const std::string& kind);

}  // namespace cantorspec
