#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kswave/chemo.hpp"
#include "kswave/model.hpp"
#include "kswave/stepper.hpp"

namespace kswave {

enum class Mode { Simulate, Eig, Regime, Verify, Sweep };

[[nodiscard]] std::string to_string(Mode mode);
[[nodiscard]] Mode parse_mode(const std::string& text);

/// `min:max:count` in a config; count == 1 requires min == max.
struct SweepAxis {
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 1;

    [[nodiscard]] std::vector<double> values() const;
    bool operator==(const SweepAxis&) const = default;
};

/// Everything one invocation needs. Parsed from a flat `key = value` file.
struct RunSpec {
    Mode mode = Mode::Simulate;
    SimParams params;
    GrowthProfile profile;
    std::optional<InitialCondition> u0;
    double L = 20.0;
    double h = 0.1;
    double tau = 0.002;
    double T = 10.0;
    BoundaryCase bc = BoundaryCase::Case1;
    NeumannClosure closure = NeumannClosure::FirstOrder;
    std::vector<double> snapshot_times;
    double conv_window = 1.0;
    double conv_tol = 1e-3;
    double extinct_tol = 1e-3;
    double plateau_rel_tol = 0.02;
    bool allow_unstable = false;
    std::string out;

    // eig
    std::vector<double> eig_L;
    double eig_h = 0.01;
    double lambda_tol = 1e-4;

    // verify
    std::vector<double> epsilons{0.1, 0.05, 0.025};
    double envelope_epsilon = 0.05;
    std::size_t samples = 100;
    std::uint64_t seed = 1;
    std::optional<double> r1;
    std::optional<double> rbar;

    // sweep
    std::optional<SweepAxis> sweep_b;
    std::optional<SweepAxis> sweep_c;
    std::optional<SweepAxis> sweep_chi;
    double horizon_scale = 1.0;
    unsigned threads = 0;  ///< 0: hardware concurrency

    /// Throws ValidationError naming the offending key.
    void validate() const;
    [[nodiscard]] Grid grid() const;
    [[nodiscard]] RunConfig run_config() const;

    bool operator==(const RunSpec&) const = default;
};

/// Parses without the semantic checks, so callers can apply overrides first.
/// Syntax errors carry the line number; unknown keys are errors.
[[nodiscard]] RunSpec parse_config_unchecked(std::string_view text);
/// parse_config_unchecked followed by validate().
[[nodiscard]] RunSpec parse_config(std::string_view text);
[[nodiscard]] RunSpec load_config(const std::filesystem::path& path);
/// Inverse of parse_config: parse_config(render_config(s)) == s.
[[nodiscard]] std::string render_config(const RunSpec& spec);

/// Shortest representation that reads back to the same double.
[[nodiscard]] std::string format_double(double value);

struct ArtifactBundle {
    std::filesystem::path dir;
    std::vector<std::filesystem::path> files;
    std::optional<Outcome> outcome;
    std::optional<std::string> fault;  ///< numerical fault in a simulation
    bool checks_passed = true;         ///< verify mode: every certificate held
    std::vector<std::string> summary;  ///< key=value lines for the terminal
};

/// Runs spec.mode and writes its files (plus manifest.txt and
/// timestamps.txt) under `dir` (spec.out, or "out" when both are empty).
[[nodiscard]] ArtifactBundle run_experiment(const RunSpec& spec,
                                            const std::filesystem::path& dir = {});

struct SweepRow {
    double b = 0.0;
    double c = 0.0;
    double chi = 0.0;
    std::string outcome;  ///< outcome tag, "skipped" (b <= chi mu) or "error"
    std::optional<double> plateau;
    std::optional<double> final_sup_u;
};

[[nodiscard]] std::string sweep_csv_header();
[[nodiscard]] std::string sweep_csv_row(const SweepRow& row);

/// Runs every grid point of the sweep axes on a worker pool. `on_row` is
/// called from the calling thread in grid order as rows complete.
[[nodiscard]] std::vector<SweepRow> sweep(const RunSpec& spec,
                                          const std::function<void(const SweepRow&)>& on_row = {});

/// Extinction/forced-wave transition in c: midpoint of the largest c with
/// extinction and the smallest larger c with a forced wave.
[[nodiscard]] std::optional<double> transition_speed(const std::vector<SweepRow>& rows);

}  // namespace kswave
