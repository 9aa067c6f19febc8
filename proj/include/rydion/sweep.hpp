#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "rydion/curve.hpp"
#include "rydion/drive.hpp"

// Orchestration of the full experiment reproduction: field grid x m0 set
// x method, executed by a fixed pool of workers over an immutable task
// list, with an append-only checkpoint file for exact resume. Results are
// merged by task index, so scheduling order never affects the output.

namespace rydion {

enum class SweepMethod { Quantum, Classical, Both };

/// m0 key of the fully microcanonical classical ensemble (no Lz window).
inline constexpr int microcanonical_key = -1;

struct SweepConfig {
    int n0 = 37;
    double field_lo = 300.0; // V/cm
    double field_hi = 420.0; // V/cm
    double field_step = 1.0; // V/cm
    std::vector<int> m0_set = {0, 5, 10, 15, 20, 25, 30, 35};
    SweepMethod method = SweepMethod::Quantum;

    // quantum settings
    int basis_lo = 30;
    int basis_hi = 100;
    int n_cut = 91;
    int steps_per_cycle = 2000;

    // classical settings
    int trajectories = 25;
    int classical_steps_per_cycle = 2048;
    bool classical_full_ensemble = true; // paper default: no Lz window
    double lz_half_width = 2.5;          // a.u., for per-m0 classical curves

    // shared drive
    double frequency_GHz = 9.92;
    EnvelopeParams envelope;
    double total_cycles = 500.0;

    std::uint64_t seed = 20010329;
    int workers = 1;
    int max_retries = 2;
    std::filesystem::path cache_dir; // dipole-matrix cache; empty disables
    /// reproduce_figures only: also emit the m0 = 10, basis-150 curve
    bool with_convergence_curve = true;

    int grid_size() const {
        return static_cast<int>(std::floor((field_hi - field_lo) / field_step + 0.5)) + 1;
    }
    double field(int i) const { return field_lo + field_step * i; }
    DriveProtocol drive_for(double field_V_per_cm) const;

    void validate() const;
    /// hash of every physics-relevant setting; guards checkpoint resume
    std::string fingerprint() const;
};

struct SweepTask {
    int index = 0;
    int m0 = 0; // microcanonical_key for the unwindowed classical ensemble
    SweepMethod method = SweepMethod::Quantum; // Quantum or Classical
    int field_index = 0;
    double field_V_per_cm = 0.0;
};

class CancelToken {
public:
    void cancel() { flag_.store(true, std::memory_order_relaxed); }
    bool cancelled() const { return flag_.load(std::memory_order_relaxed); }

private:
    std::atomic<bool> flag_{false};
};

struct SweepOptions {
    std::filesystem::path checkpoint_file; // empty disables checkpointing
    CancelToken* cancel = nullptr;
    /// called after every completed task with (done, total)
    std::function<void(int, int)> progress;
    /// test hook: replaces the physics task runner
    std::function<double(const SweepTask&)> runner;
};

struct SweepResult {
    /// (m0 key, method name) -> merged curve; only filled on completion
    std::map<std::pair<int, std::string>, IonizationCurve> curves;
    int tasks_total = 0;
    int tasks_run = 0;
    int tasks_resumed = 0;
    bool completed = false; // false when cancelled mid-run
};

/// The task list for a config (pure function of the config).
std::vector<SweepTask> enumerate_tasks(const SweepConfig& cfg);

/// Execute all tasks (minus checkpointed ones), merge curves in field
/// order. Persistent task failures raise NumericalError after the
/// checkpoint has been flushed.
SweepResult run_sweep(const SweepConfig& cfg, const SweepOptions& opts = {});

/// Full figure-reproduction pipeline: per-m0 droop-corrected quantum
/// curves, m-averaged quantum and classical curves, a two-basis
/// convergence curve over the m0 = 10 rise, a gnuplot script and a run
/// manifest, all written under out_dir.
SweepResult reproduce_figures(const SweepConfig& cfg,
                              const std::filesystem::path& out_dir,
                              const SweepOptions& opts = {});

} // namespace rydion
