#include "rydion/cli.hpp"

#include <CLI11.hpp>
#include <atomic>
#include <fstream>
#include <iostream>
#include <thread>

#include "rydion/average.hpp"
#include "rydion/classical.hpp"
#include "rydion/errors.hpp"
#include "rydion/manifest.hpp"
#include "rydion/quantum.hpp"
#include "rydion/rng.hpp"
#include "rydion/sweep.hpp"
#include "rydion/units.hpp"

namespace rydion::cli {

namespace {

struct GridFlags {
    double lo = 300.0;
    double hi = 420.0;
    double step = 1.0;

    int size() const {
        return static_cast<int>(std::floor((hi - lo) / step + 0.5)) + 1;
    }
    double field(int i) const { return lo + step * i; }
    void validate() const {
        if (lo < 0.0) throw ConfigError("--field-lo must be >= 0");
        if (hi < lo) throw ConfigError("--field-hi must be >= --field-lo");
        if (!(step > 0.0)) throw ConfigError("--field-step must be > 0");
    }
};

struct DriveFlags {
    double frequency_GHz = 9.92;
    double cycles = 500.0;
    EnvelopeParams envelope;

    DriveProtocol drive(double field_V_per_cm, int steps_per_cycle) const {
        DriveProtocol d;
        d.epsilon = units::field_to_au(field_V_per_cm);
        d.omega = units::frequency_to_au(frequency_GHz);
        d.envelope_params = envelope;
        d.total_cycles = cycles;
        d.steps_per_cycle = steps_per_cycle;
        return d;
    }
};

void add_drive_flags(CLI::App* cmd, DriveFlags& f) {
    cmd->add_option("--frequency-ghz", f.frequency_GHz, "Microwave frequency (GHz)")
        ->capture_default_str();
    cmd->add_option("--cycles", f.cycles, "Protocol length in field cycles")
        ->capture_default_str();
    cmd->add_option("--envelope-t-on", f.envelope.t_on, "Envelope switch-on center (cycles)")
        ->capture_default_str();
    cmd->add_option("--envelope-w-on", f.envelope.w_on, "Envelope switch-on width (cycles)")
        ->capture_default_str();
    cmd->add_option("--envelope-t-off", f.envelope.t_off, "Envelope switch-off center (cycles)")
        ->capture_default_str();
    cmd->add_option("--envelope-w-off", f.envelope.w_off, "Envelope switch-off width (cycles)")
        ->capture_default_str();
}

void add_grid_flags(CLI::App* cmd, GridFlags& g) {
    cmd->add_option("--field-lo", g.lo, "Lowest field of the grid (V/cm)")
        ->capture_default_str();
    cmd->add_option("--field-hi", g.hi, "Highest field of the grid (V/cm)")
        ->capture_default_str();
    cmd->add_option("--field-step", g.step, "Grid step (V/cm)")->capture_default_str();
}

// run fn(i) for i in [0, n) on `workers` threads; results must be written
// into index-addressed storage by the callee
void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    auto loop = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min(workers, n); ++w) pool.emplace_back(loop);
    for (auto& th : pool) th.join();
}

int cmd_quantum_curve(int n0, int m0, const GridFlags& grid, const DriveFlags& drivef,
                      int basis_lo, int basis_hi, int n_cut, int steps_per_cycle,
                      int workers, const std::string& cache_dir,
                      const std::string& trace_file, const std::string& out) {
    grid.validate();
    if (std::abs(m0) > n0 - 1) throw ConfigError("--m0 must satisfy |m0| <= n0 - 1");
    const int n = grid.size();
    if (!trace_file.empty() && n != 1)
        throw ConfigError("--trace needs a single-point field grid");

    BasisOptions basis_opts;
    if (!cache_dir.empty()) basis_opts.cache_dir = cache_dir;
    const StarkBasis basis = build_dipole_matrix(m0, basis_lo, basis_hi, basis_opts);
    if (basis.index_of(n0) < 0)
        throw ConfigError("--n0 must lie inside the basis range");

    std::ofstream trace_out;
    if (!trace_file.empty()) {
        trace_out.open(trace_file, std::ios::trunc);
        if (!trace_out) throw ConfigError("cannot open trace file " + trace_file);
        trace_out << "cycle,norm,absorbed_probability,p_bound\n";
    }

    IonizationCurve curve;
    curve.field_lo = grid.lo;
    curve.step = grid.step;
    curve.p.assign(static_cast<size_t>(n), 0.0);
    curve.meta = {n0, std::to_string(m0), "quantum", false};

    std::vector<std::string> errors(static_cast<size_t>(n));
    parallel_for(n, workers, [&](int i) {
        try {
            PropagateOptions opts;
            opts.n0 = n0;
            opts.n_cut = n_cut;
            if (trace_out.is_open()) {
                opts.trace = [&](const CycleTrace& t) {
                    char line[128];
                    std::snprintf(line, sizeof line, "%d,%.12g,%.12g,%.12g\n", t.cycle,
                                  t.norm, t.absorbed, t.bound_prob);
                    trace_out << line;
                };
            }
            const DriveProtocol drive = drivef.drive(grid.field(i), steps_per_cycle);
            curve.p[static_cast<size_t>(i)] = propagate(basis, drive, opts).p_ion;
        } catch (const std::exception& e) {
            errors[static_cast<size_t>(i)] = e.what();
        }
    });
    for (int i = 0; i < n; ++i)
        if (!errors[static_cast<size_t>(i)].empty())
            throw NumericalError("field " + std::to_string(grid.field(i)) +
                                 " V/cm: " + errors[static_cast<size_t>(i)]);

    write_curve_csv(curve, out);
    return 0;
}

int cmd_classical_curve(int n0, std::optional<int> m0, const GridFlags& grid,
                        const DriveFlags& drivef, int trajectories, int n_cut,
                        int steps_per_cycle, double lz_half_width, std::uint64_t seed,
                        int workers, const std::string& dump_file,
                        const std::string& out) {
    grid.validate();
    if (trajectories < 1) throw ConfigError("--trajectories must be >= 1");
    if (m0 && std::abs(*m0) > n0 - 1)
        throw ConfigError("--m0 must satisfy |m0| <= n0 - 1");
    const int n = grid.size();
    const int m0_key = m0 ? *m0 : microcanonical_key;

    IonizationCurve curve;
    curve.field_lo = grid.lo;
    curve.step = grid.step;
    curve.p.assign(static_cast<size_t>(n), 0.0);
    curve.meta = {n0, m0 ? std::to_string(*m0) : "microcanonical", "classical", false};

    struct DumpRow {
        double field;
        int id;
        double energy;
        double n_cl;
        bool ionized;
    };
    std::vector<std::vector<DumpRow>> dump_rows(static_cast<size_t>(n));
    std::vector<std::string> errors(static_cast<size_t>(n));

    parallel_for(n, workers, [&](int i) {
        try {
            ClassicalRunOptions opts;
            opts.n_trajectories = trajectories;
            opts.n_cut = n_cut;
            opts.integrator.steps_per_cycle = steps_per_cycle;
            opts.seed = classical_task_seed(seed, i, m0_key);
            if (m0)
                opts.lz_window = std::make_pair(*m0 - lz_half_width, *m0 + lz_half_width);
            if (!dump_file.empty()) {
                opts.per_trajectory = [&, i](int id, const TrajectoryState& s, bool ion) {
                    dump_rows[static_cast<size_t>(i)].push_back(
                        {grid.field(i), id, s.energy(), s.classical_action(), ion});
                };
            }
            const DriveProtocol drive = drivef.drive(grid.field(i), steps_per_cycle);
            curve.p[static_cast<size_t>(i)] =
                classical_ionization_probability(n0, drive, opts);
        } catch (const std::exception& e) {
            errors[static_cast<size_t>(i)] = e.what();
        }
    });
    for (int i = 0; i < n; ++i)
        if (!errors[static_cast<size_t>(i)].empty())
            throw NumericalError("field " + std::to_string(grid.field(i)) +
                                 " V/cm: " + errors[static_cast<size_t>(i)]);

    if (!dump_file.empty()) {
        std::ofstream dump(dump_file, std::ios::trunc);
        if (!dump) throw ConfigError("cannot open dump file " + dump_file);
        dump << "field_V_per_cm,trajectory_id,final_energy_au,final_n_cl,ionized\n";
        char line[160];
        for (const auto& rows : dump_rows)
            for (const DumpRow& r : rows) {
                std::snprintf(line, sizeof line, "%.17g,%d,%.17g,%.17g,%d\n", r.field,
                              r.id, r.energy, r.n_cl, r.ionized ? 1 : 0);
                dump << line;
            }
    }

    write_curve_csv(curve, out);
    return 0;
}

int cmd_average(const std::string& in_dir, const std::string& method, bool droop,
                double droop_drop, int droop_nodes, const std::string& out) {
    std::map<int, IonizationCurve> curves;
    for (int m0 : MWeights::m0_values) {
        const std::filesystem::path file =
            std::filesystem::path(in_dir) / ("m" + std::to_string(m0) + "_" + method + ".csv");
        if (!std::filesystem::exists(file))
            throw ConfigError("missing per-m0 curve file " + file.string());
        curves.emplace(m0, read_curve_csv(file));
    }
    IonizationCurve averaged = m_average(curves);
    averaged.meta.method = method;
    if (droop) {
        DroopProfile profile;
        profile.drop = droop_drop;
        profile.nodes = droop_nodes;
        averaged = droop_correct(averaged, profile);
    }
    write_curve_csv(averaged, out);
    return 0;
}

int cmd_droop(const std::string& in, double drop, int nodes, const std::string& out) {
    DroopProfile profile;
    profile.drop = drop;
    profile.nodes = nodes;
    write_curve_csv(droop_correct(read_curve_csv(in), profile), out);
    return 0;
}

int cmd_matelem(int m0, int basis_lo, int basis_hi, const std::string& cache_dir,
                const std::string& out) {
    BasisOptions opts;
    if (!cache_dir.empty()) opts.cache_dir = cache_dir;
    const StarkBasis basis = build_dipole_matrix(m0, basis_lo, basis_hi, opts);
    std::ofstream csv(out, std::ios::trunc);
    if (!csv) throw ConfigError("cannot open " + out);
    csv << "n,nprime,z_au\n";
    char line[96];
    for (int a = 0; a < basis.size(); ++a)
        for (int b = 0; b < basis.size(); ++b) {
            std::snprintf(line, sizeof line, "%d,%d,%.17g\n", basis.n_of(a),
                          basis.n_of(b), basis.dipole(a, b));
            csv << line;
        }
    return 0;
}

int cmd_reproduce(SweepConfig cfg, const std::string& out_dir, bool dry_run,
                  bool quiet) {
    cfg.validate();
    if (dry_run) {
        const auto tasks = enumerate_tasks(cfg);
        std::cout << "tasks: " << tasks.size() << "\n";
        int quantum = 0, classical = 0;
        for (const auto& t : tasks)
            (t.method == SweepMethod::Quantum ? quantum : classical) += 1;
        std::cout << "quantum tasks: " << quantum << "\n";
        std::cout << "classical tasks: " << classical << "\n";
        std::cout << "output dir: " << out_dir << "\n";
        return 0;
    }
    SweepOptions opts;
    if (!quiet) {
        opts.progress = [](int done, int total) {
            if (done % 10 == 0 || done == total)
                std::cerr << "\r" << done << "/" << total << " tasks" << std::flush;
        };
    }
    reproduce_figures(cfg, out_dir, opts);
    if (!quiet) std::cerr << "\n";
    return 0;
}

} // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Microwave ionization curves of hydrogen Rydberg atoms: quantum "
                 "extremal-Stark-state propagation and classical trajectory "
                 "ensembles, with m0 averaging and cavity radial-droop correction."};
    app.set_config("--config", "", "Read options from an INI/TOML file "
                                   "(flags override file values)");
    app.require_subcommand(1);

    // quantum-curve ----------------------------------------------------
    auto* quantum = app.add_subcommand(
        "quantum-curve", "Ionization curve from quantum propagation at fixed m0");
    quantum->configurable();
    quantum->fallthrough();
    int q_n0 = 0, q_m0 = 0, q_basis_lo = 30, q_basis_hi = 100, q_ncut = 91;
    int q_steps = 2000, q_workers = 1;
    GridFlags q_grid;
    DriveFlags q_drive;
    std::string q_cache, q_trace, q_out = "quantum_curve.csv";
    quantum->add_option("--n0", q_n0, "Initial principal quantum number")->required();
    quantum->add_option("--m0", q_m0, "Magnetic quantum number")->capture_default_str();
    add_grid_flags(quantum, q_grid);
    add_drive_flags(quantum, q_drive);
    quantum->add_option("--basis-lo", q_basis_lo, "Lowest n in the basis")
        ->capture_default_str();
    quantum->add_option("--basis-hi", q_basis_hi, "Highest n in the basis")
        ->capture_default_str();
    quantum->add_option("--n-cut", q_ncut, "Absorbing boundary n_c")->capture_default_str();
    quantum->add_option("--steps-per-cycle", q_steps, "Integrator steps per field cycle")
        ->capture_default_str();
    quantum->add_option("--workers", q_workers, "Parallel workers over field values")
        ->capture_default_str();
    quantum->add_option("--cache-dir", q_cache, "Dipole-matrix cache directory");
    quantum->add_option("--trace", q_trace,
                        "Per-cycle diagnostics CSV (single field point only)");
    quantum->add_option("--out", q_out, "Output CSV")->capture_default_str();

    // classical-curve --------------------------------------------------
    auto* classical = app.add_subcommand(
        "classical-curve", "Ionization curve from the classical trajectory ensemble");
    classical->configurable();
    classical->fallthrough();
    int c_n0 = 0, c_traj = 25, c_ncut = 91, c_steps = 2048, c_workers = 1;
    std::optional<int> c_m0;
    double c_lzw = 2.5;
    std::uint64_t c_seed = 20010329;
    GridFlags c_grid;
    DriveFlags c_drive;
    std::string c_dump, c_out = "classical_curve.csv";
    classical->add_option("--n0", c_n0, "Initial principal quantum number")->required();
    classical->add_option("--m0", c_m0,
                          "Restrict Lz to a window around m0 (omit for the full "
                          "microcanonical ensemble)");
    add_grid_flags(classical, c_grid);
    add_drive_flags(classical, c_drive);
    classical->add_option("--trajectories", c_traj, "Trajectories per field value")
        ->capture_default_str();
    classical->add_option("--n-cut", c_ncut, "Detection cut-off n_c")->capture_default_str();
    classical->add_option("--steps-per-cycle", c_steps, "Splitting steps per field cycle")
        ->capture_default_str();
    classical->add_option("--lz-half-width", c_lzw, "Half-width of the Lz window (a.u.)")
        ->capture_default_str();
    classical->add_option("--seed", c_seed, "Ensemble seed")->capture_default_str();
    classical->add_option("--workers", c_workers, "Parallel workers over field values")
        ->capture_default_str();
    classical->add_option("--dump-trajectories", c_dump,
                          "Per-trajectory CSV (id, energy, n_cl, ionized)");
    classical->add_option("--out", c_out, "Output CSV")->capture_default_str();

    // average ------------------------------------------------------------
    auto* average = app.add_subcommand(
        "average", "m0-average the eight per-m0 curves, optionally droop-corrected");
    average->configurable();
    average->fallthrough();
    std::string a_in_dir, a_method = "quantum", a_droop = "off", a_out = "averaged.csv";
    double a_drop = 0.07;
    int a_nodes = 32;
    average->add_option("--in-dir", a_in_dir, "Directory holding m{m0}_{method}.csv")
        ->required();
    average->add_option("--method", a_method, "quantum or classical")
        ->check(CLI::IsMember({"quantum", "classical"}))
        ->capture_default_str();
    average->add_option("--droop", a_droop, "Apply radial droop correction (on|off)")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    average->add_option("--droop-drop", a_drop, "Relative amplitude drop at the beam edge")
        ->capture_default_str();
    average->add_option("--droop-nodes", a_nodes, "Quadrature nodes over the beam")
        ->capture_default_str();
    average->add_option("--out", a_out, "Output CSV")->capture_default_str();

    // droop --------------------------------------------------------------
    auto* droop = app.add_subcommand("droop", "Apply the radial droop correction to a curve");
    droop->configurable();
    droop->fallthrough();
    std::string d_in, d_out = "droop_curve.csv";
    double d_drop = 0.07;
    int d_nodes = 32;
    droop->add_option("--in", d_in, "Input curve CSV")->required();
    droop->add_option("--drop", d_drop, "Relative amplitude drop at the beam edge")
        ->capture_default_str();
    droop->add_option("--nodes", d_nodes, "Quadrature nodes over the beam")
        ->capture_default_str();
    droop->add_option("--out", d_out, "Output CSV")->capture_default_str();

    // matelem ------------------------------------------------------------
    auto* matelem = app.add_subcommand("matelem", "Dump a dipole matrix as CSV");
    matelem->configurable();
    matelem->fallthrough();
    int e_m0 = 0, e_basis_lo = 30, e_basis_hi = 100;
    std::string e_cache, e_out = "matelem.csv";
    matelem->add_option("--m0", e_m0, "Magnetic quantum number")->capture_default_str();
    matelem->add_option("--basis-lo", e_basis_lo, "Lowest n")->capture_default_str();
    matelem->add_option("--basis-hi", e_basis_hi, "Highest n")->capture_default_str();
    matelem->add_option("--cache-dir", e_cache, "Dipole-matrix cache directory");
    matelem->add_option("--out", e_out, "Output CSV")->capture_default_str();

    // reproduce ----------------------------------------------------------
    auto* reproduce = app.add_subcommand(
        "reproduce", "Full sweep: per-m0 curves, averages, droop correction, plots");
    reproduce->configurable();
    reproduce->fallthrough();
    SweepConfig r_cfg;
    std::string r_preset = "n37", r_out_dir = "reproduce_out", r_method = "both";
    std::string r_cache;
    bool r_dry = false, r_quiet = false;
    reproduce->add_option("--preset", r_preset, "Parameter preset (n37)")
        ->check(CLI::IsMember({"n37"}))
        ->capture_default_str();
    reproduce->add_option("--method", r_method, "quantum, classical or both")
        ->check(CLI::IsMember({"quantum", "classical", "both"}))
        ->capture_default_str();
    reproduce->add_option("--field-lo", r_cfg.field_lo, "Lowest field (V/cm)")
        ->capture_default_str();
    reproduce->add_option("--field-hi", r_cfg.field_hi, "Highest field (V/cm)")
        ->capture_default_str();
    reproduce->add_option("--field-step", r_cfg.field_step, "Grid step (V/cm)")
        ->capture_default_str();
    reproduce->add_option("--basis-lo", r_cfg.basis_lo, "Lowest n in the basis")
        ->capture_default_str();
    reproduce->add_option("--basis-hi", r_cfg.basis_hi, "Highest n in the basis")
        ->capture_default_str();
    reproduce->add_option("--steps-per-cycle", r_cfg.steps_per_cycle,
                          "Quantum integrator steps per cycle")
        ->capture_default_str();
    reproduce->add_option("--trajectories", r_cfg.trajectories,
                          "Classical trajectories per field value")
        ->capture_default_str();
    reproduce->add_option("--seed", r_cfg.seed, "Ensemble seed")->capture_default_str();
    reproduce->add_option("--workers", r_cfg.workers, "Parallel workers")
        ->capture_default_str();
    reproduce->add_option("--cache-dir", r_cache, "Dipole-matrix cache directory");
    reproduce->add_option("--out-dir", r_out_dir, "Output directory")->capture_default_str();
    reproduce->add_flag("--dry-run", r_dry, "Print the task count and exit");
    reproduce->add_flag("--quiet", r_quiet, "Suppress progress output");

    try {
        app.parse(argc, argv);

        if (*quantum)
            return cmd_quantum_curve(q_n0, q_m0, q_grid, q_drive, q_basis_lo, q_basis_hi,
                                     q_ncut, q_steps, q_workers, q_cache, q_trace, q_out);
        if (*classical)
            return cmd_classical_curve(c_n0, c_m0, c_grid, c_drive, c_traj, c_ncut,
                                       c_steps, c_lzw, c_seed, c_workers, c_dump, c_out);
        if (*average)
            return cmd_average(a_in_dir, a_method, a_droop == "on", a_drop, a_nodes, a_out);
        if (*droop) return cmd_droop(d_in, d_drop, d_nodes, d_out);
        if (*matelem) return cmd_matelem(e_m0, e_basis_lo, e_basis_hi, e_cache, e_out);
        if (*reproduce) {
            r_cfg.method = r_method == "quantum"  ? SweepMethod::Quantum
                          : r_method == "classical" ? SweepMethod::Classical
                                                    : SweepMethod::Both;
            r_cfg.cache_dir = r_cache;
            return cmd_reproduce(r_cfg, r_out_dir, r_dry, r_quiet);
        }
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace rydion::cli
