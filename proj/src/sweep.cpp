#include "rydion/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "rydion/average.hpp"
#include "rydion/classical.hpp"
#include "rydion/errors.hpp"
#include "rydion/manifest.hpp"
#include "rydion/quantum.hpp"
#include "rydion/rng.hpp"
#include "rydion/units.hpp"

namespace rydion {

namespace {

const char* method_name(SweepMethod m) {
    return m == SweepMethod::Quantum ? "quantum" : "classical";
}

std::string task_m0_tag(int m0) {
    return m0 == microcanonical_key ? "microcanonical" : std::to_string(m0);
}

// Physics task runner shared by sweeps; bases are built once per |m0| and
// shared read-only between workers.
class PhysicsRunner {
public:
    explicit PhysicsRunner(const SweepConfig& cfg) : cfg_(cfg) {
        if (cfg.method == SweepMethod::Quantum || cfg.method == SweepMethod::Both) {
            BasisOptions basis_opts;
            if (!cfg.cache_dir.empty()) basis_opts.cache_dir = cfg.cache_dir;
            for (int m0 : cfg.m0_set)
                if (!bases_.count(std::abs(m0)))
                    bases_.emplace(std::abs(m0),
                                   build_dipole_matrix(m0, cfg.basis_lo, cfg.basis_hi,
                                                       basis_opts));
        }
    }

    double operator()(const SweepTask& task) const {
        const DriveProtocol drive = cfg_.drive_for(task.field_V_per_cm);
        if (task.method == SweepMethod::Quantum) {
            PropagateOptions opts;
            opts.n0 = cfg_.n0;
            opts.n_cut = cfg_.n_cut;
            return propagate(bases_.at(std::abs(task.m0)), drive, opts).p_ion;
        }
        ClassicalRunOptions opts;
        opts.n_trajectories = cfg_.trajectories;
        opts.n_cut = cfg_.n_cut;
        opts.integrator.steps_per_cycle = cfg_.classical_steps_per_cycle;
        opts.seed = classical_task_seed(cfg_.seed, task.field_index, task.m0);
        if (task.m0 != microcanonical_key)
            opts.lz_window = std::make_pair(task.m0 - cfg_.lz_half_width,
                                            task.m0 + cfg_.lz_half_width);
        return classical_ionization_probability(cfg_.n0, drive, opts);
    }

private:
    const SweepConfig& cfg_;
    std::map<int, StarkBasis> bases_;
};

struct CheckpointData {
    std::vector<std::optional<double>> values;
    std::vector<double> runtimes;
};

void flush_checkpoint(const std::filesystem::path& file, const std::string& fingerprint,
                      const CheckpointData& data, const std::vector<SweepTask>& tasks) {
    const std::filesystem::path tmp = file.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw ConfigError("checkpoint: cannot write " + tmp.string());
        out << "# rydion checkpoint v1\n";
        out << "fingerprint " << fingerprint << "\n";
        char line[160];
        for (size_t i = 0; i < data.values.size(); ++i) {
            if (!data.values[i]) continue;
            const SweepTask& t = tasks[i];
            std::snprintf(line, sizeof line, "task %zu %s %s %d %.17g %.3f\n", i,
                          task_m0_tag(t.m0).c_str(), method_name(t.method),
                          t.field_index, *data.values[i], data.runtimes[i]);
            out << line;
        }
    }
    std::filesystem::rename(tmp, file);
}

void load_checkpoint(const std::filesystem::path& file, const std::string& fingerprint,
                     CheckpointData& data) {
    std::ifstream in(file);
    if (!in) return;
    std::string line;
    bool fingerprint_ok = false;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::string kind;
        row >> kind;
        if (kind == "fingerprint") {
            std::string fp;
            row >> fp;
            if (fp != fingerprint)
                throw ConfigError("checkpoint " + file.string() +
                                  ": fingerprint mismatch; the file belongs to a "
                                  "different configuration (use a fresh checkpoint)");
            fingerprint_ok = true;
        } else if (kind == "task") {
            if (!fingerprint_ok)
                throw ConfigError("checkpoint " + file.string() +
                                  ": missing fingerprint header");
            size_t index = 0;
            std::string m0_tag, method;
            int field_index = 0;
            double value = 0.0, runtime = 0.0;
            if (!(row >> index >> m0_tag >> method >> field_index >> value >> runtime) ||
                index >= data.values.size())
                throw ConfigError("checkpoint " + file.string() + ": malformed line " +
                                  std::to_string(line_no));
            data.values[index] = value;
            data.runtimes[index] = runtime;
        }
    }
}

} // namespace

DriveProtocol SweepConfig::drive_for(double field_V_per_cm) const {
    DriveProtocol drive;
    drive.epsilon = units::field_to_au(field_V_per_cm);
    drive.omega = units::frequency_to_au(frequency_GHz);
    drive.envelope_params = envelope;
    drive.total_cycles = total_cycles;
    drive.steps_per_cycle = steps_per_cycle;
    return drive;
}

void SweepConfig::validate() const {
    if (n0 < 1) throw ConfigError("SweepConfig: n0 must be >= 1");
    if (field_lo < 1.0) throw ConfigError("SweepConfig: field_lo must be >= 1 V/cm");
    if (field_hi < field_lo) throw ConfigError("SweepConfig: field_hi < field_lo");
    if (!(field_step > 0.0)) throw ConfigError("SweepConfig: field_step must be > 0");
    if (m0_set.empty()) throw ConfigError("SweepConfig: m0_set must not be empty");
    for (int m0 : m0_set)
        if (std::abs(m0) > n0 - 1)
            throw ConfigError("SweepConfig: |m0| must be <= n0 - 1");
    if (basis_lo < 1 || basis_hi < basis_lo)
        throw ConfigError("SweepConfig: invalid basis bounds");
    if (trajectories < 1) throw ConfigError("SweepConfig: trajectories must be >= 1");
    if (workers < 1) throw ConfigError("SweepConfig: workers must be >= 1");
    drive_for(field_lo).validate();
}

std::string SweepConfig::fingerprint() const {
    std::ostringstream s;
    s << "n0=" << n0 << ";grid=" << field_lo << ":" << field_step << ":" << field_hi
      << ";m0=";
    for (int m0 : m0_set) s << m0 << ",";
    s << ";method=" << static_cast<int>(method) << ";basis=" << basis_lo << "-"
      << basis_hi << ";ncut=" << n_cut << ";spc=" << steps_per_cycle
      << ";traj=" << trajectories << ";cspc=" << classical_steps_per_cycle
      << ";full=" << classical_full_ensemble << ";lzw=" << lz_half_width
      << ";nu=" << frequency_GHz << ";env=" << envelope.t_on << "," << envelope.w_on
      << "," << envelope.t_off << "," << envelope.w_off
      << ";cycles=" << total_cycles << ";seed=" << seed;
    return to_hex(fnv1a64(s.str()));
}

std::vector<SweepTask> enumerate_tasks(const SweepConfig& cfg) {
    std::vector<SweepTask> tasks;
    const int grid = cfg.grid_size();
    auto add_method = [&](SweepMethod method) {
        if (method == SweepMethod::Classical && cfg.classical_full_ensemble) {
            for (int i = 0; i < grid; ++i)
                tasks.push_back({static_cast<int>(tasks.size()), microcanonical_key,
                                 method, i, cfg.field(i)});
            return;
        }
        for (int m0 : cfg.m0_set)
            for (int i = 0; i < grid; ++i)
                tasks.push_back({static_cast<int>(tasks.size()), m0, method, i,
                                 cfg.field(i)});
    };
    if (cfg.method == SweepMethod::Quantum || cfg.method == SweepMethod::Both)
        add_method(SweepMethod::Quantum);
    if (cfg.method == SweepMethod::Classical || cfg.method == SweepMethod::Both)
        add_method(SweepMethod::Classical);
    return tasks;
}

SweepResult run_sweep(const SweepConfig& cfg, const SweepOptions& opts) {
    cfg.validate();
    const std::vector<SweepTask> tasks = enumerate_tasks(cfg);
    const std::string fingerprint = cfg.fingerprint();

    CheckpointData data;
    data.values.assign(tasks.size(), std::nullopt);
    data.runtimes.assign(tasks.size(), 0.0);

    const bool checkpointing = !opts.checkpoint_file.empty();
    if (checkpointing && std::filesystem::exists(opts.checkpoint_file))
        load_checkpoint(opts.checkpoint_file, fingerprint, data);

    SweepResult result;
    result.tasks_total = static_cast<int>(tasks.size());
    for (const auto& v : data.values)
        if (v) ++result.tasks_resumed;

    std::function<double(const SweepTask&)> runner = opts.runner;
    std::optional<PhysicsRunner> physics;
    if (!runner) {
        physics.emplace(cfg);
        runner = [&physics](const SweepTask& t) { return (*physics)(t); };
    }

    std::atomic<size_t> next{0};
    std::atomic<int> done{result.tasks_resumed};
    std::mutex flush_mutex;
    int last_flush = result.tasks_resumed;
    const int flush_batch = std::max<int>(1, static_cast<int>(tasks.size()) / 64);
    std::mutex failure_mutex;
    std::vector<std::string> failures;

    auto worker = [&]() {
        for (;;) {
            if (opts.cancel && opts.cancel->cancelled()) return;
            const size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            if (data.values[i]) continue; // resumed from checkpoint
            const auto t0 = std::chrono::steady_clock::now();
            double value = 0.0;
            bool ok = false;
            std::string error;
            for (int attempt = 0; attempt <= cfg.max_retries && !ok; ++attempt) {
                try {
                    value = runner(tasks[i]);
                    ok = true;
                } catch (const std::exception& e) {
                    error = e.what();
                }
            }
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                    .count();
            if (!ok) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                std::ostringstream msg;
                msg << "task " << i << " (m0 " << task_m0_tag(tasks[i].m0) << ", "
                    << method_name(tasks[i].method) << ", field "
                    << tasks[i].field_V_per_cm << " V/cm): " << error;
                failures.push_back(msg.str());
                continue;
            }
            data.values[i] = value;
            data.runtimes[i] = secs;
            const int completed = done.fetch_add(1) + 1;
            if (opts.progress) opts.progress(completed, result.tasks_total);
            if (checkpointing) {
                std::lock_guard<std::mutex> lock(flush_mutex);
                if (completed - last_flush >= flush_batch) {
                    flush_checkpoint(opts.checkpoint_file, fingerprint, data, tasks);
                    last_flush = completed;
                }
            }
        }
    };

    if (cfg.workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(cfg.workers));
        for (int w = 0; w < cfg.workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    if (checkpointing)
        flush_checkpoint(opts.checkpoint_file, fingerprint, data, tasks);

    result.tasks_run = done.load() - result.tasks_resumed;
    if (!failures.empty()) {
        std::ostringstream msg;
        msg << failures.size() << " task(s) failed after " << cfg.max_retries
            << " retries; completed results are checkpointed.";
        for (const auto& f : failures) msg << "\n  " << f;
        throw NumericalError(msg.str());
    }
    if (opts.cancel && opts.cancel->cancelled()) {
        result.completed = false;
        return result;
    }

    // merge curves in deterministic field order
    for (const SweepTask& t : tasks) {
        auto key = std::make_pair(t.m0, std::string(method_name(t.method)));
        auto [it, inserted] = result.curves.try_emplace(key);
        IonizationCurve& curve = it->second;
        if (inserted) {
            curve.field_lo = cfg.field_lo;
            curve.step = cfg.field_step;
            curve.p.assign(static_cast<size_t>(cfg.grid_size()), 0.0);
            curve.meta.n0 = cfg.n0;
            curve.meta.m0_tag = task_m0_tag(t.m0);
            curve.meta.method = method_name(t.method);
        }
        curve.p[static_cast<size_t>(t.field_index)] = *data.values[static_cast<size_t>(t.index)];
    }
    result.completed = true;
    return result;
}

SweepResult reproduce_figures(const SweepConfig& cfg,
                              const std::filesystem::path& out_dir,
                              const SweepOptions& opts) {
    const std::filesystem::path curves_dir = out_dir / "curves";
    std::filesystem::create_directories(curves_dir);

    SweepOptions run_opts = opts;
    if (run_opts.checkpoint_file.empty())
        run_opts.checkpoint_file = out_dir / "checkpoint.txt";

    const auto t_start = std::chrono::steady_clock::now();
    SweepResult result = run_sweep(cfg, run_opts);
    if (!result.completed) return result;

    RunManifest manifest;
    manifest.add("config.fingerprint", cfg.fingerprint());
    manifest.add("config.n0", std::to_string(cfg.n0));
    {
        std::ostringstream grid;
        grid << cfg.field_lo << ":" << cfg.field_step << ":" << cfg.field_hi;
        manifest.add("config.grid_V_per_cm", grid.str());
    }
    manifest.add("config.basis", std::to_string(cfg.basis_lo) + ".." +
                                     std::to_string(cfg.basis_hi));
    manifest.add("config.seed", std::to_string(cfg.seed));
    manifest.add("config.workers", std::to_string(cfg.workers));

    std::vector<std::filesystem::path> outputs;
    auto emit = [&](const IonizationCurve& curve, const std::string& name) {
        const std::filesystem::path file = curves_dir / name;
        write_curve_csv(curve, file);
        outputs.push_back(file);
    };

    // per-m0 quantum curves and their droop corrections (Fig. 1 analogue)
    std::map<int, IonizationCurve> quantum_curves;
    for (auto& [key, curve] : result.curves) {
        const auto& [m0, method] = key;
        if (method == "quantum") {
            quantum_curves.emplace(m0, curve);
            emit(curve, "m" + std::to_string(m0) + "_quantum.csv");
            emit(droop_correct(curve), "m" + std::to_string(m0) + "_quantum_droop.csv");
        }
    }
    if (static_cast<int>(quantum_curves.size()) ==
        static_cast<int>(MWeights::m0_values.size())) {
        const IonizationCurve averaged = m_average(quantum_curves);
        emit(averaged, "averaged_quantum.csv");
        emit(droop_correct(averaged), "averaged_quantum_droop.csv");
    }
    for (auto& [key, curve] : result.curves) {
        const auto& [m0, method] = key;
        if (method == "classical" && m0 == microcanonical_key) {
            IonizationCurve averaged = curve;
            averaged.meta.m0_tag = "averaged";
            emit(averaged, "averaged_classical.csv");
            emit(droop_correct(averaged), "averaged_classical_droop.csv");
        }
    }

    // Fig. 3 analogue: the m0 = 10 curve recomputed with the basis extended
    // to n = 150, restricted to the main rise of the regular-basis curve
    if (cfg.with_convergence_curve && quantum_curves.count(10)) {
        const IonizationCurve& base = quantum_curves.at(10);
        int lo = base.size(), hi = -1;
        for (int i = 0; i < base.size(); ++i) {
            if (base.p[static_cast<size_t>(i)] >= 0.02) lo = std::min(lo, i);
            if (base.p[static_cast<size_t>(i)] <= 0.98) hi = std::max(hi, i);
        }
        if (lo <= hi) {
            SweepConfig wide = cfg;
            wide.method = SweepMethod::Quantum;
            wide.m0_set = {10};
            wide.basis_hi = std::max(cfg.basis_hi, 150);
            wide.field_lo = base.field(std::max(0, lo - 2));
            wide.field_hi = base.field(std::min(base.size() - 1, hi + 2));
            SweepOptions wide_opts = opts;
            wide_opts.checkpoint_file = out_dir / "checkpoint_b150.txt";
            SweepResult wide_result = run_sweep(wide, wide_opts);
            if (wide_result.completed)
                emit(wide_result.curves.at({10, "quantum"}), "m10_quantum_b150.csv");
        }
    }

    // gnuplot script
    const std::filesystem::path plot_file = out_dir / "plots.gp";
    {
        std::ofstream gp(plot_file, std::ios::trunc);
        gp << "set datafile separator ','\n"
              "set xlabel 'field (V/cm)'\n"
              "set ylabel 'ionization probability'\n"
              "set yrange [0:1]\n"
              "set key left top\n"
              "set term pngcairo size 900,600\n"
              "set output 'fig1_per_m0.png'\n"
              "plot ";
        bool first = true;
        for (int m0 : cfg.m0_set) {
            if (!first) gp << ", \\\n     ";
            gp << "'curves/m" << m0 << "_quantum_droop.csv' every ::1 with lines title 'm0="
               << m0 << "'";
            first = false;
        }
        gp << "\n"
              "set output 'fig2_averaged.png'\n"
              "plot 'curves/averaged_quantum_droop.csv' every ::1 with lines "
              "title 'quantum (m-averaged, droop)', \\\n"
              "     'curves/averaged_classical_droop.csv' every ::1 with points "
              "pt 7 title 'classical (droop)'\n";
    }
    outputs.push_back(plot_file);

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    manifest.add("run.tasks_total", std::to_string(result.tasks_total));
    manifest.add("run.tasks_run", std::to_string(result.tasks_run));
    manifest.add("run.tasks_resumed", std::to_string(result.tasks_resumed));
    manifest.add("run.elapsed_s", std::to_string(elapsed));
    {
        const auto now = std::chrono::system_clock::now();
        const std::time_t t = std::chrono::system_clock::to_time_t(now);
        char buf[64];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
        manifest.add("run.finished_utc", buf);
    }
    for (const auto& file : outputs) manifest.add_file(file, out_dir);
    manifest.write(out_dir / "manifest.txt");
    return result;
}

} // namespace rydion
