#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace entrosim {

enum class SweepModel { Ising, ToricStatic, ToricKmc, Bkt };

const char* sweep_model_name(SweepModel m);
SweepModel sweep_model_from_name(const std::string& name);

// One sweep = Cartesian product of per-parameter value lists, a trajectory
// (or sample) count per point, and a master seed. Per-job streams are keyed by
// the point's parameter values, so growing a grid never reseeds existing
// points.
struct SweepSpec {
    SweepModel model = SweepModel::Ising;
    std::map<std::string, std::vector<double>> grids;
    long trajectories = 1;
    double t_max = 1e7;  // toric-kmc censoring cap, units of 1/gamma0
    std::uint64_t master_seed = 0;
    std::string out;
    int workers = 0;  // 0: hardware concurrency

    void validate() const;
};

SweepSpec load_sweep_spec(const std::string& json_text);
SweepSpec load_sweep_spec_file(const std::string& path);
std::string sweep_spec_to_json(const SweepSpec& spec);

struct SweepRows {
    std::string header;
    std::vector<std::string> rows;  // canonical order, one CSV line each
    bool complete;                  // false when an interrupt stopped the run
};

// Runs all jobs (grid points x trajectories where applicable) and returns the
// rows in canonical order regardless of worker count or scheduling. Jobs with
// index < skip_jobs are not recomputed (resume support).
SweepRows compute_sweep_rows(const SweepSpec& spec, const std::atomic<bool>* interrupt = nullptr,
                             long skip_jobs = 0);

struct SweepOutcome {
    long rows_written;
    bool interrupted;
    std::string path;  // final file, or the .partial file when interrupted
};

// Writes spec.out atomically on success. On interruption flushes the finished
// prefix to out + ".partial" next to a out + ".resume.json" manifest; a later
// call with resume = true picks up from the manifest.
SweepOutcome run_sweep(const SweepSpec& spec, const std::atomic<bool>* interrupt = nullptr,
                       bool resume = false);

// Shortest-roundtrip decimal rendering used by the CSV writers, so that
// identical doubles always produce identical bytes.
std::string format_double(double v);

}  // namespace entrosim
