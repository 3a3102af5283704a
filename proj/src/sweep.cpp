#include "entrosim/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "entrosim/bkt.hpp"
#include "entrosim/ising.hpp"
#include "entrosim/rng.hpp"
#include "entrosim/toric_kmc.hpp"
#include "entrosim/toric_static.hpp"

namespace entrosim {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

const char* sweep_model_name(SweepModel m) {
    switch (m) {
        case SweepModel::Ising: return "ising";
        case SweepModel::ToricStatic: return "toric-static";
        case SweepModel::ToricKmc: return "toric-kmc";
        case SweepModel::Bkt: return "bkt";
    }
    return "ising";
}

SweepModel sweep_model_from_name(const std::string& name) {
    if (name == "ising") return SweepModel::Ising;
    if (name == "toric-static") return SweepModel::ToricStatic;
    if (name == "toric-kmc") return SweepModel::ToricKmc;
    if (name == "bkt") return SweepModel::Bkt;
    throw std::invalid_argument("unknown sweep model '" + name + "'");
}

namespace {

struct ModelLayout {
    std::vector<std::string> params;          // canonical order
    std::map<std::string, double> defaults;   // optional parameters
    bool per_trajectory_rows;
};

const ModelLayout& layout_for(SweepModel m) {
    static const ModelLayout ising{
        {"beta", "eps", "J", "M", "jprime"}, {{"jprime", 0.0}}, false};
    static const ModelLayout toric_static{
        {"beta", "eps", "J", "M", "L"}, {}, false};
    static const ModelLayout toric_kmc{
        {"beta", "eps", "J", "M", "L", "gamma0"}, {{"gamma0", 1.0}}, true};
    static const ModelLayout bkt{
        {"beta", "Jxy", "Ec", "M", "ystar"}, {{"ystar", 1.0}}, false};
    switch (m) {
        case SweepModel::Ising: return ising;
        case SweepModel::ToricStatic: return toric_static;
        case SweepModel::ToricKmc: return toric_kmc;
        case SweepModel::Bkt: return bkt;
    }
    return ising;
}

long positive_integer(double v, const std::string& name) {
    const long k = std::lround(v);
    if (static_cast<double>(k) != v || k < 1)
        throw std::invalid_argument(name + " must be a positive integer, got " + format_double(v));
    return k;
}

}  // namespace

void SweepSpec::validate() const {
    const auto& layout = layout_for(model);
    for (const auto& [name, values] : grids) {
        if (std::find(layout.params.begin(), layout.params.end(), name) == layout.params.end())
            throw std::invalid_argument(std::string("sweep: unknown parameter '") + name +
                                        "' for model " + sweep_model_name(model));
        if (values.empty())
            throw std::invalid_argument("sweep: empty grid for parameter '" + name + "'");
    }
    for (const auto& name : layout.params) {
        if (!grids.count(name) && !layout.defaults.count(name))
            throw std::invalid_argument("sweep: missing grid for parameter '" + name + "'");
    }
    if (trajectories < 1) throw std::invalid_argument("sweep: trajectories must be >= 1");
    if (!(t_max > 0.0)) throw std::invalid_argument("sweep: t_max must be positive");
    if (workers < 0) throw std::invalid_argument("sweep: workers must be >= 0");
}

SweepSpec load_sweep_spec(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("sweep config: ") + e.what());
    }
    SweepSpec spec;
    spec.model = sweep_model_from_name(j.at("model").get<std::string>());
    for (const auto& [key, value] : j.at("grids").items()) {
        std::vector<double> vals;
        if (value.is_array())
            vals = value.get<std::vector<double>>();
        else
            vals.push_back(value.get<double>());
        spec.grids[key] = std::move(vals);
    }
    spec.trajectories = j.value("trajectories", 1L);
    spec.t_max = j.value("t_max", 1e7);
    spec.master_seed = j.value("seed", 0ULL);
    spec.out = j.value("out", std::string{});
    spec.workers = j.value("workers", 0);
    spec.validate();
    return spec;
}

SweepSpec load_sweep_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open sweep config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_sweep_spec(ss.str());
}

std::string sweep_spec_to_json(const SweepSpec& spec) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["model"] = sweep_model_name(spec.model);
    j["grids"] = nlohmann::json::object();
    for (const auto& [k, v] : spec.grids) j["grids"][k] = v;
    j["trajectories"] = spec.trajectories;
    j["t_max"] = spec.t_max;
    j["seed"] = spec.master_seed;
    j["out"] = spec.out;
    j["workers"] = spec.workers;
    return j.dump(2);
}

namespace {

struct GridPoint {
    std::map<std::string, double> values;
    std::uint64_t key;  // value hash in canonical parameter order
    long index;
};

std::vector<GridPoint> enumerate_points(const SweepSpec& spec) {
    const auto& layout = layout_for(spec.model);
    std::vector<std::vector<double>> axes;
    for (const auto& name : layout.params) {
        auto it = spec.grids.find(name);
        if (it != spec.grids.end())
            axes.push_back(it->second);
        else
            axes.push_back({layout.defaults.at(name)});
    }
    std::vector<GridPoint> points;
    std::vector<std::size_t> idx(axes.size(), 0);
    long counter = 0;
    while (true) {
        GridPoint pt;
        std::vector<double> vals;
        for (std::size_t d = 0; d < axes.size(); ++d) {
            pt.values[layout.params[d]] = axes[d][idx[d]];
            vals.push_back(axes[d][idx[d]]);
        }
        pt.key = hash_doubles(vals.data(), vals.size());
        pt.index = counter++;
        points.push_back(std::move(pt));
        std::size_t d = axes.size();
        while (d > 0) {
            --d;
            if (++idx[d] < axes[d].size()) break;
            idx[d] = 0;
            if (d == 0) return points;
        }
    }
}

std::string csv_prefix(const GridPoint& pt, const std::vector<std::string>& params) {
    std::string s = std::to_string(pt.index);
    for (const auto& name : params) {
        s += ',';
        s += format_double(pt.values.at(name));
    }
    return s;
}

// validates one grid point by constructing the model parameters
void validate_point(const SweepSpec& spec, const GridPoint& pt) {
    const auto& v = pt.values;
    switch (spec.model) {
        case SweepModel::Ising: {
            ChainParams p{v.at("beta"), v.at("eps"), v.at("J"),
                          positive_integer(v.at("M"), "M"), v.at("jprime")};
            p.validate();
            break;
        }
        case SweepModel::ToricStatic:
        case SweepModel::ToricKmc: {
            ToricParams p{v.at("beta"), v.at("eps"), v.at("J"),
                          positive_integer(v.at("M"), "M"),
                          static_cast<int>(positive_integer(v.at("L"), "L")),
                          spec.model == SweepModel::ToricKmc ? v.at("gamma0") : 1.0};
            p.validate();
            break;
        }
        case SweepModel::Bkt: {
            BktParams p{v.at("beta"), v.at("Jxy"), v.at("Ec"),
                        positive_integer(v.at("M"), "M"), v.at("ystar"), 1.0};
            p.validate();
            break;
        }
    }
}

std::string header_for(const SweepSpec& spec) {
    const auto& layout = layout_for(spec.model);
    std::string h = "point";
    for (const auto& name : layout.params) h += "," + name;
    switch (spec.model) {
        case SweepModel::Ising: return h + ",inv_beta,xi,regime";
        case SweepModel::ToricStatic:
            return h +
                   ",samples,stabilizer_expectation,beta_eff,defect_density_analytic,"
                   "defect_density_conditional,defect_density_empirical";
        case SweepModel::ToricKmc:
            return h + ",trajectory,seed,failure_time,sector,class,censored,n_cr,n_dif,n_ann";
        case SweepModel::Bkt: return h + ",xi,nu_eff";
    }
    return h;
}

std::string run_job(const SweepSpec& spec, const GridPoint& pt, long traj) {
    const auto& layout = layout_for(spec.model);
    const auto& v = pt.values;
    std::string row = csv_prefix(pt, layout.params);
    switch (spec.model) {
        case SweepModel::Ising: {
            ChainParams p{v.at("beta"), v.at("eps"), v.at("J"),
                          positive_integer(v.at("M"), "M"), v.at("jprime")};
            ChainParams bare = p;
            bare.Jprime = 0.0;
            row += ',' + format_double(1.0 / p.beta);
            row += ',' + format_double(correlation_length(p));
            row += ',';
            row += regime_name(classify_regime(bare).regime);
            break;
        }
        case SweepModel::ToricStatic: {
            ToricParams p{v.at("beta"), v.at("eps"), v.at("J"),
                          positive_integer(v.at("M"), "M"),
                          static_cast<int>(positive_integer(v.at("L"), "L")), 1.0};
            Rng rng(stream_seed(spec.master_seed, pt.key, 0));
            const long n_sites = 2L * p.L * p.L;
            long defects = 0;
            for (long s = 0; s < spec.trajectories; ++s) {
                const auto sample = sample_stabilizers(p, rng);
                for (const auto e : sample.plaquette) defects += e < 0;
                for (const auto e : sample.vertex) defects += e < 0;
            }
            const double q = defect_probability(p);
            row += ',' + std::to_string(spec.trajectories);
            row += ',' + format_double(stabilizer_expectation(p));
            row += ',' + format_double(beta_eff(p));
            row += ',' + format_double(q);
            row += ',' + format_double(conditional_defect_marginal(q, p.L * p.L));
            row += ',' + format_double(static_cast<double>(defects) /
                                       (static_cast<double>(n_sites) *
                                        static_cast<double>(spec.trajectories)));
            break;
        }
        case SweepModel::ToricKmc: {
            ToricParams p{v.at("beta"), v.at("eps"), v.at("J"),
                          positive_integer(v.at("M"), "M"),
                          static_cast<int>(positive_integer(v.at("L"), "L")), v.at("gamma0")};
            const std::uint64_t seed =
                stream_seed(spec.master_seed, pt.key, static_cast<std::uint64_t>(traj));
            const auto out = run_trajectory(p, seed, spec.t_max);
            row += ',' + std::to_string(traj);
            row += ',' + std::to_string(seed);
            row += ',' + format_double(out.failure_time);
            row += ',';
            row += out.censored ? "-" : (out.failure_sector == Sector::X ? "X" : "Z");
            row += ',';
            row += out.censored ? "--"
                                : (std::string() + ((out.homology_class & 1) ? '1' : '0') +
                                   ((out.homology_class & 2) ? '1' : '0'));
            row += ',' + std::to_string(out.censored ? 1 : 0);
            row += ',' + std::to_string(out.n_creation);
            row += ',' + std::to_string(out.n_diffusion);
            row += ',' + std::to_string(out.n_annihilation);
            break;
        }
        case SweepModel::Bkt: {
            BktParams p{v.at("beta"), v.at("Jxy"), v.at("Ec"),
                        positive_integer(v.at("M"), "M"), v.at("ystar"), 1.0};
            const auto xi = bkt_correlation_length(p);
            row += ',';
            row += xi ? format_double(*xi) : "inf";
            row += ',';
            row += p.K0() < 2.0 / std::numbers::pi ? format_double(nu_eff(p.K0())) : "nan";
            break;
        }
    }
    return row;
}

}  // namespace

SweepRows compute_sweep_rows(const SweepSpec& spec, const std::atomic<bool>* interrupt,
                             long skip_jobs) {
    spec.validate();
    const auto points = enumerate_points(spec);

    std::string point_errors;
    for (const auto& pt : points) {
        try {
            validate_point(spec, pt);
        } catch (const std::exception& e) {
            point_errors += "point " + std::to_string(pt.index) + ": " + e.what() + "; ";
        }
    }
    if (!point_errors.empty())
        throw std::invalid_argument("sweep: invalid grid points: " + point_errors);

    const bool per_traj = layout_for(spec.model).per_trajectory_rows;
    const long jobs_per_point = per_traj ? spec.trajectories : 1;
    const long total_jobs = static_cast<long>(points.size()) * jobs_per_point;
    if (skip_jobs < 0 || skip_jobs > total_jobs)
        throw std::invalid_argument("sweep: bad resume offset");

    SweepRows out;
    out.header = header_for(spec);
    out.rows.assign(static_cast<std::size_t>(total_jobs), {});
    std::vector<std::uint8_t> done(static_cast<std::size_t>(total_jobs), 0);

    std::atomic<long> cursor{skip_jobs};
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex error_mu;

    auto worker = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            if (interrupt && interrupt->load(std::memory_order_relaxed)) return;
            const long job = cursor.fetch_add(1, std::memory_order_relaxed);
            if (job >= total_jobs) return;
            const auto& pt = points[static_cast<std::size_t>(job / jobs_per_point)];
            const long traj = job % jobs_per_point;
            try {
                out.rows[static_cast<std::size_t>(job)] = run_job(spec, pt, traj);
                done[static_cast<std::size_t>(job)] = 1;
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!failed.exchange(true)) first_error = e.what();
                return;
            }
        }
    };

    int n_workers = spec.workers > 0
                        ? spec.workers
                        : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    n_workers = static_cast<int>(
        std::min<long>(n_workers, std::max<long>(1, total_jobs - skip_jobs)));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failed.load()) throw std::runtime_error("sweep job failed: " + first_error);

    out.complete = true;
    for (long j = skip_jobs; j < total_jobs; ++j) {
        if (!done[static_cast<std::size_t>(j)]) {
            out.rows.resize(static_cast<std::size_t>(j));
            out.complete = false;
            break;
        }
    }
    return out;
}

SweepOutcome run_sweep(const SweepSpec& spec, const std::atomic<bool>* interrupt, bool resume) {
    spec.validate();
    if (spec.out.empty()) throw std::invalid_argument("run_sweep: spec.out is required");
    const std::string partial_path = spec.out + ".partial";
    const std::string manifest_path = spec.out + ".resume.json";

    long skip = 0;
    std::vector<std::string> prefix_rows;
    if (resume) {
        std::ifstream manifest(manifest_path);
        if (manifest) {
            nlohmann::json j;
            manifest >> j;
            // a manifest written for a different spec must not donate rows;
            // the worker count is scheduling only and may differ
            auto current = nlohmann::json::parse(sweep_spec_to_json(spec));
            auto recorded = j.value("spec", nlohmann::json::object());
            current.erase("workers");
            recorded.erase("workers");
            if (recorded == current) skip = j.value("completed_jobs", 0L);
            std::ifstream partial(partial_path);
            std::string line;
            bool first = true;
            while (partial && std::getline(partial, line)) {
                if (first) {  // header line
                    first = false;
                    continue;
                }
                if (!line.empty()) prefix_rows.push_back(line);
            }
            if (static_cast<long>(prefix_rows.size()) != skip) {
                skip = 0;  // stale or truncated partial: recompute everything
                prefix_rows.clear();
            }
        }
    }

    auto rows = compute_sweep_rows(spec, interrupt, skip);
    for (long j = 0; j < skip; ++j)
        rows.rows[static_cast<std::size_t>(j)] = prefix_rows[static_cast<std::size_t>(j)];

    if (!rows.complete) {
        std::ofstream partial(partial_path, std::ios::trunc);
        partial << rows.header << '\n';
        for (const auto& r : rows.rows) partial << r << '\n';
        partial.close();
        nlohmann::json manifest;
        manifest["schema_version"] = 1;
        manifest["completed_jobs"] = static_cast<long>(rows.rows.size());
        manifest["spec"] = nlohmann::json::parse(sweep_spec_to_json(spec));
        std::ofstream mf(manifest_path, std::ios::trunc);
        mf << manifest.dump(2) << '\n';
        return {static_cast<long>(rows.rows.size()), true, partial_path};
    }

    const std::string tmp = spec.out + ".tmp";
    {
        std::ofstream f(tmp, std::ios::trunc);
        if (!f) throw std::runtime_error("run_sweep: cannot write '" + tmp + "'");
        f << rows.header << '\n';
        for (const auto& r : rows.rows) f << r << '\n';
    }
    if (std::rename(tmp.c_str(), spec.out.c_str()) != 0)
        throw std::runtime_error("run_sweep: cannot move output into place");
    std::remove(partial_path.c_str());
    std::remove(manifest_path.c_str());
    return {static_cast<long>(rows.rows.size()), false, spec.out};
}

}  // namespace entrosim
