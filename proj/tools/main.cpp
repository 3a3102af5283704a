// entrosim command line: exact chain solutions, toric-code Gibbs observables,
// kinetic Monte Carlo lifetimes, BKT flow integration, and reproducible sweeps.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "entrosim/bkt.hpp"
#include "entrosim/ising.hpp"
#include "entrosim/rng.hpp"
#include "entrosim/stats.hpp"
#include "entrosim/sweep.hpp"
#include "entrosim/toric_kmc.hpp"
#include "entrosim/toric_static.hpp"

namespace {

std::atomic<bool> g_interrupted{false};

void handle_sigint(int) { g_interrupted.store(true); }

std::vector<double> log_grid(double lo, double hi, int points) {
    if (!(lo > 0.0) || !(hi > lo) || points < 2)
        throw std::invalid_argument("grid: need 0 < min < max and points >= 2");
    std::vector<double> g(static_cast<std::size_t>(points));
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < points; ++i)
        g[static_cast<std::size_t>(i)] =
            std::exp(llo + (lhi - llo) * static_cast<double>(i) / (points - 1));
    g.front() = lo;  // endpoints exact, free of exp/log rounding
    g.back() = hi;
    return g;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open output file '" + path + "'");
    return f;
}

std::uint64_t kmc_point_key(const entrosim::ToricParams& p) {
    const double vals[6] = {p.beta, p.eps,
                            p.J,    static_cast<double>(p.M),
                            static_cast<double>(p.L), p.gamma0};
    return entrosim::hash_doubles(vals, 6);
}

nlohmann::json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    nlohmann::json j;
    in >> j;
    return j;
}

void add_ising_scan(CLI::App& app, const std::string& config, std::uint64_t&, int&,
                    std::string& out) {
    auto* cmd = app.add_subcommand("ising-scan", "correlation length over a temperature grid");
    auto beta_min = std::make_shared<double>(1e-3);
    auto beta_max = std::make_shared<double>(1e3);
    auto points = std::make_shared<int>(200);
    auto eps = std::make_shared<double>(1e-3);
    auto J = std::make_shared<double>(50.0);
    auto M = std::make_shared<long>(50);
    auto jprime = std::make_shared<double>(0.0);
    cmd->add_option("--beta-min", *beta_min);
    cmd->add_option("--beta-max", *beta_max);
    cmd->add_option("--points", *points);
    cmd->add_option("--eps", *eps);
    cmd->add_option("--J", *J);
    cmd->add_option("--M", *M);
    cmd->add_option("--jprime", *jprime);
    cmd->callback([&, beta_min, beta_max, points, eps, J, M, jprime] {
        if (!config.empty()) {
            const auto j = load_config(config);
            *beta_min = j.value("beta_min", *beta_min);
            *beta_max = j.value("beta_max", *beta_max);
            *points = j.value("points", *points);
            *eps = j.value("eps", *eps);
            *J = j.value("J", *J);
            *M = j.value("M", *M);
            *jprime = j.value("jprime", *jprime);
        }
        entrosim::ChainParams p{1.0, *eps, *J, *M, *jprime};
        const auto rows = entrosim::xi_scan(p, log_grid(*beta_min, *beta_max, *points));
        auto f = open_out(out.empty() ? "ising_scan.csv" : out);
        f << "inv_beta,xi,regime\n";
        for (const auto& r : rows)
            f << entrosim::format_double(r.inv_beta) << ',' << entrosim::format_double(r.xi)
              << ',' << entrosim::regime_name(r.regime) << '\n';
    });
}

void add_toric_static(CLI::App& app, const std::string& config, std::uint64_t& seed, int&,
                      std::string& out) {
    auto* cmd = app.add_subcommand("toric-static", "Gibbs observables and constrained sampling");
    auto beta = std::make_shared<double>(1.0);
    auto eps = std::make_shared<double>(1e-3);
    auto J = std::make_shared<double>(50.0);
    auto M = std::make_shared<long>(50);
    auto L = std::make_shared<int>(8);
    auto samples = std::make_shared<long>(10000);
    cmd->add_option("--beta", *beta);
    cmd->add_option("--eps", *eps);
    cmd->add_option("--J", *J);
    cmd->add_option("--M", *M);
    cmd->add_option("--L", *L);
    cmd->add_option("--samples", *samples);
    cmd->callback([&, beta, eps, J, M, L, samples] {
        if (!config.empty()) {
            const auto j = load_config(config);
            *beta = j.value("beta", *beta);
            *eps = j.value("eps", *eps);
            *J = j.value("J", *J);
            *M = j.value("M", *M);
            *L = j.value("L", *L);
            *samples = j.value("samples", *samples);
        }
        entrosim::ToricParams p{*beta, *eps, *J, *M, *L, 1.0};
        p.validate();
        entrosim::Rng rng(entrosim::stream_seed(seed, kmc_point_key(p), 0));
        long defects = 0;
        for (long s = 0; s < *samples; ++s) {
            const auto sample = entrosim::sample_stabilizers(p, rng);
            for (const auto e : sample.plaquette) defects += e < 0;
            for (const auto e : sample.vertex) defects += e < 0;
        }
        const double q = entrosim::defect_probability(p);
        nlohmann::json j;
        j["schema_version"] = 1;
        j["params"] = {{"beta", *beta}, {"eps", *eps}, {"J", *J},
                       {"M", *M},       {"L", *L},     {"samples", *samples},
                       {"seed", seed}};
        j["stabilizer_expectation"] = entrosim::stabilizer_expectation(p);
        j["beta_eff"] = entrosim::beta_eff(p);
        j["defect_density_analytic"] = q;
        j["defect_density_conditional"] =
            entrosim::conditional_defect_marginal(q, static_cast<long>(*L) * *L);
        j["defect_density_empirical"] =
            static_cast<double>(defects) /
            (2.0 * static_cast<double>(*L) * *L * static_cast<double>(*samples));
        auto table = nlohmann::json::array();
        const long full = static_cast<long>(*L) * *L;
        for (long area = 0; area < full; area = area == 0 ? 1 : area * 2)
            table.push_back({{"area", area}, {"value", entrosim::wilson_loop(p, area)}});
        table.push_back({{"area", full}, {"value", entrosim::wilson_loop(p, full)}});
        j["wilson_loop_table"] = table;
        auto f = open_out(out.empty() ? "toric_static.json" : out);
        f << j.dump(2) << '\n';
    });
}

void add_toric_kmc(CLI::App& app, const std::string& config, std::uint64_t& seed, int& workers,
                   std::string& out) {
    auto* cmd = app.add_subcommand("toric-kmc", "logical-failure trajectories");
    auto beta = std::make_shared<double>(1.0);
    auto eps = std::make_shared<double>(1e-3);
    auto J = std::make_shared<double>(50.0);
    auto M = std::make_shared<long>(16);
    auto L = std::make_shared<int>(4);
    auto gamma0 = std::make_shared<double>(1.0);
    auto trajectories = std::make_shared<long>(100);
    auto t_max = std::make_shared<double>(1e7);
    cmd->add_option("--beta", *beta);
    cmd->add_option("--eps", *eps);
    cmd->add_option("--J", *J);
    cmd->add_option("--M", *M);
    cmd->add_option("--L", *L);
    cmd->add_option("--gamma0", *gamma0);
    cmd->add_option("--trajectories", *trajectories);
    cmd->add_option("--t-max", *t_max);
    cmd->callback([&, beta, eps, J, M, L, gamma0, trajectories, t_max] {
        if (!config.empty()) {
            const auto j = load_config(config);
            *beta = j.value("beta", *beta);
            *eps = j.value("eps", *eps);
            *J = j.value("J", *J);
            *M = j.value("M", *M);
            *L = j.value("L", *L);
            *gamma0 = j.value("gamma0", *gamma0);
            *trajectories = j.value("trajectories", *trajectories);
            *t_max = j.value("t_max", *t_max);
        }
        entrosim::ToricParams p{*beta, *eps, *J, *M, *L, *gamma0};
        p.validate();
        const entrosim::TorusLattice lat(p.L);
        const auto rates = entrosim::rate_table(p);
        const std::uint64_t key = kmc_point_key(p);

        std::vector<entrosim::TrajectoryOutcome> results(
            static_cast<std::size_t>(*trajectories));
        std::atomic<long> cursor{0};
        auto body = [&] {
            while (true) {
                const long t = cursor.fetch_add(1);
                if (t >= *trajectories || g_interrupted.load()) return;
                results[static_cast<std::size_t>(t)] = entrosim::run_trajectory(
                    lat, rates, entrosim::stream_seed(seed, key, static_cast<std::uint64_t>(t)),
                    *t_max);
            }
        };
        int n_workers = workers > 0 ? workers
                                    : static_cast<int>(std::max(
                                          1u, std::thread::hardware_concurrency()));
        std::vector<std::thread> pool;
        for (int w = 1; w < n_workers; ++w) pool.emplace_back(body);
        body();
        for (auto& th : pool) th.join();

        auto f = open_out(out.empty() ? "toric_kmc.csv" : out);
        f << "seed,failure_time,sector,class,censored,n_cr,n_dif,n_ann\n";
        for (const auto& r : results) {
            f << r.seed << ',' << entrosim::format_double(r.failure_time) << ',';
            f << (r.censored ? "-" : (r.failure_sector == entrosim::Sector::X ? "X" : "Z"));
            f << ',';
            if (r.censored)
                f << "--";
            else
                f << ((r.homology_class & 1) ? '1' : '0')
                  << ((r.homology_class & 2) ? '1' : '0');
            f << ',' << (r.censored ? 1 : 0) << ',' << r.n_creation << ',' << r.n_diffusion
              << ',' << r.n_annihilation << '\n';
        }
    });
}

void add_toric_scaling(CLI::App& app, const std::string& config, std::uint64_t& seed, int& workers,
                       std::string& out) {
    auto* cmd = app.add_subcommand("toric-scaling", "lifetime scaling report over (L, M) grids");
    cmd->callback([&] {
        if (config.empty()) throw std::runtime_error("toric-scaling requires --config FILE");
        const auto j = load_config(config);
        entrosim::ToricParams p{j.value("beta", 1.0), j.value("eps", 1e-3), j.value("J", 50.0),
                                1,  // overwritten per grid point
                                2, j.value("gamma0", 1.0)};
        const auto L_grid = j.at("L_grid").get<std::vector<int>>();
        const auto M_grid = j.at("M_grid").get<std::vector<long>>();
        const long traj = j.value("trajectories", 200L);
        const double t_max = j.value("t_max", 1e7);
        const std::uint64_t run_seed = j.contains("seed") ? j["seed"].get<std::uint64_t>() : seed;

        const auto rep =
            entrosim::lifetime_scaling_suite(p, L_grid, M_grid, traj, t_max, run_seed, workers);

        nlohmann::json r;
        r["schema_version"] = 1;
        r["params"] = {{"beta", p.beta}, {"eps", p.eps},   {"J", p.J},
                       {"gamma0", p.gamma0}, {"L_grid", L_grid}, {"M_grid", M_grid},
                       {"trajectories", rep.trajectories}, {"t_max", rep.t_max},
                       {"seed", rep.seed}};
        auto points = nlohmann::json::array();
        for (const auto& pt : rep.points)
            points.push_back({{"L", pt.L},
                              {"M", pt.M},
                              {"mean", pt.mean},
                              {"ci", {pt.ci_lo, pt.ci_hi}},
                              {"trajectories", pt.n_trajectories},
                              {"censored", pt.n_censored},
                              {"expected_defects", pt.expected_defects},
                              {"regime", pt.regime}});
        r["points"] = points;
        auto dump_fits = [](const auto& fits) {
            auto arr = nlohmann::json::array();
            for (const auto& [fixed, fit] : fits)
                arr.push_back({{"fixed", fixed},
                               {"exponent", fit.exponent},
                               {"ci", {fit.ci_lo, fit.ci_hi}},
                               {"reliable", fit.reliable}});
            return arr;
        };
        r["alpha_M"] = dump_fits(rep.alpha_M);
        r["alpha_L"] = dump_fits(rep.alpha_L);
        auto f = open_out(out.empty() ? "toric_scaling.json" : out);
        f << r.dump(2) << '\n';
    });
}

void add_bkt_flow(CLI::App& app, const std::string& config, std::uint64_t&, int&,
                  std::string& out) {
    auto* cmd = app.add_subcommand("bkt-flow", "integrate the stiffness/fugacity flow");
    auto beta = std::make_shared<double>(0.8);
    auto J = std::make_shared<double>(1.0);
    auto Ec = std::make_shared<double>(3.0);
    auto M = std::make_shared<long>(1);
    auto ystar = std::make_shared<double>(1.0);
    auto lmax = std::make_shared<double>(40.0);
    cmd->add_option("--beta", *beta);
    cmd->add_option("--J", *J);
    cmd->add_option("--Ec", *Ec);
    cmd->add_option("--M", *M);
    cmd->add_option("--ystar", *ystar);
    cmd->add_option("--lmax", *lmax);
    cmd->callback([&, beta, J, Ec, M, ystar, lmax] {
        if (!config.empty()) {
            const auto j = load_config(config);
            *beta = j.value("beta", *beta);
            *J = j.value("J", *J);
            *Ec = j.value("Ec", *Ec);
            *M = j.value("M", *M);
            *ystar = j.value("ystar", *ystar);
            *lmax = j.value("lmax", *lmax);
        }
        entrosim::BktParams p{*beta, *J, *Ec, *M, *ystar, 1.0};
        const auto traj = entrosim::integrate_flow(p, *lmax);
        auto f = open_out(out.empty() ? "bkt_flow.csv" : out);
        f << "l,K,y\n";
        for (const auto& pt : traj.points)
            f << entrosim::format_double(pt.l) << ',' << entrosim::format_double(pt.K) << ','
              << entrosim::format_double(pt.y) << '\n';
    });
}

void add_bkt_xi(CLI::App& app, const std::string& config, std::uint64_t&, int&,
                std::string& out) {
    auto* cmd = app.add_subcommand("bkt-xi", "correlation length over a (beta, M) grid");
    auto beta_min = std::make_shared<double>(0.1);
    auto beta_max = std::make_shared<double>(0.6);
    auto points = std::make_shared<int>(20);
    auto J = std::make_shared<double>(1.0);
    auto Ec = std::make_shared<double>(3.0);
    auto Ms = std::make_shared<std::vector<long>>(std::vector<long>{1});
    auto ystar = std::make_shared<double>(1.0);
    auto lmax = std::make_shared<double>(80.0);
    cmd->add_option("--beta-min", *beta_min);
    cmd->add_option("--beta-max", *beta_max);
    cmd->add_option("--points", *points);
    cmd->add_option("--J", *J);
    cmd->add_option("--Ec", *Ec);
    cmd->add_option("--M", *Ms);
    cmd->add_option("--ystar", *ystar);
    cmd->add_option("--lmax", *lmax);
    cmd->callback([&, beta_min, beta_max, points, J, Ec, Ms, ystar, lmax] {
        if (!config.empty()) {
            const auto j = load_config(config);
            *beta_min = j.value("beta_min", *beta_min);
            *beta_max = j.value("beta_max", *beta_max);
            *points = j.value("points", *points);
            *J = j.value("J", *J);
            *Ec = j.value("Ec", *Ec);
            if (j.contains("M")) *Ms = j["M"].get<std::vector<long>>();
            *ystar = j.value("ystar", *ystar);
            *lmax = j.value("lmax", *lmax);
        }
        auto f = open_out(out.empty() ? "bkt_xi.csv" : out);
        f << "beta,M,xi,nu_eff\n";
        for (const double beta : log_grid(*beta_min, *beta_max, *points)) {
            for (const long M : *Ms) {
                entrosim::BktParams p{beta, *J, *Ec, M, *ystar, 1.0};
                const auto xi = entrosim::bkt_correlation_length(p, *lmax);
                f << entrosim::format_double(beta) << ',' << M << ','
                  << (xi ? entrosim::format_double(*xi) : "inf") << ',';
                if (p.K0() < 2.0 / 3.141592653589793)
                    f << entrosim::format_double(entrosim::nu_eff(p.K0()));
                else
                    f << "nan";
                f << '\n';
            }
        }
    });
}

void add_bkt_crossover(CLI::App& app, const std::string& config, std::uint64_t&, int&,
                       std::string& out) {
    auto* cmd = app.add_subcommand("bkt-crossover", "finite-size coherence crossover scale");
    auto L = std::make_shared<double>(100.0);
    auto M = std::make_shared<long>(1);
    auto J = std::make_shared<double>(1.0);
    auto Ec = std::make_shared<double>(3.0);
    auto ystar = std::make_shared<double>(1.0);
    auto b_fit = std::make_shared<double>(0.0);
    auto has_b = std::make_shared<bool>(false);
    cmd->add_option("--L", *L);
    cmd->add_option("--M", *M);
    cmd->add_option("--J", *J);
    cmd->add_option("--Ec", *Ec);
    cmd->add_option("--ystar", *ystar);
    auto* bopt = cmd->add_option("--b-fit", *b_fit, "use this coherence amplitude instead of fitting");
    cmd->callback([&, L, M, J, Ec, ystar, b_fit, has_b, bopt] {
        if (!config.empty()) {
            const auto j = load_config(config);
            *L = j.value("L", *L);
            *M = j.value("M", *M);
            *J = j.value("J", *J);
            *Ec = j.value("Ec", *Ec);
            *ystar = j.value("ystar", *ystar);
            if (j.contains("b_fit")) {
                *b_fit = j["b_fit"].get<double>();
                *has_b = true;
            }
        }
        if (bopt->count() > 0) *has_b = true;
        entrosim::BktParams p{0.3, *J, *Ec, *M, *ystar, 1.0};
        const auto res = entrosim::crossover_beta(
            p, *L, *has_b ? std::optional<double>(*b_fit) : std::nullopt);
        nlohmann::json j;
        j["schema_version"] = 1;
        j["params"] = {{"L", *L}, {"M", *M}, {"Jxy", *J}, {"Ec", *Ec}, {"ystar", *ystar}};
        j["beta_bkt"] = res.beta_bkt;
        j["beta_c_numeric"] = res.beta_c;
        j["beta_c_closed_form"] = res.beta_c_estimate;
        j["b"] = res.b;
        j["nu_eff_at_c"] = res.nu_at_c;
        j["b_implied"] = res.b_implied;
        auto f = open_out(out.empty() ? "bkt_crossover.json" : out);
        f << j.dump(2) << '\n';
    });
}

void add_sweep(CLI::App& app, const std::string& config, std::uint64_t& seed, int& workers,
               std::string& out) {
    auto* cmd = app.add_subcommand("sweep", "run a parameter sweep from a config file");
    auto resume = std::make_shared<bool>(false);
    auto seed_opt = std::make_shared<bool>(false);
    cmd->add_flag("--resume", *resume, "continue from a .resume.json manifest");
    cmd->callback([&, resume, seed_opt] {
        if (config.empty()) throw std::runtime_error("sweep requires --config FILE");
        auto spec = entrosim::load_sweep_spec_file(config);
        if (*seed_opt) spec.master_seed = seed;
        if (workers > 0) spec.workers = workers;
        if (!out.empty()) spec.out = out;
        if (spec.out.empty()) throw std::runtime_error("sweep: no output path (config or --out)");
        const auto outcome = entrosim::run_sweep(spec, &g_interrupted, *resume);
        std::cout << (outcome.interrupted ? "interrupted, partial rows: " : "rows: ")
                  << outcome.rows_written << " -> " << outcome.path << '\n';
        if (outcome.interrupted) throw std::runtime_error("sweep interrupted");
    });
    // --seed provided at top level; remember whether the user set it
    app.get_option("--seed")->each([seed_opt](const std::string&) { *seed_opt = true; });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"entropic-reservoir defect simulations"};
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed = 0;
    int workers = 0;
    std::string out;
    std::string config;
    app.add_option("--seed", seed, "master seed");
    app.add_option("--workers", workers, "worker threads (0 = hardware)");
    app.add_option("--out", out, "output file");
    app.add_option("--config", config, "JSON config file");

    add_ising_scan(app, config, seed, workers, out);
    add_toric_static(app, config, seed, workers, out);
    add_toric_kmc(app, config, seed, workers, out);
    add_toric_scaling(app, config, seed, workers, out);
    add_bkt_flow(app, config, seed, workers, out);
    add_bkt_xi(app, config, seed, workers, out);
    add_bkt_crossover(app, config, seed, workers, out);
    add_sweep(app, config, seed, workers, out);

    std::signal(SIGINT, handle_sigint);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        nlohmann::json err;
        err["error"] = {{"type", "usage"}, {"message", e.what()}};
        std::cerr << err.dump() << '\n';
        return 2;
    } catch (const std::exception& e) {
        nlohmann::json err;
        err["error"] = {{"type", "runtime"}, {"message", e.what()}};
        std::cerr << err.dump() << '\n';
        return 1;
    }
    return 0;
}
