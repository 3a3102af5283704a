#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "entrosim/bkt.hpp"
#include "entrosim/ising.hpp"
#include "entrosim/lattice.hpp"
#include "entrosim/rng.hpp"
#include "entrosim/stats.hpp"
#include "entrosim/toric_kmc.hpp"
#include "entrosim/toric_static.hpp"

namespace py = pybind11;
using namespace entrosim;

PYBIND11_MODULE(_core, m) {
    m.doc() = "entropic-reservoir defect simulations: exact chain solutions, toric-code "
              "Gibbs observables and kinetic Monte Carlo, BKT flow integration";

    py::enum_<Sector>(m, "Sector").value("X", Sector::X).value("Z", Sector::Z);

    py::class_<TorusLattice>(m, "TorusLattice")
        .def(py::init<int>(), py::arg("L"))
        .def_property_readonly("L", &TorusLattice::size)
        .def_property_readonly("links", &TorusLattice::links)
        .def_property_readonly("plaquettes", &TorusLattice::plaquettes)
        .def_property_readonly("vertices", &TorusLattice::vertices)
        .def("link_id", &TorusLattice::link_id, py::arg("x"), py::arg("y"), py::arg("dir"))
        .def("plaquettes_of_link", &TorusLattice::plaquettes_of_link)
        .def("vertices_of_link", &TorusLattice::vertices_of_link)
        .def("links_of_plaquette", &TorusLattice::links_of_plaquette)
        .def("links_of_vertex", &TorusLattice::links_of_vertex)
        .def("crosses_cut", &TorusLattice::crosses_cut, py::arg("sector"), py::arg("link"),
             py::arg("axis"));

    py::class_<ChainParams>(m, "ChainParams")
        .def(py::init<double, double, double, long, double>(), py::arg("beta"), py::arg("eps"),
             py::arg("J"), py::arg("M"), py::arg("Jprime") = 0.0)
        .def_readwrite("beta", &ChainParams::beta)
        .def_readwrite("eps", &ChainParams::eps)
        .def_readwrite("J", &ChainParams::J)
        .def_readwrite("M", &ChainParams::M)
        .def_readwrite("Jprime", &ChainParams::Jprime);

    py::class_<BathWeights>(m, "BathWeights")
        .def_readonly("w_plus", &BathWeights::w_plus)
        .def_readonly("w_minus", &BathWeights::w_minus);

    py::enum_<Regime>(m, "Regime")
        .value("InverseMelting", Regime::InverseMelting)
        .value("SaturatedPlateau", Regime::SaturatedPlateau)
        .value("Breakdown", Regime::Breakdown)
        .value("Unclassified", Regime::Unclassified);

    py::class_<RegimeLabel>(m, "RegimeLabel")
        .def_readonly("regime", &RegimeLabel::regime)
        .def_readonly("beta_eps", &RegimeLabel::beta_eps)
        .def_readonly("beta_eps_M", &RegimeLabel::beta_eps_M)
        .def_readonly("beta_J", &RegimeLabel::beta_J);

    m.def("bath_weights", &bath_weights);
    m.def("lambda_ratio", &lambda_ratio);
    m.def("log_lambda_ratio", &log_lambda_ratio);
    m.def("correlation_length", py::overload_cast<const ChainParams&>(&correlation_length));
    m.def("finite_chain_correlator", &finite_chain_correlator, py::arg("params"), py::arg("L"),
          py::arg("r"));
    m.def("brute_force_correlator", &brute_force_correlator, py::arg("params"), py::arg("L"),
          py::arg("r"));
    m.def("classify_regime", &classify_regime);
    m.def(
        "xi_scan",
        [](const ChainParams& p, const std::vector<double>& grid) {
            std::vector<std::tuple<double, double, Regime>> rows;
            for (const auto& r : xi_scan(p, grid)) rows.emplace_back(r.inv_beta, r.xi, r.regime);
            return rows;
        },
        py::arg("params"), py::arg("beta_grid"));

    py::class_<ToricParams>(m, "ToricParams")
        .def(py::init<double, double, double, long, int, double>(), py::arg("beta"),
             py::arg("eps"), py::arg("J"), py::arg("M"), py::arg("L"), py::arg("gamma0") = 1.0)
        .def_readwrite("beta", &ToricParams::beta)
        .def_readwrite("eps", &ToricParams::eps)
        .def_readwrite("J", &ToricParams::J)
        .def_readwrite("M", &ToricParams::M)
        .def_readwrite("L", &ToricParams::L)
        .def_readwrite("gamma0", &ToricParams::gamma0);

    m.def("stabilizer_expectation", &stabilizer_expectation);
    m.def("wilson_loop", &wilson_loop, py::arg("params"), py::arg("area"));
    m.def("beta_eff", &beta_eff);
    m.def("bath_threshold", [](long N) {
        const auto t = bath_threshold(N);
        return py::make_tuple(t.M_required, t.m_qubits);
    });
    m.def("defect_probability", &defect_probability);
    m.def("conditional_defect_marginal", &conditional_defect_marginal, py::arg("q"), py::arg("N"));
    m.def(
        "sample_stabilizers",
        [](const ToricParams& p, std::uint64_t seed) {
            Rng rng(seed);
            const auto s = sample_stabilizers(p, rng);
            return py::make_tuple(s.plaquette, s.vertex);
        },
        py::arg("params"), py::arg("seed"));

    py::class_<RateTable>(m, "RateTable")
        .def_readonly("creation", &RateTable::creation)
        .def_readonly("diffusion", &RateTable::diffusion)
        .def_readonly("annihilation", &RateTable::annihilation);

    py::enum_<SectorMode>(m, "SectorMode")
        .value("Both", SectorMode::Both)
        .value("XOnly", SectorMode::XOnly)
        .value("ZOnly", SectorMode::ZOnly);

    py::class_<TrajectoryOutcome>(m, "TrajectoryOutcome")
        .def_readonly("failure_time", &TrajectoryOutcome::failure_time)
        .def_readonly("failure_sector", &TrajectoryOutcome::failure_sector)
        .def_readonly("homology_class", &TrajectoryOutcome::homology_class)
        .def_readonly("n_creation", &TrajectoryOutcome::n_creation)
        .def_readonly("n_diffusion", &TrajectoryOutcome::n_diffusion)
        .def_readonly("n_annihilation", &TrajectoryOutcome::n_annihilation)
        .def_readonly("seed", &TrajectoryOutcome::seed)
        .def_readonly("censored", &TrajectoryOutcome::censored);

    m.def("rate_table", &rate_table, py::arg("params"), py::arg("exact_annihilation") = false);
    m.def("run_trajectory",
          py::overload_cast<const ToricParams&, std::uint64_t, double, SectorMode>(
              &run_trajectory),
          py::arg("params"), py::arg("seed"), py::arg("t_max"),
          py::arg("mode") = SectorMode::Both,
          py::call_guard<py::gil_scoped_release>());
    m.def("exact_lifetime_small", &exact_lifetime_small,
          py::call_guard<py::gil_scoped_release>());
    m.def("steady_state_density", &steady_state_density, py::arg("params"), py::arg("seed"),
          py::arg("t_burn"), py::arg("t_meas"), py::call_guard<py::gil_scoped_release>());
    m.def("stream_seed", &stream_seed, py::arg("master"), py::arg("a"), py::arg("b") = 0);

    py::class_<BktParams>(m, "BktParams")
        .def(py::init<double, double, double, long, double, double>(), py::arg("beta"),
             py::arg("Jxy"), py::arg("E_c"), py::arg("M"), py::arg("y_star") = 1.0,
             py::arg("a") = 1.0)
        .def_readwrite("beta", &BktParams::beta)
        .def_readwrite("Jxy", &BktParams::Jxy)
        .def_readwrite("E_c", &BktParams::E_c)
        .def_readwrite("M", &BktParams::M)
        .def_readwrite("y_star", &BktParams::y_star)
        .def("K0", &BktParams::K0)
        .def("y0", &BktParams::y0)
        .def("y_eff", &BktParams::y_eff);

    py::enum_<FlowTermination>(m, "FlowTermination")
        .value("Proliferated", FlowTermination::Proliferated)
        .value("ReachedLMax", FlowTermination::ReachedLMax)
        .value("StepUnderflow", FlowTermination::StepUnderflow);

    py::class_<RgTrajectory>(m, "RgTrajectory")
        .def_property_readonly("points",
                               [](const RgTrajectory& t) {
                                   std::vector<std::tuple<double, double, double>> pts;
                                   for (const auto& p : t.points)
                                       pts.emplace_back(p.l, p.K, p.y);
                                   return pts;
                               })
        .def_readonly("l_star", &RgTrajectory::l_star)
        .def_readonly("termination", &RgTrajectory::termination);

    m.def("integrate_flow", &integrate_flow, py::arg("params"), py::arg("l_max"),
          py::arg("tol") = 1e-10);
    m.def("bkt_correlation_length", &bkt_correlation_length, py::arg("params"),
          py::arg("l_max") = 80.0, py::arg("tol") = 1e-10);
    m.def("nu_eff", py::overload_cast<double>(&nu_eff), py::arg("K0"));
    m.def("vortex_kinetics", [](const BktParams& p, double D0) {
        const auto v = vortex_kinetics(p, D0);
        return py::make_tuple(v.D_eff, v.gamma_slip_scale);
    });
    m.def("find_beta_bkt", &find_beta_bkt, py::arg("params"), py::arg("beta_lo"),
          py::arg("beta_hi"), py::arg("beta_tol") = 1e-10, py::arg("l_max") = 400.0);

    py::class_<CrossoverResult>(m, "CrossoverResult")
        .def_readonly("beta_bkt", &CrossoverResult::beta_bkt)
        .def_readonly("beta_c", &CrossoverResult::beta_c)
        .def_readonly("beta_c_estimate", &CrossoverResult::beta_c_estimate)
        .def_readonly("b", &CrossoverResult::b)
        .def_readonly("nu_at_c", &CrossoverResult::nu_at_c)
        .def_readonly("b_implied", &CrossoverResult::b_implied);

    m.def("crossover_beta", &crossover_beta, py::arg("params"), py::arg("L"),
          py::arg("b_fit") = std::nullopt, py::call_guard<py::gil_scoped_release>());

    py::class_<FitReport>(m, "FitReport")
        .def_readonly("exponent", &FitReport::exponent)
        .def_readonly("intercept", &FitReport::intercept)
        .def_readonly("ci_lo", &FitReport::ci_lo)
        .def_readonly("ci_hi", &FitReport::ci_hi)
        .def_readonly("points_used", &FitReport::points_used)
        .def_readonly("residuals", &FitReport::residuals);

    m.def(
        "fit_power_law",
        [](const std::vector<double>& x, const std::vector<double>& y, int bootstrap_n,
           std::uint64_t seed) { return fit_power_law(x, y, bootstrap_n, seed); },
        py::arg("x"), py::arg("y"), py::arg("bootstrap_n") = 400, py::arg("seed") = 0);
}
