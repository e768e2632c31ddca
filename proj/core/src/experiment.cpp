#include "pbgfluor/experiment.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "pbgfluor/csv.hpp"
#include "pbgfluor/error.hpp"
#include "pbgfluor/parallel.hpp"

namespace pbgfluor::experiment {

namespace {

Error cli_error(const std::string& msg) { return Error("cli", msg); }

dynamics::State initial_state(const config::ExperimentConfig& cfg, const std::optional<algebra::DressedAtom>& atom) {
    const std::string& which = cfg.atom.initial;
    if (atom) {
        if (which == "excited") return algebra::bare_state_in_dressed(2, *atom);
        if (which == "ground") return algebra::bare_state_in_dressed(1, *atom);
    }
    if (which == "ground" || which == "dressed_lower") return dynamics::State(1.0, 0.0);
    return dynamics::State(0.0, 1.0);
}

environment::SpatialKernelTransform spatial_transform(const config::ExperimentConfig& cfg) {
    const auto& s = cfg.spatial;
    std::vector<environment::SymmetryPoint> points;
    for (const auto& k : s.k0) points.push_back({k, s.theta, s.theta_detector});
    const Eigen::Vector3d disp = s.direction.normalized() * s.distance * s.lattice_period;
    const cplx q = environment::q_constant(s.gamma, s.lattice_period, points, disp);
    return {q, s.curvature, s.edge.value_or(cfg.kernel.edge), s.distance};
}

environment::LaplaceOptions laplace_options(const config::ExperimentConfig& cfg) {
    environment::LaplaceOptions o;
    o.window = cfg.laplace.window;
    o.step = cfg.laplace.step;
    o.infinite = cfg.laplace.infinite;
    o.tolerance = cfg.laplace.tolerance;
    return o;
}

dynamics::StationaryOptions stationary_options(const config::ExperimentConfig& cfg) {
    return {cfg.stationary.tolerance, cfg.stationary.probation, cfg.stationary.tail_tolerance};
}

void stamp(spectrum::SpectrumResult& r, const config::ExperimentConfig& cfg) {
    r.preset = cfg.preset;
    if (cfg.spatial.enabled) r.distance = cfg.spatial.distance;
}

} // namespace

environment::CorrelationKernel build_kernel(const config::KernelSpec& k) {
    using environment::CorrelationKernel;
    if (k.type == "markov") return CorrelationKernel::markov(k.rate);
    if (k.type == "periodic_band_3d") return CorrelationKernel::periodic_band_3d(k.g, k.center, k.half_width);
    if (k.type == "parabolic_edge") {
        if (k.sqrt_beta) return CorrelationKernel::parabolic_edge(*k.sqrt_beta, k.edge, k.tau_min);
        return CorrelationKernel::parabolic_from_band(k.g, k.half_width, k.edge, k.tau_min);
    }
    if (k.type == "tabulated") return CorrelationKernel::load_csv(k.file);
    throw cli_error("unknown kernel type '" + k.type + "'");
}

std::vector<double> omega_grid(const config::ExperimentConfig& cfg) {
    double lo = 0.0, hi = 0.0;
    if (cfg.atom.mode == "driven") {
        const auto atom = algebra::dressed_parameters(cfg.atom.epsilon, cfg.atom.detuning, cfg.atom.laser_frequency);
        lo = atom.laser_frequency - 4.0 * atom.rabi;
        hi = atom.laser_frequency + 4.0 * atom.rabi;
    } else {
        lo = cfg.atom.transition_frequency - 1.0;
        hi = cfg.atom.transition_frequency + 1.0;
    }
    return spectrum::uniform_grid(cfg.omega.min.value_or(lo), cfg.omega.max.value_or(hi), cfg.omega.points);
}

std::shared_ptr<const DynamicsProducts> run_dynamics(const config::ExperimentConfig& cfg) {
    const auto kernel = build_kernel(cfg.kernel);
    std::optional<algebra::DressedAtom> atom;
    dynamics::TwoLevelModel model;
    if (cfg.atom.mode == "driven") {
        atom = algebra::dressed_parameters(cfg.atom.epsilon, cfg.atom.detuning, cfg.atom.laser_frequency);
        model = dynamics::TwoLevelModel::driven(*atom, initial_state(cfg, atom));
    } else {
        const double frame = cfg.atom.frame.value_or(cfg.atom.transition_frequency);
        model = dynamics::TwoLevelModel::spontaneous(cfg.atom.transition_frequency, frame);
        model.initial_state = initial_state(cfg, atom);
    }
    const auto frame_kernel = kernel.with_frame_shift(model.frame_frequency);
    const TimeGrid grid(cfg.grid.horizon, cfg.grid.steps);
    const dynamics::WeakCouplingSolver solver(model.coupling, model.hamiltonian, frame_kernel, grid);
    auto traj = solver.evolve_one_time(model.initial_state);

    auto out = std::make_shared<DynamicsProducts>(DynamicsProducts{
        atom, model, kernel, frame_kernel, grid, traj, std::nullopt, std::nullopt, {}, std::nullopt, 0.0,
        std::nullopt, solver.warnings()});
    out->coupling_means.resize(grid.size());
    for (std::size_t n = 0; n < grid.size(); ++n) out->coupling_means[n] = traj.mean(model.coupling, n);

    if (cfg.has_pipeline("stationary") || (cfg.has_pipeline("markov") && kernel.is_markov()))
        out->stationary = dynamics::stationary_correlation(solver, out->trajectory, stationary_options(cfg));
    if (cfg.has_pipeline("finite_T"))
        out->field = dynamics::correlation_field(solver, out->trajectory, default_worker_count());

    if (cfg.has_pipeline("markov") && !kernel.is_markov()) {
        if (!atom) throw cli_error("the markov comparison pipeline needs a driven atom");
        double rate = 0.0;
        if (cfg.markov_rate) {
            rate = *cfg.markov_rate;
        } else {
            rate = environment::kernel_laplace(kernel, atom->laser_frequency, laplace_options(cfg)).value.real();
            if (rate < 0.0) rate = 0.0;
        }
        out->markov_rate = rate;
        const dynamics::WeakCouplingSolver markov_solver(model.coupling, model.hamiltonian,
                                                          environment::CorrelationKernel::markov(rate), grid);
        const auto mtraj = markov_solver.evolve_one_time(model.initial_state);
        out->markov_stationary = dynamics::stationary_correlation(markov_solver, mtraj, stationary_options(cfg));
    } else if (kernel.is_markov()) {
        out->markov_rate = kernel.markov_rate();
    }

    if (cfg.oracle.enabled) {
        const auto& k = cfg.kernel;
        const double lo = cfg.oracle.lo.value_or(k.center - k.half_width);
        const double hi = cfg.oracle.hi.value_or(k.center + k.half_width);
        const auto bath = oracle::discretize_bath(
            [&](double w) { return environment::band_density_3d(w, k.g, k.center, k.half_width); }, lo, hi,
            cfg.oracle.modes, grid.horizon(), [&](double tau) { return kernel.evaluate(tau); }, cfg.oracle.max_error);
        out->oracle = oracle::one_excitation_exact(bath, cfg.atom.transition_frequency, grid);
    }
    return out;
}

RunResult run_spectra(const config::ExperimentConfig& cfg, std::shared_ptr<const DynamicsProducts> dyn) {
    RunResult res{cfg, dyn, {}, std::nullopt, dyn->warnings};
    const auto omegas = omega_grid(cfg);
    const double laser = dyn->model.frame_frequency;
    spectrum::StationaryOptions sopt{cfg.stationary.taper};

    if (cfg.spatial.enabled) {
        const auto s = spatial_transform(cfg);
        if (auto w = s.far_field_warning(); !w.empty()) res.warnings.push_back(w);
    }

    auto add_d2 = [&](spectrum::SpectrumResult& r) {
        if (!cfg.spatial.enabled) return;
        std::vector<double> d2(r.power.size());
        const double d2f = cfg.spatial.distance * cfg.spatial.distance;
        for (std::size_t i = 0; i < d2.size(); ++i) d2[i] = d2f * r.power[i];
        r.d2_power = std::move(d2);
    };

    std::optional<std::size_t> stationary_nospatial;
    if (cfg.has_pipeline("stationary")) {
        std::vector<cplx> transfer;
        cplx at_laser;
        std::vector<std::string> flags;
        if (cfg.spatial.enabled) {
            const auto s = spatial_transform(cfg);
            transfer = spectrum::transfer_spatial(s, omegas);
            at_laser = s.evaluate(laser);
        } else if (dyn->kernel.is_markov()) {
            transfer.assign(omegas.size(), cplx(dyn->kernel.markov_rate()));
            at_laser = dyn->kernel.markov_rate();
        } else {
            transfer = spectrum::transfer_laplace(dyn->kernel, omegas, laplace_options(cfg), &flags);
            const double l[1] = {laser};
            at_laser = spectrum::transfer_laplace(dyn->kernel, l, laplace_options(cfg))[0];
        }
        auto r = spectrum::spectrum_stationary(*dyn->stationary, transfer, at_laser, omegas, laser, sopt);
        r.flags.insert(r.flags.end(), flags.begin(), flags.end());
        add_d2(r);
        stamp(r, cfg);
        res.spectra.push_back(std::move(r));
        if (!cfg.spatial.enabled) stationary_nospatial = res.spectra.size() - 1;
    }
    if (cfg.has_pipeline("markov")) {
        const auto& css = dyn->kernel.is_markov() ? *dyn->stationary : *dyn->markov_stationary;
        auto r = spectrum::spectrum_markov(css, dyn->markov_rate, omegas, laser, sopt);
        stamp(r, cfg);
        res.spectra.push_back(std::move(r));
    }
    if (cfg.has_pipeline("finite_T")) {
        spectrum::FiniteTOptions fopt;
        fopt.subtract_coherent = cfg.subtract_coherent.value_or(cfg.atom.mode == "driven");
        auto r = spectrum::spectrum_finite_T(*dyn->field, dyn->frame_kernel, dyn->grid, omegas, dyn->coupling_means, fopt);
        stamp(r, cfg);
        res.spectra.push_back(std::move(r));
        if (stationary_nospatial)
            res.crosscheck = spectrum::pipeline_crosscheck(res.spectra.back(), res.spectra[*stationary_nospatial]);
    }
    return res;
}

RunResult run(const config::ExperimentConfig& cfg) { return run_spectra(cfg, run_dynamics(cfg)); }

bool spectrum_only_key(std::string_view key) {
    for (std::string_view prefix : {"spatial.", "omega.", "laplace."})
        if (key.substr(0, prefix.size()) == prefix) return true;
    return key == "stationary.taper" || key == "run.name";
}

std::vector<RunResult> sweep(const config::ExperimentConfig& base, const std::string& key,
                             const std::vector<std::string>& values,
                             const std::function<void(const RunResult&, std::size_t)>& sink) {
    if (!config::is_known_key(key))
        throw Error("config", "unknown sweep key '" + key + "'; did you mean '" + config::nearest_key(key) + "'?");
    std::vector<RunResult> out;
    if (values.empty()) return out;
    const bool reuse = spectrum_only_key(key);
    std::shared_ptr<const DynamicsProducts> shared;
    for (std::size_t i = 0; i < values.size(); ++i) {
        auto doc = base.document;
        doc.set(key, values[i]);
        const auto cfg = config::resolve(doc);
        if (!reuse || !shared) shared = run_dynamics(cfg);
        out.push_back(run_spectra(cfg, shared));
        if (sink) sink(out.back(), i);
    }
    return out;
}

std::string manifest_text(const RunResult& result, double wall_seconds) {
    std::ostringstream os;
    os << "# pbgfluor run manifest\n";
    os << "# preset: " << (result.config.preset.empty() ? "(none)" : result.config.preset) << "\n";
    os << "# wall_time_s: " << std::fixed << std::setprecision(3) << wall_seconds << "\n";
    os.unsetf(std::ios::floatfield);
    for (const auto& s : result.spectra) {
        std::string flags;
        for (const auto& f : s.flags) flags += (flags.empty() ? "" : ";") + f;
        os << "# spectrum " << s.pipeline << ": flags=" << (flags.empty() ? "none" : flags)
           << " coherent_weight=" << csv::format_number(s.coherent_weight)
           << " max_imag_residue=" << csv::format_number(s.max_imag_residue) << "\n";
    }
    if (result.dynamics && result.dynamics->stationary) {
        const auto& st = *result.dynamics->stationary;
        os << "# steady_state: t_star=" << csv::format_number(st.t_star)
           << " tail_residual=" << csv::format_number(st.tail_residual) << "\n";
    }
    if (result.crosscheck)
        os << "# crosscheck: " << (result.crosscheck->passed ? "pass" : "fail") << " (" << result.crosscheck->message
           << ")\n";
    for (const auto& w : result.warnings) os << "# warning: " << w << "\n";
    os << "\n" << result.config.to_text();
    return os.str();
}

std::vector<std::filesystem::path> write_outputs(const RunResult& result, const std::filesystem::path& out_dir,
                                                 double wall_seconds) {
    std::vector<std::filesystem::path> written;
    try {
        std::filesystem::create_directories(out_dir);
        auto emit = [&](const std::string& name, auto&& writer) {
            const auto p = out_dir / name;
            written.push_back(p);
            writer(p);
        };
        for (const auto& s : result.spectra)
            emit("spectrum_" + s.pipeline + ".csv", [&](const auto& p) { csv::write_spectrum(p, s); });
        const auto& dyn = *result.dynamics;
        if (result.config.dump_trajectory)
            emit("trajectory.csv", [&](const auto& p) { csv::write_trajectory(p, dyn.trajectory); });
        if (result.config.dump_correlation) {
            if (dyn.field)
                emit("correlation.csv", [&](const auto& p) { csv::write_correlation_field(p, *dyn.field, dyn.grid); });
            else if (dyn.stationary)
                emit("correlation.csv", [&](const auto& p) { csv::write_stationary_row(p, *dyn.stationary); });
        }
        if (dyn.oracle) {
            std::vector<double> pop(dyn.trajectory.values.size());
            for (std::size_t n = 0; n < pop.size(); ++n) pop[n] = dyn.trajectory.values[n](3).real();
            emit("oracle_population.csv", [&](const auto& p) { csv::write_oracle_population(p, *dyn.oracle, pop); });
            emit("oracle_line.csv", [&](const auto& p) { csv::write_oracle_line(p, *dyn.oracle); });
        }
        emit("manifest.txt", [&](const auto& p) {
            std::ofstream out(p, std::ios::binary);
            out << manifest_text(result, wall_seconds);
            if (!out) throw cli_error("write failed for '" + p.string() + "'");
        });
    } catch (...) {
        std::error_code ec;
        for (const auto& p : written) std::filesystem::remove(p, ec);
        throw;
    }
    return written;
}

} // namespace pbgfluor::experiment
