#include "lafano/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <random>

#include "lafano/analysis.hpp"
#include "lafano/constants.hpp"
#include "lafano/errors.hpp"
#include "lafano/lineshape.hpp"
#include "lafano/spectrogram.hpp"
#include "lafano/tdse.hpp"
#include "lafano/two_level.hpp"

namespace lafano {

using nlohmann::json;
namespace fs = std::filesystem;

std::string version_string() { return std::string("lafano ") + LAFANO_VERSION; }

namespace {

class Stages {
public:
    Stages(json& out, std::ostream& log) : out_(out), log_(log) {}
    template <class F>
    auto run(const std::string& name, F&& f) {
        const auto t0 = std::chrono::steady_clock::now();
        auto finish = [&] {
            const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            out_.push_back({{"name", name}, {"seconds", s}});
            log_ << "[stage] " << name << ": " << s << " s\n";
        };
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            finish();
        } else {
            auto r = f();
            finish();
            return r;
        }
    }

private:
    json& out_;
    std::ostream& log_;
};

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) throw Error("cannot write " + p.string());
    out << text;
    if (!out) throw Error("write failed: " + p.string());
}

json level_json(const LevelParams& p) {
    return {{"e_1s", p.e_1s},         {"e_3p", p.e_3p},       {"delta_1s", p.delta_1s}, {"delta_3p", p.delta_3p},
            {"gamma_3p", p.gamma_3p}, {"mu_1s3p", p.mu_1s3p}, {"mu_3pE", p.mu_3pE},     {"mu_1sEp", p.mu_1sEp},
            {"mu_EpE", p.mu_EpE},     {"continuum_scale", p.continuum_scale},
            {"continuum_phase", p.continuum_phase}};
}

// ---- eigen ----

ScenarioReport run_eigen(const RunConfig& c, const fs::path& out, std::ostream& log) {
    ScenarioReport rep;
    Stages st(rep.stages, log);
    const GridSpec g = make_grid_spec(c);
    const PotentialParams pot = make_potential(c);
    const auto count = static_cast<std::size_t>(c.integer("eigen_count"));
    struct Row {
        std::string label;
        int l;
        std::size_t n;
        double e;
    };
    std::vector<Row> rows;
    st.run("eigensolve", [&] {
        const RadialGrid grid(g.r_max, g.n_elements, g.order);
        for (int l = 0; l <= 1; ++l) {
            const auto states = bound_states(grid, pot, l, count);
            for (std::size_t n = 0; n < states.size(); ++n) {
                const int principal = static_cast<int>(n) + l + 1;
                rows.push_back({std::to_string(principal) + (l == 0 ? "s" : "p"), l, n, states[n].energy});
            }
        }
    });
    auto reference = [](const std::string& label) -> double {
        if (label == "1s") return ReferenceLevels::e_1s;
        if (label == "2s") return ReferenceLevels::e_2s;
        if (label == "3p") return ReferenceLevels::e_3p;
        return NAN;
    };
    json report = json::array();
    std::string csv = "label,l,index,energy_au,energy_eV,reference_au,difference_au\n";
    double worst = 0.0;
    for (const auto& r : rows) {
        const double ref = reference(r.label);
        csv += r.label + ',' + std::to_string(r.l) + ',' + std::to_string(r.n) + ',' + format_double(r.e) + ',' +
               format_double(PhysicalConstants::au_to_eV(r.e)) + ',' +
               (std::isnan(ref) ? std::string() : format_double(ref)) + ',' +
               (std::isnan(ref) ? std::string() : format_double(r.e - ref)) + '\n';
        json j = {{"label", r.label}, {"l", r.l}, {"energy_au", r.e}};
        if (!std::isnan(ref)) {
            j["reference_au"] = ref;
            j["difference_au"] = r.e - ref;
            worst = std::max(worst, std::abs(r.e - ref));
            log << "  " << r.label << "  E = " << format_double(r.e) << " a.u.  reference " << format_double(ref)
                << "  diff " << format_double(r.e - ref) << '\n';
        }
        report.push_back(j);
    }
    st.run("write", [&] { write_text(out / "eigen.csv", csv); });
    rep.summary = {{"levels", report}, {"max_reference_difference_au", worst}};
    return rep;
}

// ---- tdse-scan ----

ScenarioReport run_tdse(const RunConfig& c, const fs::path& out, int jobs, std::ostream& log) {
    ScenarioReport rep;
    Stages st(rep.stages, log);
    const double cutoff = c.is_null("spectral_cutoff") ? std::numeric_limits<double>::infinity()
                                                        : c.number("spectral_cutoff");
    const auto scenario = make_tdse_scenario(c);
    const auto delays = delay_axis_fs(c);
    const auto energies = energy_axis_eV(c);
    auto system = st.run("setup", [&] {
        return std::make_unique<TdseSystem>(make_grid_spec(c), make_potential(c), static_cast<int>(c.integer("l_max")),
                                            cutoff);
    });
    const auto result = st.run("propagate", [&] { return delay_scan(*system, scenario, delays, energies, jobs); });
    st.run("write", [&] {
        write_spectrogram(out / "spectrogram.csv", result.spectrogram);
        std::string diag = "delay_fs,absorbed,max_step_error\n";
        for (std::size_t i = 0; i < result.spectrogram.delays_fs.size(); ++i)
            diag += format_double(result.spectrogram.delays_fs[i]) + ',' + format_double(result.absorbed[i]) + ',' +
                    format_double(result.max_step_error[i]) + '\n';
        write_text(out / "scan_diagnostics.csv", diag);
        if (!result.failures.empty()) {
            std::string f = "delay_fs,message\n";
            for (const auto& x : result.failures) f += format_double(x.delay_fs) + ",\"" + x.message + "\"\n";
            write_text(out / "failures.csv", f);
        }
    });
    for (const auto& f : result.failures) log << "  delay " << f.delay_fs << " fs failed: " << f.message << '\n';
    rep.complete = result.failures.empty();
    rep.summary = {{"delays", delays.size()}, {"failed_delays", result.failures.size()},
                   {"energies", energies.size()}};
    return rep;
}

// ---- two-level-scan ----

ScenarioReport run_two_level(const RunConfig& c, const fs::path& out, int jobs, std::ostream& log) {
    ScenarioReport rep;
    Stages st(rep.stages, log);
    const auto params = st.run("levels", [&] { return make_level_params(c); });
    const auto options = make_two_level_options(c);
    const auto train = make_pulse_train(c);
    const auto delays = delay_axis_fs(c);
    const auto energies = energy_axis_eV(c);
    const auto scan = st.run("amplitudes", [&] { return two_level_scan(params, train, delays, energies, options, jobs); });
    const auto phase = phase_difference_map(scan);
    const auto minima = minima_from_phase(phase, c.number("minima_shift"));
    st.run("write", [&] {
        Spectrogram s;
        s.energies_eV = energies;
        s.delays_fs = delays;
        const std::size_t ne = energies.size();
        s.values.resize(delays.size() * ne);
        std::string amp = "delay_fs,energy_eV,re_m_res,im_m_res,re_m_con,im_m_con,re_m_total,im_m_total\n";
        for (std::size_t i = 0; i < delays.size(); ++i) {
            const auto& a = scan.amplitudes[i];
            for (std::size_t j = 0; j < ne; ++j) {
                s.values[i * ne + j] = std::norm(a.m_total[j]);
                amp += format_double(delays[i]) + ',' + format_double(energies[j]) + ',' +
                       format_double(a.m_res[j].real()) + ',' + format_double(a.m_res[j].imag()) + ',' +
                       format_double(a.m_con[j].real()) + ',' + format_double(a.m_con[j].imag()) + ',' +
                       format_double(a.m_total[j].real()) + ',' + format_double(a.m_total[j].imag()) + '\n';
            }
        }
        s.metadata = {{"code_version", LAFANO_VERSION},
                      {"model", "two-level"},
                      {"levels", level_json(params)},
                      {"units", {{"energy", "eV"}, {"delay", "fs"}, {"values", "|M_total|^2, arbitrary"}}}};
        write_spectrogram(out / "spectrogram.csv", s);
        write_text(out / "amplitudes.csv", amp);
        write_matrix_csv(out / "phase_difference.csv",
                         {"lafano arg M_res - arg M_con (rad), unwrapped along delay", "energy_eV", "delay_fs",
                          energies, delays, phase.phase});
        std::string m = "branch,delay_fs,energy_eV\n";
        for (const auto& cv : minima)
            for (const auto& [tau, e] : cv.points)
                m += std::to_string(cv.branch) + ',' + format_double(tau) + ',' + format_double(e) + '\n';
        write_text(out / "minima.csv", m);
    });
    rep.summary = {{"levels", level_json(params)}, {"minima_branches", minima.size()}};
    return rep;
}

// ---- lineshape ----

ScenarioReport run_lineshape(const RunConfig& c, const fs::path& out, std::ostream& log) {
    ScenarioReport rep;
    Stages st(rep.stages, log);
    const auto phases = c.numbers("phases");
    std::string summary = "index,phase,peak_epsilon,max_asymmetry,shape\n";
    json items = json::array();
    st.run("lineshapes", [&] {
        for (std::size_t k = 0; k < phases.size(); ++k) {
            FanoConfig fc;
            fc.q = c.number("q");
            fc.phase = phases[k];
            fc.eps_min = c.number("eps_min");
            fc.eps_max = c.number("eps_max");
            fc.n_points = static_cast<std::size_t>(c.integer("eps_points"));
            const auto t = lineshape(fc);
            double asym = 0.0;
            const std::size_t n = t.intensity.size();
            const bool symmetric_axis = fc.eps_min == -fc.eps_max;
            if (symmetric_axis)
                for (std::size_t i = 0; i < n; ++i)
                    asym = std::max(asym, std::abs(t.intensity[i] - t.intensity[n - 1 - i]));
            const double peak = peak_position(t.epsilon, t.intensity);
            const std::string shape = !symmetric_axis ? "unknown" : (asym < 1e-12 ? "even" : "asymmetric");
            write_lineshape_csv(out / ("lineshape_" + std::to_string(k) + ".csv"), t);
            summary += std::to_string(k) + ',' + format_double(fc.phase) + ',' + format_double(peak) + ',' +
                       format_double(asym) + ',' + shape + '\n';
            items.push_back({{"phase", fc.phase}, {"peak_epsilon", peak}, {"max_asymmetry", asym}, {"shape", shape}});
            log << "  phase " << fc.phase << ": peak at eps = " << peak << ", " << shape << '\n';
        }
    });
    st.run("write", [&] { write_text(out / "lineshape_summary.csv", summary); });
    rep.summary = {{"lineshapes", items}};
    return rep;
}

// ---- fit / reconstruct ----

Spectrogram load_input(const RunConfig& c, std::ostream* log) {
    auto rep = ingest_spectrogram(c.text("input"));
    if (log && rep.clipped_negative)
        *log << "  warning: " << rep.clipped_negative << " negative values clipped to zero\n";
    return rep.spectrogram;
}

ScenarioReport run_fit(const RunConfig& c, const fs::path& out, std::uint64_t seed, std::ostream& log) {
    ScenarioReport rep;
    Stages st(rep.stages, log);
    auto spec = st.run("ingest", [&] { return load_input(c, &log); });
    const double sigma = c.number("noise_sigma");
    if (sigma > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, 1.0);
        double mean = 0.0;
        for (double v : spec.values) mean += v;
        mean /= static_cast<double>(std::max<std::size_t>(1, spec.values.size()));
        // counts stay non-negative, as on ingest
        for (auto& v : spec.values) v = std::max(0.0, v + sigma * mean * noise(rng));
    }
    auto field = st.run("fit", [&] { return local_cosine_fit(spec, c.number("omega_ir"), c.number("tau_w")); });
    const auto axis = c.text("unwrap");
    if (axis == "energy") field = unwrap_phase(std::move(field), FitAxis::energy);
    if (axis == "delay") field = unwrap_phase(std::move(field), FitAxis::delay);
    st.run("write", [&] { write_fit_field(out, field); });
    std::size_t valid = 0;
    for (auto v : field.valid) valid += v;
    rep.summary = {{"points", field.valid.size()}, {"valid_points", valid}};
    return rep;
}

ScenarioReport run_reconstruct(const RunConfig& c, const fs::path& out, int jobs, std::ostream& log) {
    ScenarioReport rep;
    Stages st(rep.stages, log);
    const auto spec = st.run("ingest", [&] { return load_input(c, &log); });
    const auto field = st.run("fit", [&] { return local_cosine_fit(spec, c.number("omega_ir"), c.number("tau_w")); });
    const auto params = st.run("levels", [&] { return make_level_params(c); });
    const auto train = make_pulse_train(c);
    const auto scan = st.run("continuum model", [&] {
        return two_level_scan(params, train, spec.delays_fs, spec.energies_eV, make_two_level_options(c), jobs);
    });
    std::vector<std::vector<cplx>> m_con;
    for (const auto& a : scan.amplitudes) m_con.push_back(a.m_con);
    ReconstructionOptions o;
    o.e_c = c.number("e_c");
    o.alpha = c.number("alpha");
    o.t_min = c.number("t_min");
    o.t_max = c.number("t_max");
    o.t_step = c.number("t_step");
    const auto map = st.run("reconstruct", [&] { return reconstruct_wavepacket(field, m_con, o); });
    st.run("write", [&] {
        write_fit_field(out / "fit", field);
        write_wavepacket(out, map);
        std::string ref = "delay_fs,tau_star_fs,ir_center_fs\n";
        for (double tau : spec.delays_fs)
            ref += format_double(tau) + ',' + format_double(product_peak(tau, c.number("fwhm_ir"), c.number("fwhm_xuv"))) +
                   ',' + format_double(-tau) + '\n';
        write_text(out / "reference_lines.csv", ref);
    });
    rep.summary = {{"track_points", map.track.size()}};
    return rep;
}

}  // namespace

void preflight(const RunConfig& c) {
    auto as_config = [](const char* field, auto&& f) {
        try {
            f();
        } catch (const InvalidArgument& e) {
            throw ConfigError(field, e.what());
        }
    };
    switch (c.scenario) {
        case Scenario::eigen:
            as_config("r_max", [&] { make_grid_spec(c); });
            as_config("a1", [&] { make_potential(c); });
            break;
        case Scenario::tdse_scan:
            as_config("r_max", [&] { make_grid_spec(c); });
            as_config("a1", [&] { make_potential(c); });
            as_config("dt", [&] { make_tdse_scenario(c); });
            break;
        case Scenario::two_level_scan:
            as_config("fwhm_ir", [&] { make_pulse_train(c); });
            as_config("tl_dt", [&] { make_two_level_options(c); });
            break;
        case Scenario::lineshape: break;
        case Scenario::fit: load_input(c, nullptr); break;
        case Scenario::reconstruct:
            as_config("fwhm_ir", [&] { make_pulse_train(c); });
            as_config("tl_dt", [&] { make_two_level_options(c); });
            load_input(c, nullptr);
            break;
    }
}

ScenarioReport run_scenario(const RunConfig& c, const fs::path& out, int jobs, std::uint64_t seed,
                            std::ostream& log) {
    fs::create_directories(out);
    switch (c.scenario) {
        case Scenario::eigen: return run_eigen(c, out, log);
        case Scenario::tdse_scan: return run_tdse(c, out, jobs, log);
        case Scenario::two_level_scan: return run_two_level(c, out, jobs, log);
        case Scenario::lineshape: return run_lineshape(c, out, log);
        case Scenario::fit: return run_fit(c, out, seed, log);
        case Scenario::reconstruct: return run_reconstruct(c, out, jobs, log);
    }
    return {};
}

int run_request(const CliRequest& r, std::ostream& log) {
    RunConfig config;
    try {
        if (r.out_dir.empty()) throw ConfigError("--out", "an output directory is required");
        if (r.jobs < 1) throw ConfigError("--jobs", "must be >= 1");
        const json user = r.config_path.empty() ? json::object() : load_config_file(r.config_path);
        config = resolve_config(user, r.scenario);
        preflight(config);
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return ExitCode::config_error;
    } catch (const SchemaError& e) {
        log << "input error: " << e.what() << '\n';
        return ExitCode::config_error;
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return ExitCode::numerical_failure;
    }

    json run = {{"version", version_string()},
                {"scenario", to_string(config.scenario)},
                {"jobs", r.jobs},
                {"seed", r.seed},
                {"defaulted_fields", config.defaulted}};
    log << version_string() << ": " << to_string(config.scenario) << " -> " << r.out_dir.string() << '\n';
    if (!config.defaulted.empty()) log << "  " << config.defaulted.size() << " fields taken from defaults (see config.json)\n";
    int code = ExitCode::success;
    try {
        fs::create_directories(r.out_dir);
        json snapshot = config.values;
        snapshot["scenario"] = to_string(config.scenario);
        write_text(r.out_dir / "config.json", snapshot.dump(2) + '\n');
        const auto rep = run_scenario(config, r.out_dir, r.jobs, r.seed, log);
        run["stages"] = rep.stages;
        run["summary"] = rep.summary;
        run["status"] = rep.complete ? "ok" : "partial failure";
        if (!rep.complete) code = ExitCode::numerical_failure;
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        run["status"] = std::string("config error: ") + e.what();
        code = ExitCode::config_error;
    } catch (const Error& e) {
        log << "numerical failure: " << e.what() << '\n';
        run["status"] = std::string("numerical failure: ") + e.what();
        code = ExitCode::numerical_failure;
    } catch (const std::exception& e) {
        log << "failure: " << e.what() << '\n';
        run["status"] = std::string("failure: ") + e.what();
        code = ExitCode::numerical_failure;
    }
    try {
        write_text(r.out_dir / "run.json", run.dump(2) + '\n');
    } catch (const std::exception& e) {
        log << "cannot write run.json: " << e.what() << '\n';
    }
    return code;
}

}  // namespace lafano
