#include "lafano/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>

#include "lafano/constants.hpp"
#include "lafano/errors.hpp"

namespace lafano {

using nlohmann::json;

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::eigen: return "eigen";
        case Scenario::tdse_scan: return "tdse-scan";
        case Scenario::two_level_scan: return "two-level-scan";
        case Scenario::lineshape: return "lineshape";
        case Scenario::fit: return "fit";
        case Scenario::reconstruct: return "reconstruct";
    }
    return "eigen";
}

Scenario scenario_from_string(const std::string& s) {
    for (auto k : {Scenario::eigen, Scenario::tdse_scan, Scenario::two_level_scan, Scenario::lineshape, Scenario::fit,
                   Scenario::reconstruct})
        if (to_string(k) == s) return k;
    throw ConfigError("scenario", "unknown scenario '" + s +
                                      "'; accepted: eigen, tdse-scan, two-level-scan, lineshape, fit, reconstruct");
}

namespace {

enum class Kind { number, integer, boolean, text, number_list, optional_number };

using Check = std::function<std::optional<std::string>(const json&)>;

struct Field {
    std::string name;
    Kind kind;
    std::function<json(Scenario)> def;
    Check check;
    std::string doc;
    std::vector<Scenario> scenarios;  // empty = all
};

std::string num(double x) {
    std::ostringstream s;
    s << x;
    return s.str();
}

Check positive() {
    return [](const json& v) -> std::optional<std::string> {
        if (!(v.get<double>() > 0.0)) return "must be > 0 (got " + num(v.get<double>()) + ")";
        return std::nullopt;
    };
}
Check non_negative() {
    return [](const json& v) -> std::optional<std::string> {
        if (!(v.get<double>() >= 0.0)) return "must be >= 0 (got " + num(v.get<double>()) + ")";
        return std::nullopt;
    };
}
Check open_range(double lo, double hi) {
    return [lo, hi](const json& v) -> std::optional<std::string> {
        const double x = v.get<double>();
        if (!(x > lo && x < hi)) return "must lie in (" + num(lo) + ", " + num(hi) + ") (got " + num(x) + ")";
        return std::nullopt;
    };
}
Check int_range(long lo, long hi) {
    return [lo, hi](const json& v) -> std::optional<std::string> {
        const long x = v.get<long>();
        if (x < lo || x > hi) return "must be an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "] (got " + std::to_string(x) + ")";
        return std::nullopt;
    };
}
Check any() {
    return [](const json&) -> std::optional<std::string> { return std::nullopt; };
}
Check one_of(std::vector<std::string> options) {
    return [options](const json& v) -> std::optional<std::string> {
        const auto s = v.get<std::string>();
        if (std::find(options.begin(), options.end(), s) != options.end()) return std::nullopt;
        std::string all;
        for (const auto& o : options) all += (all.empty() ? "" : ", ") + o;
        return "must be one of: " + all + " (got '" + s + "')";
    };
}

std::function<json(Scenario)> fixed(json v) {
    return [v](Scenario) { return v; };
}

const std::vector<Field>& fields() {
    using S = Scenario;
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        auto add = [&](std::string name, Kind k, std::function<json(Scenario)> d, Check c, std::string doc,
                       std::vector<Scenario> sc = {}) { f.push_back({name, k, d, c, doc, sc}); };
        const std::vector<S> tdse_like = {S::eigen, S::tdse_scan, S::two_level_scan, S::reconstruct};
        const std::vector<S> tdse = {S::tdse_scan};
        const std::vector<S> tl = {S::two_level_scan, S::reconstruct};
        const std::vector<S> scans = {S::tdse_scan, S::two_level_scan, S::reconstruct};

        // grid and potential
        add("r_max", Kind::number, fixed(100.0), positive(), "radial box size, a.u.", tdse_like);
        add("n_elements", Kind::integer, fixed(48), int_range(1, 100000), "finite elements", tdse_like);
        add("order", Kind::integer, fixed(12), int_range(3, 64), "Lobatto points per element", tdse_like);
        add("l_max", Kind::integer, fixed(3), int_range(1, 64), "highest partial wave", {S::tdse_scan});
        add("spectral_cutoff", Kind::optional_number, fixed(20.0), positive(),
            "eigenbasis cutoff for propagation, a.u.; null propagates on the full grid", {S::tdse_scan});
        add("z_asymptotic", Kind::number, fixed(1.0), any(), "asymptotic charge of the model potential", tdse_like);
        const double a[] = {1.231, 0.662, -2.966, 2.883, -0.231, 0.121};
        for (int i = 0; i < 6; ++i)
            add("a" + std::to_string(i + 1), Kind::number, fixed(a[i]), (i % 2 == 1) ? positive() : any(),
                "model potential coefficient", tdse_like);

        // pulses
        add("omega_ir", Kind::number, fixed(PulseDefaults::omega_ir), positive(), "IR carrier frequency, a.u.");
        add("i_ir", Kind::number, fixed(PulseDefaults::intensity_ir), non_negative(), "IR peak intensity, W/cm^2", scans);
        add("fwhm_ir", Kind::number, fixed(PulseDefaults::fwhm_ir), positive(), "IR duration, fs", scans);
        add("i_h15", Kind::number, fixed(PulseDefaults::intensity_xuv), non_negative(), "H15 peak intensity, W/cm^2", scans);
        add("i_h17", Kind::number, fixed(PulseDefaults::intensity_xuv), non_negative(), "H17 peak intensity, W/cm^2", scans);
        add("fwhm_xuv", Kind::number, fixed(PulseDefaults::fwhm_xuv), positive(), "harmonic duration, fs", scans);
        add("order_h15", Kind::integer, fixed(15), int_range(1, 1000), "harmonic order of the resonant harmonic", scans);
        add("order_h17", Kind::integer, fixed(17), int_range(1, 1000), "harmonic order of the continuum harmonic", scans);

        // axes
        add("energy_min", Kind::number, fixed(0.0), non_negative(), "lowest photoelectron energy, eV", scans);
        add("energy_max", Kind::number,
            [](Scenario s) { return s == S::tdse_scan ? json(4.0) : json(0.6); }, positive(),
            "highest photoelectron energy, eV (tdse-scan 4, otherwise 0.6)", scans);
        add("energy_step", Kind::number, fixed(0.002), positive(), "energy spacing, eV", scans);
        add("delays", Kind::number_list, fixed(json::array()), any(),
            "explicit delay list, fs, ascending; overrides delay_min/max/step when non-empty", scans);
        add("delay_min", Kind::number,
            [](Scenario s) { return s == S::tdse_scan ? json(-1.0) : json(-20.0); }, any(),
            "first delay, fs (tdse-scan -1, otherwise -20)", scans);
        add("delay_max", Kind::number,
            [](Scenario s) { return s == S::tdse_scan ? json(1.0) : json(10.0); }, any(),
            "last delay, fs (tdse-scan 1, otherwise 10)", scans);
        add("delay_step", Kind::number, fixed(0.167), positive(), "delay spacing, fs", scans);

        // propagation
        add("dt", Kind::number, fixed(0.2), positive(), "TDSE time step, a.u.", tdse);
        add("window_fwhm_factor", Kind::number, fixed(3.0), positive(), "time window half-width in FWHM units",
            {S::tdse_scan, S::two_level_scan, S::reconstruct});
        add("window_margin", Kind::number, fixed(0.0), non_negative(), "free propagation after the pulses, a.u.", tdse);
        add("absorber", Kind::text, fixed("split"), one_of({"split", "mask", "none"}), "boundary treatment", tdse);
        add("absorber_start", Kind::number, fixed(0.5), open_range(0.0, 1.0),
            "absorber start as a fraction of r_max (mask default 0.9)", tdse);
        add("absorber_exponent", Kind::number, fixed(2.0), positive(), "absorber cos power (mask default 0.125)", tdse);
        add("split_interval", Kind::number, fixed(20.0), positive(), "time between splits, a.u.", tdse);
        add("volkov_translation", Kind::boolean, fixed(true), any(), "shift split pieces by the remaining excursion", tdse);
        add("saturation_limit", Kind::number, fixed(1e-3), positive(), "allowed probability in the outermost element", tdse);
        add("krylov_tolerance", Kind::number, fixed(1e-12), positive(), "Krylov residual tolerance", tdse);
        add("krylov_max_dimension", Kind::integer, fixed(60), int_range(4, 1000), "Krylov subspace cap", tdse);

        // two-level
        add("e_1s", Kind::optional_number, fixed(nullptr), any(), "1s energy, a.u.; null takes the atom model value", tl);
        add("e_3p", Kind::optional_number, fixed(nullptr), any(), "3p energy, a.u.; null takes the atom model value", tl);
        add("delta_1s_peak", Kind::number, fixed(LevelDefaults::shift_1s), any(),
            "1s Stark shift at the peak IR intensity, a.u.", tl);
        add("delta_3p_peak", Kind::number, fixed(LevelDefaults::shift_3p), any(),
            "3p Stark shift at the peak IR intensity, a.u.", tl);
        add("gamma_3p_peak", Kind::number, fixed(LevelDefaults::width_3p), non_negative(),
            "3p depletion width at the peak IR intensity, a.u.", tl);
        add("reference_intensity", Kind::number, fixed(PulseDefaults::intensity_ir), positive(),
            "IR intensity at which the peak values are quoted, W/cm^2", tl);
        add("mu_1s3p", Kind::optional_number, fixed(nullptr), positive(),
            "|<1s|p_z|3p>|; null computes it from the atom model", tl);
        add("mu_3pE", Kind::number, fixed(1.0), non_negative(), "resonant pathway dipole magnitude", tl);
        add("mu_1sEp", Kind::number, fixed(1.0), non_negative(), "continuum pathway dipole magnitude (1s -> E')", tl);
        add("mu_EpE", Kind::number, fixed(1.0), non_negative(), "continuum pathway dipole magnitude (E' -> E)", tl);
        add("continuum_scale", Kind::number, fixed(3.5), non_negative(), "extra factor on |M_con|", tl);
        add("continuum_phase", Kind::number, fixed(0.0), any(), "extra constant phase on M_con, rad", tl);
        add("tl_dt", Kind::number, fixed(0.05), positive(), "two-level integrator step, a.u.", tl);
        add("tl_stride", Kind::integer, fixed(5), int_range(1, 1000), "integrator steps per amplitude sample", tl);
        add("minima_shift", Kind::number, fixed(-0.25), any(), "delay shift applied to the minima locus, fs",
            {S::two_level_scan});

        // lineshape
        add("q", Kind::number, fixed(1.0), non_negative(), "continuum to resonance amplitude ratio", {S::lineshape});
        add("phases", Kind::number_list, fixed(json::array({0.0, pi / 2, pi, 3 * pi / 2})), any(),
            "phases 2 w tau, rad; one lineshape each", {S::lineshape});
        add("eps_min", Kind::number, fixed(-8.0), any(), "lowest reduced energy", {S::lineshape});
        add("eps_max", Kind::number, fixed(8.0), any(), "highest reduced energy", {S::lineshape});
        add("eps_points", Kind::integer, fixed(1601), int_range(3, 10000000), "reduced energy samples", {S::lineshape});

        // analysis
        add("input", Kind::text, fixed(""), any(), "spectrogram CSV to analyse", {S::fit, S::reconstruct});
        add("tau_w", Kind::number, fixed(0.94), positive(), "fit weight width, fs", {S::fit, S::reconstruct});
        add("unwrap", Kind::text, fixed("none"), one_of({"none", "energy", "delay"}), "phase unwrapping axis", {S::fit});
        add("noise_sigma", Kind::number, fixed(0.0), non_negative(),
            "relative Gaussian noise added to the input before fitting (uses --seed)", {S::fit});
        add("e_c", Kind::number, fixed(0.34), positive(), "reconstruction filter energy, eV", {S::reconstruct});
        add("alpha", Kind::number, fixed(4.0), positive(), "reconstruction filter exponent", {S::reconstruct});
        add("t_min", Kind::number, fixed(-60.0), any(), "first reconstruction time, fs", {S::reconstruct});
        add("t_max", Kind::number, fixed(60.0), any(), "last reconstruction time, fs", {S::reconstruct});
        add("t_step", Kind::number, fixed(0.1), positive(), "reconstruction time step, fs", {S::reconstruct});

        // eigen
        add("eigen_count", Kind::integer, fixed(4), int_range(1, 100), "bound states listed per channel", {S::eigen});
        return f;
    }();
    return table;
}

bool applies(const Field& f, Scenario s) {
    return f.scenarios.empty() || std::find(f.scenarios.begin(), f.scenarios.end(), s) != f.scenarios.end();
}

const Field* find_field(const std::string& name) {
    for (const auto& f : fields())
        if (f.name == name) return &f;
    return nullptr;
}

json coerce(const Field& f, const json& v) {
    auto fail = [&](const std::string& what) { throw ConfigError(f.name, what); };
    switch (f.kind) {
        case Kind::number:
            if (!v.is_number()) fail("expected a number");
            if (!std::isfinite(v.get<double>())) fail("must be finite");
            return json(v.get<double>());
        case Kind::optional_number:
            if (v.is_null()) return v;
            if (!v.is_number()) fail("expected a number or null");
            if (!std::isfinite(v.get<double>())) fail("must be finite");
            return json(v.get<double>());
        case Kind::integer:
            if (v.is_number_integer()) return v;
            if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>() &&
                std::abs(v.get<double>()) < 1e15)
                return json(static_cast<long>(v.get<double>()));
            fail("expected an integer");
            break;
        case Kind::boolean:
            if (!v.is_boolean()) fail("expected true or false");
            return v;
        case Kind::text:
            if (!v.is_string()) fail("expected a string");
            return v;
        case Kind::number_list: {
            if (!v.is_array()) fail("expected a list of numbers");
            json out = json::array();
            for (const auto& x : v) {
                if (!x.is_number() || !std::isfinite(x.get<double>())) fail("expected a list of finite numbers");
                out.push_back(x.get<double>());
            }
            return out;
        }
    }
    return v;
}

void cross_checks(const RunConfig& c) {
    const auto s = c.scenario;
    const bool scan = s == Scenario::tdse_scan || s == Scenario::two_level_scan || s == Scenario::reconstruct;
    if (scan) {
        if (!(c.number("energy_max") > c.number("energy_min")))
            throw ConfigError("energy_max", "must exceed energy_min (" + num(c.number("energy_min")) + ")");
        if (c.number("energy_step") > c.number("energy_max") - c.number("energy_min"))
            throw ConfigError("energy_step", "must not exceed energy_max - energy_min");
        const auto d = c.numbers("delays");
        for (std::size_t i = 1; i < d.size(); ++i)
            if (!(d[i] > d[i - 1])) throw ConfigError("delays", "must be strictly ascending");
        if (d.empty() && !(c.number("delay_max") >= c.number("delay_min")))
            throw ConfigError("delay_max", "must be >= delay_min (" + num(c.number("delay_min")) + ")");
        if (c.integer("order_h17") <= c.integer("order_h15"))
            throw ConfigError("order_h17", "must exceed order_h15");
    }
    if (s == Scenario::two_level_scan || s == Scenario::reconstruct) {
        if (c.number("tl_dt") * static_cast<double>(c.integer("tl_stride")) > 0.25 + 1e-12)
            throw ConfigError("tl_stride", "tl_dt * tl_stride must be <= 0.25 a.u.");
    }
    if (s == Scenario::lineshape && !(c.number("eps_max") > c.number("eps_min")))
        throw ConfigError("eps_max", "must exceed eps_min");
    if (s == Scenario::reconstruct && !(c.number("t_max") > c.number("t_min")))
        throw ConfigError("t_max", "must exceed t_min");
    if ((s == Scenario::fit || s == Scenario::reconstruct) && c.text("input").empty())
        throw ConfigError("input", "path of a spectrogram CSV is required");
    if (s == Scenario::tdse_scan && c.text("absorber") == "split" && !c.is_null("spectral_cutoff") &&
        c.number("spectral_cutoff") < 1.0)
        throw ConfigError("spectral_cutoff", "must be >= 1 a.u. or null");
}

}  // namespace

double RunConfig::number(const std::string& key) const { return values.at(key).get<double>(); }
long RunConfig::integer(const std::string& key) const { return values.at(key).get<long>(); }
bool RunConfig::flag(const std::string& key) const { return values.at(key).get<bool>(); }
std::string RunConfig::text(const std::string& key) const { return values.at(key).get<std::string>(); }
std::vector<double> RunConfig::numbers(const std::string& key) const {
    return values.at(key).get<std::vector<double>>();
}
bool RunConfig::is_null(const std::string& key) const { return values.at(key).is_null(); }

RunConfig resolve_config(const json& user, const std::string& scenario) {
    if (!user.is_object()) throw ConfigError("<root>", "config must be a JSON object");
    std::string name = scenario;
    if (user.contains("scenario")) {
        if (!user["scenario"].is_string()) throw ConfigError("scenario", "expected a string");
        const auto in_file = user["scenario"].get<std::string>();
        if (!name.empty() && name != in_file)
            throw ConfigError("scenario", "file says '" + in_file + "' but the command is '" + name + "'");
        name = in_file;
    }
    if (name.empty()) throw ConfigError("scenario", "no scenario given");
    RunConfig c;
    c.scenario = scenario_from_string(name);
    for (const auto& [key, value] : user.items()) {
        if (key == "scenario") continue;
        const Field* f = find_field(key);
        if (!f) throw ConfigError(key, "unknown field");
        if (!applies(*f, c.scenario)) throw ConfigError(key, "not used by scenario " + name);
    }
    for (const auto& f : fields()) {
        if (!applies(f, c.scenario)) continue;
        json v;
        if (user.contains(f.name)) {
            v = coerce(f, user[f.name]);
        } else {
            v = f.def(c.scenario);
            c.defaulted.push_back(f.name);
        }
        if (!v.is_null()) {
            if (f.kind == Kind::number_list) {
                for (const auto& x : v)
                    if (auto err = f.check(x)) throw ConfigError(f.name, *err);
            } else if (auto err = f.check(v)) {
                throw ConfigError(f.name, *err);
            }
        }
        c.values[f.name] = v;
    }
    // mask mode has its own shape defaults
    if (c.scenario == Scenario::tdse_scan && c.text("absorber") == "mask") {
        const auto m = AbsorberConfig::mask_defaults();
        auto was_defaulted = [&](const char* k) {
            return std::find(c.defaulted.begin(), c.defaulted.end(), k) != c.defaulted.end();
        };
        if (was_defaulted("absorber_start")) c.values["absorber_start"] = m.start_fraction;
        if (was_defaulted("absorber_exponent")) c.values["absorber_exponent"] = m.exponent;
    }
    cross_checks(c);
    return c;
}

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("--config", std::string("malformed JSON: ") + e.what());
    }
}

std::vector<FieldDoc> config_fields(Scenario s) {
    std::vector<FieldDoc> out;
    for (const auto& f : fields())
        if (applies(f, s)) out.push_back({f.name, f.doc, f.def(s)});
    return out;
}

PulseTrain make_pulse_train(const RunConfig& c, double tau_fs) {
    const double w = c.number("omega_ir");
    PulseTrain t;
    t.components.push_back({"IR", w, c.number("i_ir"), c.number("fwhm_ir"), -tau_fs});
    t.components.push_back({"H15", static_cast<double>(c.integer("order_h15")) * w, c.number("i_h15"),
                            c.number("fwhm_xuv"), 0.0});
    t.components.push_back({"H17", static_cast<double>(c.integer("order_h17")) * w, c.number("i_h17"),
                            c.number("fwhm_xuv"), 0.0});
    t.validate();
    return t;
}

GridSpec make_grid_spec(const RunConfig& c) {
    GridSpec g;
    g.r_max = c.number("r_max");
    g.n_elements = static_cast<int>(c.integer("n_elements"));
    g.order = static_cast<int>(c.integer("order"));
    g.validate();
    return g;
}

PotentialParams make_potential(const RunConfig& c) {
    PotentialParams p;
    p.z_asymptotic = c.number("z_asymptotic");
    p.a1 = c.number("a1");
    p.a2 = c.number("a2");
    p.a3 = c.number("a3");
    p.a4 = c.number("a4");
    p.a5 = c.number("a5");
    p.a6 = c.number("a6");
    p.validate();
    return p;
}

TdseScenario make_tdse_scenario(const RunConfig& c) {
    TdseScenario s;
    s.pulses = make_pulse_train(c);
    s.dt = c.number("dt");
    s.window_fwhm_factor = c.number("window_fwhm_factor");
    s.window_margin = c.number("window_margin");
    s.absorber.mode = absorber_mode_from_string(c.text("absorber"));
    s.absorber.start_fraction = c.number("absorber_start");
    s.absorber.exponent = c.number("absorber_exponent");
    s.absorber.split_interval = c.number("split_interval");
    s.absorber.volkov_translation = c.flag("volkov_translation");
    s.absorber.saturation_limit = c.number("saturation_limit");
    s.krylov.tolerance = c.number("krylov_tolerance");
    s.krylov.max_dimension = static_cast<std::size_t>(c.integer("krylov_max_dimension"));
    s.krylov.dimension = std::min(s.krylov.dimension, s.krylov.max_dimension);
    s.validate();
    return s;
}

LevelParams make_level_params(const RunConfig& c) {
    LevelParams p;
    const bool need_atom = c.is_null("e_1s") || c.is_null("e_3p") || c.is_null("mu_1s3p");
    if (need_atom) {
        const GridSpec g = make_grid_spec(c);
        const RadialGrid grid(g.r_max, g.n_elements, g.order);
        const PotentialParams pot = make_potential(c);
        const auto s = bound_states(grid, pot, 0, 1);
        const auto pst = bound_states(grid, pot, 1, 2);
        if (s.empty() || pst.size() < 2) throw NumericalError("two-level: 1s or 3p not bound with this potential");
        p.e_1s = s[0].energy;
        p.e_3p = pst[1].energy;
        p.mu_1s3p = std::abs(dipole_element(s[0], pst[1], DipoleCoupling(grid, 1)).value);
    }
    if (!c.is_null("e_1s")) p.e_1s = c.number("e_1s");
    if (!c.is_null("e_3p")) p.e_3p = c.number("e_3p");
    if (!c.is_null("mu_1s3p")) p.mu_1s3p = c.number("mu_1s3p");
    p.set_peak_values(c.number("reference_intensity"), c.number("delta_1s_peak"), c.number("delta_3p_peak"),
                      c.number("gamma_3p_peak"));
    p.mu_3pE = c.number("mu_3pE");
    p.mu_1sEp = c.number("mu_1sEp");
    p.mu_EpE = c.number("mu_EpE");
    p.continuum_scale = c.number("continuum_scale");
    p.continuum_phase = c.number("continuum_phase");
    try {
        p.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError("e_1s", e.what());
    }
    return p;
}

TwoLevelOptions make_two_level_options(const RunConfig& c) {
    TwoLevelOptions o;
    o.dt = c.number("tl_dt");
    o.output_stride = static_cast<std::size_t>(c.integer("tl_stride"));
    o.window_fwhm_factor = c.number("window_fwhm_factor");
    o.validate();
    return o;
}

namespace {

// lo + i h, rounded to 1e-9 so axis labels print as written in the config
std::vector<double> linear_axis(double lo, double hi, double h) {
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / h + 1e-9)) + 1;
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::round((lo + static_cast<double>(i) * h) * 1e9) / 1e9;
    return v;
}

}  // namespace

std::vector<double> energy_axis_eV(const RunConfig& c) {
    return linear_axis(c.number("energy_min"), c.number("energy_max"), c.number("energy_step"));
}

std::vector<double> delay_axis_fs(const RunConfig& c) {
    auto d = c.numbers("delays");
    if (!d.empty()) return d;
    return linear_axis(c.number("delay_min"), c.number("delay_max"), c.number("delay_step"));
}

}  // namespace lafano
