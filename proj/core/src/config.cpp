#include "pbgfluor/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pbgfluor/error.hpp"
#include "pbgfluor/presets.hpp"

namespace pbgfluor::config {

namespace {

Error cfg_error(const std::string& msg) { return Error("config", msg); }

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

void reject_unknown(const std::string& key, std::string_view where) {
    if (is_known_key(key)) return;
    std::string msg = std::string(where) + "unknown key '" + key + "'";
    const auto near = nearest_key(key);
    if (!near.empty()) msg += "; did you mean '" + near + "'?";
    throw cfg_error(msg);
}

// --- typed reads --------------------------------------------------------

double to_number(const std::string& key, const std::string& v) {
    double x = 0.0;
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, x);
    if (ec != std::errc() || p != end || !std::isfinite(x))
        throw cfg_error(key + ": expected a finite number, got '" + v + "'");
    return x;
}

std::optional<double> to_auto_number(const std::string& key, const std::string& v) {
    if (v == "auto") return std::nullopt;
    return to_number(key, v);
}

std::size_t to_count(const std::string& key, const std::string& v) {
    std::size_t x = 0;
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, x);
    if (ec != std::errc() || p != end) throw cfg_error(key + ": expected a non-negative integer, got '" + v + "'");
    return x;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw cfg_error(key + ": expected true or false, got '" + v + "'");
}

std::vector<std::string> split(const std::string& v, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, sep)) {
        auto t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

Eigen::Vector3d to_vector3(const std::string& key, const std::string& v) {
    const auto parts = split(v, ' ');
    if (parts.size() != 3) throw cfg_error(key + ": expected three numbers, got '" + v + "'");
    return {to_number(key, parts[0]), to_number(key, parts[1]), to_number(key, parts[2])};
}

void require(bool ok, const std::string& what) {
    if (!ok) throw cfg_error(what);
}

const std::vector<std::string> kernel_types = {"markov", "periodic_band_3d", "parabolic_edge", "tabulated"};
const std::vector<std::string> pipeline_names = {"stationary", "finite_T", "markov"};

void require_one_of(const std::string& key, const std::string& v, const std::vector<std::string>& allowed) {
    if (std::find(allowed.begin(), allowed.end(), v) != allowed.end()) return;
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
    throw cfg_error(key + ": '" + v + "' is not one of {" + list + "}");
}

} // namespace

const std::vector<KeySpec>& schema() {
    static const std::vector<KeySpec> s = {
        {"run.preset", "", "base preset expanded before this document"},
        {"run.name", "experiment", "label used in outputs"},
        {"run.pipelines", "stationary", "comma list of stationary, finite_T, markov"},
        {"kernel.type", "periodic_band_3d", "markov | periodic_band_3d | parabolic_edge | tabulated"},
        {"kernel.g", "0.05", "g_3D coupling amplitude"},
        {"kernel.A", "1", "band centre A"},
        {"kernel.B", "1", "band half-width B"},
        {"kernel.sqrt_beta", "auto", "parabolic prefactor; auto = g^2 (6/B)^{3/2} / 8"},
        {"kernel.omega_c", "0", "band-edge frequency"},
        {"kernel.tau_min", "0.1", "parabolic short-time cutoff"},
        {"kernel.gamma", "0.1", "Markov rate"},
        {"kernel.file", "", "tabulated kernel CSV (tau,re,im)"},
        {"atom.mode", "driven", "driven | spontaneous"},
        {"atom.epsilon", "0.3", "Rabi coupling"},
        {"atom.detuning", "0", "atom - laser detuning"},
        {"atom.omega_L", "1", "laser frequency"},
        {"atom.omega_12", "1", "transition frequency (spontaneous mode)"},
        {"atom.frame", "auto", "rotating-frame frequency (spontaneous mode); auto = omega_12"},
        {"atom.initial", "excited", "excited | ground | dressed_upper | dressed_lower"},
        {"spatial.enabled", "false", "apply the detector kernel S(w)"},
        {"spatial.gamma", "1", "gamma scale in Q"},
        {"spatial.a", "1", "lattice period"},
        {"spatial.theta", "1.5707963267948966", "emitter dipole angle to k0 (rad)"},
        {"spatial.theta_D", "1.5707963267948966", "detector dipole angle to k0 (rad)"},
        {"spatial.k0", "0 0 0", "symmetry wavevectors, ';'-separated triples"},
        {"spatial.direction", "1 0 0", "unit vector of the atom-detector displacement"},
        {"spatial.curvature", "1", "dispersion curvature A near the edge"},
        {"spatial.omega_c", "auto", "edge frequency; auto = kernel.omega_c"},
        {"spatial.d", "10", "atom-detector distance (lattice periods)"},
        {"grid.T", "1000", "horizon"},
        {"grid.N", "100000", "steps"},
        {"omega.min", "auto", "auto = omega_L - 4 Omega (driven) or omega_12 - 1"},
        {"omega.max", "auto", "auto = omega_L + 4 Omega (driven) or omega_12 + 1"},
        {"omega.points", "801", "frequency samples"},
        {"stationary.tol", "1e-6", "steady-state change per unit time"},
        {"stationary.probation", "0", "steady window; 0 = 5 / (2 Omega)"},
        {"stationary.tail_tol", "1e-3", "relative tail residual for the convergence flag"},
        {"stationary.taper", "false", "cosine taper on the correlation window"},
        {"laplace.window", "2000", "kernel transform window"},
        {"laplace.step", "0.05", "kernel transform step"},
        {"laplace.infinite", "true", "Abel-damped T -> infinity limit"},
        {"laplace.tol", "1e-2", "tail convergence tolerance"},
        {"markov.gamma", "auto", "rate of the Markov comparison; auto = pi rho(omega_L)"},
        {"finite_t.subtract_coherent", "auto", "auto = true when driven"},
        {"oracle.enabled", "false", "exact one-excitation reference (spontaneous mode)"},
        {"oracle.modes", "4000", "bath modes"},
        {"oracle.lo", "auto", "auto = A - B"},
        {"oracle.hi", "auto", "auto = A + B"},
        {"oracle.max_error", "0.02", "bath reconstruction tolerance"},
        {"output.trajectory", "false", "dump <E_k(t)>"},
        {"output.correlation", "false", "dump C_L(t1, t2)"},
    };
    return s;
}

bool is_known_key(std::string_view key) {
    const auto& s = schema();
    return std::any_of(s.begin(), s.end(), [&](const KeySpec& k) { return k.key == key; });
}

std::string nearest_key(std::string_view key) {
    std::string best;
    std::size_t best_d = std::string::npos;
    for (const auto& k : schema()) {
        const auto d = edit_distance(key, k.key);
        if (d < best_d) {
            best_d = d;
            best = k.key;
        }
    }
    return best;
}

ConfigDocument ConfigDocument::parse(std::string_view text, std::string_view source) {
    ConfigDocument doc;
    std::string section;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string where = std::string(source) + ":" + std::to_string(line_no) + ": ";
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) throw cfg_error(where + "malformed section header '" + line + "'");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw cfg_error(where + "expected 'key = value', got '" + line + "'");
        const std::string k = trim(std::string_view(line).substr(0, eq));
        const std::string v = trim(std::string_view(line).substr(eq + 1));
        if (k.empty()) throw cfg_error(where + "missing key before '='");
        const std::string full = section.empty() ? k : section + "." + k;
        reject_unknown(full, where);
        doc.entries_[full] = v;
    }
    return doc;
}

void ConfigDocument::set(const std::string& key, const std::string& value) {
    reject_unknown(key, "");
    entries_[key] = value;
}

void ConfigDocument::apply_override(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw cfg_error("override '" + std::string(assignment) + "' must be key=value");
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void ConfigDocument::merge(const ConfigDocument& other) {
    for (const auto& [k, v] : other.entries_) entries_[k] = v;
}

std::optional<std::string> ConfigDocument::get(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::string ConfigDocument::value(const std::string& key) const {
    if (auto v = get(key)) return *v;
    for (const auto& k : schema())
        if (k.key == key) return std::string(k.default_value);
    throw cfg_error("unknown key '" + key + "'");
}

bool ExperimentConfig::has_pipeline(std::string_view p) const {
    return std::find(pipelines.begin(), pipelines.end(), p) != pipelines.end();
}

std::string ExperimentConfig::to_text() const {
    std::ostringstream os;
    std::string section;
    for (const auto& k : schema()) {
        const std::string key(k.key);
        if (key == "run.preset") continue; // already expanded
        const auto dot = key.find('.');
        const std::string sec = key.substr(0, dot);
        if (sec != section) {
            os << (section.empty() ? "" : "\n") << "[" << sec << "]\n";
            section = sec;
        }
        os << key.substr(dot + 1) << " = " << document.value(key) << "\n";
    }
    return os.str();
}

ExperimentConfig resolve(const ConfigDocument& input) {
    ConfigDocument doc;
    if (auto p = input.get("run.preset"); p && !p->empty()) {
        doc = ConfigDocument::parse(presets::text(*p), "preset " + *p);
        if (doc.get("run.preset")) throw cfg_error("presets cannot name another preset");
    }
    doc.merge(input);

    ExperimentConfig c;
    auto v = [&](const char* key) { return doc.value(key); };
    auto num = [&](const char* key) { return to_number(key, v(key)); };

    c.preset = v("run.preset");
    c.name = v("run.name");
    c.pipelines = split(v("run.pipelines"), ',');
    require(!c.pipelines.empty(), "run.pipelines must name at least one pipeline");
    for (const auto& p : c.pipelines) require_one_of("run.pipelines", p, pipeline_names);

    c.kernel.type = v("kernel.type");
    require_one_of("kernel.type", c.kernel.type, kernel_types);
    c.kernel.g = num("kernel.g");
    c.kernel.center = num("kernel.A");
    c.kernel.half_width = num("kernel.B");
    c.kernel.sqrt_beta = to_auto_number("kernel.sqrt_beta", v("kernel.sqrt_beta"));
    c.kernel.edge = num("kernel.omega_c");
    c.kernel.tau_min = num("kernel.tau_min");
    c.kernel.rate = num("kernel.gamma");
    c.kernel.file = v("kernel.file");
    require(c.kernel.g >= 0.0, "kernel.g >= 0 required");
    require(c.kernel.half_width > 0.0, "kernel.B > 0 required");
    require(c.kernel.tau_min > 0.0, "kernel.tau_min > 0 required");
    require(c.kernel.rate >= 0.0, "kernel.gamma >= 0 required");
    require(!c.kernel.sqrt_beta || *c.kernel.sqrt_beta >= 0.0, "kernel.sqrt_beta >= 0 required");
    require(c.kernel.type != "tabulated" || !c.kernel.file.empty(), "kernel.file is required for a tabulated kernel");

    c.atom.mode = v("atom.mode");
    require_one_of("atom.mode", c.atom.mode, {"driven", "spontaneous"});
    c.atom.epsilon = num("atom.epsilon");
    c.atom.detuning = num("atom.detuning");
    c.atom.laser_frequency = num("atom.omega_L");
    c.atom.transition_frequency = num("atom.omega_12");
    c.atom.frame = to_auto_number("atom.frame", v("atom.frame"));
    c.atom.initial = v("atom.initial");
    require_one_of("atom.initial", c.atom.initial, {"excited", "ground", "dressed_upper", "dressed_lower"});
    require(c.atom.epsilon >= 0.0, "atom.epsilon >= 0 required");
    if (c.atom.mode == "driven")
        require(c.atom.epsilon > 0.0 || c.atom.detuning != 0.0,
                "atom.epsilon and atom.detuning are both 0: no dressing; use atom.mode = spontaneous");

    c.spatial.enabled = to_bool("spatial.enabled", v("spatial.enabled"));
    c.spatial.gamma = num("spatial.gamma");
    c.spatial.lattice_period = num("spatial.a");
    c.spatial.theta = num("spatial.theta");
    c.spatial.theta_detector = num("spatial.theta_D");
    for (const auto& item : split(v("spatial.k0"), ';')) c.spatial.k0.push_back(to_vector3("spatial.k0", item));
    c.spatial.direction = to_vector3("spatial.direction", v("spatial.direction"));
    c.spatial.curvature = num("spatial.curvature");
    c.spatial.edge = to_auto_number("spatial.omega_c", v("spatial.omega_c"));
    c.spatial.distance = num("spatial.d");
    require(c.spatial.distance > 0.0, "spatial.d > 0 required (got " + v("spatial.d") + ")");
    require(c.spatial.curvature > 0.0, "spatial.curvature > 0 required");
    require(c.spatial.lattice_period > 0.0, "spatial.a > 0 required");
    require(!c.spatial.k0.empty(), "spatial.k0 must list at least one wavevector");
    require(c.spatial.direction.norm() > 0.0, "spatial.direction must be non-zero");

    c.grid.horizon = num("grid.T");
    c.grid.steps = to_count("grid.N", v("grid.N"));
    require(c.grid.horizon > 0.0, "grid.T > 0 required");
    require(c.grid.steps >= 2, "grid.N >= 2 required");

    c.omega.min = to_auto_number("omega.min", v("omega.min"));
    c.omega.max = to_auto_number("omega.max", v("omega.max"));
    c.omega.points = to_count("omega.points", v("omega.points"));
    require(c.omega.points >= 2, "omega.points >= 2 required");
    if (c.omega.min && c.omega.max) require(*c.omega.max > *c.omega.min, "omega.max > omega.min required");

    c.stationary.tolerance = num("stationary.tol");
    c.stationary.probation = num("stationary.probation");
    c.stationary.tail_tolerance = num("stationary.tail_tol");
    c.stationary.taper = to_bool("stationary.taper", v("stationary.taper"));
    require(c.stationary.tolerance > 0.0, "stationary.tol > 0 required");
    require(c.stationary.probation >= 0.0, "stationary.probation >= 0 required");

    c.laplace.window = num("laplace.window");
    c.laplace.step = num("laplace.step");
    c.laplace.infinite = to_bool("laplace.infinite", v("laplace.infinite"));
    c.laplace.tolerance = num("laplace.tol");
    require(c.laplace.window > 0.0 && c.laplace.step > 0.0, "laplace.window and laplace.step must be > 0");

    c.markov_rate = to_auto_number("markov.gamma", v("markov.gamma"));
    require(!c.markov_rate || *c.markov_rate >= 0.0, "markov.gamma >= 0 required");
    if (const auto sc = v("finite_t.subtract_coherent"); sc != "auto")
        c.subtract_coherent = to_bool("finite_t.subtract_coherent", sc);

    c.oracle.enabled = to_bool("oracle.enabled", v("oracle.enabled"));
    c.oracle.modes = to_count("oracle.modes", v("oracle.modes"));
    c.oracle.lo = to_auto_number("oracle.lo", v("oracle.lo"));
    c.oracle.hi = to_auto_number("oracle.hi", v("oracle.hi"));
    c.oracle.max_error = num("oracle.max_error");
    if (c.oracle.enabled) {
        require(c.atom.mode == "spontaneous", "oracle.enabled requires atom.mode = spontaneous");
        require(c.kernel.type == "periodic_band_3d", "oracle.enabled requires kernel.type = periodic_band_3d");
        require(c.oracle.modes >= 100, "oracle.modes >= 100 required");
    }

    c.dump_trajectory = to_bool("output.trajectory", v("output.trajectory"));
    c.dump_correlation = to_bool("output.correlation", v("output.correlation"));

    if (c.atom.mode == "spontaneous")
        require(!c.has_pipeline("stationary"),
                "run.pipelines: stationary needs a driven atom (an undriven atom has no stationary emission)");
    if (c.atom.mode == "spontaneous")
        require(!c.has_pipeline("markov") || c.kernel.type == "markov",
                "run.pipelines: the markov comparison needs a driven atom; use finite_T for spontaneous emission");
    if (c.kernel.type == "markov" && c.has_pipeline("stationary") && c.has_pipeline("markov"))
        require(false, "run.pipelines: with a Markov kernel 'stationary' and 'markov' are the same; keep one");

    c.document = doc;
    return c;
}

ExperimentConfig parse_config_text(std::string_view text, std::string_view source,
                                   const std::vector<std::string>& overrides) {
    auto doc = ConfigDocument::parse(text, source);
    for (const auto& o : overrides) doc.apply_override(o);
    return resolve(doc);
}

ExperimentConfig parse_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw cfg_error("cannot open config file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path.string(), overrides);
}

ExperimentConfig load_preset(std::string_view name, const std::vector<std::string>& overrides) {
    ConfigDocument doc;
    doc.set("run.preset", std::string(name));
    for (const auto& o : overrides) doc.apply_override(o);
    return resolve(doc);
}

} // namespace pbgfluor::config
