#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "deltabox/charge.hpp"
#include "deltabox/control.hpp"
#include "deltabox/errors.hpp"
#include "deltabox/greens.hpp"
#include "deltabox/io.hpp"
#include "deltabox/propagator.hpp"

namespace deltabox::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using Settings = std::map<std::string, std::string>;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

constexpr const char* kConfigVersion = "1";
constexpr const char* kOutputDirEnv = "DELTABOX_OUTPUT_DIR";
constexpr const char* kThreadsEnv = "DELTABOX_THREADS";

struct KeySpec {
    std::string key;
    std::string fallback;
    std::string help;
};

struct Command {
    std::string name;
    std::string help;
    std::vector<KeySpec> keys;
};

std::vector<KeySpec> with_common(std::vector<KeySpec> keys, const std::string& k_max = "401") {
    keys.push_back({"k_max", k_max, "mode cutoff"});
    keys.push_back({"output_dir", ".", "directory for output files"});
    keys.push_back({"seed", "1", "seed for randomized checks"});
    return keys;
}

const std::vector<Command>& commands() {
    static const std::vector<Command> table{
        {"simulate",
         "evolve psi0 under alpha(t) and write the charge, trajectory and final state",
         with_common({{"psi0", "eig:1", "eig:<k> | file:<state.csv> | domain:<regular.csv>:<re_q>:<im_q>"},
                      {"alpha", "zero", "zero | const:<A> | bump:<A>[:<T>] | pwl:<t>=<v>,..."},
                      {"T", "1", "time horizon"},
                      {"dt", "1e-3", "time step (ignored when n_steps is set)"},
                      {"n_steps", "", "number of time steps"},
                      {"shift", "1", "real spectral shift of the domain decomposition"},
                      {"store_stride", "10", "keep every n-th full state in memory"},
                      {"tol_norm", "1e-6", "maximum norm drift"},
                      {"tol_residual", "1e-6", "maximum boundary residual"},
                      {"tol_energy", "1e-4", "maximum energy drift (constant alpha)"},
                      {"tol_balance", "1e-2", "maximum relative energy balance error"}})},
        {"spectrum", "static eigenvalues of the box with a fixed delta coupling",
         with_common({{"alpha", "1", "coupling strength"},
                      {"e_min", "-50", "lower end of the energy window"},
                      {"e_max", "100", "upper end of the energy window"}})},
        {"green", "Green's function on a line of points, closed form against the truncated series",
         with_common({{"x_prime", "0", "source point"},
                      {"z_re", "1", "real part of z"},
                      {"z_im", "0", "imaginary part of z"},
                      {"points", "201", "number of evaluation points on [-pi, pi]"}})},
        {"control", "synthesize a control for a target displacement and run the steering experiment",
         with_common({{"target", "", "coefficient table k,re_c,im_c"},
                      {"k_bar", "1", "odd mode the control steers"},
                      {"T", "8pi", "horizon, a multiple of 8pi"},
                      {"dt", "1e-3", "time step"},
                      {"epsilons", "0.1,0.03,0.01", "amplitudes of the nonlinear runs"},
                      {"experiment", "true", "run the nonlinear steering experiment"},
                      {"tol_residual", "1e-8", "maximum moment residual"}})},
        {"verify", "run the invariant checks of every module",
         with_common({{"filter", "", "only run checks of this module"}})},
        {"sweep", "refinement study with a fitted convergence slope",
         with_common({{"kind", "charge_dt", "charge_dt | green_kmax"},
                      {"levels", "250,500,1000", "refinement levels (n_steps or k_max), at least 3"},
                      {"min_slope", "", "slope required to pass (1.9 for charge_dt, 0.9 for green_kmax)"},
                      {"psi0", "eig:1", "initial state (charge_dt)"},
                      {"alpha", "bump:0.5", "coupling (charge_dt)"},
                      {"T", "2", "time horizon (charge_dt)"}},
                     "21")},
    };
    return table;
}

const Command& command(const std::string& name) {
    for (const auto& c : commands()) {
        if (c.name == name) {
            return c;
        }
    }
    throw ConfigError("unknown subcommand '" + name + "'");
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return "";
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) {
        out.push_back(trim(item));
    }
    return out;
}

// Accepts a plain number or a multiple of pi written as "<c>pi".
double parse_real(const std::string& key, const std::string& value) {
    std::string s = trim(value);
    double scale = 1.0;
    if (s.size() >= 2 && s.ends_with("pi")) {
        s = s.substr(0, s.size() - 2);
        scale = kPi;
        if (s.empty()) {
            s = "1";
        }
    }
    double x = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (s.empty() || ec != std::errc() || end != s.data() + s.size() || !std::isfinite(x)) {
        throw ConfigError(key + ": '" + value + "' is not a finite number");
    }
    return x * scale;
}

double parse_positive(const std::string& key, const std::string& value) {
    const double x = parse_real(key, value);
    if (!(x > 0.0)) {
        throw ConfigError(key + ": must be positive, got '" + value + "'");
    }
    return x;
}

int parse_int(const std::string& key, const std::string& value, int min_value) {
    const std::string s = trim(value);
    int x = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (s.empty() || ec != std::errc() || end != s.data() + s.size()) {
        throw ConfigError(key + ": '" + value + "' is not an integer");
    }
    if (x < min_value) {
        throw ConfigError(key + ": must be >= " + std::to_string(min_value) + ", got " + s);
    }
    return x;
}

bool parse_bool(const std::string& key, const std::string& value) {
    const std::string s = trim(value);
    if (s == "true" || s == "1" || s == "yes") {
        return true;
    }
    if (s == "false" || s == "0" || s == "no") {
        return false;
    }
    throw ConfigError(key + ": '" + value + "' is not a boolean");
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const auto& item : split(value, ',')) {
        out.push_back(parse_positive(key, item));
    }
    return out;
}

/// key = value lines; '#' starts a comment line. `version` is mandatory.
Settings read_config_file(const fs::path& path, const Command& cmd) {
    std::string text;
    try {
        text = io::read_text(path);
    } catch (const IoError& e) {
        throw ConfigError(std::string("config file: ") + e.what());
    }
    Settings out;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const bool known = key == "version" || std::any_of(cmd.keys.begin(), cmd.keys.end(),
                                                            [&](const KeySpec& k) { return k.key == key; });
        if (!known) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": unknown config key '" + key +
                              "' for " + cmd.name);
        }
        if (!out.emplace(key, value).second) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
    }
    const auto v = out.find("version");
    if (v == out.end()) {
        throw ConfigError(path.string() + ": missing 'version' key");
    }
    if (v->second != kConfigVersion) {
        throw ConfigError(path.string() + ": unsupported version '" + v->second + "'");
    }
    out.erase(v);
    return out;
}

/// Flag > environment > config file > default.
Settings resolve(const Command& cmd, const Settings& from_file, const Settings& from_flags) {
    Settings s;
    for (const auto& k : cmd.keys) {
        s[k.key] = k.fallback;
    }
    for (const auto& [k, v] : from_file) {
        s[k] = v;
    }
    if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') {
        s["output_dir"] = dir;
    }
    for (const auto& [k, v] : from_flags) {
        s[k] = v;
    }
    return s;
}

std::string config_hash(const std::string& name, const Settings& s) {
    std::string canon = "command=" + name + "\n";
    for (const auto& [k, v] : s) {
        if (k != "output_dir") {
            canon += k + "=" + v + "\n";
        }
    }
    return io::fnv1a_hex(canon);
}

int thread_count() {
    const char* env = std::getenv(kThreadsEnv);
    if (env == nullptr || *env == '\0') {
        return std::max(1u, std::thread::hardware_concurrency());
    }
    return parse_int(kThreadsEnv, env, 1);
}

// Runs job(i) for i < n on up to `threads` workers; results land by index.
void parallel_for(int n, int threads, const std::function<void(int)>& job) {
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(n);
    auto worker = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                job(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < std::min(threads, n); ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

std::string num(double x) {
    if (x == 0.0) {
        return "0";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string short_num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

class Run {
public:
    Run(std::string name, Settings s, std::ostream& out)
        : name_(std::move(name)), s_(std::move(s)), out_(out), hash_(config_hash(name_, s_)) {
        k_max_ = parse_int("k_max", s_.at("k_max"), 1);
        dir_ = s_.at("output_dir");
    }

    const std::string& get(const std::string& key) const { return s_.at(key); }
    int k_max() const { return k_max_; }
    const std::string& hash() const { return hash_; }
    std::ostream& out() { return out_; }

    std::string header() const { return "# config=" + hash_ + " command=" + name_ + "\n"; }

    void write(const std::string& file, const std::string& content) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) {
            throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
        }
        io::write_atomic(dir_ / file, content);
        written_.push_back(file);
    }

    const std::vector<std::string>& written() const { return written_; }

    TimeGrid grid() const {
        const double t_end = parse_positive("T", get("T"));
        if (s_.count("n_steps") && !get("n_steps").empty()) {
            return TimeGrid(t_end, parse_int("n_steps", get("n_steps"), 1));
        }
        return TimeGrid::with_step(t_end, parse_positive("dt", get("dt")));
    }

private:
    std::string name_;
    Settings s_;
    std::ostream& out_;
    std::string hash_;
    int k_max_ = 0;
    fs::path dir_;
    std::vector<std::string> written_;
};

CouplingProfile parse_alpha(const std::string& text, double horizon) {
    const auto parts = split(text, ':');
    const std::string kind = parts.empty() ? "" : parts[0];
    if (kind == "zero" && parts.size() == 1) {
        return CouplingProfile();
    }
    if (kind == "const" && parts.size() == 2) {
        return CouplingProfile::constant(parse_real("alpha", parts[1]));
    }
    if (kind == "bump" && (parts.size() == 2 || parts.size() == 3)) {
        double t_end = horizon;
        if (parts.size() == 3) {
            const std::string t = parts[2].starts_with("T=") ? parts[2].substr(2) : parts[2];
            t_end = parse_positive("alpha", t);
        }
        return CouplingProfile::sine_bump(parse_real("alpha", parts[1]), t_end);
    }
    if (kind == "pwl" && parts.size() == 2) {
        std::vector<double> times, values;
        for (const auto& pair : split(parts[1], ',')) {
            const auto tv = split(pair, '=');
            if (tv.size() != 2) {
                throw ConfigError("alpha: pwl samples are written <t>=<value>, got '" + pair + "'");
            }
            times.push_back(parse_real("alpha", tv[0]));
            values.push_back(parse_real("alpha", tv[1]));
        }
        return CouplingProfile::piecewise_linear(times, values);
    }
    throw ConfigError("alpha: cannot parse profile '" + text + "'");
}

struct InitialState {
    std::optional<SpectralCoefficients> coefficients;
    std::optional<DomainState> domain;
};

InitialState parse_psi0(const std::string& text, int k_max, const SpectralShift& shift) {
    const auto parts = split(text, ':');
    if (parts.size() == 2 && parts[0] == "eig") {
        return {SpectralCoefficients::unit(parse_int("psi0", parts[1], 1), k_max), std::nullopt};
    }
    if (parts.size() == 2 && parts[0] == "file") {
        return {io::read_state(parts[1]).resized(k_max), std::nullopt};
    }
    if (parts.size() == 4 && parts[0] == "domain") {
        const cplx q(parse_real("psi0", parts[2]), parse_real("psi0", parts[3]));
        return {std::nullopt, DomainState{io::read_state(parts[1]).resized(k_max), q, shift}};
    }
    throw ConfigError("psi0: cannot parse initial state '" + text + "'");
}

int cmd_simulate(Run& run) {
    const TimeGrid grid = run.grid();
    const int k_max = run.k_max();
    const SpectralShift shift(parse_real("shift", run.get("shift")));
    const auto alpha = parse_alpha(run.get("alpha"), grid.t_end());
    const int stride = parse_int("store_stride", run.get("store_stride"), 0);
    const double tol_norm = parse_positive("tol_norm", run.get("tol_norm"));
    const double tol_residual = parse_positive("tol_residual", run.get("tol_residual"));
    const double tol_energy = parse_positive("tol_energy", run.get("tol_energy"));
    const double tol_balance = parse_positive("tol_balance", run.get("tol_balance"));
    const auto psi0 = parse_psi0(run.get("psi0"), k_max, shift);

    const EvolutionResult result = psi0.domain ? evolve(*psi0.domain, alpha, grid, k_max, stride)
                                               : evolve(*psi0.coefficients, alpha, grid, k_max, stride, shift);
    const DiagnosticsReport d = diagnostics(result, alpha);

    std::string meta = "# dt=" + num(grid.dt()) + " k_max=" + std::to_string(k_max) +
                       " alpha=" + alpha.descriptor() + "\n";
    std::string charge = run.header() + meta + "t,re_q,im_q\n";
    std::string traj = run.header() + meta + "t,norm,energy,re_origin,im_origin\n";
    for (int n = 0; n < grid.size(); ++n) {
        const cplx q = result.charge.q[n];
        charge += num(grid.t(n)) + "," + num(q.real()) + "," + num(q.imag()) + "\n";
        traj += num(grid.t(n)) + "," + num(result.norm[n]) + "," + num(result.energy[n]) + "," +
                num(result.origin[n].real()) + "," + num(result.origin[n].imag()) + "\n";
    }
    run.write("charge.csv", charge);
    run.write("trajectory.csv", traj);
    run.write("final_state.csv",
              io::format_state(result.final_state(), "config=" + run.hash() + " t=" + num(grid.t_end())));

    // Energy is conserved only while alpha is constant; otherwise check the balance law.
    const bool constant = alpha.kind() == ProfileKind::constant;
    struct Row {
        std::string name;
        double value;
        double tol;
        bool checked;
    };
    const std::vector<Row> rows{{"norm_drift", d.norm_drift, tol_norm, true},
                                {"boundary_residual", d.boundary_residual, tol_residual, true},
                                {"energy_drift", d.energy_drift, tol_energy, constant},
                                {"energy_balance_error", d.energy_balance_error, tol_balance, !constant}};
    std::string diag = run.header() + "name,value,tolerance,passed\n";
    json jd = json::object();
    bool passed = true;
    for (const auto& r : rows) {
        const bool ok = !r.checked || r.value <= r.tol;
        passed = passed && ok;
        diag += r.name + "," + num(r.value) + "," + (r.checked ? num(r.tol) : "") + "," + (ok ? "true" : "false") +
                "\n";
        jd[r.name] = {{"value", r.value}, {"tolerance", r.checked ? json(r.tol) : json(nullptr)}, {"passed", ok}};
        run.out() << (ok ? "ok   " : "FAIL ") << r.name << " = " << short_num(r.value)
                  << (r.checked ? " (tol " + short_num(r.tol) + ")" : " (not checked)") << "\n";
    }
    run.write("diagnostics.csv", diag);

    json manifest;
    manifest["version"] = 1;
    manifest["command"] = "simulate";
    manifest["config_hash"] = run.hash();
    manifest["inputs"] = {{"alpha", alpha.descriptor()}, {"psi0", run.get("psi0")},
                          {"T", grid.t_end()},           {"n_steps", grid.n_steps()},
                          {"dt", grid.dt()},             {"k_max", k_max},
                          {"shift", shift.value().real()}};
    auto outputs = run.written();
    outputs.push_back("manifest.json");
    manifest["outputs"] = outputs;
    manifest["diagnostics"] = jd;
    manifest["passed"] = passed;
    run.write("manifest.json", manifest.dump(2) + "\n");
    return passed ? exit_ok : exit_solver;
}

int cmd_spectrum(Run& run) {
    const double alpha = parse_real("alpha", run.get("alpha"));
    const EnergyWindow window{parse_real("e_min", run.get("e_min")), parse_real("e_max", run.get("e_max"))};
    if (!(window.lo < window.hi)) {
        throw ConfigError("e_min must be below e_max");
    }
    const auto levels = static_spectrum(alpha, window, run.k_max());
    std::string csv = run.header() + "# alpha=" + num(alpha) + " k_max=" + std::to_string(run.k_max()) + "\n";
    csv += "E,sector\n";
    for (const auto& e : levels) {
        csv += num(e.energy) + "," + (e.sector == Sector::even ? "even" : "odd") + "\n";
    }
    run.write("spectrum.csv", csv);
    run.out() << levels.size() << " levels in (" << window.lo << ", " << window.hi << ")\n";
    return exit_ok;
}

int cmd_green(Run& run) {
    const double x_prime = parse_real("x_prime", run.get("x_prime"));
    const cplx z(parse_real("z_re", run.get("z_re")), parse_real("z_im", run.get("z_im")));
    const int points = parse_int("points", run.get("points"), 2);
    std::string csv = run.header() + "# x_prime=" + num(x_prime) + " z=" + num(z.real()) + "," + num(z.imag()) +
                      " k_max=" + std::to_string(run.k_max()) + "\n";
    csv += "x,re_closed,im_closed,re_series,im_series\n";
    double worst = 0.0;
    for (int j = 0; j < points; ++j) {
        const double x = j == points - 1 ? kPi : -kPi + 2.0 * kPi * j / (points - 1);
        const cplx g = green_closed(x, x_prime, z);
        const cplx s = green_series(x, x_prime, z, run.k_max());
        worst = std::max(worst, std::abs(g - s));
        csv += num(x) + "," + num(g.real()) + "," + num(g.imag()) + "," + num(s.real()) + "," + num(s.imag()) + "\n";
    }
    run.write("green.csv", csv);
    run.out() << "G(0,0) = " << num(green_origin(z).real()) << (green_origin(z).imag() < 0 ? "" : "+")
              << num(green_origin(z).imag()) << "i, max |closed - series| = " << short_num(worst) << "\n";
    return exit_ok;
}

int cmd_control(Run& run) {
    if (run.get("target").empty()) {
        throw ConfigError("target: control needs a coefficient table");
    }
    const int k_max = run.k_max();
    const double t_end = parse_positive("T", run.get("T"));
    const TimeGrid grid = TimeGrid::with_step(t_end, parse_positive("dt", run.get("dt")));
    const int k_bar = parse_int("k_bar", run.get("k_bar"), 1);
    const double tol = parse_positive("tol_residual", run.get("tol_residual"));
    const ControlTarget target{io::parse_coefficient_table(io::read_text(run.get("target")), k_max), t_end};

    const auto u = synthesize_control(target, k_bar, grid);
    const double residual = moment_residual(solve_moment(target, grid), target);
    std::string csv = run.header() + "# k_bar=" + std::to_string(k_bar) + " T=" + num(t_end) +
                      " dt=" + num(grid.dt()) + "\n";
    csv += "t,re_u,im_u\n";
    for (int n = 0; n < grid.size(); ++n) {
        csv += num(grid.t(n)) + "," + num(u.u[n].real()) + "," + num(u.u[n].imag()) + "\n";
    }
    run.write("control.csv", csv);

    json report;
    report["config_hash"] = run.hash();
    report["moment_residual"] = {{"value", residual}, {"tolerance", tol}, {"passed", residual <= tol}};
    report["realness_defect"] = u.realness_defect;
    run.out() << "moment residual " << short_num(residual) << ", realness defect " << short_num(u.realness_defect)
              << "\n";
    if (parse_bool("experiment", run.get("experiment"))) {
        const double norm = target.c.norm();
        if (norm == 0.0) {
            throw ConfigError("target: the steering experiment needs a nonzero target");
        }
        const ControlTarget direction{(1.0 / norm) * target.c, t_end};
        const auto rep = controllability_experiment(k_bar, parse_list("epsilons", run.get("epsilons")), direction,
                                                    grid, k_max);
        json points = json::array();
        for (const auto& p : rep.points) {
            points.push_back(
                {{"epsilon", p.epsilon}, {"remainder", p.remainder}, {"displacement_error", p.displacement_error}});
        }
        json collisions = json::array();
        for (const auto& [k, j] : rep.collisions) {
            collisions.push_back({k, j});
        }
        report["experiment"] = {{"direction_norm", norm},        {"slope", rep.slope},
                                {"linear_norm", rep.linear_norm}, {"points", points},
                                {"collisions", collisions}};
        run.out() << "remainder slope " << rep.slope << " over " << rep.points.size() << " amplitudes, "
                  << rep.collisions.size() << " frequency collisions\n";
    }
    run.write("control_report.json", report.dump(2) + "\n");
    return residual <= tol ? exit_ok : exit_solver;
}

struct Check {
    std::string module;
    std::string name;
    std::function<double()> measure;
    double tol;
};

std::vector<Check> verify_checks(int k_max, unsigned seed) {
    const int small = std::min(k_max, 32);
    std::vector<Check> checks;
    checks.push_back({"spectral", "orthonormality",
                      [=] {
                          double worst = 0.0;
                          for (int j = 1; j <= small; ++j) {
                              const auto c = project_function(
                                  [j](double x) { return cplx(eigenmode_value(ModeIndex(j), x)); }, small, 1024);
                              for (int k = 1; k <= small; ++k) {
                                  worst = std::max(worst, std::abs(c[k] - (j == k ? 1.0 : 0.0)));
                              }
                          }
                          return worst;
                      },
                      1e-10});
    checks.push_back({"spectral", "free_evolution_unitary",
                      [=] {
                          std::mt19937_64 rng(seed);
                          std::normal_distribution<double> g;
                          Eigen::VectorXcd a(k_max);
                          for (auto& v : a) {
                              v = cplx(g(rng), g(rng));
                          }
                          const SpectralCoefficients c(a);
                          return std::abs(free_evolve(c, 3.7).norm() - c.norm()) / c.norm();
                      },
                      1e-14});
    checks.push_back({"greens", "closed_vs_series",
                      [=] {
                          double worst = 0.0;
                          for (const auto& [x, y] : {std::pair{1.0, 0.5}, {-2.0, 0.3}, {0.7, -1.1}}) {
                              for (const cplx z : {cplx(1.0), cplx(2.0, 1.0)}) {
                                  worst = std::max(worst, std::abs(green_closed(x, y, z) - green_series(x, y, z, k_max)));
                              }
                          }
                          return worst;
                      },
                      1e-4});
    checks.push_back({"greens", "origin_tail",
                      [=] { return std::abs(green_series(0.0, 0.0, 1.0, k_max) - std::tanh(kPi) / 2.0); }, 2e-3});
    checks.push_back({"greens", "symmetry",
                      [=] {
                          std::mt19937_64 rng(seed);
                          std::uniform_real_distribution<double> u(-kPi, kPi);
                          double worst = 0.0;
                          for (int i = 0; i < 50; ++i) {
                              const double x = u(rng), y = u(rng);
                              const cplx z(u(rng) + 4.0, u(rng));
                              worst = std::max(worst, std::abs(green_closed(x, y, z) - green_closed(y, x, z)));
                          }
                          return worst;
                      },
                      1e-14});
    checks.push_back({"greens", "spectrum_roots",
                      [=] {
                          double worst = 0.0;
                          for (double a : {-2.0, 0.5, 2.0}) {
                              for (const auto& e : static_spectrum(a, {-50.0, 30.0}, k_max)) {
                                  if (e.sector == Sector::even) {
                                      worst = std::max(worst, std::abs(even_sector_condition(a, e.energy)));
                                  }
                              }
                          }
                          return worst;
                      },
                      1e-8});
    checks.push_back({"charge", "decoupled_sine_mode",
                      [=] {
                          const TimeGrid grid(2.0, 2000);
                          const auto psi = SpectralCoefficients::unit(2, std::max(k_max, 2));
                          return solve_charge(CouplingProfile::sine_bump(0.5, 2.0), psi, grid, k_max)
                              .q.cwiseAbs()
                              .maxCoeff();
                      },
                      0.0});
    checks.push_back({"charge", "initial_value",
                      [=] {
                          const TimeGrid grid(1.0, 100);
                          const auto q = solve_charge(CouplingProfile::constant(0.1), SpectralCoefficients::unit(1, k_max),
                                                      grid, k_max);
                          return std::abs(q.q[0] + 0.1 / kSqrtPi);
                      },
                      1e-15});
    checks.push_back({"charge", "truncation",
                      [=] {
                          const TimeGrid grid(2.0, 2000);
                          const auto alpha = CouplingProfile::sine_bump(0.5, 2.0);
                          const auto q1 = solve_charge(alpha, SpectralCoefficients::unit(1, k_max), grid, k_max).q;
                          const int k2 = 2 * k_max + 1;
                          const auto q2 = solve_charge(alpha, SpectralCoefficients::unit(1, k2), grid, k2).q;
                          return (q1 - q2).cwiseAbs().maxCoeff();
                      },
                      1e-5});
    const auto bump_run = [=] {
        const auto alpha = CouplingProfile::sine_bump(1.0, 2.0);
        return diagnostics(evolve(SpectralCoefficients::unit(1, k_max), alpha, TimeGrid(2.0, 2000), k_max, 0), alpha);
    };
    checks.push_back({"propagator", "unitarity", [=] { return bump_run().norm_drift; }, 1e-6});
    checks.push_back({"propagator", "boundary_condition", [=] { return bump_run().boundary_residual; }, 1e-6});
    checks.push_back({"propagator", "energy_balance", [=] { return bump_run().energy_balance_error; }, 1e-2});
    checks.push_back({"control", "moment_residual",
                      [=] {
                          const ControlTarget t{SpectralCoefficients::unit(1, k_max), 8.0 * kPi};
                          return moment_residual(solve_moment(t, TimeGrid::with_step(8.0 * kPi, 1e-3)), t);
                      },
                      1e-8});
    checks.push_back({"control", "linearized_recovery",
                      [=] {
                          const ControlTarget t{SpectralCoefficients::unit(1, k_max), 8.0 * kPi};
                          const auto grid = TimeGrid::with_step(8.0 * kPi, 1e-3);
                          const auto u = synthesize_control(t, 1, grid);
                          const auto d = apply_linearized(CouplingProfile(), u.u, SpectralCoefficients::unit(1, k_max),
                                                          grid, k_max);
                          return (d - t.c).norm();
                      },
                      1e-5});
    return checks;
}

int cmd_verify(Run& run) {
    const std::string filter = run.get("filter");
    const unsigned seed = static_cast<unsigned>(parse_int("seed", run.get("seed"), 0));
    auto checks = verify_checks(run.k_max(), seed);
    if (!filter.empty()) {
        std::erase_if(checks, [&](const Check& c) { return c.module != filter; });
        if (checks.empty()) {
            throw ConfigError("filter: no checks in module '" + filter + "'");
        }
    }
    json rows = json::array();
    bool all = true;
    for (const auto& c : checks) {
        double measured = 0.0;
        std::string error;
        try {
            measured = c.measure();
        } catch (const std::exception& e) {
            error = e.what();
        }
        const bool ok = error.empty() && std::isfinite(measured) && measured <= c.tol;
        all = all && ok;
        json row = {{"module", c.module}, {"name", c.name}, {"tolerance", c.tol}, {"passed", ok}};
        if (error.empty()) {
            row["measured"] = measured;
        } else {
            row["error"] = error;
        }
        rows.push_back(row);
        run.out() << (ok ? "PASS " : "FAIL ") << c.module << "." << c.name << " measured="
                  << (error.empty() ? short_num(measured) : "error: " + error) << " tol=" << short_num(c.tol) << "\n";
    }
    json report = {{"config_hash", run.hash()}, {"k_max", run.k_max()}, {"checks", rows}, {"passed", all}};
    run.write("verify.json", report.dump(2) + "\n");
    return all ? exit_ok : exit_solver;
}

int cmd_sweep(Run& run) {
    const std::string kind = run.get("kind");
    std::vector<int> levels;
    for (const auto& item : split(run.get("levels"), ',')) {
        levels.push_back(parse_int("levels", item, 1));
    }
    if (levels.size() < 3) {
        throw ConfigError("levels: a sweep needs at least 3 refinement levels, got " + std::to_string(levels.size()));
    }
    std::sort(levels.begin(), levels.end());
    if (std::adjacent_find(levels.begin(), levels.end()) != levels.end()) {
        throw ConfigError("levels: refinement levels must be distinct");
    }
    const int n = static_cast<int>(levels.size());
    std::vector<double> h(n), err(n);
    double min_slope = 0.0;
    const int threads = thread_count();

    if (kind == "charge_dt") {
        min_slope = run.get("min_slope").empty() ? 1.9 : parse_positive("min_slope", run.get("min_slope"));
        const double t_end = parse_positive("T", run.get("T"));
        const auto alpha = parse_alpha(run.get("alpha"), t_end);
        const int k_max = run.k_max();
        const auto psi = parse_psi0(run.get("psi0"), k_max, SpectralShift());
        if (!psi.coefficients) {
            throw ConfigError("psi0: the dt sweep takes eig: or file: states");
        }
        // Self-convergence against a run four times finer than the finest level.
        const int finest = 4 * levels.back();
        for (int l : levels) {
            if (finest % l != 0) {
                throw ConfigError("levels: " + std::to_string(l) + " does not divide the reference " +
                                  std::to_string(finest));
            }
        }
        std::vector<Eigen::VectorXcd> q(n + 1);
        parallel_for(n + 1, threads, [&](int i) {
            const int steps = i == n ? finest : levels[i];
            q[i] = solve_charge(alpha, *psi.coefficients, TimeGrid(t_end, steps), k_max).q;
        });
        for (int i = 0; i < n; ++i) {
            const int ratio = finest / levels[i];
            double e = 0.0;
            for (int m = 0; m <= levels[i]; ++m) {
                e = std::max(e, std::abs(q[i][m] - q[n][ratio * m]));
            }
            h[i] = t_end / levels[i];
            err[i] = e;
        }
    } else if (kind == "green_kmax") {
        min_slope = run.get("min_slope").empty() ? 0.9 : parse_positive("min_slope", run.get("min_slope"));
        const cplx exact = green_origin(1.0);
        parallel_for(n, threads, [&](int i) {
            h[i] = 1.0 / levels[i];
            err[i] = std::abs(green_series(0.0, 0.0, 1.0, levels[i]) - exact);
        });
    } else {
        throw ConfigError("kind: unknown sweep '" + kind + "'");
    }

    const double slope = loglog_slope(h, err);
    const bool ok = slope >= min_slope;
    std::string csv = run.header() + "# kind=" + kind + " slope=" + num(slope) + " min_slope=" + num(min_slope) + "\n";
    csv += "level,h,error\n";
    for (int i = 0; i < n; ++i) {
        csv += std::to_string(levels[i]) + "," + num(h[i]) + "," + num(err[i]) + "\n";
        run.out() << levels[i] << "  h=" << short_num(h[i]) << "  error=" << short_num(err[i]) << "\n";
    }
    run.write("sweep.csv", csv);
    run.out() << "slope " << slope << " (min " << min_slope << ") " << (ok ? "PASS" : "FAIL") << "\n";
    return ok ? exit_ok : exit_solver;
}

int dispatch(const std::string& name, Run& run) {
    if (name == "simulate") {
        return cmd_simulate(run);
    }
    if (name == "spectrum") {
        return cmd_spectrum(run);
    }
    if (name == "green") {
        return cmd_green(run);
    }
    if (name == "control") {
        return cmd_control(run);
    }
    if (name == "verify") {
        return cmd_verify(run);
    }
    return cmd_sweep(run);
}

std::string flag_name(const std::string& key) {
    std::string f = key;
    std::replace(f.begin(), f.end(), '_', '-');
    return "--" + f;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Particle in [-pi, pi] with a time-dependent delta at the origin"};
    app.require_subcommand(1);
    std::map<std::string, std::map<std::string, std::string>> flags;
    std::map<std::string, std::string> config_paths;
    for (const auto& cmd : commands()) {
        auto* sub = app.add_subcommand(cmd.name, cmd.help);
        sub->add_option("--config", config_paths[cmd.name], "key = value file with a version key");
        for (const auto& k : cmd.keys) {
            std::string help = k.help;
            if (!k.fallback.empty()) {
                help += " [" + k.fallback + "]";
            }
            sub->add_option(flag_name(k.key), flags[cmd.name][k.key], help);
        }
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) {
        reversed.pop_back();
    }
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? exit_ok : exit_config;
    }

    const auto* sub = app.get_subcommands().front();
    const Command& cmd = command(sub->get_name());
    try {
        Settings given;
        for (const auto& k : cmd.keys) {
            if (sub->get_option(flag_name(k.key))->count() > 0) {
                given[k.key] = flags[cmd.name][k.key];
            }
        }
        Settings from_file;
        if (!config_paths[cmd.name].empty()) {
            from_file = read_config_file(config_paths[cmd.name], cmd);
        }
        Run r(cmd.name, resolve(cmd, from_file, given), out);
        return dispatch(cmd.name, r);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << "\n";
        return exit_io;
    } catch (const fs::filesystem_error& e) {
        err << "i/o error: " << e.what() << "\n";
        return exit_io;
    } catch (const SingularityError& e) {
        err << "solver error: " << e.what() << "\n";
        return exit_solver;
    } catch (const std::invalid_argument& e) {
        err << "invalid input: " << e.what() << "\n";
        return exit_config;
    } catch (const std::domain_error& e) {
        err << "invalid input: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        err << "solver error: " << e.what() << "\n";
        return exit_solver;
    }
}

int run(int argc, char** argv) {
    return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

} // namespace deltabox::cli
