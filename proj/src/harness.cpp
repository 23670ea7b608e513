#include "kswave/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "kswave/analysis.hpp"
#include "kswave/error.hpp"
#include "kswave/spectral.hpp"

namespace kswave {

namespace fs = std::filesystem;

std::string format_double(double value)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::string to_string(Mode mode)
{
    switch (mode) {
    case Mode::Simulate: return "simulate";
    case Mode::Eig: return "eig";
    case Mode::Regime: return "regime";
    case Mode::Verify: return "verify";
    case Mode::Sweep: return "sweep";
    }
    return "simulate";
}

Mode parse_mode(const std::string& text)
{
    static const std::map<std::string, Mode> modes{{"simulate", Mode::Simulate},
                                                   {"eig", Mode::Eig},
                                                   {"regime", Mode::Regime},
                                                   {"verify", Mode::Verify},
                                                   {"sweep", Mode::Sweep}};
    const auto it = modes.find(text);
    if (it == modes.end()) throw ValidationError("unknown mode '" + text + "'");
    return it->second;
}

std::vector<double> SweepAxis::values() const
{
    if (count == 1) return {min};
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        // Exact endpoints; interior points by the convex combination.
        const double w = static_cast<double>(i) / static_cast<double>(count - 1);
        out[i] = i + 1 == count ? max : min + w * (max - min);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(trim(std::string_view(s).substr(start, pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return parts;
}

double to_double(const std::string& s)
{
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && s[0] == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last || s.empty()) {
        throw ValidationError("'" + s + "' is not a number");
    }
    return v;
}

std::uint64_t to_unsigned(const std::string& s)
{
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) {
        throw ValidationError("'" + s + "' is not a nonnegative integer");
    }
    return v;
}

bool to_bool(const std::string& s)
{
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ValidationError("'" + s + "' is not a boolean");
}

std::vector<double> to_list(const std::string& s)
{
    std::vector<double> out;
    if (s.empty()) return out;
    for (const auto& part : split(s, ',')) out.push_back(to_double(part));
    return out;
}

std::vector<Breakpoint> to_breakpoints(const std::string& s)
{
    std::vector<Breakpoint> out;
    if (s.empty()) return out;
    for (const auto& part : split(s, ',')) {
        const auto xy = split(part, ':');
        if (xy.size() != 2) throw ValidationError("breakpoint '" + part + "' is not x:value");
        out.push_back({to_double(xy[0]), to_double(xy[1])});
    }
    return out;
}

SweepAxis to_axis(const std::string& s)
{
    const auto parts = split(s, ':');
    if (parts.size() != 3) throw ValidationError("sweep axis must be min:max:count");
    SweepAxis axis{to_double(parts[0]), to_double(parts[1]),
                   static_cast<std::size_t>(to_unsigned(parts[2]))};
    if (axis.count == 0) throw ValidationError("sweep axis count must be positive");
    if (axis.count == 1 && axis.min != axis.max) throw ValidationError("a 1-point axis needs min == max");
    if (axis.count >= 2 && !(axis.min < axis.max)) throw ValidationError("sweep axis needs min < max");
    return axis;
}

std::string join(const std::vector<double>& xs)
{
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ",";
        out += format_double(xs[i]);
    }
    return out;
}

std::string join(std::span<const Breakpoint> pts)
{
    std::string out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) out += ",";
        out += format_double(pts[i].x) + ":" + format_double(pts[i].value);
    }
    return out;
}

std::string render_axis(const SweepAxis& a)
{
    return format_double(a.min) + ":" + format_double(a.max) + ":" + std::to_string(a.count);
}

}  // namespace

RunSpec parse_config_unchecked(std::string_view text)
{
    RunSpec spec;
    std::set<std::string> seen;
    bool have_profile = false;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view raw = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        const auto hash = raw.find('#');
        if (hash != std::string_view::npos) raw = raw.substr(0, hash);
        const std::string line = trim(raw);
        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }
        const auto eq = line.find('=');
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (eq == std::string::npos) throw ValidationError(where + "expected key = value");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw ValidationError(where + "missing key");
        if (!seen.insert(key).second) throw ValidationError(where + "duplicate key '" + key + "'");

        try {
            if (key == "mode") spec.mode = parse_mode(value);
            else if (key == "chi") spec.params.chi = to_double(value);
            else if (key == "mu") spec.params.mu = to_double(value);
            else if (key == "nu") spec.params.nu = to_double(value);
            else if (key == "b") spec.params.b = to_double(value);
            else if (key == "c") spec.params.c = to_double(value);
            else if (key == "L") spec.L = to_double(value);
            else if (key == "h") spec.h = to_double(value);
            else if (key == "tau") spec.tau = to_double(value);
            else if (key == "T") spec.T = to_double(value);
            else if (key == "bc") spec.bc = parse_boundary_case(value);
            else if (key == "neumann_closure") {
                if (value == "first") spec.closure = NeumannClosure::FirstOrder;
                else if (value == "second") spec.closure = NeumannClosure::SecondOrder;
                else throw ValidationError("expected first or second");
            } else if (key == "profile") {
                spec.profile = GrowthProfile(to_breakpoints(value));
                have_profile = true;
            } else if (key == "u0") {
                if (seen.count("u0_bump")) throw ValidationError("u0 and u0_bump are exclusive");
                spec.u0 = InitialCondition::piecewise_linear(to_breakpoints(value));
            } else if (key == "u0_bump") {
                if (seen.count("u0")) throw ValidationError("u0 and u0_bump are exclusive");
                const auto p = split(value, ':');
                if (p.size() != 3) throw ValidationError("expected left:right:peak");
                spec.u0 = InitialCondition::bump(to_double(p[0]), to_double(p[1]), to_double(p[2]));
            } else if (key == "snapshot_times") spec.snapshot_times = to_list(value);
            else if (key == "conv_window") spec.conv_window = to_double(value);
            else if (key == "conv_tol") spec.conv_tol = to_double(value);
            else if (key == "extinct_tol") spec.extinct_tol = to_double(value);
            else if (key == "plateau_rel_tol") spec.plateau_rel_tol = to_double(value);
            else if (key == "allow_unstable") spec.allow_unstable = to_bool(value);
            else if (key == "out") spec.out = value;
            else if (key == "eig_L") spec.eig_L = to_list(value);
            else if (key == "eig_h") spec.eig_h = to_double(value);
            else if (key == "lambda_tol") spec.lambda_tol = to_double(value);
            else if (key == "epsilons") spec.epsilons = to_list(value);
            else if (key == "envelope_epsilon") spec.envelope_epsilon = to_double(value);
            else if (key == "samples") spec.samples = static_cast<std::size_t>(to_unsigned(value));
            else if (key == "seed") spec.seed = to_unsigned(value);
            else if (key == "r1") spec.r1 = to_double(value);
            else if (key == "rbar") spec.rbar = to_double(value);
            else if (key == "sweep_b") spec.sweep_b = to_axis(value);
            else if (key == "sweep_c") spec.sweep_c = to_axis(value);
            else if (key == "sweep_chi") spec.sweep_chi = to_axis(value);
            else if (key == "horizon_scale") spec.horizon_scale = to_double(value);
            else if (key == "threads") spec.threads = static_cast<unsigned>(to_unsigned(value));
            else throw ValidationError("unknown key");
        } catch (const ValidationError& err) {
            throw ValidationError(where + key + ": " + err.what());
        }
        if (end == text.size()) break;
    }
    if (!have_profile) throw ValidationError("profile: missing (at least two breakpoints required)");
    return spec;
}

void RunSpec::validate() const
{
    auto check = [](bool ok, const std::string& key, const std::string& msg) {
        if (!ok) throw ValidationError(key + ": " + msg);
    };
    try {
        params.validate();
    } catch (const ValidationError& err) {
        throw ValidationError(std::string("chi/mu/nu/b: ") + err.what());
    }
    check(std::isfinite(params.c), "c", "must be finite");
    check(L > 0.0, "L", "must be positive");
    check(h > 0.0, "h", "must be positive");
    try {
        (void)grid();
    } catch (const ValidationError& err) {
        throw ValidationError(std::string("L/h: ") + err.what());
    }
    check(tau > 0.0, "tau", "must be positive");
    check(T >= tau, "T", "must be at least tau");
    check(allow_unstable || cfl_check(h, tau), "tau",
          "CFL violated: tau/h^2 = " + format_double(tau / (h * h)) + " > 1/2 (set allow_unstable = true to override)");
    for (double t : snapshot_times) check(t >= 0.0 && t <= T, "snapshot_times", "times must lie in [0, T]");
    check(conv_window > 0.0, "conv_window", "must be positive");
    check(conv_tol > 0.0, "conv_tol", "must be positive");
    check(extinct_tol > 0.0, "extinct_tol", "must be positive");
    check(plateau_rel_tol > 0.0, "plateau_rel_tol", "must be positive");
    check(eig_h > 0.0, "eig_h", "must be positive");
    check(lambda_tol > 0.0, "lambda_tol", "must be positive");
    for (double l : eig_L) check(l > 0.0, "eig_L", "lengths must be positive");
    for (double e : epsilons) check(e > 0.0, "epsilons", "must be positive");
    check(envelope_epsilon > 0.0, "envelope_epsilon", "must be positive");
    check(samples > 0, "samples", "must be positive");
    check(horizon_scale > 0.0, "horizon_scale", "must be positive");
    if (mode == Mode::Simulate || mode == Mode::Sweep) {
        check(u0.has_value(), "u0", "simulate and sweep need u0 or u0_bump");
    }
    if (mode == Mode::Sweep) {
        check(sweep_b || sweep_c || sweep_chi, "sweep_c", "sweep mode needs at least one axis");
    }
    try {
        (void)run_config().window_steps();
        (void)run_config().total_steps();
    } catch (const ValidationError& err) {
        throw ValidationError(std::string("T/conv_window: ") + err.what());
    }
}

Grid RunSpec::grid() const { return Grid(L, h); }

RunConfig RunSpec::run_config() const
{
    RunConfig cfg = RunConfig::make(params, profile, grid(), bc, tau, T);
    cfg.closure = closure;
    cfg.snapshot_times = snapshot_times;
    cfg.conv_window = conv_window;
    cfg.conv_tol = conv_tol;
    cfg.extinct_tol = extinct_tol;
    cfg.plateau_rel_tol = plateau_rel_tol;
    cfg.allow_unstable = allow_unstable;
    return cfg;
}

RunSpec parse_config(std::string_view text)
{
    RunSpec spec = parse_config_unchecked(text);
    spec.validate();
    return spec;
}

RunSpec load_config(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string render_config(const RunSpec& s)
{
    std::ostringstream o;
    auto kv = [&](const char* key, const std::string& value) { o << key << " = " << value << "\n"; };
    kv("mode", to_string(s.mode));
    kv("chi", format_double(s.params.chi));
    kv("mu", format_double(s.params.mu));
    kv("nu", format_double(s.params.nu));
    kv("b", format_double(s.params.b));
    kv("c", format_double(s.params.c));
    kv("L", format_double(s.L));
    kv("h", format_double(s.h));
    kv("tau", format_double(s.tau));
    kv("T", format_double(s.T));
    kv("bc", to_string(s.bc));
    kv("neumann_closure", s.closure == NeumannClosure::FirstOrder ? "first" : "second");
    kv("profile", join(s.profile.breakpoints()));
    if (s.u0) {
        if (s.u0->kind == InitialCondition::Kind::Bump) {
            kv("u0_bump", format_double(s.u0->bump_left) + ":" + format_double(s.u0->bump_right) + ":" +
                              format_double(s.u0->bump_peak));
        } else {
            kv("u0", join(s.u0->linear.breakpoints()));
        }
    }
    kv("snapshot_times", join(s.snapshot_times));
    kv("conv_window", format_double(s.conv_window));
    kv("conv_tol", format_double(s.conv_tol));
    kv("extinct_tol", format_double(s.extinct_tol));
    kv("plateau_rel_tol", format_double(s.plateau_rel_tol));
    kv("allow_unstable", s.allow_unstable ? "true" : "false");
    kv("out", s.out);
    kv("eig_L", join(s.eig_L));
    kv("eig_h", format_double(s.eig_h));
    kv("lambda_tol", format_double(s.lambda_tol));
    kv("epsilons", join(s.epsilons));
    kv("envelope_epsilon", format_double(s.envelope_epsilon));
    kv("samples", std::to_string(s.samples));
    kv("seed", std::to_string(s.seed));
    if (s.r1) kv("r1", format_double(*s.r1));
    if (s.rbar) kv("rbar", format_double(*s.rbar));
    if (s.sweep_b) kv("sweep_b", render_axis(*s.sweep_b));
    if (s.sweep_c) kv("sweep_c", render_axis(*s.sweep_c));
    if (s.sweep_chi) kv("sweep_chi", render_axis(*s.sweep_chi));
    kv("horizon_scale", format_double(s.horizon_scale));
    kv("threads", std::to_string(s.threads));
    return o.str();
}

// ---------------------------------------------------------------------------
// Sweeps

std::string sweep_csv_header() { return "b,c,chi,outcome,plateau,final_sup_u"; }

std::string sweep_csv_row(const SweepRow& r)
{
    return format_double(r.b) + "," + format_double(r.c) + "," + format_double(r.chi) + "," + r.outcome + "," +
           (r.plateau ? format_double(*r.plateau) : "") + "," +
           (r.final_sup_u ? format_double(*r.final_sup_u) : "");
}

namespace {

SweepRow run_point(const RunSpec& base, double b, double c, double chi)
{
    SweepRow row{b, c, chi, "", std::nullopt, std::nullopt};
    if (!(b > chi * base.params.mu)) {
        row.outcome = "skipped";
        return row;
    }
    try {
        RunSpec spec = base;
        spec.params.b = b;
        spec.params.c = c;
        spec.params.chi = chi;
        // Keep the horizon on the time grid.
        spec.T = std::round(base.T * base.horizon_scale / base.tau) * base.tau;
        spec.snapshot_times.clear();
        const RunResult res = run(spec.run_config(), sample(*spec.u0, spec.grid()));
        if (res.fault) {
            row.outcome = "error";
            return row;
        }
        row.outcome = to_string(res.outcome.tag);
        row.plateau = res.outcome.plateau;
        row.final_sup_u = res.outcome.final_sup_u;
    } catch (const std::exception&) {
        row.outcome = "error";
    }
    return row;
}

}  // namespace

std::vector<SweepRow> sweep(const RunSpec& spec, const std::function<void(const SweepRow&)>& on_row)
{
    const std::vector<double> bs = spec.sweep_b ? spec.sweep_b->values() : std::vector<double>{spec.params.b};
    const std::vector<double> cs = spec.sweep_c ? spec.sweep_c->values() : std::vector<double>{spec.params.c};
    const std::vector<double> chis =
        spec.sweep_chi ? spec.sweep_chi->values() : std::vector<double>{spec.params.chi};
    if (!spec.u0) throw ValidationError("u0: sweep needs an initial condition");

    struct Point {
        double b, c, chi;
    };
    std::vector<Point> points;
    for (double b : bs)
        for (double c : cs)
            for (double chi : chis) points.push_back({b, c, chi});

    std::vector<std::optional<SweepRow>> done(points.size());
    std::mutex mtx;
    std::condition_variable cv;
    std::atomic<std::size_t> next{0};

    unsigned workers = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, points.size()));
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < points.size(); k = next++) {
                SweepRow row = run_point(spec, points[k].b, points[k].c, points[k].chi);
                {
                    std::lock_guard lock(mtx);
                    done[k] = std::move(row);
                }
                cv.notify_one();
            }
        });
    }

    std::vector<SweepRow> rows;
    rows.reserve(points.size());
    for (std::size_t k = 0; k < points.size(); ++k) {
        std::unique_lock lock(mtx);
        cv.wait(lock, [&] { return done[k].has_value(); });
        SweepRow row = *done[k];
        lock.unlock();
        if (on_row) on_row(row);
        rows.push_back(std::move(row));
    }
    for (auto& t : pool) t.join();
    return rows;
}

std::optional<double> transition_speed(const std::vector<SweepRow>& rows)
{
    std::optional<double> ext;
    for (const auto& r : rows) {
        if (r.outcome == "extinction" && (!ext || r.c > *ext)) ext = r.c;
    }
    if (!ext) return std::nullopt;
    std::optional<double> wave;
    for (const auto& r : rows) {
        const bool forced = r.outcome == "forced_wave_case1" || r.outcome == "forced_wave_case2";
        if (forced && r.c > *ext && (!wave || r.c < *wave)) wave = r.c;
    }
    if (!wave) return std::nullopt;
    return 0.5 * (*ext + *wave);
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

std::string timestamp_now()
{
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream o;
    o << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return o.str();
}

class Writer {
public:
    Writer(ArtifactBundle& bundle, const fs::path& name)
        : path_(bundle.dir / name), out_(path_)
    {
        if (!out_) throw ValidationError("cannot write " + path_.string());
        bundle.files.push_back(path_);
    }
    std::ofstream& operator*() { return out_; }
    std::ofstream* operator->() { return &out_; }

private:
    fs::path path_;
    std::ofstream out_;
};

void write_kv(ArtifactBundle& bundle, const fs::path& name, const std::vector<std::string>& lines)
{
    Writer w(bundle, name);
    for (const auto& l : lines) *w << l << "\n";
}

std::string kv(const std::string& key, double value) { return key + "=" + format_double(value); }
std::string kv(const std::string& key, const std::string& value) { return key + "=" + value; }
std::string kv(const std::string& key, bool value) { return key + "=" + (value ? "true" : "false"); }

void simulate(const RunSpec& spec, ArtifactBundle& bundle)
{
    const RunConfig cfg = spec.run_config();
    const Grid grid = cfg.grid;
    const RunResult res = run(cfg, sample(*spec.u0, grid));
    {
        Writer w(bundle, "snapshots.csv");
        *w << "t,x,u,v\n";
        for (const auto& s : res.snapshots) {
            for (std::size_t i = 0; i < grid.size(); ++i) {
                *w << format_double(s.t) << "," << format_double(grid.x(i)) << "," << format_double(s.u[i])
                   << "," << format_double(s.v[i]) << "\n";
            }
        }
    }
    {
        Writer w(bundle, "convergence.csv");
        *w << "t,sup_diff,sup_u,u_at_L\n";
        for (const auto& p : res.series) {
            *w << format_double(p.t) << "," << format_double(p.sup_diff) << "," << format_double(p.sup_u) << ","
               << format_double(p.u_at_L) << "\n";
        }
    }
    const Outcome& o = res.outcome;
    std::vector<std::string> lines{kv("outcome", to_string(o.tag)),
                                   kv("final_t", res.final_state.t),
                                   kv("final_sup_diff", o.final_sup_diff),
                                   kv("final_sup_u", o.final_sup_u),
                                   kv("u_at_L", res.final_state.u.back()),
                                   kv("max_u", res.max_u),
                                   kv("min_raw_u", res.min_raw_u)};
    if (o.plateau) lines.push_back(kv("plateau", *o.plateau));
    if (o.peak) lines.push_back(kv("peak", *o.peak));
    if (o.peak_x) lines.push_back(kv("peak_x", *o.peak_x));
    if (res.fault) lines.push_back(kv("fault", *res.fault));
    if (spec.bc == BoundaryCase::Case1 && case1_bracketing_violated(spec.profile)) {
        lines.push_back(kv("warning", std::string("profile is not bracketed by its limits")));
    }
    write_kv(bundle, "outcome.txt", lines);
    bundle.outcome = o;
    bundle.fault = res.fault;
    bundle.summary = lines;
}

void eig(const RunSpec& spec, ArtifactBundle& bundle)
{
    LambdaInfinityOptions opts;
    opts.tol = spec.lambda_tol;
    opts.h = spec.eig_h;
    const LambdaInfinity inf = lambda_infinity(spec.profile, spec.params.c, opts);
    {
        Writer w(bundle, "eigen.csv");
        *w << "L,h,lambda\n";
        for (double L : spec.eig_L) {
            const EigenResult r = principal_eigenvalue(spec.profile, spec.params.c, L, spec.eig_h);
            *w << format_double(r.L) << "," << format_double(r.h) << "," << format_double(r.lambda) << "\n";
            bundle.summary.push_back("lambda_L[" + format_double(L) + "]=" + format_double(r.lambda));
        }
    }
    {
        Writer w(bundle, "lambda_sweep.csv");
        *w << "L,h,lambda\n";
        for (const auto& e : inf.sweep) {
            *w << format_double(e.L) << "," << format_double(e.h) << "," << format_double(e.lambda) << "\n";
        }
    }
    std::vector<std::string> lines{kv("lambda_inf_estimate", inf.estimate),
                                   kv("lambda_inf_lower", inf.lower_bound),
                                   kv("lambda_inf_upper", inf.upper_bound),
                                   kv("certified_sign", std::to_string(inf.certified_sign)),
                                   kv("converged", inf.converged),
                                   kv("tol", spec.lambda_tol),
                                   kv("h", spec.eig_h)};
    write_kv(bundle, "lambda_inf.txt", lines);
    bundle.summary.insert(bundle.summary.end(), lines.begin(), lines.end());
}

void regime(const RunSpec& spec, ArtifactBundle& bundle)
{
    RegimeReport rep = check_regime(spec.params, spec.profile);
    const ProfileClass cls = classify_profile(spec.profile);
    if (cls == ProfileClass::Case2) {
        LambdaInfinityOptions opts;
        opts.tol = spec.lambda_tol;
        opts.h = spec.eig_h;
        rep.lambda_inf = lambda_infinity(spec.profile, spec.params.c, opts).estimate;
    }
    std::vector<std::string> lines{kv("profile_class", to_string(cls)),
                                   kv("r_star", spec.profile.r_star()),
                                   kv("c", spec.params.c),
                                   kv("c_star", rep.c_star),
                                   kv("globally_bounded", spec.params.globally_bounded()),
                                   kv("damping_exceeds_twice", rep.damping_exceeds_twice),
                                   kv("h1_threshold", rep.h1_threshold ? format_double(*rep.h1_threshold) : "undefined"),
                                   kv("h1_holds", rep.h1_holds),
                                   kv("h2_damping_holds", rep.h2_damping_holds),
                                   kv("c_above_minus_c_star", rep.c_above_minus_c_star),
                                   kv("c_inside_spreading_band", rep.c_inside_spreading_band)};
    if (rep.lambda_inf) lines.push_back(kv("lambda_inf", *rep.lambda_inf));
    if (cls == ProfileClass::Case1 && case1_bracketing_violated(spec.profile)) {
        lines.push_back(kv("warning", std::string("profile is not bracketed by its limits")));
    }
    write_kv(bundle, "regime.txt", lines);
    bundle.summary = lines;
}

void verify(const RunSpec& spec, ArtifactBundle& bundle)
{
    const Grid grid = spec.grid();
    const ProfileClass cls = classify_profile(spec.profile);
    if (cls == ProfileClass::Unclassified) throw ValidationError("profile: verify needs a Case-1 or Case-2 profile");
    const double r_star = spec.profile.r_star();
    std::vector<std::string> lines;
    bool ok = true;

    const GreenBoundReport green = certify_green_bounds(spec.params, r_star, grid, 2 * spec.samples, spec.seed);
    const Envelope upper = cls == ProfileClass::Case1
                               ? build_upper_envelope_case1(spec.params, spec.profile, grid, spec.r1)
                               : build_upper_envelope_case2(spec.params, spec.profile, grid, spec.rbar);
    const CertificationReport cert = certify_supersolution(upper, spec.params, spec.profile, spec.samples, spec.seed);
    {
        Writer w(bundle, "certification.csv");
        *w << "lemma,region,worst_residual,worst_sample,worst_x,nodes_checked,status\n";
        const std::string gs = green.passed ? "certified" : "failed";
        *w << "green_bounds,psi," << format_double(-green.worst_psi_slack) << ",,," << grid.size() * green.samples
           << "," << gs << "\n";
        *w << "green_bounds,psi_x," << format_double(-green.worst_psi_x_slack) << ",,,"
           << grid.size() * green.samples << "," << gs << "\n";
        for (const auto& r : cert.rows) {
            *w << r.lemma << "," << r.region << "," << format_double(r.worst_residual) << "," << r.worst_sample << ","
               << format_double(r.worst_x) << "," << r.nodes_checked << "," << to_string(cert.status) << "\n";
        }
    }
    ok = ok && green.passed && cert.status != CertStatus::Failed;
    lines.push_back(kv("green_bounds", std::string(green.passed ? "certified" : "failed")));
    lines.push_back(kv("supersolution", to_string(cert.status)));
    if (!cert.message.empty()) lines.push_back(kv("supersolution_message", cert.message));
    for (const auto& [k, v] : upper.constants) lines.push_back(kv("upper." + k, v));

    std::optional<Envelope> lower;
    if (cls == ProfileClass::Case1) {
        if (!(spec.params.b > 2.0 * spec.params.chi * spec.params.mu)) {
            lines.push_back(kv("ignition", std::string("skipped: needs b > 2 chi mu")));
        } else {
            Writer w(bundle, "ignition.csv");
            *w << "epsilon,speed,bound\n";
            std::vector<double> speeds, levels;
            for (double e : spec.epsilons) {
                const IgnitionWave wave = ignition_wave(spec.params, r_star, e);
                *w << format_double(e) << "," << format_double(wave.speed) << "," << format_double(wave.speed_bound)
                   << "\n";
                speeds.push_back(wave.speed);
                levels.push_back(wave.right_level);
                ok = ok && wave.speed > 0.0 && wave.speed < wave.speed_bound;
            }
            if (!speeds.empty()) {
                lines.push_back(kv("ignition_limit", extrapolate_ignition_speed(spec.epsilons, speeds, levels)));
                lines.push_back(kv("ignition_bound", ignition_speed_bound(spec.params, r_star)));
            }
            const IgnitionWave wave = ignition_wave(spec.params, r_star, spec.envelope_epsilon);
            lower = build_lower_envelope_case1(spec.params, spec.profile, grid, wave, upper);
            for (const auto& [k, v] : lower->constants) lines.push_back(kv("lower." + k, v));
        }
    } else {
        LowerCase2Options lo;
        lo.tau = spec.tau;
        lower = build_lower_envelope_case2(spec.params, spec.profile, upper, lo);
        for (const auto& [k, v] : lower->constants) lines.push_back(kv("lower." + k, v));
    }

    if (lower) {
        FrozenFlowOptions fo;
        fo.tau = spec.tau;
        fo.closure = spec.closure;
        const BoundaryCase bc = cls == ProfileClass::Case1 ? BoundaryCase::Case1 : BoundaryCase::Case2;
        FrozenFlowResult fp;
        try {
            fp = frozen_flow_fixed_point(spec.params, spec.profile, bc, upper, *lower, fo);
        } catch (const NumericalError& err) {
            // The envelopes do not bracket the frozen flow for these
            // parameters; report it rather than abandoning the other checks.
            lines.push_back(kv("fixed_point_status", std::string("aborted")));
            lines.push_back(kv("fixed_point_message", std::string(err.what())));
            lines.push_back(kv("all_checks_passed", false));
            write_kv(bundle, "verify.txt", lines);
            bundle.checks_passed = false;
            bundle.summary = lines;
            return;
        }
        lines.push_back(kv("fixed_point_status", std::string("completed")));
        Writer w(bundle, "fixed_point.csv");
        *w << "x,lower,u,upper\n";
        for (std::size_t i = 0; i < grid.size(); ++i) {
            *w << format_double(grid.x(i)) << "," << format_double(lower->values[i]) << "," << format_double(fp.u[i])
               << "," << format_double(upper.values[i]) << "\n";
        }
        lines.push_back(kv("fixed_point_converged", fp.converged));
        lines.push_back(kv("fixed_point_iterations", std::to_string(fp.iterations)));
        lines.push_back(kv("fixed_point_last_diff", fp.outer_diffs.empty() ? 0.0 : fp.outer_diffs.back()));
        lines.push_back(kv("fixed_point_monotone_violation", fp.max_monotone_violation));
        lines.push_back(kv("fixed_point_sandwich_violation", fp.max_sandwich_violation));
        lines.push_back(kv("fixed_point_residual", fp.stationary_residual));
        ok = ok && fp.converged && fp.max_monotone_violation <= 1e-10;
    }
    lines.push_back(kv("all_checks_passed", ok));
    write_kv(bundle, "verify.txt", lines);
    bundle.checks_passed = ok;
    bundle.summary = lines;
}

void run_sweep(const RunSpec& spec, ArtifactBundle& bundle)
{
    Writer w(bundle, "regime_map.csv");
    *w << sweep_csv_header() << "\n";
    w->flush();
    const auto rows = sweep(spec, [&](const SweepRow& row) {
        if (row.outcome == "skipped") {
            std::cerr << "sweep: skipped b=" << format_double(row.b) << " chi=" << format_double(row.chi)
                      << " (b <= chi*mu)\n";
        }
        *w << sweep_csv_row(row) << "\n";
        w->flush();
    });
    const auto tr = transition_speed(rows);
    bundle.summary.push_back(kv("points", std::to_string(rows.size())));
    bundle.summary.push_back(kv("transition_c", tr ? format_double(*tr) : std::string("none")));
}

}  // namespace

ArtifactBundle run_experiment(const RunSpec& spec, const fs::path& dir)
{
    spec.validate();
    ArtifactBundle bundle;
    bundle.dir = !dir.empty() ? dir : (!spec.out.empty() ? fs::path(spec.out) : fs::path("out"));
    fs::create_directories(bundle.dir);
    const std::string started = timestamp_now();
    {
        Writer w(bundle, "manifest.txt");
        *w << "# inputs for an identical re-run; the computation is deterministic and seed-free except\n"
           << "# for the verify samples, which are fixed by `seed`.\n"
           << render_config(spec);
    }
    switch (spec.mode) {
    case Mode::Simulate: simulate(spec, bundle); break;
    case Mode::Eig: eig(spec, bundle); break;
    case Mode::Regime: regime(spec, bundle); break;
    case Mode::Verify: verify(spec, bundle); break;
    case Mode::Sweep: run_sweep(spec, bundle); break;
    }
    write_kv(bundle, "timestamps.txt", {kv("started", started), kv("finished", timestamp_now())});
    return bundle;
}

}  // namespace kswave
