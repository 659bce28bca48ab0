#include "cantorspec/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "cantorspec/cocycle.hpp"
#include "cantorspec/diophantine.hpp"
#include "cantorspec/gaps.hpp"
#include "cantorspec/kam.hpp"

namespace cantorspec {

namespace {

constexpr double kPi = 3.14159265358979323846;

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
    throw std::runtime_error("config key '" + key + "': " + why);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) bad_key(key, "trailing characters in '" + v + "'");
        return x;
    } catch (const std::invalid_argument&) {
        bad_key(key, "not a number: '" + v + "'");
    } catch (const std::out_of_range&) {
        bad_key(key, "out of range: '" + v + "'");
    }
}

long long to_int(const std::string& key, const std::string& v) {
    const double x = to_double(key, v);
    if (x != std::floor(x)) bad_key(key, "expected an integer, got '" + v + "'");
    return static_cast<long long>(x);
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_double(key, item));
    }
    if (out.empty()) bad_key(key, "empty list");
    return out;
}

void apply_key(JobConfig& cfg, const std::string& key, const std::string& val) {
    if (key == "alpha") {
        if (val == "golden") {
            cfg.alpha_preset = "golden";
            cfg.alpha_values.clear();
        } else {
            cfg.alpha_preset = "explicit";
            cfg.alpha_values = to_list(key, val);
        }
    } else if (key == "s") {
        cfg.gevrey.s = to_double(key, val);
    } else if (key == "lambda") {
        cfg.gevrey.lambda = to_double(key, val);
    } else if (key == "scale_mode") {
        if (val == "toy")
            cfg.scale_mode = ScaleMode::Toy;
        else if (val == "exact")
            cfg.scale_mode = ScaleMode::Exact;
        else
            bad_key(key, "expected 'toy' or 'exact', got '" + val + "'");
    } else if (key == "scale_base") {
        cfg.scale_base = to_double(key, val);
    } else if (key == "scale_count") {
        cfg.scale_count = static_cast<int>(to_int(key, val));
    } else if (key == "scale_values") {
        cfg.scale_values = to_list(key, val);
    } else if (key == "target_epsilon") {
        cfg.target_epsilon = to_double(key, val);
    } else if (key == "e_min") {
        cfg.e_min = to_double(key, val);
    } else if (key == "e_max") {
        cfg.e_max = to_double(key, val);
    } else if (key == "resolution") {
        cfg.resolution = to_double(key, val);
    } else if (key == "energy") {
        cfg.energy = to_double(key, val);
    } else if (key == "rot_n") {
        cfg.rot_n = to_int(key, val);
    } else if (key == "phases") {
        cfg.phases = static_cast<int>(to_int(key, val));
    } else if (key == "zeta_threshold") {
        cfg.zeta_threshold = to_double(key, val);
    } else if (key == "label_bound") {
        cfg.label_bound = static_cast<int>(to_int(key, val));
    } else if (key == "cf_depth") {
        cfg.cf_depth = static_cast<int>(to_int(key, val));
    } else if (key == "kam_max_steps") {
        cfg.kam_max_steps = static_cast<int>(to_int(key, val));
    } else if (key == "kam_gate") {
        cfg.kam_gate = to_double(key, val);
    } else if (key == "kam_tail_stop") {
        cfg.kam_tail_stop = to_double(key, val);
    } else if (key == "resonance_bound") {
        cfg.resonance_bound = to_double(key, val);
    } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(to_int(key, val));
    } else if (key == "threads") {
        cfg.threads = static_cast<int>(to_int(key, val));
    } else if (key == "out_dir") {
        cfg.out_dir = val;
    } else {
        throw std::runtime_error("unknown config key '" + key + "'");
    }
}

std::string json_scalar_to_string(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    std::ostringstream os;
    os.precision(17);
    if (v.is_boolean()) {
        os << (v.get<bool>() ? 1 : 0);
    } else if (v.is_number_integer()) {
        os << v.get<long long>();
    } else if (v.is_number()) {
        os << v.get<double>();
    } else {
        throw std::runtime_error("unsupported JSON value type in config");
    }
    return os.str();
}

JobConfig parse_json_config(const std::string& text) {
    JobConfig cfg;
    nlohmann::json j = nlohmann::json::parse(text);
    if (!j.is_object()) throw std::runtime_error("config JSON must be an object");
    for (const auto& [key, v] : j.items()) {
        if (v.is_array()) {
            std::ostringstream os;
            os.precision(17);
            for (size_t i = 0; i < v.size(); ++i)
                os << (i ? "," : "") << json_scalar_to_string(v[i]);
            apply_key(cfg, key, os.str());
        } else {
            apply_key(cfg, key, json_scalar_to_string(v));
        }
    }
    return cfg;
}

std::string list_str(const std::vector<double>& xs) {
    std::ostringstream os;
    os.precision(17);
    for (size_t i = 0; i < xs.size(); ++i) os << (i ? "," : "") << xs[i];
    return os.str();
}

}  // namespace

std::vector<double> JobConfig::alpha() const {
    if (alpha_preset == "golden") {
        const double g = (std::sqrt(5.0) - 1.0) / 2.0;
        return {2.0 * kPi * g};
    }
    return alpha_values;
}

JobConfig parse_config(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{')
        return parse_json_config(text);
    JobConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key=value, got '" + line + "'");
        apply_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

JobConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config(os.str());
}

void validate_config(const JobConfig& cfg) {
    if (cfg.alpha_preset != "golden" && cfg.alpha_preset != "explicit")
        bad_key("alpha", "unknown preset '" + cfg.alpha_preset + "'");
    const std::vector<double> a = cfg.alpha();
    if (a.empty() || a.size() > 2)
        bad_key("alpha", "expected 1 or 2 frequency components");
    for (double x : a)
        if (!std::isfinite(x) || x == 0.0)
            bad_key("alpha", "components must be finite and nonzero");
    if (!(cfg.gevrey.s > 0.0) || !(cfg.gevrey.s < 0.5))
        bad_key("s", "must lie in (0, 0.5)");
    if (!(std::abs(cfg.gevrey.lambda) <= 1.0))
        bad_key("lambda", "must satisfy |lambda| <= 1");
    if (!(cfg.scale_base > 1.0)) bad_key("scale_base", "must exceed 1");
    if (cfg.scale_count < 1 || cfg.scale_count > 64)
        bad_key("scale_count", "must lie in [1, 64]");
    for (size_t i = 1; i < cfg.scale_values.size(); ++i)
        if (cfg.scale_values[i] <= cfg.scale_values[i - 1])
            bad_key("scale_values", "must be strictly increasing");
    if (cfg.target_epsilon < 0.0) bad_key("target_epsilon", "must be >= 0");
    if (!(cfg.e_min < cfg.e_max)) bad_key("e_min", "must be below e_max");
    if (!(cfg.resolution > 0.0)) bad_key("resolution", "must be positive");
    if (cfg.rot_n < 100) bad_key("rot_n", "must be at least 100");
    if (cfg.phases < 1) bad_key("phases", "must be at least 1");
    if (!(cfg.zeta_threshold > 1.0)) bad_key("zeta_threshold", "must exceed 1");
    if (cfg.label_bound < 1) bad_key("label_bound", "must be at least 1");
    if (cfg.cf_depth < 1 || cfg.cf_depth > 90)
        bad_key("cf_depth", "must lie in [1, 90]");
    if (cfg.kam_max_steps < 1) bad_key("kam_max_steps", "must be at least 1");
    if (!(cfg.kam_gate > 0.0)) bad_key("kam_gate", "must be positive");
    if (!(cfg.kam_tail_stop > 0.0)) bad_key("kam_tail_stop", "must be positive");
    if (!(cfg.resonance_bound >= 1.0))
        bad_key("resonance_bound", "must be at least 1");
    if (cfg.threads < 1) bad_key("threads", "must be at least 1");
    if (cfg.out_dir.empty()) bad_key("out_dir", "must not be empty");
}

std::string canonical_config(const JobConfig& cfg) {
    std::ostringstream os;
    os.precision(17);
    // alphabetical key order; `threads` and `out_dir` are plumbing and stay
    // out of the hash so reruns with a different pool size match
    os << "alpha=" << (cfg.alpha_preset == "golden" ? "golden"
                                                    : list_str(cfg.alpha_values))
       << '\n';
    os << "cf_depth=" << cfg.cf_depth << '\n';
    os << "e_max=" << cfg.e_max << '\n';
    os << "e_min=" << cfg.e_min << '\n';
    os << "energy=" << cfg.energy << '\n';
    os << "kam_gate=" << cfg.kam_gate << '\n';
    os << "kam_max_steps=" << cfg.kam_max_steps << '\n';
    os << "kam_tail_stop=" << cfg.kam_tail_stop << '\n';
    os << "label_bound=" << cfg.label_bound << '\n';
    os << "lambda=" << cfg.gevrey.lambda << '\n';
    os << "phases=" << cfg.phases << '\n';
    os << "resolution=" << cfg.resolution << '\n';
    os << "resonance_bound=" << cfg.resonance_bound << '\n';
    os << "rot_n=" << cfg.rot_n << '\n';
    os << "s=" << cfg.gevrey.s << '\n';
    os << "scale_base=" << cfg.scale_base << '\n';
    os << "scale_count=" << cfg.scale_count << '\n';
    os << "scale_mode=" << (cfg.scale_mode == ScaleMode::Toy ? "toy" : "exact")
       << '\n';
    os << "scale_values=" << list_str(cfg.scale_values) << '\n';
    os << "seed=" << cfg.seed << '\n';
    os << "target_epsilon=" << cfg.target_epsilon << '\n';
    os << "zeta_threshold=" << cfg.zeta_threshold << '\n';
    return os.str();
}

std::string config_hash(const JobConfig& cfg) {
    const std::string text = canonical_config(cfg);
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

// ---------------------------------------------------------------------------
// command implementations

namespace {

std::string csv_header(const JobConfig& cfg) {
    return std::string("# cantorspec ") + kVersion +
           " config=" + config_hash(cfg) + "\n";
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

std::string out_path(const JobConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

struct JobContext {
    std::vector<double> alpha;
    ScaleSequence sc;
    KSet ks;
    SchrodingerCocycle cocycle;
};

JobContext make_context(const JobConfig& cfg) {
    JobContext ctx;
    ctx.alpha = cfg.alpha();
    ctx.sc = scales(cfg.scale_base, cfg.gevrey.s, cfg.scale_count,
                    cfg.scale_mode, cfg.scale_values);
    ctx.ks = build_kset(ctx.alpha, ctx.sc, cfg.gevrey, cfg.target_epsilon);
    ctx.cocycle.alpha = ctx.alpha;
    ctx.cocycle.lambda = cfg.gevrey.lambda;
    ctx.cocycle.potential =
        potential_series(ctx.ks, static_cast<int>(ctx.alpha.size()));
    return ctx;
}

int run_cf(const JobConfig& cfg, std::ostream& out) {
    const std::vector<double> a = cfg.alpha();
    const double x = a[0] / (2.0 * kPi);
    const ContinuedFraction cf = cf_expand(x, cfg.cf_depth);
    std::ostringstream os;
    os << csv_header(cfg) << "k,a_k,p_k,q_k\n";
    for (size_t i = 0; i < cf.a.size() && i + 1 < cf.q.size(); ++i)
        os << i + 1 << ',' << cf.a[i] << ',' << cf.p[i + 1] << ','
           << cf.q[i + 1] << '\n';
    const std::string path = out_path(cfg, "cf.csv");
    write_file(path, os.str());
    out << os.str();
    out << "wrote " << path << '\n';
    return 0;
}

int run_kset(const JobConfig& cfg, std::ostream& out) {
    const JobContext ctx = make_context(cfg);
    const KSetReport rep = validate_kset(ctx.ks, ctx.sc);
    nlohmann::json j = nlohmann::json::parse(kset_to_json(ctx.ks));
    j["cantorspec"] = kVersion;
    j["config"] = config_hash(cfg);
    j["valid"] = rep.pass();
    const std::string path = out_path(cfg, "kset.json");
    write_file(path, j.dump(2) + "\n");
    out << "labels: " << ctx.ks.labels.size()
        << "  covering radius: " << ctx.ks.covering_radius << '\n';
    for (const std::string& v : rep.violations) out << "violation: " << v << '\n';
    out << "wrote " << path << '\n';
    return rep.pass() ? 0 : 1;
}

int run_scan_ids(const JobConfig& cfg, std::ostream& out) {
    const JobContext ctx = make_context(cfg);
    const int n = static_cast<int>(
        std::llround((cfg.e_max - cfg.e_min) / cfg.resolution));
    std::vector<double> rho(n + 1), err(n + 1);
    const int nthreads = std::max(1, std::min(cfg.threads, n + 1));
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t)
        pool.emplace_back([&, t] {
            SchrodingerCocycle cw = ctx.cocycle;
            for (int i = t; i <= n; i += nthreads) {
                cw.energy = cfg.e_min + i * cfg.resolution;
                RotationEstimate re =
                    rotation_number(cw, cfg.rot_n, cfg.phases);
                rho[i] = re.value;
                err[i] = re.error_bar;
            }
        });
    for (std::thread& th : pool) th.join();

    std::ostringstream os;
    os << csv_header(cfg) << "E,rho,N,error\n";
    os.precision(12);
    for (int i = 0; i <= n; ++i)
        os << cfg.e_min + i * cfg.resolution << ',' << rho[i] << ','
           << 1.0 - 2.0 * rho[i] << ',' << 2.0 * err[i] << '\n';
    const std::string path = out_path(cfg, "ids_scan.csv");
    write_file(path, os.str());
    out << "scanned " << n + 1 << " energies; wrote " << path << '\n';
    return 0;
}

int run_gaps(const JobConfig& cfg, std::ostream& out) {
    const JobContext ctx = make_context(cfg);
    ScanParams p;
    p.e_min = cfg.e_min;
    p.e_max = cfg.e_max;
    p.resolution = cfg.resolution;
    p.rot_n = cfg.rot_n;
    p.phases = cfg.phases;
    p.zeta_threshold = cfg.zeta_threshold;
    p.label_bound = cfg.label_bound;
    p.s = cfg.gevrey.s;
    p.threads = cfg.threads;
    const std::vector<GapRecord> gaps = scan_gaps(ctx.cocycle, ctx.ks, p);

    const std::string csv = csv_header(cfg) + gap_table_csv(gaps);
    const std::string csv_path = out_path(cfg, "gaps.csv");
    write_file(csv_path, csv);
    nlohmann::json j = nlohmann::json::parse(gap_table_json(gaps, p));
    j["cantorspec"] = kVersion;
    j["config"] = config_hash(cfg);
    const std::string json_path = out_path(cfg, "gaps.json");
    write_file(json_path, j.dump(2) + "\n");

    out << csv;
    out << "found " << gaps.size() << " gap(s); wrote " << csv_path << " and "
        << json_path << '\n';
    return 0;
}

int run_kam(const JobConfig& cfg, std::ostream& out) {
    const JobContext ctx = make_context(cfg);
    KamIterParams ip;
    ip.max_steps = cfg.kam_max_steps;
    ip.tail_stop = cfg.kam_tail_stop;
    ip.gate = cfg.kam_gate;
    ip.resonance_bound = cfg.resonance_bound;
    ip.seed = static_cast<unsigned>(cfg.seed);
    const KamRun run = kam_iterate(ctx.alpha, cfg.energy, cfg.gevrey.lambda,
                                   ctx.ks, ctx.sc, ip);
    nlohmann::json hdr;
    hdr["cantorspec"] = kVersion;
    hdr["config"] = config_hash(cfg);
    hdr["energy"] = cfg.energy;
    hdr["stop_reason"] = run.stop_reason;
    const std::string path = out_path(cfg, "kam_trace.jsonl");
    write_file(path, hdr.dump() + "\n" + run.trace_json());
    out << "steps: " << run.reports.size() << "  stop: " << run.stop_reason
        << '\n';
    for (size_t i = 0; i < run.reports.size(); ++i)
        out << "  step " << i + 1 << ": eps " << run.reports[i].eps_in
            << " -> " << run.reports[i].eps_out << '\n';
    out << "wrote " << path << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// verify: a fast cross-module property battery

struct VerifyTally {
    int passed = 0, failed = 0;
    std::ostream& out;
    explicit VerifyTally(std::ostream& o) : out(o) {}
    void check(const std::string& name, bool ok) {
        (ok ? passed : failed) += 1;
        out << (ok ? "pass  " : "FAIL  ") << name << '\n';
    }
};

int run_verify(const JobConfig& cfg, std::ostream& out) {
    VerifyTally t(out);
    std::mt19937_64 rng(cfg.seed);
    auto urand = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    const std::vector<double> golden_alpha = JobConfig{}.alpha();

    {  // golden-mean partial quotients and Fibonacci denominators
        const ContinuedFraction cf = cf_expand((std::sqrt(5.0) - 1.0) / 2.0, 20);
        bool ok = cf.a.size() >= 20;
        long long f1 = 1, f2 = 1;
        for (size_t i = 0; ok && i < 20; ++i) {
            ok = cf.a[i] == 1 && cf.q[i + 1] == f2;
            const long long f3 = f1 + f2;
            f1 = f2;
            f2 = f3;
        }
        t.check("continued fraction: golden mean Fibonacci", ok);
    }
    {  // Diophantine margin of the golden frequency
        t.check("diophantine margin positive to |k| <= 50",
                dc_margin(golden_alpha, DCParams{}, 50) > 0.0);
    }
    {  // matrix kernel round trips
        bool ok = true;
        for (int i = 0; i < 200 && ok; ++i) {
            const Mat2 r = Mat2::rotation_turns(urand(-0.45, 0.45));
            const Mat2 d = convert_frame(r, Frame::Disc);
            ok = mat_dist(convert_frame(d, Frame::Real), r) < 1e-12 &&
                 mat_dist(exp_su11(log_su11(d)), d) < 1e-10;
        }
        t.check("frame conversion and exp/log round trips", ok);
    }
    {  // homological solver: substitute-back residual and the eta bound
        bool ok = true;
        for (int i = 0; i < 25 && ok; ++i) {
            const Mat2 a = convert_frame(
                Mat2::rotation_turns(urand(0.05, 0.45)), Frame::Disc);
            MatSeries f(1);
            for (int k = -6; k <= 6; ++k)
                f.add_mode({k}, Mat2(cplx(urand(-1, 1), urand(-1, 1)),
                                     cplx(urand(-1, 1), urand(-1, 1)),
                                     cplx(urand(-1, 1), urand(-1, 1)),
                                     cplx(urand(-1, 1), urand(-1, 1)),
                                     Frame::Disc) *
                                        1e-4);
            const double eta = 1e-2;
            const ResonanceSplit sp =
                split_resonant(f, a, eta, 12.0, golden_alpha);
            const HomologicalSolve hs =
                solve_homological(a, sp.nre, golden_alpha, eta, 0.05);
            ok = hs.residual <= 1e-10 * std::max(hs.f_norm, 1e-300) &&
                 hs.bound_ok;
        }
        t.check("homological solve: residual and |Y| bound", ok);
    }
    {  // free-cocycle rotation number against the arccos formula
        bool ok = true;
        JobConfig free_cfg = cfg;
        free_cfg.gevrey.lambda = 0.0;
        const JobContext ctx = make_context(free_cfg);
        SchrodingerCocycle c = ctx.cocycle;
        for (int i = 0; i < 5 && ok; ++i) {
            c.energy = -1.6 + 0.8 * i;
            const double want = std::acos(c.energy / 2.0) / (2.0 * kPi);
            const RotationEstimate re = rotation_number(c, 100000, 4);
            ok = std::abs(re.value - want) < 1e-4;
        }
        t.check("free cocycle rotation number (arccos law)", ok);
    }
    {  // gap-probe determinant identity on random smooth data
        bool ok = true;
        for (int i = 0; i < 20 && ok; ++i) {
            MatSeries x(1);
            const double a0 = urand(-0.4, 0.4), b0 = urand(-0.4, 0.4),
                         c0 = urand(-0.4, 0.4);
            x.add_mode({0}, Mat2(a0, b0, c0, -a0, Frame::Real));
            const cplx ac(urand(-0.3, 0.3), urand(-0.3, 0.3));
            const cplx bc(urand(-0.3, 0.3), urand(-0.3, 0.3));
            const cplx cc(urand(-0.3, 0.3), urand(-0.3, 0.3));
            x.add_mode({1}, Mat2(ac, bc, cc, -ac, Frame::Real));
            x.add_mode({-1}, Mat2(std::conj(ac), std::conj(bc), std::conj(cc),
                                  -std::conj(ac), Frame::Real));
            const MatSeries b = exp_series(x, 60, 0.05).series;
            const MoserPoschelData d = mp_reduce(b, urand(1e-8, 1e-3), 0.05);
            ok = mp_det(d, urand(1e-8, 1e-2)).identity_defect < 1e-12 &&
                 d.lower_bound_ok;
        }
        t.check("gap probe: determinant identity and average bound", ok);
    }
    {  // label-set construction invariants at the configured parameters
        bool ok;
        try {
            const JobContext ctx = make_context(cfg);
            ok = validate_kset(ctx.ks, ctx.sc).pass();
        } catch (const std::exception&) {
            ok = false;
        }
        t.check("label set passes structural validation", ok);
    }

    out << "verify: " << t.passed << " passed, " << t.failed << " failed\n";
    return t.failed == 0 ? 0 : 1;
}

}  // namespace

int run(const JobConfig& cfg, const std::string& command, std::ostream& out) {
    validate_config(cfg);
    if (command == "cf") return run_cf(cfg, out);
    if (command == "kset") return run_kset(cfg, out);
    if (command == "scan-ids") return run_scan_ids(cfg, out);
    if (command == "gaps") return run_gaps(cfg, out);
    if (command == "kam-run") return run_kam(cfg, out);
    if (command == "verify") return run_verify(cfg, out);
    throw std::runtime_error("unknown command '" + command + "'");
}

// ---------------------------------------------------------------------------
// plot-data export

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

std::vector<std::string> data_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open artifact '" + path + "'");
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '#') continue;
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

}  // namespace

std::string export_plot_data(const std::string& artifact_path,
                             const std::string& kind) {
    std::ostringstream os;
    os.precision(12);
    if (kind == "gap-widths") {
        const std::vector<std::string> lines = data_lines(artifact_path);
        os << "index,log10_width\n";
        int idx = 0;
        for (size_t i = 1; i < lines.size(); ++i) {  // skip the column header
            const std::vector<std::string> cols = split_csv_line(lines[i]);
            if (cols.size() < 4) continue;
            os << idx++ << ',' << std::log10(std::stod(cols[3])) << '\n';
        }
        return os.str();
    }
    if (kind == "step-trace") {
        const std::vector<std::string> lines = data_lines(artifact_path);
        os << "j,log10_eps\n";
        for (const std::string& line : lines) {
            nlohmann::json j = nlohmann::json::parse(line);
            if (!j.contains("j") || !j.contains("eps_in")) continue;
            os << j["j"].get<int>() << ','
               << std::log10(std::max(j["eps_in"].get<double>(), 1e-300))
               << '\n';
        }
        return os.str();
    }
    if (kind == "ids") {
        const std::vector<std::string> lines = data_lines(artifact_path);
        if (lines.empty() || lines[0] != "E,rho,N,error")
            os << "E,rho,N,error\n";
        for (const std::string& line : lines) os << line << '\n';
        return os.str();
    }
    throw std::runtime_error("unknown export kind '" + kind + "'");
}

}  // namespace cantorspec
