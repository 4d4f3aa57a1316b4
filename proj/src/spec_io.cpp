#include "authguess/spec_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "authguess/errors.hpp"
#include "authguess/exponent.hpp"
#include "authguess/guessing.hpp"
#include "authguess/side_info.hpp"

namespace authguess {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw InvalidInputError("spec: " + path + ": " + msg);
}

double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

std::vector<double> get_vector(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of numbers");
    std::vector<double> v;
    for (std::size_t i = 0; i < j.size(); ++i) {
        v.push_back(get_number(j[i], path + "[" + std::to_string(i) + "]"));
    }
    return v;
}

// Round to `prec` significant digits for output.
double rounded(double v, int prec) {
    if (!std::isfinite(v) || prec >= 17) return v;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return std::strtod(buf, nullptr);
}

std::string fmt(double v, int prec) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

std::string hash_hex(std::uint64_t h) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace

std::size_t ProblemSpec::x_size() const {
    if (source) return source->size();
    if (joint_source) return joint_source->x_size();
    return 0;
}

std::uint64_t spec_hash(const std::string& text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

ProblemSpec parse_problem_spec(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw InvalidInputError(std::string("spec: JSON parse error: ") + e.what());
    }
    if (!j.is_object()) throw InvalidInputError("spec: top level must be an object");

    ProblemSpec spec;
    spec.raw = json_text;

    if (!j.contains("source")) fail("source", "required");
    const json& src = j["source"];
    if (src.is_object() && src.contains("pmf")) {
        try {
            spec.source = Pmf(get_vector(src["pmf"], "source.pmf"));
        } catch (const InvalidInputError& e) {
            fail("source.pmf", e.what());
        }
    } else if (src.is_object() && src.contains("joint")) {
        const json& rows = src["joint"];
        if (!rows.is_array() || rows.empty()) fail("source.joint", "expected a matrix");
        std::size_t zs = 0;
        std::vector<double> flat;
        for (std::size_t x = 0; x < rows.size(); ++x) {
            auto row = get_vector(rows[x], "source.joint[" + std::to_string(x) + "]");
            if (x == 0) {
                zs = row.size();
            } else if (row.size() != zs) {
                fail("source.joint", "ragged rows");
            }
            flat.insert(flat.end(), row.begin(), row.end());
        }
        try {
            spec.joint_source = JointPmf(rows.size(), zs, std::move(flat));
        } catch (const InvalidInputError& e) {
            fail("source.joint", e.what());
        }
    } else {
        fail("source", "expected an object with \"pmf\" or \"joint\"");
    }

    std::size_t xs = spec.x_size();
    if (j.contains("distortion")) {
        const json& d = j["distortion"];
        if (d.is_string() && d.get<std::string>() == "hamming") {
            spec.distortion = DistortionSpec::hamming(xs);
        } else if (d.is_object() && d.contains("matrix")) {
            const json& rows = d["matrix"];
            if (!rows.is_array() || rows.size() != xs) {
                fail("distortion.matrix", "expected one row per source symbol");
            }
            std::size_t ys = 0;
            std::vector<double> flat;
            for (std::size_t x = 0; x < rows.size(); ++x) {
                auto row = get_vector(rows[x], "distortion.matrix[" + std::to_string(x) + "]");
                if (x == 0) {
                    ys = row.size();
                } else if (row.size() != ys) {
                    fail("distortion.matrix", "ragged rows");
                }
                flat.insert(flat.end(), row.begin(), row.end());
            }
            try {
                spec.distortion = DistortionSpec(xs, ys, std::move(flat));
            } catch (const InvalidInputError& e) {
                fail("distortion.matrix", e.what());
            }
        } else {
            fail("distortion", "expected \"hamming\" or an object with \"matrix\"");
        }
    } else {
        spec.distortion = DistortionSpec::hamming(xs);
    }

    if (j.contains("D")) {
        double D = get_number(j["D"], "D");
        if (D < 0.0) fail("D", "must be >= 0");
        spec.D = D;
    }
    if (j.contains("grid")) {
        spec.grid = get_vector(j["grid"], "grid");
        for (std::size_t i = 0; i < spec.grid.size(); ++i) {
            if (spec.grid[i] < 0.0) fail("grid", "entries must be >= 0");
            if (i > 0 && spec.grid[i] < spec.grid[i - 1]) {
                fail("grid", "must be sorted ascending");
            }
        }
    }
    if (j.contains("n")) {
        double n = get_number(j["n"], "n");
        if (n < 1 || n != std::floor(n)) fail("n", "must be a positive integer");
        spec.n = static_cast<std::size_t>(n);
    }
    if (j.contains("trials")) {
        double t = get_number(j["trials"], "trials");
        if (t < 1 || t != std::floor(t)) fail("trials", "must be a positive integer");
        spec.trials = static_cast<long>(t);
    }
    if (j.contains("seed")) {
        double s = get_number(j["seed"], "seed");
        if (s < 0 || s != std::floor(s)) fail("seed", "must be a non-negative integer");
        spec.seed = static_cast<std::uint64_t>(s);
    }
    if (j.contains("mode")) {
        if (!j["mode"].is_string()) fail("mode", "expected a string");
        std::string m = j["mode"].get<std::string>();
        if (m == "monte_carlo") m = "mc";
        if (m != "exact" && m != "mc") fail("mode", "expected \"exact\" or \"mc\"");
        spec.mode = m;
    }
    if (j.contains("grid_resolution")) {
        double r = get_number(j["grid_resolution"], "grid_resolution");
        if (!(r > 0.0) || r > 1.0) fail("grid_resolution", "must be in (0, 1]");
        spec.grid_resolution = r;
    }
    if (j.contains("type")) {
        const json& t = j["type"];
        if (!t.is_array() || t.size() != xs) {
            fail("type", "expected one count per source symbol");
        }
        std::vector<std::size_t> counts;
        for (std::size_t i = 0; i < t.size(); ++i) {
            double c = get_number(t[i], "type[" + std::to_string(i) + "]");
            if (c < 0 || c != std::floor(c)) fail("type", "counts must be integers >= 0");
            counts.push_back(static_cast<std::size_t>(c));
        }
        spec.type_counts = counts;
    }
    if (j.contains("units")) {
        if (!j["units"].is_string()) fail("units", "expected a string");
        std::string u = j["units"].get<std::string>();
        if (u != "nats" && u != "bits") fail("units", "expected \"nats\" or \"bits\"");
        spec.units = u;
    }
    if (j.contains("format")) {
        if (!j["format"].is_string()) fail("format", "expected a string");
        std::string f = j["format"].get<std::string>();
        if (f != "json" && f != "csv") fail("format", "expected \"json\" or \"csv\"");
        spec.format = f;
    }
    if (j.contains("precision")) {
        double p = get_number(j["precision"], "precision");
        if (p < 1 || p > 17 || p != std::floor(p)) fail("precision", "must be in [1, 17]");
        spec.precision = static_cast<int>(p);
    }
    if (j.contains("converse_eps")) {
        double e = get_number(j["converse_eps"], "converse_eps");
        if (!(e > 0.0)) fail("converse_eps", "must be > 0");
        spec.converse_eps = e;
    }
    return spec;
}

namespace {

double unit_factor(const ProblemSpec& spec) {
    return spec.units == "bits" ? 1.0 / std::log(2.0) : 1.0;
}

json provenance(const ProblemSpec& spec) {
    json j;
    j["tool"] = "authguess";
    j["version"] = kToolVersion;
    j["spec_hash"] = hash_hex(spec_hash(spec.raw));
    j["seed"] = spec.seed;
    return j;
}

std::string csv_preamble(const ProblemSpec& spec) {
    std::ostringstream out;
    out << "# tool=authguess version=" << kToolVersion << "\n";
    out << "# spec_hash=" << hash_hex(spec_hash(spec.raw)) << " seed=" << spec.seed << "\n";
    return out.str();
}

ExponentOptions exponent_options(const ProblemSpec& spec) {
    ExponentOptions o;
    o.grid_resolution = spec.grid_resolution;
    return o;
}

ExponentResult solve_exponent(const ProblemSpec& spec, double D) {
    if (spec.joint_source) {
        return deception_exponent_si(*spec.joint_source, spec.resolved_distortion(), D,
                                     exponent_options(spec));
    }
    return deception_exponent(*spec.source, spec.resolved_distortion(), D,
                              exponent_options(spec));
}

void check_rd_convergence(const ProblemSpec& spec, double D) {
    RdResult r;
    if (spec.joint_source) {
        r = conditional_rate_distortion(*spec.joint_source, spec.resolved_distortion(), D);
    } else {
        r = rate_distortion(*spec.source, spec.resolved_distortion(), D);
    }
    if (!r.converged) {
        throw ConvergenceError("rate-distortion solver did not converge at D=" +
                               std::to_string(D));
    }
}

std::string cmd_exponent(const ProblemSpec& spec) {
    if (!spec.D) throw InvalidInputError("spec: D: required for the exponent command");
    check_rd_convergence(spec, *spec.D);
    ExponentResult res = solve_exponent(spec, *spec.D);

    const int prec = spec.precision;
    json out;
    out.update(provenance(spec));
    out["command"] = "exponent";
    out["D"] = *spec.D;
    out["value_nats"] = rounded(res.value, prec);
    out["value_bits"] = rounded(res.value / std::log(2.0), prec);
    json q = json::array();
    for (double v : res.argmax_q) q.push_back(rounded(v, prec));
    out["argmax_q"] = q;
    json diag;
    diag["grid_resolution"] = res.grid_resolution;
    diag["refined"] = res.refined;
    json trace = json::array();
    for (const auto& [cand, obj] : res.objective_trace) {
        json e;
        json cq = json::array();
        for (double v : cand) cq.push_back(rounded(v, prec));
        e["q"] = cq;
        e["objective_nats"] = rounded(obj, prec);
        trace.push_back(e);
    }
    diag["top_candidates"] = trace;
    out["diagnostics"] = diag;
    return out.dump(2) + "\n";
}

std::string cmd_sweep(const ProblemSpec& spec) {
    if (spec.grid.empty()) throw InvalidInputError("spec: grid: required for sweep");
    const double uf = unit_factor(spec);
    const int prec = spec.precision;
    const std::string suffix = spec.units;

    std::ostringstream out;
    out << csv_preamble(spec);
    std::size_t qlen = spec.joint_source
                           ? spec.joint_source->x_size() * spec.joint_source->z_size()
                           : spec.source->size();
    out << "D,E_D_" << suffix;
    for (std::size_t i = 0; i < qlen; ++i) out << ",q_" << i;
    out << ",R_D_P_" << suffix << ",converse_bound_" << suffix << "\n";

    for (double D : spec.grid) {
        ExponentResult res = solve_exponent(spec, D);
        double rdp;
        double converse = std::numeric_limits<double>::quiet_NaN();
        if (spec.joint_source) {
            rdp = conditional_rate_distortion(*spec.joint_source, spec.resolved_distortion(), D)
                      .rate;
        } else {
            rdp = rate_distortion(*spec.source, spec.resolved_distortion(), D).rate;
            converse = converse_lower_bound(Pmf(res.argmax_q), *spec.source,
                                            spec.resolved_distortion(), D, spec.converse_eps,
                                            static_cast<long>(spec.n));
        }
        out << fmt(D, prec) << ',' << fmt(res.value * uf, prec);
        for (double v : res.argmax_q) out << ',' << fmt(v, prec);
        out << ',' << fmt(rdp * uf, prec) << ',' << fmt(converse * uf, prec) << "\n";
    }
    return out.str();
}

std::string cmd_attack(const ProblemSpec& spec) {
    if (!spec.D) throw InvalidInputError("spec: D: required for the attack command");
    const double D = *spec.D;
    const int prec = spec.precision;

    if (spec.mode == "exact") {
        // Fail fast, before the strategy build, when exact enumeration of
        // the source space cannot possibly fit.
        std::size_t cells = spec.joint_source
                                ? spec.joint_source->x_size() * spec.joint_source->z_size()
                                : spec.source->size();
        double log_total = static_cast<double>(spec.n) * std::log(static_cast<double>(cells));
        if (log_total > std::log(1e6) + 1e-9) {
            throw SizeLimitError("attack: exact mode needs |X|^n (or |X x Z|^n) <= 1e6; got " +
                                 std::to_string(cells) + "^" + std::to_string(spec.n));
        }
    }

    AttackReport report;
    std::size_t flat_length = 0;
    std::size_t segment_count = 0;
    if (spec.joint_source) {
        SiStrategy s = build_si_strategy(spec.n, *spec.joint_source,
                                         spec.resolved_distortion(), D);
        report = evaluate_si_attack(*spec.joint_source, s, spec.resolved_distortion(), D,
                                    spec.mode == "exact" ? SiMode::kExact : SiMode::kMonteCarlo,
                                    spec.trials, spec.seed);
    } else {
        Strategy s = build_strategy(spec.n, *spec.source, spec.resolved_distortion(), D);
        flat_length = s.flat.size();
        segment_count = s.segments.size();
        report = spec.mode == "exact"
                     ? exact_expected_guesses(*spec.source, s, spec.resolved_distortion(), D)
                     : simulate_attack(*spec.source, s, spec.resolved_distortion(), D,
                                       spec.trials, spec.seed);
    }
    ExponentResult theory = solve_exponent(spec, D);

    json out;
    out.update(provenance(spec));
    out["command"] = "attack";
    out["D"] = D;
    out["n"] = spec.n;
    out["mode"] = report.exact ? "exact" : "mc";
    out["mean_guesses"] = rounded(report.mean_guesses, prec);
    out["exponent_estimate_nats"] = rounded(report.exponent_estimate, prec);
    out["theory_value_nats"] = rounded(theory.value, prec);
    out["theory_gap_nats"] = rounded(report.exponent_estimate - theory.value, prec);
    if (!report.exact) {
        out["trials"] = report.trials;
        out["std_error"] = rounded(report.std_error, prec);
    }
    if (!spec.joint_source) {
        out["strategy"] = {{"flat_length", flat_length}, {"segments", segment_count}};
    }
    return out.dump(2) + "\n";
}

std::string cmd_covering(const ProblemSpec& spec) {
    if (!spec.type_counts) {
        throw InvalidInputError("spec: type: required for the covering command");
    }
    if (!spec.D) throw InvalidInputError("spec: D: required for the covering command");
    if (spec.joint_source) {
        throw InvalidInputError("spec: covering requires a marginal source");
    }
    std::size_t n = 0;
    for (std::size_t c : *spec.type_counts) n += c;
    TypeComposition t(n, *spec.type_counts);
    CoveringSet cs = build_covering(t, spec.resolved_distortion(), *spec.D);

    Strategy s;
    s.n = n;
    s.x_size = spec.source->size();
    s.y_size = spec.resolved_distortion().y_size();
    s.segments.push_back(cs);
    s.flat = cs.guesses;

    const int prec = spec.precision;
    json out;
    out.update(provenance(spec));
    out["command"] = "covering";
    out["D"] = *spec.D;
    out["n"] = n;
    out["size"] = cs.guesses.size();
    out["log_size_rate_nats"] =
        rounded(std::log(static_cast<double>(cs.guesses.size())) / static_cast<double>(n),
                prec);
    out["rd_rate_nats"] = rounded(cs.rd_rate, prec);
    out["delta_n"] = rounded(cs.slack, prec);
    out["verified"] = cs.verified;
    out["strategy_text"] = strategy_to_text(s);
    return out.dump(2) + "\n";
}

std::string cmd_rd_curve(const ProblemSpec& spec) {
    if (spec.grid.empty()) throw InvalidInputError("spec: grid: required for rd-curve");
    if (spec.joint_source) {
        throw InvalidInputError("spec: rd-curve requires a marginal source");
    }
    auto results = rd_curve(*spec.source, spec.resolved_distortion(), spec.grid);
    for (const auto& r : results) {
        if (!r.converged) {
            throw ConvergenceError("rate-distortion solver did not converge at D=" +
                                   std::to_string(r.target_d));
        }
    }
    const double uf = unit_factor(spec);
    const int prec = spec.precision;
    std::ostringstream out;
    out << csv_preamble(spec);
    out << "D,rate_" << spec.units << ",achieved_d,slope,iterations,converged\n";
    for (const auto& r : results) {
        out << fmt(r.target_d, prec) << ',' << fmt(r.rate * uf, prec) << ','
            << fmt(r.achieved_d, prec) << ',' << fmt(r.slope, prec) << ',' << r.iterations
            << ',' << (r.converged ? 1 : 0) << "\n";
    }
    return out.str();
}

}  // namespace

std::string run_command(const std::string& spec_json, const std::string& command,
                        const std::string& overrides_json) {
    json base;
    try {
        base = json::parse(spec_json);
    } catch (const json::parse_error& e) {
        throw InvalidInputError(std::string("spec: JSON parse error: ") + e.what());
    }
    if (!overrides_json.empty()) {
        json patch;
        try {
            patch = json::parse(overrides_json);
        } catch (const json::parse_error& e) {
            throw InvalidInputError(std::string("overrides: JSON parse error: ") + e.what());
        }
        if (!patch.is_object()) throw InvalidInputError("overrides: expected an object");
        for (auto& [k, v] : patch.items()) base[k] = v;
    }
    ProblemSpec spec = parse_problem_spec(base.dump());

    if (command == "exponent") return cmd_exponent(spec);
    if (command == "sweep") return cmd_sweep(spec);
    if (command == "attack") return cmd_attack(spec);
    if (command == "covering") return cmd_covering(spec);
    if (command == "rd-curve") return cmd_rd_curve(spec);
    throw InvalidInputError("unknown command: " + command);
}

}  // namespace authguess
