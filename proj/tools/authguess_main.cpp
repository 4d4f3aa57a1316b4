// authguess: deception exponents, rate-distortion curves, and guessing
// attacks against distortion-tolerant authentication, driven by JSON
// problem spec files. Thin frontend over the C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "authguess/authguess.h"

namespace {

int fail(int code, const std::string& msg) {
    std::cerr << "authguess: " << msg << "\n";
    return code;
}

std::optional<std::string> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Write via a temp file in the same directory, then rename into place.
bool write_atomic(const std::string& path, const std::string& data) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) return false;
        out << data;
        if (!out.flush()) return false;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        return false;
    }
    return true;
}

struct CommonFlags {
    std::string spec_path;
    std::string out_path;
    std::optional<double> D;
    std::vector<double> grid;
    std::optional<long> n;
    std::optional<long> trials;
    std::optional<long long> seed;
    std::string mode;
    std::string units;
    std::string format;
    std::optional<int> precision;
    std::optional<double> grid_resolution;
    std::vector<long> type_counts;
    std::optional<double> converse_eps;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--spec", f.spec_path, "Problem spec file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", f.out_path, "Write output to FILE (atomic); default stdout");
    cmd->add_option("--D", f.D, "Distortion limit override");
    cmd->add_option("--grid", f.grid, "Distortion grid override")->delimiter(',');
    cmd->add_option("--n", f.n, "Block length override")->check(CLI::PositiveNumber);
    cmd->add_option("--trials", f.trials, "Monte-Carlo trial count override")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", f.seed, "RNG seed override")->check(CLI::NonNegativeNumber);
    cmd->add_option("--mode", f.mode, "Attack evaluation mode")
        ->check(CLI::IsMember({"exact", "mc"}));
    cmd->add_option("--units", f.units, "Output units")
        ->check(CLI::IsMember({"nats", "bits"}));
    cmd->add_option("--format", f.format, "Tabular output format")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--precision", f.precision, "Significant digits in outputs (1-17)")
        ->check(CLI::Range(1, 17));
    cmd->add_option("--grid-resolution", f.grid_resolution,
                    "Simplex grid resolution for the exponent search");
    cmd->add_option("--type", f.type_counts, "Type counts for the covering command")
        ->delimiter(',');
    cmd->add_option("--converse-eps", f.converse_eps, "Epsilon in the converse bound column");
}

std::string overrides_json(const CommonFlags& f) {
    nlohmann::json o = nlohmann::json::object();
    if (f.D) o["D"] = *f.D;
    if (!f.grid.empty()) o["grid"] = f.grid;
    if (f.n) o["n"] = *f.n;
    if (f.trials) o["trials"] = *f.trials;
    if (f.seed) o["seed"] = *f.seed;
    if (!f.mode.empty()) o["mode"] = f.mode;
    if (!f.units.empty()) o["units"] = f.units;
    if (!f.format.empty()) o["format"] = f.format;
    if (f.precision) o["precision"] = *f.precision;
    if (f.grid_resolution) o["grid_resolution"] = *f.grid_resolution;
    if (!f.type_counts.empty()) o["type"] = f.type_counts;
    if (f.converse_eps) o["converse_eps"] = *f.converse_eps;
    return o.dump();
}

int run(const std::string& command, const CommonFlags& f) {
    auto spec = read_file(f.spec_path);
    if (!spec) return fail(2, "cannot read spec file: " + f.spec_path);

    ag_problem* problem = nullptr;
    char* errmsg = nullptr;
    ag_status st = ag_problem_parse(spec->c_str(), &problem, &errmsg);
    if (st != AG_OK) {
        std::string msg = errmsg ? errmsg : "spec rejected";
        ag_string_free(errmsg);
        return fail(static_cast<int>(st), msg);
    }

    char* output = nullptr;
    st = ag_run(problem, command.c_str(), overrides_json(f).c_str(), &output, &errmsg);
    ag_problem_free(problem);
    if (st != AG_OK) {
        std::string msg = errmsg ? errmsg : "command failed";
        ag_string_free(errmsg);
        return fail(static_cast<int>(st), msg);
    }
    std::string doc = output ? output : "";
    ag_string_free(output);

    if (f.out_path.empty()) {
        std::cout << doc;
        return 0;
    }
    if (!write_atomic(f.out_path, doc)) {
        return fail(2, "cannot write output file: " + f.out_path);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Guessing attacks and deception exponents for "
                 "distortion-tolerant authentication"};
    app.set_version_flag("--version", std::string(ag_version()));
    app.require_subcommand(1);

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"exponent", "Compute the deception exponent E(D) (or E_Z(D) for a joint source)"},
        {"sweep", "Tabulate E(D), argmax Q, R(D,P), and the converse bound over a D grid"},
        {"attack", "Build the guessing strategy and evaluate expected guesses"},
        {"covering", "Construct and verify a distortion covering of one type class"},
        {"rd-curve", "Tabulate the rate-distortion function over a D grid"},
    };
    std::vector<CommonFlags> flags(commands.size());
    for (std::size_t i = 0; i < commands.size(); ++i) {
        add_common(app.add_subcommand(commands[i].first, commands[i].second), flags[i]);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    for (std::size_t i = 0; i < commands.size(); ++i) {
        if (app.get_subcommand(commands[i].first)->parsed()) {
            return run(commands[i].first, flags[i]);
        }
    }
    return 2;
}
