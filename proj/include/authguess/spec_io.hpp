#pragma once

// Problem specification files (JSON) and the command runner shared by the
// C API and the CLI.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "authguess/prob.hpp"
#include "authguess/rd.hpp"

namespace authguess {

inline constexpr const char* kToolVersion = "0.1.0";

struct ProblemSpec {
    std::optional<Pmf> source;           // exactly one of source / joint_source
    std::optional<JointPmf> joint_source;
    std::optional<DistortionSpec> distortion;  // defaults to Hamming on X
    std::optional<double> D;
    std::vector<double> grid;            // sweep / rd-curve grid
    std::size_t n = 10;
    long trials = 100000;
    std::uint64_t seed = 1;
    std::string mode = "exact";          // "exact" | "mc"
    double grid_resolution = 0.01;
    std::optional<std::vector<std::size_t>> type_counts;  // covering subcommand
    std::string units = "nats";          // "nats" | "bits"
    std::string format = "json";         // "json" | "csv"
    int precision = 6;                   // significant digits in outputs
    double converse_eps = 0.1;           // eps for the sweep converse column
    std::string raw;                     // original text, hashed for provenance

    const DistortionSpec& resolved_distortion() const { return *distortion; }
    std::size_t x_size() const;
};

// Parse and validate. Throws InvalidInputError with field-level diagnostics.
ProblemSpec parse_problem_spec(const std::string& json_text);

// FNV-1a 64-bit over the spec text; stamped into every output.
std::uint64_t spec_hash(const std::string& text);

// Execute a subcommand ("exponent", "sweep", "attack", "covering",
// "rd-curve") against a spec, with a JSON object of field overrides applied
// first ("{}" for none). Returns the output document (JSON or CSV per the
// spec's format). Throws InvalidInputError, SizeLimitError, or
// ConvergenceError.
std::string run_command(const std::string& spec_json, const std::string& command,
                        const std::string& overrides_json);

}  // namespace authguess
