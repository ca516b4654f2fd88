#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>

#include "nmr/csv.hpp"
#include "nmr/errors.hpp"

namespace nmr {

/// Experiment configuration. Defaults follow the reference setup:
/// P=64, C=512, H_z=4, E*F=35 (7 x 5), K=128, M=5, T=1, N=2.
struct RunConfig {
    int E = 7;
    int F = 5;
    int K = 128;
    int M = 5;
    int N = 2;
    int P = 64;
    int C = 512;
    int S = 1;
    int T = 1;
    int H_z = 4;
    double tau = 2.0;
    std::uint64_t seed = 0;
    double speed = 0.0;
    double eta_pc = 1.0;
    double eta_off = 1.0;
    double eta_ce = 1.0;
    int bins = 8;
    double inversion_tol = 1e-10;
    int max_iter = 100;
    int quad_order = 32;
    double length = 40.0;
    double width = 20.0;

    void validate() const {
        for (int n : {E, F, K, M, N, P, C, S, T, H_z, bins, quad_order})
            if (n < 1) throw InvalidArgument("RunConfig: all counts must be >= 1");
        if (E < 2 || F < 2) throw InvalidArgument("RunConfig: E and F must be >= 2");
        if (!(tau > 0.0)) throw InvalidArgument("RunConfig: tau must be positive");
        if (!(inversion_tol > 0.0)) throw InvalidArgument("RunConfig: tol must be positive");
        if (!(eta_pc >= 0.0 && eta_off >= 0.0 && eta_ce >= 0.0))
            throw InvalidArgument("RunConfig: loss weights must be non-negative");
        if (!(length > 0.0 && width > 0.0)) throw InvalidArgument("RunConfig: extents must be positive");
    }

    /// Sets one field from its textual value; returns false for unknown keys.
    bool set(const std::string& key, std::string_view value, std::size_t line = 0) {
        auto as_int = [&] { return static_cast<int>(csv::parse_int(value, line)); };
        auto as_double = [&] { return csv::parse_double(value, line); };
        if (key == "E") E = as_int();
        else if (key == "F") F = as_int();
        else if (key == "K") K = as_int();
        else if (key == "M") M = as_int();
        else if (key == "N") N = as_int();
        else if (key == "P") P = as_int();
        else if (key == "C") C = as_int();
        else if (key == "S") S = as_int();
        else if (key == "T") T = as_int();
        else if (key == "H_z") H_z = as_int();
        else if (key == "tau") tau = as_double();
        else if (key == "seed") seed = static_cast<std::uint64_t>(csv::parse_int(value, line));
        else if (key == "speed") speed = as_double();
        else if (key == "eta_pc") eta_pc = as_double();
        else if (key == "eta_off") eta_off = as_double();
        else if (key == "eta_ce") eta_ce = as_double();
        else if (key == "bins") bins = as_int();
        else if (key == "tol") inversion_tol = as_double();
        else if (key == "max_iter") max_iter = as_int();
        else if (key == "quad_order") quad_order = as_int();
        else if (key == "length") length = as_double();
        else if (key == "width") width = as_double();
        else return false;
        return true;
    }
};

/// `key = value` lines; '#' starts a comment, `[section]` headers are ignored
/// and values may be double-quoted.
inline RunConfig parse_run_config(std::istream& is, RunConfig base = {}) {
    std::string text;
    std::size_t lineno = 0;
    while (std::getline(is, text)) {
        ++lineno;
        std::string_view line = text;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = csv::trim(line);
        if (line.empty() || line.front() == '[') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError("config: expected key = value", lineno);
        const std::string key(csv::trim(line.substr(0, eq)));
        std::string_view value = csv::trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        if (!base.set(key, value, lineno)) throw ParseError("config: unknown key '" + key + "'", lineno);
    }
    try {
        base.validate();
    } catch (const InvalidArgument& ex) {
        throw ParseError(ex.what(), 0);
    }
    return base;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path, 0);
    return parse_run_config(in);
}

}  // namespace nmr
