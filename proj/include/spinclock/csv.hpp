#pragma once

#include "spinclock/config.hpp"
#include "spinclock/version.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>

// Stable output headers: every file starts with comment lines recording the
// tool version, subcommand, master seed, and the full resolved configuration.

namespace spinclock {

inline void write_output_header(std::ostream& os, const std::string& cmd, std::uint64_t seed,
                                const ParsedConfig& cfg) {
    os << "# spinclock " << kVersion << "\n";
    os << "# cmd=" << cmd << " seed=" << seed << "\n";
    std::istringstream dump(dump_config(cfg));
    std::string line;
    while (std::getline(dump, line)) os << "# " << line << "\n";
}

inline std::string format_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace spinclock
