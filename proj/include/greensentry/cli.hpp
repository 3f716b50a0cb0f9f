#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace greensentry::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericalAbort = 3 };

/// Entry point behind the `greensentry` executable; args excludes argv[0].
/// Subcommands: simulate, ingest, label, inject, train, detect, reproduce.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Lowercase hex SHA-256 of a file's bytes.
std::string file_digest(const std::string& path);

}  // namespace greensentry::cli
