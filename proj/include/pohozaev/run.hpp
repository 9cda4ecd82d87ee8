#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pohozaev/config.hpp"
#include "pohozaev/error.hpp"

namespace pohozaev {

// Process exit codes, one per error class.
enum ExitCode : int {
    ExitOk = 0,
    ExitIo = 1,
    ExitConfig = 2,          // ParseError, ValidationError, EpsilonTooLarge
    ExitNonadmissible = 3,   // NonadmissibleExponents
    ExitPhi = 4,             // PhiNonpositive, PhiNeverPositive
    ExitNoConvergence = 5,   // NoConvergence, NotOnManifold
    ExitGridTooCoarse = 6,
    ExitHypothesis = 7,      // a non-surrogate hypothesis check failed
    ExitBracket = 8,         // BracketNotFound
    ExitNonFinite = 9,       // NonFiniteValue
    ExitUnexpected = 10,
};

int exit_code(ErrorKind kind);

// Relative output directories are resolved against $POHOZAEV_OUTPUT_ROOT when set.
std::filesystem::path output_directory(const OutputConfig& out);

struct RunResult {
    int exit_code = ExitOk;
    std::filesystem::path directory;
    std::vector<std::string> artifacts;  // file names relative to `directory`
    std::string message;                 // error text when exit_code != 0
};

// Executes the configured command and writes its artifacts. Errors are mapped
// to exit codes; whatever was computed before a failure is still written and
// flagged "partial" in summary.json.
RunResult run(const RunConfig& cfg, std::ostream& log);

}  // namespace pohozaev
