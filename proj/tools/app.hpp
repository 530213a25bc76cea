#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "foilgen/error.hpp"
#include "json.hpp"

// Command implementations behind the foilgen executable. Each command takes a
// JSON config (flags as given on the command line), fills in defaults, runs,
// and reports the fully resolved config plus the files it read and wrote so a
// manifest can replay it.
namespace foilgen::app {

using Json = nlohmann::json;

class UsageError : public Error {
public:
    using Error::Error;
};

struct RunResult {
    Json config;  // resolved
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
};

// --seed if given, else FOILGEN_SEED, else 1.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag);

RunResult gen_data(const Json& cfg, std::ostream& log);
RunResult train(const Json& cfg, std::ostream& log);
RunResult generate(const Json& cfg, std::ostream& log);
RunResult evaluate(const Json& cfg, std::ostream& log);
RunResult latent_map(const Json& cfg, std::ostream& log);

RunResult run(const std::string& command, const Json& cfg, std::ostream& log);

// Written next to the first output as <output>.manifest.json.
Json make_manifest(const std::string& command, const RunResult& result, double seconds);
std::string manifest_path_for(const RunResult& result);
// Runs the command and writes its manifest; returns the manifest path.
std::string run_with_manifest(const std::string& command, const Json& cfg, std::ostream& log);

struct RerunOutcome {
    std::vector<std::string> identical;
    std::vector<std::string> changed;
    bool ok() const { return changed.empty(); }
};

// Replays a manifest and compares every output's checksum with the recorded one.
RerunOutcome rerun(const std::string& manifest_path, std::ostream& log);

// "lo:hi:step" or "v1,v2,...".
std::vector<double> parse_values(const std::string& spec);

}  // namespace foilgen::app
