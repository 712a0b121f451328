#pragma once

#include "vtseg/pipeline.hpp"

#include <map>
#include <string>
#include <vector>

namespace vtseg {

// Process exit codes shared by every subcommand.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int internal = 1;
inline constexpr int usage = 2;       // argument/config errors
inline constexpr int io = 3;          // file I/O and format errors
inline constexpr int no_proposal = 4; // coarse stage found nothing
inline constexpr int eval_mismatch = 5;
} // namespace exit_code

enum class ConfigSource { Default, File, Flag };
const char* to_string(ConfigSource s);

// Pipeline configuration as ordered text key/value pairs with provenance.
// Precedence: flag > config file > built-in default.
class EffectiveConfig {
public:
    EffectiveConfig(); // built-in defaults

    void apply_file(const std::map<std::string, std::string>& kv);
    void apply_flag(const std::string& key, const std::string& value);

    const std::string& value(const std::string& key) const;
    ConfigSource source(const std::string& key) const;
    const std::vector<std::string>& keys() const { return order_; }

    // Parses and loads predictor inputs; throws ConfigError / IoError /
    // FormatError.
    PipelineConfig materialize() const;

private:
    void set(const std::string& key, const std::string& value, ConfigSource src);

    std::vector<std::string> order_;
    std::map<std::string, std::pair<std::string, ConfigSource>> values_;
};

PredictorSpec parse_predictor(const std::string& text);

// Entry point used by main(); returns a process exit code and never throws.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args); // args without argv[0]

} // namespace vtseg
