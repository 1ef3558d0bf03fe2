#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace glyphsmith::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

/// Command-line flags; each one overrides the matching config entry.
struct CommandOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> table;
  std::optional<std::filesystem::path> glyphs;
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::string> chars;  // file path or inline list
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n;       // synth
  std::optional<std::string> layout;  // synth
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"stats", "render", "train", "eval",
                                              "compose", "extend", "gradcheck", "synth"};
  return names;
}

/// Parses "--chars": the contents of an existing file, or an inline list.
/// Tokens are separated by whitespace or commas; a "U+XXXX" token is one
/// code point, any other token contributes each of its characters.
std::vector<char32_t> parse_char_list(const std::string& arg);

/// Merged view of the config file (if any) and the flags.
RunConfig resolve_config(const CommandOptions& options);

int cmd_stats(const RunConfig& config, std::ostream& out);
int cmd_render(const RunConfig& config, const std::vector<char32_t>& chars, std::ostream& out);
int cmd_train(const RunConfig& config, std::ostream& out);
int cmd_eval(const RunConfig& config, std::ostream& out);
int cmd_compose(const RunConfig& config, const std::vector<char32_t>& chars, std::ostream& out);
int cmd_extend(const RunConfig& config, const std::vector<char32_t>& chars, std::ostream& out);
int cmd_gradcheck(const RunConfig& config, std::ostream& out);
int cmd_synth(const RunConfig& config, std::ostream& out);

/// Runs one command and maps failures to exit codes: ConfigError 1;
/// ParseError, DataError, FormatError, ShapeError 2; NumericalError 3.
/// Messages go to `err`.
int run_command(const std::string& name, const CommandOptions& options, std::ostream& out, std::ostream& err);

}  // namespace glyphsmith::cli
