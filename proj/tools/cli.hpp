#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace procex::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsageError = 2;

/// Runs one command line. `args` excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// `--help` text for a subcommand, or for the program when `subcommand` is empty.
std::string help_text(std::string_view subcommand = {});

std::vector<std::string> subcommand_names();

}  // namespace procex::cli
