#pragma once

#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>

#include "procex/errors.hpp"
#include "procex/process_model.hpp"

namespace procex::testing {

inline std::string data_path(const std::string& file) { return std::string(PROCEX_DATA_DIR) + "/" + file; }

inline std::string read_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

inline std::string loan_text() { return read_text(data_path("loan.bp")); }
inline ProcessDefinition loan() { return parse_process(loan_text()); }

/// Kind of the `Error` thrown by `fn`, or nullopt when it returns normally.
inline std::optional<ErrorKind> error_kind(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    return std::nullopt;
}

}  // namespace procex::testing
