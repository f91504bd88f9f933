#pragma once

#include <stdexcept>
#include <string>

namespace efloat {

// Error categories, mapped to distinct process exit codes by the CLI.
enum class errc {
    config,    // invalid parameter combination (bad n/K, bad flags)
    data,      // malformed or inconsistent input (files, streams, symbols)
    capacity,  // alphabet does not fit the requested code width
    contract,  // caller violated a documented precondition
};

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

inline const char* errc_name(errc c) noexcept {
    switch (c) {
    case errc::config: return "config";
    case errc::data: return "data";
    case errc::capacity: return "capacity";
    case errc::contract: return "contract";
    }
    return "unknown";
}

} // namespace efloat
