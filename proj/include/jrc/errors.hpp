#ifndef JRC_ERRORS_HPP
#define JRC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace jrc {

// Exit codes used by the CLI: 0 success, 2 config, 3 I/O, 4 contract.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ContractViolation : std::logic_error {
    explicit ContractViolation(const std::string& msg) : std::logic_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ContractViolation(msg);
}

}  // namespace jrc

#endif
