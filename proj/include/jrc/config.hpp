#ifndef JRC_CONFIG_HPP
#define JRC_CONFIG_HPP

#include <string>

#include "jrc/harness.hpp"

namespace jrc {

// Loads a scenario config (JSON). Unknown keys fail fast with ConfigError.
Scenario load_scenario(const std::string& path);

}  // namespace jrc

#endif
