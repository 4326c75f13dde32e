#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fklab/verify.hpp"

namespace fklab {

// Invalid experiment input (syntax or semantic).  The CLI maps this to exit
// status 2; messages carry "file:line" or a dotted field path.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    int schema_version = 1;
    std::vector<DomainSpec> domains;
    CoefficientSpec coefficients;
    PotentialSpec potential;
    double h = 1.0 / 16.0;
    std::uint64_t seed = 1234;
    int paths = 20000;
    double horizon = 0.0;  // optional fixed horizon for path statistics; 0 = auto
    std::string out_dir = "out";
    PipelineOpts pipeline;
};

// Parse the documented TOML subset: [table], [[domain]] blocks, bare keys,
// strings, numbers, booleans, and single-line arrays.  Unknown keys are
// rejected so typos cannot silently fall back to defaults.
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);
ExperimentConfig load_config(const std::string& path);

}  // namespace fklab
