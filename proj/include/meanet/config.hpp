#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "meanet/hyper.hpp"
#include "meanet/sampler.hpp"

namespace meanet {

// Merged run settings with per-key provenance. Precedence:
// built-in defaults < config file < command-line flags.
class RunConfig {
public:
    // flag_overrides: (key, value) pairs from explicitly supplied flags.
    // Unknown keys, from either source, are config errors.
    static RunConfig make(const std::string& config_path,
                          const std::vector<std::pair<std::string, std::string>>& flag_overrides);

    static const std::map<std::string, std::string>& defaults();

    const std::string& get(const std::string& key) const;
    bool has(const std::string& key) const;  // present with a non-empty value

    double get_double(const std::string& key) const;
    int get_int(const std::string& key) const;
    std::int64_t get_int64(const std::string& key) const;
    std::uint64_t get_uint64(const std::string& key) const;
    bool get_bool(const std::string& key) const;

    HyperParams hyper_params() const;
    SamplerConfig sampler_config() const;  // seed/threads/iterations/... applied

    const std::map<std::string, std::string>& values() const { return values_; }
    const std::map<std::string, std::string>& provenance() const { return provenance_; }

    // manifest.json (command, merged values, provenance) and replay.cfg
    // (flat key = value file reproducing this exact configuration).
    void write_manifest(const std::string& dir, const std::string& command) const;

private:
    std::map<std::string, std::string> values_;
    std::map<std::string, std::string> provenance_;
};

// Flat `key = value` file; '#' lines and blank lines ignored.
std::map<std::string, std::string> parse_config_file(const std::string& path);

} // namespace meanet
