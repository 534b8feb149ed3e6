#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ktwin/model.hpp"

namespace ktwin {

struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ResourceSet {
    std::vector<TwinInterface> interfaces;  // declaration order
    std::vector<TwinInstance> instances;    // declaration order
    size_t total() const { return interfaces.size() + instances.size(); }
};

// Parses one multi-document resource file (kind/metadata/spec layout, kinds
// TwinInterface and TwinInstance). `origin` labels diagnostics (file name).
// Unknown kinds and unknown fields are errors with file:line positions.
ResourceSet parse_definitions(const std::string& text, const std::string& origin = "<input>");

// Convenience: parse and concatenate several files from disk.
ResourceSet load_resource_files(const std::vector<std::string>& paths);

// Serializes resources back to the on-disk format (multi-document YAML).
std::string emit_resources(const ResourceSet& set);

}  // namespace ktwin
