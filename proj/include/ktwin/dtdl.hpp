#pragma once

#include <string>
#include <vector>

#include "ktwin/resources.hpp"

namespace ktwin {

struct DtdlImport {
    ResourceSet resources;              // interfaces only; DTDL carries no instances
    std::vector<std::string> warnings;  // populated only in permissive mode
};

// Converts a DTDL v2 identifier to an interface name:
// strip the dtmi: prefix, drop the ;version suffix, map ':' and '_' to '-',
// lowercase. Throws ResourceError when the identifier is not a dtmi.
std::string dtmi_to_name(const std::string& dtmi);

// Imports DTDL v2 interface documents (a single object or an array of them).
// Telemetry and Component contents are unsupported: strict mode throws,
// permissive mode skips them and records a warning.
DtdlImport import_dtdl(const std::string& json_text, const std::string& origin = "<input>",
                       bool permissive = false);

DtdlImport import_dtdl_files(const std::vector<std::string>& paths, bool permissive = false);

}  // namespace ktwin
