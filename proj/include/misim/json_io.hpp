#pragma once

#include <string>

#include "misim/runner.hpp"

namespace misim {

/// JSON (de)serialization of manifests and scenario configurations. Schema
/// documented in the README; malformed input raises ConfigError.
RunManifest manifest_from_json_text(const std::string& text,
                                    const std::string& base_dir = ".");
RunManifest load_manifest(const std::string& path);
std::string manifest_to_json_text(const RunManifest& manifest);

RunManifest basic_manifest();
RunManifest extreme_manifest();
RunManifest realistic_shaped_manifest();

}  // namespace misim
