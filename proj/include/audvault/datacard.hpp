#pragma once

#include "audvault/dependency.hpp"
#include "audvault/header.hpp"

#include <string>

namespace audvault {

/// Markdown data card: metadata, description, per-table columns, schemes and
/// media statistics taken from the dependency table. Deterministic.
std::string render_datacard(const Header& header, const DependencyTable& deps);

}  // namespace audvault
