#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace breakpoint {

/// Raw template files compiled into the library (with their "#!" header lines).
std::string_view corruption_prompt_template();
std::string_view solver_remove_template();
std::string_view solver_discovery_template();

/// Drops "#!" header lines and replaces each "{slot}" with its value. A slot
/// missing from `values` raises Error(InvalidArgument); braces that do not
/// name a declared slot are left alone.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& values);

/// Slot names declared in the "#! slots:" header line.
std::vector<std::string> template_slots(std::string_view tmpl);

}  // namespace breakpoint
