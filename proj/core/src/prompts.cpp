#include "breakpoint/prompts.hpp"

#include <vector>

#include "breakpoint/error.hpp"

namespace breakpoint {

namespace templates {
extern const std::string_view corruption_prompt;
extern const std::string_view solver_remove;
extern const std::string_view solver_discovery;
}  // namespace templates

std::string_view corruption_prompt_template() { return templates::corruption_prompt; }
std::string_view solver_remove_template() { return templates::solver_remove; }
std::string_view solver_discovery_template() { return templates::solver_discovery; }

std::vector<std::string> template_slots(std::string_view tmpl) {
  std::vector<std::string> slots;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    std::size_t eol = tmpl.find('\n', pos);
    if (eol == std::string_view::npos) eol = tmpl.size();
    const std::string_view line = tmpl.substr(pos, eol - pos);
    if (line.rfind("#! slots:", 0) == 0) {
      for (std::size_t b = line.find('{'); b != std::string_view::npos; b = line.find('{', b + 1)) {
        const std::size_t e = line.find('}', b);
        if (e == std::string_view::npos) break;
        slots.emplace_back(line.substr(b + 1, e - b - 1));
      }
    }
    pos = eol + 1;
  }
  return slots;
}

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  const auto slots = template_slots(tmpl);
  std::string body;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    std::size_t eol = tmpl.find('\n', pos);
    const std::size_t next = eol == std::string_view::npos ? tmpl.size() : eol + 1;
    const std::string_view line = tmpl.substr(pos, next - pos);
    if (line.rfind("#!", 0) != 0) body.append(line);
    pos = next;
  }
  // Leading blank lines left over from the header are not part of the prompt.
  const std::size_t first = body.find_first_not_of('\n');
  body.erase(0, first == std::string::npos ? body.size() : first);

  std::string out;
  out.reserve(body.size());
  for (std::size_t i = 0; i < body.size();) {
    if (body[i] == '{') {
      const std::size_t close = body.find('}', i);
      if (close != std::string::npos) {
        const std::string name = body.substr(i + 1, close - i - 1);
        bool declared = false;
        for (const auto& s : slots) declared = declared || s == name;
        if (declared) {
          auto it = values.find(name);
          if (it == values.end()) throw Error(Errc::InvalidArgument, "template slot '" + name + "' not provided");
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += body[i++];
  }
  return out;
}

}  // namespace breakpoint
