#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace convqual::corpus {

enum class Speaker { User, System };
enum class Source { Human, Simulated, Unknown };
enum class TurnFilter { UserOnly, SystemOnly, All };

struct Turn {
  Speaker speaker = Speaker::User;
  std::string text;
  std::vector<std::string> recommendations;  // system turns only
};

struct Conversation {
  std::string id;
  Source source = Source::Unknown;
  std::optional<std::string> generator_version;
  std::vector<Turn> turns;
};

struct Dataset {
  std::vector<Conversation> conversations;
  std::string source_path;
};

std::string to_string(Speaker s);
std::string to_string(Source s);

// Decodes one JSONL record. Collects every invariant violation rather than
// stopping at the first; `conversation` is set only when `errors` is empty.
struct ValidationOutcome {
  std::optional<Conversation> conversation;
  std::vector<std::string> errors;
};
ValidationOutcome validate_conversation(const nlohmann::json& record);

// One conversation per non-blank line. Malformed lines abort with a
// line-numbered ValidationError unless skip_invalid is set; duplicate ids
// are always fatal.
Dataset parse_dataset(std::istream& in, const std::string& source_path,
                      bool skip_invalid = false);
Dataset load_dataset(const std::string& path, bool skip_invalid = false);

nlohmann::json conversation_to_json(const Conversation& c);
std::string serialize_dataset(const Dataset& ds);

// Texts of the selected turns joined by single newlines, in turn order.
std::string session_text(const Conversation& c, TurnFilter filter);

}  // namespace convqual::corpus
