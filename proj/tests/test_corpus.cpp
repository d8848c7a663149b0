#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "convqual/corpus.hpp"
#include "convqual/error.hpp"

using namespace convqual;
using namespace convqual::corpus;
using nlohmann::json;

namespace {

json make_record(const std::string& id, int n_turns) {
  json turns = json::array();
  for (int i = 0; i < n_turns; ++i) {
    json t{{"speaker", i % 2 == 0 ? "user" : "system"},
           {"text", "turn " + std::to_string(i)}};
    if (i % 2 == 1) t["recommendations"] = {"item-1", "item-2"};
    turns.push_back(t);
  }
  return {{"id", id}, {"source", "simulated"}, {"turns", turns}};
}

}  // namespace

TEST_CASE("parse_dataset keeps valid records in file order") {
  std::stringstream in;
  in << make_record("a", 2).dump() << "\n"
     << make_record("b", 4).dump() << "\n"
     << make_record("c", 1).dump() << "\n";
  auto ds = parse_dataset(in, "<mem>");
  REQUIRE(ds.conversations.size() == 3);
  CHECK(ds.conversations[0].id == "a");
  CHECK(ds.conversations[1].id == "b");
  CHECK(ds.conversations[2].id == "c");
}

TEST_CASE("empty input yields an empty dataset") {
  std::stringstream in("");
  CHECK(parse_dataset(in, "<mem>").conversations.empty());
}

TEST_CASE("system-first conversation is rejected with its line number") {
  json bad{{"id", "b"},
           {"turns", json::array({{{"speaker", "system"}, {"text", "hello"}},
                                  {{"speaker", "user"}, {"text", "hi"}}})}};
  std::stringstream in;
  in << make_record("a", 2).dump() << "\n" << bad.dump() << "\n";
  CHECK_THROWS_WITH_AS(parse_dataset(in, "<mem>"),
                       "<mem>: line 2: conversation must begin with a User turn",
                       ValidationError);
}

TEST_CASE("skip-invalid downgrades malformed lines to warnings") {
  std::stringstream in;
  in << "not json\n" << make_record("a", 2).dump() << "\n";
  auto ds = parse_dataset(in, "<mem>", /*skip_invalid=*/true);
  REQUIRE(ds.conversations.size() == 1);
  CHECK(ds.conversations[0].id == "a");
}

TEST_CASE("duplicate ids are fatal even with skip-invalid") {
  std::stringstream in;
  in << make_record("a", 2).dump() << "\n" << make_record("a", 2).dump() << "\n";
  CHECK_THROWS_AS(parse_dataset(in, "<mem>", true), ValidationError);
}

TEST_CASE("validate_conversation accepts a well-formed record") {
  json rec{{"id", "c1"},
           {"turns", json::array(
                         {{{"speaker", "user"}, {"text", "hi"}},
                          {{"speaker", "system"},
                           {"text", "hello"},
                           {"recommendations", {"m1", "m2"}}}})}};
  auto out = validate_conversation(rec);
  REQUIRE(out.errors.empty());
  REQUIRE(out.conversation.has_value());
  CHECK(out.conversation->turns.size() == 2);
  CHECK(out.conversation->turns[1].recommendations.size() == 2);
  CHECK(out.conversation->source == Source::Unknown);
}

TEST_CASE("validation reports every violation, not just the first") {
  json rec{{"turns", json::array({{{"speaker", "user"}, {"text", "  "}},
                                  {{"speaker", "user"},
                                   {"text", "hello?"},
                                   {"recommendations", {"m1"}}}})}};
  auto out = validate_conversation(rec);
  CHECK(!out.conversation.has_value());
  // missing id, empty text, recs on user turn, non-alternating
  CHECK(out.errors.size() == 4);
}

TEST_CASE("session_text filters and joins") {
  Conversation c;
  c.id = "c";
  c.turns = {{Speaker::User, "I like sci-fi", {}},
             {Speaker::System, "Try Dune", {}}};
  CHECK(session_text(c, TurnFilter::UserOnly) == "I like sci-fi");
  CHECK(session_text(c, TurnFilter::All) == "I like sci-fi\nTry Dune");
  c.turns.push_back({Speaker::User, "c", {}});
  c.turns[0].text = "a";
  c.turns[1].text = "b";
  CHECK(session_text(c, TurnFilter::UserOnly) == "a\nc");
  CHECK(session_text(c, TurnFilter::SystemOnly) == "b");
}

TEST_CASE("parse -> serialize -> parse is identity") {
  std::stringstream in;
  for (int i = 0; i < 20; ++i) in << make_record("c" + std::to_string(i), 1 + i % 5).dump() << "\n";
  auto ds = parse_dataset(in, "<mem>");
  auto text = serialize_dataset(ds);
  std::stringstream again(text);
  auto ds2 = parse_dataset(again, "<mem>");
  CHECK(serialize_dataset(ds2) == text);
}

TEST_CASE("property: random mutations are accepted iff invariants hold") {
  std::mt19937 rng(42);
  for (int iter = 0; iter < 300; ++iter) {
    json rec = make_record("c", 1 + static_cast<int>(rng() % 6));
    int mutation = static_cast<int>(rng() % 5);
    bool should_fail = true;
    switch (mutation) {
      case 0: rec.erase("id"); break;
      case 1: rec["turns"][0]["text"] = ""; break;
      case 2: rec["turns"][0]["speaker"] = "system"; break;
      case 3: rec["turns"][0]["recommendations"] = {"m1"}; break;
      default: should_fail = false; break;
    }
    auto out = validate_conversation(rec);
    CHECK(out.errors.empty() == !should_fail);
    CHECK(out.conversation.has_value() == !should_fail);
  }
}

TEST_CASE("property: All text is at least as long as UserOnly text") {
  std::mt19937 rng(7);
  for (int iter = 0; iter < 100; ++iter) {
    auto out = validate_conversation(make_record("c", 1 + static_cast<int>(rng() % 8)));
    REQUIRE(out.conversation.has_value());
    CHECK(session_text(*out.conversation, TurnFilter::All).size() >=
          session_text(*out.conversation, TurnFilter::UserOnly).size());
  }
}
