// Copyright 2026 The Cadence Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <string>
#include <vector>

#include <doctest.h>

#include "cadence/chat.hpp"
#include "cadence/common.hpp"

using namespace cadence;
using namespace cadence::chat;

namespace {

const char* kSmallDoc =
    "@Begin\n"
    "@Languages:\teng\n"
    "@Participants:\tPAR S007 Participant, INV Investigator\n"
    "@Media:\tS007, audio\n"
    "*INV:\ttell me about the picture .\n"
    "*PAR:\tthe boy is on the stool\n"
    "\tand he is reaching up .\n"
    "%mor:\tdet|the n|boy cop|is .\n"
    "*PAR:\t&-uh the water is (.) spilling .\n"
    "@End\n";

}  // namespace

TEST_CASE("parser splits headers, turns, tiers and continuations") {
  const ChatDocument doc = ParseChat(kSmallDoc);

  REQUIRE(doc.headers.size() == 5);
  CHECK(doc.headers[0].first == "Begin");
  CHECK(doc.headers[1].first == "Languages");
  CHECK(doc.headers[1].second == "eng");
  CHECK(doc.headers[3].second == "S007, audio");

  REQUIRE(doc.utterances.size() == 3);
  CHECK(doc.utterances[0].speaker == "INV");
  CHECK(doc.utterances[1].speaker == "PAR");
  CHECK(doc.utterances[1].raw_text == "the boy is on the stool and he is reaching up .");
  REQUIRE(doc.utterances[1].dependent_tiers.count("mor") == 1);
  CHECK(doc.utterances[2].raw_text == "&-uh the water is (.) spilling .");
}

TEST_CASE("parser reports located errors") {
  SUBCASE("dependent tier before any utterance") {
    try {
      ParseChat("@Begin\n%mor:\tdet|the .\n");
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kChatSyntax);
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("bad speaker code") {
    try {
      ParseChat("@Begin\n*par:\thello .\n");
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kChatSyntax);
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("junk line") {
    try {
      ParseChat("@Begin\nhello there\n");
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kChatSyntax);
    }
  }
  SUBCASE("continuation with nothing to continue") {
    try {
      ParseChat("\tfloating text\n");
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kChatSyntax);
      CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
  }
}

TEST_CASE("cleaner strips annotation down to plain words") {
  SUBCASE("fillers, pauses, punctuation, bullets") {
    const auto toks =
        CleanUtteranceText("&-uh the water is (.) spilling . \x15""8840_9520\x15");
    CHECK(toks == std::vector<std::string>{"the", "water", "is", "spilling"});
  }
  SUBCASE("retrace marks keep the repeated words") {
    const auto toks = CleanUtteranceText("<the boy> [//] the boy is climbing .");
    CHECK(toks == std::vector<std::string>{"the", "boy", "the", "boy", "is", "climbing"});
  }
  SUBCASE("retrace groups can be dropped instead") {
    CleanOptions opts;
    opts.keep_retraced_words = false;
    const auto toks = CleanUtteranceText("<the boy> [//] the boy is climbing .", opts);
    CHECK(toks == std::vector<std::string>{"the", "boy", "is", "climbing"});
  }
  SUBCASE("bracketed content drops entirely") {
    const auto toks = CleanUtteranceText("the jar [x 3] falls [= glass jar] down .");
    CHECK(toks == std::vector<std::string>{"the", "jar", "falls", "down"});
  }
  SUBCASE("unintelligible and event tokens drop") {
    const auto toks = CleanUtteranceText("xxx the boy yyy www &=laughs runs +...");
    CHECK(toks == std::vector<std::string>{"the", "boy", "runs"});
  }
  SUBCASE("special form markers truncate, compounds split, case folds") {
    const auto toks = CleanUtteranceText("Mommy@d washes the cookie_jar .");
    CHECK(toks == std::vector<std::string>{"mommy", "washes", "the", "cookie", "jar"});
  }
  SUBCASE("parenthesized completions keep their letters") {
    const auto toks = CleanUtteranceText("(be)cause it (i)s fallin(g) .");
    CHECK(toks == std::vector<std::string>{"because", "it", "is", "falling"});
  }
  SUBCASE("empty after cleaning") {
    CHECK(CleanUtteranceText("&-um (.) xxx .").empty());
  }
}

TEST_CASE("extraction keeps only the requested speaker") {
  const ChatDocument doc = ParseChat(kSmallDoc);
  const Transcript t = ExtractInterventions(doc);
  CHECK(t.subject_id == "S007");
  REQUIRE(t.interventions.size() == 2);
  CHECK(t.interventions[0] ==
        std::vector<std::string>{"the", "boy", "is", "on", "the", "stool", "and", "he",
                                 "is", "reaching", "up"});
  CHECK(t.interventions[1] == std::vector<std::string>{"the", "water", "is", "spilling"});
  CHECK(t.TotalTokens() == 15);
}

TEST_CASE("utterances that clean to nothing contribute no intervention") {
  const ChatDocument doc = ParseChat(
      "@Media:\tS001, audio\n"
      "*PAR:\t&-um xxx .\n"
      "*PAR:\tthe girl laughs .\n");
  const Transcript t = ExtractInterventions(doc);
  REQUIRE(t.interventions.size() == 1);
  CHECK(t.interventions[0] == std::vector<std::string>{"the", "girl", "laughs"});
}

TEST_CASE("transcript json round-trip preserves content") {
  Transcript t;
  t.subject_id = "S042";
  t.interventions = {{"the", "boy"}, {"water", "is", "spilling"}};
  const std::string j = TranscriptToJson(t);
  const Transcript back = TranscriptFromJson(j);
  CHECK(back.subject_id == t.subject_id);
  CHECK(back.interventions == t.interventions);
}
