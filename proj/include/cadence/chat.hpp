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

#ifndef CADENCE_CHAT_HPP_
#define CADENCE_CHAT_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace cadence::chat {

// One main tier line (speaker turn) with its dependent tiers.
struct Utterance {
  std::string speaker;  // 3-letter uppercase code, e.g. PAR, INV
  std::string raw_text;
  std::map<std::string, std::string> dependent_tiers;  // "mor" -> "..."
};

struct ChatDocument {
  std::vector<std::pair<std::string, std::string>> headers;  // key without '@'
  std::vector<Utterance> utterances;
};

// Participant-only token lists, one list per intervention.
struct Transcript {
  std::string subject_id;
  std::vector<std::vector<std::string>> interventions;

  std::size_t TotalTokens() const {
    std::size_t n = 0;
    for (const auto& iv : interventions) n += iv.size();
    return n;
  }
};

// Line-oriented CHAT parser.
//
// Grammar accepted (one construct per physical line):
//   @Key            or @Key:<TAB>value        header line
//   *SPK:<TAB>text                            main tier (speaker turn)
//   %tier:<TAB>text                           dependent tier of the turn above
//   <TAB or space>text                        continuation of the previous line
// Empty lines are ignored. Anything else is a located parse error, as is a
// dependent tier with no preceding utterance.
ChatDocument ParseChat(const std::string& text);

ChatDocument ParseChatFile(const std::filesystem::path& path);

struct CleanOptions {
  // "[//]"-style retracing marks are dropped but the retraced words stay:
  // repetition is real subject speech. Set false to drop <...> retrace
  // groups entirely.
  bool keep_retraced_words = true;
};

// Keeps only the requested speaker's utterances and reduces each one to
// plain lowercase words: bracketed annotation, <> group markers, &-prefixed
// fillers and events, +codes, timing bullets, unintelligible markers
// (xxx/yyy/www), punctuation and dependent tiers are all removed.
// Utterances that clean down to nothing contribute no intervention.
Transcript ExtractInterventions(const ChatDocument& doc,
                                const std::string& speaker = "PAR",
                                const CleanOptions& options = {});

// Token cleaner for a single raw tier text (exposed for tests).
std::vector<std::string> CleanUtteranceText(const std::string& raw,
                                            const CleanOptions& options = {});

// Transcript handoff format: {"subject_id": ..., "interventions": [[...]]}.
std::string TranscriptToJson(const Transcript& t);
Transcript TranscriptFromJson(const std::string& json_text);

}  // namespace cadence::chat

#endif  // CADENCE_CHAT_HPP_
