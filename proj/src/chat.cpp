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

#include "cadence/chat.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cadence/common.hpp"

namespace cadence::chat {

namespace {

using json = nlohmann::json;

[[noreturn]] void SyntaxError(std::size_t line_no, const std::string& what) {
  throw Error(ErrorKind::kData, ErrorCode::kChatSyntax,
              "chat parse error at line " + std::to_string(line_no) + ": " + what);
}

bool IsUpperAlpha3(const std::string& s) {
  if (s.size() != 3) return false;
  for (char c : s) {
    if (c < 'A' || c > 'Z') return false;
  }
  return true;
}

// Splits "*PAR:\ttext" after the prefix char; returns {code, body}.
std::pair<std::string, std::string> SplitTier(const std::string& line,
                                              std::size_t line_no) {
  const std::size_t colon = line.find(':');
  if (colon == std::string::npos) {
    SyntaxError(line_no, "tier line without ':'");
  }
  std::string code = line.substr(1, colon - 1);
  std::string body = line.substr(colon + 1);
  if (!body.empty() && (body.front() == '\t' || body.front() == ' ')) {
    body.erase(body.begin());
  }
  return {code, body};
}

}  // namespace

ChatDocument ParseChat(const std::string& text) {
  ChatDocument doc;

  // What the previous line contributed to, for continuations.
  enum class Prev { kNone, kHeader, kUtterance, kDependent };
  Prev prev = Prev::kNone;
  std::string prev_tier;  // dependent tier name when prev == kDependent

  std::size_t line_no = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    const char c0 = line.front();
    if (c0 == '@') {
      const std::size_t colon = line.find(':');
      std::string key, value;
      if (colon == std::string::npos) {
        key = line.substr(1);
      } else {
        key = line.substr(1, colon - 1);
        value = line.substr(colon + 1);
        if (!value.empty() && (value.front() == '\t' || value.front() == ' ')) {
          value.erase(value.begin());
        }
      }
      if (key.empty()) SyntaxError(line_no, "empty header key");
      doc.headers.emplace_back(key, value);
      prev = Prev::kHeader;
    } else if (c0 == '*') {
      auto [code, body] = SplitTier(line, line_no);
      if (!IsUpperAlpha3(code)) {
        SyntaxError(line_no, "speaker code '" + code + "' is not 3 uppercase letters");
      }
      Utterance u;
      u.speaker = code;
      u.raw_text = body;
      doc.utterances.push_back(std::move(u));
      prev = Prev::kUtterance;
    } else if (c0 == '%') {
      auto [code, body] = SplitTier(line, line_no);
      if (code.empty()) SyntaxError(line_no, "empty dependent tier name");
      if (doc.utterances.empty()) {
        SyntaxError(line_no, "dependent tier %" + code + " before any utterance");
      }
      auto& tiers = doc.utterances.back().dependent_tiers;
      auto [it, inserted] = tiers.emplace(code, body);
      if (!inserted) {
        it->second += " " + body;
      }
      prev = Prev::kDependent;
      prev_tier = code;
    } else if (c0 == '\t' || c0 == ' ') {
      std::size_t start = line.find_first_not_of(" \t");
      std::string body = start == std::string::npos ? "" : line.substr(start);
      switch (prev) {
        case Prev::kHeader:
          doc.headers.back().second += " " + body;
          break;
        case Prev::kUtterance:
          doc.utterances.back().raw_text += " " + body;
          break;
        case Prev::kDependent:
          doc.utterances.back().dependent_tiers[prev_tier] += " " + body;
          break;
        case Prev::kNone:
          SyntaxError(line_no, "continuation line with nothing to continue");
      }
    } else {
      SyntaxError(line_no, std::string("unrecognized line prefix '") + c0 + "'");
    }
  }
  return doc;
}

ChatDocument ParseChatFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::kData, ErrorCode::kIoFailure,
                "cannot open transcript: " + path.string());
  }
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return ParseChat(text);
}

namespace {

bool IsUnintelligible(const std::string& tok) {
  return tok == "xxx" || tok == "yyy" || tok == "www";
}

// Characters CHAT uses for annotation; none may survive cleaning.
bool IsAnnotationChar(char c) {
  switch (c) {
    case '[': case ']': case '<': case '>': case '&': case '+':
    case '%': case '@': case ':':
      return true;
    default:
      return false;
  }
}

}  // namespace

std::vector<std::string> CleanUtteranceText(const std::string& raw,
                                            const CleanOptions& options) {
  // Pass 1: remove timing bullets (0x15...0x15) and [...] groups, resolve
  // <...> retrace groups. Bracket groups do not nest in CHAT but a depth
  // counter keeps malformed input from derailing the cleaner.
  std::string flat;
  flat.reserve(raw.size());
  int bracket_depth = 0;
  int angle_depth = 0;
  bool in_bullet = false;
  for (char c : raw) {
    if (c == '\x15') {
      in_bullet = !in_bullet;
      continue;
    }
    if (in_bullet) continue;
    if (c == '[') {
      ++bracket_depth;
      continue;
    }
    if (c == ']') {
      if (bracket_depth > 0) --bracket_depth;
      continue;
    }
    if (bracket_depth > 0) continue;
    if (c == '<') {  // group marker itself never survives
      ++angle_depth;
      continue;
    }
    if (c == '>') {
      if (angle_depth > 0) --angle_depth;
      continue;
    }
    if (angle_depth > 0 && !options.keep_retraced_words) continue;
    flat.push_back(c);
  }

  // Pass 2: tokenize on whitespace, then clean each token.
  std::vector<std::string> tokens;
  std::istringstream in(flat);
  std::string tok;
  while (in >> tok) {
    if (tok.front() == '&' || tok.front() == '+') continue;  // fillers, codes
    std::string cleaned;
    cleaned.reserve(tok.size());
    for (std::size_t i = 0; i < tok.size(); ++i) {
      char c = tok[i];
      if (c == '(' || c == ')') continue;  // (be)cause -> because
      if (c == '.' || c == ',' || c == '!' || c == '?' || c == ';' ||
          c == '"' || c == '/' || c == '^' || c == '*' || c == '=' ||
          c == '~') {
        continue;
      }
      if (c == '\xE2') {  // UTF-8 bullet/dash: drop the whole 3-byte sequence
        if (i + 2 < tok.size()) i += 2;
        continue;
      }
      if (c == '_') {  // compound marker: split into separate words
        if (!cleaned.empty()) {
          tokens.push_back(cleaned);
          cleaned.clear();
        }
        continue;
      }
      if (c == '@') break;  // special-form suffix: keep the word, drop the tag
      if (IsAnnotationChar(c)) continue;
      cleaned.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (cleaned.empty()) continue;
    if (IsUnintelligible(cleaned)) continue;
    tokens.push_back(cleaned);
  }
  return tokens;
}

Transcript ExtractInterventions(const ChatDocument& doc, const std::string& speaker,
                                const CleanOptions& options) {
  Transcript t;
  for (const auto& [key, value] : doc.headers) {
    if (key == "Media") {
      // "@Media:\tS001, audio" -> subject id up to the first comma.
      const std::size_t comma = value.find(',');
      t.subject_id = value.substr(0, comma);
    }
  }
  for (const auto& u : doc.utterances) {
    if (u.speaker != speaker) continue;
    auto tokens = CleanUtteranceText(u.raw_text, options);
    if (!tokens.empty()) t.interventions.push_back(std::move(tokens));
  }
  return t;
}

std::string TranscriptToJson(const Transcript& t) {
  json j;
  j["subject_id"] = t.subject_id;
  j["interventions"] = t.interventions;
  return j.dump(2) + "\n";
}

Transcript TranscriptFromJson(const std::string& json_text) {
  Transcript t;
  json j = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.contains("interventions")) {
    ThrowData("invalid transcript json", ErrorCode::kManifestInvalid);
  }
  t.subject_id = j.value("subject_id", "");
  for (const auto& iv : j["interventions"]) {
    t.interventions.push_back(iv.get<std::vector<std::string>>());
  }
  return t;
}

}  // namespace cadence::chat
