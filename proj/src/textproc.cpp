#include "opinionlens/textproc.hpp"

#include <sstream>

#include "opinionlens/util.hpp"

namespace opinionlens {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view prefix) {
  if (s.size() - pos < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    char c = s[pos + i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c != prefix[i]) return false;
  }
  return true;
}

bool is_handle_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

// URLs, mentions and hashtags are only recognized at the start of a
// whitespace-delimited token of the output so far, so placeholders are never
// rewritten again and a second pass finds nothing new.
bool token_start(const std::string& out) { return out.empty() || is_space(out.back()); }
std::string replace_tokens(std::string_view s, const NormalizationRules& rules) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (token_start(out)) {
      if (rules.replace_urls &&
          (starts_with_ci(s, i, "http://") || starts_with_ci(s, i, "https://") ||
           starts_with_ci(s, i, "www."))) {
        std::size_t j = i;
        while (j < s.size() && !is_space(s[j])) ++j;
        out += "<url>";
        i = j;
        continue;
      }
      if (rules.replace_mentions && s[i] == '@' && i + 1 < s.size() && is_handle_char(s[i + 1])) {
        std::size_t j = i + 1;
        while (j < s.size() && is_handle_char(s[j])) ++j;
        out += "<user>";
        i = j;
        continue;
      }
      if (rules.strip_hashtag_mark && s[i] == '#' && i + 1 < s.size() && is_handle_char(s[i + 1])) {
        ++i;
        continue;
      }
    }
    out.push_back(s[i]);
    ++i;
  }
  return out;
}

}  // namespace

std::string normalize(std::string_view text, const NormalizationRules& rules) {
  std::string out = replace_tokens(text, rules);
  if (rules.collapse_whitespace) {
    std::string collapsed;
    collapsed.reserve(out.size());
    bool pending_space = false;
    for (char c : out) {
      if (is_space(c)) {
        pending_space = !collapsed.empty();
        continue;
      }
      if (pending_space) collapsed.push_back(' ');
      pending_space = false;
      collapsed.push_back(c);
    }
    out = std::move(collapsed);
  }
  if (rules.lowercase) out = to_lower_ascii(out);
  return out;
}

// ---------------------------------------------------------------------------

AbbreviationList::AbbreviationList(std::set<std::string> tokens) {
  for (const auto& t : tokens) {
    std::string key = to_lower_ascii(trim(t));
    while (!key.empty() && key.back() == '.') key.pop_back();
    if (!key.empty()) tokens_.insert(std::move(key));
  }
}

const AbbreviationList& AbbreviationList::defaults() {
  static const AbbreviationList kDefaults(std::set<std::string>{
      "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "mt", "ft",
      "sen", "rep", "gov", "gen", "col", "lt", "sgt", "capt", "cmdr", "adm",
      "pres", "supt", "rev", "hon", "atty", "amb", "sec", "dept", "corp", "inc",
      "ltd", "co", "assn", "univ", "jan", "feb", "mar", "apr", "jun", "jul",
      "aug", "sep", "sept", "oct", "nov", "dec", "no", "vs", "etc", "e.g",
      "i.e", "approx", "est", "u.s", "u.k", "u.n", "d.c", "a.m", "p.m", "fig",
      "vol", "al"});
  return kDefaults;
}

AbbreviationList AbbreviationList::parse(std::string_view content) {
  std::set<std::string> tokens;
  std::istringstream in{std::string(content)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::string t = trim(line);
    if (!t.empty()) tokens.insert(std::move(t));
  }
  return AbbreviationList(std::move(tokens));
}

AbbreviationList AbbreviationList::load(const std::string& path) { return parse(read_file(path)); }

std::string AbbreviationList::serialize() const {
  std::string out = "# sentence segmentation abbreviations, one per line\n";
  for (const auto& t : tokens_) out += t + "\n";
  return out;
}

bool AbbreviationList::contains(std::string_view token) const {
  std::string key = to_lower_ascii(token);
  while (!key.empty() && key.back() == '.') key.pop_back();
  return tokens_.count(key) > 0;
}

// ---------------------------------------------------------------------------

namespace {

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }
bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

bool is_opener(std::string_view s, std::size_t i) {
  const auto c = static_cast<unsigned char>(s[i]);
  if (c >= 'A' && c <= 'Z') return true;
  if (c >= '0' && c <= '9') return true;
  if (c == '"' || c == '\'' || c == '(' || c == '[') return true;
  // UTF-8 curly opening quotes U+201C / U+2018.
  if (c == 0xE2 && i + 2 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0x80) {
    const auto d = static_cast<unsigned char>(s[i + 2]);
    return d == 0x9C || d == 0x98;
  }
  // Placeholders produced by normalize().
  return s.substr(i, 6) == "<user>" || s.substr(i, 5) == "<url>";
}

}  // namespace

std::vector<SentenceSpan> segment(std::string_view text, const AbbreviationList& abbreviations) {
  std::vector<SentenceSpan> spans;
  const std::size_t n = text.size();
  std::size_t start = 0;
  while (start < n && is_space(text[start])) ++start;

  auto emit = [&](std::size_t end) {
    std::size_t e = end;
    while (e > start && is_space(text[e - 1])) --e;
    if (e > start) spans.push_back({std::string(text.substr(start, e - start)), start, e});
  };

  std::size_t i = start;
  while (i < n) {
    if (!is_terminator(text[i])) {
      ++i;
      continue;
    }
    std::size_t end = i + 1;
    while (end < n && (is_terminator(text[end]) || is_closer(text[end]))) ++end;
    if (end >= n || !is_space(text[end])) {
      i = end;
      continue;
    }
    std::size_t next = end;
    while (next < n && is_space(text[next])) ++next;
    if (next >= n) break;
    bool boundary = is_opener(text, next);
    if (boundary && text[i] == '.') {
      // Word ending at the period, e.g. "Sen" in "Sen. Smith".
      std::size_t w = i;
      while (w > start && !is_space(text[w - 1])) --w;
      std::string_view word = text.substr(w, i - w);
      while (!word.empty() && (word.front() == '"' || word.front() == '(' || word.front() == '\'')) {
        word.remove_prefix(1);
      }
      if (!word.empty() && abbreviations.contains(word)) boundary = false;
      // Single capital initial such as "J. Smith".
      if (word.size() == 1 && word[0] >= 'A' && word[0] <= 'Z') boundary = false;
    }
    if (boundary) {
      emit(end);
      start = next;
    }
    i = next;
  }
  if (start < n) emit(n);
  return spans;
}

std::string fuse(const std::vector<SentenceSpan>& spans) {
  std::string out;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (i) out += ' ';
    out += spans[i].text;
  }
  return out;
}

}  // namespace opinionlens
