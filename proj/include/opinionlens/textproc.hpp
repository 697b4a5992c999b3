#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace opinionlens {

struct NormalizationRules {
  bool replace_urls = true;         // http(s)://… and www.… → "<url>"
  bool replace_mentions = true;     // @handle → "<user>"
  bool strip_hashtag_mark = true;   // #Word → Word
  bool collapse_whitespace = true;  // whitespace runs → one space, ends trimmed
  bool lowercase = false;
};

// Applies the enabled rules in the order listed above. Idempotent.
std::string normalize(std::string_view text, const NormalizationRules& rules = {});

// Half-open byte range [start, end) into the segmented text.
struct SentenceSpan {
  std::string text;
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const SentenceSpan&) const = default;
};

// Tokens (without the trailing period) that do not end a sentence. Matching
// is case-insensitive.
class AbbreviationList {
 public:
  AbbreviationList() = default;
  explicit AbbreviationList(std::set<std::string> tokens);

  static const AbbreviationList& defaults();
  // One token per line, "#" starts a comment, trailing "." optional.
  static AbbreviationList parse(std::string_view content);
  static AbbreviationList load(const std::string& path);

  bool contains(std::string_view token) const;
  std::size_t size() const { return tokens_.size(); }
  const std::set<std::string>& tokens() const { return tokens_; }
  // Inverse of parse().
  std::string serialize() const;

 private:
  std::set<std::string> tokens_;
};

// A boundary follows '.', '!' or '?' (plus any closing quotes/brackets) when
// the next non-space character is an uppercase letter, a digit or an opening
// quote, unless the terminating word is a listed abbreviation. Whitespace-only
// input yields no spans.
std::vector<SentenceSpan> segment(std::string_view text,
                                  const AbbreviationList& abbreviations = AbbreviationList::defaults());

// Sentence texts joined with single spaces.
std::string fuse(const std::vector<SentenceSpan>& spans);

}  // namespace opinionlens
