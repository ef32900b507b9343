#pragma once

// Shared word tokenizer, n-gram helpers and the rule-based sentence
// segmenter. Every module that counts words (novelty, n-gram overlap,
// diversity metrics) goes through tokenize_words so the counts agree.

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace samark::text {

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Lowercase, whitespace-split, punctuation stripped at token edges.
inline std::vector<std::string> tokenize_words(std::string_view s) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) {
      std::size_t a = i, b = j;
      while (a < b && std::ispunct(static_cast<unsigned char>(s[a]))) ++a;
      while (b > a && std::ispunct(static_cast<unsigned char>(s[b - 1]))) --b;
      if (b > a) words.push_back(to_lower(s.substr(a, b - a)));
    }
    i = j;
  }
  return words;
}

// Word n-grams as joined strings ("a b c d"), in order of occurrence.
inline std::vector<std::string> word_ngrams(const std::vector<std::string>& words, std::size_t n) {
  std::vector<std::string> grams;
  if (n == 0 || words.size() < n) return grams;
  grams.reserve(words.size() - n + 1);
  for (std::size_t i = 0; i + n <= words.size(); ++i) {
    std::string g = words[i];
    for (std::size_t k = 1; k < n; ++k) {
      g += ' ';
      g += words[i + k];
    }
    grams.push_back(std::move(g));
  }
  return grams;
}

inline std::unordered_set<std::string> ngram_set(std::string_view s, std::size_t n) {
  auto grams = word_ngrams(tokenize_words(s), n);
  return {grams.begin(), grams.end()};
}

inline const std::unordered_set<std::string>& abbreviations() {
  static const std::unordered_set<std::string> abbrevs = {
      "dr.", "mr.", "mrs.", "ms.", "prof.", "st.", "jr.", "sr.",
      "e.g.", "i.e.", "etc.", "vs.", "fig.", "al.", "no.", "inc.",
  };
  return abbrevs;
}

// Rule-based splitter: terminal . ! ? followed by whitespace or
// end-of-text ends a sentence, unless the trailing word is a known
// abbreviation.
inline std::vector<std::string> segment_sentences(std::string_view txt) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    std::size_t a = cur.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) {
      cur.clear();
      return;
    }
    std::size_t b = cur.find_last_not_of(" \t\r\n");
    out.push_back(cur.substr(a, b - a + 1));
    cur.clear();
  };
  for (std::size_t i = 0; i < txt.size(); ++i) {
    char c = txt[i];
    cur += c;
    if (c != '.' && c != '!' && c != '?') continue;
    bool at_end = i + 1 == txt.size();
    bool ws_next = !at_end && std::isspace(static_cast<unsigned char>(txt[i + 1]));
    if (!at_end && !ws_next) continue;
    if (c == '.') {
      // last whitespace-delimited token of cur, lowercased
      std::size_t e = cur.find_last_not_of(" \t\r\n");
      std::size_t s0 = cur.find_last_of(" \t\r\n", e);
      std::string last = to_lower(std::string_view(cur).substr(
          s0 == std::string::npos ? 0 : s0 + 1, (s0 == std::string::npos ? e + 1 : e - s0)));
      if (abbreviations().contains(last)) continue;
    }
    flush();
  }
  flush();
  return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace samark::text
