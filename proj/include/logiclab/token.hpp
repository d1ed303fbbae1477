#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace logiclab {

// Surface alphabet, one byte per token. `=` joins two sentences, `_` is the
// mask slot used by direct-evaluation templates; neither occurs inside a
// single logic sentence.
enum class Token : uint8_t {
  LParen,
  RParen,
  And,
  Or,
  Not,
  LitT,
  LitF,
  Eq,
  Mask,
};

inline constexpr int kNumTokens = 9;

inline char token_char(Token t) {
  switch (t) {
    case Token::LParen: return '(';
    case Token::RParen: return ')';
    case Token::And: return '&';
    case Token::Or: return '|';
    case Token::Not: return '!';
    case Token::LitT: return 'T';
    case Token::LitF: return 'F';
    case Token::Eq: return '=';
    case Token::Mask: return '_';
  }
  throw std::logic_error("bad token");
}

inline std::optional<Token> token_from_char(char c) {
  switch (c) {
    case '(': return Token::LParen;
    case ')': return Token::RParen;
    case '&': return Token::And;
    case '|': return Token::Or;
    case '!': return Token::Not;
    case 'T': return Token::LitT;
    case 'F': return Token::LitF;
    case '=': return Token::Eq;
    case '_': return Token::Mask;
    default: return std::nullopt;
  }
}

inline std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    auto t = token_from_char(s[i]);
    if (!t) throw std::invalid_argument("unknown character at index " + std::to_string(i));
    out.push_back(*t);
  }
  return out;
}

inline std::string detokenize(const std::vector<Token>& ts) {
  std::string s;
  s.reserve(ts.size());
  for (Token t : ts) s.push_back(token_char(t));
  return s;
}

}  // namespace logiclab
