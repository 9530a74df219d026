#include "digrac/toml_lite.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "digrac/types.hpp"

namespace digrac::toml {

namespace {

using nlohmann::json;

class Parser {
 public:
  Parser(const std::string& text, std::string source) : s_(text), source_(std::move(source)) {}

  json run() {
    json root = json::object();
    json* table = &root;
    while (true) {
      skip_blank_lines();
      if (at_end()) break;
      if (peek() == '[') {
        ++pos_;
        if (!at_end() && peek() == '[') error("arrays of tables are not supported");
        skip_space();
        const auto path = parse_key();
        skip_space();
        expect(']');
        table = &root;
        for (const auto& part : path) {
          json& next = (*table)[part];
          if (next.is_null()) next = json::object();
          if (!next.is_object()) error("`" + part + "` is already a value");
          table = &next;
        }
      } else {
        const auto path = parse_key();
        skip_space();
        expect('=');
        skip_space();
        json value = parse_value();
        json* target = table;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
          json& next = (*target)[path[i]];
          if (next.is_null()) next = json::object();
          if (!next.is_object()) error("`" + path[i] + "` is already a value");
          target = &next;
        }
        if (target->contains(path.back())) error("duplicate key `" + path.back() + "`");
        (*target)[path.back()] = std::move(value);
      }
      end_of_line();
    }
    return root;
  }

 private:
  bool at_end() const { return pos_ >= s_.size(); }
  char peek() const { return s_[pos_]; }

  [[noreturn]] void error(const std::string& what) const {
    std::size_t line = 1;
    for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i) line += s_[i] == '\n';
    throw InputError(source_ + ":" + std::to_string(line) + ": " + what);
  }

  void expect(char c) {
    if (at_end() || peek() != c) error(std::string("expected `") + c + "`");
    ++pos_;
  }

  void skip_space() {
    while (!at_end() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void skip_comment() {
    if (!at_end() && peek() == '#')
      while (!at_end() && peek() != '\n') ++pos_;
  }

  void skip_blank_lines() {
    while (true) {
      skip_space();
      skip_comment();
      if (at_end()) return;
      if (peek() == '\n' || peek() == '\r') {
        ++pos_;
        continue;
      }
      return;
    }
  }

  // Whitespace, comments and newlines inside arrays.
  void skip_array_space() { skip_blank_lines(); }

  void end_of_line() {
    skip_space();
    skip_comment();
    if (at_end()) return;
    if (peek() == '\r') ++pos_;
    if (at_end() || peek() != '\n') error("unexpected text after value");
    ++pos_;
  }

  static bool bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::vector<std::string> parse_key() {
    std::vector<std::string> parts;
    while (true) {
      skip_space();
      if (at_end()) error("expected a key");
      if (peek() == '"' || peek() == '\'') {
        parts.push_back(parse_string());
      } else {
        const std::size_t start = pos_;
        while (!at_end() && bare_key_char(peek())) ++pos_;
        if (start == pos_) error("expected a key");
        parts.push_back(s_.substr(start, pos_ - start));
      }
      skip_space();
      if (!at_end() && peek() == '.') {
        ++pos_;
        continue;
      }
      return parts;
    }
  }

  std::string parse_string() {
    const char quote = peek();
    ++pos_;
    std::string out;
    while (true) {
      if (at_end() || peek() == '\n') error("unterminated string");
      const char c = peek();
      ++pos_;
      if (c == quote) return out;
      if (c == '\\' && quote == '"') {
        if (at_end()) error("unterminated escape");
        const char e = peek();
        ++pos_;
        switch (e) {
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case 'r': out.push_back('\r'); break;
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          default: error(std::string("unsupported escape `\\") + e + "`");
        }
      } else {
        out.push_back(c);
      }
    }
  }

  json parse_value() {
    if (at_end()) error("expected a value");
    const char c = peek();
    if (c == '"' || c == '\'') return parse_string();
    if (c == '[') return parse_array();
    if (c == '{') error("inline tables are not supported");
    const std::size_t start = pos_;
    while (!at_end() && peek() != ',' && peek() != ']' && peek() != '#' && peek() != '\n' &&
           peek() != '\r' && peek() != ' ' && peek() != '\t')
      ++pos_;
    std::string token = s_.substr(start, pos_ - start);
    if (token == "true") return true;
    if (token == "false") return false;
    return parse_number(token);
  }

  json parse_number(std::string token) {
    if (token.empty()) error("expected a value");
    std::string digits;
    for (char ch : token)
      if (ch != '_') digits.push_back(ch);
    const std::string body = (digits[0] == '+' || digits[0] == '-') ? digits.substr(1) : digits;
    const double sign = digits[0] == '-' ? -1.0 : 1.0;
    if (body == "inf") return sign * std::numeric_limits<double>::infinity();
    if (body == "nan") return std::numeric_limits<double>::quiet_NaN();
    const bool is_float = body.find_first_of(".eE") != std::string::npos;
    try {
      std::size_t used = 0;
      if (is_float) {
        const double v = std::stod(digits, &used);
        if (used == digits.size()) return v;
      } else {
        const long long v = std::stoll(digits, &used, 10);
        if (used == digits.size()) return v;
      }
    } catch (const std::exception&) {
    }
    error("cannot parse value `" + token + "`");
  }

  json parse_array() {
    expect('[');
    json out = json::array();
    while (true) {
      skip_array_space();
      if (at_end()) error("unterminated array");
      if (peek() == ']') {
        ++pos_;
        return out;
      }
      out.push_back(parse_value());
      skip_array_space();
      if (at_end()) error("unterminated array");
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      if (peek() != ']') error("expected `,` or `]` in array");
    }
  }

  const std::string& s_;
  std::string source_;
  std::size_t pos_ = 0;
};

}  // namespace

nlohmann::json parse(const std::string& text, const std::string& source) {
  return Parser(text, source).run();
}

nlohmann::json parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path.string());
}

}  // namespace digrac::toml
