#include "microlearn/knowledge_graph.hpp"

#include <algorithm>
#include <charconv>
#include <map>

namespace microlearn {

namespace {

struct Token {
  enum class Kind { word, quoted, attribute };
  Kind kind = Kind::word;
  std::string text;  // word or quoted content; attribute value
  std::string key;   // attribute key
  bool value_quoted = false;
  int column = 1;
};

[[noreturn]] void fail(FindingCode code, std::string message, int line, int column) {
  throw GraphError(Finding{Severity::error, code, std::move(message), {line, column}, {}});
}

class LineLexer {
 public:
  LineLexer(std::string_view line, int line_no) : line_(line), line_no_(line_no) {}

  std::vector<Token> tokens() {
    std::vector<Token> out;
    while (true) {
      while (pos_ < line_.size() && (line_[pos_] == ' ' || line_[pos_] == '\t')) ++pos_;
      if (pos_ >= line_.size() || line_[pos_] == '#') break;
      out.push_back(next());
    }
    return out;
  }

  int end_column() const { return static_cast<int>(line_.size()) + 1; }

 private:
  Token next() {
    Token tok;
    tok.column = column();
    if (line_[pos_] == '"') {
      tok.kind = Token::Kind::quoted;
      tok.text = quoted();
      expect_boundary();
      return tok;
    }
    std::string word;
    while (pos_ < line_.size() && line_[pos_] != ' ' && line_[pos_] != '\t') {
      const char c = line_[pos_];
      if (c == '"') fail(FindingCode::syntax, "unexpected '\"' inside word", line_no_, column());
      if (c == '=' && tok.kind == Token::Kind::word) {
        if (word.empty()) fail(FindingCode::syntax, "attribute without a name", line_no_, column());
        tok.kind = Token::Kind::attribute;
        tok.key = std::move(word);
        word.clear();
        ++pos_;
        if (pos_ < line_.size() && line_[pos_] == '"') {
          tok.value_quoted = true;
          tok.text = quoted();
          expect_boundary();
          return tok;
        }
        continue;
      }
      word += c;
      ++pos_;
    }
    tok.text = std::move(word);
    return tok;
  }

  std::string quoted() {
    const int open_col = column();
    ++pos_;
    std::string out;
    while (pos_ < line_.size()) {
      const char c = line_[pos_++];
      if (c == '"') return out;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (pos_ >= line_.size()) break;
      const char esc = line_[pos_++];
      switch (esc) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        default: fail(FindingCode::syntax, std::string("unknown escape '\\") + esc + "'", line_no_, column() - 2);
      }
    }
    fail(FindingCode::syntax, "unterminated string", line_no_, open_col);
  }

  void expect_boundary() {
    if (pos_ < line_.size() && line_[pos_] != ' ' && line_[pos_] != '\t') {
      fail(FindingCode::syntax, "expected whitespace after string", line_no_, column());
    }
  }

  int column() const { return static_cast<int>(pos_) + 1; }

  std::string_view line_;
  int line_no_;
  std::size_t pos_ = 0;
};

class StatementParser {
 public:
  StatementParser(std::vector<Token> tokens, int line_no, int end_column)
      : tokens_(std::move(tokens)), line_(line_no), end_column_(end_column) {}

  void parse_into(MindMap& map) {
    const auto& head = tokens_.front();
    if (head.kind != Token::Kind::word) fail(FindingCode::syntax, "expected a statement keyword", line_, head.column);
    if (head.text == "concept") {
      map.concepts.push_back(parse_concept());
    } else if (head.text == "requires") {
      map.edges.push_back(parse_requires());
    } else if (head.text == "unit") {
      map.units.push_back(parse_unit());
    } else {
      fail(FindingCode::syntax, "unknown statement '" + head.text + "' (expected concept, requires or unit)", line_,
           head.column);
    }
  }

 private:
  const Token& at(std::size_t i, std::string_view what) {
    if (i >= tokens_.size()) fail(FindingCode::syntax, "expected " + std::string(what), line_, end_column_);
    return tokens_[i];
  }

  std::string id_at(std::size_t i, std::string_view what) {
    const auto& tok = at(i, what);
    if (tok.kind != Token::Kind::word) fail(FindingCode::syntax, "expected " + std::string(what), line_, tok.column);
    if (!is_valid_token(tok.text)) {
      fail(FindingCode::invalid_id, "invalid id '" + tok.text + "' (allowed: [a-z0-9_-]+)", line_, tok.column);
    }
    return tok.text;
  }

  std::string quoted_at(std::size_t i, std::string_view what) {
    const auto& tok = at(i, what);
    if (tok.kind != Token::Kind::quoted) {
      fail(FindingCode::syntax, "expected " + std::string(what) + " in double quotes", line_, tok.column);
    }
    return tok.text;
  }

  void keyword_at(std::size_t i, std::string_view keyword) {
    const auto& tok = at(i, "'" + std::string(keyword) + "'");
    if (tok.kind != Token::Kind::word || tok.text != keyword) {
      fail(FindingCode::syntax, "expected '" + std::string(keyword) + "'", line_, tok.column);
    }
  }

  std::map<std::string, const Token*> attributes_from(std::size_t first,
                                                      std::initializer_list<std::string_view> allowed) {
    std::map<std::string, const Token*> attrs;
    for (std::size_t i = first; i < tokens_.size(); ++i) {
      const auto& tok = tokens_[i];
      if (tok.kind != Token::Kind::attribute) {
        fail(FindingCode::syntax, "unexpected '" + tok.text + "' (expected key=value)", line_, tok.column);
      }
      if (std::find(allowed.begin(), allowed.end(), tok.key) == allowed.end()) {
        fail(FindingCode::syntax, "unknown attribute '" + tok.key + "'", line_, tok.column);
      }
      if (!attrs.emplace(tok.key, &tok).second) {
        fail(FindingCode::syntax, "attribute '" + tok.key + "' given twice", line_, tok.column);
      }
    }
    return attrs;
  }

  int integer_value(const Token& tok) {
    int value = 0;
    const auto* first = tok.text.data();
    const auto* last = first + tok.text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (tok.value_quoted || tok.text.empty() || ec != std::errc{} || ptr != last) {
      fail(FindingCode::syntax, "attribute '" + tok.key + "' must be an integer", line_, tok.column);
    }
    return value;
  }

  Concept parse_concept() {
    Concept c;
    c.where = {line_, tokens_[0].column};
    c.id = id_at(1, "concept id");
    c.title = quoted_at(2, "concept title");
    auto attrs = attributes_from(3, {"kind", "description"});
    if (auto it = attrs.find("kind"); it != attrs.end()) {
      auto kind = concept_kind_from_string(it->second->text);
      if (!kind) fail(FindingCode::syntax, "kind must be prerequisite or course_topic", line_, it->second->column);
      c.kind = *kind;
    }
    if (auto it = attrs.find("description"); it != attrs.end()) c.description = it->second->text;
    return c;
  }

  PrerequisiteEdge parse_requires() {
    PrerequisiteEdge e;
    e.where = {line_, tokens_[0].column};
    e.target = id_at(1, "target concept id");
    keyword_at(2, "<-");
    e.prerequisite = id_at(3, "prerequisite concept id");
    if (tokens_.size() > 4) fail(FindingCode::syntax, "unexpected trailing input", line_, tokens_[4].column);
    return e;
  }

  MicrolearningUnit parse_unit() {
    MicrolearningUnit u;
    u.where = {line_, tokens_[0].column};
    u.id = id_at(1, "unit id");
    u.title = quoted_at(2, "unit title");
    keyword_at(3, "covers");
    const auto& list = at(4, "covered concept list");
    if (list.kind != Token::Kind::word) fail(FindingCode::syntax, "expected covered concept list", line_, list.column);
    std::size_t start = 0;
    while (start <= list.text.size()) {
      const auto comma = list.text.find(',', start);
      const auto piece = list.text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (!is_valid_token(piece)) {
        fail(FindingCode::invalid_id, "invalid concept id '" + piece + "' in covers list", line_,
             list.column + static_cast<int>(start));
      }
      u.covers.push_back(piece);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }

    auto attrs = attributes_from(5, {"kind", "minutes", "uri", "version"});
    auto require = [&](const char* key) -> const Token& {
      auto it = attrs.find(key);
      if (it == attrs.end()) fail(FindingCode::syntax, std::string("unit is missing ") + key + "=", line_, end_column_);
      return *it->second;
    };
    const auto& kind_tok = require("kind");
    auto kind = unit_kind_from_string(kind_tok.text);
    if (!kind) {
      fail(FindingCode::syntax, "kind must be one of video, project, presentation, text, quizlet", line_,
           kind_tok.column);
    }
    u.kind = *kind;
    const auto& minutes_tok = require("minutes");
    u.minutes = integer_value(minutes_tok);
    if (u.minutes < 1 || u.minutes > kMaxUnitMinutes) {
      fail(FindingCode::unit_too_long,
           "minutes must be within 1.." + std::to_string(kMaxUnitMinutes) + ", got " + std::to_string(u.minutes),
           line_, minutes_tok.column);
    }
    u.content_uri = require("uri").text;
    if (auto it = attrs.find("version"); it != attrs.end()) {
      u.version = integer_value(*it->second);
      if (u.version < 1) fail(FindingCode::syntax, "version must be positive", line_, it->second->column);
    }
    return u;
  }

  std::vector<Token> tokens_;
  int line_;
  int end_column_;
};

}  // namespace

MindMap parse_declarations(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  MindMap map;
  int line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    ++line_no;
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    start = end + 1;

    LineLexer lexer(line, line_no);
    auto tokens = lexer.tokens();
    if (tokens.empty()) continue;
    StatementParser(std::move(tokens), line_no, lexer.end_column()).parse_into(map);
  }
  return map;
}

ConceptGraph parse_mindmap(std::string_view text) {
  return ConceptGraph::build(parse_declarations(text));
}

}  // namespace microlearn
