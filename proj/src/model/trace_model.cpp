#include "tracereason/model/trace_model.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tracereason/lexer.hpp"

namespace tracereason::model {

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Assigned: return "assigned";
    case Provenance::Inferred: return "inferred";
    case Provenance::Accepted: return "accepted";
  }
  return "assigned";
}

std::optional<Provenance> parse_provenance(std::string_view text) {
  if (text == "assigned") return Provenance::Assigned;
  if (text == "inferred") return Provenance::Inferred;
  if (text == "accepted") return Provenance::Accepted;
  return std::nullopt;
}

std::string format_tuple(const TupleKey& key) {
  return key.relation + "(" + key.source + ", " + key.target + ")";
}

const Location* TraceModel::find_location(std::string_view id) const {
  auto it = std::find_if(locations.begin(), locations.end(), [&](const Location& l) { return l.id == id; });
  return it == locations.end() ? nullptr : &*it;
}

const TraceTuple* TraceModel::find_tuple(const TupleKey& key) const {
  auto it = std::find_if(tuples.begin(), tuples.end(), [&](const TraceTuple& t) {
    return t.relation == key.relation && t.source == key.source && t.target == key.target;
  });
  return it == tuples.end() ? nullptr : &*it;
}

TraceModel canonicalize(TraceModel model) {
  std::sort(model.locations.begin(), model.locations.end(),
            [](const Location& a, const Location& b) { return a.id < b.id; });
  std::sort(model.tuples.begin(), model.tuples.end(),
            [](const TraceTuple& a, const TraceTuple& b) { return a.key() < b.key(); });
  return model;
}

bool structurally_equal(const TraceModel& a, const TraceModel& b) { return canonicalize(a) == canonicalize(b); }

namespace {

LocationKind implied_kind(const Payload& p) {
  if (p.element) return LocationKind::Model;
  if (p.offset && p.length) return LocationKind::Code;
  return LocationKind::Text;
}

/// Cross-declaration checks shared by both input formats.
void check_references(const TraceModel& m, const std::vector<SourceSpan>& loc_spans,
                      const std::vector<SourceSpan>& tuple_spans, std::vector<ParseError>& errors) {
  std::set<std::string> ids;
  for (std::size_t i = 0; i < m.locations.size(); ++i) {
    if (!ids.insert(m.locations[i].id).second) {
      errors.push_back({loc_spans[i], "duplicate location id '" + m.locations[i].id + "'"});
    }
  }
  std::set<TupleKey> keys;
  for (std::size_t i = 0; i < m.tuples.size(); ++i) {
    const auto& t = m.tuples[i];
    if (!keys.insert(t.key()).second) errors.push_back({tuple_spans[i], "duplicate trace " + format_tuple(t.key())});
    for (const auto* end : {&t.source, &t.target}) {
      if (ids.count(*end) == 0) {
        errors.push_back({tuple_spans[i], "trace " + format_tuple(t.key()) + " references unknown location '" +
                                              *end + "'"});
      }
    }
  }
}

struct Abort {};

class ModelParser {
 public:
  ModelParser(LexResult lexed) : toks_(std::move(lexed.tokens)), errors_(std::move(lexed.errors)) {}

  Result<TraceModel, std::vector<ParseError>> run() {
    TraceModel m;
    try {
      expect_word("model", "at start of model file");
      m.name = expect(TokenKind::Identifier, "model name").text;
    } catch (const Abort&) {
      synchronize();
    }
    while (!at(TokenKind::End)) {
      try {
        if (at_word("location")) {
          const SourceSpan span = cur().span;
          m.locations.push_back(parse_location());
          loc_spans_.push_back(span);
        } else if (at_word("trace")) {
          const SourceSpan span = cur().span;
          m.tuples.push_back(parse_trace());
          tuple_spans_.push_back(span);
        } else {
          fail(cur().span, "expected 'location' or 'trace', found " + describe(cur()));
        }
      } catch (const Abort&) {
        synchronize();
      }
    }
    check_references(m, loc_spans_, tuple_spans_, errors_);
    if (!errors_.empty()) return Failure{std::move(errors_)};
    return m;
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  bool at(TokenKind k) const { return cur().kind == k; }
  bool at_word(std::string_view w) const { return at(TokenKind::Identifier) && cur().text == w; }
  const Token& advance() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  static std::string describe(const Token& t) {
    return t.kind == TokenKind::End ? "end of input" : "'" + t.text + "'";
  }
  [[noreturn]] void fail(const SourceSpan& span, std::string msg) {
    errors_.push_back({span, std::move(msg)});
    throw Abort{};
  }
  const Token& expect(TokenKind k, std::string_view what) {
    if (!at(k)) fail(cur().span, "expected " + std::string(what) + ", found " + describe(cur()));
    return advance();
  }
  void expect_word(std::string_view w, std::string_view ctx) {
    if (!at_word(w)) fail(cur().span, "expected '" + std::string(w) + "' " + std::string(ctx) + ", found " + describe(cur()));
    advance();
  }
  void synchronize() {
    advance();
    while (!at(TokenKind::End) && !at_word("location") && !at_word("trace")) advance();
  }

  Location parse_location() {
    advance();  // 'location'
    Location loc;
    loc.id = expect(TokenKind::Identifier, "location id").text;
    expect(TokenKind::Colon, "after location id");
    loc.sigType = expect(TokenKind::Identifier, "location type").text;
    std::optional<LocationKind> explicit_kind;
    if (at(TokenKind::LBrace)) {
      const SourceSpan open = advance().span;
      std::set<std::string> seen;
      while (!at(TokenKind::RBrace)) {
        if (at(TokenKind::End)) fail(open, "unterminated location block");
        const Token& key = expect(TokenKind::Identifier, "payload field name");
        if (!seen.insert(key.text).second) fail(key.span, "duplicate payload field '" + key.text + "'");
        expect(TokenKind::Equals, "after payload field name");
        if (key.text == "kind") {
          const Token& v = expect(TokenKind::Identifier, "location kind");
          explicit_kind = spec::parse_location_kind(v.text);
          if (!explicit_kind) fail(v.span, "unknown location kind '" + v.text + "'");
        } else if (key.text == "resource") {
          loc.payload.resource = expect(TokenKind::String, "string value for 'resource'").text;
        } else if (key.text == "element") {
          loc.payload.element = expect(TokenKind::String, "string value for 'element'").text;
        } else if (key.text == "offset" || key.text == "length") {
          const Token& v = expect(TokenKind::Integer, "non-negative integer for '" + key.text + "'");
          std::int64_t n = 0;
          try {
            n = std::stoll(v.text);
          } catch (const std::exception&) {
            fail(v.span, "integer out of range");
          }
          (key.text == "offset" ? loc.payload.offset : loc.payload.length) = n;
        } else {
          fail(key.span, "unknown payload field '" + key.text + "' (expected kind, resource, offset, length, element)");
        }
        if (at(TokenKind::Comma)) advance();
      }
      advance();  // '}'
    }
    loc.payload.kind = explicit_kind.value_or(implied_kind(loc.payload));
    return loc;
  }

  TraceTuple parse_trace() {
    advance();  // 'trace'
    TraceTuple t;
    t.relation = expect(TokenKind::Identifier, "relation name").text;
    expect(TokenKind::LParen, "after relation name");
    t.source = expect(TokenKind::Identifier, "source location id").text;
    expect(TokenKind::Arrow, "between source and target");
    t.target = expect(TokenKind::Identifier, "target location id").text;
    expect(TokenKind::RParen, "to close trace");
    if (at_word("provenance")) {
      advance();
      expect(TokenKind::Equals, "after 'provenance'");
      const Token& v = expect(TokenKind::Identifier, "provenance value");
      auto p = parse_provenance(v.text);
      if (!p) fail(v.span, "unknown provenance '" + v.text + "' (expected assigned, inferred or accepted)");
      t.provenance = *p;
    }
    return t;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<ParseError> errors_;
  std::vector<SourceSpan> loc_spans_;
  std::vector<SourceSpan> tuple_spans_;
};

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

SourceSpan span_at_offset(std::string_view text, std::size_t offset, const std::string& file) {
  SourceSpan span{file, 1, 1, 0};
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++span.line;
      span.column = 1;
    } else if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) {
      ++span.column;
    }
  }
  return span;
}

}  // namespace

Result<TraceModel, std::vector<ParseError>> parse_model(std::string_view text, const std::string& fileName) {
  return ModelParser(lex(text, fileName)).run();
}

Result<TraceModel, std::vector<ParseError>> parse_model_json(std::string_view text, const std::string& fileName) {
  using nlohmann::json;
  const SourceSpan whole{fileName, 1, 1, 0};
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    return Failure{std::vector<ParseError>{{span_at_offset(text, offset, fileName), e.what()}}};
  }

  std::vector<ParseError> errors;
  TraceModel m;
  auto field = [&](const json& obj, const char* key, json::value_t type, std::string_view where) -> const json* {
    auto it = obj.find(key);
    if (it == obj.end()) {
      errors.push_back({whole, std::string(where) + ": missing \"" + key + "\""});
      return nullptr;
    }
    const bool matches = it->type() == type || (type == json::value_t::number_integer && it->is_number_integer());
    if (!matches) {
      errors.push_back({whole, std::string(where) + ": \"" + key + "\" has the wrong type"});
      return nullptr;
    }
    return &*it;
  };

  if (!doc.is_object()) return Failure{std::vector<ParseError>{{whole, "model document must be a JSON object"}}};
  if (const auto* name = field(doc, "name", json::value_t::string, "model")) m.name = name->get<std::string>();

  if (const auto* locs = field(doc, "locations", json::value_t::array, "model")) {
    for (std::size_t i = 0; i < locs->size(); ++i) {
      const json& l = (*locs)[i];
      const std::string where = "locations[" + std::to_string(i) + "]";
      if (!l.is_object()) {
        errors.push_back({whole, where + ": expected an object"});
        continue;
      }
      Location loc;
      if (const auto* v = field(l, "id", json::value_t::string, where)) loc.id = v->get<std::string>();
      if (const auto* v = field(l, "type", json::value_t::string, where)) loc.sigType = v->get<std::string>();
      if (const auto* v = field(l, "kind", json::value_t::string, where)) {
        auto kind = spec::parse_location_kind(v->get<std::string>());
        if (!kind) errors.push_back({whole, where + ": unknown kind"});
        loc.payload.kind = kind.value_or(LocationKind::Text);
      }
      if (const auto* v = field(l, "resource", json::value_t::string, where)) loc.payload.resource = v->get<std::string>();
      for (const char* key : {"offset", "length"}) {
        if (!l.contains(key)) continue;
        if (!l[key].is_number_integer() || l[key].get<std::int64_t>() < 0) {
          errors.push_back({whole, where + ": \"" + key + "\" must be a non-negative integer"});
          continue;
        }
        (std::string_view(key) == "offset" ? loc.payload.offset : loc.payload.length) = l[key].get<std::int64_t>();
      }
      if (l.contains("element")) {
        if (l["element"].is_string()) {
          loc.payload.element = l["element"].get<std::string>();
        } else {
          errors.push_back({whole, where + ": \"element\" must be a string"});
        }
      }
      m.locations.push_back(std::move(loc));
    }
  }

  if (const auto* tuples = field(doc, "tuples", json::value_t::array, "model")) {
    for (std::size_t i = 0; i < tuples->size(); ++i) {
      const json& t = (*tuples)[i];
      const std::string where = "tuples[" + std::to_string(i) + "]";
      if (!t.is_object()) {
        errors.push_back({whole, where + ": expected an object"});
        continue;
      }
      TraceTuple tuple;
      if (const auto* v = field(t, "relation", json::value_t::string, where)) tuple.relation = v->get<std::string>();
      if (const auto* v = field(t, "source", json::value_t::string, where)) tuple.source = v->get<std::string>();
      if (const auto* v = field(t, "target", json::value_t::string, where)) tuple.target = v->get<std::string>();
      if (const auto* v = field(t, "provenance", json::value_t::string, where)) {
        auto p = parse_provenance(v->get<std::string>());
        if (!p) errors.push_back({whole, where + ": unknown provenance"});
        tuple.provenance = p.value_or(Provenance::Assigned);
      }
      m.tuples.push_back(std::move(tuple));
    }
  }

  if (errors.empty()) {
    check_references(m, std::vector<SourceSpan>(m.locations.size(), whole),
                     std::vector<SourceSpan>(m.tuples.size(), whole), errors);
  }
  if (!errors.empty()) return Failure{std::move(errors)};
  return m;
}

std::string serialize_model(const TraceModel& input, ModelFormat format) {
  const TraceModel m = canonicalize(input);
  if (format == ModelFormat::Json) {
    nlohmann::ordered_json doc;
    doc["name"] = m.name;
    doc["locations"] = nlohmann::ordered_json::array();
    for (const auto& l : m.locations) {
      nlohmann::ordered_json j;
      j["id"] = l.id;
      j["type"] = l.sigType;
      j["kind"] = spec::to_string(l.payload.kind);
      j["resource"] = l.payload.resource;
      if (l.payload.offset) j["offset"] = *l.payload.offset;
      if (l.payload.length) j["length"] = *l.payload.length;
      if (l.payload.element) j["element"] = *l.payload.element;
      doc["locations"].push_back(std::move(j));
    }
    doc["tuples"] = nlohmann::ordered_json::array();
    for (const auto& t : m.tuples) {
      doc["tuples"].push_back({{"relation", t.relation},
                               {"source", t.source},
                               {"target", t.target},
                               {"provenance", to_string(t.provenance)}});
    }
    return doc.dump(2) + "\n";
  }

  std::ostringstream os;
  os << "model " << m.name << "\n";
  if (!m.locations.empty()) os << "\n";
  for (const auto& l : m.locations) {
    const Payload& p = l.payload;
    os << "location " << l.id << " : " << l.sigType << " { ";
    if (implied_kind(p) != p.kind) os << "kind = " << spec::to_string(p.kind) << ", ";
    os << "resource = " << quote(p.resource);
    if (p.offset) os << ", offset = " << *p.offset;
    if (p.length) os << ", length = " << *p.length;
    if (p.element) os << ", element = " << quote(*p.element);
    os << " }\n";
  }
  if (!m.tuples.empty()) os << "\n";
  for (const auto& t : m.tuples) {
    os << "trace " << t.relation << " (" << t.source << " -> " << t.target << ")";
    if (t.provenance != Provenance::Assigned) os << " provenance = " << to_string(t.provenance);
    os << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Edits

namespace {

EditError unknown(const std::string& what) { return {EditError::Kind::UnknownId, "unknown " + what}; }

}  // namespace

Result<TraceModel, EditError> apply_edit(const TraceModel& input, const Edit& edit) {
  TraceModel m = input;
  return std::visit(
      [&](const auto& e) -> Result<TraceModel, EditError> {
        using E = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<E, AddLocation>) {
          if (m.find_location(e.location.id)) {
            return Failure{EditError{EditError::Kind::DuplicateLocation, "location '" + e.location.id + "' already exists"}};
          }
          m.locations.push_back(e.location);
        } else if constexpr (std::is_same_v<E, RemoveLocation>) {
          auto it = std::find_if(m.locations.begin(), m.locations.end(), [&](const Location& l) { return l.id == e.id; });
          if (it == m.locations.end()) return Failure{unknown("location '" + e.id + "'")};
          m.locations.erase(it);
          std::erase_if(m.tuples, [&](const TraceTuple& t) { return t.source == e.id || t.target == e.id; });
        } else if constexpr (std::is_same_v<E, RetypeLocation>) {
          auto it = std::find_if(m.locations.begin(), m.locations.end(), [&](const Location& l) { return l.id == e.id; });
          if (it == m.locations.end()) return Failure{unknown("location '" + e.id + "'")};
          it->sigType = e.newType;
        } else if constexpr (std::is_same_v<E, AddTrace>) {
          for (const auto* end : {&e.tuple.source, &e.tuple.target}) {
            if (!m.find_location(*end)) return Failure{unknown("location '" + *end + "'")};
          }
          if (m.find_tuple(e.tuple.key())) {
            return Failure{EditError{EditError::Kind::DuplicateTrace, "trace " + format_tuple(e.tuple.key()) + " already exists"}};
          }
          m.tuples.push_back(e.tuple);
        } else if constexpr (std::is_same_v<E, RemoveTrace>) {
          auto it = std::find_if(m.tuples.begin(), m.tuples.end(), [&](const TraceTuple& t) { return t.key() == e.key; });
          if (it == m.tuples.end()) return Failure{unknown("trace " + format_tuple(e.key))};
          m.tuples.erase(it);
        } else {
          static_assert(std::is_same_v<E, RetypeTrace>);
          auto it = std::find_if(m.tuples.begin(), m.tuples.end(), [&](const TraceTuple& t) { return t.key() == e.key; });
          if (it == m.tuples.end()) return Failure{unknown("trace " + format_tuple(e.key))};
          const TupleKey retyped{e.newRelation, e.key.source, e.key.target};
          if (retyped != e.key && m.find_tuple(retyped)) {
            return Failure{EditError{EditError::Kind::DuplicateTrace, "trace " + format_tuple(retyped) + " already exists"}};
          }
          it->relation = e.newRelation;
        }
        return std::move(m);
      },
      edit);
}

}  // namespace tracereason::model
