#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tracereason/result.hpp"
#include "tracereason/source_span.hpp"
#include "tracereason/spec/ast.hpp"

namespace tracereason::model {

using spec::LocationKind;

enum class Provenance { Assigned, Inferred, Accepted };

std::string_view to_string(Provenance p);
std::optional<Provenance> parse_provenance(std::string_view text);

/// Artifact coordinates of a trace-location. Which fields are required
/// depends on the kind: text needs `resource`; code needs `resource`,
/// `offset` and `length`; model needs `resource` and `element`.
struct Payload {
  LocationKind kind = LocationKind::Text;
  std::string resource;
  std::optional<std::int64_t> offset;
  std::optional<std::int64_t> length;
  std::optional<std::string> element;

  friend bool operator==(const Payload&, const Payload&) = default;
};

struct Location {
  std::string id;
  std::string sigType;
  Payload payload;

  friend bool operator==(const Location&, const Location&) = default;
};

/// Identity of a trace tuple. Ordered by (relation, source, target), which
/// is the canonical order used everywhere in output.
struct TupleKey {
  std::string relation;
  std::string source;
  std::string target;

  friend auto operator<=>(const TupleKey&, const TupleKey&) = default;
  friend bool operator==(const TupleKey&, const TupleKey&) = default;
};

std::string format_tuple(const TupleKey& key);

struct TraceTuple {
  std::string relation;
  std::string source;
  std::string target;
  Provenance provenance = Provenance::Assigned;

  TupleKey key() const { return {relation, source, target}; }
  friend bool operator==(const TraceTuple&, const TraceTuple&) = default;
};

struct TraceModel {
  std::string name;
  std::vector<Location> locations;
  std::vector<TraceTuple> tuples;

  const Location* find_location(std::string_view id) const;
  const TraceTuple* find_tuple(const TupleKey& key) const;

  friend bool operator==(const TraceModel&, const TraceModel&) = default;
};

/// Sorts locations by id and tuples by key.
TraceModel canonicalize(TraceModel model);

/// Equality up to declaration order.
bool structurally_equal(const TraceModel& a, const TraceModel& b);

// ---------------------------------------------------------------------------
// Text formats

using ParseError = Diagnostic;

/// Parses the native `.trace` format:
///
///     model ecas
///     location r11 : HighLevelReq { resource = "req/ecas.txt", offset = 120, length = 98 }
///     trace refines (r60 -> r11)
///     trace satisfies (i14 -> r11) provenance = accepted
///
/// A location block may start with `kind = text|code|model`; when omitted
/// the kind is `model` if `element` is present, `code` if both `offset` and
/// `length` are present, and `text` otherwise.
Result<TraceModel, std::vector<ParseError>> parse_model(std::string_view text, const std::string& fileName = "<model>");

/// Parses the JSON form produced by serialize_model(..., Json).
Result<TraceModel, std::vector<ParseError>> parse_model_json(std::string_view text,
                                                             const std::string& fileName = "<model>");

enum class ModelFormat { Native, Json };

/// Canonical rendering: locations sorted by id, tuples by key, stable key
/// order. Defaults (an inferable kind, assigned provenance) are omitted in
/// the native form.
std::string serialize_model(const TraceModel& model, ModelFormat format);

// ---------------------------------------------------------------------------
// Edits

struct AddLocation {
  Location location;
};
struct RemoveLocation {
  std::string id;
};
struct RetypeLocation {
  std::string id;
  std::string newType;
};
struct AddTrace {
  TraceTuple tuple;
};
struct RemoveTrace {
  TupleKey key;
};
struct RetypeTrace {
  TupleKey key;
  std::string newRelation;
};

using Edit = std::variant<AddLocation, RemoveLocation, RetypeLocation, AddTrace, RemoveTrace, RetypeTrace>;

struct EditError {
  enum class Kind { UnknownId, DuplicateLocation, DuplicateTrace, NotInferred };
  Kind kind;
  std::string message;
};

/// Returns the edited model; the input is never modified. Removing a
/// location also removes every tuple incident to it.
Result<TraceModel, EditError> apply_edit(const TraceModel& model, const Edit& edit);

}  // namespace tracereason::model
