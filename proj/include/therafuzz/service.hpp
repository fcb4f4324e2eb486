#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "therafuzz/detail/files.hpp"
#include "therafuzz/edit.hpp"
#include "therafuzz/error.hpp"
#include "therafuzz/inference.hpp"
#include "therafuzz/json_io.hpp"
#include "therafuzz/lexer.hpp"
#include "therafuzz/overrides.hpp"
#include "therafuzz/store.hpp"

namespace therafuzz {

inline constexpr const char* kConsultationsFile = "consultations.ndjson";
inline constexpr const char* kChildrenFile = "children.ndjson";
inline constexpr double kMinChildAge = 3.0;
inline constexpr double kMaxChildAge = 8.0;

/// Pseudonymized child record; `display_label` is never a real name.
struct ChildRecord {
  std::string id;
  std::string display_label;
  double age_years = 0;
  std::string created_at;
};

inline json to_json(const ChildRecord& c) {
  return {{"id", c.id}, {"display_label", c.display_label}, {"age_years", c.age_years}, {"created_at", c.created_at}};
}

/// A consultation as served: the result is kept in its wire form so replays and
/// override snapshots are byte-identical to what the client saw.
struct StoredConsultation {
  std::string id;
  std::optional<std::string> child_id;
  json result;
  std::string created_at;

  double crisp_output() const { return result.at("crisp_output").get<double>(); }
  std::uint64_t kb_revision() const { return result.at("kb_revision").get<std::uint64_t>(); }
};

inline json to_json(const StoredConsultation& c) {
  return {{"id", c.id},
          {"child_id", c.child_id ? json(*c.child_id) : json(nullptr)},
          {"result", c.result},
          {"created_at", c.created_at}};
}

struct Request {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct Response {
  int status = 200;
  json body;
};

struct ServiceOptions {
  std::optional<std::filesystem::path> data_dir;
  int default_resolution = kDefaultResolution;
  std::function<std::string()> clock = detail::utc_now;
};

/// The therapy service's request handling, independent of any transport.
///
/// Routes:
///   POST /consult                      {inputs, child_id?, resolution?} -> 201 StoredConsultation
///   GET  /consultations/{id}           -> StoredConsultation
///   GET  /kb                           -> {document, revision, variables}
///   PUT  /kb                           {document, expected_revision} -> {revision, warnings}
///   POST /kb/edits                     {kind, payload, expected_revision} -> {revision, warnings}
///   POST /overrides                    {consultation_id, therapist_value, note?} -> 201 OverrideRecord
///   GET  /overrides[?child_id=]        -> {overrides}
///   POST /children                     {display_label, age_years} -> 201 ChildRecord
///   GET  /children, /children/{id}     -> {children} / ChildRecord
///   GET  /children/{id}/consultations  -> {consultations}
///
/// Errors use {code, message, diagnostics?}: 400 bad-request, 404 not-found,
/// 405 method-not-allowed, 409 conflict (with current_revision), and 422 for
/// input problems: missing-input, out-of-range, unknown-term, bad-resolution,
/// no-rule-fired, invalid-kb, unknown-rule, bad-payload, bad-value,
/// override-unchanged, bad-age, bad-label.
class TherapyService {
 public:
  TherapyService(std::unique_ptr<KbStore> store, ServiceOptions options = {})
      : store_(std::move(store)),
        options_(std::move(options)),
        overrides_(options_.data_dir ? std::optional(*options_.data_dir / kOverridesFile) : std::nullopt,
                   options_.clock) {
    if (options_.default_resolution < 2) throw ValidationError("resolution must be at least 2", "bad-resolution");
    if (!options_.data_dir) return;
    for_each_line(*options_.data_dir / kChildrenFile, [&](const json& j) {
      children_.push_back({j.at("id"), j.at("display_label"), j.at("age_years"), j.at("created_at")});
    });
    for_each_line(*options_.data_dir / kConsultationsFile, [&](const json& j) {
      StoredConsultation c{j.at("id"), std::nullopt, j.at("result"), j.at("created_at")};
      if (!j.at("child_id").is_null()) c.child_id = j.at("child_id").get<std::string>();
      consultations_.push_back(std::move(c));
    });
  }

  KbStore& store() noexcept { return *store_; }
  const OverrideLog& overrides() const noexcept { return overrides_; }

  /// Thread-safe; transports may call this concurrently.
  Response handle(const Request& req) { return dispatch(req); }

 private:
  struct BadRequest {
    std::string message;
  };

  static Response error(int status, const std::string& code, const std::string& message,
                        const std::vector<Diagnostic>* diags = nullptr) {
    return {status, error_body(code, message, diags)};
  }

  static Response not_found(const std::string& what) { return error(404, "not-found", what + " not found"); }

  static std::vector<std::string_view> segments(std::string_view path) {
    std::vector<std::string_view> out;
    while (!path.empty()) {
      if (path.front() == '/') {
        path.remove_prefix(1);
        continue;
      }
      auto slash = path.find('/');
      out.push_back(path.substr(0, slash));
      path = slash == std::string_view::npos ? std::string_view{} : path.substr(slash);
    }
    return out;
  }

  Response dispatch(const Request& req) {
    auto seg = segments(req.path);
    const auto& m = req.method;
    auto allow = [&](std::initializer_list<const char*> methods) {
      for (const char* x : methods)
        if (m == x) return true;
      return false;
    };
    try {
      if (seg.size() == 1 && seg[0] == "consult") {
        if (!allow({"POST"})) return method_not_allowed();
        return consult(req);
      }
      if (seg.size() == 2 && seg[0] == "consultations") {
        if (!allow({"GET"})) return method_not_allowed();
        auto c = find_consultation(seg[1]);
        return c ? Response{200, to_json(*c)} : not_found("consultation '" + std::string(seg[1]) + "'");
      }
      if (seg.size() == 1 && seg[0] == "kb") {
        if (m == "GET") return kb_get();
        if (m == "PUT") return kb_put(req);
        return method_not_allowed();
      }
      if (seg.size() == 2 && seg[0] == "kb" && seg[1] == "edits") {
        if (!allow({"POST"})) return method_not_allowed();
        return kb_edit(req);
      }
      if (seg.size() == 1 && seg[0] == "overrides") {
        if (m == "GET") return override_list(req);
        if (m == "POST") return override_post(req);
        return method_not_allowed();
      }
      if (!seg.empty() && seg[0] == "children") {
        if (seg.size() == 1) {
          if (m == "GET") return child_list();
          if (m == "POST") return child_create(req);
          return method_not_allowed();
        }
        if (!allow({"GET"})) return method_not_allowed();
        auto child = find_child(seg[1]);
        if (!child) return not_found("child '" + std::string(seg[1]) + "'");
        if (seg.size() == 2) return {200, to_json(*child)};
        if (seg.size() == 3 && seg[2] == "consultations") return child_consultations(child->id);
      }
      return not_found("route " + req.method + " " + req.path);
    } catch (const BadRequest& e) {
      return error(400, "bad-request", e.message);
    } catch (const json::exception& e) {
      return error(400, "bad-request", std::string("malformed request body: ") + e.what());
    }
  }

  static Response method_not_allowed() { return error(405, "method-not-allowed", "method not allowed on this path"); }

  static json parse_body(const Request& req) {
    auto body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) throw BadRequest{"request body must be a JSON object"};
    return body;
  }

  static std::optional<std::uint64_t> revision_field(const json& body) {
    auto it = body.find("expected_revision");
    if (it == body.end() || !it->is_number_unsigned()) return std::nullopt;
    return it->get<std::uint64_t>();
  }

  Response consult(const Request& req) {
    auto body = parse_body(req);
    auto it = body.find("inputs");
    if (it == body.end() || !it->is_object()) return error(400, "bad-request", "'inputs' must be an object");
    Inputs inputs;
    for (const auto& [name, value] : it->items()) {
      if (!value.is_number()) return error(400, "bad-request", "input '" + name + "' must be a number");
      std::string key = name;
      for (auto& ch : key) ch = detail::ascii_lower(ch);
      inputs.emplace(std::move(key), value.get<double>());
    }
    int resolution = options_.default_resolution;
    if (auto r = body.find("resolution"); r != body.end() && !r->is_null()) {
      if (!r->is_number_integer()) return error(400, "bad-request", "'resolution' must be an integer");
      resolution = r->get<int>();
    }
    std::optional<std::string> child_id;
    if (auto c = body.find("child_id"); c != body.end() && !c->is_null()) {
      if (!c->is_string()) return error(400, "bad-request", "'child_id' must be a string");
      child_id = c->get<std::string>();
      if (!find_child(*child_id)) return not_found("child '" + *child_id + "'");
    }

    auto kb = store_->snapshot();
    ConsultationResult result;
    try {
      result = infer(*kb, inputs, resolution);
    } catch (const NoRuleFired& e) {
      return error(422, e.code(), e.what());
    } catch (const Error& e) {
      std::vector<Diagnostic> diags{{Severity::error, Location{}, e.what(), e.code()}};
      return error(422, e.code(), e.what(), &diags);
    }

    std::lock_guard lock(mutex_);
    StoredConsultation stored{"c" + std::to_string(consultations_.size() + 1), child_id, to_json(result),
                              options_.clock()};
    auto wire = to_json(stored);
    if (options_.data_dir) detail::append_line(*options_.data_dir / kConsultationsFile, wire.dump());
    consultations_.push_back(std::move(stored));
    return {201, std::move(wire)};
  }

  Response kb_get() const {
    auto kb = store_->snapshot();
    json vars = json::array();
    for (const auto& v : kb->variables) vars.push_back(to_json(v));
    return {200, {{"document", render(*kb)}, {"revision", kb->revision}, {"variables", vars}}};
  }

  Response edit_response(const EditOutcome& outcome) {
    if (auto* a = std::get_if<EditAccepted>(&outcome))
      return {200, {{"revision", a->kb.revision}, {"warnings", to_json(a->warnings)}}};
    if (auto* c = std::get_if<Conflict>(&outcome)) {
      auto body = error_body("conflict", "knowledge base is at revision " + std::to_string(c->current_revision));
      body["current_revision"] = c->current_revision;
      return {409, std::move(body)};
    }
    const auto& diags = std::get<EditRejected>(outcome).diagnostics;
    std::string code = "invalid-kb";
    if (diags.size() == 1 && (diags[0].code == "unknown-rule" || diags[0].code == "bad-payload")) code = diags[0].code;
    return error(422, code, "edit rejected", &diags);
  }

  Response kb_put(const Request& req) {
    auto body = parse_body(req);
    auto doc = body.find("document");
    auto rev = revision_field(body);
    if (doc == body.end() || !doc->is_string() || !rev)
      return error(400, "bad-request", "expected {document: string, expected_revision: integer}");
    return edit_response(store_->apply({EditKind::replace_document, doc->get<std::string>(), *rev}));
  }

  Response kb_edit(const Request& req) {
    auto body = parse_body(req);
    auto kind_field = body.find("kind");
    auto payload = body.find("payload");
    auto rev = revision_field(body);
    if (kind_field == body.end() || !kind_field->is_string() || payload == body.end() || !payload->is_string() || !rev)
      return error(400, "bad-request", "expected {kind: string, payload: string, expected_revision: integer}");
    auto kind = parse_edit_kind(kind_field->get<std::string>());
    if (!kind) return error(400, "bad-request", "unknown edit kind '" + kind_field->get<std::string>() + "'");
    return edit_response(store_->apply({*kind, payload->get<std::string>(), *rev}));
  }

  Response override_post(const Request& req) {
    auto body = parse_body(req);
    auto cid = body.find("consultation_id");
    auto value = body.find("therapist_value");
    if (cid == body.end() || !cid->is_string() || value == body.end() || !value->is_number())
      return error(400, "bad-request", "expected {consultation_id: string, therapist_value: number, note?: string}");
    std::string note;
    if (auto n = body.find("note"); n != body.end() && !n->is_null()) {
      if (!n->is_string()) return error(400, "bad-request", "'note' must be a string");
      note = n->get<std::string>();
    }
    auto consultation = find_consultation(cid->get<std::string>());
    if (!consultation) return not_found("consultation '" + cid->get<std::string>() + "'");
    try {
      auto rec = overrides_.record(consultation->result, consultation->crisp_output(), consultation->kb_revision(),
                                   value->get<double>(), std::move(note), consultation->id);
      return {201, to_json(rec)};
    } catch (const Error& e) {
      return error(422, e.code(), e.what());
    }
  }

  Response override_list(const Request& req) {
    std::optional<std::string> child;
    if (auto q = req.query.find("child_id"); q != req.query.end()) child = q->second;
    json out = json::array();
    for (const auto& rec : overrides_.list()) {
      if (child) {
        auto c = find_consultation(rec.consultation_id);
        if (!c || c->child_id != child) continue;
      }
      out.push_back(to_json(rec));
    }
    return {200, {{"overrides", out}}};
  }

  Response child_create(const Request& req) {
    auto body = parse_body(req);
    auto label = body.find("display_label");
    auto age = body.find("age_years");
    if (label == body.end() || !label->is_string() || age == body.end() || !age->is_number())
      return error(400, "bad-request", "expected {display_label: string, age_years: number}");
    const double years = age->get<double>();
    if (!(years >= kMinChildAge && years <= kMaxChildAge))
      return error(422, "bad-age", "age_years must lie in [3, 8], got " + detail::shortest(years));
    if (detail::trim(label->get<std::string>()).empty())
      return error(422, "bad-label", "display_label must not be empty");

    std::lock_guard lock(mutex_);
    ChildRecord child{"ch" + std::to_string(children_.size() + 1), label->get<std::string>(), years, options_.clock()};
    auto wire = to_json(child);
    if (options_.data_dir) detail::append_line(*options_.data_dir / kChildrenFile, wire.dump());
    children_.push_back(std::move(child));
    return {201, std::move(wire)};
  }

  Response child_list() {
    std::lock_guard lock(mutex_);
    json out = json::array();
    for (const auto& c : children_) out.push_back(to_json(c));
    return {200, {{"children", out}}};
  }

  Response child_consultations(const std::string& child_id) {
    std::lock_guard lock(mutex_);
    json out = json::array();
    for (const auto& c : consultations_)
      if (c.child_id == child_id) out.push_back(to_json(c));
    return {200, {{"consultations", out}}};
  }

  std::optional<StoredConsultation> find_consultation(std::string_view id) {
    std::lock_guard lock(mutex_);
    for (const auto& c : consultations_)
      if (c.id == id) return c;
    return std::nullopt;
  }

  std::optional<ChildRecord> find_child(std::string_view id) {
    std::lock_guard lock(mutex_);
    for (const auto& c : children_)
      if (c.id == id) return c;
    return std::nullopt;
  }

  template <typename F>
  static void for_each_line(const std::filesystem::path& file, F&& f) {
    auto bytes = detail::read_file(file);
    if (!bytes) return;
    std::string_view text = *bytes;
    std::size_t line_no = 0;
    while (!text.empty()) {
      ++line_no;
      auto nl = text.find('\n');
      auto line = text.substr(0, nl);
      text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
      if (detail::trim(line).empty()) continue;
      try {
        f(json::parse(line));
      } catch (const json::exception&) {
        throw Error("io", file.string() + ":" + std::to_string(line_no) + ": malformed record");
      }
    }
  }

  std::unique_ptr<KbStore> store_;
  ServiceOptions options_;
  OverrideLog overrides_;
  std::mutex mutex_;
  std::vector<ChildRecord> children_;
  std::vector<StoredConsultation> consultations_;
};

}  // namespace therafuzz
