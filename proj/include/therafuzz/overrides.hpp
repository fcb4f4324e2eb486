#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "therafuzz/detail/files.hpp"
#include "therafuzz/detail/numbers.hpp"
#include "therafuzz/error.hpp"
#include "therafuzz/inference.hpp"
#include "therafuzz/json_io.hpp"

namespace therafuzz {

/// A therapist's disagreement with (or comment on) one consultation.
struct OverrideRecord {
  std::string id;
  std::string consultation_id;
  json consultation_snapshot;  // serialized ConsultationResult as it was returned
  double system_value = 0;
  double therapist_value = 0;
  std::string note;
  std::string created_at;
  std::uint64_t kb_revision_at_override = 0;
};

inline json to_json(const OverrideRecord& r) {
  return {{"id", r.id},
          {"consultation_id", r.consultation_id},
          {"consultation_snapshot", r.consultation_snapshot},
          {"system_value", r.system_value},
          {"therapist_value", r.therapist_value},
          {"note", r.note},
          {"created_at", r.created_at},
          {"kb_revision_at_override", r.kb_revision_at_override}};
}

namespace detail {

inline std::string escape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::optional<std::string> unescape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    if (++i == s.size()) return std::nullopt;
    switch (s[i]) {
      case '\\': out += '\\'; break;
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      default: return std::nullopt;
    }
  }
  return out;
}

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

}  // namespace detail

/// One log line: id, created_at, kb revision, consultation id, system value,
/// therapist value, note, snapshot JSON; tab-separated, each field escaped.
inline std::string format_override_line(const OverrideRecord& r) {
  using detail::escape_field;
  return escape_field(r.id) + '\t' + escape_field(r.created_at) + '\t' + std::to_string(r.kb_revision_at_override) +
         '\t' + escape_field(r.consultation_id) + '\t' + detail::shortest(r.system_value) + '\t' +
         detail::shortest(r.therapist_value) + '\t' + escape_field(r.note) + '\t' +
         escape_field(r.consultation_snapshot.dump());
}

inline std::optional<OverrideRecord> parse_override_line(std::string_view line) {
  auto f = detail::split_tabs(line);
  if (f.size() != 8) return std::nullopt;
  OverrideRecord r;
  auto id = detail::unescape_field(f[0]);
  auto created = detail::unescape_field(f[1]);
  auto cid = detail::unescape_field(f[3]);
  auto note = detail::unescape_field(f[6]);
  auto snap = detail::unescape_field(f[7]);
  auto sys = detail::parse_double(f[4]);
  auto ther = detail::parse_double(f[5]);
  std::uint64_t rev = 0;
  auto [p, ec] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), rev);
  if (!id || !created || !cid || !note || !snap || !sys || !ther || ec != std::errc{} || p != f[2].data() + f[2].size())
    return std::nullopt;
  r.id = std::move(*id);
  r.created_at = std::move(*created);
  r.kb_revision_at_override = rev;
  r.consultation_id = std::move(*cid);
  r.system_value = *sys;
  r.therapist_value = *ther;
  r.note = std::move(*note);
  r.consultation_snapshot = json::parse(*snap, nullptr, false);
  if (r.consultation_snapshot.is_discarded()) return std::nullopt;
  return r;
}

/// Append-only override log, optionally backed by `overrides.log`. Records are
/// never modified or removed; listing returns them in creation order.
class OverrideLog {
 public:
  using Clock = std::function<std::string()>;

  explicit OverrideLog(std::optional<std::filesystem::path> file = std::nullopt, Clock clock = detail::utc_now)
      : file_(std::move(file)), clock_(std::move(clock)) {
    if (!file_) return;
    auto bytes = detail::read_file(*file_);
    if (!bytes) return;
    std::string_view text = *bytes;
    std::size_t line_no = 0;
    while (!text.empty()) {
      ++line_no;
      auto nl = text.find('\n');
      auto line = text.substr(0, nl);
      text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
      if (line.empty()) continue;
      auto rec = parse_override_line(line);
      if (!rec) throw Error("io", file_->string() + ":" + std::to_string(line_no) + ": malformed override record");
      records_.push_back(std::move(*rec));
    }
  }

  /// Records a therapist override of `result`. Rejected when the therapist value
  /// equals the system output and the note is empty: there is nothing to record.
  OverrideRecord record(const ConsultationResult& result, double therapist_value, std::string note,
                        std::string consultation_id = {}) {
    return record(to_json(result), result.crisp_output(), result.kb_revision, therapist_value, std::move(note),
                  std::move(consultation_id));
  }

  OverrideRecord record(json snapshot, double system_value, std::uint64_t kb_revision, double therapist_value,
                        std::string note, std::string consultation_id) {
    if (!std::isfinite(therapist_value))
      throw ValidationError("therapist value must be a finite number", "bad-value");
    if (therapist_value == system_value && note.empty())
      throw ValidationError("override repeats the system value without a note", "override-unchanged");
    std::lock_guard lock(mutex_);
    OverrideRecord r;
    r.id = "o" + std::to_string(records_.size() + 1);
    r.consultation_id = std::move(consultation_id);
    r.consultation_snapshot = std::move(snapshot);
    r.system_value = system_value;
    r.therapist_value = therapist_value;
    r.note = std::move(note);
    r.created_at = clock_();
    r.kb_revision_at_override = kb_revision;
    if (file_) detail::append_line(*file_, format_override_line(r));
    records_.push_back(r);
    return r;
  }

  std::vector<OverrideRecord> list() const {
    std::lock_guard lock(mutex_);
    return records_;
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return records_.size();
  }

 private:
  mutable std::mutex mutex_;
  std::optional<std::filesystem::path> file_;
  Clock clock_;
  std::vector<OverrideRecord> records_;
};

}  // namespace therafuzz
