#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "therafuzz/detail/files.hpp"
#include "therafuzz/detail/numbers.hpp"
#include "therafuzz/edit.hpp"
#include "therafuzz/knowledge_base.hpp"
#include "therafuzz/parser.hpp"
#include "therafuzz/validate.hpp"

namespace therafuzz {

inline constexpr const char* kDocumentFile = "kb.fkb";
inline constexpr const char* kMetaFile = "kb.meta";
inline constexpr const char* kOverridesFile = "overrides.log";

/// Sidecar next to the document: which revision it is and a hash of its bytes.
struct KbMeta {
  std::uint64_t revision = 0;
  std::string content_hash;  // "fnv1a64:<16 hex>"
};

inline std::string content_hash(std::string_view document) {
  return "fnv1a64:" + detail::hex64(detail::fnv1a64(document));
}

inline std::string format_meta(const KbMeta& m) {
  return "revision " + std::to_string(m.revision) + "\nhash " + m.content_hash + "\n";
}

inline std::optional<KbMeta> parse_meta(std::string_view text) {
  KbMeta m;
  bool have_rev = false, have_hash = false;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = detail::trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty()) continue;
    auto sp = line.find(' ');
    if (sp == std::string_view::npos) return std::nullopt;
    auto key = line.substr(0, sp);
    auto val = detail::trim(line.substr(sp + 1));
    if (key == "revision") {
      std::uint64_t r = 0;
      auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), r);
      if (ec != std::errc{} || p != val.data() + val.size()) return std::nullopt;
      m.revision = r;
      have_rev = true;
    } else if (key == "hash") {
      m.content_hash = std::string(val);
      have_hash = true;
    }
  }
  if (!have_rev || !have_hash) return std::nullopt;
  return m;
}

/// Parses and validates a document. Any error means no knowledge base; warnings
/// come back alongside a loaded one. With sidecar metadata whose hash matches the
/// document, the stored revision is restored; a mismatching hash means the
/// document changed outside the store and it is taken as the next revision.
inline Parsed<KnowledgeBase> load(std::string_view document, std::optional<std::string_view> meta = std::nullopt) {
  auto parsed = parse_kb(document);
  if (!parsed) return parsed;
  auto diags = validate(*parsed.value);
  parsed.diagnostics.insert(parsed.diagnostics.end(), diags.begin(), diags.end());
  if (has_errors(parsed.diagnostics)) {
    parsed.value.reset();
    return parsed;
  }
  if (meta) {
    auto m = parse_meta(*meta);
    if (!m) {
      parsed.diagnostics.push_back({Severity::error, Location{1, 1}, "unreadable kb.meta sidecar", "bad-meta"});
      parsed.value.reset();
      return parsed;
    }
    if (m->content_hash == content_hash(document)) {
      parsed.value->revision = m->revision;
    } else {
      parsed.value->revision = m->revision + 1;
      parsed.diagnostics.push_back({Severity::warning, Location{1, 1},
                                    "document does not match kb.meta; loaded as revision " +
                                        std::to_string(parsed.value->revision),
                                    "meta-mismatch"});
    }
  }
  return parsed;
}

/// Writes `kb.fkb` (canonical document) and `kb.meta` into `dir`.
inline void save(const KnowledgeBase& kb, const std::filesystem::path& dir) {
  std::string doc = render(kb);
  detail::write_file_atomic(dir / kDocumentFile, doc);
  detail::write_file_atomic(dir / kMetaFile, format_meta({kb.revision, content_hash(doc)}));
}

/// The authoritative knowledge base. Readers take immutable snapshots; edits go
/// through one writer at a time with a revision check, and are persisted before
/// they become visible.
class KbStore {
 public:
  explicit KbStore(KnowledgeBase kb, std::optional<std::filesystem::path> dir = std::nullopt)
      : current_(std::make_shared<const KnowledgeBase>(std::move(kb))), dir_(std::move(dir)) {}

  KbStore(const KbStore&) = delete;
  KbStore& operator=(const KbStore&) = delete;

  /// Opens the store in `dir`. If `dir` has no document yet, `seed` is copied in at revision 0.
  static std::unique_ptr<KbStore> open(const std::filesystem::path& dir,
                                       const std::optional<std::filesystem::path>& seed = std::nullopt) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("io", "cannot create " + dir.string() + ": " + ec.message());

    const auto doc_path = dir / kDocumentFile;
    std::string document;
    std::optional<std::string> meta;
    bool fresh = false;
    if (std::filesystem::exists(doc_path)) {
      auto bytes = detail::read_file(doc_path);
      if (!bytes) throw Error("io", "cannot read " + doc_path.string());
      document = std::move(*bytes);
      meta = detail::read_file(dir / kMetaFile);
    } else {
      if (!seed) throw Error("no-kb", "no knowledge base in " + dir.string() + " and no seed document given");
      auto bytes = detail::read_file(*seed);
      if (!bytes) throw Error("io", "cannot read " + seed->string());
      document = std::move(*bytes);
      fresh = true;
    }

    auto loaded = meta ? load(document, std::string_view(*meta)) : load(document);
    if (!loaded) throw DiagnosticsError(loaded.diagnostics, "knowledge base failed to load");
    const bool stale_meta = !meta || std::any_of(loaded.diagnostics.begin(), loaded.diagnostics.end(),
                                                 [](const Diagnostic& d) { return d.code == "meta-mismatch"; });
    if (fresh) detail::write_file_atomic(doc_path, document);
    if (fresh || stale_meta)
      detail::write_file_atomic(dir / kMetaFile, format_meta({loaded.value->revision, content_hash(document)}));

    auto store = std::make_unique<KbStore>(std::move(*loaded.value), dir);
    store->load_warnings_ = std::move(loaded.diagnostics);
    return store;
  }

  std::shared_ptr<const KnowledgeBase> snapshot() const {
    std::lock_guard lock(snapshot_mutex_);
    return current_;
  }

  std::uint64_t revision() const { return snapshot()->revision; }

  const std::vector<Diagnostic>& load_warnings() const noexcept { return load_warnings_; }
  const std::optional<std::filesystem::path>& directory() const noexcept { return dir_; }

  EditOutcome apply(const Edit& edit) {
    std::lock_guard writer(write_mutex_);
    auto base = snapshot();
    auto outcome = apply_edit(*base, edit);
    if (auto* accepted = std::get_if<EditAccepted>(&outcome)) {
      if (dir_) save(accepted->kb, *dir_);
      auto next = std::make_shared<const KnowledgeBase>(accepted->kb);
      std::lock_guard lock(snapshot_mutex_);
      current_ = std::move(next);
    }
    return outcome;
  }

 private:
  mutable std::mutex snapshot_mutex_;
  std::mutex write_mutex_;
  std::shared_ptr<const KnowledgeBase> current_;
  std::optional<std::filesystem::path> dir_;
  std::vector<Diagnostic> load_warnings_;
};

}  // namespace therafuzz
