#pragma once

#include <CLI11.hpp>
#include <pthread.h>
#include <signal.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "therafuzz/detail/files.hpp"
#include "therafuzz/detail/numbers.hpp"
#include "therafuzz/http.hpp"
#include "therafuzz/inference.hpp"
#include "therafuzz/lexer.hpp"
#include "therafuzz/parser.hpp"
#include "therafuzz/service.hpp"
#include "therafuzz/store.hpp"
#include "therafuzz/validate.hpp"

namespace therafuzz::cli {

enum ExitStatus : int { kOk = 0, kDiagnostics = 1, kUsage = 2, kRuntime = 3 };

namespace detail {

using therafuzz::detail::ascii_lower;
using therafuzz::detail::fixed2;
using therafuzz::detail::trim;

struct UsageError {
  std::string message;
};

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = ascii_lower(c);
  return out;
}

/// `name=value` with a numeric value.
inline std::pair<std::string, double> parse_assignment(std::string_view text) {
  auto eq = text.find('=');
  if (eq == std::string_view::npos) throw UsageError{"expected name=value, got '" + std::string(text) + "'"};
  auto name = trim(text.substr(0, eq));
  auto value = therafuzz::detail::parse_double(trim(text.substr(eq + 1)));
  if (name.empty() || !value) throw UsageError{"expected name=value, got '" + std::string(text) + "'"};
  return {lower(name), *value};
}

/// One batch line: comma-separated assignments.
inline Inputs parse_input_line(std::string_view line) {
  Inputs out;
  while (!line.empty()) {
    auto comma = line.find(',');
    auto piece = trim(line.substr(0, comma));
    line = comma == std::string_view::npos ? std::string_view{} : line.substr(comma + 1);
    if (piece.empty()) continue;
    auto [name, value] = parse_assignment(piece);
    out[name] = value;
  }
  return out;
}

/// Reads and loads a knowledge base file, printing diagnostics. Returns an exit
/// status when loading did not succeed.
inline std::optional<int> load_kb(const std::string& path, KnowledgeBase& out, std::ostream& err,
                                  bool print_warnings) {
  auto bytes = therafuzz::detail::read_file(path);
  if (!bytes) {
    err << path << ": cannot read file\n";
    return kRuntime;
  }
  auto loaded = load(*bytes);
  for (const auto& d : loaded.diagnostics)
    if (print_warnings || d.severity == Severity::error) err << path << ":" << format_diagnostic(d) << "\n";
  if (!loaded) return kDiagnostics;
  out = std::move(*loaded.value);
  return std::nullopt;
}

inline void print_trace(const ConsultationResult& r, std::ostream& out) {
  for (const auto& fv : r.fuzzified) out << format_fuzzified(fv) << "\n";
  for (const auto& f : r.firings) {
    out << f.rule_id << ": min(";
    for (std::size_t i = 0; i < f.clause_degrees.size(); ++i) out << (i ? ", " : "") << fixed2(f.clause_degrees[i].degree);
    out << ") = " << fixed2(f.alpha) << " -> " << f.consequent.term << "\n";
  }
  for (const auto& o : r.outputs) {
    const std::string prefix = r.outputs.size() > 1 ? o.aggregate.name() + "." : "";
    for (const auto& t : o.aggregate.term_alphas()) {
      std::vector<double> alphas;
      for (const auto& f : r.firings)
        if (f.consequent.variable == o.aggregate.name() && f.consequent.term == t.term) alphas.push_back(f.alpha);
      out << prefix << t.term << " = ";
      if (alphas.empty()) {
        out << fixed2(t.degree) << " (no rule)\n";
        continue;
      }
      out << "max(";
      for (std::size_t i = 0; i < alphas.size(); ++i) out << (i ? ", " : "") << fixed2(alphas[i]);
      out << ") = " << fixed2(t.degree) << "\n";
    }
  }
}

inline void print_outputs(const ConsultationResult& r, std::ostream& out) {
  if (r.outputs.size() == 1) {
    out << "output = " << fixed2(r.crisp_output()) << "\n";
  } else {
    for (const auto& o : r.outputs) out << "output " << o.aggregate.name() << " = " << fixed2(o.crisp) << "\n";
  }
  out << r.recommendation.note << "\n";
}

/// Builds fuzzified values from `var.term=degree` assignments, bypassing the
/// membership functions. Terms not mentioned get degree 0.
inline std::vector<FuzzifiedValue> injected_degrees(const KnowledgeBase& kb, const std::vector<std::string>& specs,
                                                    const Inputs& crisp) {
  std::map<std::string, std::map<std::string, double>> given;
  for (const auto& s : specs) {
    auto [name, value] = parse_assignment(s);
    auto dot = name.find('.');
    if (dot == std::string::npos) throw UsageError{"--degree expects variable.term=degree, got '" + s + "'"};
    if (!(value >= 0.0 && value <= 1.0)) throw UsageError{"degree must lie in [0, 1], got '" + s + "'"};
    given[name.substr(0, dot)][name.substr(dot + 1)] = value;
  }
  for (const auto& [var, _] : given) {
    const auto* v = kb.find_variable(var);
    if (!v || v->role() != VariableRole::input) throw UsageError{"'" + var + "' is not an input variable"};
  }
  std::vector<FuzzifiedValue> out;
  for (const auto& var_def : kb.variables) {
    const auto* v = &var_def;
    const auto& var = v->name();
    auto g = given.find(var);
    if (g == given.end()) continue;
    const auto& terms = g->second;
    auto c = crisp.find(var);
    if (c == crisp.end()) throw UsageError{"--degree for '" + var + "' needs --set " + var + "=<value> as well"};
    FuzzifiedValue fv{var, c->second, {}};
    for (const auto& t : v->terms()) {
      auto it = terms.find(t.name);
      fv.degrees.push_back({t.name, it == terms.end() ? 0.0 : it->second});
    }
    for (const auto& [term, _] : terms)
      if (!v->find_term(term)) throw UsageError{"'" + var + "' has no term '" + term + "'"};
    out.push_back(std::move(fv));
  }
  return out;
}

struct ConsultOptions {
  std::string kb_path;
  std::vector<std::string> sets;
  std::vector<std::string> degrees;
  std::string inputs_file;
  bool trace = false;
  int resolution = kDefaultResolution;
};

inline int run_consult(const ConsultOptions& o, std::ostream& out, std::ostream& err) {
  KnowledgeBase kb;
  if (auto status = load_kb(o.kb_path, kb, err, false)) return *status;

  Inputs base;
  for (const auto& s : o.sets) {
    auto [name, value] = parse_assignment(s);
    base[name] = value;
  }

  if (!o.inputs_file.empty()) {
    if (!o.degrees.empty()) throw UsageError{"--degree cannot be combined with --inputs"};
    auto bytes = therafuzz::detail::read_file(o.inputs_file);
    if (!bytes) {
      err << o.inputs_file << ": cannot read file\n";
      return kRuntime;
    }
    int status = kOk;
    std::string_view text = *bytes;
    std::size_t line_no = 0;
    while (!text.empty()) {
      ++line_no;
      auto nl = text.find('\n');
      auto line = text.substr(0, nl);
      text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
      if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      if (trim(line).empty()) continue;
      out << "line " << line_no << ": ";
      try {
        auto inputs = base;
        for (const auto& [k, v] : parse_input_line(line)) inputs[k] = v;
        auto r = infer(kb, inputs, o.resolution);
        out << "output = " << fixed2(r.crisp_output()) << "; " << r.recommendation.note << "\n";
      } catch (const UsageError& e) {
        out << "error[syntax] " << e.message << "\n";
        status = kDiagnostics;
      } catch (const Error& e) {
        out << "error[" << e.code() << "] " << e.what() << "\n";
        status = kDiagnostics;
      }
    }
    return status;
  }

  try {
    ConsultationResult r = o.degrees.empty()
                               ? infer(kb, base, o.resolution)
                               : infer_fuzzified(kb, injected_degrees(kb, o.degrees, base), o.resolution);
    if (o.trace) print_trace(r, out);
    print_outputs(r, out);
    return kOk;
  } catch (const NoRuleFired& e) {
    err << "error[" << e.code() << "] no rule fired for these inputs, so there is no recommendation: " << e.what()
        << "\n";
    return kDiagnostics;
  } catch (const Error& e) {
    err << "error[" << e.code() << "] " << e.what() << "\n";
    return kDiagnostics;
  }
}

inline int run_validate(const std::string& path, std::ostream& err) {
  auto bytes = therafuzz::detail::read_file(path);
  if (!bytes) {
    err << path << ": cannot read file\n";
    return kRuntime;
  }
  auto loaded = load(*bytes);
  for (const auto& d : loaded.diagnostics) err << path << ":" << format_diagnostic(d) << "\n";
  return has_errors(loaded.diagnostics) ? kDiagnostics : kOk;
}

inline int run_fmt(const std::string& path, std::ostream& out, std::ostream& err) {
  auto bytes = therafuzz::detail::read_file(path);
  if (!bytes) {
    err << path << ": cannot read file\n";
    return kRuntime;
  }
  auto parsed = parse_kb(*bytes);
  if (!parsed) {
    for (const auto& d : parsed.diagnostics) err << path << ":" << format_diagnostic(d) << "\n";
    return kDiagnostics;
  }
  out << render(*parsed.value);
  return kOk;
}

struct ServeOptions {
  std::string listen = "127.0.0.1:8080";
  std::string kb_path;
  std::string data_dir;
  int resolution = kDefaultResolution;
};

inline std::pair<std::string, int> split_listen(const std::string& listen) {
  auto colon = listen.rfind(':');
  if (colon == std::string::npos) throw UsageError{"--listen expects host:port, got '" + listen + "'"};
  int port = -1;
  auto p = std::string_view(listen).substr(colon + 1);
  auto [end, ec] = std::from_chars(p.data(), p.data() + p.size(), port);
  if (ec != std::errc{} || end != p.data() + p.size() || port < 0 || port > 65535)
    throw UsageError{"bad port in '" + listen + "'"};
  return {listen.substr(0, colon), port};
}

/// Blocks SIGINT/SIGTERM on this thread (and threads it starts) so a dedicated
/// thread can receive them with sigwait and stop the server.
inline int run_serve(const ServeOptions& o, std::ostream& err) {
  auto [host, port] = split_listen(o.listen);
  if (o.resolution < 2) throw UsageError{"--resolution must be at least 2"};

  std::unique_ptr<KbStore> store;
  try {
    if (!o.data_dir.empty()) {
      store = KbStore::open(o.data_dir, o.kb_path.empty() ? std::nullopt : std::optional<std::filesystem::path>(o.kb_path));
    } else {
      if (o.kb_path.empty()) throw UsageError{"serve needs --kb, --data, or both"};
      KnowledgeBase kb;
      if (auto status = load_kb(o.kb_path, kb, err, true)) return *status;
      store = std::make_unique<KbStore>(std::move(kb));
    }
  } catch (const DiagnosticsError& e) {
    for (const auto& d : e.diagnostics()) err << format_diagnostic(d) << "\n";
    return kDiagnostics;
  } catch (const Error& e) {
    err << "error[" << e.code() << "] " << e.what() << "\n";
    return kRuntime;
  }
  for (const auto& d : store->load_warnings()) err << format_diagnostic(d) << "\n";

  ServiceOptions opts;
  if (!o.data_dir.empty()) opts.data_dir = o.data_dir;
  opts.default_resolution = o.resolution;
  std::unique_ptr<TherapyService> service;
  try {
    service = std::make_unique<TherapyService>(std::move(store), opts);
  } catch (const Error& e) {
    err << "error[" << e.code() << "] " << e.what() << "\n";
    return kRuntime;
  }
  HttpServer server(*service);
  int bound = server.bind(host, port);
  if (bound < 0) {
    err << "cannot listen on " << o.listen << "\n";
    return kRuntime;
  }

  sigset_t signals, previous;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, &previous);
  std::thread watcher([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });

  err << "listening on " << host << ":" << bound << " (kb revision " << service->store().revision() << ")\n";
  err.flush();
  bool clean = server.serve();
  // serve() also returns on failure; wake the watcher in that case.
  pthread_kill(watcher.native_handle(), SIGTERM);
  watcher.join();
  pthread_sigmask(SIG_SETMASK, &previous, nullptr);
  return clean ? kOk : kRuntime;
}

}  // namespace detail

/// Runs the command line `args` (without the program name).
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fuzzy expert-system shell for speech-therapy session planning", "therafuzz"};
  app.require_subcommand(1);

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a knowledge base; diagnostics go to stderr");
  validate_cmd->add_option("kb", validate_path, "Knowledge base file")->required();

  detail::ConsultOptions consult;
  auto* consult_cmd = app.add_subcommand("consult", "Run a consultation against a knowledge base");
  consult_cmd->add_option("kb", consult.kb_path, "Knowledge base file")->required();
  consult_cmd->add_option("--set", consult.sets, "Input value, name=value (repeatable)");
  consult_cmd->add_flag("--trace", consult.trace, "Print fuzzification, rule firings and aggregation");
  consult_cmd->add_option("--resolution", consult.resolution, "Centroid sample count")->check(CLI::Range(2, 10000000));
  consult_cmd->add_option("--inputs", consult.inputs_file,
                          "Batch file: one consultation per line, comma-separated name=value pairs");
  consult_cmd->add_option("--degree", consult.degrees,
                          "Inject a membership degree, variable.term=degree, instead of fuzzifying (repeatable)");

  std::string fmt_path;
  auto* fmt_cmd = app.add_subcommand("fmt", "Print the canonical form of a knowledge base");
  fmt_cmd->add_option("kb", fmt_path, "Knowledge base file")->required();

  detail::ServeOptions serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--listen", serve.listen, "host:port to listen on")->envname("THERAFUZZ_LISTEN");
  serve_cmd->add_option("--kb", serve.kb_path, "Knowledge base file (seed when --data is empty)")
      ->envname("THERAFUZZ_KB");
  serve_cmd->add_option("--data", serve.data_dir, "Data directory for the KB, consultations and overrides")
      ->envname("THERAFUZZ_DATA");
  serve_cmd->add_option("--resolution", serve.resolution, "Default centroid sample count")
      ->envname("THERAFUZZ_RESOLUTION");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*validate_cmd) return detail::run_validate(validate_path, err);
    if (*consult_cmd) return detail::run_consult(consult, out, err);
    if (*fmt_cmd) return detail::run_fmt(fmt_path, out, err);
    if (*serve_cmd) return detail::run_serve(serve, err);
  } catch (const detail::UsageError& e) {
    err << "usage error: " << e.message << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}

}  // namespace therafuzz::cli
