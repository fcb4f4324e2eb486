#include <catch2/catch_amalgamated.hpp>

#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <sstream>

#include "cli.hpp"
#include "support/fixture.hpp"
#include "support/tempdir.hpp"

extern char** environ;

using namespace therafuzz;
using testing_support::TempDir;

namespace {

struct Run {
  int status;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int status = cli::run(args, out, err);
  return {status, out.str(), err.str()};
}

const std::string kKb = THERAFUZZ_FIXTURE_KB;

std::vector<std::string> fixture_sets() {
  return {"--set", "speech_problems_level=1.62", "--set", "family_implication=2.00", "--set", "child_age=4.50"};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("validate", "[cli]") {
  auto ok = run({"validate", kKb});
  CHECK(ok.status == 0);
  CHECK(ok.out.empty());
  CHECK(ok.err.empty());

  TempDir dir;
  auto path = (dir / "contra.fkb").string();
  detail::write_file_atomic(path, fixture::document() +
                                      "IF (speech_problems_level is normal) and (child_age is medium) and "
                                      "(family_implication is moderate) THEN weekly_session_number is high;\n");
  auto bad = run({"validate", path});
  CHECK(bad.status == 1);
  CHECK(count_lines(bad.err) == 1);
  CHECK_THAT(bad.err, Catch::Matchers::StartsWith(path + ":39:1: error[contradiction]"));

  auto missing = run({"validate", (dir / "nope.fkb").string()});
  CHECK(missing.status == 3);
}

TEST_CASE("consult trace", "[cli]") {
  auto r = run(concat({"consult", kKb, "--trace"}, fixture_sets()));
  REQUIRE(r.status == 0);
  CHECK(r.err.empty());
  CHECK(r.out ==
        "speech_problems_level (1.62) = {\"low\"/0.38, \"normal\"/0.62, \"high\"/0.00}\n"
        "family_implication (2.00) = {\"reduce\"/0.00, \"moderate\"/1.00, \"high\"/0.00}\n"
        "child_age (4.50) = {\"small\"/0.25, \"medium\"/0.50, \"big\"/0.00}\n"
        "r1: min(0.00, 0.50, 0.00) = 0.00 -> high\n"
        "r2: min(0.38, 0.25, 1.00) = 0.25 -> low\n"
        "r3: min(0.38, 0.50, 1.00) = 0.38 -> low\n"
        "r4: min(0.62, 0.25, 1.00) = 0.25 -> normal\n"
        "r5: min(0.62, 0.50, 1.00) = 0.50 -> normal\n"
        "low = max(0.25, 0.38) = 0.38\n"
        "normal = max(0.25, 0.50) = 0.50\n"
        "high = max(0.00) = 0.00\n"
        "output = 1.56\n"
        "1 to 2 sessions per week (2 preferred)\n");

  auto plain = run(concat({"consult", kKb}, fixture_sets()));
  CHECK(plain.out == "output = 1.56\n1 to 2 sessions per week (2 preferred)\n");

  auto again = run(concat({"consult", kKb, "--trace"}, fixture_sets()));
  CHECK(again.out == r.out);
}

TEST_CASE("consult with injected degrees replays the printed table", "[cli]") {
  auto r = run(concat({"consult", kKb, "--trace", "--degree", "speech_problems_level.low=0.37", "--degree",
                       "speech_problems_level.normal=0.62", "--degree", "family_implication.moderate=1", "--degree",
                       "child_age.small=0.25", "--degree", "child_age.medium=0.5"},
                      fixture_sets()));
  REQUIRE(r.status == 0);
  CHECK_THAT(r.out, Catch::Matchers::ContainsSubstring(
                        "family_implication (2.00) = {\"reduce\"/0.00, \"moderate\"/1.00, \"high\"/0.00}\n"));
  CHECK_THAT(r.out, Catch::Matchers::ContainsSubstring("r3: min(0.37, 0.50, 1.00) = 0.37 -> low\n"));
  CHECK_THAT(r.out, Catch::Matchers::ContainsSubstring("low = max(0.25, 0.37) = 0.37\n"));
  CHECK_THAT(r.out, Catch::Matchers::ContainsSubstring("normal = max(0.25, 0.50) = 0.50\n"));

  CHECK(run({"consult", kKb, "--degree", "child_age.small=0.25"}).status == 2);
  CHECK(run(concat({"consult", kKb, "--degree", "child_age.tiny=0.25"}, fixture_sets())).status == 2);
  CHECK(run(concat({"consult", kKb, "--degree", "child_age.small=1.5"}, fixture_sets())).status == 2);
}

TEST_CASE("consult errors map to exit codes", "[cli]") {
  auto sets = fixture_sets();
  sets[5] = "child_age=9";
  auto range = run(concat({"consult", kKb}, sets));
  CHECK(range.status == 1);
  CHECK_THAT(range.err, Catch::Matchers::ContainsSubstring("out-of-range"));
  CHECK(range.out.empty());

  auto missing = run({"consult", kKb, "--set", "child_age=4.5"});
  CHECK(missing.status == 1);
  CHECK_THAT(missing.err, Catch::Matchers::ContainsSubstring("family_implication"));

  auto none = run({"consult", kKb, "--set", "speech_problems_level=0", "--set", "family_implication=4", "--set",
                   "child_age=7"});
  CHECK(none.status == 1);
  CHECK_THAT(none.err, Catch::Matchers::ContainsSubstring("no rule fired"));

  CHECK(run({"consult", kKb, "--set", "child_age"}).status == 2);
  CHECK(run({"consult", kKb, "--set", "child_age=old"}).status == 2);
  CHECK(run(concat({"consult", kKb, "--resolution", "1"}, fixture_sets())).status == 2);
  CHECK(run({"consult", "/nonexistent/kb.fkb"}).status == 3);
}

TEST_CASE("batch consultations", "[cli]") {
  TempDir dir;
  auto path = (dir / "cohort.txt").string();
  detail::write_file_atomic(path,
                            "# cohort\n"
                            "speech_problems_level=1.62, family_implication=2, child_age=4.5\n"
                            "\n"
                            "speech_problems_level=2.5, family_implication=1.2, child_age=5\n"
                            "speech_problems_level=1.62, family_implication=2, child_age=9\n"
                            "speech_problems_level=1.62 family_implication=2\n");
  auto r = run({"consult", kKb, "--inputs", path});
  CHECK(r.status == 1);
  CHECK(r.out ==
        "line 2: output = 1.56; 1 to 2 sessions per week (2 preferred)\n"
        "line 4: output = 2.71; 2 to 3 sessions per week (3 preferred)\n"
        "line 5: error[out-of-range] value 9 for 'child_age' is outside its universe [3, 7]\n"
        "line 6: error[syntax] expected name=value, got 'speech_problems_level=1.62 family_implication=2'\n");

  auto base = run({"consult", kKb, "--inputs", path, "--set", "child_age=4.5"});
  CHECK_THAT(base.out, Catch::Matchers::ContainsSubstring("line 5: error[out-of-range]"));

  CHECK(run({"consult", kKb, "--inputs", (dir / "none.txt").string()}).status == 3);
}

TEST_CASE("fmt", "[cli]") {
  auto once = run({"fmt", kKb});
  REQUIRE(once.status == 0);
  TempDir dir;
  auto path = (dir / "formatted.fkb").string();
  detail::write_file_atomic(path, once.out);
  auto twice = run({"fmt", path});
  CHECK(twice.out == once.out);

  auto original = fixture::kb();
  auto reparsed = parse_kb(once.out);
  REQUIRE(reparsed.ok());
  REQUIRE(reparsed.value->rules.size() == original.rules.size());
  for (std::size_t i = 0; i < original.rules.size(); ++i) {
    CHECK(reparsed.value->rules[i].id == original.rules[i].id);
    CHECK(same_structure(reparsed.value->rules[i], original.rules[i]));
  }

  auto broken = (dir / "broken.fkb").string();
  detail::write_file_atomic(broken, "variable v input range 0 1 {\n");
  auto bad = run({"fmt", broken});
  CHECK(bad.status == 1);
  CHECK(bad.out.empty());
  CHECK_THAT(bad.err, Catch::Matchers::StartsWith(broken + ":"));
}

TEST_CASE("usage errors", "[cli]") {
  CHECK(run({}).status == 2);
  CHECK(run({"frobnicate"}).status == 2);
  CHECK(run({"validate"}).status == 2);
  auto help = run({"--help"});
  CHECK(help.status == 0);
  CHECK_THAT(help.out, Catch::Matchers::ContainsSubstring("consult"));
  CHECK(run({"serve", "--kb", kKb, "--listen", "nonsense"}).status == 2);
  CHECK(run({"serve"}).status == 2);
}

TEST_CASE("serve on an occupied port fails", "[cli]") {
  auto svc = TherapyService(std::make_unique<KbStore>(fixture::kb()));
  HttpServer holder(svc);
  int port = holder.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  auto r = run({"serve", "--kb", kKb, "--listen", "127.0.0.1:" + std::to_string(port)});
  CHECK(r.status == 3);
  CHECK_THAT(r.err, Catch::Matchers::ContainsSubstring("cannot listen"));
}

TEST_CASE("serve runs until SIGTERM", "[cli][process]") {
  TempDir dir;
  int pipe_fds[2];
  REQUIRE(pipe(pipe_fds) == 0);
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, pipe_fds[1], 2);
  posix_spawn_file_actions_addclose(&actions, pipe_fds[0]);

  std::vector<std::string> args = {THERAFUZZ_CLI_PATH, "serve",  "--listen", "127.0.0.1:0",
                                   "--kb",             kKb,      "--data",   dir.path().string()};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  pid_t pid = 0;
  REQUIRE(posix_spawn(&pid, THERAFUZZ_CLI_PATH, &actions, nullptr, argv.data(), environ) == 0);
  posix_spawn_file_actions_destroy(&actions);
  close(pipe_fds[1]);

  std::string banner;
  char c;
  while (read(pipe_fds[0], &c, 1) == 1 && c != '\n') banner += c;
  close(pipe_fds[0]);
  INFO(banner);
  auto colon = banner.find("127.0.0.1:");
  REQUIRE(colon != std::string::npos);
  int port = std::stoi(banner.substr(colon + 10));

  httplib::Client client("127.0.0.1", port);
  auto kb = client.Get("/kb");
  REQUIRE(kb);
  CHECK(kb->status == 200);
  CHECK(std::filesystem::exists(dir / kDocumentFile));

  kill(pid, SIGTERM);
  int wstatus = 0;
  REQUIRE(waitpid(pid, &wstatus, 0) == pid);
  CHECK(WIFEXITED(wstatus));
  CHECK(WEXITSTATUS(wstatus) == 0);
}
