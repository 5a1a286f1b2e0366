#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "rollcall/corpus.hpp"
#include "rollcall/io.hpp"
#include "util.hpp"

using namespace rollcall;

namespace {

struct RunResult {
  int code = -1;
  std::string output;  // stdout and stderr combined
};

RunResult run_cli(const std::string& args) {
  const char* bin = std::getenv("ROLLCALL_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "ROLLCALL_BIN must point at the rollcall binary");
  std::string cmd = std::string(bin) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

size_t count_lines(const std::string& s) {
  size_t n = 0;
  for (char c : s)
    if (c == '\n') ++n;
  return n;
}

constexpr const char* kTinySchedule = " --m-init 5 --m-max 8 --max-sweeps 3";

// 8 lawmakers, 60 labeled bills whose theme tokens survive the phrase
// filters (each in exactly 5 of 60 documents), and a complete vote grid
struct Fixture {
  testutil::TempDir dir;
  std::string lawmakers_path, bills_path, votes_path;
  std::string prep, fit_issue, fit_classic, eval_dir;

  Fixture() {
    std::vector<Lawmaker> lms;
    for (int u = 0; u < 8; ++u)
      lms.push_back({"L" + std::to_string(u),
                     u == 3 ? "Smith, Jane" : "Member " + std::to_string(u),
                     u < 4 ? Party::Democrat : Party::Republican, Chamber::House});

    std::vector<BillDoc> bills;
    std::vector<VoteRecord> votes;
    for (int d = 0; d < 60; ++d) {
      bool health = d < 30;
      std::string theme = (health ? "hm" : "tx") + std::to_string((d % 30) / 5);
      BillDoc b;
      b.id = "b" + std::to_string(d);
      b.title = "Bill " + std::to_string(d);
      b.tokens = {theme, theme, theme, "uniq" + std::to_string(d)};
      b.labels = {health ? "health" : "taxation"};
      bills.push_back(b);
      for (int u = 0; u < 8; ++u)
        votes.push_back({lms[u].id, b.id, (u < 4) == (d % 2 == 0)});
    }

    lawmakers_path = dir.file("lawmakers.csv");
    bills_path = dir.file("bills.jsonl");
    votes_path = dir.file("votes.csv");
    save_lawmakers(lms, lawmakers_path);
    save_bills(bills, bills_path);
    save_votes(votes, votes_path);

    prep = dir.file("prep");
    fit_issue = dir.file("fit_issue");
    fit_classic = dir.file("fit_classic");
    eval_dir = dir.file("eval");
  }

  std::string data_args() const {
    return " --lawmakers " + lawmakers_path + " --bills " + bills_path + " --votes " +
           votes_path;
  }
};

Fixture& fx() {
  static Fixture f;
  return f;
}

nlohmann::json parse_file(const std::string& path) {
  return nlohmann::json::parse(testutil::slurp(path));
}

}  // namespace

TEST_CASE("usage errors exit 1 and help exits 0") {
  CHECK(run_cli("").code == 1);
  CHECK(run_cli("fit --out /tmp/x").code == 1);  // missing required inputs
  CHECK(run_cli("--no-such-flag").code == 1);
  CHECK(run_cli("fit --variant bogus --lawmakers a --bills b --votes c --out d").code == 1);
  auto help = run_cli("--help");
  CHECK(help.code == 0);
  CHECK(help.output.find("prepare") != std::string::npos);
}

TEST_CASE("prepare builds vocabulary, topics, and mixtures") {
  auto& f = fx();
  auto r = run_cli("prepare --bills " + f.bills_path + " --out " + f.prep +
                   " --variant issue_lda --min-label-count 3 --max-ngram 1 --seed 3");
  REQUIRE_MESSAGE(r.code == 0, r.output);
  CHECK(r.output.find("vocabulary=12") != std::string::npos);
  CHECK(r.output.find("K=2") != std::string::npos);

  auto vocab = testutil::slurp(f.prep + "/vocabulary.txt");
  CHECK(count_lines(vocab) == 12);
  CHECK(vocab.find("hm0") != std::string::npos);
  CHECK(vocab.find("tx5") != std::string::npos);
  CHECK(vocab.find("uniq") == std::string::npos);

  CHECK(testutil::slurp(f.prep + "/labels.txt") == "health\ntaxation\n");

  auto mixtures = load_mixtures(f.prep + "/mixtures.csv");
  REQUIRE(mixtures.size() == 60);
  for (const auto& m : mixtures) {
    REQUIRE(m.theta.size() == 2);
    CHECK(m.theta[0] + m.theta[1] == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(mixtures[0].bill_id == "b0");
  CHECK(mixtures[0].theta[0] > 0.8);   // health bill leans to the health topic
  CHECK(mixtures[59].theta[1] > 0.8);  // taxation bill leans the other way

  CHECK(verify_manifest(f.prep + "/manifest.json").empty());
  auto manifest = read_manifest(f.prep + "/manifest.json");
  CHECK(manifest.command == "prepare");
  CHECK(manifest.work.at("topics") == 2);
  CHECK(manifest.outputs.count("vocabulary.txt") == 1);
  CHECK(manifest.outputs.count("mixtures.csv") == 1);
}

TEST_CASE("prepare reports a missing bills file with its path") {
  auto& f = fx();
  auto r = run_cli("prepare --bills /nope/bills.jsonl --out " + f.dir.file("px"));
  CHECK(r.code == 2);
  CHECK(r.output.find("/nope/bills.jsonl") != std::string::npos);
}

TEST_CASE("prepare issue_direct rejects unlabeled bills by id") {
  testutil::TempDir dir;
  std::vector<BillDoc> bills;
  for (int i = 0; i < 3; ++i) {
    BillDoc b;
    b.id = "q" + std::to_string(i);
    b.tokens = {"word"};
    if (i < 2) b.labels = {"health"};
    bills.push_back(b);
  }
  auto path = dir.file("bills.jsonl");
  save_bills(bills, path);
  auto r = run_cli("prepare --bills " + path + " --out " + dir.file("out") +
                   " --variant issue_direct --min-label-count 2");
  CHECK(r.code == 2);
  CHECK(r.output.find("q2") != std::string::npos);
}

TEST_CASE("fit classic omits adjustments from the output") {
  auto& f = fx();
  auto r = run_cli("fit" + f.data_args() + " --out " + f.fit_classic + " --seed 5" +
                   kTinySchedule);
  REQUIRE_MESSAGE(r.code == 0, r.output);
  CHECK(r.output.find("K=0") != std::string::npos);

  auto params = parse_file(f.fit_classic + "/params.json");
  CHECK(params["K"] == 0);
  CHECK_FALSE(params.contains("z"));
  CHECK(params["x"].size() == 8);
  CHECK(params["a"].size() == 60);
  CHECK(params["lawmaker_ids"][3] == "L3");

  auto trace = testutil::slurp(f.fit_classic + "/trace.csv");
  CHECK(count_lines(trace) == 4);  // header + one sweep per line
  CHECK(verify_manifest(f.fit_classic + "/manifest.json").empty());
}

TEST_CASE("fit with issue mixtures records labels and adjustments") {
  auto& f = fx();
  auto r = run_cli("fit" + f.data_args() + " --mixtures " + f.prep + "/mixtures.csv" +
                   " --labels " + f.prep + "/labels.txt --out " + f.fit_issue + " --seed 5" +
                   kTinySchedule);
  REQUIRE_MESSAGE(r.code == 0, r.output);
  CHECK(r.output.find("K=2") != std::string::npos);

  auto params = parse_file(f.fit_issue + "/params.json");
  CHECK(params["K"] == 2);
  CHECK(params.contains("z"));
  CHECK(params["labels"] == nlohmann::json({"health", "taxation"}));
  CHECK(verify_manifest(f.fit_issue + "/manifest.json").empty());
}

TEST_CASE("explicit default lambda changes nothing") {
  auto& f = fx();
  auto d1 = f.dir.file("lam_default");
  auto d2 = f.dir.file("lam_explicit");
  auto base = "fit" + f.data_args() + " --seed 5" + kTinySchedule;
  REQUIRE(run_cli(base + " --out " + d1).code == 0);
  REQUIRE(run_cli(base + " --out " + d2 + " --lambda 1").code == 0);
  CHECK(testutil::slurp(d1 + "/params.json") == testutil::slurp(d2 + "/params.json"));
  CHECK(testutil::slurp(d1 + "/trace.csv") == testutil::slurp(d2 + "/trace.csv"));
  CHECK(testutil::slurp(d1 + "/checkpoint.json") == testutil::slurp(d2 + "/checkpoint.json"));
}

TEST_CASE("a resumed fit matches the uninterrupted run byte for byte") {
  auto& f = fx();
  auto full = f.dir.file("resume_full");
  auto split = f.dir.file("resume_split");
  auto base = "fit" + f.data_args() + " --seed 9 --m-init 5 --m-max 8";
  REQUIRE(run_cli(base + " --max-sweeps 6 --out " + full).code == 0);
  REQUIRE(run_cli(base + " --max-sweeps 3 --out " + split).code == 0);
  REQUIRE(run_cli(base + " --max-sweeps 6 --resume --out " + split).code == 0);
  CHECK(testutil::slurp(full + "/params.json") == testutil::slurp(split + "/params.json"));
  CHECK(testutil::slurp(full + "/trace.csv") == testutil::slurp(split + "/trace.csv"));
}

TEST_CASE("evaluate writes the cross-validation report") {
  auto& f = fx();
  auto r = run_cli("evaluate" + f.data_args() + " --mixtures " + f.prep + "/mixtures.csv" +
                   " --labels " + f.prep +
                   "/labels.txt --variants classic,issue_lda,issue_permuted --folds 2" +
                   " --permutations 1 --significance-r 2 --seed 11 --out " + f.eval_dir +
                   kTinySchedule);
  REQUIRE_MESSAGE(r.code == 0, r.output);
  CHECK(r.output.find("classic mean_ll=") != std::string::npos);
  CHECK(r.output.find("issue_lda mean_ll=") != std::string::npos);
  CHECK(r.output.find("issue_permuted mean_ll=") != std::string::npos);

  auto cv = testutil::slurp(f.eval_dir + "/cv.csv");
  CHECK(count_lines(cv) == 7);  // header + 3 variants x 2 folds
  CHECK(cv.rfind("variant,permutation,fold,mean_ll,accuracy,n_eval,n_excluded,converged\n",
                 0) == 0);

  auto imp = testutil::slurp(f.eval_dir + "/improvements.csv");
  CHECK(count_lines(imp) == 3);
  CHECK(imp.find("health,") != std::string::npos);
  CHECK(imp.find("taxation,") != std::string::npos);

  auto report = parse_file(f.eval_dir + "/report.json");
  CHECK(report["mean_ll"].size() == 3);
  CHECK(report["mean_ll"].contains("classic"));
  CHECK(report["votes_improved"].is_number_unsigned());

  auto sig = parse_file(f.eval_dir + "/significance.json");
  CHECK(sig["replications"] == 2);
  CHECK(sig["lawmaker_ids"].size() == 8);
  CHECK(sig["beta"].size() == 2);
  CHECK(sig["zhat"].size() == 8);
  CHECK(sig["flagged"].size() == 8);
  CHECK(sig["flagged"][0].size() == 2);

  CHECK(verify_manifest(f.eval_dir + "/manifest.json").empty());
  auto manifest = read_manifest(f.eval_dir + "/manifest.json");
  CHECK(manifest.work.at("cv_fits") == 6);
  CHECK(manifest.work.at("significance_fits") == 3);
}

TEST_CASE("evaluate needs at least two folds") {
  auto& f = fx();
  auto r = run_cli("evaluate" + f.data_args() + " --variants classic --folds 1 --out " +
                   f.dir.file("ev1") + kTinySchedule);
  CHECK(r.code == 1);
}

TEST_CASE("evaluate reruns with one seed are byte-identical") {
  auto& f = fx();
  auto d2 = f.dir.file("eval_again");
  auto r = run_cli("evaluate" + f.data_args() + " --mixtures " + f.prep + "/mixtures.csv" +
                   " --labels " + f.prep +
                   "/labels.txt --variants classic,issue_lda,issue_permuted --folds 2" +
                   " --permutations 1 --significance-r 2 --seed 11 --out " + d2 +
                   kTinySchedule);
  REQUIRE(r.code == 0);
  for (const char* name : {"cv.csv", "improvements.csv", "report.json", "significance.json"})
    CHECK(testutil::slurp(f.eval_dir + "/" + name) == testutil::slurp(d2 + "/" + name));
}

TEST_CASE("explore exports plot data") {
  auto& f = fx();
  auto xdir = f.dir.file("explore");
  auto r = run_cli("explore --params " + f.fit_issue + "/params.json --lawmakers " +
                   f.lawmakers_path + " --out " + xdir +
                   " --seed 13 --baseline-trials 5 --bins 4");
  REQUIRE_MESSAGE(r.code == 0, r.output);
  CHECK(r.output.find("projection_corr=") != std::string::npos);

  auto ideal = testutil::slurp(xdir + "/ideal_points.csv");
  CHECK(count_lines(ideal) == 9);
  CHECK(ideal.rfind("lawmaker_id,name,party,x\n", 0) == 0);
  CHECK(ideal.find("\"Smith, Jane\"") != std::string::npos);

  auto issue = testutil::slurp(xdir + "/issue_points.csv");
  CHECK(count_lines(issue) == 17);  // header + 8 lawmakers x 2 issues
  CHECK(issue.find(",health,") != std::string::npos);
  CHECK(issue.find(",taxation,") != std::string::npos);

  // (ideal_point + 2 issues) x 2 parties x 4 bins
  auto hist = testutil::slurp(xdir + "/histograms.csv");
  CHECK(count_lines(hist) == 25);

  auto disc = parse_file(xdir + "/discriminant.json");
  CHECK(disc["weights"].size() == 3);
  CHECK(disc["baseline_trials"] == 5);
  CHECK(std::fabs(disc["projection_corr"].get<double>()) <= 1.0);
  CHECK(verify_manifest(xdir + "/manifest.json").empty());
}

TEST_CASE("explore restricted to one issue") {
  auto& f = fx();
  auto xdir = f.dir.file("explore_health");
  auto r = run_cli("explore --params " + f.fit_issue + "/params.json --lawmakers " +
                   f.lawmakers_path + " --out " + xdir +
                   " --seed 13 --baseline-trials 5 --bins 4 --issue health");
  REQUIRE_MESSAGE(r.code == 0, r.output);
  auto issue = testutil::slurp(xdir + "/issue_points.csv");
  CHECK(count_lines(issue) == 9);  // header + one row per lawmaker
  CHECK(issue.find(",health,") != std::string::npos);
  CHECK(issue.find(",taxation,") == std::string::npos);
  auto hist = testutil::slurp(xdir + "/histograms.csv");
  CHECK(count_lines(hist) == 17);  // (ideal_point + health) x 2 parties x 4
}

TEST_CASE("explore rejects an unknown issue and lists the labels") {
  auto& f = fx();
  auto r = run_cli("explore --params " + f.fit_issue + "/params.json --lawmakers " +
                   f.lawmakers_path + " --out " + f.dir.file("xu") + " --issue bogus");
  CHECK(r.code == 1);
  CHECK(r.output.find("bogus") != std::string::npos);
  CHECK(r.output.find("health, taxation") != std::string::npos);
}

TEST_CASE("explore rejects --issue on a classical fit") {
  auto& f = fx();
  auto r = run_cli("explore --params " + f.fit_classic + "/params.json --lawmakers " +
                   f.lawmakers_path + " --out " + f.dir.file("xc") + " --issue health");
  CHECK(r.code == 1);
}

TEST_CASE("explore writes one lawmaker's flagged issues") {
  auto& f = fx();
  auto xdir = f.dir.file("explore_lm");
  auto r = run_cli("explore --params " + f.fit_issue + "/params.json --lawmakers " +
                   f.lawmakers_path + " --significance " + f.eval_dir +
                   "/significance.json --lawmaker L3 --out " + xdir +
                   " --seed 13 --baseline-trials 5 --bins 4");
  REQUIRE_MESSAGE(r.code == 0, r.output);
  auto j = parse_file(xdir + "/lawmaker.json");
  CHECK(j["lawmaker_id"] == "L3");
  CHECK(j["name"] == "Smith, Jane");
  CHECK(j["party"] == "D");
  REQUIRE(j["issues"].size() == 2);
  for (const auto& e : j["issues"]) {
    CHECK(e.contains("label"));
    CHECK(e.contains("z"));
    CHECK(e.contains("zhat"));
    CHECK(e["flagged"].is_boolean());
  }
  CHECK(j["issues"][0]["label"] == "health");
}

TEST_CASE("explore --lawmaker requires the significance report") {
  auto& f = fx();
  auto r = run_cli("explore --params " + f.fit_issue + "/params.json --lawmakers " +
                   f.lawmakers_path + " --lawmaker L3 --out " + f.dir.file("xl"));
  CHECK(r.code == 1);
}
