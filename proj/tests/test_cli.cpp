#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "qzeta/cli.hpp"
#include "qzeta/identities.hpp"
#include "qzeta/series.hpp"

using namespace qzeta;
using Json = nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
  Json json() const { return Json::parse(out); }
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("qzeta_cli_test_" + name);
}

Real parse_value(const Json& v, Bits bits = 512) { return Real::from_decimal(v.get<std::string>(), bits); }

Json strip_elapsed(Json doc) {
  for (Json& r : doc["records"]) r.erase("elapsed_ms");
  return doc;
}

}  // namespace

TEST_CASE("report digits") {
  CHECK(cli::report_digits(128) == 34);
  CHECK(cli::report_digits(64) == 15);
  CHECK(cli::report_digits(512) == 150);
}

TEST_CASE("eval zeta(2) at q=2") {
  const Run r = run({"eval", "zeta", "--s", "2", "--q", "2", "--prec-bits", "128"});
  REQUIRE(r.code == 0);
  const Json doc = r.json();
  CHECK(doc["schema_version"] == "1");
  REQUIRE(doc["records"].size() == 1);
  const Json& rec = doc["records"][0];
  CHECK(rec["function"] == "zeta");
  CHECK(rec["status"] == "converged");
  CHECK(rec["digits"] == 34);
  CHECK(std::strtold(rec["abs_error_bound"].get<std::string>().c_str(), nullptr) <= std::ldexp(1.0L, -108));
  CHECK(rec["terms_used"].get<long>() > 0);
  // value text round-trips to within one unit in the last place
  const Real v = parse_value(rec["value"]);
  const Real ref = test::ref("2.744033888759488360480214891492272164311");
  CHECK(abs(v - ref).to_long_double() <= 1e-33L * 2.75L);
}

TEST_CASE("eval domain error exits 2 with a record") {
  const Run r = run({"eval", "zeta", "--s", "0.5", "--q", "2"});
  CHECK(r.code == 2);
  const Json doc = r.json();
  CHECK(doc["records"][0]["status"] == "domain_error");
  CHECK(doc["records"][0]["value"] == "");
}

TEST_CASE("eval mt against the nested-sum evaluator") {
  const Run r = run({"eval", "mt", "--s", "3,1", "--slast", "2", "--q", "2", "--prec-bits", "128"});
  REQUIRE(r.code == 0);
  const Json rec = r.json()["records"][0];
  const PrecisionCtx ctx(128);
  const QBase q = QBase::from_decimal("2", ctx.work_bits());
  const std::vector<CVal> args{CVal(3L, 200), CVal(1L, 200), CVal(2L, 200)};
  const CVal oracle = naive_oracle(SeriesKind::mordell_tornheim, args, q, 400, 200);
  CHECK(abs(parse_value(rec["value"]) - oracle.re).to_long_double() < 1e-30L);
  CHECK(rec["params"]["slast"] == "2");
}

TEST_CASE("eval complex argument and expansion method") {
  const Run r = run({"eval", "zeta", "--s", "3,2", "--q", "2"});
  REQUIRE(r.code == 0);
  const std::string v = r.json()["records"][0]["value"];
  REQUIRE(v.find(',') != std::string::npos);
  CHECK(std::abs(std::stold(v.substr(0, v.find(','))) - 1.899886193319449392L) < 1e-15L);
  CHECK(std::abs(std::stold(v.substr(v.find(',') + 1)) + 0.10129634834687237201L) < 1e-15L);

  const Run series = run({"eval", "zeta2", "--s", "3,2", "--q", "2"});
  const Run expan = run({"eval", "zeta2", "--s1", "3", "--s2", "2", "--q", "2", "--method", "expansion"});
  REQUIRE(series.code == 0);
  REQUIRE(expan.code == 0);
  const Real a = parse_value(series.json()["records"][0]["value"]);
  const Real b = parse_value(expan.json()["records"][0]["value"]);
  CHECK(abs(a - b).to_long_double() < 1e-32L);
  CHECK(run({"eval", "zeta2star", "--s", "3,2", "--method", "expansion"}).code == 2);
}

TEST_CASE("configuration errors exit 2 before computing") {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"eval", "zetta", "--s", "2"},
           {"eval", "zeta", "--s", "2", "--q", "1"},
           {"eval", "zeta", "--s", "2", "--q", "abc"},
           {"eval", "zeta", "--s", "2", "--prec-bits", "32"},
           {"eval", "zeta2", "--s", "3"},
           {"verify", "--id", "nope"},
           {"verify", "--id", "t3_odd", "--s", "4", "--r", "2"},
           {"suite", "--ids", "t2_weight6", "--variant", "corrected"},
           {"limits", "--order", "sideways"},
           {"limits", "--steps", "0"},
           {"frobnicate"},
       }) {
    const Run r = run(args);
    CHECK_MESSAGE(r.code == 2, args[0], " ", args.size() > 1 ? args[1] : "");
    CHECK(r.out.empty());
    CHECK(!r.err.empty());
  }
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("verify nielsen passes") {
  const Run r = run({"verify", "--id", "nielsen_q", "--s", "2", "--sprime", "3", "--q", "2"});
  CHECK(r.code == 0);
  const Json doc = r.json();
  const Json& rec = doc["records"][0];
  CHECK(rec["verdict"] == "pass");
  CHECK(rec["params"]["sp"] == "3");
  CHECK(doc["summary"]["pass"] == 1);
  CHECK(doc["summary"]["fail"] == 0);
}

TEST_CASE("verify partial fraction with rational parameters") {
  const Run r = run({"verify", "--id", "pf_general", "--s", "3", "--r", "2", "--u", "0.37", "--v", "-1/3"});
  CHECK(r.code == 0);
  const Json rec = r.json()["records"][0];
  CHECK(rec["verdict"] == "pass");
  CHECK(rec["params"]["u"] == "37/100");
  CHECK(std::strtold(rec["residual"].get<std::string>().c_str(), nullptr) == 0.0L);
}

TEST_CASE("verdicts round-trip through the report") {
  const Run r = run({"suite", "--ids", "nielsen_q,t2_31", "--q", "2", "--range", "s=2:3", "--range", "sp=2:3"});
  REQUIRE(r.code == 1);
  const Json doc = r.json();
  long pass = 0, fail = 0, inconclusive = 0;
  for (const Json& rec : doc["records"]) {
    const long double res = std::strtold(rec["residual"].get<std::string>().c_str(), nullptr);
    const long double tol = std::strtold(rec["tolerance"].get<std::string>().c_str(), nullptr);
    CHECK(std::string(to_string(classify(res, tol))) == rec["verdict"].get<std::string>());
    pass += rec["verdict"] == "pass";
    fail += rec["verdict"] == "fail";
    inconclusive += rec["verdict"] == "inconclusive";
  }
  CHECK(doc["records"].size() == 5);
  CHECK(doc["summary"]["pass"] == pass);
  CHECK(doc["summary"]["fail"] == fail);
  CHECK(doc["summary"]["inconclusive"] == inconclusive);
  CHECK(doc["summary"]["records"] == doc["records"].size());
}

TEST_CASE("suite over the weight-four to six circ evaluations") {
  const Run stated = run({"suite", "--ids", "t2_31,t2_41,t2_51,t2_weight6", "--q", "1.5,2,3", "--prec-bits", "192"});
  const Json doc = stated.json();
  CHECK(doc["records"].size() == 12);
  CHECK(stated.code == (doc["summary"]["fail"].get<long>() > 0 ? 1 : 0));
  CHECK(doc["summary"]["pass"].get<long>() + doc["summary"]["fail"].get<long>() == 12);

  const Run fixed =
      run({"suite", "--ids", "t2_31,t2_41,t2_51", "--q", "1.5,2,3", "--prec-bits", "192", "--variant", "corrected"});
  CHECK(fixed.code == 0);
  CHECK(fixed.json()["summary"]["pass"] == 9);
}

TEST_CASE("tolerance override") {
  const Run r = run({"verify", "--id", "t2_31", "--q", "2", "--tol", "10"});
  CHECK(r.code == 0);
  CHECK(r.json()["records"][0]["verdict"] == "pass");
  CHECK(run({"verify", "--id", "t2_31", "--tol", "-1"}).code == 2);
}

TEST_CASE("audit reports the parity cells") {
  const Run r = run({"audit", "--s-max", "9", "--q", "2"});
  CHECK(r.code == 1);
  const Json doc = r.json();
  for (const Json& c : doc["parity_counts"]) CHECK(c["matches"] == true);
  const PrecisionCtx ctx(128);
  const QBase q = QBase::from_decimal("2", ctx.work_bits());
  const CVal a(2L, ctx.work_bits()), b(4L, ctx.work_bits());
  const long double z24 = (zeta2_q(a, b, q, ctx).value.re + zeta2_q(b, a, q, ctx).value.re).to_long_double();
  bool found = false;
  for (const Json& rec : doc["records"]) {
    if (rec["variant"] == "corrected") CHECK(rec["verdict"] == "pass");
    if (rec["identity_id"] == "t3_odd" && rec["variant"] == "as_stated" && rec["params"]["s"] == "5" &&
        rec["params"]["r"] == "2") {
      found = true;
      CHECK(rec["verdict"] == "fail");
      CHECK(rec["params"]["rp"] == "4");
      CHECK(std::abs(std::stold(rec["preregistered_expected"].get<std::string>()) - z24) < 1e-18L);
      CHECK(rec["variant_gap_matches"] == true);
    }
  }
  CHECK(found);
}

TEST_CASE("limits") {
  const Run a = run({"limits", "--order", "s2_first", "--steps", "8", "--prec-bits", "512"});
  REQUIRE(a.code == 0);
  const Json da = a.json();
  CHECK(da["records"].size() == 10);
  const Json& last = da["records"].back();
  CHECK(last["row"] == "limit");
  CHECK(std::abs((parse_value(last["value"]) - Real(5L, 512) / 12L).to_long_double()) < 1e-8L);

  const Run b = run({"limits", "--order", "s1_first", "--steps", "8", "--prec-bits", "512", "--format", "csv"});
  REQUIRE(b.code == 0);
  CHECK(b.out.rfind("row,order,k,q,", 0) == 0);
  const std::string tail = b.out.substr(b.out.rfind("\nlimit,") + 1);
  const auto fields = [&] {
    std::vector<std::string> f;
    std::stringstream ss(tail);
    std::string x;
    while (std::getline(ss, x, ',')) f.push_back(x);
    return f;
  }();
  REQUIRE(fields.size() > 6);
  CHECK(std::abs((Real::from_decimal(fields[6], 512) - Real(1L, 512) / 3L).to_long_double()) < 1e-8L);

  const Run c = run({"limits", "--order", "s2_first", "--steps", "1"});
  CHECK(c.code == 0);
  CHECK(c.json()["records"].size() == 3);
}

TEST_CASE("sweep cardinality, order and guard") {
  const Run r = run({"sweep", "zeta2", "--grid", "s1=4,2,3", "--grid", "s2=1,2", "--grid", "q=2,1.5"});
  REQUIRE(r.code == 0);
  std::vector<std::string> lines;
  std::stringstream ss(r.out);
  for (std::string l; std::getline(ss, l);) lines.push_back(l);
  REQUIRE(lines.size() == 13);
  CHECK(lines[0] ==
        "function,method,s1,s2,q,precision_bits,digits,status,value,abs_error_bound,terms_used,elapsed_ms");
  CHECK(lines[1].rfind("zeta2,series,2,1,1.5,", 0) == 0);
  CHECK(lines[2].rfind("zeta2,series,2,1,2,", 0) == 0);
  CHECK(lines[3].rfind("zeta2,series,2,2,1.5,", 0) == 0);
  CHECK(lines[12].rfind("zeta2,series,4,2,2,", 0) == 0);

  const Run c = run({"sweep", "circ", "--grid", "s1=3..6", "--grid", "s2=1", "--q", "2", "--format", "json"});
  REQUIRE(c.code == 0);
  const Json doc = c.json();
  REQUIRE(doc["records"].size() == 4);
  for (std::size_t i = 1; i < 4; ++i) {
    CHECK(parse_value(doc["records"][i]["value"]) < parse_value(doc["records"][i - 1]["value"]));
  }

  const Run big = run({"sweep", "zeta", "--grid", "s=2..1001", "--grid", "q=2..1001"});
  CHECK(big.code == 2);
  CHECK(big.out.empty());
  CHECK(run({"sweep", "zeta", "--grid", "x=2"}).code == 2);
}

TEST_CASE("identical invocations give identical reports") {
  const std::vector<std::string> args{"suite", "--ids", "diag_reduction,pf_basic", "--q", "2,3"};
  const Run a = run(args), b = run(args);
  CHECK(a.code == b.code);
  CHECK(strip_elapsed(a.json()) == strip_elapsed(b.json()));
}

TEST_CASE("output file is written atomically") {
  const auto path = temp_path("out.json");
  std::filesystem::remove(path);
  const Run ok = run({"eval", "zeta", "--s", "2", "--output", path.string()});
  CHECK(ok.code == 0);
  CHECK(ok.out.empty());
  REQUIRE(std::filesystem::exists(path));
  std::ifstream f(path);
  CHECK(Json::parse(f)["records"].size() == 1);
  std::filesystem::remove(path);

  const Run bad = run({"eval", "zeta", "--s", "2", "--q", "0.5", "--output", path.string()});
  CHECK(bad.code == 2);
  CHECK(!std::filesystem::exists(path));
  auto tmp = path;
  tmp += ".tmp";
  CHECK(!std::filesystem::exists(tmp));
}

TEST_CASE("config file and precision environment") {
  const auto path = temp_path("config.json");
  {
    std::ofstream f(path);
    f << R"({"command": "eval", "function": "zeta", "s": "3", "q": "1.5", "precision_bits": 192})";
  }
  const Run a = run({"--config", path.string()});
  REQUIRE(a.code == 0);
  const Json ra = a.json()["records"][0];
  CHECK(ra["precision_bits"] == 192);
  CHECK(ra["q"] == "1.5");
  CHECK(ra["value"].get<std::string>().rfind("1.69039969483342062309624036416", 0) == 0);

  const Run b = run({"eval", "zeta", "--config", path.string(), "--q", "2", "--prec-bits", "128"});
  REQUIRE(b.code == 0);
  CHECK(b.json()["records"][0]["precision_bits"] == 128);
  CHECK(b.json()["records"][0]["q"] == "2");
  std::filesystem::remove(path);
  CHECK(run({"--config", path.string()}).code == 2);

  ::setenv(cli::kPrecisionEnv, "256", 1);
  CHECK(run({"eval", "zeta", "--s", "2"}).json()["records"][0]["precision_bits"] == 256);
  CHECK(run({"eval", "zeta", "--s", "2", "--prec-bits", "96"}).json()["records"][0]["precision_bits"] == 96);
  ::setenv(cli::kPrecisionEnv, "12", 1);
  CHECK(run({"eval", "zeta", "--s", "2"}).code == 2);
  ::unsetenv(cli::kPrecisionEnv);
}

TEST_CASE("plain and csv formats carry the summary and header") {
  const Run p = run({"verify", "--id", "diag_reduction", "--s", "4", "--format", "plain"});
  CHECK(p.code == 0);
  CHECK(p.out.find("verdict=pass") != std::string::npos);
  CHECK(p.out.find("summary: records=1 pass=1 fail=0 inconclusive=0") != std::string::npos);
  const Run c = run({"verify", "--id", "diag_reduction", "--s", "4", "--format", "csv"});
  CHECK(c.out.rfind("identity_id,params,q,precision_bits,digits,variant,lhs,rhs,abs_error_bound,residual,", 0) == 0);
}
