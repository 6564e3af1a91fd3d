#include "qzeta/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "qzeta/expansion.hpp"
#include "qzeta/identities.hpp"
#include "qzeta/qnum.hpp"
#include "qzeta/series.hpp"

namespace qzeta::cli {

namespace {

using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string command;
  std::string function;
  std::string format;
  std::string output;
  std::string config;
  Bits prec_bits = 128;
  std::string tol;
  std::string q = "2";
  // eval
  std::string method = "series";
  std::string s, s1, s2, slast;
  // verify / suite / audit
  std::string id;
  std::string ids = "all";
  std::string variant = "as_stated";
  long i_s = 0, i_sprime = 0, i_r = 0, i_rprime = 0, i_t = 0, i_tprime = 0, i_s1 = 0, i_s2 = 0;
  std::string u, v;
  std::vector<std::string> params;
  std::vector<std::string> ranges;
  long s_min = 3, s_max = 9;
  // limits
  std::string order = "s2_first";
  int steps = 8;
  // sweep
  std::vector<std::string> grid;
};

struct QArg {
  std::string text;
  QBase base;
};

struct FunctionSpec {
  const char* name;
  SeriesKind kind;
  int arity;  // -1 for mt
};

constexpr FunctionSpec kFunctions[] = {
    {"zeta", SeriesKind::single, 1},          {"zeta2", SeriesKind::double_, 2},
    {"zeta2star", SeriesKind::double_star, 2}, {"circ", SeriesKind::circ, 2},
    {"circstar", SeriesKind::circ_star, 2},    {"mt", SeriesKind::mordell_tornheim, -1},
};

const FunctionSpec& function_spec(const std::string& name) {
  for (const FunctionSpec& f : kFunctions) {
    if (name == f.name) return f;
  }
  throw ConfigError("unknown function '" + name + "' (expected zeta, zeta2, zeta2star, circ, circstar, mt)");
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

long parse_long(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw ConfigError(what + ": not an integer: '" + text + "'");
  return v;
}

std::pair<std::string, std::string> split_binding(const std::string& text, const std::string& what) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(what + " expects name=value, got '" + text + "'");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

QArg parse_q(const std::string& text, const PrecisionCtx& ctx) {
  try {
    return {text, QBase::from_decimal(text, ctx.work_bits())};
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("--q: ") + e.what());
  }
}

CVal parse_s(const std::string& text, const PrecisionCtx& ctx, const std::string& what) {
  try {
    return CVal::from_text(text, ctx.work_bits());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

std::string ld_text(long double x) {
  if (std::isinf(static_cast<double>(x))) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.21Lg", x);
  return buf;
}

std::string value_text(const CVal& v, int digits) {
  std::string out = v.re.to_string(digits);
  if (!v.im.is_zero()) out += "," + v.im.to_string(digits);
  return out;
}

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// Report assembly

struct Report {
  Json invocation;
  std::vector<Json> records;
  Json extra = Json::object();
};

Json summary(const std::vector<Json>& records) {
  long pass = 0, fail = 0, inconclusive = 0;
  for (const Json& r : records) {
    if (!r.contains("verdict")) continue;
    const std::string v = r["verdict"];
    if (v == "pass") ++pass;
    if (v == "fail") ++fail;
    if (v == "inconclusive") ++inconclusive;
  }
  return Json{{"records", records.size()}, {"pass", pass}, {"fail", fail}, {"inconclusive", inconclusive}};
}

std::string flat(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_object()) {
    std::string out;
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (!out.empty()) out += ";";
      out += it.key() + "=" + flat(it.value());
    }
    return out;
  }
  if (v.is_null()) return "";
  return v.dump();
}

std::string csv_cell(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string render(const Report& rep, const std::string& format) {
  std::ostringstream os;
  const Json sum = summary(rep.records);
  if (format == "json") {
    Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["invocation"] = rep.invocation;
    doc["records"] = rep.records;
    for (auto it = rep.extra.begin(); it != rep.extra.end(); ++it) doc[it.key()] = it.value();
    doc["summary"] = sum;
    os << doc.dump(2) << "\n";
  } else if (format == "csv") {
    std::vector<std::string> cols;
    for (const Json& r : rep.records) {
      for (auto it = r.begin(); it != r.end(); ++it) {
        if (it.value().is_array()) continue;
        if (std::find(cols.begin(), cols.end(), it.key()) == cols.end()) cols.push_back(it.key());
      }
    }
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << csv_cell(cols[i]);
    os << "\n";
    for (const Json& r : rep.records) {
      for (std::size_t i = 0; i < cols.size(); ++i) {
        os << (i ? "," : "");
        if (r.contains(cols[i])) os << csv_cell(flat(r[cols[i]]));
      }
      os << "\n";
    }
  } else {
    for (const Json& r : rep.records) {
      bool first = true;
      for (auto it = r.begin(); it != r.end(); ++it) {
        if (it.value().is_array()) continue;
        os << (first ? "" : " ") << it.key() << "=" << flat(it.value());
        first = false;
      }
      os << "\n";
    }
    os << "summary: records=" << sum["records"] << " pass=" << sum["pass"] << " fail=" << sum["fail"]
       << " inconclusive=" << sum["inconclusive"] << "\n";
  }
  return os.str();
}

void emit(const std::string& text, const Options& opt, std::ostream& out) {
  if (opt.output.empty()) {
    out << text;
    return;
  }
  const std::filesystem::path target(opt.output);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write '" + tmp.string() + "'");
    f << text;
    f.flush();
    if (!f) {
      std::filesystem::remove(tmp);
      throw ConfigError("write to '" + tmp.string() + "' failed");
    }
  }
  std::filesystem::rename(tmp, target);
}

// ---------------------------------------------------------------------------
// eval and sweep

ValueWithError evaluate_function(const FunctionSpec& f, const std::vector<CVal>& args, const QBase& base,
                                 const PrecisionCtx& ctx, const std::string& method) {
  try {
    if (method == "expansion") {
      switch (f.kind) {
        case SeriesKind::single: return zeta_q_expansion_single(args[0], base, ctx);
        case SeriesKind::double_: return zeta2_q_expansion(args[0], args[1], base, ctx);
        case SeriesKind::circ: return circ_expansion(args[0], args[1], base, ctx);
        default: throw ConfigError(std::string("--method expansion is not available for ") + f.name);
      }
    }
    return evaluate(f.kind, args, base, ctx);
  } catch (const DomainError& e) {
    return ValueWithError::failure(Status::domain_error, e.what(), ctx.mantissa_bits());
  }
}

std::vector<std::string> arg_names(const FunctionSpec& f, std::size_t n) {
  if (f.arity == 1) return {"s"};
  if (f.arity == 2) return {"s1", "s2"};
  std::vector<std::string> out;
  for (std::size_t i = 1; i < n; ++i) out.push_back("s" + std::to_string(i));
  out.push_back("slast");
  return out;
}

Json eval_record(const FunctionSpec& f, const std::string& method, const std::vector<std::string>& names,
                 const std::vector<std::string>& texts, const QArg& q, const PrecisionCtx& ctx,
                 const ValueWithError& v, double ms, bool flat_params) {
  const int digits = report_digits(ctx.mantissa_bits());
  Json r;
  r["function"] = f.name;
  r["method"] = method;
  if (flat_params) {
    for (std::size_t i = 0; i < names.size(); ++i) r[names[i]] = texts[i];
  } else {
    Json p = Json::object();
    for (std::size_t i = 0; i < names.size(); ++i) p[names[i]] = texts[i];
    r["params"] = p;
  }
  r["q"] = q.text;
  r["precision_bits"] = ctx.mantissa_bits();
  r["digits"] = digits;
  r["status"] = std::string(to_string(v.status));
  r["value"] = v.ok() ? value_text(v.value, digits) : "";
  r["abs_error_bound"] = v.ok() ? ld_text(v.abs_error_bound) : "";
  r["terms_used"] = v.terms_used;
  r["elapsed_ms"] = ms;
  if (!v.note.empty()) r["note"] = v.note;
  return r;
}

int cmd_eval(const Options& opt, const PrecisionCtx& ctx, Report& rep) {
  const FunctionSpec& f = function_spec(opt.function);
  const QArg q = parse_q(opt.q, ctx);
  std::vector<std::string> texts;
  if (f.arity == 1) {
    if (opt.s.empty()) throw ConfigError("eval zeta needs --s");
    texts = {opt.s};
  } else if (f.arity == 2) {
    if (!opt.s1.empty() || !opt.s2.empty()) {
      if (opt.s1.empty() || opt.s2.empty()) throw ConfigError(std::string("eval ") + f.name + " needs --s1 and --s2");
      texts = {opt.s1, opt.s2};
    } else {
      texts = split(opt.s, ',');
      if (texts.size() != 2) throw ConfigError(std::string("eval ") + f.name + " needs --s s1,s2 or --s1/--s2");
    }
  } else {
    texts = split(opt.s, ',');
    if (opt.s.empty() || opt.slast.empty()) throw ConfigError("eval mt needs --s s1,...,sr and --slast");
    texts.push_back(opt.slast);
  }
  std::vector<CVal> args;
  for (const std::string& t : texts) args.push_back(parse_s(t, ctx, "--s"));
  if (opt.method != "series" && opt.method != "expansion") throw ConfigError("--method must be series or expansion");
  const auto start = Clock::now();
  const ValueWithError v = evaluate_function(f, args, q.base, ctx, opt.method);
  rep.records.push_back(
      eval_record(f, opt.method, arg_names(f, texts.size()), texts, q, ctx, v, elapsed_ms(start), false));
  return v.ok() ? kOk : kError;
}

struct Coordinate {
  std::string name;
  std::vector<std::string> values;
};

std::vector<std::string> expand_values(const std::string& name, const std::string& spec) {
  if (const auto dots = spec.find(".."); dots != std::string::npos) {
    const long lo = parse_long(spec.substr(0, dots), "--grid " + name);
    const long hi = parse_long(spec.substr(dots + 2), "--grid " + name);
    if (hi < lo) throw ConfigError("--grid " + name + ": empty range");
    if (hi - lo >= static_cast<long>(kMaxSweepPoints)) throw ConfigError("--grid " + name + ": range too long");
    std::vector<std::string> out;
    for (long v = lo; v <= hi; ++v) out.push_back(std::to_string(v));
    return out;
  }
  std::vector<std::string> out = split(spec, ',');
  for (const std::string& v : out) {
    if (v.empty()) throw ConfigError("--grid " + name + ": empty value");
  }
  return out;
}

int cmd_sweep(const Options& opt, const PrecisionCtx& ctx, Report& rep) {
  const FunctionSpec& f = function_spec(opt.function);
  if (opt.method != "series" && opt.method != "expansion") throw ConfigError("--method must be series or expansion");
  std::map<std::string, std::vector<std::string>> given;
  for (const std::string& g : opt.grid) {
    auto [name, spec] = split_binding(g, "--grid");
    given[name] = expand_values(name, spec);
  }
  if (!given.count("q")) given["q"] = split(opt.q, ',');

  std::vector<std::string> names;
  if (f.arity == -1) {
    for (long i = 1; given.count("s" + std::to_string(i)); ++i) names.push_back("s" + std::to_string(i));
    if (names.empty()) throw ConfigError("sweep mt needs --grid s1=... (and s2, ...) plus --grid slast=...");
    names.push_back("slast");
  } else {
    names = arg_names(f, static_cast<std::size_t>(f.arity));
  }
  names.push_back("q");
  for (const auto& [name, values] : given) {
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      throw ConfigError("sweep " + std::string(f.name) + ": unknown grid coordinate '" + name + "'");
    }
  }
  std::vector<Coordinate> coords;
  long double points = 1.0L;
  for (const std::string& n : names) {
    auto it = given.find(n);
    if (it == given.end()) throw ConfigError("sweep " + std::string(f.name) + " needs --grid " + n + "=...");
    points *= static_cast<long double>(it->second.size());
    coords.push_back({n, it->second});
  }
  if (points > static_cast<long double>(kMaxSweepPoints)) {
    throw ConfigError("sweep grid has " + ld_text(points) + " points; the limit is " +
                      std::to_string(kMaxSweepPoints));
  }
  // parse and order each coordinate numerically
  std::vector<std::vector<std::pair<std::string, CVal>>> parsed(coords.size());
  std::vector<std::vector<QArg>> qs;
  for (std::size_t c = 0; c < coords.size(); ++c) {
    for (const std::string& t : coords[c].values) {
      if (coords[c].name == "q") parse_q(t, ctx);
      parsed[c].emplace_back(t, parse_s(t, ctx, "--grid " + coords[c].name));
    }
    std::stable_sort(parsed[c].begin(), parsed[c].end(), [](const auto& a, const auto& b) {
      if (a.second.re != b.second.re) return a.second.re < b.second.re;
      return a.second.im < b.second.im;
    });
  }
  const std::size_t nq = coords.size() - 1;
  std::vector<QArg> q_values;
  for (const auto& [t, v] : parsed[nq]) q_values.push_back(parse_q(t, ctx));

  int code = kOk;
  std::vector<std::size_t> idx(coords.size(), 0);
  while (true) {
    std::vector<std::string> texts;
    std::vector<CVal> args;
    for (std::size_t c = 0; c < nq; ++c) {
      texts.push_back(parsed[c][idx[c]].first);
      args.push_back(parsed[c][idx[c]].second);
    }
    const QArg& q = q_values[idx[nq]];
    const auto start = Clock::now();
    const ValueWithError v = evaluate_function(f, args, q.base, ctx, opt.method);
    std::vector<std::string> argn(names.begin(), names.end() - 1);
    rep.records.push_back(eval_record(f, opt.method, argn, texts, q, ctx, v, elapsed_ms(start), true));
    if (!v.ok()) code = kError;
    std::size_t c = coords.size();
    while (c > 0) {
      --c;
      if (++idx[c] < parsed[c].size()) break;
      idx[c] = 0;
      if (c == 0) return code;
    }
  }
}

// ---------------------------------------------------------------------------
// verify, suite, audit

void apply_tolerance(VerificationReport& r, const std::optional<long double>& tol) {
  if (!tol || r.forms.empty() || r.evaluation_error) return;
  Verdict worst = Verdict::pass;
  auto rank = [](Verdict v) { return v == Verdict::pass ? 0 : (v == Verdict::inconclusive ? 1 : 2); };
  for (SubForm& f : r.forms) {
    f.tolerance = *tol;
    f.verdict = classify(f.residual, *tol);
    if (rank(f.verdict) > rank(worst)) worst = f.verdict;
  }
  r.tolerance = *tol;
  r.verdict = worst;
}

Json report_record(const VerificationReport& r, const std::string& q_text) {
  const Bits bits = r.instance.ctx.mantissa_bits();
  const int digits = report_digits(bits);
  Json rec;
  rec["identity_id"] = std::string(to_string(r.instance.id));
  Json p = Json::object();
  for (const auto& [k, v] : r.instance.int_params) p[k] = std::to_string(v);
  for (const auto& [k, v] : r.instance.real_params) p[k] = v.get_str();
  rec["params"] = p;
  rec["q"] = q_text;
  rec["precision_bits"] = bits;
  rec["digits"] = digits;
  rec["variant"] = std::string(to_string(r.instance.variant));
  rec["lhs"] = r.lhs.ok() && !r.forms.empty() ? value_text(r.lhs.value, digits) : "";
  rec["rhs"] = r.rhs.ok() && !r.forms.empty() ? value_text(r.rhs.value, digits) : "";
  rec["abs_error_bound"] = ld_text(r.lhs.abs_error_bound + r.rhs.abs_error_bound);
  rec["residual"] = ld_text(r.residual);
  rec["tolerance"] = ld_text(r.tolerance);
  rec["verdict"] = std::string(to_string(r.verdict));
  rec["terms_used"] = r.lhs.terms_used + r.rhs.terms_used;
  rec["elapsed_ms"] = r.elapsed.count() * 1000.0;
  if (!r.reason.empty()) rec["reason"] = r.reason;
  Json forms = Json::array();
  for (const SubForm& f : r.forms) {
    forms.push_back(Json{{"label", f.label},
                         {"rhs", f.rhs.ok() ? value_text(f.rhs.value, digits) : ""},
                         {"residual", ld_text(f.residual)},
                         {"tolerance", ld_text(f.tolerance)},
                         {"verdict", std::string(to_string(f.verdict))}});
  }
  rec["forms"] = forms;
  return rec;
}

int verdict_code(const std::vector<VerificationReport>& reports) {
  bool fail = false, error = false;
  for (const VerificationReport& r : reports) {
    fail = fail || r.verdict == Verdict::fail;
    error = error || r.evaluation_error;
  }
  return fail ? kFailVerdict : (error ? kError : kOk);
}

std::optional<long double> parse_tol(const Options& opt) {
  if (opt.tol.empty()) return std::nullopt;
  char* end = nullptr;
  const long double t = std::strtold(opt.tol.c_str(), &end);
  if (end == opt.tol.c_str() || *end != '\0' || !(t > 0)) throw ConfigError("--tol must be a positive number");
  return t;
}

Variant variant_of(const Options& opt) {
  try {
    return parse_variant(opt.variant);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

IdentityId identity_of(const std::string& tag) {
  try {
    return parse_identity(tag);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

int cmd_verify(const Options& opt, const PrecisionCtx& ctx, const std::map<std::string, CLI::Option*>& seen,
               Report& rep) {
  if (opt.id.empty()) throw ConfigError("verify needs --id");
  IdentityInstance in;
  in.id = identity_of(opt.id);
  in.variant = variant_of(opt);
  const auto tol = parse_tol(opt);
  const QArg q = parse_q(opt.q, ctx);
  in.base = q.base;
  in.ctx = ctx;
  const std::pair<const char*, long> ints[] = {{"s", opt.i_s},     {"sprime", opt.i_sprime}, {"r", opt.i_r},
                                               {"rprime", opt.i_rprime}, {"t", opt.i_t},  {"tprime", opt.i_tprime},
                                               {"s1", opt.i_s1},   {"s2", opt.i_s2}};
  const std::map<std::string, std::string> internal{{"sprime", "sp"}, {"rprime", "rp"}, {"t", "r"}, {"tprime", "rp"}};
  for (const auto& [flag, value] : ints) {
    if (seen.at(flag)->count() == 0) continue;
    const auto it = internal.find(flag);
    in.int_params[it == internal.end() ? flag : it->second] = value;
  }
  for (const std::string& b : opt.params) {
    auto [k, v] = split_binding(b, "--param");
    if (k == "u" || k == "v") {
      in.real_params[k] = parse_rational(v);
    } else {
      in.int_params[k] = parse_long(v, "--param " + k);
    }
  }
  try {
    if (!opt.u.empty()) in.real_params["u"] = parse_rational(opt.u);
    if (!opt.v.empty()) in.real_params["v"] = parse_rational(opt.v);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  VerificationReport r;
  try {
    r = verify(in);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  apply_tolerance(r, tol);
  rep.records.push_back(report_record(r, q.text));
  return verdict_code({r});
}

std::pair<long, long> parse_range(const std::string& spec, const std::string& name) {
  std::string lo = spec, hi = spec;
  if (const auto p = spec.find(".."); p != std::string::npos) {
    lo = spec.substr(0, p);
    hi = spec.substr(p + 2);
  } else if (const auto c = spec.find(':'); c != std::string::npos) {
    lo = spec.substr(0, c);
    hi = spec.substr(c + 1);
  }
  const long a = parse_long(lo, "--range " + name), b = parse_long(hi, "--range " + name);
  if (b < a) throw ConfigError("--range " + name + ": empty range");
  return {a, b};
}

int cmd_suite(const Options& opt, const PrecisionCtx& ctx, Report& rep) {
  std::vector<IdentityId> ids;
  if (opt.ids == "all") {
    for (const CatalogEntry& e : catalog()) ids.push_back(e.id);
  } else {
    for (const std::string& t : split(opt.ids, ',')) ids.push_back(identity_of(t));
  }
  if (ids.empty()) throw ConfigError("--ids is empty");
  const Variant variant = variant_of(opt);
  for (IdentityId id : ids) {
    const auto& vs = catalog_entry(id).variants;
    if (std::find(vs.begin(), vs.end(), variant) == vs.end()) {
      throw ConfigError(std::string(to_string(id)) + " has no variant " + opt.variant);
    }
  }
  const auto tol = parse_tol(opt);
  std::vector<QArg> qs;
  std::vector<QBase> grid;
  for (const std::string& t : split(opt.q, ',')) {
    qs.push_back(parse_q(t, ctx));
    grid.push_back(qs.back().base);
  }
  SuiteRanges ranges;
  for (const std::string& b : opt.ranges) {
    auto [k, v] = split_binding(b, "--range");
    ranges.int_ranges[k] = parse_range(v, k);
  }
  std::vector<VerificationReport> reports = verify_suite(ids, grid, ranges, ctx, variant);
  for (VerificationReport& r : reports) {
    apply_tolerance(r, tol);
    std::string text;
    for (const QArg& q : qs) {
      if (q.base.q() == r.instance.base.q()) text = q.text;
    }
    rep.records.push_back(report_record(r, text));
  }
  return verdict_code(reports);
}

int cmd_audit(const Options& opt, const PrecisionCtx& ctx, Report& rep) {
  if (opt.s_min < 3 || opt.s_max < opt.s_min) throw ConfigError("audit needs 3 <= --s-min <= --s-max");
  if (opt.s_max > 40) throw ConfigError("audit supports --s-max <= 40");
  const QArg q = parse_q(opt.q, ctx);
  const auto tol = parse_tol(opt);
  const ParityAudit audit = audit_parity(opt.s_min, opt.s_max, q.base, ctx);
  std::vector<VerificationReport> all;
  for (const ParityCell& cell : audit.cells) {
    for (const VerificationReport* r : {&cell.as_stated, &cell.derived, &cell.corrected}) {
      VerificationReport copy = *r;
      apply_tolerance(copy, tol);
      Json rec = report_record(copy, q.text);
      if (r == &cell.as_stated) {
        if (cell.variant_gap) {
          rec["variant_gap"] = ld_text(*cell.variant_gap);
          rec["variant_gap_error"] = ld_text(*cell.variant_gap_error);
          const bool t3 = cell.id == IdentityId::t3_odd || cell.id == IdentityId::t3_even;
          if (t3) rec["variant_gap_matches"] = cell.variant_gap_matches;
        }
        if (cell.preregistered_expected) {
          rec["preregistered_expected"] = ld_text(*cell.preregistered_expected);
          rec["preregistered_matches"] = cell.preregistered_matches;
        }
      }
      rep.records.push_back(std::move(rec));
      all.push_back(std::move(copy));
    }
  }
  Json counts = Json::array();
  for (const ParityCount& c : audit.counts) {
    counts.push_back(Json{{"s", c.s}, {"enumerated", c.enumerated}, {"claimed", c.claimed},
                          {"matches", c.enumerated == c.claimed}});
  }
  rep.extra["parity_counts"] = counts;
  return verdict_code(all);
}

// ---------------------------------------------------------------------------
// limits

int cmd_limits(const Options& opt, const PrecisionCtx& ctx, Report& rep) {
  LimitOrder order;
  try {
    order = parse_limit_order(opt.order);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (opt.steps < 1 || opt.steps > 60) throw ConfigError("--steps must be in 1..60");
  const auto start = Clock::now();
  const LimitResult res = limit_q_to_1(order, opt.steps, ctx);
  const int digits = report_digits(ctx.mantissa_bits());
  for (const LimitRow& row : res.rows) {
    rep.records.push_back(Json{{"row", "step"},
                               {"order", std::string(to_string(order))},
                               {"k", row.k},
                               {"q", row.q.to_string(digits)},
                               {"precision_bits", ctx.mantissa_bits()},
                               {"digits", digits},
                               {"value", row.value.to_string(digits)},
                               {"extrapolated", row.extrapolated.to_string(digits)}});
  }
  rep.records.push_back(Json{{"row", "limit"},
                             {"order", std::string(to_string(order))},
                             {"k", nullptr},
                             {"q", "1"},
                             {"precision_bits", ctx.mantissa_bits()},
                             {"digits", digits},
                             {"value", res.limit.to_string(digits)},
                             {"extrapolated", res.limit.to_string(digits)},
                             {"error_estimate", ld_text(res.error_estimate)},
                             {"bits_used", res.bits_used},
                             {"elapsed_ms", elapsed_ms(start)}});
  return kOk;
}

// ---------------------------------------------------------------------------
// Argument plumbing

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  for (const std::string& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

// Turn a JSON RunConfig into flags; explicit flags in `args` win.
std::vector<std::string> merge_config(const std::vector<std::string>& args, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config '" + path + "'");
  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  if (!cfg.is_object()) throw ConfigError("config '" + path + "' must be a JSON object");

  std::vector<std::string> user = args;
  auto strip_config = [](std::vector<std::string>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] == "--config" && i + 1 < v.size()) {
        v.erase(v.begin() + static_cast<long>(i), v.begin() + static_cast<long>(i) + 2);
        return;
      }
      if (v[i].rfind("--config=", 0) == 0) {
        v.erase(v.begin() + static_cast<long>(i));
        return;
      }
    }
  };
  strip_config(user);

  std::vector<std::string> head;
  std::size_t rest = 0;
  if (!user.empty() && user[0].rfind("-", 0) != 0) {
    head.push_back(user[0]);
    rest = 1;
  } else if (cfg.contains("command")) {
    head.push_back(cfg["command"].get<std::string>());
  }
  if (rest < user.size() && user[rest].rfind("-", 0) != 0) {
    head.push_back(user[rest++]);
  } else if (cfg.contains("function")) {
    head.push_back(cfg["function"].get<std::string>());
  }

  auto scalar = [](const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return std::string(v.get<bool>() ? "true" : "false");
    return v.dump();
  };
  std::vector<std::string> from_cfg;
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    std::string key = it.key();
    if (key == "command" || key == "function") continue;
    if (key == "precision_bits") key = "prec_bits";
    if (key == "tolerance") key = "tol";
    if (key == "params" && it.value().is_object()) {
      if (has_flag(user, "--param")) continue;
      for (auto p = it.value().begin(); p != it.value().end(); ++p) {
        from_cfg.push_back("--param");
        from_cfg.push_back(p.key() + "=" + scalar(p.value()));
      }
      continue;
    }
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string flag = "--" + key;
    if (has_flag(user, flag)) continue;
    if (it.value().is_array()) {
      if (key == "grid" || key == "range" || key == "param") {
        for (const auto& v : it.value()) {
          from_cfg.push_back(flag);
          from_cfg.push_back(scalar(v));
        }
      } else {
        std::string joined;
        for (const auto& v : it.value()) joined += (joined.empty() ? "" : ",") + scalar(v);
        from_cfg.push_back(flag);
        from_cfg.push_back(joined);
      }
    } else {
      from_cfg.push_back(flag);
      from_cfg.push_back(scalar(it.value()));
    }
  }
  std::vector<std::string> out = head;
  out.insert(out.end(), from_cfg.begin(), from_cfg.end());
  out.insert(out.end(), user.begin() + static_cast<long>(rest), user.end());
  return out;
}

std::optional<std::string> config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

Bits default_precision() {
  const char* env = std::getenv(kPrecisionEnv);
  if (!env || !*env) return 128;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < static_cast<long>(PrecisionCtx::kMinMantissa) ||
      v > static_cast<long>(PrecisionCtx::kMaxMantissa)) {
    throw ConfigError(std::string(kPrecisionEnv) + " must be an integer in [64, 8192]");
  }
  return static_cast<Bits>(v);
}

}  // namespace

int report_digits(Bits precision_bits) {
  return static_cast<int>(std::ceil(static_cast<double>(precision_bits) * 0.301)) - 5;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  Options opt;
  std::vector<std::string> args = raw_args;
  try {
    if (auto path = config_path(args)) args = merge_config(args, *path);
    opt.prec_bits = default_precision();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }

  CLI::App app{"Evaluate q>1 zeta values and verify identities among them."};
  app.name("qzeta");
  app.require_subcommand(1);
  const std::vector<std::string> formats{"json", "csv", "plain"};

  auto common = [&](CLI::App* sub) {
    sub->add_option("--prec-bits", opt.prec_bits, "mantissa precision in bits (>= 64)")
        ->check(CLI::Range(static_cast<Bits>(PrecisionCtx::kMinMantissa), PrecisionCtx::kMaxMantissa));
    sub->add_option("--format", opt.format, "json, csv or plain")->check(CLI::IsMember(formats));
    sub->add_option("--output,-o", opt.output, "write the report here (atomically)");
    sub->add_option("--config", opt.config, "JSON file with default settings");
    sub->add_option("--tol", opt.tol, "override the tolerance used for verdicts");
  };

  CLI::App* eval = app.add_subcommand("eval", "evaluate one function value");
  eval->add_option("function", opt.function, "zeta, zeta2, zeta2star, circ, circstar or mt")->required();
  eval->add_option("--q", opt.q, "q > 1 as decimal text");
  eval->add_option("--s", opt.s, "argument(s): 're' or 're,im' for zeta; 's1,s2' or 's1,...,sr' otherwise");
  eval->add_option("--s1", opt.s1, "first argument, 're' or 're,im'");
  eval->add_option("--s2", opt.s2, "second argument, 're' or 're,im'");
  eval->add_option("--slast", opt.slast, "last argument of mt");
  eval->add_option("--method", opt.method, "series or expansion")
      ->check(CLI::IsMember(std::vector<std::string>{"series", "expansion"}));
  common(eval);

  CLI::App* ver = app.add_subcommand("verify", "verify one identity instance");
  ver->add_option("--id", opt.id, "identity tag")->required();
  ver->add_option("--q", opt.q, "q > 1 as decimal text");
  std::map<std::string, CLI::Option*> seen;
  seen["s"] = ver->add_option("--s", opt.i_s);
  seen["sprime"] = ver->add_option("--sprime", opt.i_sprime);
  seen["r"] = ver->add_option("--r", opt.i_r);
  seen["rprime"] = ver->add_option("--rprime", opt.i_rprime);
  seen["t"] = ver->add_option("--t", opt.i_t);
  seen["tprime"] = ver->add_option("--tprime", opt.i_tprime);
  seen["s1"] = ver->add_option("--s1", opt.i_s1);
  seen["s2"] = ver->add_option("--s2", opt.i_s2);
  ver->add_option("--u", opt.u, "rational u for the partial-fraction identities");
  ver->add_option("--v", opt.v, "rational v for the partial-fraction identities");
  ver->add_option("--param", opt.params, "extra binding name=value");
  ver->add_option("--variant", opt.variant, "as_stated, derived_consistent or corrected");
  common(ver);

  CLI::App* suite = app.add_subcommand("suite", "verify identities over parameter ranges and a q grid");
  suite->add_option("--ids", opt.ids, "comma-separated identity tags or 'all'");
  suite->add_option("--q", opt.q, "comma-separated q values");
  suite->add_option("--range", opt.ranges, "override a parameter range, name=lo:hi");
  suite->add_option("--variant", opt.variant, "as_stated, derived_consistent or corrected");
  common(suite);

  CLI::App* audit = app.add_subcommand("audit", "parity audit of the circ and circ-star formulas");
  audit->add_option("--s-min", opt.s_min, "smallest weight (>= 3)");
  audit->add_option("--s-max", opt.s_max, "largest weight");
  audit->add_option("--q", opt.q, "q > 1 as decimal text");
  common(audit);

  CLI::App* limits = app.add_subcommand("limits", "q -> 1 limits of the iterated limits at (0, 0)");
  limits->add_option("--order", opt.order, "s2_first or s1_first");
  limits->add_option("--steps", opt.steps, "extrapolation steps (>= 1)");
  common(limits);

  CLI::App* sweep = app.add_subcommand("sweep", "evaluate a function over a grid");
  sweep->add_option("function", opt.function, "zeta, zeta2, zeta2star, circ, circstar or mt")->required();
  sweep->add_option("--grid", opt.grid, "coordinate values, name=v1,v2,... or name=lo..hi");
  sweep->add_option("--q", opt.q, "comma-separated q values (unless --grid q=...)");
  sweep->add_option("--method", opt.method, "series or expansion")
      ->check(CLI::IsMember(std::vector<std::string>{"series", "expansion"}));
  common(sweep);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kError;
  }

  CLI::App* chosen = app.get_subcommands().front();
  opt.command = chosen->get_name();
  if (opt.format.empty()) opt.format = opt.command == "sweep" ? "csv" : "json";

  Report rep;
  rep.invocation = Json{{"command", opt.command}, {"args", raw_args}};
  int code = kOk;
  try {
    const PrecisionCtx ctx(opt.prec_bits);
    if (opt.command == "eval") code = cmd_eval(opt, ctx, rep);
    if (opt.command == "verify") code = cmd_verify(opt, ctx, seen, rep);
    if (opt.command == "suite") code = cmd_suite(opt, ctx, rep);
    if (opt.command == "audit") code = cmd_audit(opt, ctx, rep);
    if (opt.command == "limits") code = cmd_limits(opt, ctx, rep);
    if (opt.command == "sweep") code = cmd_sweep(opt, ctx, rep);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
    return kError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }
  try {
    emit(render(rep, opt.format), opt, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }
  return code;
}

}  // namespace qzeta::cli
