#include "rollcall/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "rollcall/csv.hpp"
#include "rollcall/errors.hpp"
#include "rollcall/hash.hpp"

namespace rollcall {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  out << text;
}

json parse_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

json null_if_nan(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

double nan_if_null(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

// nlohmann serializes doubles with enough digits to round-trip, so values
// survive save/load exactly; keys are emitted in insertion order
std::string dump_ordered(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void save_params(const std::string& path, const FittedParams& fp) {
  const auto& p = fp.params;
  if (fp.lawmaker_ids.size() != p.x.size() || fp.bill_ids.size() != p.a.size())
    throw DimensionError("id lists do not match parameter vectors");
  nlohmann::ordered_json j;
  j["format"] = 1;
  j["K"] = p.K;
  j["labels"] = fp.labels;
  j["hyperparams"] = {{"lambda1", fp.hp.lambda1},
                     {"prior_var_x", fp.hp.prior_var_x},
                     {"prior_var_a", fp.hp.prior_var_a},
                     {"prior_var_b", fp.hp.prior_var_b}};
  j["lawmaker_ids"] = fp.lawmaker_ids;
  j["bill_ids"] = fp.bill_ids;
  j["x"] = p.x;
  if (p.K > 0) {
    json z = json::array();
    for (size_t u = 0; u < p.z.size(); ++u)
      for (int k = 0; k < p.K; ++k)
        if (p.z[u][k] != 0.0) z.push_back({u, k, p.z[u][k]});
    j["z"] = z;
  }
  j["a"] = p.a;
  j["b"] = p.b;
  write_file(path, dump_ordered(j));
}

FittedParams load_params(const std::string& path) {
  json j = parse_json(path);
  FittedParams fp;
  fp.params.K = j.at("K").get<int>();
  fp.labels = j.at("labels").get<std::vector<std::string>>();
  const auto& h = j.at("hyperparams");
  fp.hp.lambda1 = h.at("lambda1").get<double>();
  fp.hp.prior_var_x = h.at("prior_var_x").get<double>();
  fp.hp.prior_var_a = h.at("prior_var_a").get<double>();
  fp.hp.prior_var_b = h.at("prior_var_b").get<double>();
  fp.lawmaker_ids = j.at("lawmaker_ids").get<std::vector<std::string>>();
  fp.bill_ids = j.at("bill_ids").get<std::vector<std::string>>();
  fp.params.x = j.at("x").get<std::vector<double>>();
  fp.params.a = j.at("a").get<std::vector<double>>();
  fp.params.b = j.at("b").get<std::vector<double>>();
  fp.params.z.assign(fp.params.x.size(), std::vector<double>(fp.params.K, 0.0));
  if (fp.params.K > 0 && j.contains("z")) {
    for (const auto& t : j.at("z")) {
      size_t u = t.at(0).get<size_t>();
      int k = t.at(1).get<int>();
      if (u >= fp.params.z.size() || k < 0 || k >= fp.params.K)
        throw ParseError(path + ": adjustment index out of range");
      fp.params.z[u][k] = t.at(2).get<double>();
    }
  }
  if (fp.params.x.size() != fp.lawmaker_ids.size() || fp.params.a.size() != fp.bill_ids.size() ||
      fp.params.b.size() != fp.bill_ids.size())
    throw ParseError(path + ": parameter lengths disagree with id lists");
  return fp;
}

void save_checkpoint(const std::string& path, const FitCheckpoint& ck) {
  nlohmann::ordered_json j;
  j["format"] = 1;
  j["sweeps_done"] = ck.sweeps_done;
  j["m"] = ck.m;
  j["ema"] = null_if_nan(ck.ema);
  j["prev_elbo"] = null_if_nan(ck.prev_elbo);
  j["elbo_trace"] = ck.elbo_trace;
  j["skipped_updates"] = ck.skipped_updates;
  nlohmann::ordered_json s;
  s["K"] = ck.state.K;
  s["mean_x"] = ck.state.mean_x;
  s["mean_z"] = ck.state.mean_z;
  s["mean_a"] = ck.state.mean_a;
  s["mean_b"] = ck.state.mean_b;
  s["var_x"] = ck.state.var_x;
  s["var_z"] = ck.state.var_z;
  s["var_a"] = ck.state.var_a;
  s["var_b"] = ck.state.var_b;
  j["state"] = s;
  write_file(path, dump_ordered(j));
}

FitCheckpoint load_checkpoint(const std::string& path) {
  json j = parse_json(path);
  FitCheckpoint ck;
  ck.sweeps_done = j.at("sweeps_done").get<int>();
  ck.m = j.at("m").get<int>();
  ck.ema = nan_if_null(j.at("ema"));
  ck.prev_elbo = nan_if_null(j.at("prev_elbo"));
  ck.elbo_trace = j.at("elbo_trace").get<std::vector<double>>();
  ck.skipped_updates = j.at("skipped_updates").get<long long>();
  const auto& s = j.at("state");
  ck.state.K = s.at("K").get<int>();
  ck.state.mean_x = s.at("mean_x").get<std::vector<double>>();
  ck.state.mean_z = s.at("mean_z").get<std::vector<std::vector<double>>>();
  ck.state.mean_a = s.at("mean_a").get<std::vector<double>>();
  ck.state.mean_b = s.at("mean_b").get<std::vector<double>>();
  ck.state.var_x = s.at("var_x").get<double>();
  ck.state.var_z = s.at("var_z").get<double>();
  ck.state.var_a = s.at("var_a").get<double>();
  ck.state.var_b = s.at("var_b").get<double>();
  return ck;
}

void save_topic_model(const std::string& path, const TopicModel& model) {
  nlohmann::ordered_json j;
  j["format"] = 1;
  j["alpha"] = model.alpha;
  j["labels"] = model.labels();
  json topics = json::array();
  for (const auto& t : model.topics) {
    json tj;
    tj["label"] = t.label;
    tj["word_dist"] = t.word_dist;
    topics.push_back(tj);
  }
  j["topics"] = topics;
  write_file(path, dump_ordered(j));
}

TopicModel load_topic_model(const std::string& path) {
  json j = parse_json(path);
  TopicModel model;
  model.alpha = j.at("alpha").get<double>();
  for (const auto& tj : j.at("topics")) {
    Topic t;
    t.label = tj.at("label").get<std::string>();
    t.word_dist = tj.at("word_dist").get<std::vector<double>>();
    model.topics.push_back(std::move(t));
  }
  if (model.topics.empty()) throw EmptyModelError(path + ": no topics");
  return model;
}

void save_mixtures(const std::string& path, const std::vector<IssueMixture>& mixtures) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  out << "bill_id,issue,weight\n";
  for (const auto& m : mixtures)
    for (size_t k = 0; k < m.theta.size(); ++k)
      out << csv_escape(m.bill_id) << ',' << k << ',' << fmt_double(m.theta[k]) << '\n';
}

std::vector<IssueMixture> load_mixtures(const std::string& path) {
  CsvReader reader(path);
  reader.expect_header({"bill_id", "issue", "weight"});
  std::vector<IssueMixture> out;
  std::map<std::string, size_t> where;
  std::vector<std::string> fields;
  int K = 0;
  std::vector<std::vector<std::pair<int, double>>> cells;
  while (reader.next(fields)) {
    if (fields.size() != 3) throw ParseError(path + ": expected 3 columns");
    auto it = where.find(fields[0]);
    size_t pos;
    if (it == where.end()) {
      pos = out.size();
      where.emplace(fields[0], pos);
      out.push_back({fields[0], {}});
      cells.emplace_back();
    } else {
      pos = it->second;
    }
    int k = std::stoi(fields[1]);
    if (k < 0) throw ParseError(path + ": negative issue index");
    K = std::max(K, k + 1);
    cells[pos].emplace_back(k, std::stod(fields[2]));
  }
  for (size_t i = 0; i < out.size(); ++i) {
    out[i].theta.assign(K, 0.0);
    for (auto [k, v] : cells[i]) out[i].theta[k] = v;
  }
  return out;
}

void save_trace(const std::string& path, const std::vector<double>& elbo_trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  out << "sweep,elbo\n";
  for (size_t i = 0; i < elbo_trace.size(); ++i)
    out << (i + 1) << ',' << fmt_double(elbo_trace[i]) << '\n';
}

std::vector<double> load_trace(const std::string& path) {
  CsvReader reader(path);
  reader.expect_header({"sweep", "elbo"});
  std::vector<double> out;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != 2) throw ParseError(path + ": expected 2 columns");
    out.push_back(std::stod(fields[1]));
  }
  return out;
}

std::string hash_file(const std::string& path) {
  std::string bytes = read_file(path);
  return hex64(fnv1a64(bytes.data(), bytes.size()));
}

void write_manifest(const std::string& path, const Manifest& m) {
  nlohmann::ordered_json j;
  j["format"] = m.format;
  j["command"] = m.command;
  j["config"] = m.config;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  j["work"] = m.work;
  write_file(path, dump_ordered(j));
}

Manifest read_manifest(const std::string& path) {
  json j = parse_json(path);
  Manifest m;
  m.format = j.at("format").get<int>();
  m.command = j.at("command").get<std::string>();
  m.config = j.at("config").get<std::map<std::string, std::string>>();
  m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
  m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
  m.work = j.at("work").get<std::map<std::string, std::uint64_t>>();
  return m;
}

std::vector<std::string> verify_manifest(const std::string& manifest_path) {
  Manifest m = read_manifest(manifest_path);
  auto dir = std::filesystem::path(manifest_path).parent_path();
  std::vector<std::string> bad;
  auto check = [&](const std::string& name, const std::string& want, bool relative) {
    std::string full = relative ? (dir / name).string() : name;
    try {
      if (hash_file(full) != want) bad.push_back(full);
    } catch (const ParseError&) {
      bad.push_back(full);
    }
  };
  for (const auto& [p, h] : m.inputs) check(p, h, false);
  for (const auto& [p, h] : m.outputs) check(p, h, true);
  return bad;
}

}  // namespace rollcall
