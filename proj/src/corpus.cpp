#include "rollcall/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "rollcall/csv.hpp"
#include "rollcall/rng.hpp"

namespace rollcall {

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = char(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

std::string party_code(Party p) {
  switch (p) {
    case Party::Democrat: return "D";
    case Party::Republican: return "R";
    default: return "O";
  }
}

Party parse_party(const std::string& s) {
  if (s == "D") return Party::Democrat;
  if (s == "R") return Party::Republican;
  if (s == "O") return Party::Other;
  throw ParseError("unknown party code '" + s + "'");
}

std::string chamber_code(Chamber c) {
  return c == Chamber::House ? "house" : "senate";
}

Chamber parse_chamber(const std::string& s) {
  if (s == "house") return Chamber::House;
  if (s == "senate") return Chamber::Senate;
  throw ParseError("unknown chamber '" + s + "'");
}

std::unordered_map<std::string, int> RollCallDataset::lawmaker_index() const {
  std::unordered_map<std::string, int> m;
  for (size_t i = 0; i < lawmakers.size(); ++i) m[lawmakers[i].id] = int(i);
  return m;
}

std::unordered_map<std::string, int> RollCallDataset::bill_index() const {
  std::unordered_map<std::string, int> m;
  for (size_t i = 0; i < bills.size(); ++i) m[bills[i].id] = int(i);
  return m;
}

std::vector<Lawmaker> load_lawmakers(const std::string& path) {
  CsvReader r(path);
  r.expect_header({"id", "name", "party", "chamber"});
  std::vector<Lawmaker> out;
  std::vector<std::string> f;
  while (r.next(f)) {
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != 4)
      throw ParseError(path + ":" + std::to_string(r.lineno) + ": expected 4 fields");
    Lawmaker lm;
    lm.id = f[0];
    lm.name = f[1];
    try {
      lm.party = parse_party(f[2]);
      lm.chamber = parse_chamber(f[3]);
    } catch (const ParseError& e) {
      throw ParseError(path + ":" + std::to_string(r.lineno) + ": " + e.what());
    }
    if (lm.id.empty())
      throw ParseError(path + ":" + std::to_string(r.lineno) + ": empty id");
    out.push_back(std::move(lm));
  }
  return out;
}

std::vector<BillDoc> load_bills(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  std::vector<BillDoc> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    BillDoc b;
    try {
      b.id = j.at("id").get<std::string>();
      b.title = j.value("title", std::string());
      b.tokens = j.value("tokens", std::vector<std::string>{});
      b.labels = j.value("labels", std::vector<std::string>{});
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (b.id.empty())
      throw ParseError(path + ":" + std::to_string(lineno) + ": empty id");
    std::sort(b.labels.begin(), b.labels.end());
    b.labels.erase(std::unique(b.labels.begin(), b.labels.end()), b.labels.end());
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<VoteRecord> load_votes(const std::string& path, size_t* dropped) {
  CsvReader r(path);
  r.expect_header({"lawmaker_id", "bill_id", "vote"});
  std::vector<VoteRecord> out;
  std::vector<std::string> f;
  size_t drop = 0;
  while (r.next(f)) {
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != 3)
      throw ParseError(path + ":" + std::to_string(r.lineno) + ": expected 3 fields");
    std::string v = lower(f[2]);
    if (v == "yea") {
      out.push_back({f[0], f[1], true});
    } else if (v == "nay") {
      out.push_back({f[0], f[1], false});
    } else {
      ++drop;
    }
  }
  if (dropped) *dropped = drop;
  return out;
}

void save_lawmakers(const std::vector<Lawmaker>& lm, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << "id,name,party,chamber\n";
  for (const auto& l : lm)
    out << csv_escape(l.id) << ',' << csv_escape(l.name) << ',' << party_code(l.party)
        << ',' << chamber_code(l.chamber) << '\n';
}

void save_bills(const std::vector<BillDoc>& bills, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  for (const auto& b : bills) {
    nlohmann::json j{{"id", b.id}, {"title", b.title}, {"tokens", b.tokens},
                     {"labels", b.labels}};
    out << j.dump() << '\n';
  }
}

void save_votes(const std::vector<VoteRecord>& votes, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << "lawmaker_id,bill_id,vote\n";
  for (const auto& v : votes)
    out << csv_escape(v.lawmaker_id) << ',' << csv_escape(v.bill_id) << ','
        << (v.yea ? "yea" : "nay") << '\n';
}

RollCallDataset assemble_dataset(std::vector<Lawmaker> lawmakers, std::vector<BillDoc> bills,
                                 std::vector<VoteRecord> votes) {
  std::unordered_set<std::string> lm_ids, bill_ids;
  for (const auto& l : lawmakers)
    if (!lm_ids.insert(l.id).second)
      throw IntegrityError("duplicate lawmaker id '" + l.id + "'");
  for (const auto& b : bills)
    if (!bill_ids.insert(b.id).second)
      throw IntegrityError("duplicate bill id '" + b.id + "'");

  if (votes.empty()) throw IntegrityError("dataset has no binary votes");

  std::set<std::pair<std::string, std::string>> seen;
  std::unordered_set<std::string> voted_lm, voted_bill;
  for (const auto& v : votes) {
    if (!lm_ids.count(v.lawmaker_id))
      throw IntegrityError("vote references unknown lawmaker '" + v.lawmaker_id + "'");
    if (!bill_ids.count(v.bill_id))
      throw IntegrityError("vote references unknown bill '" + v.bill_id + "'");
    if (!seen.insert({v.lawmaker_id, v.bill_id}).second)
      throw IntegrityError("duplicate vote for lawmaker '" + v.lawmaker_id + "' on bill '" +
                           v.bill_id + "'");
    voted_lm.insert(v.lawmaker_id);
    voted_bill.insert(v.bill_id);
  }

  RollCallDataset d;
  d.dropped_lawmakers = lawmakers.size() - voted_lm.size();
  d.dropped_bills = bills.size() - voted_bill.size();
  for (auto& l : lawmakers)
    if (voted_lm.count(l.id)) d.lawmakers.push_back(std::move(l));
  for (auto& b : bills)
    if (voted_bill.count(b.id)) d.bills.push_back(std::move(b));
  d.votes = std::move(votes);
  return d;
}

RollCallDataset load_dataset(const std::string& lawmakers_path, const std::string& bills_path,
                             const std::string& votes_path) {
  size_t dropped = 0;
  auto votes = load_votes(votes_path, &dropped);
  auto d = assemble_dataset(load_lawmakers(lawmakers_path), load_bills(bills_path),
                            std::move(votes));
  d.dropped_votes = dropped;
  return d;
}

FoldAssignment split_folds(const RollCallDataset& data, int n_folds, uint64_t seed) {
  if (n_folds < 2) throw InvalidArgument("n_folds must be at least 2");
  if (size_t(n_folds) > data.votes.size())
    throw InvalidArgument("n_folds exceeds the number of votes");
  Rng rng(derive_seed(seed, {0xF01D5}));
  auto order = rng.permutation(data.votes.size());
  FoldAssignment fa;
  fa.n_folds = n_folds;
  fa.seed = seed;
  fa.fold_of_vote.assign(data.votes.size(), 0);
  for (size_t pos = 0; pos < order.size(); ++pos)
    fa.fold_of_vote[order[pos]] = int(pos % size_t(n_folds));
  return fa;
}

void save_folds(const RollCallDataset& data, const FoldAssignment& folds,
                const std::string& path) {
  if (folds.fold_of_vote.size() != data.votes.size())
    throw DimensionError("fold assignment does not match vote count");
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << "lawmaker_id,bill_id,fold\n";
  for (size_t i = 0; i < data.votes.size(); ++i)
    out << csv_escape(data.votes[i].lawmaker_id) << ',' << csv_escape(data.votes[i].bill_id)
        << ',' << folds.fold_of_vote[i] << '\n';
}

FoldAssignment load_folds(const RollCallDataset& data, const std::string& path) {
  CsvReader r(path);
  r.expect_header({"lawmaker_id", "bill_id", "fold"});
  std::map<std::pair<std::string, std::string>, int> m;
  std::vector<std::string> f;
  int max_fold = -1;
  while (r.next(f)) {
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != 3)
      throw ParseError(path + ":" + std::to_string(r.lineno) + ": expected 3 fields");
    int fold;
    try {
      fold = std::stoi(f[2]);
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(r.lineno) + ": bad fold index");
    }
    if (fold < 0) throw ParseError(path + ":" + std::to_string(r.lineno) + ": bad fold index");
    if (!m.insert({{f[0], f[1]}, fold}).second)
      throw IntegrityError("duplicate fold row for lawmaker '" + f[0] + "' on bill '" + f[1] +
                           "'");
    max_fold = std::max(max_fold, fold);
  }
  FoldAssignment fa;
  fa.n_folds = max_fold + 1;
  fa.fold_of_vote.reserve(data.votes.size());
  for (const auto& v : data.votes) {
    auto it = m.find({v.lawmaker_id, v.bill_id});
    if (it == m.end())
      throw IntegrityError("fold file missing vote by '" + v.lawmaker_id + "' on '" +
                           v.bill_id + "'");
    fa.fold_of_vote.push_back(it->second);
  }
  return fa;
}

}  // namespace rollcall
