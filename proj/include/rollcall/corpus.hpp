#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "rollcall/errors.hpp"

namespace rollcall {

enum class Party { Democrat, Republican, Other };
enum class Chamber { House, Senate };

std::string party_code(Party p);
Party parse_party(const std::string& s);
std::string chamber_code(Chamber c);
Chamber parse_chamber(const std::string& s);

struct Lawmaker {
  std::string id;
  std::string name;
  Party party = Party::Other;
  Chamber chamber = Chamber::House;
  bool operator==(const Lawmaker&) const = default;
};

struct BillDoc {
  std::string id;
  std::string title;
  std::vector<std::string> tokens;
  std::vector<std::string> labels;  // set semantics, stored sorted unique
  bool operator==(const BillDoc&) const = default;
};

struct VoteRecord {
  std::string lawmaker_id;
  std::string bill_id;
  bool yea = false;
  bool operator==(const VoteRecord&) const = default;
};

struct RollCallDataset {
  std::vector<Lawmaker> lawmakers;
  std::vector<BillDoc> bills;
  std::vector<VoteRecord> votes;

  // ingestion bookkeeping, not persisted
  size_t dropped_votes = 0;        // non-binary vote codes
  size_t dropped_lawmakers = 0;    // zero observed votes
  size_t dropped_bills = 0;

  std::unordered_map<std::string, int> lawmaker_index() const;
  std::unordered_map<std::string, int> bill_index() const;
};

std::vector<Lawmaker> load_lawmakers(const std::string& path);
std::vector<BillDoc> load_bills(const std::string& path);
std::vector<VoteRecord> load_votes(const std::string& path, size_t* dropped = nullptr);

void save_lawmakers(const std::vector<Lawmaker>& lm, const std::string& path);
void save_bills(const std::vector<BillDoc>& bills, const std::string& path);
void save_votes(const std::vector<VoteRecord>& votes, const std::string& path);

// Cross-validates ids, drops zero-vote entities, keeps file order.
RollCallDataset assemble_dataset(std::vector<Lawmaker> lawmakers, std::vector<BillDoc> bills,
                                 std::vector<VoteRecord> votes);

RollCallDataset load_dataset(const std::string& lawmakers_path, const std::string& bills_path,
                             const std::string& votes_path);

struct FoldAssignment {
  int n_folds = 0;
  uint64_t seed = 0;
  std::vector<int> fold_of_vote;  // parallel to dataset.votes

  int fold(size_t vote_idx) const { return fold_of_vote.at(vote_idx); }
};

// Seeded Fisher-Yates shuffle of vote positions, folds dealt round-robin.
FoldAssignment split_folds(const RollCallDataset& data, int n_folds, uint64_t seed);

void save_folds(const RollCallDataset& data, const FoldAssignment& folds,
                const std::string& path);
FoldAssignment load_folds(const RollCallDataset& data, const std::string& path);

}  // namespace rollcall
