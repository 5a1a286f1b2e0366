#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rollcall/corpus.hpp"

namespace testutil {

// unique scratch directory, removed on scope exit
struct TempDir {
  std::filesystem::path path;

  TempDir() {
    auto base = std::filesystem::temp_directory_path();
    std::random_device rd;
    for (int tries = 0; tries < 100; ++tries) {
      auto cand = base / ("rollcall-test-" + std::to_string(rd()));
      std::error_code ec;
      if (std::filesystem::create_directory(cand, ec)) {
        path = cand;
        return;
      }
    }
    throw std::runtime_error("cannot create temp dir");
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// complete vote grid over synthetic ids: lawmaker u<n_lm votes yea on bill d
// iff (u + d) is even, capped at n_votes pairs in row-major order
inline rollcall::RollCallDataset grid_dataset(int n_lm, int n_bills, long long n_votes = -1) {
  rollcall::RollCallDataset d;
  for (int u = 0; u < n_lm; ++u)
    d.lawmakers.push_back({"L" + std::to_string(u), "Member " + std::to_string(u),
                           u % 2 ? rollcall::Party::Republican : rollcall::Party::Democrat,
                           rollcall::Chamber::Senate});
  for (int b = 0; b < n_bills; ++b)
    d.bills.push_back({"B" + std::to_string(b), "Bill " + std::to_string(b), {}, {}});
  long long cap = n_votes < 0 ? (long long)n_lm * n_bills : n_votes;
  for (long long v = 0; v < cap; ++v) {
    int u = int(v % n_lm);
    int b = int((v / n_lm + u) % n_bills);
    d.votes.push_back({d.lawmakers[u].id, d.bills[b].id, (u + b) % 2 == 0});
  }
  return d;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  double ma = 0, mb = 0;
  size_t n = a.size();
  for (size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= double(n);
  mb /= double(n);
  double sab = 0, saa = 0, sbb = 0;
  for (size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace testutil
