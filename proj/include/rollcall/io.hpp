#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rollcall/inference.hpp"
#include "rollcall/model.hpp"
#include "rollcall/topics.hpp"

namespace rollcall {

// shortest round-trip decimal rendering, used by every CSV/JSON writer
std::string fmt_double(double v);

// fitted parameters with the entity ids that fix the index order
struct FittedParams {
  ModelParams params;
  std::vector<std::string> lawmaker_ids;
  std::vector<std::string> bill_ids;
  std::vector<std::string> labels;
  Hyperparams hp;
};

void save_params(const std::string& path, const FittedParams& fp);
FittedParams load_params(const std::string& path);

void save_checkpoint(const std::string& path, const FitCheckpoint& ck);
FitCheckpoint load_checkpoint(const std::string& path);

void save_topic_model(const std::string& path, const TopicModel& model);
TopicModel load_topic_model(const std::string& path);

void save_mixtures(const std::string& path, const std::vector<IssueMixture>& mixtures);
std::vector<IssueMixture> load_mixtures(const std::string& path);

void save_trace(const std::string& path, const std::vector<double>& elbo_trace);
std::vector<double> load_trace(const std::string& path);

// run manifest: config snapshot, content hashes, format version, and
// deterministic work counters in place of wall-clock timing so that
// identical-seed reruns stay byte-identical
struct Manifest {
  std::string command;
  int format = 1;
  std::map<std::string, std::string> config;
  std::map<std::string, std::string> inputs;   // path -> fnv1a64 hex
  std::map<std::string, std::string> outputs;  // filename -> fnv1a64 hex
  std::map<std::string, std::uint64_t> work;
};

std::string hash_file(const std::string& path);
void write_manifest(const std::string& path, const Manifest& m);
Manifest read_manifest(const std::string& path);
// rehashes all recorded inputs and outputs; returns the mismatching paths
std::vector<std::string> verify_manifest(const std::string& manifest_path);

}  // namespace rollcall
