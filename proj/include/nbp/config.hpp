#pragma once

#include <map>
#include <string>

#include "nbp/bench.hpp"
#include "nbp/learner/train.hpp"

namespace nbp {

/// Flat key=value config with '#' comments and `include <path>` lines
/// (relative to the including file). Later keys override earlier ones.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap load_config(const std::string& path);

std::string cfg_str(const ConfigMap& m, const std::string& key, const std::string& fallback);
int cfg_int(const ConfigMap& m, const std::string& key, int fallback);
double cfg_double(const ConfigMap& m, const std::string& key, double fallback);
uint64_t cfg_u64(const ConfigMap& m, const std::string& key, uint64_t fallback);

BenchConfig bench_config_from(const ConfigMap& m);
TrainConfig train_config_from(const ConfigMap& m);

}  // namespace nbp
