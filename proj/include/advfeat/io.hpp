#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "advfeat/dataset.hpp"
#include "advfeat/net.hpp"

namespace advfeat {

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Adversarial dataset file payload: X holds the perturbed samples, y the
// base labels; the targets and provenance id ride behind them.
struct AdvFileContent {
  Dataset data;
  Eigen::VectorXd targets;
  std::uint64_t provenance = 0;
  std::vector<std::vector<Eigen::Index>> support;  // empty unless L0
};

void write_dataset(const Dataset& ds, const std::string& path);
Dataset read_dataset(const std::string& path);

void write_adv_file(const AdvFileContent& content, const std::string& path);
AdvFileContent read_adv_file(const std::string& path);

// kind byte of an AFPD file without loading the payload.
std::uint8_t peek_kind(const std::string& path);

void write_csv(const Dataset& ds, const std::string& path);

void write_params(const NetworkParams& p, const NetworkConfig& cfg,
                  const std::string& path);
std::pair<NetworkParams, NetworkConfig> read_params(const std::string& path);

}  // namespace advfeat
