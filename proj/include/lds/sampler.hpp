#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lds/core/dataset.hpp"
#include "lds/core/error.hpp"
#include "lds/core/rng.hpp"
#include "lds/core/types.hpp"

namespace lds {

struct SamplerConfig {
  std::size_t n_way = 5;
  std::size_t k_shot = 1;
  std::size_t m_query = 5;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_way < 2) throw ConfigError("n_way must be >= 2");
    if (k_shot < 1) throw ConfigError("k_shot must be >= 1");
    if (m_query < 1) throw ConfigError("m_query must be >= 1");
  }
};

/// Draws one N-way K-shot episode from `class_pool`.
///
/// N classes are picked without replacement; for each, K support and then M
/// query samples are drawn without replacement from that class's members, so
/// support and query never share a sample.
inline Episode sample_episode(const Dataset& dataset, std::span<const std::string> class_pool,
                              const SamplerConfig& cfg, Rng& rng) {
  cfg.validate();
  if (class_pool.size() < cfg.n_way) {
    throw DataError("class pool has " + std::to_string(class_pool.size()) + " classes, need " +
                    std::to_string(cfg.n_way));
  }
  std::vector<std::size_t> order(class_pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.partial_shuffle(std::span(order), cfg.n_way);

  Episode ep;
  ep.n_way = cfg.n_way;
  ep.k_shot = cfg.k_shot;
  ep.m_query = cfg.m_query;
  ep.class_names.reserve(cfg.n_way);
  ep.support.reserve(cfg.n_way);
  ep.query.reserve(cfg.n_way);
  for (std::size_t slot = 0; slot < cfg.n_way; ++slot) {
    const auto& name = class_pool[order[slot]];
    std::vector<std::size_t> members = dataset.members(name);
    if (members.size() < cfg.k_shot + cfg.m_query) {
      throw DataError("class '" + name + "' has " + std::to_string(members.size()) +
                      " samples, need " + std::to_string(cfg.k_shot + cfg.m_query));
    }
    rng.partial_shuffle(std::span(members), cfg.k_shot + cfg.m_query);
    ep.class_names.push_back(name);
    ep.support.emplace_back(members.begin(), members.begin() + cfg.k_shot);
    ep.query.emplace_back(members.begin() + cfg.k_shot,
                          members.begin() + cfg.k_shot + cfg.m_query);
  }
  return ep;
}

}  // namespace lds
