#pragma once

#include <algorithm>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ofdmml/numerics/matrix.hpp"

namespace ofdmml {

/// Contiguous subcarrier blocks and who shares them. Users 0..B-1 (B =
/// subcarriers / per_user) own block u; user B+i is overlaid on block i, so
/// no subcarrier ever hosts more than two users. Indices are zero-based.
struct InterferenceMap {
  std::size_t users = 0;
  std::size_t subcarriers = 0;
  std::size_t per_user = 0;
  std::vector<std::size_t> block;                     ///< block index per user
  std::vector<std::vector<std::size_t>> interferers;  ///< J_u per user

  [[nodiscard]] std::size_t blocks() const noexcept { return subcarriers / per_user; }

  /// Users that own their block (the loop range of the greedy selection).
  [[nodiscard]] std::vector<std::size_t> primary_users() const {
    std::vector<std::size_t> out;
    for (std::size_t u = 0; u < std::min(users, blocks()); ++u) out.push_back(u);
    return out;
  }

  [[nodiscard]] std::vector<std::size_t> allocation(std::size_t u) const {
    std::vector<std::size_t> k(per_user);
    std::iota(k.begin(), k.end(), block.at(u) * per_user);
    return k;
  }

  [[nodiscard]] std::vector<std::size_t> occupancy() const {
    std::vector<std::size_t> occ(subcarriers, 0);
    for (std::size_t u = 0; u < users; ++u)
      for (auto k : allocation(u)) ++occ[k];
    return occ;
  }
};

inline InterferenceMap build_interference_map(std::size_t users, std::size_t subcarriers = 64,
                                              std::size_t per_user = 16) {
  if (per_user == 0 || subcarriers % per_user != 0) {
    throw std::invalid_argument("build_interference_map: subcarriers must split into equal blocks");
  }
  const std::size_t blocks = subcarriers / per_user;
  if (users == 0 || users > 2 * blocks) {
    throw std::invalid_argument("build_interference_map: " + std::to_string(users) + " users do not fit " +
                                std::to_string(blocks) + " blocks at two users per subcarrier");
  }
  InterferenceMap m{users, subcarriers, per_user, std::vector<std::size_t>(users), {}};
  m.interferers.resize(users);
  for (std::size_t u = 0; u < users; ++u) m.block[u] = u % blocks;
  for (std::size_t u = blocks; u < users; ++u) {
    const std::size_t owner = u - blocks;
    m.interferers[owner].push_back(u);
    m.interferers[u].push_back(owner);
  }
  return m;
}

/// SINR_u(k) = P_u |H_u|^2 / (sum_j P_j |H_j|^2 + sigma^2), linear.
inline double sinr(double signal_power, double signal_gain2, std::span<const double> interferer_power,
                   std::span<const double> interferer_gain2, double noise_variance) {
  if (!(noise_variance > 0.0)) throw std::invalid_argument("sinr: noise variance must be positive");
  if (interferer_power.size() != interferer_gain2.size()) throw std::invalid_argument("sinr: interferer lists differ");
  double denom = noise_variance;
  for (std::size_t j = 0; j < interferer_power.size(); ++j) denom += interferer_power[j] * interferer_gain2[j];
  return signal_power * signal_gain2 / denom;
}

struct UserSelection {
  std::size_t user = 0;
  std::vector<std::size_t> subcarriers;  ///< selected, in descending SINR order
  std::vector<double> sinr;              ///< SINR of each selected subcarrier
};

struct AllocationState {
  InterferenceMap map;
  std::size_t selected_per_user = 0;
  std::vector<UserSelection> selections;  ///< one per primary user

  void write_csv(std::ostream& os, std::size_t block_index, bool header) const {
    if (header) os << "block,user,rank,subcarrier,sinr\n";
    for (const auto& s : selections) {
      for (std::size_t r = 0; r < s.subcarriers.size(); ++r) {
        os << block_index << ',' << s.user + 1 << ',' << r + 1 << ',' << s.subcarriers[r] << ',' << s.sinr[r] << '\n';
      }
    }
  }
};

/// Per primary user, evaluates the SINR on each subcarrier of its block and
/// keeps the `selected_per_user` best (descending SINR, ties to the lower
/// subcarrier index). `responses[u][k]` is H_u(k) including path loss;
/// `power[u]` is the equal-allocation transmit power per subcarrier.
inline AllocationState select_subcarriers(const InterferenceMap& map, std::span<const CVec> responses,
                                          std::span<const double> power, double noise_variance,
                                          std::size_t selected_per_user) {
  if (selected_per_user > map.per_user) {
    throw std::invalid_argument("select_subcarriers: cannot select " + std::to_string(selected_per_user) + " of " +
                                std::to_string(map.per_user) + " subcarriers");
  }
  if (responses.size() != map.users || power.size() != map.users) {
    throw std::invalid_argument("select_subcarriers: need one response and power per user");
  }
  AllocationState state{map, selected_per_user, {}};
  for (auto u : map.primary_users()) {
    const auto ks = map.allocation(u);
    std::vector<double> values(ks.size());
    std::vector<double> ip;
    std::vector<double> ig;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      ip.clear();
      ig.clear();
      for (auto j : map.interferers[u]) {
        ip.push_back(power[j]);
        ig.push_back(std::norm(responses[j][ks[i]]));
      }
      values[i] = sinr(power[u], std::norm(responses[u][ks[i]]), ip, ig, noise_variance);
    }
    std::vector<std::size_t> order(ks.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    UserSelection sel{u, {}, {}};
    for (std::size_t r = 0; r < selected_per_user; ++r) {
      sel.subcarriers.push_back(ks[order[r]]);
      sel.sinr.push_back(values[order[r]]);
    }
    state.selections.push_back(std::move(sel));
  }
  return state;
}

}  // namespace ofdmml
