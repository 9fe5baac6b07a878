#include "scneugm/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "scneugm/rng.hpp"
#include "scneugm/util.hpp"

namespace scneugm {

namespace {

std::vector<Point> ap_grid(const RadioConfig& cfg) {
  const int g = static_cast<int>(std::lround(std::sqrt(double(cfg.num_aps))));
  const double spacing = cfg.area_side / g;
  std::vector<Point> aps(cfg.num_aps);
  for (int a = 0; a < cfg.num_aps; ++a) {
    const int gx = a % g;
    const int gy = a / g;
    aps[a] = {spacing / 2.0 + spacing * gx, spacing / 2.0 + spacing * gy};
  }
  return aps;
}

void fill_derived(Network& net, const RadioConfig& cfg) {
  const int k = net.num_stas();
  const int a = net.num_aps();
  net.pathloss_sta_ap.assign(size_t(k) * a, 0.0);
  net.assoc_ap.assign(k, 0);
  net.packet_duration_s.assign(k, 0.0);
  net.marginal.assign(k, 0);
  for (int i = 0; i < k; ++i) {
    int best = 0;
    double best_loss = 1e300;
    for (int j = 0; j < a; ++j) {
      const double s = path_loss_db(
          distance(net.sta_positions[i], net.ap_positions[j]), cfg.carrier);
      net.pathloss_sta_ap[size_t(i) * a + j] = s;
      if (s < best_loss) {
        best_loss = s;
        best = j;
      }
    }
    net.assoc_ap[i] = best;
    const McsSelection sel = select_mcs(best_loss, cfg);
    net.packet_duration_s[i] = sel.duration_s;
    net.marginal[i] = sel.marginal ? 1 : 0;
  }
}

}  // namespace

Network generate_network(const RadioConfig& cfg, uint64_t seed) {
  cfg.validate();
  Network net;
  net.ap_positions = ap_grid(cfg);
  net.sta_positions.resize(cfg.num_stas);

  Rng topo = derive_rng(seed, Sub::Topology);
  const double s_max = cfg.s_max();
  constexpr int kMaxRedraws = 1000;
  for (int i = 0; i < cfg.num_stas; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxRedraws && !placed; ++attempt) {
      Point p{topo.uniform(0.0, cfg.area_side),
              topo.uniform(0.0, cfg.area_side)};
      for (const Point& ap : net.ap_positions) {
        if (path_loss_db(distance(p, ap), cfg.carrier) <= s_max) {
          net.sta_positions[i] = p;
          placed = true;
          break;
        }
      }
    }
    if (!placed)
      throw std::runtime_error(
          "generate_network: STA placement kept landing outside AP coverage");
  }
  fill_derived(net, cfg);
  return net;
}

Network network_from_positions(const RadioConfig& cfg,
                               std::vector<Point> sta_positions) {
  Network net;
  net.ap_positions = ap_grid(cfg);
  net.sta_positions = std::move(sta_positions);
  fill_derived(net, cfg);
  return net;
}

std::vector<StationState> measure_states(const Network& net,
                                         const RadioConfig& cfg) {
  const double s_max = cfg.s_max();
  std::vector<StationState> states(net.num_stas());
  for (int i = 0; i < net.num_stas(); ++i) {
    auto& entries = states[i].entries;
    for (int a = 0; a < net.num_aps(); ++a) {
      const double s = net.loss(i, a);
      if (s <= s_max)
        entries.push_back({s, net.ap_positions[a].x, net.ap_positions[a].y});
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const StationState::Entry& l,
                        const StationState::Entry& r) {
                       return l.loss_db < r.loss_db;
                     });
    if (entries.empty())
      throw std::runtime_error("measure_states: STA with no detectable AP");
  }
  return states;
}

PairIndicators pair_indicators(const Network& net, const RadioConfig& cfg) {
  const int k = net.num_stas();
  PairIndicators ind;
  ind.k = k;
  ind.contending.assign(size_t(k) * k, 0);
  ind.hidden.assign(size_t(k) * k, 0);
  const double detect = cfg.detect_range_m();
  const double s_max = cfg.s_max();
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      const double l = distance(net.sta_positions[i], net.sta_positions[j]);
      if (l <= detect) {
        ind.contending[size_t(i) * k + j] = 1;
      } else if (net.loss(i, net.assoc_ap[j]) <= s_max) {
        ind.hidden[size_t(i) * k + j] = 1;
      }
    }
  }
  return ind;
}

Network move_stations(const Network& net, const RadioConfig& cfg, double dt_s,
                      const std::vector<double>& speeds_mps,
                      std::vector<double>& headings_rad, uint64_t seed) {
  const int k = net.num_stas();
  if (static_cast<int>(speeds_mps.size()) != k ||
      static_cast<int>(headings_rad.size()) != k)
    throw std::invalid_argument("move_stations: per-STA vectors must have K entries");
  Rng mob = derive_rng(seed, Sub::Mobility);
  std::vector<Point> positions = net.sta_positions;
  const double side = cfg.area_side;
  for (int i = 0; i < k; ++i) {
    Point p = positions[i];
    p.x += speeds_mps[i] * dt_s * std::cos(headings_rad[i]);
    p.y += speeds_mps[i] * dt_s * std::sin(headings_rad[i]);
    const bool outside = p.x < 0.0 || p.x > side || p.y < 0.0 || p.y > side;
    if (outside) {
      p.x = std::clamp(p.x, 0.0, side);
      p.y = std::clamp(p.y, 0.0, side);
      // re-draw until the heading points back into the area
      const double step = 1e-6 * side;
      for (int tries = 0; tries < 64; ++tries) {
        const double h = mob.uniform(0.0, 2.0 * M_PI);
        const double nx = p.x + step * std::cos(h);
        const double ny = p.y + step * std::sin(h);
        if (nx > 0.0 && nx < side && ny > 0.0 && ny < side) {
          headings_rad[i] = h;
          break;
        }
      }
    }
    positions[i] = p;
  }
  return network_from_positions(cfg, std::move(positions));
}

void write_pair_indicators_csv(const PairIndicators& ind,
                               const std::filesystem::path& path,
                               const std::string& comment) {
  CsvWriter csv(path, comment, {"i", "j", "contending", "hidden"});
  for (int i = 0; i < ind.k; ++i)
    for (int j = 0; j < ind.k; ++j) {
      if (i == j) continue;
      csv.row({std::to_string(i), std::to_string(j),
               std::to_string(int(ind.c(i, j))), std::to_string(int(ind.h(i, j)))});
    }
}

}  // namespace scneugm
