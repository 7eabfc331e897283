#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fklab/lattice.hpp"

namespace fklab::detail {

inline int coord_parity(const Coord& c, int n) {
  std::int64_t s = 0;
  for (int k = 0; k < n; ++k) s += c[k];
  return static_cast<int>(((s % 2) + 2) % 2);
}

inline bool is_unknown(const LatticeDomain& dom, const Coord& c, bool reflect_faces) {
  if (c[dom.dim() - 1] < 1) return false;
  if (reflect_faces) return true;
  return dom.classify(c) == SiteClass::Interior;
}

/// Offsets of the bulk unknowns split by red-black parity, with full-stencil
/// sites separated from the ones whose missing neighbors reflect
/// (zero-normal-difference faces). Sweep loops stay free of coordinate
/// decoding.
struct LaplacePlan {
  std::array<std::int64_t, 2 * kMaxDim> strides{};
  int n_neighbors = 0;
  std::array<std::vector<std::int64_t>, 2> full;
  std::array<std::vector<std::int64_t>, 2> partial;
  std::array<std::vector<std::uint8_t>, 2> partial_mask;  // bit b: neighbor strides[b] present

  LaplacePlan(const LatticeDomain& dom, bool reflect) {
    const int n = dom.dim();
    n_neighbors = 2 * n;
    for (int k = 0; k + 1 < n; ++k) {
      strides[2 * k] = -dom.lateral_stride(k);
      strides[2 * k + 1] = dom.lateral_stride(k);
    }
    strides[2 * (n - 1)] = -dom.vertical_stride();
    strides[2 * (n - 1) + 1] = dom.vertical_stride();

    const std::int64_t count = dom.site_count();
    for (std::int64_t i = 0; i < count; ++i) {
      const Coord c = dom.coord(i);
      if (!is_unknown(dom, c, reflect)) continue;
      const int p = coord_parity(c, n);
      std::uint8_t present = 0;
      int m = 0;
      for (int k = 0; k + 1 < n; ++k) {
        if (c[k] > -dom.lateral_halfwidth()) {
          present |= static_cast<std::uint8_t>(1u << (2 * k));
          ++m;
        }
        if (c[k] < dom.lateral_halfwidth()) {
          present |= static_cast<std::uint8_t>(1u << (2 * k + 1));
          ++m;
        }
      }
      present |= static_cast<std::uint8_t>(1u << (2 * (n - 1)));
      ++m;
      if (c[n - 1] < dom.height()) {
        present |= static_cast<std::uint8_t>(1u << (2 * (n - 1) + 1));
        ++m;
      }
      if (m == n_neighbors) {
        full[p].push_back(i);
      } else {
        partial[p].push_back(i);
        partial_mask[p].push_back(present);
      }
    }
  }
};

/// Offsets of the evolving boundary-plane sites. With a Dirichlet closure the
/// lateral extremes stay frozen, so every listed site has its full lateral
/// stencil; with reflection they evolve with dropped neighbors.
struct BoundaryPlan {
  std::array<std::int64_t, 2 * kMaxDim> lateral_strides{};
  int n_lateral = 0;
  std::int64_t up_stride = 0;
  std::vector<std::int64_t> full;
  std::vector<std::int64_t> partial;
  std::vector<std::uint8_t> partial_mask;

  BoundaryPlan(const LatticeDomain& dom, bool reflect) {
    const int n = dom.dim();
    n_lateral = 2 * (n - 1);
    for (int k = 0; k + 1 < n; ++k) {
      lateral_strides[2 * k] = -dom.lateral_stride(k);
      lateral_strides[2 * k + 1] = dom.lateral_stride(k);
    }
    up_stride = dom.vertical_stride();

    for (std::int64_t i = 0; i < dom.plane_size(); ++i) {
      const Coord c = dom.coord(i);
      const bool on_face = dom.dim() > 1 && dom.on_lateral_face(c);
      if (on_face && !reflect) continue;
      std::uint8_t present = 0;
      int m = 0;
      for (int k = 0; k + 1 < n; ++k) {
        if (c[k] > -dom.lateral_halfwidth()) {
          present |= static_cast<std::uint8_t>(1u << (2 * k));
          ++m;
        }
        if (c[k] < dom.lateral_halfwidth()) {
          present |= static_cast<std::uint8_t>(1u << (2 * k + 1));
          ++m;
        }
      }
      if (m == n_lateral) {
        full.push_back(i);
      } else {
        partial.push_back(i);
        partial_mask.push_back(present);
      }
    }
  }
};

}  // namespace fklab::detail
