#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "fklab/errors.hpp"

namespace fklab {

inline constexpr int kMaxDim = 4;

/// Integer site index (i_1, ..., i_{n-1}, i_n); unused entries are zero.
/// The first n-1 entries are lateral, the last used entry is the height layer.
using Coord = std::array<std::int64_t, kMaxDim>;

enum class SiteClass : std::uint8_t {
  Boundary,      ///< i_n = 0 and laterally interior: the evolving plane
  Interior,      ///< 0 < i_n < height and laterally interior
  Face,          ///< truncation face: i_n = height or any |i_k| = lateral_halfwidth
};

/// Truncated half-space lattice: sites i with 0 <= i_n <= height and
/// |i_k| <= lateral_halfwidth for the n-1 lateral directions k.
/// Physical coordinates are x = eps * i; the plane i_n = 0 is the boundary.
class LatticeDomain {
 public:
  static constexpr std::int64_t kDefaultMaxSites = 200'000'000;

  LatticeDomain(int n, double eps, std::int64_t lateral_halfwidth, std::int64_t height,
                std::int64_t max_sites = kDefaultMaxSites);

  int dim() const noexcept { return n_; }
  double eps() const noexcept { return eps_; }
  std::int64_t lateral_halfwidth() const noexcept { return lateral_halfwidth_; }
  std::int64_t height() const noexcept { return height_; }

  std::int64_t site_count() const noexcept { return site_count_; }
  /// Number of sites in one horizontal plane (equals the boundary-plane size).
  std::int64_t plane_size() const noexcept { return plane_size_; }

  /// Linear offset of a site; i_n is the slowest index so the boundary plane
  /// occupies offsets [0, plane_size).
  std::int64_t offset(const Coord& c) const;
  Coord coord(std::int64_t offset) const;

  /// Physical position x = eps * i, written into the first n entries of out.
  void position(const Coord& c, std::span<double> out) const;

  bool contains(const Coord& c) const noexcept;
  bool on_boundary_plane(const Coord& c) const noexcept { return c[n_ - 1] == 0; }
  bool on_lateral_face(const Coord& c) const noexcept;
  bool on_top_face(const Coord& c) const noexcept { return c[n_ - 1] == height_; }

  /// Boundary / Interior / Face split used by the dynamics and the solvers.
  SiteClass classify(const Coord& c) const;

  std::int64_t vertical_stride() const noexcept { return plane_size_; }
  std::int64_t lateral_stride(int axis) const noexcept { return lateral_strides_[axis]; }

  /// Identical site set: same n, lateral_halfwidth, height and eps.
  bool same_geometry(const LatticeDomain& o) const noexcept;

  double lateral_extent() const noexcept { return static_cast<double>(lateral_halfwidth_) * eps_; }
  double vertical_extent() const noexcept { return static_cast<double>(height_) * eps_; }

 private:
  int n_;
  double eps_;
  std::int64_t lateral_halfwidth_;
  std::int64_t height_;
  std::int64_t plane_size_;
  std::int64_t site_count_;
  std::array<std::int64_t, kMaxDim> lateral_strides_{};
};

using DomainPtr = std::shared_ptr<const LatticeDomain>;

LatticeDomain make_domain(int n, double eps, std::int64_t lateral_halfwidth, std::int64_t height,
                          std::int64_t max_sites = LatticeDomain::kDefaultMaxSites);
DomainPtr make_domain_ptr(int n, double eps, std::int64_t lateral_halfwidth, std::int64_t height,
                          std::int64_t max_sites = LatticeDomain::kDefaultMaxSites);

/// Scalar displacement values on every site of a domain, at one instant.
class LatticeField {
 public:
  LatticeField() = default;
  explicit LatticeField(DomainPtr dom, double time = 0.0, double fill = 0.0);

  const LatticeDomain& domain() const { return *dom_; }
  const DomainPtr& domain_ptr() const { return dom_; }
  double time() const noexcept { return time_; }
  void set_time(double t) noexcept { time_ = t; }

  double operator[](std::int64_t offset) const { return values_[offset]; }
  double& operator[](std::int64_t offset) { return values_[offset]; }
  double at(const Coord& c) const { return values_[dom_->offset(c)]; }
  double& at(const Coord& c) { return values_[dom_->offset(c)]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  double sup_norm() const;
  bool all_finite() const;

 private:
  DomainPtr dom_;
  std::vector<double> values_;
  double time_ = 0.0;
};

/// Values on the boundary plane i_n = 0 only.
class BoundaryField {
 public:
  BoundaryField() = default;
  explicit BoundaryField(DomainPtr dom, double time = 0.0, double fill = 0.0);

  const LatticeDomain& domain() const { return *dom_; }
  const DomainPtr& domain_ptr() const { return dom_; }
  double time() const noexcept { return time_; }
  void set_time(double t) noexcept { time_ = t; }

  /// Indexed by the lateral part of the usual offset (i_n = 0 plane).
  double operator[](std::int64_t plane_offset) const { return values_[plane_offset]; }
  double& operator[](std::int64_t plane_offset) { return values_[plane_offset]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  double sup_norm() const;

 private:
  DomainPtr dom_;
  std::vector<double> values_;
  double time_ = 0.0;
};

/// Compact space-time box used for error norms: |x_k| <= lateral_radius,
/// 0 <= x_n <= height, t in [t_begin, t_end].
struct Window {
  double lateral_radius = 0.0;
  double height = 0.0;
  double t_begin = 0.0;
  double t_end = 0.0;

  /// Windows must sit strictly inside the truncated extents so the error
  /// norms never read truncation-face sites.
  void validate_inside(const LatticeDomain& dom) const;
  bool contains_time(double t) const noexcept {
    return t >= t_begin - 1e-12 && t <= t_end + 1e-12;
  }
};

/// Discrete Laplacian: eps^-2 * sum over the 2n unit neighbors of the
/// centered differences. The site must have all neighbors inside the domain.
double discrete_laplacian(const LatticeField& f, const Coord& site);

/// Discrete boundary operator: eps^-1 * sum over the 2n-1 unit neighbors with
/// nonnegative vertical component. The site must be on the boundary plane
/// with its lateral neighbors and upward neighbor present.
double discrete_boundary_operator(const LatticeField& f, const Coord& site);

/// Injection of a fine-lattice field onto a coarser nested lattice
/// (coarse.eps = 2^k * fine.eps, coarse extents inside fine extents).
LatticeField restrict_to(const LatticeField& fine, const DomainPtr& coarse);

/// Max of |a - b| over sites whose physical coordinates lie in the window.
double sup_error(const LatticeField& a, const LatticeField& b, const Window& w);

}  // namespace fklab
