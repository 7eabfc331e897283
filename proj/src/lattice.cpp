#include "fklab/lattice.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace fklab {

namespace {

std::string coord_string(const Coord& c, int n) {
  std::string s = "(";
  for (int k = 0; k < n; ++k) {
    s += std::to_string(c[k]);
    if (k + 1 < n) s += ",";
  }
  s += ")";
  return s;
}

}  // namespace

LatticeDomain::LatticeDomain(int n, double eps, std::int64_t lateral_halfwidth, std::int64_t height,
                             std::int64_t max_sites)
    : n_(n), eps_(eps), lateral_halfwidth_(lateral_halfwidth), height_(height) {
  if (n < 1 || n > kMaxDim) throw std::invalid_argument("lattice dimension must be in [1, 4]");
  if (!(eps > 0.0)) throw std::invalid_argument("lattice spacing must be positive");
  if (lateral_halfwidth < 0) throw std::invalid_argument("lateral_halfwidth must be >= 0");
  if (height < 1) throw std::invalid_argument("height must be >= 1 interior layer");

  const std::int64_t width = 2 * lateral_halfwidth + 1;
  plane_size_ = 1;
  for (int k = 0; k + 1 < n; ++k) {
    lateral_strides_[k] = plane_size_;
    if (plane_size_ > max_sites / width) {
      throw std::invalid_argument("site count overflows configured budget of " +
                                  std::to_string(max_sites) + " sites");
    }
    plane_size_ *= width;
  }
  if (plane_size_ > max_sites / (height + 1)) {
    throw std::invalid_argument(
        "site count " + std::to_string(plane_size_) + " x " + std::to_string(height + 1) +
        " planes overflows configured budget of " + std::to_string(max_sites) + " sites");
  }
  site_count_ = plane_size_ * (height + 1);
}

std::int64_t LatticeDomain::offset(const Coord& c) const {
  std::int64_t off = c[n_ - 1] * plane_size_;
  for (int k = 0; k + 1 < n_; ++k) off += (c[k] + lateral_halfwidth_) * lateral_strides_[k];
  return off;
}

Coord LatticeDomain::coord(std::int64_t offset) const {
  Coord c{};
  c[n_ - 1] = offset / plane_size_;
  std::int64_t rest = offset % plane_size_;
  const std::int64_t width = 2 * lateral_halfwidth_ + 1;
  for (int k = 0; k + 1 < n_; ++k) {
    c[k] = rest % width - lateral_halfwidth_;
    rest /= width;
  }
  return c;
}

void LatticeDomain::position(const Coord& c, std::span<double> out) const {
  for (int k = 0; k < n_; ++k) out[k] = eps_ * static_cast<double>(c[k]);
}

bool LatticeDomain::contains(const Coord& c) const noexcept {
  if (c[n_ - 1] < 0 || c[n_ - 1] > height_) return false;
  for (int k = 0; k + 1 < n_; ++k) {
    if (c[k] < -lateral_halfwidth_ || c[k] > lateral_halfwidth_) return false;
  }
  return true;
}

bool LatticeDomain::on_lateral_face(const Coord& c) const noexcept {
  for (int k = 0; k + 1 < n_; ++k) {
    if (c[k] == -lateral_halfwidth_ || c[k] == lateral_halfwidth_) return true;
  }
  return false;
}

SiteClass LatticeDomain::classify(const Coord& c) const {
  if (n_ > 1 && on_lateral_face(c)) return SiteClass::Face;
  if (on_top_face(c)) return SiteClass::Face;
  if (on_boundary_plane(c)) return SiteClass::Boundary;
  return SiteClass::Interior;
}

bool LatticeDomain::same_geometry(const LatticeDomain& o) const noexcept {
  return n_ == o.n_ && lateral_halfwidth_ == o.lateral_halfwidth_ && height_ == o.height_ &&
         eps_ == o.eps_;
}

LatticeDomain make_domain(int n, double eps, std::int64_t lateral_halfwidth, std::int64_t height,
                          std::int64_t max_sites) {
  return LatticeDomain(n, eps, lateral_halfwidth, height, max_sites);
}

DomainPtr make_domain_ptr(int n, double eps, std::int64_t lateral_halfwidth, std::int64_t height,
                          std::int64_t max_sites) {
  return std::make_shared<const LatticeDomain>(n, eps, lateral_halfwidth, height, max_sites);
}

LatticeField::LatticeField(DomainPtr dom, double time, double fill)
    : dom_(std::move(dom)), values_(dom_->site_count(), fill), time_(time) {}

double LatticeField::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool LatticeField::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

BoundaryField::BoundaryField(DomainPtr dom, double time, double fill)
    : dom_(std::move(dom)), values_(dom_->plane_size(), fill), time_(time) {}

double BoundaryField::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

void Window::validate_inside(const LatticeDomain& dom) const {
  if (lateral_radius < 0 || height < 0 || t_end < t_begin) {
    throw std::invalid_argument("window extents must be nonnegative with t_begin <= t_end");
  }
  if (dom.dim() > 1 && lateral_radius >= dom.lateral_extent()) {
    throw std::invalid_argument("window lateral radius " + std::to_string(lateral_radius) +
                                " must lie strictly inside the lateral extent " +
                                std::to_string(dom.lateral_extent()));
  }
  if (height >= dom.vertical_extent()) {
    throw std::invalid_argument("window height " + std::to_string(height) +
                                " must lie strictly inside the vertical extent " +
                                std::to_string(dom.vertical_extent()));
  }
}

double discrete_laplacian(const LatticeField& f, const Coord& site) {
  const LatticeDomain& dom = f.domain();
  const int n = dom.dim();
  if (!dom.contains(site) || dom.classify(site) != SiteClass::Interior) {
    throw std::invalid_argument("discrete_laplacian needs an interior site, got " +
                                coord_string(site, n));
  }
  const std::int64_t off = dom.offset(site);
  const double u = f[off];
  double acc = 0.0;
  for (int k = 0; k + 1 < n; ++k) {
    const std::int64_t s = dom.lateral_stride(k);
    acc += (f[off - s] - u) + (f[off + s] - u);
  }
  const std::int64_t sv = dom.vertical_stride();
  acc += (f[off - sv] - u) + (f[off + sv] - u);
  const double eps = dom.eps();
  return acc / (eps * eps);
}

double discrete_boundary_operator(const LatticeField& f, const Coord& site) {
  const LatticeDomain& dom = f.domain();
  const int n = dom.dim();
  if (!dom.contains(site) || dom.classify(site) != SiteClass::Boundary) {
    throw std::invalid_argument(
        "discrete_boundary_operator needs a boundary-plane site with all lateral neighbors, got " +
        coord_string(site, n));
  }
  const std::int64_t off = dom.offset(site);
  const double u = f[off];
  double acc = 0.0;
  for (int k = 0; k + 1 < n; ++k) {
    const std::int64_t s = dom.lateral_stride(k);
    acc += (f[off - s] - u) + (f[off + s] - u);
  }
  acc += (f[off + dom.vertical_stride()] - u);
  return acc / dom.eps();
}

LatticeField restrict_to(const LatticeField& fine, const DomainPtr& coarse) {
  const LatticeDomain& fd = fine.domain();
  const LatticeDomain& cd = *coarse;
  if (fd.dim() != cd.dim()) throw std::invalid_argument("restriction requires equal dimensions");

  const double ratio_f = cd.eps() / fd.eps();
  const auto ratio = static_cast<std::int64_t>(std::llround(ratio_f));
  if (ratio < 1 || std::abs(ratio_f - static_cast<double>(ratio)) > 1e-9 ||
      (ratio & (ratio - 1)) != 0) {
    throw std::invalid_argument("lattices are not nested: eps ratio " + std::to_string(ratio_f) +
                                " is not a power of 2");
  }
  if (cd.lateral_halfwidth() * ratio > fd.lateral_halfwidth() || cd.height() * ratio > fd.height()) {
    throw std::invalid_argument("coarse lattice extends beyond the fine lattice");
  }

  LatticeField out(coarse, fine.time());
  const std::int64_t count = cd.site_count();
  for (std::int64_t i = 0; i < count; ++i) {
    Coord c = cd.coord(i);
    Coord fc{};
    for (int k = 0; k < cd.dim(); ++k) fc[k] = c[k] * ratio;
    out[i] = fine[fd.offset(fc)];
  }
  return out;
}

double sup_error(const LatticeField& a, const LatticeField& b, const Window& w) {
  const LatticeDomain& dom = a.domain();
  if (!dom.same_geometry(b.domain())) {
    throw std::invalid_argument("sup_error requires fields on the same lattice (restrict first)");
  }
  if (std::abs(a.time() - b.time()) > 1e-9) {
    throw std::invalid_argument("sup_error requires fields at the same time");
  }
  w.validate_inside(dom);
  if (!w.contains_time(a.time())) {
    throw EmptyWindowError("snapshot time " + std::to_string(a.time()) +
                           " lies outside the window time interval");
  }

  const double eps = dom.eps();
  // Integer bounds so site selection never depends on rounded positions.
  const auto lat = static_cast<std::int64_t>(std::floor(w.lateral_radius / eps + 1e-12));
  const auto top = static_cast<std::int64_t>(std::floor(w.height / eps + 1e-12));

  double m = -1.0;
  Coord c{};
  const int n = dom.dim();
  bool any = false;
  const std::int64_t lat_clamped = std::min(lat, dom.lateral_halfwidth());
  const std::int64_t top_clamped = std::min(top, dom.height());

  // Walk the window box directly.
  std::array<std::int64_t, kMaxDim> lo{}, hi{};
  for (int k = 0; k + 1 < n; ++k) {
    lo[k] = -lat_clamped;
    hi[k] = lat_clamped;
  }
  lo[n - 1] = 0;
  hi[n - 1] = top_clamped;
  for (int k = 0; k < n; ++k) c[k] = lo[k];
  for (;;) {
    const std::int64_t off = dom.offset(c);
    const double d = std::abs(a[off] - b[off]);
    if (d > m) m = d;
    any = true;
    int k = 0;
    for (; k < n; ++k) {
      if (++c[k] <= hi[k]) break;
      c[k] = lo[k];
    }
    if (k == n) break;
  }
  if (!any) throw EmptyWindowError("window contains no lattice sites");
  return m;
}

}  // namespace fklab
