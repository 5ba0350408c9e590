#include "bergman/dyadic.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <sstream>
#include <unordered_map>

#include "bergman/rng.hpp"

namespace bergman {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kGridThreshold = 32;
constexpr int kGridMaxDim = 3;
// Extra radius (in units of eta^k) added to a cube's observed extent when
// sampling it; candidate spacing is far below this.
// Observed extents miss up to a few candidate spacings (eta^k / net_resolution^(1/n)).
constexpr double kExtentSpacings = 4.0;

// Uniform hash grid over points in the plane or space (n <= 3).
class PointGrid {
 public:
  PointGrid(int n, double cell) : n_(n), h_(cell) {
    lo_.fill(std::numeric_limits<long>::max());
    hi_.fill(std::numeric_limits<long>::min());
  }

  void insert(const Vec& p) {
    const auto c = cell_of(p);
    for (int d = 0; d < n_; ++d) {
      lo_[d] = std::min(lo_[d], c[d]);
      hi_[d] = std::max(hi_[d], c[d]);
    }
    cells_[pack(c)].push_back(static_cast<int>(pts_.size()));
    pts_.push_back(p);
  }

  std::size_t size() const { return pts_.size(); }
  const Vec& point(int i) const { return pts_[static_cast<std::size_t>(i)]; }

  // True when some stored point is strictly closer than r (r <= cell size).
  bool any_within(const Vec& x, double r) const {
    const double r2 = r * r;
    bool hit = false;
    const auto c = cell_of(x);
    visit_box(c, 1, [&](int id) {
      if (distance_sq(pts_[static_cast<std::size_t>(id)], x) < r2) hit = true;
    });
    return hit;
  }

  // Calls f(id) for every stored point within distance r of x.
  template <class F>
  void for_each_within(const Vec& x, double r, F&& f) const {
    const double r2 = r * r;
    visit_box(cell_of(x), static_cast<long>(std::ceil(r / h_)), [&](int id) {
      if (distance_sq(pts_[static_cast<std::size_t>(id)], x) <= r2) f(id);
    });
  }

  // Nearest by (squared distance, id), plus the second-nearest squared
  // distance when `second` is set.
  void nearest2(const Vec& x, int& id1, double& d1, double& d2, bool second = true) const {
    id1 = -1;
    d1 = kInf;
    d2 = kInf;
    if (pts_.empty()) return;
    const auto c = cell_of(x);
    long reach = 0;
    for (int d = 0; d < n_; ++d) reach = std::max({reach, std::abs(c[d] - lo_[d]), std::abs(hi_[d] - c[d])});
    for (long r = 0; r <= reach; ++r) {
      visit_ring(c, r, [&](int id) {
        const double s = distance_sq(pts_[static_cast<std::size_t>(id)], x);
        if (s < d1 || (s == d1 && id < id1)) {
          d2 = d1;
          d1 = s;
          id1 = id;
        } else if (s < d2) {
          d2 = s;
        }
      });
      const double bound = static_cast<double>(r) * h_;
      if ((second ? d2 : d1) <= bound * bound) break;
    }
  }

 private:
  using Cell = std::array<long, kGridMaxDim>;

  Cell cell_of(const Vec& p) const {
    Cell c{};
    for (int d = 0; d < n_; ++d) c[d] = static_cast<long>(std::floor(p[d] / h_));
    return c;
  }
  static std::uint64_t pack(const Cell& c) {
    std::uint64_t key = 0;
    for (long v : c) key = (key << 21) | (static_cast<std::uint64_t>(v + (1L << 20)) & ((1ULL << 21) - 1));
    return key;
  }

  template <class F>
  void visit_cell(const Cell& c, F&& f) const {
    for (int d = 0; d < n_; ++d)
      if (c[d] < lo_[d] || c[d] > hi_[d]) return;
    const auto it = cells_.find(pack(c));
    if (it == cells_.end()) return;
    for (int id : it->second) f(id);
  }

  // Cells whose Chebyshev offset from c is exactly r.
  template <class F>
  void visit_ring(const Cell& c, long r, F&& f) const {
    std::array<long, kGridMaxDim> a{}, b{};
    for (int d = 0; d < n_; ++d) {
      a[d] = std::max(c[d] - r, lo_[d]);
      b[d] = std::min(c[d] + r, hi_[d]);
      if (a[d] > b[d]) return;
    }
    Cell o{};
    ring_dim(c, r, a, b, 0, false, o, f);
  }

  // Recursive walk over dimensions; once some coordinate sits on the ring
  // the rest range freely, otherwise the last one takes only c +- r.
  template <class F>
  void ring_dim(const Cell& c, long r, const Cell& a, const Cell& b, int d, bool on, Cell& o, F&& f) const {
    if (d == n_) {
      if (on) visit_cell(o, f);
      return;
    }
    if (!on && d == n_ - 1) {
      const long lo = c[d] - r, hi = c[d] + r;
      if (lo >= a[d] && lo <= b[d]) {
        o[d] = lo;
        ring_dim(c, r, a, b, d + 1, true, o, f);
      }
      if (hi != lo && hi >= a[d] && hi <= b[d]) {
        o[d] = hi;
        ring_dim(c, r, a, b, d + 1, true, o, f);
      }
      return;
    }
    for (long v = a[d]; v <= b[d]; ++v) {
      o[d] = v;
      ring_dim(c, r, a, b, d + 1, on || std::abs(v - c[d]) == r, o, f);
    }
  }

  template <class F>
  void visit_box(const Cell& c, long r, F&& f) const {
    for (long k = 0; k <= r; ++k) visit_ring(c, k, f);
  }

  int n_;
  double h_;
  Cell lo_{}, hi_{};
  std::unordered_map<std::uint64_t, std::vector<int>> cells_;
  std::vector<Vec> pts_;
};

struct Step {
  int pos = -1;  // position in the parent's children list
  double d1 = kInf;
  double d2 = kInf;
};

}  // namespace

struct DyadicSystem::Node {
  BallPoint center;
  int parent = -1;  // 0-based index at level - 1
  double extent = 0.0;
  std::uint64_t key = 0;
  std::vector<int> children;  // 0-based indices at level + 1
  std::shared_ptr<PointGrid> grid;
};

struct DyadicSystem::Impl {
  std::vector<std::deque<Node>> levels;
  mutable std::shared_mutex mutex;

  const Node& node(CubeId id) const {
    return levels[static_cast<std::size_t>(id.level)][static_cast<std::size_t>(id.index - 1)];
  }
  Node& node(CubeId id) { return levels[static_cast<std::size_t>(id.level)][static_cast<std::size_t>(id.index - 1)]; }

  // Closest child of p (at `level`) to x, smallest index on ties.
  Step nearest_child(int level, const Node& p, const Vec& x, bool second = false) const {
    Step s;
    if (p.grid) {
      double q1 = kInf, q2 = kInf;
      p.grid->nearest2(x, s.pos, q1, q2, second);
      s.d1 = std::sqrt(q1);
      s.d2 = std::sqrt(q2);
      return s;
    }
    const auto& next = levels[static_cast<std::size_t>(level + 1)];
    double q1 = kInf, q2 = kInf;
    for (std::size_t j = 0; j < p.children.size(); ++j) {
      const double q = distance_sq(next[static_cast<std::size_t>(p.children[j])].center.vec(), x);
      if (q < q1) {
        q2 = q1;
        q1 = q;
        s.pos = static_cast<int>(j);
      } else if (q < q2) {
        q2 = q;
      }
    }
    s.d1 = std::sqrt(q1);
    s.d2 = std::sqrt(q2);
    return s;
  }

  // 0-based indices of the ancestors of `id` at levels 1..id.level.
  std::vector<int> path(CubeId id) const {
    std::vector<int> out(static_cast<std::size_t>(id.level));
    int idx = id.index - 1;
    for (int k = id.level; k >= 1; --k) {
      out[static_cast<std::size_t>(k - 1)] = idx;
      idx = levels[static_cast<std::size_t>(k)][static_cast<std::size_t>(idx)].parent;
    }
    return out;
  }

  // Whether some sibling's bisector passes within `clearance` of x.
  bool near_boundary(int level, const Node& p, int pos, double d1, const Vec& x, double clearance) const {
    const auto& next = levels[static_cast<std::size_t>(level + 1)];
    const Vec& own = next[static_cast<std::size_t>(p.children[static_cast<std::size_t>(pos)])].center.vec();
    const double q1 = d1 * d1;
    bool near = false;
    auto test = [&](int j) {
      if (j == pos || near) return;
      const Vec& other = next[static_cast<std::size_t>(p.children[static_cast<std::size_t>(j)])].center.vec();
      const double gap = (distance_sq(other, x) - q1) / (2.0 * distance(other, own));
      if (gap < clearance) near = true;
    };
    const double reach = d1 + 2.0 * clearance;
    if (p.grid) {
      p.grid->for_each_within(x, reach, test);
    } else {
      for (std::size_t j = 0; j < p.children.size(); ++j) test(static_cast<int>(j));
    }
    return near;
  }

  // Whether x descends through `path`.  With `clear` set, also reports
  // whether x keeps distance `clearance` from every cell boundary met on the
  // way down.
  bool on_path(const std::vector<int>& p, const Vec& x, double clearance = 0.0, bool* clear = nullptr) const {
    const Node* cur = &levels[0][0];
    bool ok = true;
    for (std::size_t k = 0; k < p.size(); ++k) {
      const Step s = nearest_child(static_cast<int>(k), *cur, x, clear != nullptr);
      if (s.pos < 0 || cur->children[static_cast<std::size_t>(s.pos)] != p[k]) return false;
      if (clear && ok && s.d2 - s.d1 < 2.0 * clearance)
        ok = !near_boundary(static_cast<int>(k), *cur, s.pos, s.d1, x, clearance);
      cur = &levels[k + 1][static_cast<std::size_t>(p[k])];
    }
    if (clear) *clear = ok;
    return true;
  }
};

void DyadicConfig::validate() const {
  require(dimension >= 1 && dimension <= kMaxDimension, ErrorKind::config,
          "dimension must lie in [1, " + std::to_string(kMaxDimension) + "]");
  require(eta > 0.0 && eta < 1.0, ErrorKind::config, "eta must lie in (0, 1)");
  require(kappa0 > 0.0 && kappa1 > 0.0, ErrorKind::config, "kappa0 and kappa1 must be positive");
  require(kappa0 * eta <= kappa1, ErrorKind::config, "kappa0 * eta must not exceed kappa1");
  require(max_level >= 1, ErrorKind::config, "max_level must be at least 1");
  require(net_resolution >= 1, ErrorKind::config, "net_resolution must be positive");
}

DyadicConfig DyadicConfig::practical(int n, int max_level) {
  DyadicConfig c;
  c.dimension = n;
  c.max_level = max_level;
  return c;
}

DyadicConfig DyadicConfig::reference_triple(int n, int max_level) {
  DyadicConfig c;
  c.dimension = n;
  c.eta = 1.0 / 96.0;
  c.kappa0 = 1.0 / 12.0;
  c.kappa1 = 4.0;
  c.max_level = max_level;
  c.net_resolution = 16;
  return c;
}

DyadicSystem::DyadicSystem(const DyadicConfig& cfg) : cfg_(cfg), impl_(std::make_unique<Impl>()) {
  cfg_.validate();
  Node root;
  root.center = BallPoint::origin(cfg_.dimension);
  root.extent = 1.0;
  root.key = hash_combine(cfg_.seed, 0x726f6f74ULL);
  impl_->levels.resize(1);
  impl_->levels[0].push_back(std::move(root));
  refine(kRoot);
}

DyadicSystem::~DyadicSystem() = default;
DyadicSystem::DyadicSystem(DyadicSystem&&) noexcept = default;
DyadicSystem& DyadicSystem::operator=(DyadicSystem&&) noexcept = default;

double DyadicSystem::scale(int level) const { return std::pow(cfg_.eta, level); }
double DyadicSystem::inner_radius(int level) const { return cfg_.kappa0 * scale(level); }
double DyadicSystem::outer_radius(int level) const { return level == 0 ? 1.0 : cfg_.kappa1 * scale(level); }

int DyadicSystem::realized_levels() const {
  int top = 0;
  for (std::size_t k = 0; k < impl_->levels.size(); ++k)
    if (!impl_->levels[k].empty()) top = static_cast<int>(k);
  return top;
}

std::size_t DyadicSystem::count(int level) const {
  if (level < 0 || static_cast<std::size_t>(level) >= impl_->levels.size()) return 0;
  return impl_->levels[static_cast<std::size_t>(level)].size();
}

namespace {

void check_id(const DyadicSystem& sys, CubeId id) {
  require(id.level >= 0 && id.index >= 1 && static_cast<std::size_t>(id.index) <= sys.count(id.level),
          ErrorKind::invalid_input,
          "cube (" + std::to_string(id.level) + "," + std::to_string(id.index) + ") is not realized");
}

}  // namespace

CubeInfo DyadicSystem::cube(CubeId id) const {
  check_id(*this, id);
  const Node& n = impl_->node(id);
  return {id, n.center, n.parent + 1, n.extent, !n.children.empty(), n.children.size()};
}

CubeId DyadicSystem::parent(CubeId id) const {
  check_id(*this, id);
  require(id.level > 0, ErrorKind::invalid_input, "the root has no parent");
  return {id.level - 1, impl_->node(id).parent + 1};
}

std::vector<CubeId> DyadicSystem::children(CubeId id) const {
  check_id(*this, id);
  std::vector<CubeId> out;
  for (int c : impl_->node(id).children) out.push_back({id.level + 1, c + 1});
  return out;
}

bool DyadicSystem::is_refined(CubeId id) const {
  check_id(*this, id);
  return !impl_->node(id).children.empty();
}

std::uint64_t DyadicSystem::key(CubeId id) const {
  check_id(*this, id);
  return impl_->node(id).key;
}

double DyadicSystem::sampling_radius(CubeId id) const {
  check_id(*this, id);
  if (id.level == 0) return 1.0;
  const double spacing = std::pow(static_cast<double>(cfg_.net_resolution), -1.0 / cfg_.dimension);
  const double slack = std::min(1.0, kExtentSpacings * spacing) * scale(id.level);
  return std::min(outer_radius(id.level), impl_->node(id).extent + slack);
}

std::vector<CubeId> DyadicSystem::refine(CubeId id) {
  check_id(*this, id);
  require(id.level < cfg_.max_level, ErrorKind::depth,
          "cannot refine level " + std::to_string(id.level) + " beyond max_level " + std::to_string(cfg_.max_level));
  Impl& im = *impl_;
  if (!im.node(id).children.empty()) return children(id);

  const int n = cfg_.dimension;
  const int k = id.level;
  const double s = scale(k + 1);
  const double radius = sampling_radius(id);
  const Node& p = im.node(id);
  const Vec origin = p.center.vec();
  const double want = cfg_.net_resolution * std::pow(radius / s, n);
  require(want < 5e8, ErrorKind::config, "net_resolution too high for this refinement");
  const auto count = static_cast<std::uint64_t>(std::ceil(want));
  const std::vector<int> path = im.path(id);

  struct Member {
    Vec x;
    bool clear;
  };
  std::vector<Member> members;
  for (std::uint64_t i = 0; i < count; ++i) {
    const Vec v = sample_in_ball(origin, radius, Scheme::low_discrepancy, cfg_.seed, p.key, i);
    if (v.norm_sq() >= 1.0) continue;
    bool clear = false;
    if (!im.on_path(path, v, 0.5 * s, &clear)) continue;
    members.push_back({v, clear});
  }

  // Greedy s-separated net, nested: the parent's own centre goes first.
  auto grid = std::make_shared<PointGrid>(std::min(n, kGridMaxDim), s);
  std::vector<Vec> centers;
  const bool use_grid = n <= kGridMaxDim;
  auto too_close = [&](const Vec& x) {
    if (use_grid) return grid->any_within(x, s);
    for (const Vec& c : centers)
      if (distance_sq(c, x) < s * s) return true;
    return false;
  };
  auto accept = [&](const Vec& x) {
    centers.push_back(x);
    if (use_grid) grid->insert(x);
  };
  if (k > 0) accept(origin);
  for (const Member& m : members)
    if (m.clear && !too_close(m.x)) accept(m.x);
  require(!centers.empty(), ErrorKind::construction,
          "no admissible centre found while refining (" + std::to_string(id.level) + "," + std::to_string(id.index) +
              "); increase net_resolution");

  // Assign members to their closest centre and check the covering radius.
  std::vector<double> extent(centers.size(), 0.0);
  double worst = 0.0;
  for (const Member& m : members) {
    int best = -1;
    double q1 = kInf, q2 = kInf;
    if (use_grid) {
      grid->nearest2(m.x, best, q1, q2, false);
    } else {
      for (std::size_t j = 0; j < centers.size(); ++j) {
        const double q = distance_sq(centers[j], m.x);
        if (q < q1) {
          q1 = q;
          best = static_cast<int>(j);
        }
      }
    }
    const double d = std::sqrt(q1);
    extent[static_cast<std::size_t>(best)] = std::max(extent[static_cast<std::size_t>(best)], d);
    worst = std::max(worst, d);
  }
  if (worst > cfg_.kappa1 * s) {
    std::ostringstream msg;
    msg << "net_resolution too low: a sample lies " << worst << " from every centre at level " << k + 1
        << ", beyond kappa1*eta^" << k + 1 << " = " << cfg_.kappa1 * s;
    fail(ErrorKind::construction, msg.str());
  }

  if (im.levels.size() < static_cast<std::size_t>(k + 2)) im.levels.resize(static_cast<std::size_t>(k + 2));
  auto& next = im.levels[static_cast<std::size_t>(k + 1)];
  Node& parent = im.node(id);
  std::vector<CubeId> out;
  for (std::size_t j = 0; j < centers.size(); ++j) {
    Node c;
    c.center = BallPoint::unchecked(centers[j], centers[j].norm_sq());
    c.parent = id.index - 1;
    c.extent = extent[j];
    c.key = hash_combine(parent.key, j + 1);
    parent.children.push_back(static_cast<int>(next.size()));
    next.push_back(std::move(c));
    out.push_back({k + 1, static_cast<int>(next.size())});
  }
  if (use_grid && centers.size() > kGridThreshold) parent.grid = std::move(grid);
  return out;
}

void DyadicSystem::realize_to(int level) {
  require(level >= 0 && level <= cfg_.max_level, ErrorKind::depth, "realize_to level outside [0, max_level]");
  for (int k = 0; k < level; ++k) {
    const std::size_t m = count(k);
    for (std::size_t i = 0; i < m; ++i) refine({k, static_cast<int>(i + 1)});
  }
}

CubeId DyadicSystem::find(const BallPoint& x, int level) const {
  require(x.dim() == cfg_.dimension, ErrorKind::invalid_input, "point dimension does not match the system");
  const Impl& im = *impl_;
  CubeId cur = kRoot;
  for (int k = 0; k < level; ++k) {
    const Node& p = im.node(cur);
    if (p.children.empty()) break;
    const Step s = im.nearest_child(k, p, x.vec());
    cur = {k + 1, p.children[static_cast<std::size_t>(s.pos)] + 1};
  }
  return cur;
}

CubeId DyadicSystem::locate(const BallPoint& x, int level) {
  require(level >= 0 && level <= cfg_.max_level, ErrorKind::depth, "locate level outside [0, max_level]");
  for (;;) {
    CubeId stop;
    {
      std::shared_lock lock(impl_->mutex);
      stop = find(x, level);
      if (stop.level == level) return stop;
    }
    std::unique_lock lock(impl_->mutex);
    refine(stop);
  }
}

bool DyadicSystem::contains(CubeId id, const BallPoint& x) const {
  check_id(*this, id);
  return impl_->on_path(impl_->path(id), x.vec());
}

CubeId DyadicSystem::child_containing(CubeId id, const BallPoint& x) const {
  check_id(*this, id);
  const Node& p = impl_->node(id);
  require(!p.children.empty(), ErrorKind::precondition, "cube is not refined");
  const Step s = impl_->nearest_child(id.level, p, x.vec());
  return {id.level + 1, p.children[static_cast<std::size_t>(s.pos)] + 1};
}

// ---------------------------------------------------------------------------
// Snapshot

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string DyadicSystem::snapshot() const {
  std::ostringstream out;
  out << "dyadic-snapshot 1\n";
  out << "dimension " << cfg_.dimension << "\n";
  out << "eta " << fmt17(cfg_.eta) << "\n";
  out << "kappa0 " << fmt17(cfg_.kappa0) << "\n";
  out << "kappa1 " << fmt17(cfg_.kappa1) << "\n";
  out << "max_level " << cfg_.max_level << "\n";
  out << "net_resolution " << cfg_.net_resolution << "\n";
  out << "seed " << cfg_.seed << "\n";
  const int top = realized_levels();
  out << "levels " << top << "\n";
  for (int k = 1; k <= top; ++k) {
    const auto& lv = impl_->levels[static_cast<std::size_t>(k)];
    out << "level " << k << " " << lv.size() << "\n";
    for (std::size_t i = 0; i < lv.size(); ++i) {
      const Node& c = lv[i];
      out << (i + 1) << " " << (c.parent + 1) << " " << fmt17(c.extent);
      for (int d = 0; d < cfg_.dimension; ++d) out << " " << fmt17(c.center[d]);
      out << "\n";
    }
  }
  out << "end\n";
  return out.str();
}

namespace {

class Tokens {
 public:
  explicit Tokens(std::string_view text) : text_(text) {}

  std::string_view next() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::size_t b = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (b == pos_) fail(ErrorKind::invalid_input, "snapshot truncated");
    return text_.substr(b, pos_ - b);
  }
  void expect(std::string_view word) {
    const auto t = next();
    if (t != word) fail(ErrorKind::invalid_input, "snapshot: expected '" + std::string(word) + "', got '" + std::string(t) + "'");
  }
  template <class T>
  T number() {
    const auto t = next();
    T v{};
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size())
      fail(ErrorKind::invalid_input, "snapshot: malformed number '" + std::string(t) + "'");
    return v;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

DyadicSystem DyadicSystem::from_snapshot(std::string_view text) {
  Tokens tok(text);
  tok.expect("dyadic-snapshot");
  require(tok.number<int>() == 1, ErrorKind::invalid_input, "unsupported snapshot version");
  DyadicConfig cfg;
  tok.expect("dimension");
  cfg.dimension = tok.number<int>();
  tok.expect("eta");
  cfg.eta = tok.number<double>();
  tok.expect("kappa0");
  cfg.kappa0 = tok.number<double>();
  tok.expect("kappa1");
  cfg.kappa1 = tok.number<double>();
  tok.expect("max_level");
  cfg.max_level = tok.number<int>();
  tok.expect("net_resolution");
  cfg.net_resolution = tok.number<int>();
  tok.expect("seed");
  cfg.seed = tok.number<std::uint64_t>();
  cfg.validate();

  DyadicSystem sys(cfg, nullptr);
  Impl& im = *sys.impl_;
  tok.expect("levels");
  const int top = tok.number<int>();
  require(top >= 1 && top <= cfg.max_level, ErrorKind::invalid_input, "snapshot: level count out of range");
  im.levels.resize(static_cast<std::size_t>(top + 1));
  for (int k = 1; k <= top; ++k) {
    tok.expect("level");
    require(tok.number<int>() == k, ErrorKind::invalid_input, "snapshot: levels out of order");
    const auto m = tok.number<std::size_t>();
    require(m >= 1, ErrorKind::invalid_input, "snapshot: empty level");
    auto& prev = im.levels[static_cast<std::size_t>(k - 1)];
    auto& lv = im.levels[static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < m; ++i) {
      require(tok.number<std::size_t>() == i + 1, ErrorKind::invalid_input, "snapshot: cube indices out of order");
      Node c;
      c.parent = tok.number<int>() - 1;
      require(c.parent >= 0 && static_cast<std::size_t>(c.parent) < prev.size(), ErrorKind::invalid_input,
              "snapshot: dangling parent link");
      c.extent = tok.number<double>();
      Vec v(cfg.dimension);
      for (int d = 0; d < cfg.dimension; ++d) v[d] = tok.number<double>();
      const auto p = BallPoint::try_make(v);
      require(p.has_value() && std::isfinite(c.extent) && c.extent >= 0.0, ErrorKind::invalid_input,
              "snapshot: invalid centre or extent");
      c.center = *p;
      Node& par = prev[static_cast<std::size_t>(c.parent)];
      c.key = hash_combine(par.key, par.children.size() + 1);
      par.children.push_back(static_cast<int>(i));
      lv.push_back(std::move(c));
    }
  }
  tok.expect("end");

  // Rebuild lookup grids and confirm the structure is a valid nested net.
  const int n = cfg.dimension;
  for (int k = 0; k < top; ++k) {
    auto& lv = im.levels[static_cast<std::size_t>(k)];
    const double s = sys.scale(k + 1);
    for (std::size_t i = 0; i < lv.size(); ++i) {
      Node& par = lv[i];
      if (par.children.empty()) continue;
      if (n <= kGridMaxDim && par.children.size() > kGridThreshold) {
        auto g = std::make_shared<PointGrid>(n, s);
        for (int c : par.children) g->insert(im.levels[static_cast<std::size_t>(k + 1)][static_cast<std::size_t>(c)].center.vec());
        par.grid = std::move(g);
      }
      const auto& next = im.levels[static_cast<std::size_t>(k + 1)];
      const auto& kids = par.children;
      auto where = [&](int c) { return "cube (" + std::to_string(k + 1) + "," + std::to_string(c + 1) + ")"; };
      if (k > 0 && distance(next[static_cast<std::size_t>(kids.front())].center, par.center) != 0.0)
        fail(ErrorKind::construction, "snapshot: " + where(kids.front()) + " does not repeat its parent's centre");
      for (std::size_t a = 0; a < kids.size(); ++a) {
        const CubeId cid{k + 1, kids[a] + 1};
        const Node& child = im.node(cid);
        if (!sys.contains(cid, child.center))
          fail(ErrorKind::construction, "snapshot: centre of " + where(kids[a]) + " does not lie in its own cube");
        if (child.extent > sys.outer_radius(k + 1))
          fail(ErrorKind::construction, "snapshot: extent of " + where(kids[a]) + " exceeds the outer radius");
        for (std::size_t b = 0; b < a && kids.size() <= kGridThreshold; ++b)
          if (distance(child.center, next[static_cast<std::size_t>(kids[b])].center) < s)
            fail(ErrorKind::construction, "snapshot: " + where(kids[a]) + " violates separation");
      }
    }
  }
  return sys;
}

DyadicSystem::DyadicSystem(const DyadicConfig& cfg, std::nullptr_t) : cfg_(cfg), impl_(std::make_unique<Impl>()) {
  Node root;
  root.center = BallPoint::origin(cfg_.dimension);
  root.extent = 1.0;
  root.key = hash_combine(cfg_.seed, 0x726f6f74ULL);
  impl_->levels.resize(1);
  impl_->levels[0].push_back(std::move(root));
}

// ---------------------------------------------------------------------------
// Measures

MeasureEstimate cube_measure(const DyadicSystem& sys, CubeId id, std::size_t samples, std::uint64_t seed) {
  require(samples > 0, ErrorKind::invalid_input, "cube_measure needs samples");
  const CubeInfo info = sys.cube(id);
  MeasureEstimate out;
  out.samples = static_cast<long>(samples);
  if (id.level == 0) {
    out.value = 1.0;
    out.hits = out.samples;
    return out;
  }
  const int n = sys.dimension();
  const std::uint64_t stream = hash_combine(sys.key(id), seed);
  auto run = [&](double radius, double& farthest) {
    long hits = 0;
    farthest = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
      const Vec v = sample_in_ball(info.center.vec(), radius, Scheme::pseudo_random, seed, stream, i);
      const double q = v.norm_sq();
      if (q >= 1.0) continue;
      const BallPoint x = BallPoint::unchecked(v, q);
      if (sys.contains(id, x)) {
        ++hits;
        farthest = std::max(farthest, distance(v, info.center.vec()));
      }
    }
    return hits;
  };
  double radius = sys.sampling_radius(id);
  double farthest = 0.0;
  long hits = run(radius, farthest);
  const double outer = sys.outer_radius(id.level);
  if (radius < outer && farthest > radius - 0.05 * sys.scale(id.level)) {
    radius = outer;
    hits = run(radius, farthest);
  }
  const double vol = ball_volume(n, radius);
  const double p = static_cast<double>(hits) / static_cast<double>(samples);
  out.hits = hits;
  out.value = vol * p;
  out.std_error = vol * std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
  out.warning = hits == 0;
  return out;
}

ChildRatioReport child_ratio_constant(const DyadicSystem& sys, const std::vector<CubeId>& parents,
                                      std::size_t samples, std::uint64_t seed) {
  require(samples > 0, ErrorKind::invalid_input, "child_ratio_constant needs samples");
  ChildRatioReport rep;
  const int n = sys.dimension();
  for (const CubeId pid : parents) {
    if (!sys.is_refined(pid)) continue;
    const auto kids = sys.children(pid);
    const CubeInfo info = sys.cube(pid);
    const double radius = sys.sampling_radius(pid);
    const std::uint64_t stream = hash_combine(sys.key(pid), seed ^ 0x63686c64ULL);
    std::vector<long> kid_hits(kids.size(), 0);
    long parent_hits = 0;
    const int first = kids.front().index;
    for (std::size_t i = 0; i < samples; ++i) {
      const Vec v = sample_in_ball(info.center.vec(), radius, Scheme::pseudo_random, seed, stream, i);
      const double q = v.norm_sq();
      if (q >= 1.0) continue;
      const BallPoint x = BallPoint::unchecked(v, q);
      if (pid.level > 0 && !sys.contains(pid, x)) continue;
      ++parent_hits;
      const CubeId c = sys.child_containing(pid, x);
      // children of one parent occupy a contiguous index range
      ++kid_hits[static_cast<std::size_t>(c.index - first)];
    }
    (void)n;
    for (std::size_t j = 0; j < kids.size(); ++j) {
      ++rep.pairs;
      const double hp = static_cast<double>(parent_hits);
      const double hc = static_cast<double>(kid_hits[j]);
      if (hc == 0.0) {
        rep.warning = true;
        rep.value = kInf;
        rep.worst_parent = pid;
        rep.worst_child = kids[j];
        rep.std_error = kInf;
        continue;
      }
      const double r = hp / hc;
      if (r > rep.value) {
        rep.value = r;
        rep.std_error = r * std::sqrt(std::max(0.0, 1.0 / hc - 1.0 / hp));
        rep.worst_parent = pid;
        rep.worst_child = kids[j];
      }
    }
  }
  return rep;
}

ChildRatioReport child_ratio_constant(const DyadicSystem& sys, int depth, std::size_t samples, std::uint64_t seed) {
  std::vector<CubeId> parents;
  for (int k = 0; k < depth; ++k)
    for (std::size_t i = 0; i < sys.count(k); ++i) parents.push_back({k, static_cast<int>(i + 1)});
  return child_ratio_constant(sys, parents, samples, seed);
}

// ---------------------------------------------------------------------------
// Verification

DyadicVerification verify(const DyadicSystem& sys, const std::vector<BallPoint>& points, int inner_probes,
                          std::uint64_t seed) {
  DyadicVerification v;
  const int top = sys.realized_levels();
  const int n = sys.dimension();
  v.points = points.size();
  v.located_per_level.assign(static_cast<std::size_t>(top + 1), 0);
  v.min_separation_ratio = kInf;

  // Per-level grids over all centres, for separation and candidate lookup.
  std::vector<std::unique_ptr<PointGrid>> grids(static_cast<std::size_t>(top + 1));
  std::vector<std::vector<Vec>> centers(static_cast<std::size_t>(top + 1));
  for (int k = 1; k <= top; ++k) {
    const double s = sys.scale(k);
    auto& cs = centers[static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < sys.count(k); ++i) cs.push_back(sys.cube({k, static_cast<int>(i + 1)}).center.vec());
    double closest = 2.0 * s;
    if (n <= kGridMaxDim) {
      auto g = std::make_unique<PointGrid>(n, s);
      for (std::size_t i = 0; i < cs.size(); ++i) {
        g->for_each_within(cs[i], 2.0 * s, [&](int j) { closest = std::min(closest, distance(cs[i], cs[j])); });
        g->insert(cs[i]);
      }
      grids[static_cast<std::size_t>(k)] = std::move(g);
    } else {
      for (std::size_t i = 0; i < cs.size(); ++i)
        for (std::size_t j = 0; j < i; ++j) closest = std::min(closest, distance(cs[i], cs[j]));
    }
    // exact check on the closest pair found
    if (closest < s) ++v.separation_violations;
    v.min_separation_ratio = std::min(v.min_separation_ratio, closest / s);
  }

  for (const BallPoint& x : points) {
    CubeId prev = kRoot;
    bool rejected = false;
    for (int k = 0; k <= top; ++k) {
      const CubeId c = sys.find(x, k);
      if (c.level < k) break;  // path not realized this deep
      ++v.located_per_level[static_cast<std::size_t>(k)];
      if (!sys.contains(c, x)) rejected = true;
      if (k > 0) {
        if (sys.parent(c) != prev) ++v.nesting_violations;
        const double d = distance(x, sys.cube(c).center);
        const double ratio = d / sys.outer_radius(k);
        v.max_outer_ratio = std::max(v.max_outer_ratio, ratio);
        if (ratio > 1.0) ++v.outer_violations;
        // no other realized level-k cube near x may claim it
        const double reach = sys.outer_radius(k);
        std::size_t claims = 0;
        if (const auto& g = grids[static_cast<std::size_t>(k)]) {
          g->for_each_within(x.vec(), reach, [&](int i) { claims += sys.contains({k, i + 1}, x) ? 1 : 0; });
        } else {
          const auto& cs = centers[static_cast<std::size_t>(k)];
          for (std::size_t i = 0; i < cs.size(); ++i) {
            if (distance_sq(cs[i], x.vec()) > reach * reach) continue;
            if (sys.contains({k, static_cast<int>(i + 1)}, x)) ++claims;
          }
        }
        if (claims != 1) rejected = true;
      }
      prev = c;
    }
    if (rejected) ++v.partition_rejects;
  }

  for (int k = 1; k <= top; ++k) {
    const double r = sys.inner_radius(k);
    for (std::size_t i = 0; i < sys.count(k); ++i) {
      const CubeId id{k, static_cast<int>(i + 1)};
      const Vec c = centers[static_cast<std::size_t>(k)][i];
      ++v.cubes_checked;
      const std::uint64_t stream = hash_combine(sys.key(id), seed ^ 0x696e6eULL);
      bool bad = !sys.contains(id, sys.cube(id).center);
      for (int j = 0; j < inner_probes && !bad; ++j) {
        const Vec y = sample_in_ball(c, r, Scheme::pseudo_random, seed, stream, static_cast<std::uint64_t>(j));
        const double q = y.norm_sq();
        if (q >= 1.0) continue;
        if (!sys.contains(id, BallPoint::unchecked(y, q))) bad = true;
      }
      if (bad) ++v.inner_violations;
    }
  }
  return v;
}

}  // namespace bergman
