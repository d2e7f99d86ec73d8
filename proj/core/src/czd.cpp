#include "hhardy/czd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Dense>

namespace hh {

namespace {

// Visits the cells whose centre lies in the open ball until `fn` returns false.
template <class Fn>
void for_each_cell_in_ball(const GridSpec& g, const KoranyiBall& b, Fn&& fn) {
  const int n = g.n, nx = 2 * n;
  const double R = b.radius;
  if (!(R > 0.0)) return;
  int lo[kMaxDim], hi[kMaxDim], ids[kMaxDim];
  for (int k = 0; k < nx; ++k) {
    const double h = g.spacing(k);
    lo[k] = std::max(0, int(std::floor((b.center.x(k) - R - g.lo[k]) / h - 0.5)));
    hi[k] = std::min(g.res[k] - 1, int(std::ceil((b.center.x(k) + R - g.lo[k]) / h - 0.5)));
    if (lo[k] > hi[k]) return;
    ids[k] = lo[k];
  }
  const double ht = g.spacing(nx), R4 = R * R * R * R;
  HPoint w(n);
  while (true) {
    double y2 = 0.0;
    for (int k = 0; k < nx; ++k) {
      w.x(k) = g.center_coord(k, ids[k]);
      const double y = w.x(k) - b.center.x(k);
      y2 += y * y;
    }
    if (y2 * y2 < R4) {
      const double hw = std::sqrt(R4 - y2 * y2);
      const double tc = b.center.t() + symplectic(n, b.center.coords().data(), w.coords().data());
      const int t0 = std::max(0, int(std::floor((tc - hw - g.lo[nx]) / ht - 0.5)));
      const int t1 = std::min(g.res[nx] - 1, int(std::ceil((tc + hw - g.lo[nx]) / ht - 0.5)));
      for (int it = t0; it <= t1; ++it) {
        w.t() = g.center_coord(nx, it);
        if (!b.contains(w)) continue;
        ids[nx] = it;
        if (!fn(g.ravel(ids))) return;
      }
    }
    int k = 0;
    for (; k < nx; ++k) {
      if (++ids[k] <= hi[k]) break;
      ids[k] = lo[k];
    }
    if (k == nx) break;
  }
}

// x-columns of the grid: all cells sharing the horizontal coordinates.
struct Columns {
  std::size_t count = 0;
  std::vector<std::size_t> first;  // cell index with t-index 0
  std::size_t t_stride = 0;
};

Columns columns_of(const GridSpec& g) {
  Columns c;
  const int nx = 2 * g.n;
  c.count = 1;
  for (int k = 0; k < nx; ++k) c.count *= std::size_t(g.res[k]);
  c.t_stride = g.stride(nx);
  int ids[kMaxDim] = {};
  c.first.reserve(c.count);
  for (std::size_t col = 0; col < c.count; ++col) {
    std::size_t rem = col;
    for (int k = 0; k < nx; ++k) {
      ids[k] = int(rem % std::size_t(g.res[k]));
      rem /= std::size_t(g.res[k]);
    }
    ids[nx] = 0;
    c.first.push_back(g.ravel(ids));
  }
  return c;
}

double smooth_step(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

// 1 on [0, 1], 0 on [2, inf), smooth in between.
double partition_profile(double s) {
  if (s <= 1.0) return 1.0;
  if (s >= 2.0) return 0.0;
  const double a = smooth_step(2.0 - s), b = smooth_step(s - 1.0);
  return a / (a + b);
}

HPoint box_center(const GridSpec& g) {
  HPoint c(g.n);
  for (int k = 0; k < g.dim(); ++k) c.coord(k) = 0.5 * (g.lo[k] + g.hi[k]);
  return c;
}

}  // namespace

std::vector<std::size_t> cells_in_ball(const GridSpec& grid, const KoranyiBall& ball) {
  std::vector<std::size_t> out;
  for_each_cell_in_ball(grid, ball, [&](std::size_t i) {
    out.push_back(i);
    return true;
  });
  std::sort(out.begin(), out.end());
  return out;
}

GridSet GridSet::threshold(const GridFunction& f, double level) {
  GridSet s(f.spec());
  for (std::size_t i = 0; i < f.size(); ++i) s.in[i] = f[i] > level;
  return s;
}

GridSet GridSet::from_balls(const GridSpec& spec, const std::vector<KoranyiBall>& balls) {
  GridSet s(spec);
  for (const auto& b : balls)
    for_each_cell_in_ball(spec, b, [&](std::size_t i) {
      s.in[i] = 1;
      return true;
    });
  return s;
}

std::size_t GridSet::count() const { return std::size_t(std::count(in.begin(), in.end(), std::uint8_t(1))); }

bool GridSet::subset_of(const GridSet& o) const {
  for (std::size_t i = 0; i < in.size(); ++i)
    if (in[i] && !o.in[i]) return false;
  return true;
}

std::vector<double> distance_to_complement(const GridSet& O) {
  const GridSpec& g = O.spec;
  const int n = g.n, nx = 2 * n;
  const Columns cols = columns_of(g);
  const int rt = g.res[nx];
  // Complement t-indices per column, ascending.
  std::vector<std::vector<int>> comp(cols.count);
  std::vector<std::size_t> active;
  for (std::size_t c = 0; c < cols.count; ++c) {
    for (int it = 0; it < rt; ++it)
      if (!O.in[cols.first[c] + std::size_t(it) * cols.t_stride]) comp[c].push_back(it);
    if (!comp[c].empty()) active.push_back(c);
  }
  std::vector<double> out(g.size(), 0.0);
  if (active.empty()) return out;
  std::vector<HPoint> colx;
  for (std::size_t c : active) colx.push_back(g.center(cols.first[c]));
  const double ht = g.spacing(nx);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!O.in[i]) continue;
    const HPoint z = g.center(i);
    double best4 = std::numeric_limits<double>::infinity();
    std::size_t best = 0;
    for (std::size_t a = 0; a < active.size(); ++a) {
      const HPoint& w = colx[a];
      double y2 = 0.0;
      for (int k = 0; k < nx; ++k) {
        const double y = w.x(k) - z.x(k);
        y2 += y * y;
      }
      if (y2 * y2 >= best4) continue;
      const double tau = z.t() + symplectic(n, z.coords().data(), w.coords().data());
      const std::vector<int>& ts = comp[active[a]];
      const double pos = (tau - g.lo[nx]) / ht - 0.5;
      auto it = std::lower_bound(ts.begin(), ts.end(), int(std::floor(pos)));
      for (auto jt : {it - 1, it, it + 1}) {
        if (jt < ts.begin() || jt >= ts.end()) continue;
        const double dt = g.center_coord(nx, *jt) - tau;
        const double r4 = y2 * y2 + dt * dt;
        if (r4 < best4) {
          best4 = r4;
          best = cols.first[active[a]] + std::size_t(*jt) * cols.t_stride;
        }
      }
    }
    out[i] = quasi_distance(z, g.center(best));
  }
  return out;
}

LevelWindow level_window(const GridFunction& mf) {
  double mx = 0.0, mn = std::numeric_limits<double>::infinity(), mn_pos = mn;
  for (double v : mf.values()) {
    mx = std::max(mx, v);
    mn = std::min(mn, v);
    if (v > 0.0) mn_pos = std::min(mn_pos, v);
  }
  LevelWindow w;
  if (!(mx > 0.0)) return w;
  w.hi = int(std::ceil(std::log2(mx))) - 1;
  while (std::ldexp(1.0, w.hi + 1) < mx) ++w.hi;
  while (w.hi > -1100 && !(std::ldexp(1.0, w.hi) < mx)) --w.hi;
  const double floor_v = mn > 0.0 ? mn : mn_pos;
  w.lo = int(std::ceil(std::log2(floor_v)));
  while (std::ldexp(1.0, w.lo - 1) >= floor_v) --w.lo;
  while (std::ldexp(1.0, w.lo) < floor_v) ++w.lo;
  return w;
}

std::vector<GridSet> level_sets(const GridFunction& mf, int j_lo, int j_hi) {
  std::vector<GridSet> out;
  for (int j = j_lo; j <= j_hi; ++j) out.push_back(GridSet::threshold(mf, std::ldexp(1.0, j)));
  return out;
}

LevelSets level_sets(const GridFunction& f, const MaximalConfig& cfg) {
  LevelSets s;
  s.maximal = grand_maximal(f, cfg);
  s.window = level_window(s.maximal);
  s.sets = level_sets(s.maximal, s.window.lo, s.window.hi);
  return s;
}

WhitneyConstants WhitneyConstants::make(double gamma, double beta, int N) {
  require(gamma >= 1.0 && beta >= 1.0, ErrorKind::parameter, "Whitney constants need gamma >= 1 and beta >= 1");
  WhitneyConstants c;
  c.gamma = gamma;
  c.beta = beta;
  c.N = N;
  c.T1 = 9.0 * gamma * std::pow(beta, N);
  c.T2 = 2.0 * gamma * gamma * c.T1;
  c.T3 = 3.0 * gamma * c.T2;
  return c;
}

nlohmann::json WhitneyConstants::to_json() const {
  return {{"gamma", gamma}, {"beta", beta}, {"N", N}, {"T1", T1}, {"T2", T2}, {"T3", T3}};
}

nlohmann::json WhitneyCheck::to_json() const {
  return {{"w1", w1},
          {"w2", w2},
          {"w3", w3},
          {"w4", w4},
          {"overlap", overlap},
          {"uncovered", uncovered},
          {"intersecting_pairs", intersecting_pairs},
          {"t2_violations", t2_violations},
          {"t3_violations", t3_violations}};
}

nlohmann::json WhitneyCover::to_json() const {
  nlohmann::json balls_j = nlohmann::json::array();
  for (const auto& b : balls) balls_j.push_back({{"center", b.center.to_vector()}, {"radius", b.radius}});
  return {{"constants", constants.to_json()}, {"balls", balls_j}, {"check", check.to_json()}};
}

WhitneyCheck verify_whitney(const GridSet& O, const WhitneyCover& cover, int max_overlap) {
  const GridSpec& g = O.spec;
  const auto& B = cover.balls;
  const WhitneyConstants& c = cover.constants;
  WhitneyCheck chk;

  std::vector<std::uint8_t> covered(g.size(), 0);
  for (const auto& b : B)
    for_each_cell_in_ball(g, b, [&](std::size_t i) {
      covered[i] = 1;
      return true;
    });
  for (std::size_t i = 0; i < g.size(); ++i)
    if (covered[i] != O.in[i]) ++chk.uncovered;
  chk.w1 = chk.uncovered == 0;

  // Pairwise quarter-ball separation, pruned by the horizontal distance (rho >= |dx|).
  std::vector<std::size_t> order(B.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return B[a].center.x(0) < B[b].center.x(0) || (B[a].center.x(0) == B[b].center.x(0) && a < b);
  });
  double rmax = 0.0;
  for (const auto& b : B) rmax = std::max(rmax, b.radius);
  for (std::size_t p = 0; p < order.size(); ++p) {
    const KoranyiBall& a = B[order[p]];
    for (std::size_t q = p + 1; q < order.size(); ++q) {
      const KoranyiBall& b = B[order[q]];
      if (b.center.x(0) - a.center.x(0) >= 0.25 * (a.radius + rmax)) break;
      if (quasi_distance(a.center, b.center) < 0.25 * (a.radius + b.radius)) ++chk.intersecting_pairs;
    }
  }
  chk.w2 = chk.intersecting_pairs == 0;

  std::vector<int> count(g.size(), 0);
  for (const auto& b : B) {
    bool inside = true;
    for_each_cell_in_ball(g, b.dilated(c.T2), [&](std::size_t i) {
      ++count[i];
      if (!O.in[i]) inside = false;
      return true;
    });
    bool meets = false;
    for_each_cell_in_ball(g, b.dilated(c.T3), [&](std::size_t i) {
      if (!O.in[i]) meets = true;
      return !meets;
    });
    if (!inside) ++chk.t2_violations;
    if (!meets) ++chk.t3_violations;
  }
  chk.w3 = chk.t2_violations == 0 && chk.t3_violations == 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (O.in[i]) chk.overlap = std::max(chk.overlap, count[i]);
  chk.w4 = max_overlap <= 0 || chk.overlap <= max_overlap;
  return chk;
}

WhitneyCover whitney_cover(const GridSet& O, const WhitneyConstants& c, int max_overlap) {
  const GridSpec& g = O.spec;
  WhitneyCover cover;
  cover.constants = c;
  const std::size_t m = O.count();
  if (m == 0) {
    cover.check = verify_whitney(O, cover, max_overlap);
    return cover;
  }
  require(m < g.size(), ErrorKind::domain, "Whitney cover needs a non-empty complement in the box");

  const std::vector<double> dist = distance_to_complement(O);
  std::vector<std::size_t> order;
  order.reserve(m);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (O.in[i]) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] > dist[b]; });

  const int nx = 2 * g.n;
  const Columns cols = columns_of(g);
  std::vector<std::vector<std::size_t>> by_column(cols.count);  // indices into cover.balls
  auto column_of = [&](const int* ids) {
    std::size_t col = 0, mul = 1;
    for (int k = 0; k < nx; ++k) {
      col += std::size_t(ids[k]) * mul;
      mul *= std::size_t(g.res[k]);
    }
    return col;
  };
  const double rmax = dist[order.front()] / (2.0 * c.T2);
  int ids[kMaxDim], lo[kMaxDim], hi[kMaxDim], cur[kMaxDim];
  for (std::size_t i : order) {
    const double r = dist[i] / (2.0 * c.T2);
    const HPoint z = g.center(i);
    const double reach = 0.25 * (r + rmax);
    g.unravel(i, ids);
    for (int k = 0; k < nx; ++k) {
      const int span = int(std::ceil(reach / g.spacing(k))) + 1;
      lo[k] = std::max(0, ids[k] - span);
      hi[k] = std::min(g.res[k] - 1, ids[k] + span);
      cur[k] = lo[k];
    }
    bool free = true;
    while (free) {
      for (std::size_t s : by_column[column_of(cur)]) {
        if (quasi_distance(cover.balls[s].center, z) < 0.25 * (cover.balls[s].radius + r)) {
          free = false;
          break;
        }
      }
      int k = 0;
      for (; k < nx; ++k) {
        if (++cur[k] <= hi[k]) break;
        cur[k] = lo[k];
      }
      if (k == nx) break;
    }
    if (!free) continue;
    by_column[column_of(ids)].push_back(cover.balls.size());
    cover.balls.push_back({z, r});
    cover.centers.push_back(i);
    cover.distances.push_back(dist[i]);
  }
  cover.check = verify_whitney(O, cover, max_overlap);
  return cover;
}

nlohmann::json DecompositionConfig::to_json() const {
  nlohmann::json j = {{"maximal", maximal.to_json()},
                      {"beta", beta},
                      {"close_window", close_window},
                      {"max_atoms", max_atoms},
                      {"max_levels", max_levels},
                      {"drop_rel", drop_rel},
                      {"moment_rel", tolerances.moment_rel},
                      {"size_rel", tolerances.size_rel}};
  j["j_min"] = j_min ? nlohmann::json(*j_min) : nlohmann::json(nullptr);
  j["j_max"] = j_max ? nlohmann::json(*j_max) : nlohmann::json(nullptr);
  return j;
}

Atom DecompositionTerm::to_atom(const GridSpec& grid, const OrliczSpec& phi, int m) const {
  Atom a;
  a.samples = GridFunction(grid);
  for (std::size_t s = 0; s < cells.size(); ++s) a.samples[cells[s]] = values[s];
  a.ball = ball;
  a.phi = phi;
  a.p0 = kInfinity;
  a.m = m;
  return a;
}

nlohmann::json LevelSummary::to_json() const {
  return {{"j", j},
          {"cells", cells},
          {"balls", balls},
          {"closing", closing},
          {"whitney", closing ? nlohmann::json(nullptr) : check.to_json()}};
}

GridFunction AtomicDecomposition::reconstruct() const {
  GridFunction out(grid);
  for (const auto& t : terms)
    for (std::size_t s = 0; s < t.cells.size(); ++s) out[t.cells[s]] += t.lambda * t.values[s];
  return out;
}

bool AtomicDecomposition::atoms_valid() const {
  return std::all_of(terms.begin(), terms.end(), [](const DecompositionTerm& t) { return t.validation.ok(); });
}

nlohmann::json AtomicDecomposition::manifest(const std::string& atom_prefix) const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& t : terms)
    out.push_back({{"j", t.j},
                   {"k", t.k},
                   {"lambda", t.lambda},
                   {"ball", {{"center", t.ball.center.to_vector()}, {"radius", t.ball.radius}}},
                   {"atom-ref", atom_prefix + "_" + std::to_string(t.j) + "_" + std::to_string(t.k)}});
  return out;
}

nlohmann::json AtomicDecomposition::summary() const {
  nlohmann::json lv = nlohmann::json::array();
  for (const auto& l : levels) lv.push_back(l.to_json());
  return {{"phi", {{"family", to_string(phi.family())}, {"params", phi.params()}}},
          {"m", m},
          {"constants", constants.to_json()},
          {"C", C},
          {"window", {window.lo, window.hi}},
          {"levels", lv},
          {"atoms", terms.size()},
          {"dropped", dropped},
          {"truncated", truncated},
          {"atoms_valid", atoms_valid()},
          {"f_l2", f_l2},
          {"residual_l2", residual_l2}};
}

namespace {

// One ball of a level: the partition function on its support and the weighted projector onto P_m.
struct LevelBall {
  HPoint center;
  double r = 0.0;
  std::vector<std::size_t> S;
  std::vector<double> zeta;
  std::vector<double> mono;  // |S| x nb
  Eigen::MatrixXd pinv;
  std::vector<double> fP;  // f - P on S
};

struct Level {
  int j = 0;
  bool closing = false;
  std::vector<LevelBall> balls;
  std::vector<std::size_t> start;  // cell -> balls whose support contains it (CSR)
  std::vector<int> ids;
};

class Projector {
 public:
  explicit Projector(int nb) : nb_(nb), rhs_(nb), c_(nb) {}

  // Coefficients of the zeta-weighted best fit of `data` (on B.S), with one refinement sweep.
  const Eigen::VectorXd& fit(const LevelBall& B, const std::vector<double>& data) {
    moments(B, data.data(), nullptr);
    c_ = B.pinv * rhs_;
    moments(B, data.data(), &c_);
    c_ += B.pinv * rhs_;
    return c_;
  }
  double eval(const LevelBall& B, std::size_t s, const Eigen::VectorXd& c) const {
    double v = 0.0;
    for (int a = 0; a < nb_; ++a) v += c[a] * B.mono[s * nb_ + a];
    return v;
  }

 private:
  void moments(const LevelBall& B, const double* data, const Eigen::VectorXd* c) {
    rhs_.setZero();
    for (std::size_t s = 0; s < B.S.size(); ++s) {
      const double v = c ? data[s] - eval(B, s, *c) : data[s];
      const double w = B.zeta[s] * v;
      if (w == 0.0) continue;
      for (int a = 0; a < nb_; ++a) rhs_[a] += w * B.mono[s * nb_ + a];
    }
  }
  int nb_;
  Eigen::VectorXd rhs_, c_;
};

void finish_ball(LevelBall& B, const GridFunction& f, const std::vector<MultiIndex>& basis, double local_radius,
                 Projector& proj) {
  const GridSpec& g = f.spec();
  const int nb = int(basis.size());
  B.mono.resize(B.S.size() * nb);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(nb, nb);
  for (std::size_t s = 0; s < B.S.size(); ++s) {
    const HPoint z = g.center(B.S[s]);
    double* mo = &B.mono[s * nb];
    local_monomials(basis, B.center, local_radius, z.coords().data(), mo);
    for (int a = 0; a < nb; ++a)
      for (int b = a; b < nb; ++b) G(a, b) += B.zeta[s] * mo[a] * mo[b];
  }
  for (int a = 0; a < nb; ++a)
    for (int b = 0; b < a; ++b) G(a, b) = G(b, a);
  B.pinv = G.completeOrthogonalDecomposition().pseudoInverse();
  std::vector<double> data(B.S.size());
  for (std::size_t s = 0; s < B.S.size(); ++s) data[s] = f[B.S[s]];
  const Eigen::VectorXd c = proj.fit(B, data);
  B.fP.resize(B.S.size());
  for (std::size_t s = 0; s < B.S.size(); ++s) B.fP[s] = data[s] - proj.eval(B, s, c);
}

void build_index(Level& L, std::size_t cells) {
  L.start.assign(cells + 1, 0);
  for (const auto& b : L.balls)
    for (std::size_t i : b.S) ++L.start[i + 1];
  for (std::size_t i = 0; i < cells; ++i) L.start[i + 1] += L.start[i];
  L.ids.resize(L.start.back());
  std::vector<std::size_t> fill(L.start.begin(), L.start.end() - 1);
  for (std::size_t k = 0; k < L.balls.size(); ++k)
    for (std::size_t i : L.balls[k].S) L.ids[fill[i]++] = int(k);
}

Level whitney_level(const GridFunction& f, const GridSet& O, int j, const WhitneyConstants& consts,
                    const std::vector<MultiIndex>& basis, LevelSummary& summary) {
  const GridSpec& g = f.spec();
  const WhitneyCover cover = whitney_cover(O, consts);
  summary.j = j;
  summary.cells = O.count();
  summary.balls = cover.balls.size();
  summary.check = cover.check;
  require(cover.check.ok(), ErrorKind::accuracy, "Whitney cover of level " + std::to_string(j) + " failed its checks");
  Level L;
  L.j = j;
  L.balls.resize(cover.balls.size());
  std::vector<double> psi_sum(g.size(), 0.0);
  for (std::size_t k = 0; k < cover.balls.size(); ++k) {
    LevelBall& B = L.balls[k];
    B.center = cover.balls[k].center;
    B.r = cover.balls[k].radius;
    for_each_cell_in_ball(g, KoranyiBall{B.center, 2.0 * B.r}, [&](std::size_t i) {
      const double p = partition_profile(quasi_distance(B.center, g.center(i)) / B.r);
      if (p > 0.0) {
        B.S.push_back(i);
        B.zeta.push_back(p);
        psi_sum[i] += p;
      }
      return true;
    });
  }
  Projector proj(int(basis.size()));
  for (auto& B : L.balls) {
    for (std::size_t s = 0; s < B.S.size(); ++s) B.zeta[s] /= psi_sum[B.S[s]];
    finish_ball(B, f, basis, 2.0 * B.r, proj);
  }
  build_index(L, g.size());
  return L;
}

struct RawTerm {
  int j, k;
  KoranyiBall ball;
  std::vector<std::size_t> cells;
  std::vector<double> h;
  double sup = 0.0;
};

// h_{j,k} = b_{j,k} - sum_l zeta_{j+1,l} [ (f - P_{j+1,l}) zeta_{j,k} - P_{k,l} ].
RawTerm assemble_h(const Level& cur, std::size_t k, const Level* next, const WhitneyConstants& consts,
                   Projector& proj, std::vector<double>& acc, std::vector<std::uint8_t>& touched_flag,
                   std::vector<double>& zk, std::vector<std::uint8_t>& seen) {
  const LevelBall& B = cur.balls[k];
  std::vector<std::size_t> touched;
  auto add = [&](std::size_t i, double v) {
    if (!touched_flag[i]) {
      touched_flag[i] = 1;
      touched.push_back(i);
    }
    acc[i] += v;
  };
  for (std::size_t s = 0; s < B.S.size(); ++s) {
    add(B.S[s], B.fP[s] * B.zeta[s]);
    zk[B.S[s]] = B.zeta[s];
  }
  if (next) {
    std::vector<int> ls;
    for (std::size_t i : B.S)
      for (std::size_t p = next->start[i]; p < next->start[i + 1]; ++p) {
        const int l = next->ids[p];
        if (!seen[l]) {
          seen[l] = 1;
          ls.push_back(l);
        }
      }
    std::sort(ls.begin(), ls.end());
    std::vector<double> data;
    for (int l : ls) {
      seen[l] = 0;
      const LevelBall& D = next->balls[l];
      data.resize(D.S.size());
      for (std::size_t s = 0; s < D.S.size(); ++s) data[s] = D.fP[s] * zk[D.S[s]];
      const Eigen::VectorXd& c = proj.fit(D, data);
      for (std::size_t s = 0; s < D.S.size(); ++s) add(D.S[s], -D.zeta[s] * (data[s] - proj.eval(D, s, c)));
    }
  }
  for (std::size_t i : B.S) zk[i] = 0.0;
  std::sort(touched.begin(), touched.end());
  RawTerm t{cur.j, int(k), KoranyiBall{B.center, cur.closing ? B.r : consts.T2 * B.r}, {}, {}, 0.0};
  t.cells = touched;
  t.h.reserve(touched.size());
  for (std::size_t i : touched) {
    t.h.push_back(acc[i]);
    t.sup = std::max(t.sup, std::abs(acc[i]));
    acc[i] = 0.0;
    touched_flag[i] = 0;
  }
  return t;
}

}  // namespace

AtomicDecomposition atomic_decompose(const GridFunction& f, const OrliczSpec& phi, int m,
                                     const DecompositionConfig& cfg) {
  return atomic_decompose(f, grand_maximal(f, cfg.maximal), phi, m, cfg);
}

AtomicDecomposition atomic_decompose(const GridFunction& f, const GridFunction& maximal, const OrliczSpec& phi,
                                     int m, const DecompositionConfig& cfg) {
  const GridSpec& g = f.spec();
  require(maximal.spec() == g, ErrorKind::configuration, "maximal function lives on a different grid");
  for (double v : f.values()) require(std::isfinite(v), ErrorKind::domain, "f must be bounded");
  require(m >= 0, ErrorKind::configuration, "moment order must be non-negative");
  if (phi.lower_index()) {
    const int mphi = critical_moment_order(phi, g.n);
    require(m >= mphi, ErrorKind::parameter,
            "moment order " + std::to_string(m) + " is below m_Phi = " + std::to_string(mphi));
  }
  AtomicDecomposition d;
  d.grid = g;
  d.phi = phi;
  d.m = m;
  d.constants = WhitneyConstants::make(1.0, cfg.beta, cfg.maximal.seminorm_order(g.n));
  d.maximal = maximal;
  d.f_l2 = f.lp_norm(2.0);
  d.window = level_window(maximal);
  if (cfg.j_min) d.window.lo = std::max(d.window.lo, *cfg.j_min);
  d.window.lo = std::max(d.window.lo, d.window.hi - cfg.max_levels + 1);
  const int top = d.window.hi;  // last level with a non-empty O_j
  if (cfg.j_max) d.window.hi = std::min(d.window.hi, *cfg.j_max);
  const double fsup = f.sup_norm();
  if (d.window.empty() || fsup == 0.0) {
    d.residual_l2 = d.f_l2;
    if (fsup == 0.0) d.residual_l2 = 0.0;
    return d;
  }

  const auto basis = monomial_basis(g.n, m);
  Projector proj(int(basis.size()));
  // Levels window.lo .. window.hi, plus window.hi + 1 when the window is clipped from above.
  const int last = std::min(top, d.window.hi + 1);
  std::vector<Level> levels;
  if (cfg.close_window) {
    Level L;
    L.j = d.window.lo - 1;
    L.closing = true;
    LevelBall B;
    B.center = box_center(g);
    double R = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) R = std::max(R, quasi_distance(B.center, g.center(i)));
    B.r = R * (1.0 + 1e-9);
    B.S.resize(g.size());
    std::iota(B.S.begin(), B.S.end(), std::size_t(0));
    B.zeta.assign(g.size(), 1.0);
    finish_ball(B, f, basis, B.r, proj);
    L.balls.push_back(std::move(B));
    build_index(L, g.size());
    LevelSummary s;
    s.j = L.j;
    s.cells = g.size();
    s.balls = 1;
    s.closing = true;
    d.levels.push_back(s);
    levels.push_back(std::move(L));
  }
  for (int j = d.window.lo; j <= last; ++j) {
    LevelSummary s;
    levels.push_back(whitney_level(f, GridSet::threshold(maximal, std::ldexp(1.0, j)), j, d.constants, basis, s));
    d.levels.push_back(s);
  }

  std::vector<double> acc(g.size(), 0.0), zk(g.size(), 0.0);
  std::vector<std::uint8_t> flag(g.size(), 0);
  std::vector<RawTerm> raw;
  for (std::size_t li = 0; li < levels.size(); ++li) {
    const Level& L = levels[li];
    if (L.j > d.window.hi) break;
    const Level* next = li + 1 < levels.size() ? &levels[li + 1] : nullptr;
    std::vector<std::uint8_t> seen(next ? next->balls.size() : 0, 0);
    for (std::size_t k = 0; k < L.balls.size(); ++k)
      raw.push_back(assemble_h(L, k, next, d.constants, proj, acc, flag, zk, seen));
  }

  for (const auto& t : raw) d.C = std::max(d.C, t.sup / std::ldexp(1.0, t.j));
  for (auto& t : raw) {
    if (t.sup <= cfg.drop_rel * fsup) {
      ++d.dropped;
      continue;
    }
    if (d.terms.size() >= cfg.max_atoms) {
      d.truncated = true;
      continue;
    }
    DecompositionTerm term;
    term.j = t.j;
    term.k = t.k;
    term.ball = t.ball;
    term.lambda = d.C * std::ldexp(1.0, t.j) * indicator_norm(ball_volume(t.ball.radius, g.n), phi);
    term.cells = std::move(t.cells);
    term.values.reserve(t.h.size());
    for (double v : t.h) term.values.push_back(v / term.lambda);
    term.validation = validate_atom(g, term.cells, term.values, term.ball, phi, kInfinity, m, cfg.tolerances);
    d.terms.push_back(std::move(term));
  }
  GridFunction r = d.reconstruct();
  for (std::size_t i = 0; i < g.size(); ++i) r[i] = f[i] - r[i];
  d.residual_l2 = r.lp_norm(2.0);
  return d;
}

double default_theta(const OrliczSpec& phi) {
  const auto i = phi.lower_index();
  require(i.has_value() && *i > 0.0, ErrorKind::configuration, "theta needs the lower index of " + phi.name());
  return std::min(1.0, *i) / 2.0;
}

double atomic_norm_functional(const AtomicDecomposition& d, double theta) {
  require(theta > 0.0 && theta <= 1.0, ErrorKind::parameter, "theta must lie in (0, 1]");
  std::vector<double> s(d.grid.size(), 0.0);
  for (const auto& t : d.terms) {
    const double v = std::pow(t.lambda / indicator_norm(ball_volume(t.ball.radius, d.grid.n), d.phi), theta);
    for_each_cell_in_ball(d.grid, t.ball, [&](std::size_t i) {
      s[i] += v;
      return true;
    });
  }
  for (double& v : s) v = std::pow(v, 1.0 / theta);
  return luxemburg_norm(s, d.grid.cell_volume(), d.phi);
}

InequalityReport atomic_norm_check(const AtomicDecomposition& d, double theta) {
  InequalityReport r;
  r.lhs = atomic_norm_functional(d, theta);
  r.rhs = luxemburg_norm(d.maximal, d.phi);
  r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : 0.0;
  r.config = {{"theta", theta}, {"atoms", d.terms.size()}, {"C", d.C}};
  return r;
}

InequalityReport max_on_atoms_check(const std::vector<Atom>& atoms, const std::vector<double>& k, double r,
                                    double theta, const MaximalConfig& cfg) {
  require(atoms.size() == k.size(), ErrorKind::configuration, "one coefficient per atom");
  require(!atoms.empty(), ErrorKind::configuration, "empty atom family");
  require(r >= 1.0, ErrorKind::parameter, "dilation factor r must be at least 1");
  require(theta > 0.0 && theta <= 1.0, ErrorKind::parameter, "theta must lie in (0, 1]");
  const GridSpec& g = atoms.front().samples.spec();
  const OrliczSpec& phi = atoms.front().phi;
  std::vector<double> lhs(g.size(), 0.0), rhs(g.size(), 0.0);
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    require(atoms[a].samples.spec() == g, ErrorKind::configuration, "atoms must share a grid");
    const GridFunction M = hl_maximal_field(atoms[a].samples, cfg);
    for_each_cell_in_ball(g, atoms[a].ball.dilated(r), [&](std::size_t i) {
      lhs[i] += k[a] * M[i];
      return true;
    });
    const double v = std::pow(k[a] / indicator_norm(ball_volume(atoms[a].ball.radius, g.n), phi), theta);
    for_each_cell_in_ball(g, atoms[a].ball, [&](std::size_t i) {
      rhs[i] += v;
      return true;
    });
  }
  for (double& v : rhs) v = std::pow(v, 1.0 / theta);
  InequalityReport rep;
  rep.lhs = luxemburg_norm(lhs, g.cell_volume(), phi);
  rep.rhs = luxemburg_norm(rhs, g.cell_volume(), phi);
  rep.ratio = rep.rhs > 0.0 ? rep.lhs / rep.rhs : 0.0;
  rep.config = {{"r", r}, {"theta", theta}, {"atoms", atoms.size()}, {"maximal", cfg.to_json()}};
  return rep;
}

void check_poisson_parameters(int n, const OrliczSpec& phi, double q) {
  check_n(n);
  const double Q = homogeneous_dimension(n);
  require(q > 1.0 && q < double(n + 1) / n, ErrorKind::parameter,
          "1 < q < (n+1)/n fails for q = " + std::to_string(q));
  const auto i = phi.lower_index(), I = phi.upper_index();
  require(i.has_value() && I.has_value() && std::isfinite(*I), ErrorKind::parameter,
          "i(Phi) <= I(Phi) < infinity needs known finite indices of " + phi.name());
  const double crit = Q / (2.0 + Q / q);
  require(crit < *i, ErrorKind::parameter,
          "Q (2 + Q/q)^{-1} < i(Phi) fails: " + std::to_string(crit) + " >= " + std::to_string(*i));
  require(*i <= *I, ErrorKind::parameter, "i(Phi) <= I(Phi) fails");
}

nlohmann::json PoissonConfig::to_json() const {
  return {{"solver", solver.to_json()},
          {"decomposition", decomposition.to_json()},
          {"gamma", gamma},
          {"battery", battery},
          {"norm_res", norm_res},
          {"seed", seed}};
}

nlohmann::json PoissonDiagnostics::to_json() const {
  return {{"weak_residual", weak_residual},
          {"norm_lhs", norm_lhs},
          {"norm_rhs", norm_rhs},
          {"ratio", ratio},
          {"reconstruction", reconstruction},
          {"atoms", atoms},
          {"converged", converged},
          {"pairings_F", pairings_F},
          {"pairings_f", pairings_f}};
}

std::vector<AlgebraicField> test_battery(const GridSpec& g, int count, std::uint64_t seed) {
  require(count >= 0, ErrorKind::configuration, "battery size must be non-negative");
  const int n = g.n, nx = 2 * n;
  double R = std::numeric_limits<double>::infinity();
  for (int k = 0; k < nx; ++k) R = std::min(R, 0.35 * (g.hi[k] - g.lo[k]));
  R = std::min(R, 0.35 * std::sqrt(g.hi[nx] - g.lo[nx]));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.25, 0.25);
  std::vector<AlgebraicField> out;
  int failures = 0;
  while (int(out.size()) < count) {
    HPoint c(n);
    for (int k = 0; k <= nx; ++k) c.coord(k) = 0.5 * (g.lo[k] + g.hi[k]) + u(rng) * (g.hi[k] - g.lo[k]);
    double cx = 0.0;
    for (int k = 0; k < nx; ++k) cx += c.x(k) * c.x(k);
    bool inside = c.t() - R * R - 2.0 * std::sqrt(cx) * R > g.lo[nx] && c.t() + R * R + 2.0 * std::sqrt(cx) * R < g.hi[nx];
    for (int k = 0; k < nx; ++k) inside = inside && c.x(k) - R > g.lo[k] && c.x(k) + R < g.hi[k];
    if (!inside) {
      if (++failures % 200 == 0) R *= 0.8;
      continue;
    }
    out.push_back(radial_bump(c, R, 5));
  }
  return out;
}

double weak_residual(const GridFunction& F, const GridFunction& f, const std::vector<AlgebraicField>& battery,
                     std::vector<double>* pair_F, std::vector<double>* pair_f) {
  require(F.spec() == f.spec(), ErrorKind::configuration, "F and f must share a grid");
  const GridSpec& g = f.spec();
  const double vol = g.cell_volume();
  const std::vector<double> c = g.centers();
  double num = 0.0, den = 0.0;
  for (const AlgebraicField& phi : battery) {
    const AlgebraicField lphi = sublaplacian(phi);
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double* z = &c[i * g.dim()];
      if (F[i] != 0.0) a += F[i] * lphi.evaluate(z);
      if (f[i] != 0.0) b += f[i] * phi.evaluate(z);
    }
    a *= vol;
    b *= vol;
    if (pair_F) pair_F->push_back(a);
    if (pair_f) pair_f->push_back(b);
    num += (a - b) * (a - b);
    den += b * b;
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

PoissonSolution solve_poisson(const GridFunction& f, const OrliczSpec& phi, double q, int m,
                              const PoissonConfig& cfg) {
  const GridSpec& g = f.spec();
  check_poisson_parameters(g.n, phi, q);
  SolverConfig sc = cfg.solver;
  sc.q = q;
  sc.validate(g.n);

  PoissonSolution sol;
  sol.decomposition = atomic_decompose(f, phi, m, cfg.decomposition);
  const AtomicDecomposition& d = sol.decomposition;
  PoissonDiagnostics& diag = sol.diagnostics;
  diag.atoms = d.terms.size();
  diag.reconstruction = d.f_l2 > 0.0 ? d.residual_l2 / d.f_l2 : 0.0;
  if (d.terms.empty()) {
    sol.F = GridFunction(g);
    diag.weak_residual = weak_residual(sol.F, f, test_battery(g, cfg.battery, cfg.seed), &diag.pairings_F,
                                       &diag.pairings_f);
    return sol;
  }
  // L F is the atomic sum; the potential is linear, so it is applied once to the sum.
  const GridFunction lf = d.reconstruct();
  sol.F = potential(lf, g, sc);
  diag.weak_residual =
      weak_residual(sol.F, f, test_battery(g, cfg.battery, cfg.seed), &diag.pairings_F, &diag.pairings_f);
  diag.norm_lhs = luxemburg_norm(grand_maximal(lf, cfg.decomposition.maximal), phi);
  const GridSpec coarse(g.n, g.lo, g.hi, std::vector<int>(g.dim(), cfg.norm_res));
  const CalderonNorm cn = calderon_hardy_norm(PolyClass::from_grid(sol.F), phi, q, cfg.gamma, coarse, sc);
  diag.norm_rhs = cn.norm;
  diag.converged = cn.converged;
  diag.ratio = diag.norm_rhs > 0.0 ? diag.norm_lhs / diag.norm_rhs : 0.0;
  return sol;
}

}  // namespace hh
