#include "spatsurv/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

#include "spatsurv/kernels.hpp"

namespace spatsurv {

namespace {

constexpr double kSnapEps = 1e-9;
constexpr double kPivotTol = 1e-11;

bool decided(double p) { return p == 0.0 || p == 1.0; }

// Balancing system in "cube" form: one row per retained balancing variable,
// one column per cluster, entries a_ri = d_ir / pi0_i. The flight preserves
// A * pi exactly, with pi0 the plan probabilities.
struct BalanceSystem {
  int h = 0;
  int m = 0;
  std::vector<double> a;  // h x m row-major

  double at(int r, int i) const { return a[static_cast<std::size_t>(r) * m + i]; }
};

BalanceSystem build_system(const InclusionPlan& plan, const std::vector<int>& rows) {
  BalanceSystem sys;
  sys.h = static_cast<int>(rows.size());
  sys.m = plan.clusters();
  sys.a.assign(static_cast<std::size_t>(sys.h) * sys.m, 0.0);
  for (int r = 0; r < sys.h; ++r) {
    for (int i = 0; i < sys.m; ++i) {
      const double pi0 = plan.pi[i];
      sys.a[static_cast<std::size_t>(r) * sys.m + i] =
          pi0 > 0.0 ? plan.balance_at(i, rows[r]) / pi0 : 0.0;
    }
  }
  return sys;
}

// Maximal independent subset of balancing columns, judged over the given
// units, preferring earlier columns (the fixed-size column is first and so
// always survives). Modified Gram-Schmidt.
std::vector<int> independent_rows(const InclusionPlan& plan,
                                  const std::vector<int>& units, bool warn) {
  std::vector<int> kept;
  if (units.empty()) return kept;
  std::vector<std::vector<double>> basis;
  for (int col = 0; col < plan.balance_cols; ++col) {
    std::vector<double> v(units.size());
    for (std::size_t k = 0; k < units.size(); ++k) {
      const int i = units[k];
      v[k] = plan.balance_at(i, col) / plan.pi[i];
    }
    double norm0 = 0.0;
    for (double x : v) norm0 += x * x;
    norm0 = std::sqrt(norm0);
    if (norm0 <= 1e-300) {
      if (warn)
        std::cerr << "spatsurv: dropping all-zero balancing column " << col << "\n";
      continue;
    }
    for (const auto& q : basis) {
      double dot = 0.0;
      for (std::size_t k = 0; k < v.size(); ++k) dot += q[k] * v[k];
      for (std::size_t k = 0; k < v.size(); ++k) v[k] -= dot * q[k];
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm <= 1e-10 * norm0) {
      if (warn)
        std::cerr << "spatsurv: dropping dependent balancing column " << col << "\n";
      continue;
    }
    for (double& x : v) x /= norm;
    basis.push_back(std::move(v));
    kept.push_back(col);
  }
  return kept;
}

// Nonzero u with B u = 0, where B is the h x k submatrix of `sys` on the
// given unit columns. Gaussian elimination with partial pivoting; returns
// false when the submatrix has full column rank.
bool null_vector(const BalanceSystem& sys, const std::vector<int>& units,
                 std::vector<double>& u) {
  const int h = sys.h;
  const int k = static_cast<int>(units.size());
  std::vector<double> b(static_cast<std::size_t>(h) * k);
  double scale = 1.0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < k; ++c) {
      const double x = sys.at(r, units[c]);
      b[static_cast<std::size_t>(r) * k + c] = x;
      scale = std::max(scale, std::abs(x));
    }
  }
  const double tol = kPivotTol * scale;

  std::vector<int> pivot_col;
  pivot_col.reserve(h);
  std::vector<char> is_pivot(k, 0);
  int pr = 0;
  for (int c = 0; c < k && pr < h; ++c) {
    int best = -1;
    double bv = tol;
    for (int r = pr; r < h; ++r) {
      const double x = std::abs(b[static_cast<std::size_t>(r) * k + c]);
      if (x > bv) {
        bv = x;
        best = r;
      }
    }
    if (best < 0) continue;  // free column
    if (best != pr) {
      for (int c2 = 0; c2 < k; ++c2)
        std::swap(b[static_cast<std::size_t>(best) * k + c2],
                  b[static_cast<std::size_t>(pr) * k + c2]);
    }
    const double piv = b[static_cast<std::size_t>(pr) * k + c];
    for (int r = pr + 1; r < h; ++r) {
      const double f = b[static_cast<std::size_t>(r) * k + c] / piv;
      if (f == 0.0) continue;
      for (int c2 = c; c2 < k; ++c2)
        b[static_cast<std::size_t>(r) * k + c2] -= f * b[static_cast<std::size_t>(pr) * k + c2];
    }
    pivot_col.push_back(c);
    is_pivot[c] = 1;
    ++pr;
  }

  int free_col = -1;
  for (int c = 0; c < k; ++c) {
    if (!is_pivot[c]) {
      free_col = c;
      break;
    }
  }
  if (free_col < 0) return false;

  u.assign(k, 0.0);
  u[free_col] = 1.0;
  for (int r = pr - 1; r >= 0; --r) {
    const int c = pivot_col[r];
    double s = 0.0;
    for (int c2 = c + 1; c2 < k; ++c2)
      s += b[static_cast<std::size_t>(r) * k + c2] * u[c2];
    u[c] = -s / b[static_cast<std::size_t>(r) * k + c];
  }
  return true;
}

// One martingale step along u restricted to `units`: move to whichever face
// of the cube the direction hits, with probabilities that keep E[pi]
// unchanged. Decided coordinates are written as exact 0/1.
void flight_step(std::vector<double>& pi, const std::vector<int>& units,
                 const std::vector<double>& u, Rng& rng) {
  double l_up = std::numeric_limits<double>::infinity();
  double l_dn = std::numeric_limits<double>::infinity();
  int lim_up = -1, lim_dn = -1;
  double bound_up = 0.0, bound_dn = 0.0;
  for (std::size_t j = 0; j < units.size(); ++j) {
    const double uj = u[j];
    const double pj = pi[units[j]];
    if (uj > 0.0) {
      if ((1.0 - pj) / uj < l_up) { l_up = (1.0 - pj) / uj; lim_up = static_cast<int>(j); bound_up = 1.0; }
      if (pj / uj < l_dn) { l_dn = pj / uj; lim_dn = static_cast<int>(j); bound_dn = 0.0; }
    } else if (uj < 0.0) {
      if (pj / -uj < l_up) { l_up = pj / -uj; lim_up = static_cast<int>(j); bound_up = 0.0; }
      if ((1.0 - pj) / -uj < l_dn) { l_dn = (1.0 - pj) / -uj; lim_dn = static_cast<int>(j); bound_dn = 1.0; }
    }
  }
  if (lim_up < 0 || lim_dn < 0) return;  // u vanished on these units

  const bool up = rng.uniform() < l_dn / (l_up + l_dn);
  const double lambda = up ? l_up : -l_dn;
  for (std::size_t j = 0; j < units.size(); ++j)
    pi[units[j]] += lambda * u[j];
  // The limiting coordinate lands on its face by construction; write the
  // face exactly and snap any other coordinate that rounding left nearby.
  pi[units[up ? lim_up : lim_dn]] = up ? bound_up : bound_dn;
  for (int i : units) {
    if (pi[i] < kSnapEps) pi[i] = 0.0;
    else if (pi[i] > 1.0 - kSnapEps) pi[i] = 1.0;
  }
}

// Flight pass: consume the (pre-shuffled) pool of fractional units through a
// working set of at most h+1 columns, stepping until no null direction is
// left. Returns with all but at most h of the pool decided.
void flight_pass(std::vector<double>& pi, const BalanceSystem& sys,
                 std::vector<int> pool, Rng& rng) {
  std::vector<int> workset;
  std::vector<double> u;
  const std::size_t target = static_cast<std::size_t>(sys.h) + 1;
  std::reverse(pool.begin(), pool.end());  // pop_back consumes in shuffle order
  while (true) {
    while (workset.size() < target && !pool.empty()) {
      workset.push_back(pool.back());
      pool.pop_back();
    }
    if (workset.size() < 2) break;
    if (!null_vector(sys, workset, u)) break;
    flight_step(pi, workset, u, rng);
    workset.erase(std::remove_if(workset.begin(), workset.end(),
                                 [&](int i) { return decided(pi[i]); }),
                  workset.end());
  }
}

std::vector<int> fractional_units(const std::vector<double>& pi) {
  std::vector<int> out;
  for (std::size_t i = 0; i < pi.size(); ++i)
    if (!decided(pi[i])) out.push_back(static_cast<int>(i));
  return out;
}

void shuffle(std::vector<int>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[rng.uniform_int(0, static_cast<std::int64_t>(i) - 1)]);
}

void validate_plan(const InclusionPlan& plan, bool need_coords) {
  const int m = plan.clusters();
  if (m == 0) throw std::invalid_argument("plan: no clusters");
  if (plan.balance_cols < 1 ||
      plan.balance.size() != static_cast<std::size_t>(m) * plan.balance_cols)
    throw std::invalid_argument("plan: balance matrix shape mismatch");
  for (double p : plan.pi)
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("plan: inclusion probabilities must lie in [0, 1]");
  if (need_coords &&
      (plan.cx.size() != static_cast<std::size_t>(m) ||
       plan.cy.size() != static_cast<std::size_t>(m)))
    throw std::invalid_argument("plan: cluster coordinates required for local designs");
}

// Shared landing core, starting from a (possibly partial) flight result.
std::vector<int> land(std::vector<double> pi, const InclusionPlan& plan, Rng& rng) {
  std::vector<int> frac = fractional_units(pi);
  if (!frac.empty()) {
    std::vector<int> rows = independent_rows(plan, frac, false);
    while (true) {
      if (frac.empty()) break;
      if (!rows.empty()) {
        const BalanceSystem sys = build_system(plan, rows);
        shuffle(frac, rng);
        flight_pass(pi, sys, frac, rng);
        frac = fractional_units(pi);
        if (frac.empty()) break;
        rows.pop_back();  // suppress the lowest-priority surviving variable
      } else {
        // No balancing variables left. Snap parity leftovers, then resolve
        // anything genuinely fractional (non-integral expected size) by
        // independent coin flips.
        for (int i : frac) {
          if (pi[i] < 1e-6) pi[i] = 0.0;
          else if (pi[i] > 1.0 - 1e-6) pi[i] = 1.0;
          else pi[i] = rng.bernoulli(pi[i]) ? 1.0 : 0.0;
        }
        break;
      }
    }
  }
  std::vector<int> selected;
  for (std::size_t i = 0; i < pi.size(); ++i)
    if (pi[i] == 1.0) selected.push_back(static_cast<int>(i));
  return selected;
}

// k nearest units to `center` among `candidates` (excluding it), squared
// distances taken from d2; boundary ties resolved uniformly at random.
std::vector<int> k_nearest(const std::vector<int>& candidates, int center, int k,
                           const std::vector<double>& d2, Rng& rng) {
  // k-th smallest distance via a small descending heap of the k best values.
  std::vector<double> best(static_cast<std::size_t>(k),
                           std::numeric_limits<double>::infinity());
  for (int i : candidates) {
    if (i == center) continue;
    const double d = d2[i];
    if (d < best[0]) {
      best[0] = d;
      for (std::size_t j = 1; j < best.size() && best[j - 1] < best[j]; ++j)
        std::swap(best[j - 1], best[j]);
    }
  }
  const double boundary = best[0];
  std::vector<int> strict, ties;
  for (int i : candidates) {
    if (i == center) continue;
    if (d2[i] < boundary) strict.push_back(i);
    else if (d2[i] == boundary) ties.push_back(i);
  }
  const int need = k - static_cast<int>(strict.size());
  shuffle(ties, rng);
  strict.insert(strict.end(), ties.begin(), ties.begin() + need);
  return strict;
}

}  // namespace

const char* design_name(DesignKind kind) {
  switch (kind) {
    case DesignKind::fpps: return "fpps";
    case DesignKind::cbv: return "cbv";
    case DesignKind::lp: return "lp";
    case DesignKind::lcbv: return "lcbv";
    case DesignKind::lcbg: return "lcbg";
    case DesignKind::lcbvg: return "lcbvg";
  }
  return "?";
}

DesignKind design_from_name(const std::string& name) {
  for (DesignKind k : {DesignKind::fpps, DesignKind::cbv, DesignKind::lp,
                       DesignKind::lcbv, DesignKind::lcbg, DesignKind::lcbvg}) {
    if (name == design_name(k)) return k;
  }
  throw std::invalid_argument("unknown design: " + name);
}

std::vector<double> pps_probabilities(std::span<const std::int64_t> counts, int m) {
  const int n = static_cast<int>(counts.size());
  if (m < 1) throw std::invalid_argument("pps: m must be at least 1");
  int nonempty = 0;
  for (std::int64_t c : counts) {
    if (c < 0) throw std::invalid_argument("pps: negative cluster count");
    if (c > 0) ++nonempty;
  }
  if (m > nonempty)
    throw std::invalid_argument("pps: m exceeds the number of non-empty clusters");

  std::vector<double> pi(n, 0.0);
  std::vector<char> capped(n, 0);
  int remaining = m;
  while (true) {
    double total = 0.0;
    for (int i = 0; i < n; ++i)
      if (!capped[i]) total += static_cast<double>(counts[i]);
    bool newly_capped = false;
    for (int i = 0; i < n; ++i) {
      if (capped[i]) continue;
      pi[i] = total > 0.0 ? remaining * static_cast<double>(counts[i]) / total : 0.0;
      if (pi[i] > 1.0) {
        pi[i] = 1.0;
        capped[i] = 1;
        --remaining;
        newly_capped = true;
      }
    }
    if (!newly_capped) break;
  }
  return pi;
}

InclusionPlan make_design(DesignKind kind, const FrameSnapshot& frame, int m,
                          int n_bar, const DesignOptions& options) {
  if (n_bar < 1) throw std::invalid_argument("make_design: n_bar must be at least 1");
  const int cells = static_cast<int>(frame.cells.size());
  std::vector<std::int64_t> counts(cells);
  for (int i = 0; i < cells; ++i) counts[i] = frame.n_i[i];

  InclusionPlan plan;
  plan.pi = pps_probabilities(counts, m);
  plan.expected_size = 0.0;
  for (double p : plan.pi) plan.expected_size += p;

  plan.cx.resize(cells);
  plan.cy.resize(cells);
  for (int i = 0; i < cells; ++i) {
    plan.cx[i] = frame.grid.centroid_x(i);
    plan.cy[i] = frame.grid.centroid_y(i);
  }

  const bool with_v = kind == DesignKind::cbv || kind == DesignKind::lcbv ||
                      kind == DesignKind::lcbvg;
  const bool with_geo = kind == DesignKind::lcbg || kind == DesignKind::lcbvg;

  std::vector<std::vector<double>> cols;
  cols.emplace_back(plan.pi);  // fixed-size column
  if (with_v) {
    std::vector<double> v(cells);
    for (int i = 0; i < cells; ++i) v[i] = frame.v_i[i];
    cols.push_back(std::move(v));
  }
  if (with_geo) {
    cols.emplace_back(plan.cx);
    cols.emplace_back(plan.cy);
    if (options.geo_quadratic) {
      std::vector<double> xx(cells), yy(cells), xy(cells);
      for (int i = 0; i < cells; ++i) {
        xx[i] = plan.cx[i] * plan.cx[i];
        yy[i] = plan.cy[i] * plan.cy[i];
        xy[i] = plan.cx[i] * plan.cy[i];
      }
      cols.push_back(std::move(xx));
      cols.push_back(std::move(yy));
      cols.push_back(std::move(xy));
    }
  }

  plan.balance_cols = static_cast<int>(cols.size());
  plan.balance.resize(static_cast<std::size_t>(cells) * plan.balance_cols);
  for (int i = 0; i < cells; ++i)
    for (int c = 0; c < plan.balance_cols; ++c)
      plan.balance[static_cast<std::size_t>(i) * plan.balance_cols + c] = cols[c][i];
  return plan;
}

std::vector<double> cube_flight(const InclusionPlan& plan, Rng& rng) {
  validate_plan(plan, false);
  std::vector<double> pi = plan.pi;
  std::vector<int> frac = fractional_units(pi);
  if (frac.empty()) return pi;
  const std::vector<int> rows = independent_rows(plan, frac, true);
  const BalanceSystem sys = build_system(plan, rows);
  shuffle(frac, rng);
  flight_pass(pi, sys, frac, rng);
  return pi;
}

std::vector<int> cube_landing(std::span<const double> flight_pi,
                              const InclusionPlan& plan, Rng& rng) {
  validate_plan(plan, false);
  if (flight_pi.size() != plan.pi.size())
    throw std::invalid_argument("cube_landing: size mismatch");
  std::vector<double> pi(flight_pi.begin(), flight_pi.end());
  for (double p : pi)
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("cube_landing: probabilities must lie in [0, 1]");
  return land(std::move(pi), plan, rng);
}

std::vector<int> local_pivotal(const InclusionPlan& plan, Rng& rng, bool mutual_nearest) {
  validate_plan(plan, true);
  const int m = plan.clusters();
  std::vector<double> pi = plan.pi;

  std::vector<int> undecided = fractional_units(pi);
  std::vector<int> pos(m, -1);
  for (std::size_t k = 0; k < undecided.size(); ++k) pos[undecided[k]] = static_cast<int>(k);
  std::vector<std::uint8_t> active(m, 0);
  for (int i : undecided) active[i] = 1;

  std::vector<double> d2(m), d2b(m);
  std::vector<int> ties;

  auto retire = [&](int i) {
    active[i] = 0;
    const int p = pos[i];
    const int last = undecided.back();
    undecided[p] = last;
    pos[last] = p;
    undecided.pop_back();
    pos[i] = -1;
  };

  while (undecided.size() >= 2) {
    const int i = undecided[rng.uniform_int(0, static_cast<std::int64_t>(undecided.size()) - 1)];
    active[i] = 0;
    kern::dist2_to_point(plan.cx, plan.cy, plan.cx[i], plan.cy[i], d2);
    const double dmin = kern::masked_min(d2, active);
    ties.clear();
    for (int c : undecided)
      if (c != i && d2[c] == dmin) ties.push_back(c);
    const int j = ties[ties.size() == 1
                           ? 0
                           : rng.uniform_int(0, static_cast<std::int64_t>(ties.size()) - 1)];
    active[i] = 1;

    if (mutual_nearest) {
      active[j] = 0;
      kern::dist2_to_point(plan.cx, plan.cy, plan.cx[j], plan.cy[j], d2b);
      const double dmin_j = kern::masked_min(d2b, active);
      active[j] = 1;
      if (d2[j] != dmin_j) continue;  // i is not a nearest neighbor of j
    }

    // Pivotal duel: shift the pair's probability mass until one unit lands
    // on a face; the winner-probabilities keep both marginals intact.
    const double s = pi[i] + pi[j];
    if (s < 1.0) {
      if (rng.uniform() < pi[j] / s) {
        pi[i] = 0.0;
        pi[j] = s;
      } else {
        pi[i] = s;
        pi[j] = 0.0;
      }
    } else {
      if (rng.uniform() < (1.0 - pi[j]) / (2.0 - s)) {
        pi[i] = 1.0;
        pi[j] = s - 1.0;
      } else {
        pi[i] = s - 1.0;
        pi[j] = 1.0;
      }
    }
    if (decided(pi[i])) retire(i);
    if (decided(pi[j])) retire(j);
  }

  if (undecided.size() == 1) {
    const int i = undecided[0];
    pi[i] = rng.bernoulli(pi[i]) ? 1.0 : 0.0;
  }

  std::vector<int> selected;
  for (int i = 0; i < m; ++i)
    if (pi[i] == 1.0) selected.push_back(i);
  return selected;
}

std::vector<int> local_cube(const InclusionPlan& plan, Rng& rng) {
  validate_plan(plan, true);
  const int m = plan.clusters();
  std::vector<double> pi = plan.pi;

  std::vector<int> undecided = fractional_units(pi);
  const std::vector<int> rows = independent_rows(plan, undecided, true);
  const BalanceSystem sys = build_system(plan, rows);
  const int h = static_cast<int>(rows.size());

  std::vector<int> pos(m, -1);
  for (std::size_t k = 0; k < undecided.size(); ++k) pos[undecided[k]] = static_cast<int>(k);
  auto retire = [&](int i) {
    const int p = pos[i];
    const int last = undecided.back();
    undecided[p] = last;
    pos[last] = p;
    undecided.pop_back();
    pos[i] = -1;
  };

  std::vector<double> d2(m), u;
  std::vector<int> workset;
  while (static_cast<int>(undecided.size()) >= h + 1 && h >= 1) {
    const int i = undecided[rng.uniform_int(0, static_cast<std::int64_t>(undecided.size()) - 1)];
    kern::dist2_to_point(plan.cx, plan.cy, plan.cx[i], plan.cy[i], d2);
    workset = k_nearest(undecided, i, h, d2, rng);
    workset.push_back(i);
    if (!null_vector(sys, workset, u)) break;  // cannot happen: h+1 columns
    flight_step(pi, workset, u, rng);
    for (int c : workset)
      if (decided(pi[c])) retire(c);
  }
  return land(std::move(pi), plan, rng);
}

std::vector<int> draw_first_stage(const InclusionPlan& plan, DesignKind kind,
                                  Rng& rng, const DesignOptions& options) {
  switch (kind) {
    case DesignKind::fpps:
    case DesignKind::cbv: {
      const std::vector<double> fl = cube_flight(plan, rng);
      return cube_landing(fl, plan, rng);
    }
    case DesignKind::lp:
      return local_pivotal(plan, rng, options.mutual_nearest);
    case DesignKind::lcbv:
    case DesignKind::lcbg:
    case DesignKind::lcbvg:
      return local_cube(plan, rng);
  }
  throw std::invalid_argument("draw_first_stage: unknown design");
}

std::vector<int> second_stage_srswor(const FrameSnapshot& frame, int cluster,
                                     int n_bar, Rng& rng) {
  if (cluster < 0 || cluster >= static_cast<int>(frame.cells.size()))
    throw std::invalid_argument("second_stage: cluster out of range");
  const int n = frame.n_i[cluster];
  if (n == 0) throw std::invalid_argument("second_stage: cluster has no residents");
  if (n_bar < 1) throw std::invalid_argument("second_stage: n_bar must be at least 1");
  return sample_without_replacement(n, std::min(n_bar, n), rng);
}

SampleDraw draw_two_stage(const InclusionPlan& plan, DesignKind kind,
                          const FrameSnapshot& frame, int n_bar, Rng& rng,
                          const DesignOptions& options) {
  SampleDraw draw;
  draw.clusters = draw_first_stage(plan, kind, rng, options);
  draw.w_first.reserve(draw.clusters.size());
  draw.persons.reserve(draw.clusters.size());
  draw.w_second.reserve(draw.clusters.size());
  for (int c : draw.clusters) {
    draw.w_first.push_back(1.0 / plan.pi[c]);
    std::vector<int> ps = second_stage_srswor(frame, c, n_bar, rng);
    draw.w_second.push_back(static_cast<double>(frame.n_i[c]) /
                            static_cast<double>(ps.size()));
    draw.persons.push_back(std::move(ps));
  }
  return draw;
}

InclusionEstimate estimate_inclusion(const InclusionPlan& plan, DesignKind kind,
                                     int draws, std::uint64_t seed,
                                     bool want_joint, const DesignOptions& options) {
  if (draws < 1) throw std::invalid_argument("estimate_inclusion: draws must be positive");
  const int m = plan.clusters();
  InclusionEstimate est;
  est.draws = draws;
  est.first.assign(m, 0.0);
  if (want_joint) est.joint.assign(static_cast<std::size_t>(m) * m, 0.0);

  for (int r = 0; r < draws; ++r) {
    Rng rng(derive_seed(seed, "inclusion", static_cast<std::uint64_t>(r)));
    const std::vector<int> sel = draw_first_stage(plan, kind, rng, options);
    for (std::size_t a = 0; a < sel.size(); ++a) {
      est.first[sel[a]] += 1.0;
      if (want_joint) {
        for (std::size_t b = 0; b < sel.size(); ++b)
          est.joint[static_cast<std::size_t>(sel[a]) * m + sel[b]] += 1.0;
      }
    }
  }
  const double inv = 1.0 / draws;
  for (double& f : est.first) f *= inv;
  for (double& f : est.joint) f *= inv;
  return est;
}

}  // namespace spatsurv
