#include "simplex.hpp"

#include <algorithm>
#include <cmath>

namespace ctax::milp::detail {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kDropTol = 1e-14;
constexpr double kWideArtificial = 1e7;
constexpr int kDegenerateLimit = 50;
constexpr int kRefreshInterval = 200;

}  // namespace

BoundedSimplex::BoundedSimplex(const MilpProblem& p,
                               double feasibility_tolerance)
    : m_(p.num_rows()),
      n_(p.num_vars()),
      N_(n_ + m_),
      problem_(&p),
      ptol_(feasibility_tolerance) {
  cost_.assign(N_, 0.0);
  double cmax = 1.0;
  for (int j = 0; j < n_; ++j) {
    cost_[j] = p.objective()[j];
    cmax = std::max(cmax, std::abs(cost_[j]));
  }
  dtol_ = 1e-9 * cmax;

  lo_.resize(N_);
  hi_.resize(N_);
  for (int j = 0; j < n_; ++j) {
    lo_[j] = p.lower()[j];
    hi_[j] = p.upper()[j];
  }
  for (int r = 0; r < m_; ++r) {
    lo_[n_ + r] = p.rows()[r].lower();
    hi_[n_ + r] = p.rows()[r].upper();
  }
  wlo_ = lo_;
  whi_ = hi_;

  x_.assign(N_, 0.0);
  for (int j = 0; j < n_; ++j) {
    if (std::isfinite(lo_[j])) {
      x_[j] = lo_[j];
    } else if (std::isfinite(hi_[j])) {
      x_[j] = hi_[j];
    }
  }
  reset_tableau();
  recompute_basics();
}

void BoundedSimplex::reset_tableau() {
  tab_.assign(static_cast<std::size_t>(m_) * N_, 0.0);
  head_.assign(m_, 0);
  where_.assign(N_, -1);
  for (int r = 0; r < m_; ++r) {
    for (const auto& t : problem_->rows()[r].terms) at(r, t.col) -= t.coef;
    at(r, n_ + r) = 1.0;
    head_[r] = n_ + r;
    where_[n_ + r] = r;
  }
  d_ = cost_;
  since_reinvert_ = 0;
}

void BoundedSimplex::recompute_basics() {
  for (int i = 0; i < m_; ++i) {
    const double* row = &tab_[static_cast<std::size_t>(i) * N_];
    double s = 0.0;
    for (int j = 0; j < N_; ++j) {
      if (row[j] != 0.0 && where_[j] < 0) s += row[j] * x_[j];
    }
    x_[head_[i]] = -s;
  }
}

void BoundedSimplex::reinvert() {
  const std::vector<int> old_head = head_;
  std::vector<char> wanted(N_, 0);
  for (int v : old_head) wanted[v] = 1;
  reset_tableau();

  std::vector<int> structural;
  for (int v : old_head) {
    if (v < n_) structural.push_back(v);
  }
  std::sort(structural.begin(), structural.end());
  for (int v : structural) {
    int best = -1;
    double best_abs = kPivotTol;
    for (int i = 0; i < m_; ++i) {
      const int h = head_[i];
      if (h < n_ || wanted[h]) continue;
      const double a = std::abs(at(i, v));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (best >= 0) pivot(best, v);
  }
  for (int j = 0; j < N_; ++j) {
    if (where_[j] < 0) x_[j] = std::clamp(x_[j], wlo_[j], whi_[j]);
  }
  recompute_basics();
  since_reinvert_ = 0;
}

void BoundedSimplex::pivot(int r, int q) {
  double* R = &tab_[static_cast<std::size_t>(r) * N_];
  const double inv = 1.0 / R[q];
  nz_.clear();
  for (int k = 0; k < N_; ++k) {
    if (R[k] == 0.0) continue;
    R[k] *= inv;
    if (std::abs(R[k]) < kDropTol) {
      R[k] = 0.0;
    } else {
      nz_.push_back(k);
    }
  }
  R[q] = 1.0;
  for (int i = 0; i < m_; ++i) {
    if (i == r) continue;
    double* T = &tab_[static_cast<std::size_t>(i) * N_];
    const double f = T[q];
    if (f == 0.0) continue;
    for (int k : nz_) T[k] -= f * R[k];
    T[q] = 0.0;
  }
  const double f = d_[q];
  if (f != 0.0) {
    for (int k : nz_) d_[k] -= f * R[k];
  }
  d_[q] = 0.0;
  const int leave = head_[r];
  where_[leave] = -1;
  head_[r] = q;
  where_[q] = r;
  ++since_reinvert_;
}

void BoundedSimplex::move_nonbasic(int j, double value) {
  const double delta = value - x_[j];
  if (delta == 0.0) return;
  for (int i = 0; i < m_; ++i) {
    const double a = at(i, j);
    if (a != 0.0) x_[head_[i]] -= a * delta;
  }
  x_[j] = value;
}

void BoundedSimplex::set_bounds(int j, double lower, double upper) {
  lo_[j] = lower;
  hi_[j] = upper;
  wlo_[j] = lower;
  whi_[j] = upper;
}

bool BoundedSimplex::place_nonbasics(bool wide_artificials) {
  bool used = false;
  for (int j = 0; j < N_; ++j) {
    wlo_[j] = lo_[j];
    whi_[j] = hi_[j];
    if (where_[j] >= 0) continue;
    const double l = lo_[j];
    const double u = hi_[j];
    const double v = x_[j];
    double target = v;
    if (l == u) {
      target = l;
    } else if (d_[j] > dtol_) {
      if (std::isfinite(l)) {
        target = l;
      } else {
        double a = std::min(v, u);
        if (wide_artificials) a -= kWideArtificial;
        wlo_[j] = a;
        target = a;
        used = true;
      }
    } else if (d_[j] < -dtol_) {
      if (std::isfinite(u)) {
        target = u;
      } else {
        double a = std::max(v, l);
        if (wide_artificials) a += kWideArtificial;
        whi_[j] = a;
        target = a;
        used = true;
      }
    } else {
      target = std::clamp(v, l, u);
    }
    move_nonbasic(j, target);
  }
  artificial_ = used;
  return used;
}

void BoundedSimplex::drop_artificials() {
  wlo_ = lo_;
  whi_ = hi_;
  artificial_ = false;
}

bool BoundedSimplex::primal_infeasible() const {
  for (int i = 0; i < m_; ++i) {
    const int j = head_[i];
    if (x_[j] < wlo_[j] - ptol_ || x_[j] > whi_[j] + ptol_) return true;
  }
  return false;
}

double BoundedSimplex::row_residual() const {
  double worst = 0.0;
  for (int r = 0; r < m_; ++r) {
    const double a = problem_->row_activity(r, x_);
    const double scale = 1.0 + std::abs(a);
    worst = std::max(worst, std::abs(a - x_[n_ + r]) / scale);
  }
  return worst;
}

BoundedSimplex::Step BoundedSimplex::dual_iteration(bool bland) {
  int r = -1;
  double best = 0.0;
  for (int i = 0; i < m_; ++i) {
    const int j = head_[i];
    double inf = 0.0;
    if (x_[j] < wlo_[j] - ptol_) {
      inf = wlo_[j] - x_[j];
    } else if (x_[j] > whi_[j] + ptol_) {
      inf = x_[j] - whi_[j];
    }
    if (inf <= 0.0) continue;
    if (bland) {
      if (r < 0 || j < head_[r]) r = i;
    } else if (inf > best) {
      best = inf;
      r = i;
    }
  }
  if (r < 0) return Step::done;

  const int leave = head_[r];
  const bool to_lower = x_[leave] < wlo_[leave];
  const double target = to_lower ? wlo_[leave] : whi_[leave];
  const double* R = &tab_[static_cast<std::size_t>(r) * N_];

  // Candidates move x_leave toward its violated bound; the ratio is the dual
  // step at which the candidate's reduced cost reaches zero.
  auto signed_cost = [&](int j, double alpha, double& out) {
    const int dir = to_lower ? (alpha < 0 ? 1 : -1) : (alpha > 0 ? 1 : -1);
    if (dir > 0 && !(x_[j] < whi_[j])) return false;
    if (dir < 0 && !(x_[j] > wlo_[j])) return false;
    out = dir * d_[j];
    return true;
  };

  int q = -1;
  if (bland) {
    double best_ratio = kInf;
    for (int j = 0; j < N_; ++j) {
      if (where_[j] >= 0 || wlo_[j] == whi_[j]) continue;
      const double alpha = R[j];
      if (std::abs(alpha) < kPivotTol) continue;
      double dc;
      if (!signed_cost(j, alpha, dc)) continue;
      const double ratio = std::max(dc, 0.0) / std::abs(alpha);
      if (ratio < best_ratio) {
        best_ratio = ratio;
        q = j;
      }
    }
  } else {
    double theta_max = kInf;
    for (int j = 0; j < N_; ++j) {
      if (where_[j] >= 0 || wlo_[j] == whi_[j]) continue;
      const double alpha = R[j];
      if (std::abs(alpha) < kPivotTol) continue;
      double dc;
      if (!signed_cost(j, alpha, dc)) continue;
      theta_max = std::min(theta_max, (std::max(dc, 0.0) + dtol_) / std::abs(alpha));
    }
    if (theta_max == kInf) return Step::blocked;
    double best_alpha = 0.0;
    for (int j = 0; j < N_; ++j) {
      if (where_[j] >= 0 || wlo_[j] == whi_[j]) continue;
      const double alpha = R[j];
      if (std::abs(alpha) < kPivotTol) continue;
      double dc;
      if (!signed_cost(j, alpha, dc)) continue;
      const double ratio = std::max(dc, 0.0) / std::abs(alpha);
      if (ratio <= theta_max && std::abs(alpha) > best_alpha) {
        best_alpha = std::abs(alpha);
        q = j;
      }
    }
  }
  if (q < 0) return Step::blocked;

  const double alpha = R[q];
  const double delta = (x_[leave] - target) / alpha;
  for (int i = 0; i < m_; ++i) {
    const double a = at(i, q);
    if (a != 0.0) x_[head_[i]] -= a * delta;
  }
  x_[q] += delta;
  x_[leave] = target;
  pivot(r, q);
  return Step::progress;
}

BoundedSimplex::Step BoundedSimplex::primal_iteration(bool bland) {
  int q = -1;
  int dir = 0;
  double best = 0.0;
  for (int j = 0; j < N_; ++j) {
    if (where_[j] >= 0 || wlo_[j] == whi_[j]) continue;
    const double dj = d_[j];
    int jdir = 0;
    if (dj < -dtol_ && x_[j] < whi_[j]) {
      jdir = 1;
    } else if (dj > dtol_ && x_[j] > wlo_[j]) {
      jdir = -1;
    }
    if (jdir == 0) continue;
    if (bland) {
      q = j;
      dir = jdir;
      break;
    }
    if (std::abs(dj) > best) {
      best = std::abs(dj);
      q = j;
      dir = jdir;
    }
  }
  if (q < 0) return Step::done;

  const double flip = dir > 0 ? whi_[q] - x_[q] : x_[q] - wlo_[q];

  auto exact_ratio = [&](int i, double rate) {
    const int b = head_[i];
    if (rate > 0) return std::max(0.0, (whi_[b] - x_[b]) / rate);
    return std::max(0.0, (x_[b] - wlo_[b]) / -rate);
  };

  int r = -1;
  double step = kInf;
  if (bland) {
    for (int i = 0; i < m_; ++i) {
      const double alpha = at(i, q);
      if (std::abs(alpha) < kPivotTol) continue;
      const double rate = -dir * alpha;
      const int b = head_[i];
      if (rate > 0 && !std::isfinite(whi_[b])) continue;
      if (rate < 0 && !std::isfinite(wlo_[b])) continue;
      const double ratio = exact_ratio(i, rate);
      if (ratio < step || (ratio == step && r >= 0 && b < head_[r])) {
        step = ratio;
        r = i;
      }
    }
    if (flip <= step) r = -1;
  } else {
    double theta_max = kInf;
    for (int i = 0; i < m_; ++i) {
      const double alpha = at(i, q);
      if (std::abs(alpha) < kPivotTol) continue;
      const double rate = -dir * alpha;
      const int b = head_[i];
      if (rate > 0 && std::isfinite(whi_[b])) {
        theta_max = std::min(theta_max, (whi_[b] + ptol_ - x_[b]) / rate);
      } else if (rate < 0 && std::isfinite(wlo_[b])) {
        theta_max = std::min(theta_max, (x_[b] - wlo_[b] + ptol_) / -rate);
      }
    }
    if (flip <= theta_max) {
      r = -1;
    } else {
      double best_alpha = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double alpha = at(i, q);
        if (std::abs(alpha) < kPivotTol) continue;
        const double rate = -dir * alpha;
        const int b = head_[i];
        if (rate > 0 && !std::isfinite(whi_[b])) continue;
        if (rate < 0 && !std::isfinite(wlo_[b])) continue;
        const double ratio = exact_ratio(i, rate);
        if (ratio <= theta_max && std::abs(alpha) > best_alpha) {
          best_alpha = std::abs(alpha);
          r = i;
          step = ratio;
        }
      }
    }
  }

  if (r < 0) {
    if (!std::isfinite(flip)) return Step::blocked;
    move_nonbasic(q, dir > 0 ? whi_[q] : wlo_[q]);
    return Step::progress;
  }

  const int leave = head_[r];
  const double rate = -dir * at(r, q);
  const double bound = rate > 0 ? whi_[leave] : wlo_[leave];
  for (int i = 0; i < m_; ++i) {
    const double a = at(i, q);
    if (a != 0.0) x_[head_[i]] -= a * dir * step;
  }
  x_[q] += dir * step;
  x_[leave] = bound;
  pivot(r, q);
  return Step::progress;
}

LpStatus BoundedSimplex::dual_simplex() {
  int degenerate = 0;
  while (true) {
    if (iterations_ >= budget_) return LpStatus::iteration_limit;
    const bool bland = degenerate > kDegenerateLimit;
    // Track degeneracy through the objective: a dual step that leaves it
    // unchanged made no progress.
    const double before = objective();
    const Step s = dual_iteration(bland);
    if (s == Step::done) return LpStatus::optimal;
    if (s == Step::blocked) return LpStatus::infeasible;
    ++iterations_;
    if (std::abs(objective() - before) <= 1e-12 * (1.0 + std::abs(before))) {
      ++degenerate;
    } else {
      degenerate = 0;
    }
    if (iterations_ % kRefreshInterval == 0) recompute_basics();
  }
}

LpStatus BoundedSimplex::primal_simplex() {
  int degenerate = 0;
  while (true) {
    if (iterations_ >= budget_) return LpStatus::iteration_limit;
    const bool bland = degenerate > kDegenerateLimit;
    const double before = objective();
    const Step s = primal_iteration(bland);
    if (s == Step::done) return LpStatus::optimal;
    if (s == Step::blocked) return LpStatus::unbounded;
    ++iterations_;
    if (std::abs(objective() - before) <= 1e-12 * (1.0 + std::abs(before))) {
      ++degenerate;
    } else {
      degenerate = 0;
    }
    if (iterations_ % kRefreshInterval == 0) recompute_basics();
  }
}

LpStatus BoundedSimplex::optimize_once(bool wide_artificials) {
  const bool used = place_nonbasics(wide_artificials);
  retry_wide_ = false;
  if (primal_infeasible()) {
    const LpStatus st = dual_simplex();
    if (st != LpStatus::optimal) {
      drop_artificials();
      // Tight artificial bounds may have cut off the feasible region.
      retry_wide_ = st == LpStatus::infeasible && used && !wide_artificials;
      return st;
    }
  }
  drop_artificials();
  return primal_simplex();
}

LpStatus BoundedSimplex::optimize() {
  budget_ = iterations_ + 50LL * (m_ + N_) + 20000;
  bool wide = false;
  for (int attempt = 0; attempt < 4; ++attempt) {
    retry_wide_ = false;
    LpStatus st = optimize_once(wide);
    if (retry_wide_) {
      wide = true;
      continue;
    }
    if (st == LpStatus::iteration_limit) {
      if (attempt > 1) return st;
      reinvert();
      budget_ = iterations_ + 50LL * (m_ + N_) + 20000;
      continue;
    }
    const bool drifted = row_residual() > 1e-9 ||
                         (st == LpStatus::optimal && primal_infeasible());
    if (drifted && attempt < 3) {
      reinvert();
      continue;
    }
    return st;
  }
  return LpStatus::iteration_limit;
}

double BoundedSimplex::objective() const {
  double obj = problem_->objective_offset;
  for (int j = 0; j < n_; ++j) obj += cost_[j] * x_[j];
  return obj;
}

std::vector<double> BoundedSimplex::primal() const {
  return {x_.begin(), x_.begin() + n_};
}

std::vector<double> BoundedSimplex::row_duals() const {
  std::vector<double> y(m_, 0.0);
  for (int r = 0; r < m_; ++r) {
    if (where_[n_ + r] < 0) y[r] = d_[n_ + r];
  }
  return y;
}

std::vector<double> BoundedSimplex::reduced_costs() const {
  std::vector<double> d(n_, 0.0);
  for (int j = 0; j < n_; ++j) {
    if (where_[j] < 0) d[j] = d_[j];
  }
  return d;
}

}  // namespace ctax::milp::detail
