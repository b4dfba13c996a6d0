#include "rnncert/solver.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace rnncert::solver {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::NumericalFailure: return "numerical-failure";
    case SolveStatus::BudgetExceeded: return "budget-exceeded";
  }
  return "?";
}

namespace {

enum class VarState : uint8_t { Basic, AtLower, AtUpper, FreeZero };

constexpr double kPivotTol = 1e-9;
constexpr double kDegenTol = 1e-10;
constexpr int kBlandThreshold = 100;
constexpr int kRefactorInterval = 120;

/// Bounded-variable primal simplex on a dense basis inverse. Columns are
/// structural variables, then one slack per row, then one artificial per row.
class Simplex {
 public:
  Simplex(const LpProblem& p, const Tolerances& tol, const SolveBudget& budget,
          SolveStats& stats)
      : tol_(tol), budget_(budget), stats_(stats) {
    n_ = p.num_vars();
    m_ = static_cast<int>(p.rows.size());
    total_ = n_ + 2 * m_;

    a_.assign(static_cast<size_t>(m_) * n_, 0.0);
    for (int i = 0; i < m_; ++i) {
      for (const auto& t : p.rows[i].terms) {
        if (t.var < 0 || t.var >= n_) throw std::invalid_argument("row term out of range");
        a_[static_cast<size_t>(t.var) * m_ + i] += t.coef;
      }
    }

    lo_.assign(total_, 0.0);
    hi_.assign(total_, 0.0);
    for (int j = 0; j < n_; ++j) {
      lo_[j] = p.lower[j];
      hi_[j] = p.upper[j];
      if (lo_[j] > hi_[j] + tol_.feasibility) contradictory_bounds_ = true;
    }
    rhs_.resize(m_);
    for (int i = 0; i < m_; ++i) {
      rhs_[i] = p.rows[i].rhs;
      int s = n_ + i;
      switch (p.rows[i].rel) {
        case Relation::LessEq: lo_[s] = 0.0; hi_[s] = kInf; break;
        case Relation::GreaterEq: lo_[s] = -kInf; hi_[s] = 0.0; break;
        case Relation::Equal: lo_[s] = 0.0; hi_[s] = 0.0; break;
      }
    }

    cost_.assign(total_, 0.0);
    for (int j = 0; j < n_ && j < static_cast<int>(p.objective.size()); ++j)
      cost_[j] = p.maximize ? -p.objective[j] : p.objective[j];

    rhs_scale_ = 1.0;
    for (double b : rhs_) rhs_scale_ = std::max(rhs_scale_, std::fabs(b));
    cost_scale_ = 1.0;
    for (int j = 0; j < n_; ++j) cost_scale_ = std::max(cost_scale_, std::fabs(cost_[j]));
  }

  SolveStatus run() {
    if (contradictory_bounds_) return SolveStatus::Infeasible;
    if (n_ == 0) return SolveStatus::Optimal;

    place_initial_point();
    if (needs_phase1_) {
      SolveStatus s = iterate(/*phase1=*/true);
      if (s != SolveStatus::Optimal) {
        return s == SolveStatus::Unbounded ? SolveStatus::NumericalFailure : s;
      }
      if (phase_objective() > 10.0 * tol_.feasibility * rhs_scale_)
        return SolveStatus::Infeasible;
      retire_artificials();
    }
    phase1_ = false;
    return iterate(/*phase1=*/false);
  }

  double objective_value() const {
    double v = 0.0;
    for (int j = 0; j < n_; ++j) v += cost_[j] * value_of(j);
    return v;
  }

  std::vector<double> structural_assignment() const {
    std::vector<double> x(n_);
    for (int j = 0; j < n_; ++j) x[j] = value_of(j);
    return x;
  }

 private:
  double value_of(int j) const {
    if (state_[j] == VarState::Basic) return xb_[basic_row_[j]];
    return xn_[j];
  }

  const double* column(int j) const { return &a_[static_cast<size_t>(j) * m_]; }
  bool is_structural(int j) const { return j < n_; }
  int unit_row(int j) const { return j < n_ + m_ ? j - n_ : j - n_ - m_; }

  void place_initial_point() {
    state_.assign(total_, VarState::AtLower);
    xn_.assign(total_, 0.0);
    basis_.assign(m_, -1);
    basic_row_.assign(total_, -1);
    xb_.assign(m_, 0.0);

    for (int j = 0; j < n_; ++j) {
      if (std::isfinite(lo_[j])) {
        state_[j] = VarState::AtLower;
        xn_[j] = lo_[j];
      } else if (std::isfinite(hi_[j])) {
        state_[j] = VarState::AtUpper;
        xn_[j] = hi_[j];
      } else {
        state_[j] = VarState::FreeZero;
        xn_[j] = 0.0;
      }
    }

    // Wanted slack value per row given the nonbasic structural point.
    std::vector<double> want(m_);
    for (int i = 0; i < m_; ++i) want[i] = rhs_[i];
    for (int j = 0; j < n_; ++j) {
      double v = xn_[j];
      if (v == 0.0) continue;
      const double* col = column(j);
      for (int i = 0; i < m_; ++i) want[i] -= col[i] * v;
    }

    needs_phase1_ = false;
    for (int i = 0; i < m_; ++i) {
      int s = n_ + i;
      int art = n_ + m_ + i;
      // Artificials default to fixed-at-zero; activated only where needed.
      lo_[art] = 0.0;
      hi_[art] = 0.0;
      state_[art] = VarState::AtLower;
      xn_[art] = 0.0;
      if (want[i] >= lo_[s] - tol_.feasibility && want[i] <= hi_[s] + tol_.feasibility) {
        basis_[i] = s;
        basic_row_[s] = i;
        state_[s] = VarState::Basic;
        xb_[i] = want[i];
      } else {
        double sb = want[i] < lo_[s] ? lo_[s] : hi_[s];
        state_[s] = want[i] < lo_[s] ? VarState::AtLower : VarState::AtUpper;
        xn_[s] = sb;
        double residual = want[i] - sb;
        if (residual > 0) {
          lo_[art] = 0.0;
          hi_[art] = kInf;
          cost1_weight_.push_back({art, 1.0});
        } else {
          lo_[art] = -kInf;
          hi_[art] = 0.0;
          cost1_weight_.push_back({art, -1.0});
        }
        basis_[i] = art;
        basic_row_[art] = i;
        state_[art] = VarState::Basic;
        xb_[i] = residual;
        needs_phase1_ = true;
      }
    }

    binv_.assign(static_cast<size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) binv_[static_cast<size_t>(i) * m_ + i] = 1.0;
    phase1_ = needs_phase1_;
  }

  double phase_cost(int j) const {
    if (!phase1_) return is_structural(j) ? cost_[j] : 0.0;
    for (const auto& [art, w] : cost1_weight_)
      if (art == j) return w;
    return 0.0;
  }

  double phase_objective() const {
    double v = 0.0;
    for (const auto& [art, w] : cost1_weight_) v += w * value_of(art);
    return v;
  }

  /// After phase 1 every artificial sits at zero; fix it there so phase 2
  /// can never reuse it. Basic artificials in redundant rows stay basic at 0.
  void retire_artificials() {
    for (int i = 0; i < m_; ++i) {
      int art = n_ + m_ + i;
      if (state_[art] == VarState::Basic) {
        int row = basic_row_[art];
        int enter = -1;
        double best = kPivotTol;
        for (int j = 0; j < n_ + m_; ++j) {
          if (state_[j] == VarState::Basic || lo_[j] == hi_[j]) continue;
          double wr = row_dot_column(row, j);
          if (std::fabs(wr) > best) {
            best = std::fabs(wr);
            enter = j;
          }
        }
        if (enter >= 0) {
          std::vector<double> w = ftran(enter);
          pivot(enter, row, w, /*sigma=*/+1, /*delta=*/0.0);
        }
      }
      lo_[art] = 0.0;
      hi_[art] = 0.0;
      if (state_[art] != VarState::Basic) {
        state_[art] = VarState::AtLower;
        xn_[art] = 0.0;
      }
    }
    for (auto& [art, w] : cost1_weight_) (void)art, (void)w;
    cost1_weight_.clear();
  }

  double row_dot_column(int row, int j) const {
    const double* brow = &binv_[static_cast<size_t>(row) * m_];
    if (!is_structural(j)) return brow[unit_row(j)];
    const double* col = column(j);
    double acc = 0.0;
    for (int i = 0; i < m_; ++i) acc += brow[i] * col[i];
    return acc;
  }

  std::vector<double> ftran(int j) const {
    std::vector<double> w(m_, 0.0);
    if (!is_structural(j)) {
      int r = unit_row(j);
      for (int i = 0; i < m_; ++i) w[i] = binv_[static_cast<size_t>(i) * m_ + r];
      return w;
    }
    const double* col = column(j);
    for (int i = 0; i < m_; ++i) {
      const double* brow = &binv_[static_cast<size_t>(i) * m_];
      double acc = 0.0;
      for (int k = 0; k < m_; ++k) acc += brow[k] * col[k];
      w[i] = acc;
    }
    return w;
  }

  SolveStatus iterate(bool phase1) {
    int degenerate_streak = 0;
    int since_refactor = 0;
    while (true) {
      if (budget_.max_pivots >= 0 && stats_.pivots >= budget_.max_pivots)
        return SolveStatus::BudgetExceeded;
      if (budget_.deadline && (stats_.pivots & 63) == 0 &&
          std::chrono::steady_clock::now() > *budget_.deadline)
        return SolveStatus::BudgetExceeded;
      if (since_refactor >= kRefactorInterval) {
        if (!refactorize()) return SolveStatus::NumericalFailure;
        since_refactor = 0;
      }

      // y = c_B' B^-1, skipping zero-cost basic rows.
      std::vector<double> y(m_, 0.0);
      bool y_zero = true;
      for (int i = 0; i < m_; ++i) {
        double cb = phase_cost(basis_[i]);
        if (cb == 0.0) continue;
        y_zero = false;
        const double* brow = &binv_[static_cast<size_t>(i) * m_];
        for (int k = 0; k < m_; ++k) y[k] += cb * brow[k];
      }

      bool bland = degenerate_streak >= kBlandThreshold;
      double dtol = 1e-8 * (phase1 ? 1.0 : cost_scale_);
      int enter = -1;
      int enter_sigma = 0;
      double best_score = dtol;
      int limit = phase1 ? total_ : n_ + m_;
      for (int j = 0; j < limit; ++j) {
        if (state_[j] == VarState::Basic || lo_[j] == hi_[j]) continue;
        double cj = phase_cost(j);
        double dj;
        if (y_zero) {
          dj = cj;
        } else if (is_structural(j)) {
          const double* col = column(j);
          double acc = 0.0;
          for (int i = 0; i < m_; ++i) acc += y[i] * col[i];
          dj = cj - acc;
        } else {
          dj = cj - y[unit_row(j)];
        }
        int sigma = 0;
        if ((state_[j] == VarState::AtLower || state_[j] == VarState::FreeZero) && dj < -dtol)
          sigma = +1;
        else if ((state_[j] == VarState::AtUpper || state_[j] == VarState::FreeZero) && dj > dtol)
          sigma = -1;
        if (sigma == 0) continue;
        if (bland) {
          enter = j;
          enter_sigma = sigma;
          break;
        }
        if (std::fabs(dj) > best_score) {
          best_score = std::fabs(dj);
          enter = j;
          enter_sigma = sigma;
        }
      }
      if (enter < 0) return SolveStatus::Optimal;

      std::vector<double> w = ftran(enter);

      // Ratio test: basic variables block when pushed to a bound; the
      // entering variable may also flip to its opposite bound.
      double limit_delta = kInf;
      int leave_row = -1;
      double leave_pivot = 0.0;
      if (std::isfinite(lo_[enter]) && std::isfinite(hi_[enter]))
        limit_delta = hi_[enter] - lo_[enter];
      for (int i = 0; i < m_; ++i) {
        double rate = -enter_sigma * w[i];  // d(x_Bi)/d(delta)
        if (std::fabs(w[i]) <= kPivotTol) continue;
        double room;
        if (rate < 0) {
          if (!std::isfinite(lo_[basis_[i]])) continue;
          room = (xb_[i] - lo_[basis_[i]]) / -rate;
        } else {
          if (!std::isfinite(hi_[basis_[i]])) continue;
          room = (hi_[basis_[i]] - xb_[i]) / rate;
        }
        if (room < -tol_.feasibility) room = 0.0;
        if (room < 0) room = 0.0;
        bool better = room < limit_delta - kDegenTol;
        bool tie = !better && room < limit_delta + kDegenTol && leave_row >= 0;
        if (better || (tie && (std::fabs(w[i]) > std::fabs(leave_pivot) + kDegenTol ||
                               (std::fabs(std::fabs(w[i]) - std::fabs(leave_pivot)) <= kDegenTol &&
                                (bland ? basis_[i] < basis_[leave_row] : false))))) {
          limit_delta = room;
          leave_row = i;
          leave_pivot = w[i];
        }
      }

      if (!std::isfinite(limit_delta)) return SolveStatus::Unbounded;

      ++stats_.pivots;
      if (phase1) ++stats_.phase1_pivots;
      ++since_refactor;
      if (limit_delta < kDegenTol)
        ++degenerate_streak;
      else
        degenerate_streak = 0;

      if (leave_row < 0) {
        // Bound flip: the entering variable crosses to its other bound.
        double newv = xn_[enter] + enter_sigma * limit_delta;
        for (int i = 0; i < m_; ++i) xb_[i] -= enter_sigma * w[i] * limit_delta;
        xn_[enter] = newv;
        state_[enter] = enter_sigma > 0 ? VarState::AtUpper : VarState::AtLower;
        continue;
      }
      pivot(enter, leave_row, w, enter_sigma, limit_delta);
    }
  }

  void pivot(int enter, int row, const std::vector<double>& w, int sigma, double delta) {
    int leave = basis_[row];
    double enter_value = xn_[enter] + sigma * delta;
    for (int i = 0; i < m_; ++i) xb_[i] -= sigma * w[i] * delta;

    double leave_value = xb_[row];
    double dl = std::isfinite(lo_[leave]) ? std::fabs(leave_value - lo_[leave]) : kInf;
    double du = std::isfinite(hi_[leave]) ? std::fabs(leave_value - hi_[leave]) : kInf;
    if (dl <= du) {
      state_[leave] = VarState::AtLower;
      xn_[leave] = lo_[leave];
    } else {
      state_[leave] = VarState::AtUpper;
      xn_[leave] = hi_[leave];
    }
    basic_row_[leave] = -1;

    basis_[row] = enter;
    basic_row_[enter] = row;
    state_[enter] = VarState::Basic;
    xb_[row] = enter_value;

    // B^-1 update: eliminate the entering column from all other rows.
    double piv = w[row];
    double* prow = &binv_[static_cast<size_t>(row) * m_];
    for (int k = 0; k < m_; ++k) prow[k] /= piv;
    for (int i = 0; i < m_; ++i) {
      if (i == row) continue;
      double f = w[i];
      if (std::fabs(f) < 1e-14) continue;
      double* irow = &binv_[static_cast<size_t>(i) * m_];
      for (int k = 0; k < m_; ++k) irow[k] -= f * prow[k];
    }
  }

  bool refactorize() {
    ++stats_.refactorizations;
    // Rebuild B from the basis columns and invert by Gauss-Jordan.
    std::vector<double> mat(static_cast<size_t>(m_) * 2 * m_, 0.0);
    for (int c = 0; c < m_; ++c) {
      int j = basis_[c];
      if (is_structural(j)) {
        const double* col = column(j);
        for (int i = 0; i < m_; ++i) mat[static_cast<size_t>(i) * 2 * m_ + c] = col[i];
      } else {
        mat[static_cast<size_t>(unit_row(j)) * 2 * m_ + c] = 1.0;
      }
    }
    for (int i = 0; i < m_; ++i) mat[static_cast<size_t>(i) * 2 * m_ + m_ + i] = 1.0;

    for (int c = 0; c < m_; ++c) {
      int piv = -1;
      double best = 1e-11;
      for (int r = c; r < m_; ++r) {
        double v = std::fabs(mat[static_cast<size_t>(r) * 2 * m_ + c]);
        if (v > best) {
          best = v;
          piv = r;
        }
      }
      if (piv < 0) return false;
      if (piv != c)
        for (int k = 0; k < 2 * m_; ++k)
          std::swap(mat[static_cast<size_t>(piv) * 2 * m_ + k],
                    mat[static_cast<size_t>(c) * 2 * m_ + k]);
      double* crow = &mat[static_cast<size_t>(c) * 2 * m_];
      double p = crow[c];
      for (int k = 0; k < 2 * m_; ++k) crow[k] /= p;
      for (int r = 0; r < m_; ++r) {
        if (r == c) continue;
        double f = mat[static_cast<size_t>(r) * 2 * m_ + c];
        if (std::fabs(f) < 1e-14) continue;
        double* rrow = &mat[static_cast<size_t>(r) * 2 * m_];
        for (int k = 0; k < 2 * m_; ++k) rrow[k] -= f * crow[k];
      }
    }
    for (int i = 0; i < m_; ++i)
      for (int k = 0; k < m_; ++k)
        binv_[static_cast<size_t>(i) * m_ + k] = mat[static_cast<size_t>(i) * 2 * m_ + m_ + k];

    // Recompute basic values from scratch: xb = B^-1 (b - N x_N).
    std::vector<double> r(m_);
    for (int i = 0; i < m_; ++i) r[i] = rhs_[i];
    for (int j = 0; j < total_; ++j) {
      if (state_[j] == VarState::Basic) continue;
      double v = xn_[j];
      if (v == 0.0) continue;
      if (is_structural(j)) {
        const double* col = column(j);
        for (int i = 0; i < m_; ++i) r[i] -= col[i] * v;
      } else {
        r[unit_row(j)] -= v;
      }
    }
    for (int i = 0; i < m_; ++i) {
      const double* brow = &binv_[static_cast<size_t>(i) * m_];
      double acc = 0.0;
      for (int k = 0; k < m_; ++k) acc += brow[k] * r[k];
      xb_[i] = acc;
    }
    return true;
  }

  const Tolerances tol_;
  const SolveBudget budget_;
  SolveStats& stats_;

  int n_ = 0, m_ = 0, total_ = 0;
  bool contradictory_bounds_ = false;
  bool needs_phase1_ = false;
  bool phase1_ = false;
  double rhs_scale_ = 1.0, cost_scale_ = 1.0;

  std::vector<double> a_;  // column-major m x n (structural columns)
  std::vector<double> lo_, hi_, cost_, rhs_;
  std::vector<double> binv_;
  std::vector<int> basis_;
  std::vector<int> basic_row_;
  std::vector<VarState> state_;
  std::vector<double> xn_, xb_;
  std::vector<std::pair<int, double>> cost1_weight_;
};

double user_objective(const LpProblem& p, const std::vector<double>& x) {
  double v = p.objective_constant;
  for (int j = 0; j < p.num_vars() && j < static_cast<int>(p.objective.size()); ++j)
    v += p.objective[j] * x[j];
  return v;
}

}  // namespace

SolveResult solve_lp(const LpProblem& p, const Tolerances& tol, const SolveBudget& budget) {
  SolveResult res;
  Simplex s(p, tol, budget, res.stats);
  res.status = s.run();
  if (res.status == SolveStatus::Optimal) {
    res.assignment = s.structural_assignment();
    res.objective = user_objective(p, res.assignment);
  }
  return res;
}

namespace {

struct BbNode {
  std::vector<std::pair<int, int>> fixings;  // (binary var, 0/1)
  double bound;                              // parent LP objective, internal min sense
  int depth;
  long id;
};

bool all_integral(const std::vector<double>& x, const std::vector<int>& binaries, double itol) {
  for (int b : binaries) {
    double f = x[b] - std::floor(x[b]);
    if (std::min(f, 1.0 - f) > itol) return false;
  }
  return true;
}

}  // namespace

SolveResult solve_milp(const MilpProblem& p, const Tolerances& tol, const SolveBudget& budget) {
  SolveResult res;
  LpProblem base = p.lp;
  for (int b : p.binaries) {
    if (b < 0 || b >= base.num_vars()) throw std::invalid_argument("binary var out of range");
    base.lower[b] = std::max(base.lower[b], 0.0);
    base.upper[b] = std::min(base.upper[b], 1.0);
  }
  bool feasibility_only = true;
  for (double c : base.objective)
    if (c != 0.0) feasibility_only = false;

  // Internally minimize.
  const bool maximize = base.maximize;
  double best_obj = kInf;
  std::vector<double> best_x;
  bool budget_hit = false;

  std::vector<BbNode> open;
  long next_id = 0;
  open.push_back(BbNode{{}, -kInf, 0, next_id++});

  while (!open.empty()) {
    if (budget.max_nodes >= 0 && res.stats.nodes >= budget.max_nodes) {
      budget_hit = true;
      break;
    }
    if (budget.deadline && std::chrono::steady_clock::now() > *budget.deadline) {
      budget_hit = true;
      break;
    }

    size_t pick = 0;
    for (size_t i = 1; i < open.size(); ++i) {
      const BbNode& a = open[i];
      const BbNode& b = open[pick];
      if (a.depth != b.depth) {
        if (a.depth > b.depth) pick = i;
      } else if (a.bound != b.bound) {
        if (a.bound < b.bound) pick = i;
      } else if (a.id < b.id) {
        pick = i;
      }
    }
    BbNode node = std::move(open[pick]);
    open.erase(open.begin() + static_cast<long>(pick));

    double gap = tol.optimality * std::max(1.0, std::fabs(best_obj));
    if (!best_x.empty() && node.bound >= best_obj - gap) continue;

    LpProblem sub = base;
    for (auto [var, val] : node.fixings) {
      sub.lower[var] = val;
      sub.upper[var] = val;
    }
    SolveStats node_stats;
    Simplex s(sub, tol, budget, node_stats);
    SolveStatus st = s.run();
    res.stats.pivots += node_stats.pivots;
    res.stats.phase1_pivots += node_stats.phase1_pivots;
    res.stats.refactorizations += node_stats.refactorizations;
    ++res.stats.nodes;

    if (st == SolveStatus::BudgetExceeded) {
      budget_hit = true;
      break;
    }
    if (st == SolveStatus::NumericalFailure) {
      res.status = SolveStatus::NumericalFailure;
      return res;
    }
    if (st == SolveStatus::Infeasible) continue;
    if (st == SolveStatus::Unbounded) {
      if (node.depth == 0 && !feasibility_only) {
        res.status = SolveStatus::Unbounded;
        return res;
      }
      continue;
    }

    std::vector<double> x = s.structural_assignment();
    double obj_min = 0.0;
    for (int j = 0; j < sub.num_vars() && j < static_cast<int>(sub.objective.size()); ++j)
      obj_min += (maximize ? -sub.objective[j] : sub.objective[j]) * x[j];

    if (!best_x.empty() && obj_min >= best_obj - gap) continue;

    if (all_integral(x, p.binaries, tol.integrality)) {
      for (int b : p.binaries) x[b] = std::round(x[b]);
      best_obj = obj_min;
      best_x = std::move(x);
      if (feasibility_only) break;
      continue;
    }

    // Branch on the most fractional binary, exploring the rounded side first.
    int branch_var = -1;
    double best_frac = -1.0;
    for (int b : p.binaries) {
      double f = x[b] - std::floor(x[b]);
      double dist = std::min(f, 1.0 - f);
      if (dist > tol.integrality && dist > best_frac + 1e-12) {
        best_frac = dist;
        branch_var = b;
      }
    }
    if (branch_var < 0) continue;
    int first = x[branch_var] >= 0.5 ? 1 : 0;
    for (int side : {first, 1 - first}) {
      BbNode child;
      child.fixings = node.fixings;
      child.fixings.emplace_back(branch_var, side);
      child.bound = obj_min;
      child.depth = node.depth + 1;
      child.id = next_id++;
      open.push_back(std::move(child));
    }
  }

  if (!best_x.empty()) {
    res.status = (budget_hit && !feasibility_only) ? SolveStatus::BudgetExceeded
                                                   : SolveStatus::Optimal;
    res.assignment = std::move(best_x);
    res.objective = user_objective(p.lp, res.assignment);
  } else {
    res.status = budget_hit ? SolveStatus::BudgetExceeded : SolveStatus::Infeasible;
  }
  return res;
}

ReluEncoding encode_relu(MilpProblem& p, int x_var, int y_var, double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw std::invalid_argument("encode_relu: infinite bounds");
  if (lo > hi) throw std::invalid_argument("encode_relu: lo > hi");
  LpProblem& lp = p.lp;
  auto clamp_y = [&](double l, double h) {
    lp.lower[y_var] = std::max(lp.lower[y_var], l);
    lp.upper[y_var] = std::min(lp.upper[y_var], h);
  };
  if (lo >= 0.0) {
    lp.add_row({{y_var, 1.0}, {x_var, -1.0}}, Relation::Equal, 0.0);
    clamp_y(lo, hi);
    return {};
  }
  if (hi <= 0.0) {
    clamp_y(0.0, 0.0);
    return {};
  }
  int delta = lp.add_variable(0.0, 1.0);
  p.mark_binary(delta);
  clamp_y(0.0, hi);
  // y >= x
  lp.add_row({{y_var, 1.0}, {x_var, -1.0}}, Relation::GreaterEq, 0.0);
  // y <= x - lo (1 - delta)
  lp.add_row({{y_var, 1.0}, {x_var, -1.0}, {delta, -lo}}, Relation::LessEq, -lo);
  // y <= hi delta
  lp.add_row({{y_var, 1.0}, {delta, -hi}}, Relation::LessEq, 0.0);
  // Convex-hull cut: y <= hi (x - lo) / (hi - lo). Implied at integral delta,
  // tightens the relaxation considerably.
  lp.add_row({{y_var, hi - lo}, {x_var, -hi}}, Relation::LessEq, -hi * lo);
  return {delta};
}

void dump_lp(const LpProblem& p, std::ostream& os, const std::vector<int>& binaries) {
  auto name = [&](int j) {
    if (j < static_cast<int>(p.names.size()) && !p.names[j].empty()) return p.names[j];
    return "x" + std::to_string(j);
  };
  os << (p.maximize ? "Maximize" : "Minimize") << "\n obj:";
  bool any = false;
  for (int j = 0; j < p.num_vars() && j < static_cast<int>(p.objective.size()); ++j) {
    if (p.objective[j] == 0.0) continue;
    os << (p.objective[j] >= 0 ? " + " : " - ") << std::fabs(p.objective[j]) << " " << name(j);
    any = true;
  }
  if (!any) os << " 0";
  os << "\nSubject To\n";
  for (size_t i = 0; i < p.rows.size(); ++i) {
    os << " c" << i << ":";
    for (const auto& t : p.rows[i].terms)
      os << (t.coef >= 0 ? " + " : " - ") << std::fabs(t.coef) << " " << name(t.var);
    switch (p.rows[i].rel) {
      case Relation::LessEq: os << " <= "; break;
      case Relation::GreaterEq: os << " >= "; break;
      case Relation::Equal: os << " = "; break;
    }
    os << p.rows[i].rhs << "\n";
  }
  os << "Bounds\n";
  for (int j = 0; j < p.num_vars(); ++j) {
    os << " ";
    if (std::isfinite(p.lower[j])) os << p.lower[j] << " <= ";
    else os << "-inf <= ";
    os << name(j);
    if (std::isfinite(p.upper[j])) os << " <= " << p.upper[j];
    os << "\n";
  }
  if (!binaries.empty()) {
    os << "Binaries\n";
    for (int b : binaries) os << " " << name(b);
    os << "\n";
  }
  os << "End\n";
}

}  // namespace rnncert::solver
