//! Convex trust-region subproblem of the ℓ1 merit function.
//!
//! One sequential-convexification step minimizes
//!
//! ```text
//! c·d + μ Σ max(g_i + a_i·d, 0) + μ Σ |h_j + b_j·d|    over  lo ≤ d ≤ hi
//! ```
//!
//! which is a linear program after introducing one hinge slack per
//! inequality row and two per equality row. The box comes from the ∞-norm
//! trust region intersected with hard variable bounds. The LP is solved
//! with a dense bounded-variable primal simplex using Bland's rule; the
//! free step `d` is split into nonnegative parts so the all-zero step is a
//! basic feasible starting point.

use nalgebra::{DMatrix, DVector};

const PIVOT_TOL: f64 = 1e-10;

/// Linearized ℓ1 subproblem data.
#[derive(Debug, Clone)]
pub struct L1Subproblem<'a> {
    /// Cost gradient `c`.
    pub cost_grad: &'a [f64],
    /// Inequality residual values `g` at the linearization point.
    pub ineq_values: &'a [f64],
    /// Inequality jacobian `A` (rows follow `ineq_values`).
    pub ineq_jac: &'a DMatrix<f64>,
    /// Equality residual values `h`.
    pub eq_values: &'a [f64],
    /// Equality jacobian `B`.
    pub eq_jac: &'a DMatrix<f64>,
    /// Penalty weight μ.
    pub penalty: f64,
    /// Per-variable step bounds, `lower[k] ≤ 0 ≤ upper[k]`.
    pub lower: &'a [f64],
    pub upper: &'a [f64],
}

impl L1Subproblem<'_> {
    /// Model merit of a candidate step: linearized cost plus penalty terms.
    pub fn model_merit(&self, d: &[f64]) -> f64 {
        let mut value = 0.0;
        for (ck, dk) in self.cost_grad.iter().zip(d) {
            value += ck * dk;
        }
        for (i, g) in self.ineq_values.iter().enumerate() {
            let mut row = *g;
            for (k, dk) in d.iter().enumerate() {
                row += self.ineq_jac[(i, k)] * dk;
            }
            value += self.penalty * row.max(0.0);
        }
        for (j, h) in self.eq_values.iter().enumerate() {
            let mut row = *h;
            for (k, dk) in d.iter().enumerate() {
                row += self.eq_jac[(j, k)] * dk;
            }
            value += self.penalty * row.abs();
        }
        value
    }

    /// Solve for the step `d`. Always returns a feasible step; on pivot
    /// budget exhaustion the current (feasible, possibly suboptimal) step
    /// is returned.
    pub fn solve(&self) -> Vec<f64> {
        let n = self.cost_grad.len();
        let m_in = self.ineq_values.len();
        let m_eq = self.eq_values.len();
        let m = m_in + 2 * m_eq;

        if m == 0 {
            // Separable: each coordinate runs to the box face opposing its
            // gradient sign.
            return (0..n)
                .map(|k| {
                    if self.cost_grad[k] > 0.0 {
                        self.lower[k].min(0.0)
                    } else if self.cost_grad[k] < 0.0 {
                        self.upper[k].max(0.0)
                    } else {
                        0.0
                    }
                })
                .collect();
        }

        // Hinge rows: a·d - s ≤ -g for inequalities, ±(h + b·d) ≤ s for
        // equalities (two rows sharing nothing, one slack each).
        let mut row_coeff = DMatrix::<f64>::zeros(m, n);
        let mut rhs = DVector::<f64>::zeros(m);
        for i in 0..m_in {
            for k in 0..n {
                row_coeff[(i, k)] = self.ineq_jac[(i, k)];
            }
            rhs[i] = -self.ineq_values[i];
        }
        for j in 0..m_eq {
            for k in 0..n {
                row_coeff[(m_in + 2 * j, k)] = self.eq_jac[(j, k)];
                row_coeff[(m_in + 2 * j + 1, k)] = -self.eq_jac[(j, k)];
            }
            rhs[m_in + 2 * j] = -self.eq_values[j];
            rhs[m_in + 2 * j + 1] = self.eq_values[j];
        }

        // LP columns: d+ (n), d- (n), hinge slacks s (m), row slacks w (m).
        let ncols = 2 * n + 2 * m;
        let col = |matrix_col: usize| -> DVector<f64> {
            let j = matrix_col;
            if j < n {
                row_coeff.column(j).into_owned()
            } else if j < 2 * n {
                -row_coeff.column(j - n).into_owned()
            } else if j < 2 * n + m {
                let mut e = DVector::zeros(m);
                e[j - 2 * n] = -1.0;
                e
            } else {
                let mut e = DVector::zeros(m);
                e[j - 2 * n - m] = 1.0;
                e
            }
        };
        let mut cost = vec![0.0; ncols];
        let mut upper = vec![f64::INFINITY; ncols];
        for k in 0..n {
            cost[k] = self.cost_grad[k];
            cost[n + k] = -self.cost_grad[k];
            upper[k] = self.upper[k].max(0.0);
            upper[n + k] = (-self.lower[k]).max(0.0);
        }
        for i in 0..m {
            cost[2 * n + i] = self.penalty;
        }

        // Initial basis: per row, w if the rhs is nonnegative, otherwise the
        // hinge slack (whose column is -e_i).
        let mut basis: Vec<usize> = Vec::with_capacity(m);
        let mut x_basic = DVector::<f64>::zeros(m);
        for i in 0..m {
            if rhs[i] >= 0.0 {
                basis.push(2 * n + m + i);
                x_basic[i] = rhs[i];
            } else {
                basis.push(2 * n + i);
                x_basic[i] = -rhs[i];
            }
        }
        // Nonbasic variables all sit at their lower bound 0.
        let mut at_upper = vec![false; ncols];
        let mut is_basic = vec![false; ncols];
        for &b in &basis {
            is_basic[b] = true;
        }

        let max_pivots = 50 * (ncols + m);
        for _ in 0..max_pivots {
            // Basis matrix and simplex multipliers.
            let mut b_mat = DMatrix::<f64>::zeros(m, m);
            for (slot, &b) in basis.iter().enumerate() {
                b_mat.set_column(slot, &col(b));
            }
            let lu = b_mat.clone().lu();
            let cost_basic = DVector::from_iterator(m, basis.iter().map(|&b| cost[b]));
            let y = match b_mat.transpose().lu().solve(&cost_basic) {
                Some(y) => y,
                None => break,
            };

            // Entering variable (Bland: smallest eligible index).
            let mut entering = None;
            for j in 0..ncols {
                if is_basic[j] {
                    continue;
                }
                let reduced = cost[j] - y.dot(&col(j));
                if !at_upper[j] && reduced < -PIVOT_TOL {
                    entering = Some((j, 1.0));
                    break;
                }
                if at_upper[j] && reduced > PIVOT_TOL {
                    entering = Some((j, -1.0));
                    break;
                }
            }
            let Some((e, sigma)) = entering else {
                break; // optimal
            };

            let dvec = match lu.solve(&col(e)) {
                Some(d) => d,
                None => break,
            };

            // Ratio test: entering moves by t from its bound; basics change
            // by -sigma * t * dvec. The entering variable may also flip to
            // its own opposite bound.
            let mut t_max = upper[e]; // lower bounds are all 0
            let mut leaving: Option<(usize, bool)> = None; // (slot, to_upper)
            for slot in 0..m {
                let delta = sigma * dvec[slot];
                if delta > PIVOT_TOL {
                    let t = x_basic[slot] / delta;
                    if t < t_max - PIVOT_TOL
                        || (t < t_max + PIVOT_TOL
                            && leaving.is_some_and(|(s, _)| basis[slot] < basis[s]))
                    {
                        t_max = t.max(0.0);
                        leaving = Some((slot, false));
                    }
                } else if delta < -PIVOT_TOL {
                    let ub = upper[basis[slot]];
                    if ub.is_finite() {
                        let t = (ub - x_basic[slot]) / (-delta);
                        if t < t_max - PIVOT_TOL
                            || (t < t_max + PIVOT_TOL
                                && leaving.is_some_and(|(s, _)| basis[slot] < basis[s]))
                        {
                            t_max = t.max(0.0);
                            leaving = Some((slot, true));
                        }
                    }
                }
            }
            if t_max.is_infinite() {
                break; // unbounded direction; cannot happen with boxed d
            }

            // Apply the step.
            for slot in 0..m {
                x_basic[slot] -= sigma * t_max * dvec[slot];
            }
            match leaving {
                None => {
                    // Bound flip of the entering variable.
                    at_upper[e] = !at_upper[e];
                }
                Some((slot, to_upper)) => {
                    let out = basis[slot];
                    is_basic[out] = false;
                    at_upper[out] = to_upper;
                    basis[slot] = e;
                    is_basic[e] = true;
                    let entering_value = if sigma > 0.0 { t_max } else { upper[e] - t_max };
                    x_basic[slot] = entering_value;
                    at_upper[e] = false;
                }
            }
        }

        // Recover d = d+ - d-.
        let mut d = vec![0.0; n];
        for j in 0..2 * n {
            let value = if is_basic[j] {
                let slot = basis.iter().position(|&b| b == j).unwrap();
                x_basic[slot]
            } else if at_upper[j] {
                upper[j]
            } else {
                0.0
            };
            if j < n {
                d[j] += value;
            } else {
                d[j - n] -= value;
            }
        }
        // Clamp fp drift back into the box.
        for (k, dk) in d.iter_mut().enumerate() {
            *dk = dk.clamp(self.lower[k].min(0.0), self.upper[k].max(0.0));
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct Case<'a> {
        cost: &'a [f64],
        g: &'a [f64],
        a: Vec<Vec<f64>>,
        h: &'a [f64],
        b: Vec<Vec<f64>>,
        penalty: f64,
        lower: &'a [f64],
        upper: &'a [f64],
    }

    fn solve_case(case: Case<'_>) -> (Vec<f64>, f64) {
        let n = case.cost.len();
        let a_mat = DMatrix::from_fn(case.g.len(), n, |i, j| case.a[i][j]);
        let b_mat = DMatrix::from_fn(case.h.len(), n, |i, j| case.b[i][j]);
        let sub = L1Subproblem {
            cost_grad: case.cost,
            ineq_values: case.g,
            ineq_jac: &a_mat,
            eq_values: case.h,
            eq_jac: &b_mat,
            penalty: case.penalty,
            lower: case.lower,
            upper: case.upper,
        };
        let d = sub.solve();
        let value = sub.model_merit(&d);
        (d, value)
    }

    #[test]
    fn unconstrained_follows_negative_gradient_to_box() {
        let (d, _) = solve_case(Case {
            cost: &[1.0, -2.0],
            g: &[],
            a: vec![],
            h: &[],
            b: vec![],
            penalty: 10.0,
            lower: &[-0.5, -0.5],
            upper: &[0.5, 0.5],
        });
        assert!((d[0] + 0.5).abs() < 1e-9);
        assert!((d[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn hinge_blocks_at_constraint_boundary() {
        // minimize -d s.t. current residual g = -0.3 (satisfied), row a = 1:
        // the hinge activates at d = 0.3; with penalty 10 > |c| = 1 the
        // optimum sits exactly on the kink.
        let (d, _) = solve_case(Case {
            cost: &[-1.0],
            g: &[-0.3],
            a: vec![vec![1.0]],
            h: &[],
            b: vec![],
            penalty: 10.0,
            lower: &[-1.0],
            upper: &[1.0],
        });
        assert!((d[0] - 0.3).abs() < 1e-9);
    }

    #[test]
    fn weak_penalty_ignores_constraint() {
        // With penalty below the cost slope the hinge does not hold.
        let (d, _) = solve_case(Case {
            cost: &[-1.0],
            g: &[-0.3],
            a: vec![vec![1.0]],
            h: &[],
            b: vec![],
            penalty: 0.5,
            lower: &[-1.0],
            upper: &[1.0],
        });
        assert!((d[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn equality_pulls_to_zero() {
        // h = 0.4 with slope 1: |0.4 + d| minimized at d = -0.4.
        let (d, _) = solve_case(Case {
            cost: &[0.0],
            g: &[],
            a: vec![],
            h: &[0.4],
            b: vec![vec![1.0]],
            penalty: 10.0,
            lower: &[-1.0],
            upper: &[1.0],
        });
        assert!((d[0] + 0.4).abs() < 1e-9);
    }

    /// Exact oracle for n = 2: the optimum of a convex piecewise-linear
    /// function over a box lies at an intersection of two active lines
    /// (hinge breaklines and box faces). Enumerate all candidates.
    fn oracle_2d(sub: &L1Subproblem) -> f64 {
        // Lines ax + by = c: box faces then hinge breaklines.
        let mut lines: Vec<(f64, f64, f64)> = vec![
            (1.0, 0.0, sub.lower[0]),
            (1.0, 0.0, sub.upper[0]),
            (0.0, 1.0, sub.lower[1]),
            (0.0, 1.0, sub.upper[1]),
        ];
        for i in 0..sub.ineq_values.len() {
            lines.push((
                sub.ineq_jac[(i, 0)],
                sub.ineq_jac[(i, 1)],
                -sub.ineq_values[i],
            ));
        }
        for j in 0..sub.eq_values.len() {
            lines.push((sub.eq_jac[(j, 0)], sub.eq_jac[(j, 1)], -sub.eq_values[j]));
        }
        let mut best = f64::INFINITY;
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                let (a1, b1, c1) = lines[i];
                let (a2, b2, c2) = lines[j];
                let det = a1 * b2 - a2 * b1;
                if det.abs() < 1e-12 {
                    continue;
                }
                let x = (c1 * b2 - c2 * b1) / det;
                let y = (a1 * c2 - a2 * c1) / det;
                if x < sub.lower[0] - 1e-9
                    || x > sub.upper[0] + 1e-9
                    || y < sub.lower[1] - 1e-9
                    || y > sub.upper[1] + 1e-9
                {
                    continue;
                }
                let d = [
                    x.clamp(sub.lower[0], sub.upper[0]),
                    y.clamp(sub.lower[1], sub.upper[1]),
                ];
                best = best.min(sub.model_merit(&d));
            }
        }
        best
    }

    #[test]
    fn matches_candidate_enumeration_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for case in 0..200 {
            let n = 2;
            let m = rng.random_range(1..5);
            let e = rng.random_range(0..3);
            let cost: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let g: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let a: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..n).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect();
            let h: Vec<f64> = (0..e).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b: Vec<Vec<f64>> = (0..e)
                .map(|_| (0..n).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect();
            let penalty = rng.random_range(0.5..20.0);
            let lower = vec![-rng.random_range(0.1..1.5), -rng.random_range(0.1..1.5)];
            let upper = vec![rng.random_range(0.1..1.5), rng.random_range(0.1..1.5)];

            let a_mat = DMatrix::from_fn(m, n, |i, j| a[i][j]);
            let b_mat = DMatrix::from_fn(e, n, |i, j| b[i][j]);
            let sub = L1Subproblem {
                cost_grad: &cost,
                ineq_values: &g,
                ineq_jac: &a_mat,
                eq_values: &h,
                eq_jac: &b_mat,
                penalty,
                lower: &lower,
                upper: &upper,
            };
            let d = sub.solve();
            for k in 0..n {
                assert!(d[k] >= lower[k] - 1e-9 && d[k] <= upper[k] + 1e-9);
            }
            let solved = sub.model_merit(&d);
            let best = oracle_2d(&sub);
            assert!(
                solved <= best + 1e-7 * (1.0 + best.abs()),
                "case {case}: simplex {solved} vs oracle {best}"
            );
        }
    }

    #[test]
    fn zero_step_when_already_optimal() {
        // Gradient zero, constraints satisfied: stay put.
        let (d, value) = solve_case(Case {
            cost: &[0.0, 0.0],
            g: &[-1.0],
            a: vec![vec![1.0, 1.0]],
            h: &[],
            b: vec![],
            penalty: 10.0,
            lower: &[-1.0, -1.0],
            upper: &[1.0, 1.0],
        });
        assert!(d[0].abs() < 1e-9 && d[1].abs() < 1e-9);
        assert!(value.abs() < 1e-9);
    }

    #[test]
    fn local_optimality_at_solver_scale_dimensions() {
        // The model merit is convex piecewise-linear, so a point with no
        // improving direction is the global optimum. Probe random line
        // directions through the returned step at sizes matching real
        // subproblems.
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for case in 0..40 {
            let n = rng.random_range(4..9);
            let m = rng.random_range(5..25);
            let e = rng.random_range(0..4);
            let cost: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let g: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let a: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..n).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect();
            let h: Vec<f64> = (0..e).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b: Vec<Vec<f64>> = (0..e)
                .map(|_| (0..n).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect();
            let penalty = rng.random_range(0.5..50.0);
            let lower: Vec<f64> = (0..n).map(|_| -rng.random_range(0.05..1.0)).collect();
            let upper: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();

            let a_mat = DMatrix::from_fn(m, n, |i, j| a[i][j]);
            let b_mat = DMatrix::from_fn(e, n, |i, j| b[i][j]);
            let sub = L1Subproblem {
                cost_grad: &cost,
                ineq_values: &g,
                ineq_jac: &a_mat,
                eq_values: &h,
                eq_jac: &b_mat,
                penalty,
                lower: &lower,
                upper: &upper,
            };
            let d = sub.solve();
            for k in 0..n {
                assert!(d[k] >= lower[k] - 1e-9 && d[k] <= upper[k] + 1e-9);
            }
            let solved = sub.model_merit(&d);
            for _ in 0..60 {
                let dir: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                for step in [1e-4, 1e-2, 0.3, 1.0] {
                    let probe: Vec<f64> = (0..n)
                        .map(|k| (d[k] + step * dir[k]).clamp(lower[k], upper[k]))
                        .collect();
                    let value = sub.model_merit(&probe);
                    assert!(
                        value >= solved - 1e-7 * (1.0 + solved.abs()),
                        "case {case}: improving direction found ({value} < {solved})"
                    );
                }
            }
        }
    }
}
