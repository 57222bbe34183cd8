//! Property tests for the simplex kernel against a vertex-enumeration oracle.

use proptest::prelude::*;
use superrep::lp::{gap_tol, solve_lp, LpProblem, LpSolution, Relation, Sense, FEAS_TOL};

/// Random bounded LP that is feasible by construction: rows are built around
/// an interior point `x0` of the box.
#[derive(Debug, Clone)]
struct Instance {
    problem: LpProblem,
}

fn instance() -> impl Strategy<Value = Instance> {
    (1usize..=8, 0usize..=3, any::<bool>()).prop_flat_map(|(n, m, maximize)| {
        (
            prop::collection::vec(-5.0f64..5.0, n),
            prop::collection::vec(0.5f64..4.0, n),
            prop::collection::vec(0.0f64..1.0, n),
            prop::collection::vec(
                (prop::collection::vec(-3.0f64..3.0, n), 0u8..3, 0.0f64..2.0),
                m,
            ),
        )
            .prop_map(move |(c, ub, frac, rows)| {
                let mut p = if maximize {
                    LpProblem::maximize(c)
                } else {
                    LpProblem::minimize(c)
                };
                let x0: Vec<f64> = ub.iter().zip(&frac).map(|(u, f)| u * f).collect();
                for (j, &u) in ub.iter().enumerate() {
                    p.set_bounds(j, 0.0, u);
                }
                for (a, kind, slack) in rows {
                    let ax0: f64 = a.iter().zip(&x0).map(|(x, y)| x * y).sum();
                    match kind {
                        0 => p.add_constraint(a, Relation::Le, ax0 + slack),
                        1 => p.add_constraint(a, Relation::Ge, ax0 - slack),
                        _ => p.add_constraint(a, Relation::Eq, ax0),
                    }
                }
                Instance { problem: p }
            })
    })
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&r, &s| a[r][c].abs().total_cmp(&a[s][c].abs()))?;
        if a[piv][c].abs() < 1e-10 {
            return None;
        }
        a.swap(piv, c);
        b.swap(piv, c);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Best objective over all basic feasible points of a boxed LP.
fn vertex_oracle(p: &LpProblem) -> Option<f64> {
    let n = p.num_vars();
    // hyperplanes: rows, then x_j = lower_j, then x_j = upper_j
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for row in &p.constraints {
        planes.push((row.coeffs.clone(), row.rhs));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), p.lower[j]));
        planes.push((e, p.upper[j]));
    }
    // Every vertex is cut out by n independent active planes; equality rows
    // are active everywhere, so they compete like any other plane.
    let k = n;
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let a = idx.iter().map(|&i| planes[i].0.clone()).collect();
        let b = idx.iter().map(|&i| planes[i].1).collect();
        if let Some(x) = solve_dense(a, b) {
            if p.max_violation(&x) <= 1e-8 {
                let v = p.objective_value(&x);
                best = Some(match (best, p.sense) {
                    (None, _) => v,
                    (Some(b), Sense::Minimize) => b.min(v),
                    (Some(b), Sense::Maximize) => b.max(v),
                });
            }
        }
        // next combination
        let mut i = k;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < planes.len() - k + i {
                idx[i] += 1;
                for t in i + 1..k {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matches_vertex_enumeration(inst in instance()) {
        let p = &inst.problem;
        let oracle = vertex_oracle(p);
        match solve_lp(p).unwrap() {
            LpSolution::Optimal(o) => {
                let expected = oracle.expect("feasible by construction");
                prop_assert!((o.value - expected).abs() <= 1e-6, "lp {} oracle {}", o.value, expected);
                prop_assert!(p.max_violation(&o.x) <= FEAS_TOL);
                prop_assert!((o.value - o.dual_value).abs() <= gap_tol(o.value));
            }
            other => prop_assert!(false, "unexpected {:?}", other.status()),
        }
    }

    #[test]
    fn dual_signs_match_relations(inst in instance()) {
        let p = &inst.problem;
        if let LpSolution::Optimal(o) = solve_lp(p).unwrap() {
            let flip = if p.sense == Sense::Minimize { 1.0 } else { -1.0 };
            for (row, y) in p.constraints.iter().zip(&o.duals) {
                match row.relation {
                    Relation::Ge => prop_assert!(flip * y >= -1e-9),
                    Relation::Le => prop_assert!(flip * y <= 1e-9),
                    Relation::Eq => {}
                }
            }
        }
    }

    #[test]
    fn permuted_copy_has_same_value(inst in instance(), seed in any::<u64>()) {
        let p = &inst.problem;
        let n = p.num_vars();
        let mut perm: Vec<usize> = (0..n).collect();
        // deterministic shuffle from the seed
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let mut q = LpProblem::new(p.sense, n);
        for (new, &old) in perm.iter().enumerate() {
            q.objective[new] = p.objective[old];
            q.set_bounds(new, p.lower[old], p.upper[old]);
        }
        for row in p.constraints.iter().rev() {
            let coeffs = perm.iter().map(|&old| row.coeffs[old]).collect();
            q.add_constraint(coeffs, row.relation, row.rhs);
        }
        let a = solve_lp(p).unwrap().value().unwrap();
        let b = solve_lp(&q).unwrap().value().unwrap();
        prop_assert!((a - b).abs() <= gap_tol(a));
    }

    #[test]
    fn farkas_certificate_is_valid(inst in instance(), shift in 0.5f64..3.0) {
        // Append a row contradicting an existing bound-feasible combination.
        let mut p = inst.problem.clone();
        let n = p.num_vars();
        let ones = vec![1.0; n];
        let cap: f64 = p.upper.iter().sum();
        p.add_constraint(ones, Relation::Ge, cap + shift);
        match solve_lp(&p).unwrap() {
            LpSolution::Infeasible { farkas } => {
                let mut sup = 0.0;
                for j in 0..n {
                    let g: f64 = p.constraints.iter().zip(&farkas).map(|(r, y)| r.coeffs[j] * y).sum();
                    sup += if g > 0.0 { g * p.upper[j] } else { g * p.lower[j] };
                }
                let rhs: f64 = p.constraints.iter().zip(&farkas).map(|(r, y)| r.rhs * y).sum();
                for (row, y) in p.constraints.iter().zip(&farkas) {
                    match row.relation {
                        Relation::Ge => prop_assert!(*y >= -1e-12),
                        Relation::Le => prop_assert!(*y <= 1e-12),
                        Relation::Eq => {}
                    }
                }
                prop_assert!(sup < rhs, "sup {} rhs {}", sup, rhs);
            }
            other => prop_assert!(false, "expected infeasible, got {:?}", other.status()),
        }
    }

    #[test]
    fn unbounded_ray_improves(c in prop::collection::vec(0.1f64..3.0, 1..6), a in prop::collection::vec(-2.0f64..-0.1, 1..6)) {
        // max c.x with a.x <= 1, a < 0: unbounded along any positive direction
        let n = c.len().min(a.len());
        let mut p = LpProblem::maximize(c[..n].to_vec());
        p.add_constraint(a[..n].to_vec(), Relation::Le, 1.0);
        match solve_lp(&p).unwrap() {
            LpSolution::Unbounded { ray } => {
                let gain: f64 = ray.iter().zip(&p.objective).map(|(r, c)| r * c).sum();
                prop_assert!(gain > 0.0);
                prop_assert!(ray.iter().all(|&r| r >= -1e-12));
                let ar: f64 = ray.iter().zip(&p.constraints[0].coeffs).map(|(r, c)| r * c).sum();
                prop_assert!(ar <= 1e-12);
            }
            other => prop_assert!(false, "{:?}", other.status()),
        }
    }
}
