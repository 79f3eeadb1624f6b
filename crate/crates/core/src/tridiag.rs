//! Symmetric tridiagonal eigensolver: Sturm-sequence bisection for
//! selected eigenvalues (no full diagonalization) and inverse iteration
//! with reorthogonalization for the matching eigenvectors.

use crate::error::CoreError;

/// Symmetric tridiagonal matrix: `diag` of length n, `off` of length n−1.
#[derive(Clone, Debug)]
pub struct SymTridiag {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self, CoreError> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(CoreError::InvalidParam(format!(
                "tridiagonal shape mismatch: {} diagonal, {} off-diagonal entries",
                diag.len(),
                off.len()
            )));
        }
        if diag.iter().chain(off.iter()).any(|v| !v.is_finite()) {
            return Err(CoreError::InvalidParam(
                "tridiagonal entries must be finite".into(),
            ));
        }
        Ok(SymTridiag { diag, off })
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// ∞-norm bound used to scale perturbations and convergence tests.
    fn norm_bound(&self) -> f64 {
        let n = self.n();
        let mut a = 0.0_f64;
        for i in 0..n {
            let mut row = self.diag[i].abs();
            if i > 0 {
                row += self.off[i - 1].abs();
            }
            if i + 1 < n {
                row += self.off[i].abs();
            }
            a = a.max(row);
        }
        a.max(f64::MIN_POSITIVE)
    }

    /// Gershgorin interval certainly containing every eigenvalue.
    fn bounds(&self) -> (f64, f64) {
        let n = self.n();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            let mut radius = 0.0;
            if i > 0 {
                radius += self.off[i - 1].abs();
            }
            if i + 1 < n {
                radius += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - radius);
            hi = hi.max(self.diag[i] + radius);
        }
        let pad = 1e-12 * (1.0 + hi.abs().max(lo.abs()));
        (lo - pad, hi + pad)
    }

    /// Number of eigenvalues strictly below `x`, by counting negative
    /// pivots of the shifted LDLᵀ recurrence (with a pivot-underflow
    /// guard so splits at zero pivots count consistently).
    pub fn count_below(&self, x: f64) -> usize {
        let pivmin = f64::MIN_POSITIVE
            .max(f64::EPSILON * f64::EPSILON * self.off.iter().fold(0.0_f64, |m, b| m.max(b * b)));
        let mut count = 0usize;
        let mut d = 1.0_f64;
        for i in 0..self.n() {
            let off2 = if i == 0 {
                0.0
            } else {
                self.off[i - 1] * self.off[i - 1]
            };
            d = (self.diag[i] - x) - off2 / d;
            if d.abs() < pivmin {
                d = -pivmin;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// j-th smallest eigenvalue (0-based), bisected to relative machine
    /// precision of the spectrum scale.
    pub fn eigenvalue(&self, j: usize) -> Result<f64, CoreError> {
        let n = self.n();
        if j >= n {
            return Err(CoreError::InvalidParam(format!(
                "eigenvalue index {j} out of range for dimension {n}"
            )));
        }
        let (mut lo, mut hi) = self.bounds();
        let scale = hi.abs().max(lo.abs()).max(1.0);
        for _ in 0..200 {
            if hi - lo <= 4.0 * f64::EPSILON * scale {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) >= j + 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        if hi - lo > 1e-8 * scale {
            return Err(CoreError::Eigensolver(format!(
                "bisection failed to converge for index {j}: bracket width {:.3e}",
                hi - lo
            )));
        }
        Ok(0.5 * (lo + hi))
    }

    /// Solve (T − λI)x = b by tridiagonal Gaussian elimination with
    /// partial pivoting (one extra superdiagonal of fill-in). Zero pivots
    /// are replaced by a tiny value — exactly what inverse iteration
    /// wants near an eigenvalue.
    fn shifted_solve(&self, lambda: f64, b: &[f64]) -> Vec<f64> {
        let n = self.n();
        let tiny = f64::MIN_POSITIVE / f64::EPSILON;
        let mut d: Vec<f64> = self.diag.iter().map(|&a| a - lambda).collect();
        let mut du: Vec<f64> = self.off.clone();
        let mut dl: Vec<f64> = self.off.clone();
        let mut du2 = vec![0.0_f64; n.saturating_sub(2)];
        let mut swap = vec![false; n.saturating_sub(1)];
        let mut x = b.to_vec();

        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swap[i] = true;
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }

        // forward sweep on the right-hand side
        for i in 0..n - 1 {
            if swap[i] {
                let temp = x[i];
                x[i] = x[i + 1];
                x[i + 1] = temp - dl[i] * x[i + 1];
            } else {
                x[i + 1] -= dl[i] * x[i];
            }
        }
        // back substitution
        x[n - 1] /= d[n - 1];
        if n >= 2 {
            x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
        }
        x
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += self.off[i] * x[i + 1];
            }
            y[i] = v;
        }
        y
    }

    /// The `m` smallest eigenpairs. Eigenvalues come from bisection;
    /// each vector from inverse iteration started at a deterministic
    /// vector, with two modified-Gram-Schmidt passes against the
    /// previously accepted vectors per sweep so clustered eigenvalues
    /// still return an orthonormal set.
    pub fn smallest_eigenpairs(&self, m: usize) -> Result<Vec<(f64, Vec<f64>)>, CoreError> {
        let n = self.n();
        if m == 0 || m > n {
            return Err(CoreError::InvalidParam(format!(
                "requested {m} eigenpairs from dimension {n}"
            )));
        }
        let anorm = self.norm_bound();
        let mut out: Vec<(f64, Vec<f64>)> = Vec::with_capacity(m);
        for j in 0..m {
            let lam = self.eigenvalue(j)?;
            // tiny shift off the exact value keeps the factorization
            // well-defined without hurting the solve's amplification
            let shift = lam + f64::EPSILON * anorm * (1.0 + j as f64);
            // deterministic pseudo-random start vector
            let mut v: Vec<f64> = (0..n)
                .map(|i| {
                    let s = (i as f64 + 1.0) * (j as f64 + 1.372);
                    (s.sin() * 43758.5453).fract() - 0.5
                })
                .collect();
            normalize(&mut v);
            let mut converged = false;
            for _ in 0..8 {
                let mut w = self.shifted_solve(shift, &v);
                if w.iter().any(|x| !x.is_finite()) {
                    // restart from a shifted seed if the solve overflowed
                    v.iter_mut().enumerate().for_each(|(i, x)| {
                        *x = ((i as f64 * 0.7391 + 0.213).sin() * 104_729.0).fract() - 0.5
                    });
                    normalize(&mut v);
                    continue;
                }
                for _ in 0..2 {
                    for (_, prev) in &out {
                        let dot: f64 = w.iter().zip(prev).map(|(a, b)| a * b).sum();
                        w.iter_mut().zip(prev).for_each(|(a, b)| *a -= dot * b);
                    }
                }
                let nw = norm(&w);
                if nw == 0.0 {
                    v.iter_mut()
                        .enumerate()
                        .for_each(|(i, x)| *x = if i % 2 == 0 { 1.0 } else { -0.7 });
                    normalize(&mut v);
                    continue;
                }
                w.iter_mut().for_each(|x| *x /= nw);
                v = w;
                let tv = self.apply(&v);
                let resid: f64 = tv
                    .iter()
                    .zip(&v)
                    .map(|(t, x)| (t - lam * x) * (t - lam * x))
                    .sum::<f64>()
                    .sqrt();
                if resid <= 1e3 * f64::EPSILON * anorm.max(lam.abs()) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                // accept only if the residual is still respectable
                let tv = self.apply(&v);
                let resid: f64 = tv
                    .iter()
                    .zip(&v)
                    .map(|(t, x)| (t - lam * x) * (t - lam * x))
                    .sum::<f64>()
                    .sqrt();
                if resid > 1e-8 * anorm.max(1.0) {
                    return Err(CoreError::Eigensolver(format!(
                        "inverse iteration stalled at index {j}: residual {resid:.3e}"
                    )));
                }
            }
            // sign convention: largest-magnitude entry positive
            let imax = v
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .map(|(i, _)| i)
                .unwrap_or(0);
            if v[imax] < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            out.push((lam, v));
        }
        Ok(out)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn normalize(v: &mut [f64]) {
    let n = norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_by_two_known_eigensystem() {
        let t = SymTridiag::new(vec![2.0, 2.0], vec![1.0]).unwrap();
        let pairs = t.smallest_eigenpairs(2).unwrap();
        assert!((pairs[0].0 - 1.0).abs() < 1e-14);
        assert!((pairs[1].0 - 3.0).abs() < 1e-14);
        let s = 1.0 / 2.0_f64.sqrt();
        let v0 = &pairs[0].1;
        assert!((v0[0].abs() - s).abs() < 1e-12 && (v0[0] + v0[1]).abs() < 1e-12);
        let v1 = &pairs[1].1;
        assert!((v1[0] - s).abs() < 1e-12 && (v1[1] - s).abs() < 1e-12);
    }

    #[test]
    fn discrete_laplacian_matches_closed_form() {
        let n = 50;
        let t = SymTridiag::new(vec![2.0; n], vec![-1.0; n - 1]).unwrap();
        let pairs = t.smallest_eigenpairs(6).unwrap();
        let nn = (n + 1) as f64;
        for (j, (lam, v)) in pairs.iter().enumerate() {
            let arg = (j as f64 + 1.0) * std::f64::consts::PI / (2.0 * nn);
            let exact = 4.0 * arg.sin().powi(2);
            assert!((lam - exact).abs() < 1e-12, "λ_{j}");
            // eigenvector ∝ sin((i+1)(j+1)π/(n+1))
            let mut w: Vec<f64> = (0..n)
                .map(|i| {
                    ((i as f64 + 1.0) * (j as f64 + 1.0) * std::f64::consts::PI / nn).sin()
                })
                .collect();
            normalize(&mut w);
            let dot: f64 = w.iter().zip(v).map(|(a, b)| a * b).sum();
            assert!((dot.abs() - 1.0).abs() < 1e-10, "v_{j} alignment {dot}");
        }
    }

    #[test]
    fn counts_are_consistent_with_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        let n = 40;
        let diag: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let off: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let t = SymTridiag::new(diag, off).unwrap();
        let mut lams = Vec::new();
        for j in 0..n {
            lams.push(t.eigenvalue(j).unwrap());
        }
        for w in lams.windows(2) {
            assert!(w[0] <= w[1] + 1e-12);
        }
        for (j, lam) in lams.iter().enumerate() {
            assert!(t.count_below(lam - 1e-9) <= j);
            assert!(t.count_below(lam + 1e-9) >= j + 1);
        }
    }

    #[test]
    fn matches_dense_symmetric_eigensolver() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let n = 30;
        let diag: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let off: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let t = SymTridiag::new(diag.clone(), off.clone()).unwrap();

        let mut dense = nalgebra::DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            dense[(i, i)] = diag[i];
            if i + 1 < n {
                dense[(i, i + 1)] = off[i];
                dense[(i + 1, i)] = off[i];
            }
        }
        let mut dense_eigs: Vec<f64> = dense
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        dense_eigs.sort_by(f64::total_cmp);

        let pairs = t.smallest_eigenpairs(8).unwrap();
        for (j, (lam, v)) in pairs.iter().enumerate() {
            assert!(
                (lam - dense_eigs[j]).abs() < 1e-10 * (1.0 + lam.abs()),
                "λ_{j}: {lam} vs {}",
                dense_eigs[j]
            );
            // residual ‖Tv − λv‖ small and unit norm
            let tv = t.apply(v);
            let resid: f64 = tv
                .iter()
                .zip(v)
                .map(|(a, b)| (a - lam * b) * (a - lam * b))
                .sum::<f64>()
                .sqrt();
            assert!(resid < 1e-10 * (1.0 + lam.abs()), "residual {resid:.3e}");
            assert!((norm(v) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn clustered_eigenvalues_get_orthogonal_vectors() {
        // two nearly-degenerate interior eigenvalues via weak coupling
        let t = SymTridiag::new(
            vec![1.0, 1.0 + 1e-11, 4.0, 7.0],
            vec![1e-12, 1e-3, 1e-3],
        )
        .unwrap();
        let pairs = t.smallest_eigenpairs(3).unwrap();
        assert!((pairs[0].0 - 1.0).abs() < 1e-6);
        assert!((pairs[1].0 - 1.0).abs() < 1e-6);
        for i in 0..pairs.len() {
            for j in (i + 1)..pairs.len() {
                let dot: f64 = pairs[i].1.iter().zip(&pairs[j].1).map(|(a, b)| a * b).sum();
                assert!(dot.abs() < 1e-8, "⟨v{i},v{j}⟩ = {dot:.3e}");
            }
        }
        // exact degeneracy from decoupled identical blocks
        let t = SymTridiag::new(vec![1.0, 1.0], vec![0.0]).unwrap();
        let pairs = t.smallest_eigenpairs(2).unwrap();
        assert_eq!(pairs[0].0, pairs[1].0);
        let dot: f64 = pairs[0].1.iter().zip(&pairs[1].1).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-12);
    }

    #[test]
    fn shape_validation() {
        assert!(SymTridiag::new(vec![], vec![]).is_err());
        assert!(SymTridiag::new(vec![1.0, 2.0], vec![]).is_err());
        assert!(SymTridiag::new(vec![1.0, f64::NAN], vec![0.5]).is_err());
        let t = SymTridiag::new(vec![1.0], vec![]).unwrap();
        assert!((t.eigenvalue(0).unwrap() - 1.0).abs() < 1e-12);
        assert!(t.eigenvalue(1).is_err());
        assert!(t.smallest_eigenpairs(0).is_err());
    }
}
