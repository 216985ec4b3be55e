//! Nuclear-norm matrix completion as the SDP
//!
//! ```text
//! min ½ tr X   s.t.  X = [W₁ Y; Yᵀ W₂] ⪰ 0,  Y_ij = M_ij (ij ∈ Ω)
//! ```
//!
//! with `X` of order `n₁ + n₂`. Each constraint reads the block entry once:
//! `A_k • X = X_{i, n₁+j}`.

use std::collections::HashSet;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::factor::Factor;
use crate::problem::{SdpOperators, SdpProblem};
use crate::scalar::Scalar;

/// Observed entries `(i, j, M_ij)`, 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    n1: usize,
    n2: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl ObservationSet {
    pub fn new(n1: usize, n2: usize, entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::InvalidArgument("matrix dimensions must be positive".into()));
        }
        let mut seen = HashSet::with_capacity(entries.len());
        for &(i, j, v) in &entries {
            if i < 1 || i > n1 || j < 1 || j > n2 {
                return Err(Error::InvalidArgument(format!("entry ({i}, {j}) outside {n1}×{n2}")));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite("observation value"));
            }
            if !seen.insert((i, j)) {
                return Err(Error::InvalidArgument(format!("duplicate observation ({i}, {j})")));
            }
        }
        Ok(ObservationSet { n1, n2, entries })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// Frobenius norm of the zero-filled completion.
    pub fn trivial_completion_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.2 * e.2).sum::<f64>().sqrt()
    }

    /// Parses CSV with an `n1,n2` header line followed by `i,j,value` lines.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut dims: Option<(usize, usize)> = None;
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let perr = |msg: String| Error::Parse { line: line_no, msg };
            let int = |t: &str| t.parse::<usize>().map_err(|_| perr(format!("expected an index, found {t:?}")));
            match dims {
                None => {
                    if fields.len() != 2 {
                        return Err(perr("expected header \"n1,n2\"".into()));
                    }
                    dims = Some((int(fields[0])?, int(fields[1])?));
                }
                Some((n1, n2)) => {
                    if fields.len() != 3 {
                        return Err(perr(format!("expected \"i,j,value\", found {} fields", fields.len())));
                    }
                    let (i, j) = (int(fields[0])?, int(fields[1])?);
                    let v: f64 = fields[2]
                        .parse()
                        .map_err(|_| perr(format!("expected a number, found {:?}", fields[2])))?;
                    if i < 1 || i > n1 || j < 1 || j > n2 {
                        return Err(perr(format!("entry ({i}, {j}) outside {n1}×{n2}")));
                    }
                    entries.push((i, j, v));
                }
            }
        }
        let (n1, n2) = dims.ok_or(Error::Parse {
            line: 0,
            msg: "missing \"n1,n2\" header".into(),
        })?;
        Self::new(n1, n2, entries).map_err(|e| Error::Parse {
            line: 0,
            msg: e.to_string(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{},{}\n", self.n1, self.n2);
        for (i, j, v) in &self.entries {
            s.push_str(&format!("{i},{j},{v:e}\n"));
        }
        s
    }
}

pub fn load_observations(path: impl AsRef<Path>) -> Result<ObservationSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    ObservationSet::parse_csv(&text)
}

struct MatCompOps {
    /// 0-based `(row, n₁ + col)` pairs.
    pairs: Vec<(usize, usize)>,
}

impl<F: Scalar> SdpOperators<F> for MatCompOps {
    fn apply_objective(&self, v: &[F], out: &mut [F]) {
        for (o, &x) in out.iter_mut().zip(v) {
            *o = x * F::from_real(0.5);
        }
    }

    fn apply_adjoint(&self, p: &[f64], v: &[F], out: &mut [F]) {
        out.fill(F::zero());
        for (&(i, k), &pk) in self.pairs.iter().zip(p) {
            let h = F::from_real(0.5 * pk);
            out[i] += h * v[k];
            out[k] += h * v[i];
        }
    }

    fn quadratic_constraint(&self, y: &[F], out: &mut [f64]) {
        for (o, &(i, k)) in out.iter_mut().zip(&self.pairs) {
            *o = (y[i] * y[k].conjugate()).real();
        }
    }
}

/// Trace bound `τ = 2 √min(n₁, n₂) ‖Y₀‖_F` from the zero-filled completion
/// `Y₀` (a bound on `2‖Y₀‖_*`).
pub fn build_matrix_completion(obs: &ObservationSet) -> Result<SdpProblem<f64>> {
    let n = obs.n1 + obs.n2;
    let pairs = obs.entries.iter().map(|&(i, j, _)| (i - 1, obs.n1 + j - 1)).collect();
    let b = obs.entries.iter().map(|e| e.2).collect();
    let mut tau = 2.0 * (obs.n1.min(obs.n2) as f64).sqrt() * obs.trivial_completion_norm();
    if !(tau > 0.0) {
        tau = 1.0;
    }
    SdpProblem::new(n, b, tau, Arc::new(MatCompOps { pairs }), Some(0.5 * (n as f64).sqrt()))
}

/// Number of samples `⌈γ r (n₁ + n₂ − r)⌉` with `γ = r ln(n₁ + n₂)`.
pub fn sample_count(n1: usize, n2: usize, r: usize) -> usize {
    let gamma = r as f64 * ((n1 + n2) as f64).ln();
    (gamma * r as f64 * (n1 + n2 - r) as f64).ceil() as usize
}

/// Low-rank `M = U Vᵀ` with standard normal factors, observed on
/// [`sample_count`] uniformly random entries without replacement.
pub fn generate_matrix_completion(n1: usize, n2: usize, r: usize, seed: u64) -> Result<(ObservationSet, DMatrix<f64>)> {
    if r == 0 || r > n1.min(n2) {
        return Err(Error::InvalidArgument(format!("rank {r} must lie in 1..={}", n1.min(n2))));
    }
    let m = sample_count(n1, n2, r);
    if m > n1 * n2 {
        return Err(Error::InvalidArgument(format!(
            "sample count {m} exceeds the {} entries",
            n1 * n2
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = DMatrix::<f64>::from_fn(n1, r, |_, _| StandardNormal.sample(&mut rng));
    let v = DMatrix::<f64>::from_fn(n2, r, |_, _| StandardNormal.sample(&mut rng));
    let truth = &u * v.transpose();
    let mut idx = sample(&mut rng, n1 * n2, m).into_vec();
    idx.sort_unstable();
    let entries = idx
        .into_iter()
        .map(|k| {
            let (i, j) = (k / n2, k % n2);
            (i + 1, j + 1, truth[(i, j)])
        })
        .collect();
    Ok((ObservationSet::new(n1, n2, entries)?, truth))
}

/// The off-diagonal block `Y` of `X = U Uᵀ`.
pub fn recovered_block(u: &Factor<f64>, n1: usize) -> DMatrix<f64> {
    let x = u.outer();
    x.view((0, n1), (n1, u.n() - n1)).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_observation_hand_check() {
        let obs = ObservationSet::new(1, 1, vec![(1, 1, 5.0)]).unwrap();
        let p = build_matrix_completion(&obs).unwrap();
        assert_eq!((p.n(), p.m()), (2, 1));
        let s = 5f64.sqrt();
        let y = Factor::from_vector(vec![s, s]);
        assert!((p.apply_constraint(&y).unwrap()[0] - 5.0).abs() < 1e-14);
        assert!((p.tau() - 10.0).abs() < 1e-14);
    }

    #[test]
    fn constraint_is_block_entry_product() {
        let obs = ObservationSet::new(2, 3, vec![(2, 3, 1.0)]).unwrap();
        let p = build_matrix_completion(&obs).unwrap();
        let y = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(p.q_a(&y), vec![2.0 * 5.0]);
    }

    #[test]
    fn sample_count_formula() {
        assert_eq!(sample_count(50, 50, 2), 1806);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(ObservationSet::new(2, 2, vec![(1, 1, 1.0), (1, 1, 2.0)]).is_err());
        assert!(ObservationSet::new(2, 2, vec![(3, 1, 1.0)]).is_err());
        assert!(generate_matrix_completion(5, 5, 6, 0).is_err());
        assert!(generate_matrix_completion(4, 4, 2, 0).is_err());
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let o = ObservationSet::parse_csv("2,3\n1,2,0.5\n").unwrap();
        assert_eq!(o.entries(), &[(1, 2, 0.5)]);
        assert_eq!(ObservationSet::parse_csv(&o.to_csv()).unwrap(), o);
        assert!(matches!(ObservationSet::parse_csv("2,3\n1,x,0.5\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn generator_deterministic() {
        let (a, ma) = generate_matrix_completion(40, 40, 2, 3).unwrap();
        let (b, mb) = generate_matrix_completion(40, 40, 2, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(ma, mb);
        assert_eq!(a.entries().len(), sample_count(40, 40, 2));
    }
}
