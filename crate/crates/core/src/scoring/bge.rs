//! The BGe marginal likelihood for Gaussian data.
//!
//! Normal-Wishart prior with mean `nu`, `alpha_mu` pseudo-observations on the
//! mean, `alpha_w` degrees of freedom and prior matrix `T = t_scale * I`. With
//! `R = T + S_N + (N alpha_mu / (N + alpha_mu)) (nu - mean)(nu - mean)^T` the
//! score of node `i` with parents `Pa` is the ratio of the marginal likelihoods
//! of the variable sets `Pa + {i}` and `Pa`.

use alloc::string::String;
use alloc::vec::Vec;

use super::ScoreError;
use crate::logmath::{lgamma, log, sqrt};
use crate::nodeset::NodeSet;

/// Observations in row-major order: `values[row * n_vars + col]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    n_obs: usize,
    n_vars: usize,
    values: Vec<f64>,
    names: Vec<String>,
}

impl DataSet {
    pub fn new(n_vars: usize, values: Vec<f64>, names: Vec<String>) -> Result<Self, ScoreError> {
        if n_vars == 0 || values.is_empty() {
            return Err(ScoreError::NoObservations);
        }
        if !values.len().is_multiple_of(n_vars) || names.len() != n_vars {
            return Err(ScoreError::Shape {
                rows: values.len() / n_vars,
                cols: n_vars,
                found: values.len(),
            });
        }
        if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
            return Err(ScoreError::NonFinite { row: idx / n_vars, col: idx % n_vars });
        }
        Ok(DataSet { n_obs: values.len() / n_vars, n_vars, values, names })
    }

    /// Builds a data set with names `X1, .., Xn`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, ScoreError> {
        let n_vars = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != n_vars) {
            return Err(ScoreError::Shape { rows: rows.len(), cols: n_vars, found: bad.len() });
        }
        let names = (1..=n_vars).map(|i| alloc::format!("X{i}")).collect();
        Self::new(n_vars, rows.concat(), names)
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_vars + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.n_vars..(row + 1) * self.n_vars]
    }

    /// Rows in a canonical (lexicographic) order so that sums do not depend on
    /// the order observations were supplied in.
    fn canonical_rows(&self) -> Vec<&[f64]> {
        let mut rows: Vec<&[f64]> = self.values.chunks_exact(self.n_vars).collect();
        rows.sort_by(|a, b| {
            a.iter()
                .zip(b.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(core::cmp::Ordering::Equal)
        });
        rows
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut means = alloc::vec![0.0; self.n_vars];
        for row in self.canonical_rows() {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= self.n_obs as f64;
        }
        means
    }

    /// Centred scatter matrix `sum_k (x_k - mean)(x_k - mean)^T`, row-major.
    pub fn scatter_matrix(&self) -> Vec<f64> {
        let n = self.n_vars;
        let means = self.column_means();
        let mut s = alloc::vec![0.0; n * n];
        let mut centred = alloc::vec![0.0; n];
        for row in self.canonical_rows() {
            for ((c, v), m) in centred.iter_mut().zip(row).zip(&means) {
                *c = v - m;
            }
            for a in 0..n {
                for b in 0..=a {
                    s[a * n + b] += centred[a] * centred[b];
                }
            }
        }
        for a in 0..n {
            for b in 0..a {
                s[b * n + a] = s[a * n + b];
            }
        }
        s
    }

    /// First column whose values are all identical.
    pub fn constant_column(&self) -> Option<usize> {
        (0..self.n_vars).find(|&c| {
            let first = self.get(0, c);
            (1..self.n_obs).all(|r| self.get(r, c) == first)
        })
    }
}

/// BGe hyperparameters. `None` fields take their defaults for the data at hand:
/// `alpha_w = n + alpha_mu + 1`, `nu` = column means,
/// `t_scale = alpha_mu (alpha_w - n - 1) / (alpha_mu + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BgeParams {
    pub alpha_mu: f64,
    pub alpha_w: Option<f64>,
    pub nu: Option<Vec<f64>>,
    pub t_scale: Option<f64>,
}

impl Default for BgeParams {
    fn default() -> Self {
        BgeParams { alpha_mu: 1.0, alpha_w: None, nu: None, t_scale: None }
    }
}

/// BGe scorer with the posterior matrix `R` precomputed.
#[derive(Debug, Clone)]
pub struct BgeScorer {
    n: usize,
    n_obs: usize,
    alpha_mu: f64,
    alpha_w: f64,
    t_scale: f64,
    posterior: Vec<f64>,
}

impl BgeScorer {
    pub fn new(data: &DataSet, params: &BgeParams) -> Result<Self, ScoreError> {
        let n = data.n_vars();
        let n_obs = data.n_obs();
        let alpha_mu = params.alpha_mu;
        if !(alpha_mu > 0.0) {
            return Err(ScoreError::Hyperparameters("alpha_mu must be positive"));
        }
        let alpha_w = params.alpha_w.unwrap_or(n as f64 + alpha_mu + 1.0);
        if !(alpha_w > n as f64 - 1.0) {
            return Err(ScoreError::Hyperparameters("alpha_w must exceed n - 1"));
        }
        let t_scale = params
            .t_scale
            .unwrap_or(alpha_mu * (alpha_w - n as f64 - 1.0) / (alpha_mu + 1.0));
        if !(t_scale > 0.0) {
            return Err(ScoreError::Hyperparameters("t_scale must be positive"));
        }
        let means = data.column_means();
        let nu = match &params.nu {
            Some(nu) if nu.len() != n => {
                return Err(ScoreError::Hyperparameters("nu must have one entry per variable"))
            }
            Some(nu) => nu.clone(),
            None => means.clone(),
        };
        let mut posterior = data.scatter_matrix();
        let shrink = n_obs as f64 * alpha_mu / (n_obs as f64 + alpha_mu);
        for a in 0..n {
            for b in 0..n {
                posterior[a * n + b] += shrink * (nu[a] - means[a]) * (nu[b] - means[b]);
            }
            posterior[a * n + a] += t_scale;
        }
        Ok(BgeScorer { n, n_obs, alpha_mu, alpha_w, t_scale, posterior })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha_w(&self) -> f64 {
        self.alpha_w
    }

    pub fn t_scale(&self) -> f64 {
        self.t_scale
    }

    /// `log det R[S, S]` via Cholesky; `None` if the block is not positive definite.
    fn log_det(&self, set: NodeSet) -> Option<f64> {
        let idx: Vec<usize> = set.iter().collect();
        let k = idx.len();
        let mut l = alloc::vec![0.0; k * k];
        let mut log_det = 0.0;
        for i in 0..k {
            for j in 0..=i {
                let mut sum = self.posterior[idx[i] * self.n + idx[j]];
                for p in 0..j {
                    sum -= l[i * k + p] * l[j * k + p];
                }
                if i == j {
                    if !(sum > 0.0) {
                        return None;
                    }
                    let d = sqrt(sum);
                    l[i * k + i] = d;
                    log_det += 2.0 * log(d);
                } else {
                    l[i * k + j] = sum / l[j * k + j];
                }
            }
        }
        Some(log_det)
    }

    /// `log S(X_node, parents | D)`.
    pub fn node_log_score(&self, node: usize, parents: NodeSet) -> Result<f64, ScoreError> {
        debug_assert!(!parents.contains(node));
        let n_obs = self.n_obs as f64;
        let p = parents.len() as f64;
        let dof = self.alpha_w - self.n as f64 + p + 1.0;
        let not_pd = || ScoreError::NotPositiveDefinite { node, parents };
        let det_family = self.log_det(parents.with(node)).ok_or_else(not_pd)?;
        let det_parents = self.log_det(parents).ok_or_else(not_pd)?;
        let score = 0.5 * log(self.alpha_mu / (n_obs + self.alpha_mu))
            + lgamma((n_obs + dof) / 2.0)
            - lgamma(dof / 2.0)
            - n_obs / 2.0 * log(core::f64::consts::PI)
            + (dof + p) / 2.0 * log(self.t_scale)
            - (n_obs + dof) / 2.0 * det_family
            + (n_obs + dof - 1.0) / 2.0 * det_parents;
        if score.is_finite() {
            Ok(score)
        } else {
            Err(ScoreError::NonFiniteScore { node, parents })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn two_var_data() -> DataSet {
        let rows = vec![
            vec![0.3, 1.1],
            vec![-1.2, -2.0],
            vec![0.8, 1.9],
            vec![2.1, 3.7],
            vec![-0.4, -0.1],
            vec![1.0, 2.4],
        ];
        DataSet::from_rows(&rows).unwrap()
    }

    #[test]
    fn default_hyperparameters() {
        let s = BgeScorer::new(&two_var_data(), &BgeParams::default()).unwrap();
        assert_eq!(s.alpha_w(), 4.0);
        assert!((s.t_scale() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn score_equivalence_two_nodes() {
        let s = BgeScorer::new(&two_var_data(), &BgeParams::default()).unwrap();
        let a = s.node_log_score(0, NodeSet::singleton(1)).unwrap()
            + s.node_log_score(1, NodeSet::EMPTY).unwrap();
        let b = s.node_log_score(1, NodeSet::singleton(0)).unwrap()
            + s.node_log_score(0, NodeSet::EMPTY).unwrap();
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn row_permutation_is_bit_identical() {
        let data = two_var_data();
        let mut rows: Vec<Vec<f64>> = (0..data.n_obs()).map(|r| data.row(r).to_vec()).collect();
        rows.reverse();
        let shuffled = DataSet::from_rows(&rows).unwrap();
        let a = BgeScorer::new(&data, &BgeParams::default()).unwrap();
        let b = BgeScorer::new(&shuffled, &BgeParams::default()).unwrap();
        let pa = NodeSet::singleton(1);
        let (sa, sb) = (a.node_log_score(0, pa).unwrap(), b.node_log_score(0, pa).unwrap());
        assert_eq!(sa.to_bits(), sb.to_bits());

        let mut doubled = rows.clone();
        doubled.extend(rows.iter().cloned());
        let c = BgeScorer::new(&DataSet::from_rows(&doubled).unwrap(), &BgeParams::default())
            .unwrap();
        let sc = c.node_log_score(0, pa).unwrap();
        assert!((sc - sa).abs() > 1e-3, "{sc} vs {sa}");
    }

    #[test]
    fn rejects_bad_hyperparameters() {
        let data = two_var_data();
        let bad = BgeParams { alpha_w: Some(0.5), ..BgeParams::default() };
        assert!(matches!(BgeScorer::new(&data, &bad), Err(ScoreError::Hyperparameters(_))));
        let bad = BgeParams { alpha_mu: 0.0, ..BgeParams::default() };
        assert!(BgeScorer::new(&data, &bad).is_err());
    }

    #[test]
    fn data_validation() {
        assert_eq!(DataSet::from_rows(&[]), Err(ScoreError::NoObservations));
        let nan = DataSet::from_rows(&[vec![1.0, f64::NAN]]);
        assert_eq!(nan, Err(ScoreError::NonFinite { row: 0, col: 1 }));
        let constant = DataSet::from_rows(&[vec![1.0, 2.0], vec![1.0, 3.0]]).unwrap();
        assert_eq!(constant.constant_column(), Some(0));
    }
}
