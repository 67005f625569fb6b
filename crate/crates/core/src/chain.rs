//! The finite Markov chain induced on a normal finite subgroup.
//!
//! Fix a finite normal subgroup `F` and a step measure `kappa` on the
//! ambient group. Reading a `kappa`-increment `x` against a current state
//! `f` in `F` either multiplies inside the subgroup (when `x` lies in
//! `F`) or pushes `f` through `x` by conjugation (when it does not);
//! normality keeps the conjugated state inside `F`. Aggregating the two
//! move kinds by their `kappa`-mass yields an `|F|`-state transition
//! matrix with exact rational entries:
//!
//! ```text
//! P(f -> g) = sum over x in F with f·x = g of kappa(x)
//!           + sum over x outside F of kappa(x) where x⁻¹·f·x = g
//! ```
//!
//! For symmetric `kappa` the matrix is symmetric, hence doubly
//! stochastic and reversible with the uniform stationary law, and any
//! identity mass in `kappa` puts a self-loop on every state. All checks
//! here are exact comparisons, and mixing is profiled through exact
//! matrix powers.

use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::group::{Elem, Subgroup};
use crate::measure::Measure;
use crate::{Error, Result};

/// The induced chain: states, exact transition matrix, and its
/// decomposition into in-subgroup and conjugation moves.
#[derive(Debug, Clone)]
pub struct FactorChain {
    states: Vec<Elem>,
    /// Full transition matrix, row-stochastic.
    matrix: Vec<Vec<BigRational>>,
    /// Mass moving by right multiplication inside the subgroup.
    right_part: Vec<Vec<BigRational>>,
    /// Mass moving by conjugation from outside the subgroup.
    conj_part: Vec<Vec<BigRational>>,
    /// Step-measure mass at the identity (a lower bound for every
    /// diagonal entry).
    identity_mass: BigRational,
}

/// Exact total-variation trace of the chain against its uniform target.
#[derive(Debug, Clone)]
pub struct MixingProfile {
    /// Worst-case-start total variation distance at each horizon.
    pub entries: Vec<(u64, BigRational)>,
    pub threshold: BigRational,
    /// First horizon whose distance drops below the threshold.
    pub settled_at: Option<u64>,
}

impl FactorChain {
    /// Builds the chain directly from a given step measure.
    ///
    /// Requires an exact measure whose support contains all of `F`, and
    /// every support element must conjugate `F` into itself; the first
    /// escaping pair is reported otherwise.
    pub fn from_step_measure(kappa: &Measure, subgroup: &Subgroup) -> Result<FactorChain> {
        let group = kappa.group().clone();
        if **subgroup.parent() != *group {
            return Err(Error::GroupMismatch(
                "subgroup belongs to a different group".into(),
            ));
        }
        if !kappa.is_exact() {
            return Err(Error::TruncatedMeasure {
                deficit: kappa.deficit().to_string(),
            });
        }
        let states: Vec<Elem> = subgroup.elements().to_vec();
        for f in &states {
            if kappa.numerator(f).is_zero() {
                return Err(Error::SubgroupNotInSupport {
                    missing: group.format_elem(f),
                });
            }
        }
        let index = |g: &Elem| states.binary_search(g).ok();
        let size = states.len();
        let zero_row = vec![BigRational::zero(); size];
        let mut right_part = vec![zero_row.clone(); size];
        let mut conj_part = vec![zero_row; size];
        // Sorted support so the first escape witness is deterministic.
        for (x, _) in kappa.sorted_entries() {
            let w = kappa.value(x);
            if index(x).is_some() {
                for (i, f) in states.iter().enumerate() {
                    let g = group.mul(f, x);
                    let j = index(&g).expect("subgroup is closed under products");
                    right_part[i][j] += &w;
                }
            } else {
                let x_inv = group.inv(x);
                for (i, f) in states.iter().enumerate() {
                    let g = group.mul(&group.mul(&x_inv, f), x);
                    match index(&g) {
                        Some(j) => conj_part[i][j] += &w,
                        None => {
                            return Err(Error::NormalityViolation {
                                conjugator: group.format_elem(x),
                                member: group.format_elem(f),
                            })
                        }
                    }
                }
            }
        }
        let matrix: Vec<Vec<BigRational>> = right_part
            .iter()
            .zip(&conj_part)
            .map(|(r, c)| r.iter().zip(c).map(|(a, b)| a + b).collect())
            .collect();
        Ok(FactorChain {
            states,
            matrix,
            right_part,
            conj_part,
            identity_mass: kappa.identity_mass(),
        })
    }

    /// Builds the chain for a walk step measure: the chain's own step is
    /// the `|F|`-fold convolution power, and `F` must carry a normality
    /// certificate against the standard generators.
    pub fn build(mu: &Measure, subgroup: &Subgroup, cap: usize) -> Result<FactorChain> {
        subgroup.require_normal()?;
        let kappa = mu.power(subgroup.len() as u64, cap)?;
        Self::from_step_measure(&kappa, subgroup)
    }

    pub fn states(&self) -> &[Elem] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn matrix(&self) -> &[Vec<BigRational>] {
        &self.matrix
    }

    /// In-subgroup (right multiplication) component of the matrix.
    pub fn right_component(&self) -> &[Vec<BigRational>] {
        &self.right_part
    }

    /// Conjugation component of the matrix.
    pub fn conjugation_component(&self) -> &[Vec<BigRational>] {
        &self.conj_part
    }

    /// Every row sums to exactly 1.
    pub fn row_stochastic(&self) -> bool {
        self.matrix
            .iter()
            .all(|row| row.iter().sum::<BigRational>() == BigRational::one())
    }

    /// Reversibility against the uniform law: the matrix is symmetric.
    pub fn detailed_balance(&self) -> bool {
        let n = self.states.len();
        (0..n).all(|i| (i + 1..n).all(|j| self.matrix[i][j] == self.matrix[j][i]))
    }

    /// The uniform law is stationary: every column sums to 1.
    pub fn stationary_uniform(&self) -> bool {
        let n = self.states.len();
        (0..n).all(|j| {
            self.matrix.iter().map(|row| &row[j]).sum::<BigRational>() == BigRational::one()
        })
    }

    /// Every state has a self-loop (guaranteed when the step measure has
    /// identity mass).
    pub fn self_loops(&self) -> bool {
        (0..self.states.len()).all(|i| self.matrix[i][i].is_positive())
    }

    /// Step-measure identity mass, the proved lower bound for diagonals.
    pub fn identity_mass(&self) -> &BigRational {
        &self.identity_mass
    }

    /// Exact worst-case total variation distance to uniform after each of
    /// `1..=n_max` steps, with the first horizon below `threshold`.
    pub fn mixing_profile(&self, n_max: u64, threshold: &BigRational) -> MixingProfile {
        let size = self.states.len();
        let uniform = BigRational::new(1.into(), size.into());
        let mut power = self.matrix.clone();
        let mut entries = Vec::with_capacity(n_max as usize);
        let mut settled_at = None;
        for n in 1..=n_max {
            if n > 1 {
                power = mat_mul(&power, &self.matrix);
            }
            let tv = power
                .iter()
                .map(|row| {
                    let sum: BigRational = row.iter().map(|p| (p - &uniform).abs()).sum();
                    sum / BigRational::from_integer(2.into())
                })
                .max()
                .expect("chain has at least one state");
            if settled_at.is_none() && tv < *threshold {
                settled_at = Some(n);
            }
            entries.push((n, tv));
        }
        MixingProfile {
            entries,
            threshold: threshold.clone(),
            settled_at,
        }
    }
}

fn mat_mul(a: &[Vec<BigRational>], b: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let n = a.len();
    let mut out = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = &a[i][k];
            if aik.is_zero() {
                continue;
            }
            for j in 0..n {
                let prod = aik * &b[k][j];
                out[i][j] += prod;
            }
        }
    }
    out
}

/// Exact ratios `p_n(f)/p_n(e)` for every subgroup element, from one
/// walk distribution in the ambient group; independent of the chain.
pub fn subgroup_ratios(
    mu: &Measure,
    subgroup: &Subgroup,
    n: u64,
    cap: usize,
) -> Result<Vec<(Elem, BigRational)>> {
    if **subgroup.parent() != **mu.group() {
        return Err(Error::GroupMismatch(
            "subgroup belongs to a different group".into(),
        ));
    }
    let power = mu.power(n, cap)?;
    if !power.is_exact() {
        return Err(Error::TruncatedMeasure {
            deficit: power.deficit().to_string(),
        });
    }
    let num_e = power.numerator(&mu.group().identity());
    if num_e.is_zero() {
        return Err(Error::ZeroReturn { n });
    }
    Ok(subgroup
        .elements()
        .iter()
        .map(|f| {
            (
                f.clone(),
                BigRational::new(power.numerator(f), num_e.clone()),
            )
        })
        .collect())
}
