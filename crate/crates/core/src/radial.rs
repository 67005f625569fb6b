//! Distance-class collapse of the lazy-uniform walk on a free group.
//!
//! For the measure with mass `alpha` at the identity and the rest split
//! evenly over the 2d standard generators of the rank-d free group, the
//! distance from the identity is itself a Markov chain on the nonnegative
//! integers: spheres are single states. One step moves a unit of mass
//! from class k to k-1, k, or k+1 with weights that are equal at every
//! vertex of the sphere, so tracking one integer numerator per class over
//! a shared power-of-one-step denominator reproduces the walk exactly at
//! any horizon in O(n²) integer work instead of exponential support.
//!
//! Pointwise probabilities divide the class mass by the sphere size
//! `2d·(2d-1)^(k-1)`, since the collapsed classes stay uniform on spheres
//! by symmetry.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::{Error, Result};

/// Exact sphere-aggregated walk state at some time `n`.
#[derive(Debug, Clone)]
pub struct RadialWalk {
    rank: u32,
    alpha: BigRational,
    n: u64,
    /// Mass numerator on each distance class, index = distance.
    nums: Vec<BigInt>,
    /// Shared denominator, `(2d·b)^n` for `alpha = a/b`.
    denom: BigInt,
    stay: BigInt,
    out0: BigInt,
    up: BigInt,
    down: BigInt,
    step_denom: BigInt,
}

impl RadialWalk {
    /// Walk on the rank-`rank` free group with laziness `alpha` in `[0, 1)`.
    pub fn new(rank: u32, alpha: &BigRational) -> Result<RadialWalk> {
        if rank < 1 {
            return Err(Error::DescriptorRange(format!("free rank {rank} < 1")));
        }
        if alpha.is_negative() || *alpha >= BigRational::one() {
            return Err(Error::LazinessRange(alpha.to_string()));
        }
        let two_d = BigInt::from(2 * u64::from(rank));
        let a = alpha.numer().clone();
        let b = alpha.denom().clone();
        let rest = &b - &a;
        Ok(RadialWalk {
            rank,
            alpha: alpha.clone(),
            n: 0,
            nums: vec![BigInt::one()],
            denom: BigInt::one(),
            stay: &two_d * &a,
            out0: &two_d * &rest,
            up: &rest * (&two_d - 1),
            down: rest,
            step_denom: &two_d * &b,
        })
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn alpha(&self) -> &BigRational {
        &self.alpha
    }

    /// Number of steps taken so far.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Distance classes currently reachable (highest distance + 1).
    pub fn horizon(&self) -> usize {
        self.nums.len()
    }

    /// Advances one step.
    pub fn step(&mut self) {
        let old = &self.nums;
        let len = old.len();
        let mut new = vec![BigInt::zero(); len + 1];
        new[0] = &self.stay * &old[0];
        if len > 1 {
            new[0] += &self.down * &old[1];
        }
        for k in 0..len {
            let mass = &old[k];
            if mass.is_zero() {
                continue;
            }
            if k == 0 {
                new[1] += &self.out0 * mass;
            } else {
                new[k + 1] += &self.up * mass;
                new[k] += &self.stay * mass;
                // Down-moves from k == 1 were folded into new[0] above.
                if k >= 2 {
                    new[k - 1] += &self.down * mass;
                }
            }
        }
        while new.last().is_some_and(|x| x.is_zero()) {
            new.pop();
        }
        self.nums = new;
        self.denom *= &self.step_denom;
        self.n += 1;
    }

    /// Steps until time `n` (no-op when already there or past).
    pub fn advance_to(&mut self, n: u64) {
        while self.n < n {
            self.step();
        }
    }

    /// Exact conservation check: class masses sum to 1.
    pub fn mass_check(&self) -> bool {
        self.nums.iter().sum::<BigInt>() == self.denom
    }

    /// Number of elements at distance `k`: 1, then `2d·(2d-1)^(k-1)`.
    pub fn sphere_size(rank: u32, k: usize) -> BigInt {
        if k == 0 {
            return BigInt::one();
        }
        let two_d = BigInt::from(2 * u64::from(rank));
        let q = &two_d - 1;
        let mut size = two_d;
        for _ in 1..k {
            size *= &q;
        }
        size
    }

    /// Total mass on distance class `k` (0 beyond the horizon).
    pub fn sphere_mass(&self, k: usize) -> BigRational {
        match self.nums.get(k) {
            Some(num) => BigRational::new(num.clone(), self.denom.clone()),
            None => BigRational::zero(),
        }
    }

    /// Probability at one fixed element of distance `k`.
    pub fn point_prob(&self, k: usize) -> BigRational {
        match self.nums.get(k) {
            Some(num) => BigRational::new(
                num.clone(),
                Self::sphere_size(self.rank, k) * &self.denom,
            ),
            None => BigRational::zero(),
        }
    }

    /// Exact pointwise ratio `p_n(g)/p_n(e)` for `|g| = k`; the shared
    /// denominator cancels, leaving `nums[k] / (|sphere k|·nums[0])`.
    pub fn ratio(&self, k: usize) -> Result<BigRational> {
        let ret = &self.nums[0];
        if ret.is_zero() {
            return Err(Error::ZeroReturn { n: self.n });
        }
        match self.nums.get(k) {
            Some(num) if !num.is_zero() => Ok(BigRational::new(
                num.clone(),
                Self::sphere_size(self.rank, k) * ret,
            )),
            _ => Ok(BigRational::zero()),
        }
    }
}

/// Floating-point twin of [`RadialWalk`] for long horizons where exact
/// integers are unnecessary; same recurrence on f64 class masses.
#[derive(Debug, Clone)]
pub struct RadialWalkF64 {
    rank: u32,
    n: u64,
    masses: Vec<f64>,
    stay: f64,
    out0: f64,
    up: f64,
    down: f64,
}

impl RadialWalkF64 {
    pub fn new(rank: u32, alpha: f64) -> Result<RadialWalkF64> {
        if rank < 1 {
            return Err(Error::DescriptorRange(format!("free rank {rank} < 1")));
        }
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::LazinessRange(alpha.to_string()));
        }
        let two_d = 2.0 * f64::from(rank);
        Ok(RadialWalkF64 {
            rank,
            n: 0,
            masses: vec![1.0],
            stay: alpha,
            out0: 1.0 - alpha,
            up: (1.0 - alpha) * (two_d - 1.0) / two_d,
            down: (1.0 - alpha) / two_d,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn step(&mut self) {
        let old = &self.masses;
        let len = old.len();
        let mut new = vec![0.0; len + 1];
        new[0] = self.stay * old[0];
        if len > 1 {
            new[0] += self.down * old[1];
        }
        for k in 0..len {
            let mass = old[k];
            if mass == 0.0 {
                continue;
            }
            if k == 0 {
                new[1] += self.out0 * mass;
            } else {
                new[k + 1] += self.up * mass;
                new[k] += self.stay * mass;
                if k >= 2 {
                    new[k - 1] += self.down * mass;
                }
            }
        }
        self.masses = new;
        self.n += 1;
    }

    pub fn advance_to(&mut self, n: u64) {
        while self.n < n {
            self.step();
        }
    }

    /// Pointwise ratio `p_n(g)/p_n(e)` for `|g| = k`; NaN when the return
    /// probability vanishes or underflows.
    pub fn ratio(&self, k: usize) -> f64 {
        let ret = self.masses[0];
        let mass = self.masses.get(k).copied().unwrap_or(0.0);
        let two_d = 2.0 * f64::from(self.rank);
        let sphere = if k == 0 {
            1.0
        } else {
            two_d * (two_d - 1.0_f64).powi(k as i32 - 1)
        };
        mass / (sphere * ret)
    }
}
