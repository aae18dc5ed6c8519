//! Point counting over `F_{Q^k}` and the L-polynomial.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::{Embedding, GfField};
use super::CurveInstance;
use crate::arith::gcd;
use crate::error::{ensure_invariant, Error, Result};

const CHUNK: u64 = 1 << 14;

fn log_table(p: u64, n: usize, m: u64) -> Result<Arc<Vec<u16>>> {
    type Key = (u64, usize, u64);
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<Vec<u16>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().unwrap().get(&(p, n, m)) {
        return Ok(t.clone());
    }
    let table = Arc::new(GfField::cached(p, n)?.log_mod_table(m));
    Ok(cache
        .lock()
        .unwrap()
        .entry((p, n, m))
        .or_insert(table)
        .clone())
}

pub(crate) fn checked_power(q: u64, k: u32) -> Option<u64> {
    q.checked_pow(k)
}

/// Number of points of the smooth projective model over `F_{Q^k}`.
///
/// Each `x` with `f(x) != 0` contributes `m` points when `f(x)` is an m-th
/// power and none otherwise. Each branch point has a single point above it,
/// and the fiber over infinity has `m` rational points.
pub fn count_points(inst: &CurveInstance, k: u32, budget: u64) -> Result<u64> {
    let m = inst.ty.m();
    let a = inst.ty.exponents();
    if a.iter().any(|&x| gcd(x, m) != 1) {
        return Err(Error::UnsupportedRamification);
    }
    let q_small = inst.field.size();
    let q = checked_power(q_small, k)
        .filter(|&q| q <= budget)
        .ok_or(Error::BudgetExceeded {
            needed: (q_small as u128).saturating_pow(k),
            budget,
        })?;
    let p = inst.field.p;
    let n = inst.field.e as usize * k as usize;
    let small = inst.field.field()?;
    let large = GfField::cached(p, n)?;
    let emb = Embedding::new(small, large.clone())?;
    let table = log_table(p, n, m)?;
    let points: Vec<Vec<u64>> = inst
        .points
        .iter()
        .map(|&x| large.digits(emb.map(x)))
        .collect();
    let place: Vec<u64> = (0..n).map(|j| p.pow(j as u32)).collect();

    let affine: u64 = (0..q.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * CHUNK;
            let end = (start + CHUNK).min(q);
            let mut d = large.digits(start);
            let mut total = 0u64;
            'x: for _ in start..end {
                let mut log_sum = 0u64;
                for (y, &e) in points.iter().zip(a) {
                    let mut diff = 0u64;
                    for j in 0..n {
                        diff += (d[j] + p - y[j]) % p * place[j];
                    }
                    if diff == 0 {
                        total += 1;
                        step(&mut d, p);
                        continue 'x;
                    }
                    log_sum += e * table[diff as usize] as u64;
                }
                if log_sum % m == 0 {
                    total += m;
                }
                step(&mut d, p);
            }
            total
        })
        .sum();
    Ok(affine + m)
}

fn step(d: &mut [u64], p: u64) {
    for x in d.iter_mut() {
        *x += 1;
        if *x < p {
            return;
        }
        *x = 0;
    }
}

/// Numerator `L(T) = sum c_i T^i` of the zeta function, degree `2g`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LPolynomial {
    pub q: u64,
    pub coefficients: Vec<i128>,
}

impl LPolynomial {
    pub fn genus(&self) -> usize {
        (self.coefficients.len() - 1) / 2
    }

    /// Power sums `sum alpha^k` of the reciprocal roots, from Newton's identities.
    fn power_sum(&self, k: usize) -> i128 {
        // k c_k = -sum_{i=1}^{k} s_i c_{k-i}, with c_j = 0 beyond the degree.
        let c = |j: usize| self.coefficients.get(j).copied().unwrap_or(0);
        let mut s = vec![0i128; k + 1];
        for i in 1..=k {
            let mut acc = -(i as i128) * c(i);
            for j in 1..i {
                acc -= s[j] * c(i - j);
            }
            s[i] = acc;
        }
        s[k]
    }

    /// `N_k = Q^k + 1 - sum alpha^k`.
    pub fn point_count(&self, k: usize) -> i128 {
        (self.q as i128).pow(k as u32) + 1 - self.power_sum(k)
    }

    /// Number of leading coefficients up to the last one prime to `p`: the
    /// count of unit reciprocal roots.
    pub fn unit_root_count(&self, p: u64) -> u64 {
        self.coefficients
            .iter()
            .rposition(|c| c.rem_euclid(p as i128) != 0)
            .unwrap_or(0) as u64
    }

    pub fn satisfies_functional_equation(&self) -> bool {
        let g = self.genus();
        (0..=g).all(|i| {
            self.coefficients[2 * g - i]
                == (self.q as i128).pow((g - i) as u32) * self.coefficients[i]
        })
    }
}

pub fn l_polynomial(inst: &CurveInstance, budget: u64) -> Result<LPolynomial> {
    let g = inst.genus()? as usize;
    let q = inst.field.size();
    if g == 0 {
        return Ok(LPolynomial {
            q,
            coefficients: vec![1],
        });
    }
    if checked_power(q, g as u32).is_none_or(|w| w > budget) {
        return Err(Error::BudgetExceeded {
            needed: (q as u128).saturating_pow(g as u32),
            budget,
        });
    }
    let counts = (1..=g as u32)
        .map(|k| count_points(inst, k, budget))
        .collect::<Result<Vec<_>>>()?;
    let s: Vec<i128> = std::iter::once(0)
        .chain(
            counts
                .iter()
                .enumerate()
                .map(|(i, &n)| (q as i128).pow(i as u32 + 1) + 1 - n as i128),
        )
        .collect();
    let mut c = vec![0i128; 2 * g + 1];
    c[0] = 1;
    for i in 1..=g {
        let acc: i128 = (1..=i).map(|k| s[k] * c[i - k]).sum();
        ensure_invariant!(
            acc % i as i128 == 0,
            "Newton step {i} not integral for {:?}: counts {counts:?}",
            inst.points
        );
        c[i] = -acc / i as i128;
    }
    for i in 0..g {
        c[2 * g - i] = (q as i128).pow((g - i) as u32) * c[i];
    }
    Ok(LPolynomial { q, coefficients: c })
}
