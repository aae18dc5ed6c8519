//! Cartier operator on regular differentials.
//!
//! Basis of `H^0(Omega)`: `x^k F_j(x) dx / z^j` with
//! `F_j = prod (x - x_i)^{floor(j a_i / m)}` and `0 <= k <= gamma(j) - 2`.
//! With `p j' = j + m t`, `1/z^j = f^t / z^{p j'}`, so the operator only has
//! to read off the coefficients of `x^k F_j f^t` in degrees `p - 1 (mod p)`.

use serde::{Deserialize, Serialize};

use super::field::GfField;
use super::poly::{self, Poly};
use super::{CurveInstance, FieldSpec};
use crate::arith::{euler_phi, pow_mod};
use crate::bounds::gamma_raw;
use crate::error::{ensure_invariant, Error, Result};

/// Extra multiplier on the budget for polynomial work: the budget is sized
/// for field enumeration, which is far heavier per unit.
pub const CARTIER_WORK_FACTOR: u64 = 64;

/// Basis label: character `j` and monomial degree `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisElement {
    pub j: u64,
    pub k: u64,
}

/// `v -> M v^(p)` on `F_Q^g`, `M` stored row-major with field elements in
/// digit encoding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemilinearOperator {
    pub field: FieldSpec,
    pub basis: Vec<BasisElement>,
    pub matrix: Vec<Vec<u64>>,
}

pub fn cartier_work(inst: &CurveInstance) -> u128 {
    let deg: u128 = inst.ty.exponents().iter().map(|&a| a as u128).sum();
    let d = inst.field.p as u128 * deg;
    (inst.ty.m() as u128 - 1) * d * d
}

pub fn cartier_manin(inst: &CurveInstance, budget: u64) -> Result<SemilinearOperator> {
    let work = cartier_work(inst);
    let allowed = budget as u128 * CARTIER_WORK_FACTOR as u128;
    if work > allowed {
        return Err(Error::BudgetExceeded {
            needed: work,
            budget,
        });
    }
    let m = inst.ty.m();
    let a = inst.ty.exponents();
    let p = inst.field.p;
    let fld = inst.field.field()?;
    let p_inv = pow_mod(p % m, euler_phi(m) - 1, m);
    ensure_invariant!(p % m * p_inv % m == 1 % m, "inverse of {p} mod {m}");

    let gam = |j: u64| -> Result<u64> { Ok(gamma_raw(m, a, j)?.value) };
    let mut basis = Vec::new();
    let mut offset = vec![usize::MAX; m as usize];
    for j in 1..m {
        let gj = gam(j)?;
        if gj >= 2 {
            offset[j as usize] = basis.len();
            basis.extend((0..gj - 1).map(|k| BasisElement { j, k }));
        }
    }
    let g = inst.genus()? as usize;
    ensure_invariant!(basis.len() == g, "basis size {} but genus {g}", basis.len());
    let dim = basis.len();

    let f = poly::from_roots(&fld, &inst.points, a);
    let floor_poly = |j: u64| -> Poly {
        let e: Vec<u64> = a.iter().map(|&ai| j * ai / m).collect();
        poly::from_roots(&fld, &inst.points, &e)
    };
    let mut matrix = vec![vec![0u64; dim]; dim];
    for j in 1..m {
        if offset[j as usize] == usize::MAX {
            continue;
        }
        let gj = gam(j)?;
        let jp = j * p_inv % m;
        let t = (p as u128 * jp as u128 - j as u128) / m as u128;
        ensure_invariant!(
            (p as u128 * jp as u128 - j as u128) % m as u128 == 0,
            "p j' - j not divisible by m for j = {j}"
        );
        let base = poly::mul(&fld, &floor_poly(j), &poly::pow(&fld, &f, t as u64));
        let target = poly::map_coefficients(&floor_poly(jp), |c| fld.frobenius(c));
        let room = gam(jp)?.saturating_sub(1) as usize;
        for k in 0..gj - 1 {
            // Coefficients of x^{np + p - 1} in x^k * base.
            let h: Poly = (0..)
                .map(|n: u64| n * p + p - 1)
                .take_while(|&deg| deg < base.len() as u64 + k)
                .map(|deg| if deg < k { 0 } else { base[(deg - k) as usize] })
                .collect();
            let (quot, rem) = poly::divrem_monic(&fld, &h, &target);
            ensure_invariant!(
                rem.is_empty(),
                "image of basis element ({j}, {k}) is not divisible by F_{jp}"
            );
            ensure_invariant!(
                quot.len() <= room,
                "image of basis element ({j}, {k}) has degree {} beyond the {jp}-eigenspace",
                quot.len() as i64 - 1
            );
            let col = offset[j as usize] + k as usize;
            for (kp, &c) in quot.iter().enumerate() {
                matrix[col][offset[jp as usize] + kp] = c;
            }
        }
    }
    Ok(SemilinearOperator {
        field: inst.field,
        basis,
        matrix,
    })
}

pub fn rank(fld: &GfField, rows: &[Vec<u64>]) -> usize {
    let mut a: Vec<Vec<u64>> = rows.to_vec();
    let ncols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for col in 0..ncols {
        let Some(pivot) = (r..a.len()).find(|&i| a[i][col] != 0) else {
            continue;
        };
        a.swap(r, pivot);
        let inv = fld.inv(a[r][col]);
        for x in a[r].iter_mut() {
            *x = fld.mul(*x, inv);
        }
        for i in 0..a.len() {
            if i != r && a[i][col] != 0 {
                let factor = a[i][col];
                for c in col..ncols {
                    let sub = fld.mul(factor, a[r][c]);
                    a[i][c] = fld.sub(a[i][c], sub);
                }
            }
        }
        r += 1;
    }
    r
}

fn matmul(fld: &GfField, x: &[Vec<u64>], y: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let n = y.first().map_or(0, Vec::len);
    x.iter()
        .map(|row| {
            (0..n)
                .map(|c| {
                    row.iter()
                        .zip(y)
                        .fold(0, |acc, (&u, yr)| fld.add(acc, fld.mul(u, yr[c])))
                })
                .collect()
        })
        .collect()
}

impl SemilinearOperator {
    pub fn dimension(&self) -> usize {
        self.matrix.len()
    }

    /// Rank of the iterates `M M^(p) ... M^(p^(k-1))`, taken once it stops
    /// dropping.
    pub fn stable_rank(&self) -> Result<u64> {
        let fld = self.field.field()?;
        let mut twisted = self.matrix.clone();
        let mut acc = self.matrix.clone();
        let mut r = rank(&fld, &acc);
        for _ in 0..self.dimension() {
            twisted = twisted
                .iter()
                .map(|row| row.iter().map(|&c| fld.frobenius(c)).collect())
                .collect();
            acc = matmul(&fld, &acc, &twisted);
            let next = rank(&fld, &acc);
            if next == r {
                break;
            }
            r = next;
        }
        Ok(r as u64)
    }
}
