//! Two-component degenerations of a marked line and what they force on the
//! p-rank of the special fiber.
//!
//! A split sends the branch points indexed by `S1` to one component and the
//! rest to the other. Each component carries the cyclic cover whose type is
//! the restricted exponents plus the node exponent `<sum of the other side>`.
//! A node exponent `0` means the cover is unramified over the node; the node
//! point is then dropped from the child type.
//!
//! The p-rank of a nodal fiber is the sum of the component p-ranks plus the
//! first Betti number of the dual graph, so
//! `B(child1) + B(child2) + (node_count - 1)` bounds it from above. If every
//! split stays below the demanded p-rank `b`, no degeneration can have a
//! separable special fiber.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{check_exponents, gcd, reduce, CoverType, PrimeClass};
use crate::bounds::{bound_b, bound_raw, gamma_raw, genus_raw};
use crate::error::{ensure_invariant, Error, Result};
use crate::families::{FamilyKind, FamilySpec};

/// Exponent data on one component. May be disconnected, in which case it is
/// `components` copies of an `(m / components)`-cyclic cover.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChildType {
    pub m: u64,
    pub exponents: Vec<u64>,
    pub components: u64,
}

impl ChildType {
    fn new(m: u64, exponents: Vec<u64>) -> Result<Self> {
        let components = check_exponents(m, &exponents)?;
        Ok(ChildType {
            m,
            exponents,
            components,
        })
    }

    pub fn is_connected(&self) -> bool {
        self.components == 1
    }

    pub fn cover_type(&self) -> Option<CoverType> {
        self.is_connected()
            .then(|| CoverType::new(self.m, self.exponents.clone()).expect("validated"))
    }

    /// Type of one connected component.
    pub fn reduced(&self) -> CoverType {
        let d = self.components;
        CoverType::new(self.m / d, self.exponents.iter().map(|x| x / d).collect())
            .expect("dividing out the gcd leaves a connected type")
    }

    /// Arithmetic genus `1 - d + d g'` over the `d` components.
    pub fn genus(&self) -> Result<u64> {
        genus_raw(self.m, &self.exponents)
    }

    /// Upper bound on the p-rank of this (possibly disconnected) curve.
    fn sigma_bound(&self, c: u64) -> Result<u64> {
        let red = self.reduced();
        Ok(self.components * bound_raw(red.m(), red.exponents(), c % red.m())?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    /// 1-based indices of the branch points on the first component.
    pub s1: Vec<usize>,
    pub s2: Vec<usize>,
    /// `<sum_{j in S2} a_j>`, the node exponent seen from the first side.
    pub node_exp_1: u64,
    pub node_exp_2: u64,
    pub child1: ChildType,
    pub child2: ChildType,
    /// Number of points above the node: `gcd(node_exp, m)`, or `m` if unramified.
    pub node_count: u64,
}

impl Split {
    pub fn is_connected(&self) -> bool {
        self.child1.is_connected() && self.child2.is_connected()
    }
}

pub fn child_types(ty: &CoverType, s1: &[usize]) -> Result<Split> {
    let r = ty.r();
    let mut on_first = vec![false; r];
    for &i in s1 {
        if i == 0 || i > r {
            return Err(Error::BadSubset(format!("index {i} outside 1..={r}")));
        }
        if on_first[i - 1] {
            return Err(Error::BadSubset(format!("index {i} repeated")));
        }
        on_first[i - 1] = true;
    }
    if s1.len() < 2 || r - s1.len() < 2 {
        return Err(Error::BadSubset(format!(
            "both sides need at least 2 points, got {} and {}",
            s1.len(),
            r - s1.len()
        )));
    }
    let m = ty.m();
    let a = ty.exponents();
    let mut s1: Vec<usize> = s1.to_vec();
    s1.sort_unstable();
    let s2: Vec<usize> = (1..=r).filter(|&i| !on_first[i - 1]).collect();
    let side_sum = |side: &[usize]| reduce(side.iter().map(|&i| a[i - 1] as i128).sum(), m);
    let node_exp_1 = side_sum(&s2);
    let node_exp_2 = side_sum(&s1);
    let child = |side: &[usize], node: u64| {
        let mut e: Vec<u64> = side.iter().map(|&i| a[i - 1]).collect();
        if node != 0 {
            e.push(node);
        }
        ChildType::new(m, e)
    };
    let node_count = if node_exp_1 == 0 {
        m
    } else {
        gcd(node_exp_1, m)
    };
    Ok(Split {
        child1: child(&s1, node_exp_1)?,
        child2: child(&s2, node_exp_2)?,
        s1,
        s2,
        node_exp_1,
        node_exp_2,
        node_count,
    })
}

/// Every unordered two-sided partition with at least two points per side.
/// `S1` is the side holding index 1; listed by increasing `S1`.
pub fn enumerate_splits(ty: &CoverType) -> Result<Vec<Split>> {
    let r = ty.r();
    if r < 4 {
        return Ok(Vec::new());
    }
    if r > 30 {
        return Err(Error::BudgetExceeded {
            needed: 1u128 << (r - 1),
            budget: 1 << 29,
        });
    }
    let mut sides: Vec<Vec<usize>> = (0u64..1 << (r - 1))
        .map(|mask| {
            std::iter::once(1)
                .chain((0..r - 1).filter(|b| mask >> b & 1 == 1).map(|b| b + 2))
                .collect::<Vec<usize>>()
        })
        .filter(|s| s.len() >= 2 && r - s.len() >= 2)
        .collect();
    sides.sort();
    sides.iter().map(|s| child_types(ty, s)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitBound {
    pub bound: u64,
    pub child1_bound: u64,
    pub child2_bound: u64,
    pub toric_rank: u64,
    /// Set when a child is disconnected and the bound was computed on its
    /// connected components.
    pub flagged: bool,
}

pub fn split_sigma_bound(split: &Split, class: &PrimeClass) -> Result<SplitBound> {
    if split.child1.m != class.m() {
        return Err(Error::ClassMismatch {
            type_m: split.child1.m,
            class_m: class.m(),
        });
    }
    let c = class.c();
    let child1_bound = split.child1.sigma_bound(c)?;
    let child2_bound = split.child2.sigma_bound(c)?;
    let betti = split.node_count as i128 + 1
        - split.child1.components as i128
        - split.child2.components as i128;
    ensure_invariant!(
        betti >= 0,
        "dual graph of split {:?} is disconnected",
        split.s1
    );
    let toric_rank = betti as u64;
    Ok(SplitBound {
        bound: child1_bound + child2_bound + toric_rank,
        child1_bound,
        child2_bound,
        toric_rank,
        flagged: !split.is_connected(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum VerdictKind {
    CertifiedNoGoodDegeneration,
    /// Index into `DegenerationVerdict::splits`. A candidate only.
    WitnessCandidate {
        split: usize,
    },
    Inconclusive {
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitEvaluation {
    pub split: Split,
    pub bound: SplitBound,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegenerationVerdict {
    pub kind: VerdictKind,
    /// p-rank demanded of the special fiber.
    pub b: u64,
    pub splits: Vec<SplitEvaluation>,
}

impl DegenerationVerdict {
    pub fn is_certified_no(&self) -> bool {
        self.kind == VerdictKind::CertifiedNoGoodDegeneration
    }

    pub fn witness(&self) -> Option<&SplitEvaluation> {
        match self.kind {
            VerdictKind::WitnessCandidate { split } => self.splits.get(split),
            _ => None,
        }
    }
}

/// Decide whether any two-component degeneration could carry a separable
/// special fiber of p-rank at least `b` (default `B(a)`).
pub fn certify(ty: &CoverType, class: &PrimeClass, b: Option<u64>) -> Result<DegenerationVerdict> {
    let b = match b {
        Some(b) => b,
        None => bound_b(ty, class)?.b,
    };
    let splits = enumerate_splits(ty)?;
    let splits: Vec<SplitEvaluation> = splits
        .into_par_iter()
        .map(|split| {
            let bound = split_sigma_bound(&split, class)?;
            Ok(SplitEvaluation { split, bound })
        })
        .collect::<Result<_>>()?;
    let kind = if splits.is_empty() {
        VerdictKind::Inconclusive {
            reason: format!("r = {} admits no two-component degeneration", ty.r()),
        }
    } else if let Some(i) = splits
        .iter()
        .position(|e| !e.bound.flagged && e.bound.bound >= b)
    {
        VerdictKind::WitnessCandidate { split: i }
    } else if splits.iter().any(|e| e.bound.flagged) {
        VerdictKind::Inconclusive {
            reason: "some split has a disconnected child".into(),
        }
    } else {
        VerdictKind::CertifiedNoGoodDegeneration
    };
    Ok(DegenerationVerdict { kind, b, splits })
}

/// Some pair of exponents sums to `0 (mod m)`.
pub fn pair_condition(ty: &CoverType) -> bool {
    let m = ty.m();
    let a = ty.exponents();
    (0..a.len()).any(|i| (i + 1..a.len()).any(|j| (a[i] + a[j]) % m == 0))
}

/// Numerical record of the nonordinarity argument for a family member and a
/// subset `S1` of exponent indices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadDegDiagnostics {
    pub s1: Vec<u32>,
    /// `s = sum_{j in S1} alpha^j mod m`.
    pub s: u64,
    /// Exponents of the child over the `S1` side: `alpha^j` and the node `<m - s>`.
    pub child: Vec<u64>,
    /// `gamma_1(s alpha^i)` for `i = 0..n`, gamma of the child type.
    pub gamma1: Vec<u64>,
    pub d_s: u64,
    /// `gamma(d_s)` and `gamma(s^2)` for the family type.
    pub gamma_d_s: u64,
    pub gamma_s: u64,
    pub gamma_s_squared: u64,
    pub sum: u64,
    pub sum_mod_f: u64,
    /// `|S1| (|S1| - 1) mod f`.
    pub claimed_residue: u64,
    pub claimed_congruence_holds: bool,
    pub child_nonordinary: bool,
}

pub fn baddeg_diagnostics(family: &FamilySpec, s1: &[u32]) -> Result<BadDegDiagnostics> {
    let n = family.n();
    let m = family.m();
    let alpha = family.alpha();
    let k = s1.len() as u64;
    if k < 2 || k + 2 > n {
        return Err(Error::BadSubset(format!(
            "need 2 <= |S1| <= {} - 2, got {k}",
            n
        )));
    }
    let mut idx = s1.to_vec();
    idx.sort_unstable();
    idx.dedup();
    if idx.len() != s1.len() || idx.iter().any(|&j| j as u64 >= n) {
        return Err(Error::BadSubset(format!(
            "indices must be distinct and below {n}"
        )));
    }
    let a = family.cover_type().exponents();
    let pow = |j: u64| crate::arith::pow_mod(alpha, j, m);
    let s = idx.iter().map(|&j| a[j as usize]).sum::<u64>() % m;
    if s == 0 {
        return Err(Error::BadSubset(
            "sum of alpha^j over S1 vanishes mod m".into(),
        ));
    }
    let node = m - s;
    let mut child: Vec<u64> = idx.iter().map(|&j| a[j as usize]).collect();
    child.push(node);
    let gamma1: Vec<u64> = (0..n)
        .map(|i| Ok(gamma_raw(m, &child, crate::arith::mul_mod(s, pow(i), m))?.value))
        .collect::<Result<_>>()?;
    let d_s = crate::arith::mul_mod(s, node, m);
    let via_square = reduce(m as i128 - (s as i128 * s as i128), m);
    ensure_invariant!(
        d_s == via_square,
        "<s(m-s)> = {d_s} but <m - s^2> = {via_square}"
    );
    ensure_invariant!(d_s != 0, "d_s vanishes for S1 = {idx:?}");
    let gamma_d_s = gamma_raw(m, a, d_s)?.value;
    let gamma_s = gamma_raw(m, a, s)?.value;
    let gamma_s_squared = gamma_raw(m, a, crate::arith::mul_mod(s, s, m))?.value;
    let sum: u64 = gamma1.iter().sum();
    ensure_invariant!(
        sum == k * gamma_s + gamma_d_s,
        "orbit sum {sum} != |S1| gamma(s) + gamma(d_s) = {}",
        k * gamma_s + gamma_d_s
    );
    let sum_mod_f = sum % n;
    let claimed_residue = k * (k - 1) % n;
    let child_nonordinary = gamma1.iter().any(|&g| g != gamma1[0]);
    ensure_invariant!(
        sum_mod_f == 0 || child_nonordinary,
        "orbit sum not divisible by {n} but gamma_1 constant"
    );
    if let FamilyKind::Mersenne { .. } = family.kind() {
        ensure_invariant!(
            sum_mod_f != 0,
            "orbit sum {sum} divisible by f = {n} for S1 = {idx:?}"
        );
    }
    Ok(BadDegDiagnostics {
        s1: idx,
        s,
        child,
        gamma1,
        d_s,
        gamma_d_s,
        gamma_s,
        gamma_s_squared,
        sum,
        sum_mod_f,
        claimed_residue,
        claimed_congruence_holds: sum_mod_f == claimed_residue,
        child_nonordinary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::mersenne_family;

    fn ty(m: u64, a: &[u64]) -> CoverType {
        CoverType::new(m, a.to_vec()).unwrap()
    }

    fn class(m: u64, c: u64) -> PrimeClass {
        PrimeClass::new(m, c).unwrap()
    }

    #[test]
    fn split_counts() {
        assert_eq!(enumerate_splits(&ty(5, &[1, 1, 1, 2])).unwrap().len(), 3);
        assert_eq!(
            enumerate_splits(&ty(31, &[1, 2, 4, 8, 16])).unwrap().len(),
            10
        );
        assert!(enumerate_splits(&ty(7, &[1, 2, 4])).unwrap().is_empty());
        let s1: Vec<_> = enumerate_splits(&ty(5, &[1, 1, 1, 2]))
            .unwrap()
            .into_iter()
            .map(|s| s.s1)
            .collect();
        assert_eq!(s1, vec![vec![1, 2], vec![1, 3], vec![1, 4]]);
    }

    #[test]
    fn child_type_examples() {
        let s = child_types(&ty(5, &[1, 1, 1, 2]), &[1, 2]).unwrap();
        assert_eq!(s.child1.exponents, vec![1, 1, 3]);
        assert_eq!(s.child2.exponents, vec![1, 2, 2]);
        assert_eq!(s.node_count, 1);

        let s = child_types(&ty(5, &[1, 2, 3, 4]), &[1, 4]).unwrap();
        assert_eq!(s.child1.exponents, vec![1, 4]);
        assert_eq!(s.child2.exponents, vec![2, 3]);
        assert_eq!((s.node_exp_1, s.node_exp_2, s.node_count), (0, 0, 5));

        let s = child_types(&ty(31, &[1, 2, 4, 8, 16]), &[1, 2]).unwrap();
        assert_eq!(s.child1.exponents, vec![1, 2, 28]);
        assert_eq!(s.child2.exponents, vec![4, 8, 16, 3]);

        assert!(child_types(&ty(5, &[1, 1, 1, 2]), &[1]).is_err());
        assert!(child_types(&ty(5, &[1, 1, 1, 2]), &[1, 1]).is_err());
        assert!(child_types(&ty(5, &[1, 1, 1, 2]), &[1, 5]).is_err());
    }

    #[test]
    fn disconnected_child_is_flagged() {
        // (6; 2,4,1,5): S1 = {1,2} gives child (2,4), two copies of (3;1,2).
        let t = ty(6, &[2, 4, 1, 5]);
        let s = child_types(&t, &[1, 2]).unwrap();
        assert_eq!(s.child1.components, 2);
        assert_eq!(s.child1.reduced().exponents(), &[1, 2]);
        let b = split_sigma_bound(&s, &class(6, 5)).unwrap();
        assert!(b.flagged);
        assert_eq!(b.toric_rank, 6 + 1 - 2 - 1);
    }

    #[test]
    fn split_bound_examples() {
        let c4 = class(5, 4);
        let s = child_types(&ty(5, &[1, 1, 1, 2]), &[1, 2]).unwrap();
        assert_eq!(split_sigma_bound(&s, &c4).unwrap().bound, 0);
        let s = child_types(&ty(5, &[1, 1, 1, 1, 1]), &[1, 2]).unwrap();
        let b = split_sigma_bound(&s, &c4).unwrap();
        assert_eq!((b.child1_bound, b.child2_bound, b.bound), (0, 2, 2));
        let s = child_types(&ty(5, &[1, 2, 3, 4]), &[1, 4]).unwrap();
        let b = split_sigma_bound(&s, &c4).unwrap();
        assert_eq!((b.toric_rank, b.bound), (4, 4));
    }

    #[test]
    fn certify_examples() {
        let v = certify(&ty(5, &[1, 1, 1, 2]), &class(5, 4), None).unwrap();
        assert_eq!(v.kind, VerdictKind::CertifiedNoGoodDegeneration);
        assert_eq!(v.b, 2);
        assert_eq!(v.splits.len(), 3);

        let v = certify(&ty(5, &[1, 1, 1, 1, 1]), &class(5, 4), None).unwrap();
        assert_eq!(v.witness().unwrap().split.s1, vec![1, 2]);

        let v = certify(&ty(5, &[1, 1, 1, 2]), &class(5, 1), None).unwrap();
        assert!(matches!(v.kind, VerdictKind::WitnessCandidate { .. }));

        let v = certify(&ty(7, &[1, 2, 4]), &class(7, 2), None).unwrap();
        assert!(matches!(v.kind, VerdictKind::Inconclusive { .. }));

        // b override: demanding nothing always finds a candidate.
        let v = certify(&ty(5, &[1, 1, 1, 2]), &class(5, 4), Some(0)).unwrap();
        assert!(matches!(v.kind, VerdictKind::WitnessCandidate { split: 0 }));
    }

    #[test]
    fn pair_condition_examples() {
        assert!(pair_condition(&ty(5, &[1, 2, 3, 4])));
        assert!(!pair_condition(&ty(5, &[1, 1, 1, 2])));
        assert!(!pair_condition(&ty(7, &[1, 2, 4])));
    }

    #[test]
    fn diagnostics_examples() {
        let fam = mersenne_family(5).unwrap();
        let d = baddeg_diagnostics(&fam, &[0, 1]).unwrap();
        assert_eq!((d.s, d.d_s, d.sum_mod_f), (3, 22, 2));
        assert!(d.claimed_congruence_holds);
        assert!(d.child_nonordinary);

        // The claimed congruence predicts 1 here; the orbit sum is 12.
        let d = baddeg_diagnostics(&fam, &[0, 1, 2]).unwrap();
        assert_eq!((d.sum, d.sum_mod_f, d.claimed_residue), (12, 2, 1));
        assert!(!d.claimed_congruence_holds);
        assert!(d.child_nonordinary);

        let fam3 = mersenne_family(3).unwrap();
        assert!(matches!(
            baddeg_diagnostics(&fam3, &[0, 1]),
            Err(Error::BadSubset(_))
        ));
        assert!(matches!(
            baddeg_diagnostics(&fam, &[0, 0]),
            Err(Error::BadSubset(_))
        ));
        assert!(matches!(
            baddeg_diagnostics(&fam, &[0, 7]),
            Err(Error::BadSubset(_))
        ));
    }
}
