//! p-rank of explicit curves `z^m = prod (x - x_i)^{a_i}` over `F_Q`.
//!
//! Two strategies: counting points over `F_{Q^k}` for `k <= g` and reading the
//! unit roots off the L-polynomial, or the Cartier operator on regular
//! differentials. The second is only trusted after it matches the first on a
//! fixed corpus (the gate).

pub mod cartier;
pub mod count;
pub mod field;
pub mod poly;

use std::sync::{Arc, OnceLock};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{gcd, is_prime, CoverType, PrimeClass};
use crate::bounds::{bound_b, genus_rh};
use crate::error::{Error, Result};
use field::GfField;

pub use cartier::{cartier_manin, SemilinearOperator};
pub use count::{count_points, l_polynomial, LPolynomial};

/// Work budget when none is given: field elements enumerated by the count
/// strategy.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Field `F_Q` with `Q = p^e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u64,
    pub e: u32,
}

impl FieldSpec {
    pub fn new(p: u64, e: u32) -> Result<Self> {
        if p == 2 || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if e == 0 {
            return Err(Error::BadInstance("field degree must be positive".into()));
        }
        let q = p.checked_pow(e).filter(|&q| q <= 1 << 32);
        if q.is_none() {
            return Err(Error::BadInstance(format!("{p}^{e} is too large")));
        }
        Ok(FieldSpec { p, e })
    }

    pub fn size(&self) -> u64 {
        self.p.pow(self.e)
    }

    pub fn field(&self) -> Result<Arc<GfField>> {
        GfField::cached(self.p, self.e as usize)
    }
}

/// A cover type with explicit distinct branch points in `F_Q`, given in the
/// digit encoding of the field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveInstance {
    #[serde(rename = "type")]
    pub ty: CoverType,
    pub field: FieldSpec,
    pub points: Vec<u64>,
}

impl CurveInstance {
    pub fn new(ty: CoverType, field: FieldSpec, points: Vec<u64>) -> Result<Self> {
        let m = ty.m();
        let q = field.size();
        if field.p % m == 0 {
            return Err(Error::BadInstance(format!(
                "p = {} divides m = {m}",
                field.p
            )));
        }
        if (q - 1) % m != 0 {
            return Err(Error::BadInstance(format!(
                "m = {m} does not divide Q - 1 = {}",
                q - 1
            )));
        }
        if m > 1 << 16 {
            return Err(Error::BadInstance(format!("m = {m} is too large")));
        }
        if points.len() != ty.r() {
            return Err(Error::BadInstance(format!(
                "{} points for {} exponents",
                points.len(),
                ty.r()
            )));
        }
        if let Some(&x) = points.iter().find(|&&x| x >= q) {
            return Err(Error::BadInstance(format!(
                "point {x} is not an element of F_{q}"
            )));
        }
        let mut sorted = points.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::BadInstance("branch points must be distinct".into()));
        }
        Ok(CurveInstance { ty, field, points })
    }

    pub fn genus(&self) -> Result<u64> {
        genus_rh(&self.ty)
    }

    pub fn class(&self) -> Result<PrimeClass> {
        PrimeClass::from_prime(self.field.p, self.ty.m())
    }

    /// Image under `x -> u x + v`, an isomorphic curve.
    pub fn affine_image(&self, u: u64, v: u64) -> Result<Self> {
        let fld = self.field.field()?;
        let q = self.field.size();
        if u == 0 || u >= q || v >= q {
            return Err(Error::BadInstance(
                "affine map needs u != 0 and u, v in F_Q".into(),
            ));
        }
        let points = self
            .points
            .iter()
            .map(|&x| fld.add(fld.mul(u, x), v))
            .collect();
        CurveInstance::new(self.ty.clone(), self.field, points)
    }

    pub fn count_supported(&self) -> bool {
        let m = self.ty.m();
        self.ty.exponents().iter().all(|&a| gcd(a, m) == 1)
    }

    /// `Q^g`, the enumeration cost of the count strategy.
    pub fn count_work(&self) -> Result<u128> {
        Ok((self.field.size() as u128).saturating_pow(self.genus()? as u32))
    }
}

/// Distinct branch points drawn from `F_Q` by a seeded generator.
pub fn sample_points(field: &FieldSpec, r: usize, rng: &mut ChaCha8Rng) -> Result<Vec<u64>> {
    let q = field.size();
    if (r as u64) > q {
        return Err(Error::BadInstance(format!(
            "cannot pick {r} distinct points in F_{q}"
        )));
    }
    Ok(sample(rng, q as usize, r)
        .into_iter()
        .map(|x| x as u64)
        .collect())
}

pub fn sample_instance(ty: &CoverType, field: FieldSpec, seed: u64) -> Result<CurveInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = sample_points(&field, ty.r(), &mut rng)?;
    CurveInstance::new(ty.clone(), field, points)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Auto,
    Count,
    Cartier,
}

impl std::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Strategy::Auto),
            "count" => Ok(Strategy::Count),
            "cartier" => Ok(Strategy::Cartier),
            other => Err(Error::BadInstance(format!("unknown strategy {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PRank {
    pub sigma: u64,
    pub genus: u64,
    pub strategy: Strategy,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_polynomial: Option<LPolynomial>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateMismatch {
    pub instance: CurveInstance,
    pub count: Option<u64>,
    pub cartier: std::result::Result<u64, String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateReport {
    pub instances: usize,
    pub mismatches: Vec<GateMismatch>,
}

impl GateReport {
    pub fn passed(&self) -> bool {
        self.instances > 0 && self.mismatches.is_empty()
    }
}

/// Types and fields of the gate corpus. Each is sampled with two seeds.
pub const GATE_CORPUS: &[(u64, &[u64], u64, u32)] = &[
    (3, &[1, 2], 7, 1),
    (3, &[1, 1, 1], 7, 1),
    (3, &[1, 1, 1], 13, 1),
    (3, &[1, 1, 1], 5, 2),
    (3, &[1, 1, 2, 2], 7, 1),
    (3, &[1, 1, 2, 2], 5, 2),
    (3, &[1, 1, 1, 1, 1, 1], 13, 1),
    (3, &[1, 2, 1, 2, 1, 2], 7, 1),
    (4, &[1, 1, 3, 3], 5, 1),
    (4, &[1, 1, 1, 1], 13, 1),
    (4, &[1, 3, 1, 3], 3, 2),
    (5, &[1, 1, 3], 11, 1),
    (5, &[1, 1, 3], 19, 2),
    (5, &[1, 1, 1, 2], 11, 1),
    (5, &[1, 2, 3, 4], 11, 1),
    (5, &[1, 1, 4, 4], 31, 1),
    (6, &[1, 1, 5, 5], 7, 1),
    (7, &[1, 2, 4], 29, 1),
    (7, &[1, 1, 5], 29, 1),
    (7, &[1, 2, 4], 43, 1),
    (7, &[1, 3, 3], 13, 2),
    (6, &[1, 1, 5, 5], 13, 1),
];
pub const GATE_SEEDS: [u64; 2] = [1, 2];
const GATE_BUDGET: u64 = 10_000_000;

pub fn gate_instances() -> Result<Vec<CurveInstance>> {
    let mut out = Vec::new();
    for &(m, a, p, e) in GATE_CORPUS {
        let ty = CoverType::new(m, a.to_vec())?;
        for seed in GATE_SEEDS {
            out.push(sample_instance(&ty, FieldSpec::new(p, e)?, seed)?);
        }
    }
    Ok(out)
}

/// Runs both strategies on the gate corpus.
pub fn run_gate() -> GateReport {
    let instances = match gate_instances() {
        Ok(v) => v,
        Err(_) => {
            return GateReport {
                instances: 0,
                mismatches: Vec::new(),
            }
        }
    };
    let mismatches = instances
        .iter()
        .filter_map(|inst| {
            let count = l_polynomial(inst, GATE_BUDGET)
                .ok()
                .map(|l| l.unit_root_count(inst.field.p));
            let cartier = cartier_manin(inst, GATE_BUDGET)
                .and_then(|op| op.stable_rank())
                .map_err(|e| e.to_string());
            match (&count, &cartier) {
                (Some(a), Ok(b)) if a == b => None,
                _ => Some(GateMismatch {
                    instance: inst.clone(),
                    count,
                    cartier,
                }),
            }
        })
        .collect();
    GateReport {
        instances: instances.len(),
        mismatches,
    }
}

/// Outcome of comparing a computed p-rank against the bound `B`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundComparison {
    pub c: u64,
    pub sigma: u64,
    #[serde(rename = "B")]
    pub bound: u64,
    pub genus: u64,
    pub consistent: bool,
    pub attains: bool,
    /// `p >= m (r - 3)`, the range where the bound is proven.
    pub large_characteristic: bool,
    pub strategy: Strategy,
}

pub struct Oracle {
    budget: u64,
    gate: OnceLock<GateReport>,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle::new(DEFAULT_BUDGET)
    }
}

impl Oracle {
    pub fn new(budget: u64) -> Self {
        Oracle {
            budget,
            gate: OnceLock::new(),
        }
    }

    /// An oracle whose gate outcome is fixed in advance.
    pub fn with_gate(budget: u64, report: GateReport) -> Self {
        let gate = OnceLock::new();
        let _ = gate.set(report);
        Oracle { budget, gate }
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn gate(&self) -> &GateReport {
        self.gate.get_or_init(run_gate)
    }

    fn resolve(&self, inst: &CurveInstance, strategy: Strategy) -> Result<Strategy> {
        Ok(match strategy {
            Strategy::Auto
                if inst.count_supported() && inst.count_work()? <= self.budget as u128 =>
            {
                Strategy::Count
            }
            Strategy::Auto => Strategy::Cartier,
            s => s,
        })
    }

    pub fn p_rank(&self, inst: &CurveInstance, strategy: Strategy) -> Result<PRank> {
        let genus = inst.genus()?;
        match self.resolve(inst, strategy)? {
            Strategy::Count => {
                if !inst.count_supported() {
                    return Err(Error::UnsupportedRamification);
                }
                let l = l_polynomial(inst, self.budget)?;
                Ok(PRank {
                    sigma: l.unit_root_count(inst.field.p),
                    genus,
                    strategy: Strategy::Count,
                    l_polynomial: Some(l),
                })
            }
            _ => {
                let gate = self.gate();
                if !gate.passed() {
                    return Err(Error::NotValidated(format!(
                        "{} of {} gate instances disagree with point counting",
                        gate.mismatches.len(),
                        gate.instances
                    )));
                }
                let sigma = cartier_manin(inst, self.budget)?.stable_rank()?;
                Ok(PRank {
                    sigma,
                    genus,
                    strategy: Strategy::Cartier,
                    l_polynomial: None,
                })
            }
        }
    }

    pub fn compare_bound(
        &self,
        inst: &CurveInstance,
        strategy: Strategy,
    ) -> Result<BoundComparison> {
        let class = inst.class()?;
        let report = bound_b(&inst.ty, &class)?;
        let rank = self.p_rank(inst, strategy)?;
        let r = inst.ty.r() as u64;
        Ok(BoundComparison {
            c: class.c(),
            sigma: rank.sigma,
            bound: report.b,
            genus: report.genus,
            consistent: rank.sigma <= report.b,
            attains: rank.sigma == report.b,
            large_characteristic: inst.field.p >= inst.ty.m() * r.saturating_sub(3),
            strategy: rank.strategy,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(m: u64, a: &[u64], p: u64, e: u32, pts: &[u64]) -> CurveInstance {
        CurveInstance::new(
            CoverType::new(m, a.to_vec()).unwrap(),
            FieldSpec::new(p, e).unwrap(),
            pts.to_vec(),
        )
        .unwrap()
    }

    /// Affine points of `z^m = f(x)` by exhausting both coordinates, plus the
    /// `m` points at infinity. Only valid over prime fields.
    fn brute_count(i: &CurveInstance) -> u64 {
        let p = i.field.p;
        let m = i.ty.m() as u32;
        let mut n = 0;
        for x in 0..p {
            let fx = i
                .points
                .iter()
                .zip(i.ty.exponents())
                .fold(1u64, |acc, (&y, &e)| {
                    acc * crate::arith::pow_mod((x + p - y) % p, e, p) % p
                });
            n += (0..p)
                .filter(|&z| crate::arith::pow_mod(z, m as u64, p) == fx)
                .count() as u64;
        }
        n + m as u64
    }

    #[test]
    fn elliptic_cube_roots() {
        let c = inst(3, &[1, 1, 1], 7, 1, &[0, 1, 2]);
        assert_eq!(count_points(&c, 1, 1000).unwrap(), 12);
        assert_eq!(brute_count(&c), 12);
        let l = l_polynomial(&c, 1000).unwrap();
        assert_eq!(l.coefficients, vec![1, 4, 7]);
        assert_eq!(l.unit_root_count(7), 1);
    }

    #[test]
    fn supersingular_over_extension() {
        // F_25 as F_5[i] with i^2 = 2, independent of the field tables.
        let mul = |u: (u64, u64), v: (u64, u64)| {
            ((u.0 * v.0 + 2 * u.1 * v.1) % 5, (u.0 * v.1 + u.1 * v.0) % 5)
        };
        let sub = |u: (u64, u64), c: u64| ((u.0 + 5 - c) % 5, u.1);
        let elems: Vec<_> = (0..5).flat_map(|a| (0..5).map(move |b| (a, b))).collect();
        let brute = 3 + elems
            .iter()
            .map(|&x| {
                let f = mul(mul(x, sub(x, 1)), sub(x, 2));
                elems.iter().filter(|&&z| mul(mul(z, z), z) == f).count() as u64
            })
            .sum::<u64>();
        assert_eq!(brute, 36);
        let c = inst(3, &[1, 1, 1], 5, 2, &[0, 1, 2]);
        assert_eq!(count_points(&c, 1, 1000).unwrap(), 36);
        let l = l_polynomial(&c, 1000).unwrap();
        assert_eq!(l.unit_root_count(5), 0);
        assert_eq!(
            Oracle::default().p_rank(&c, Strategy::Count).unwrap().sigma,
            0
        );
    }

    #[test]
    fn quintic_genus_two_is_nonordinary() {
        let c = inst(5, &[1, 1, 3], 19, 2, &[0, 1, 2]);
        let o = Oracle::default();
        let cmp = o.compare_bound(&c, Strategy::Count).unwrap();
        assert_eq!((cmp.sigma, cmp.bound, cmp.genus), (0, 0, 2));
        assert!(cmp.consistent && cmp.attains);
    }

    #[test]
    fn counts_match_brute_force_on_prime_fields() {
        for (m, a, p) in [
            (3, vec![1, 1, 2, 2], 13),
            (5, vec![1, 1, 1, 2], 11),
            (4, vec![1, 1, 3, 3], 13),
        ] {
            let ty = CoverType::new(m, a).unwrap();
            for seed in 0..4 {
                let c = sample_instance(&ty, FieldSpec::new(p, 1).unwrap(), seed).unwrap();
                assert_eq!(count_points(&c, 1, 1000).unwrap(), brute_count(&c), "{c:?}");
            }
        }
    }

    #[test]
    fn l_polynomial_predicts_next_count() {
        let ty = CoverType::new(5, vec![1, 1, 1, 2]).unwrap();
        let c = sample_instance(&ty, FieldSpec::new(11, 1).unwrap(), 7).unwrap();
        let l = l_polynomial(&c, DEFAULT_BUDGET).unwrap();
        assert!(l.satisfies_functional_equation());
        for k in 1..=5 {
            assert_eq!(
                l.point_count(k),
                count_points(&c, k as u32, DEFAULT_BUDGET).unwrap() as i128
            );
        }
    }

    #[test]
    fn budget_and_validation() {
        let c = inst(3, &[1, 1, 1], 7, 1, &[0, 1, 2]);
        assert!(matches!(
            count_points(&c, 9, 1000),
            Err(Error::BudgetExceeded { .. })
        ));
        let ty = CoverType::new(3, vec![1, 1, 1]).unwrap();
        let f = FieldSpec::new(5, 1).unwrap();
        assert!(matches!(
            CurveInstance::new(ty.clone(), f, vec![0, 1, 2]),
            Err(Error::BadInstance(_))
        ));
        let f = FieldSpec::new(7, 1).unwrap();
        assert!(matches!(
            CurveInstance::new(ty.clone(), f, vec![0, 1, 1]),
            Err(Error::BadInstance(_))
        ));
        assert!(matches!(
            CurveInstance::new(ty, f, vec![0, 1, 7]),
            Err(Error::BadInstance(_))
        ));
        assert_eq!(FieldSpec::new(9, 1), Err(Error::NotPrime(9)));
        let ty = CoverType::new(6, vec![3, 3, 2, 4]).unwrap();
        let c = CurveInstance::new(ty, FieldSpec::new(7, 1).unwrap(), vec![0, 1, 2, 3]).unwrap();
        assert_eq!(
            count_points(&c, 1, 1000),
            Err(Error::UnsupportedRamification)
        );
    }

    #[test]
    fn stable_rank_basics() {
        let field = FieldSpec::new(7, 1).unwrap();
        let op = |matrix: Vec<Vec<u64>>| SemilinearOperator {
            field,
            basis: Vec::new(),
            matrix,
        };
        assert_eq!(op(vec![vec![1, 0], vec![0, 1]]).stable_rank().unwrap(), 2);
        assert_eq!(op(vec![vec![0, 0], vec![0, 0]]).stable_rank().unwrap(), 0);
        assert_eq!(op(vec![vec![0, 1], vec![0, 0]]).stable_rank().unwrap(), 0);
        assert_eq!(op(vec![vec![1, 1], vec![0, 0]]).stable_rank().unwrap(), 1);
    }

    #[test]
    fn cartier_matches_count_on_small_cases() {
        for i in [
            inst(3, &[1, 1, 1], 7, 1, &[0, 1, 2]),
            inst(3, &[1, 1, 1], 5, 2, &[0, 1, 2]),
        ] {
            let l = l_polynomial(&i, 1000).unwrap();
            let op = cartier_manin(&i, 1000).unwrap();
            assert_eq!(op.stable_rank().unwrap(), l.unit_root_count(i.field.p));
        }
    }

    #[test]
    fn gate_passes() {
        let report = run_gate();
        assert!(report.passed(), "{:#?}", report.mismatches);
    }

    #[test]
    fn failed_gate_blocks_cartier() {
        let bad = GateReport {
            instances: 1,
            mismatches: vec![],
        };
        assert!(bad.passed());
        let failed = GateReport {
            instances: 1,
            mismatches: vec![GateMismatch {
                instance: inst(3, &[1, 1, 1], 7, 1, &[0, 1, 2]),
                count: Some(1),
                cartier: Ok(0),
            }],
        };
        let o = Oracle::with_gate(1000, failed);
        let c = inst(3, &[1, 1, 1], 7, 1, &[0, 1, 2]);
        assert!(matches!(
            o.p_rank(&c, Strategy::Cartier),
            Err(Error::NotValidated(_))
        ));
        assert_eq!(o.p_rank(&c, Strategy::Count).unwrap().sigma, 1);
    }

    #[test]
    fn affine_images_share_p_rank() {
        let c = inst(5, &[1, 1, 1, 2], 11, 1, &[0, 3, 5, 9]);
        let o = Oracle::default();
        let s = o.p_rank(&c, Strategy::Count).unwrap().sigma;
        let moved = c.affine_image(4, 7).unwrap();
        assert_eq!(o.p_rank(&moved, Strategy::Count).unwrap().sigma, s);
    }
}
