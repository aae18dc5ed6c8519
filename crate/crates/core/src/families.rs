//! Families of types without good degenerations, the checks that go with
//! them, and an exhaustive search over small types.
//!
//! Every quantity here depends on the characteristic only through `p mod m`,
//! so residue classes stand in for "sufficiently large primes `p = c`".

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{
    gcd, is_prime, multiplicative_order, pow_mod, sorted_types, CoverType, PrimeClass,
};
use crate::bounds::{bound_b, gamma};
use crate::degen::{certify, pair_condition, DegenerationVerdict};
use crate::error::{ensure_invariant, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum FamilyKind {
    /// `m = 2^f - 1`, `alpha = 2`, `f` an odd prime.
    Mersenne { f: u64 },
    /// `m` odd, `alpha` of order `n` dividing `(m - 1)/2`.
    PowerCycle { m: u64, alpha: u64 },
}

/// A type `(m; 1, alpha, .., alpha^(n-1))` with `n` the order of `alpha`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySpec {
    kind: FamilyKind,
    alpha: u64,
    n: u64,
    #[serde(rename = "type")]
    ty: CoverType,
}

impl FamilySpec {
    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn m(&self) -> u64 {
        self.ty.m()
    }

    pub fn alpha(&self) -> u64 {
        self.alpha
    }

    /// Order of `alpha`, which is also the number of branch points.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn cover_type(&self) -> &CoverType {
        &self.ty
    }

    /// Classes `c = alpha^i` with `ord(c) = n`.
    pub fn full_order_classes(&self) -> Vec<PrimeClass> {
        let mut cs: Vec<u64> = (1..self.n)
            .map(|i| pow_mod(self.alpha, i, self.m()))
            .filter(|&c| multiplicative_order(c, self.m()) == Ok(self.n))
            .collect();
        cs.sort_unstable();
        cs.into_iter()
            .map(|c| PrimeClass::new(self.m(), c).expect("power of a unit"))
            .collect()
    }
}

fn power_cycle_type(m: u64, alpha: u64, n: u64) -> Result<CoverType> {
    let a: Vec<u64> = (0..n).map(|j| pow_mod(alpha, j, m)).collect();
    let sum = a.iter().fold(0, |acc, &x| (acc + x) % m);
    if sum != 0 {
        return Err(Error::BadSum { sum, m });
    }
    CoverType::new(m, a)
}

pub fn mersenne_family(f: u64) -> Result<FamilySpec> {
    if f == 2 || f > 62 || !is_prime(f) {
        return Err(Error::BadExponent(f));
    }
    let m = (1u64 << f) - 1;
    Ok(FamilySpec {
        kind: FamilyKind::Mersenne { f },
        alpha: 2,
        n: f,
        ty: power_cycle_type(m, 2, f)?,
    })
}

pub fn power_family(m: u64, alpha: u64) -> Result<FamilySpec> {
    if m % 2 == 0 {
        return Err(Error::BadModulus(m));
    }
    let n = multiplicative_order(alpha, m)?;
    let half = (m - 1) / 2;
    if half == 0 || half % n != 0 {
        return Err(Error::BadOrder {
            m,
            alpha: alpha % m,
            order: n,
            half,
        });
    }
    let ty = power_cycle_type(m, alpha % m, n)?;
    Ok(FamilySpec {
        kind: FamilyKind::PowerCycle {
            m,
            alpha: alpha % m,
        },
        alpha: alpha % m,
        n,
        ty,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombilemReport {
    pub f: u64,
    pub m: u64,
    pub checked: u64,
    pub passed: u64,
    /// Failing subsets, as bit masks over `0..f`. Capped at 16 entries.
    pub failures: Vec<u64>,
}

/// Check `gamma(s) = |S|` and `gamma(m - s) = f - |S|` for every proper
/// nonempty `S`, `s = sum_{j in S} 2^j`.
pub fn verify_combilem(f: u64) -> Result<CombilemReport> {
    let fam = mersenne_family(f)?;
    if f > 24 {
        return Err(Error::BudgetExceeded {
            needed: 1u128 << f,
            budget: 1 << 24,
        });
    }
    let m = fam.m();
    let ty = fam.cover_type();
    let outcomes: Vec<(u64, bool)> = (1..m)
        .into_par_iter()
        .map(|mask| {
            let size = mask.count_ones() as u64;
            let ok = gamma(ty, mask)?.value == size && gamma(ty, m - mask)?.value == f - size;
            Ok((mask, ok))
        })
        .collect::<Result<_>>()?;
    let failures: Vec<u64> = outcomes
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|&(mask, _)| mask)
        .take(16)
        .collect();
    let passed = outcomes.iter().filter(|(_, ok)| *ok).count() as u64;
    Ok(CombilemReport {
        f,
        m,
        checked: outcomes.len() as u64,
        passed,
        failures,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundlemReport {
    pub f: u64,
    pub m: u64,
    pub c: u64,
    #[serde(rename = "B")]
    pub b: u64,
    pub genus: u64,
    /// The closed form `(f - 1)(m - 1)/2`, which disagrees with `genus` for f = 11.
    pub closed_form_genus: u64,
    pub ordinary: bool,
}

/// Ordinarity of the Mersenne member for a class `c = 2^i` of order `f`.
pub fn verify_boundlem(f: u64, c: u64) -> Result<BoundlemReport> {
    let fam = mersenne_family(f)?;
    let m = fam.m();
    let class = PrimeClass::new(m, c)?;
    if class.order() != f {
        return Err(Error::BadClass(format!(
            "{c} has order {} mod {m}, not {f}",
            class.order()
        )));
    }
    if !(0..f).any(|i| pow_mod(2, i, m) == class.c()) {
        return Err(Error::BadClass(format!("{c} is not a power of 2 mod {m}")));
    }
    let report = bound_b(fam.cover_type(), &class)?;
    ensure_invariant!(
        report.ordinary && report.b == report.genus,
        "Mersenne member f={f} not ordinary for c={c}: B={} genus={}",
        report.b,
        report.genus
    );
    Ok(BoundlemReport {
        f,
        m,
        c: class.c(),
        b: report.b,
        genus: report.genus,
        closed_form_genus: (f - 1) * (m - 1) / 2,
        ordinary: report.ordinary,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyVerdict {
    pub c: u64,
    pub order: u64,
    #[serde(rename = "B")]
    pub b: u64,
    pub genus: u64,
    pub verdict: DegenerationVerdict,
}

/// Certify a family member for every class `c` with `ord(c) = order`
/// (default: the full order `n`).
pub fn family_verdicts(fam: &FamilySpec, order: Option<u64>) -> Result<Vec<FamilyVerdict>> {
    let m = fam.m();
    let order = order.unwrap_or(fam.n());
    (1..m)
        .filter(|&c| multiplicative_order(c, m) == Ok(order))
        .map(|c| {
            let class = PrimeClass::new(m, c)?;
            let rep = bound_b(fam.cover_type(), &class)?;
            Ok(FamilyVerdict {
                c,
                order,
                b: rep.b,
                genus: rep.genus,
                verdict: certify(fam.cover_type(), &class, Some(rep.b))?,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "select", content = "value")]
pub enum ClassSelection {
    All,
    /// Residues, reduced mod each `m`; non-units are skipped.
    Residues(Vec<u64>),
    /// Classes of exactly this multiplicative order.
    Order(u64),
}

impl ClassSelection {
    fn classes(&self, m: u64) -> Vec<u64> {
        let units = (1..m).filter(|&c| gcd(c, m) == 1);
        let mut cs: Vec<u64> = match self {
            ClassSelection::All => units.collect(),
            ClassSelection::Residues(rs) => rs
                .iter()
                .map(|&c| c % m)
                .filter(|&c| gcd(c, m) == 1)
                .collect(),
            ClassSelection::Order(f) => units
                .filter(|&c| multiplicative_order(c, m) == Ok(*f))
                .collect(),
        };
        cs.sort_unstable();
        cs.dedup();
        cs
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchDomain {
    pub m_min: u64,
    pub m_max: u64,
    pub r_min: usize,
    pub r_max: usize,
    pub classes: ClassSelection,
    /// Drop types with `a_i + a_j = 0 (mod m)` for some pair.
    pub skip_pair_condition: bool,
}

impl SearchDomain {
    pub fn single(m: u64, r: usize, classes: ClassSelection) -> Self {
        SearchDomain {
            m_min: m,
            m_max: m,
            r_min: r,
            r_max: r,
            classes,
            skip_pair_condition: false,
        }
    }

    /// Rough work estimate: sorted tuples x classes x splits x characters.
    pub fn estimate(&self) -> u128 {
        let mut total = 0u128;
        for m in self.m_min.max(2)..=self.m_max {
            let classes = self.classes.classes(m).len() as u128;
            for r in self.r_min.max(2)..=self.r_max {
                let tuples = binomial(m as u128 - 2 + r as u128, r as u128);
                let splits = 1u128 << (r.min(100) - 1);
                total = total.saturating_add(
                    tuples
                        .saturating_mul(classes)
                        .saturating_mul(splits)
                        .saturating_mul(m as u128),
                );
            }
        }
        total
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n.saturating_sub(k));
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchHit {
    #[serde(rename = "type")]
    pub ty: CoverType,
    pub class: PrimeClass,
    pub verdict: DegenerationVerdict,
}

/// Canonical (sorted, minimal under unit scaling) valid types of length `r`.
pub fn canonical_types(m: u64, r: usize, skip_pair_condition: bool) -> Vec<CoverType> {
    sorted_types(m, r)
        .into_iter()
        .filter(|t| t.is_canonical())
        .filter(|t| !(skip_pair_condition && pair_condition(t)))
        .collect()
}

fn search_block(m: u64, r: usize, domain: &SearchDomain) -> Result<Vec<SearchHit>> {
    let classes: Vec<PrimeClass> = domain
        .classes
        .classes(m)
        .into_iter()
        .map(|c| PrimeClass::new(m, c))
        .collect::<Result<_>>()?;
    let per_type: Vec<Vec<SearchHit>> = canonical_types(m, r, domain.skip_pair_condition)
        .into_par_iter()
        .map(|ty| {
            let mut hits = Vec::new();
            for class in &classes {
                let verdict = certify(&ty, class, None)?;
                if verdict.is_certified_no() {
                    hits.push(SearchHit {
                        ty: ty.clone(),
                        class: class.clone(),
                        verdict,
                    });
                }
            }
            Ok(hits)
        })
        .collect::<Result<_>>()?;
    Ok(per_type.into_iter().flatten().collect())
}

const CHECKPOINT_SCHEMA: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum CheckpointRecord {
    Domain {
        schema_version: u32,
        domain: SearchDomain,
    },
    Block {
        schema_version: u32,
        m: u64,
        r: usize,
        hits: Vec<SearchHit>,
    },
}

fn read_checkpoint(
    path: &Path,
    domain: &SearchDomain,
) -> Result<BTreeMap<(u64, usize), Vec<SearchHit>>> {
    let mut done = BTreeMap::new();
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(done),
        Err(e) => return Err(Error::Checkpoint(e.to_string())),
    };
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::Checkpoint(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: CheckpointRecord = match serde_json::from_str(&line) {
            Ok(r) => r,
            // A torn final line from an interrupted run; its block is redone.
            Err(_) => continue,
        };
        match record {
            CheckpointRecord::Domain {
                schema_version,
                domain: d,
            } => {
                if schema_version != CHECKPOINT_SCHEMA || d != *domain {
                    return Err(Error::Checkpoint(format!(
                        "line {}: checkpoint belongs to a different search",
                        lineno + 1
                    )));
                }
            }
            CheckpointRecord::Block {
                schema_version,
                m,
                r,
                hits,
            } => {
                if schema_version != CHECKPOINT_SCHEMA {
                    return Err(Error::Checkpoint(format!(
                        "unknown schema {schema_version}"
                    )));
                }
                done.insert((m, r), hits);
            }
        }
    }
    Ok(done)
}

fn append_record(file: &mut File, record: &CheckpointRecord) -> Result<()> {
    let line = serde_json::to_string(record).map_err(|e| Error::Checkpoint(e.to_string()))?;
    writeln!(file, "{line}")
        .and_then(|_| file.flush())
        .map_err(|e| Error::Checkpoint(e.to_string()))
}

/// All `CertifiedNo` hits in the domain, ordered by `(m, r, type, c)`.
///
/// With a checkpoint path, completed `(m, r)` blocks are appended as JSON
/// lines and skipped when the same search is resumed.
pub fn search(
    domain: &SearchDomain,
    budget: u64,
    checkpoint: Option<&Path>,
) -> Result<Vec<SearchHit>> {
    let needed = domain.estimate();
    if needed > budget as u128 {
        return Err(Error::DomainTooLarge { needed, budget });
    }
    let mut done = match checkpoint {
        Some(path) => read_checkpoint(path, domain)?,
        None => BTreeMap::new(),
    };
    let mut sink = match checkpoint {
        Some(path) => {
            let fresh = !path.exists()
                || std::fs::metadata(path)
                    .map(|md| md.len() == 0)
                    .unwrap_or(true);
            let mut f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| Error::Checkpoint(e.to_string()))?;
            if fresh {
                append_record(
                    &mut f,
                    &CheckpointRecord::Domain {
                        schema_version: CHECKPOINT_SCHEMA,
                        domain: domain.clone(),
                    },
                )?;
            }
            Some(f)
        }
        None => None,
    };
    let mut out = Vec::new();
    for m in domain.m_min.max(2)..=domain.m_max {
        for r in domain.r_min.max(2)..=domain.r_max {
            let hits = match done.remove(&(m, r)) {
                Some(h) => h,
                None => {
                    let mut h = search_block(m, r, domain)?;
                    h.sort_by(|x, y| (&x.ty, x.class.c()).cmp(&(&y.ty, y.class.c())));
                    if let Some(f) = sink.as_mut() {
                        append_record(
                            f,
                            &CheckpointRecord::Block {
                                schema_version: CHECKPOINT_SCHEMA,
                                m,
                                r,
                                hits: h.clone(),
                            },
                        )?;
                    }
                    h
                }
            };
            out.extend(hits);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mersenne_examples() {
        assert_eq!(
            mersenne_family(3).unwrap().cover_type().exponents(),
            &[1, 2, 4]
        );
        let f5 = mersenne_family(5).unwrap();
        assert_eq!(
            (f5.m(), f5.cover_type().exponents()),
            (31, &[1, 2, 4, 8, 16][..])
        );
        assert_eq!(mersenne_family(4), Err(Error::BadExponent(4)));
        assert_eq!(mersenne_family(2), Err(Error::BadExponent(2)));
    }

    #[test]
    fn power_examples() {
        let p = power_family(11, 3).unwrap();
        assert_eq!(
            (p.n(), p.cover_type().exponents()),
            (5, &[1, 3, 9, 5, 4][..])
        );
        let p = power_family(7, 2).unwrap();
        assert_eq!(p.cover_type(), mersenne_family(3).unwrap().cover_type());
        assert!(matches!(
            power_family(9, 2),
            Err(Error::BadOrder {
                order: 6,
                half: 4,
                ..
            })
        ));
        assert!(matches!(power_family(10, 3), Err(Error::BadModulus(10))));
        assert!(matches!(power_family(11, 1), Err(Error::BadSum { .. })));
    }

    #[test]
    fn combilem_small() {
        let r = verify_combilem(3).unwrap();
        assert_eq!((r.checked, r.passed), (6, 6));
        let r = verify_combilem(5).unwrap();
        assert_eq!((r.checked, r.passed), (30, 30));
    }

    #[test]
    fn boundlem_examples() {
        let r = verify_boundlem(3, 2).unwrap();
        assert_eq!((r.b, r.genus, r.closed_form_genus), (3, 3, 6));
        let r = verify_boundlem(5, 2).unwrap();
        assert_eq!((r.b, r.genus), (45, 45));
        let r = verify_boundlem(5, 4).unwrap();
        assert_eq!((r.b, r.genus), (45, 45));
        assert!(matches!(verify_boundlem(5, 1), Err(Error::BadClass(_))));
        // 3 has order 30 mod 31.
        assert!(matches!(verify_boundlem(5, 3), Err(Error::BadClass(_))));
    }

    #[test]
    fn canonical_types_small() {
        let ts: Vec<Vec<u64>> = canonical_types(5, 4, false)
            .iter()
            .map(|t| t.exponents().to_vec())
            .collect();
        assert_eq!(
            ts,
            vec![vec![1, 1, 1, 2], vec![1, 1, 4, 4], vec![1, 2, 3, 4]]
        );
        let ts = canonical_types(5, 4, true);
        assert_eq!(ts.len(), 1);
    }

    #[test]
    fn search_examples() {
        let hits = search(
            &SearchDomain::single(5, 4, ClassSelection::Residues(vec![4])),
            u64::MAX,
            None,
        )
        .unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].ty.exponents(), &[1, 1, 1, 2]);
        let hits = search(
            &SearchDomain::single(5, 4, ClassSelection::Residues(vec![1])),
            u64::MAX,
            None,
        )
        .unwrap();
        assert!(hits.is_empty());
        let err = search(
            &SearchDomain::single(30, 8, ClassSelection::All),
            1000,
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DomainTooLarge { .. }));
    }
}
