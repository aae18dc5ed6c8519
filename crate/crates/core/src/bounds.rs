//! Eigenspace dimensions, the p-rank bound `B(a)`, genus, and the generic
//! ordinarity test for m-cyclic covers.
//!
//! For a character `s` in `1..m`, `gamma(s) = (sum <s a_t>) / m` where the
//! sum runs over the `r_s` indices with `s a_t != 0 (mod m)`. The
//! `chi^s`-eigenspace of `H^1(Z, O_Z)` has dimension `r_s - 1 - gamma(s)`.
//! `B(a)` sums, over the orbits of multiplication by the class `c`, the
//! orbit size times the least dimension on the orbit.

use serde::{Deserialize, Serialize};

use crate::arith::{gcd, mul_mod, orbit_decomposition, sorted_types, CoverType, PrimeClass};
use crate::error::{ensure_invariant, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gamma {
    /// Sum of the nonzero residues `<s a_t>`; always a multiple of `m`.
    pub residue_sum: u64,
    /// Number `r_s` of nonzero terms.
    pub nonzero_terms: usize,
    pub value: u64,
}

pub(crate) fn gamma_raw(m: u64, a: &[u64], s: u64) -> Result<Gamma> {
    let mut residue_sum = 0u64;
    let mut nonzero_terms = 0;
    for &x in a {
        let t = mul_mod(s, x, m);
        if t != 0 {
            residue_sum += t;
            nonzero_terms += 1;
        }
    }
    ensure_invariant!(
        residue_sum % m == 0,
        "gamma({s}) = {residue_sum}/{m} is not integral for exponents {a:?}"
    );
    Ok(Gamma {
        residue_sum,
        nonzero_terms,
        value: residue_sum / m,
    })
}

fn check_character(m: u64, s: u64) -> Result<()> {
    if s == 0 || s >= m {
        return Err(Error::ZeroResidue { a: s as i128, m });
    }
    Ok(())
}

pub fn gamma(ty: &CoverType, s: u64) -> Result<Gamma> {
    check_character(ty.m(), s)?;
    gamma_raw(ty.m(), ty.exponents(), s)
}

pub(crate) fn eigenspace_dim_raw(m: u64, a: &[u64], s: u64) -> Result<u64> {
    let g = gamma_raw(m, a, s)?;
    // r_s >= 2 whenever r_s > 0, and gamma <= r_s - 1.
    if g.nonzero_terms == 0 {
        return Ok(0);
    }
    ensure_invariant!(
        g.value < g.nonzero_terms as u64,
        "negative eigenspace dimension at s={s} for {a:?}"
    );
    Ok(g.nonzero_terms as u64 - 1 - g.value)
}

pub fn eigenspace_dim(ty: &CoverType, s: u64) -> Result<u64> {
    check_character(ty.m(), s)?;
    eigenspace_dim_raw(ty.m(), ty.exponents(), s)
}

pub(crate) fn genus_raw(m: u64, a: &[u64]) -> Result<u64> {
    let twice: i128 = 2 - 2 * m as i128 + a.iter().map(|&x| (m - gcd(x, m)) as i128).sum::<i128>();
    ensure_invariant!(
        twice >= 0 && twice % 2 == 0,
        "Riemann-Hurwitz gives 2g = {twice} for ({m}; {a:?})"
    );
    Ok((twice / 2) as u64)
}

/// Genus of the cover by Riemann-Hurwitz: `1 - m + (1/2) sum (m - gcd(a_i, m))`.
pub fn genus_rh(ty: &CoverType) -> Result<u64> {
    genus_raw(ty.m(), ty.exponents())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitBound {
    pub representative: u64,
    pub size: u64,
    pub min_dim: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    #[serde(rename = "type")]
    pub ty: CoverType,
    pub class: PrimeClass,
    pub per_orbit: Vec<OrbitBound>,
    #[serde(rename = "B")]
    pub b: u64,
    pub genus: u64,
    pub ordinary: bool,
}

pub(crate) fn orbit_bounds(m: u64, a: &[u64], c: u64) -> Result<Vec<OrbitBound>> {
    let dims = (1..m)
        .map(|s| eigenspace_dim_raw(m, a, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(orbit_decomposition(m, c)?
        .orbits
        .into_iter()
        .map(|o| OrbitBound {
            representative: o.representative,
            size: o.size() as u64,
            min_dim: o
                .members
                .iter()
                .map(|&s| dims[s as usize - 1])
                .min()
                .unwrap_or(0),
        })
        .collect())
}

pub(crate) fn bound_raw(m: u64, a: &[u64], c: u64) -> Result<u64> {
    Ok(orbit_bounds(m, a, c)?
        .iter()
        .map(|o| o.size * o.min_dim)
        .sum())
}

fn check_class(ty: &CoverType, class: &PrimeClass) -> Result<()> {
    if ty.m() != class.m() {
        return Err(Error::ClassMismatch {
            type_m: ty.m(),
            class_m: class.m(),
        });
    }
    Ok(())
}

pub fn bound_b(ty: &CoverType, class: &PrimeClass) -> Result<BoundReport> {
    check_class(ty, class)?;
    let per_orbit = orbit_bounds(ty.m(), ty.exponents(), class.c())?;
    let b = per_orbit.iter().map(|o| o.size * o.min_dim).sum();
    let genus = genus_rh(ty)?;
    ensure_invariant!(b <= genus, "B = {b} exceeds genus {genus} for {ty}");
    let ordinary = gamma_constant_on_orbits(ty, class)?;
    ensure_invariant!(
        ordinary == (b == genus),
        "gamma-constancy ({ordinary}) disagrees with B = genus ({b} vs {genus}) for {ty}, c = {}",
        class.c()
    );
    Ok(BoundReport {
        ty: ty.clone(),
        class: class.clone(),
        per_orbit,
        b,
        genus,
        ordinary,
    })
}

fn gamma_constant_on_orbits(ty: &CoverType, class: &PrimeClass) -> Result<bool> {
    for orbit in orbit_decomposition(ty.m(), class.c())?.orbits {
        let first = gamma(ty, orbit.representative)?.value;
        for &s in &orbit.members[1..] {
            if gamma(ty, s)?.value != first {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Whether a cover of this type over generic branch points is ordinary for
/// primes in `class`: `gamma` is constant on every orbit. Cross-checked
/// against `B = genus`.
pub fn is_generically_ordinary(ty: &CoverType, class: &PrimeClass) -> Result<bool> {
    Ok(bound_b(ty, class)?.ordinary)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub m_max: u64,
    pub r_max: usize,
    pub types: u64,
    pub classes: u64,
}

/// Exhaustive check over sorted valid types with `m <= m_max`, `r <= r_max`:
/// eigenspace dimensions sum to the genus, `B = genus` for `c = 1`, and for
/// every unit class `B <= genus` with ordinarity matching `B = genus`.
pub fn check_invariants(m_max: u64, r_max: usize) -> Result<InvariantReport> {
    let mut report = InvariantReport {
        m_max,
        r_max,
        types: 0,
        classes: 0,
    };
    for m in 2..=m_max {
        let units: Vec<PrimeClass> = (1..m)
            .filter(|&c| gcd(c, m) == 1)
            .map(|c| PrimeClass::new(m, c))
            .collect::<Result<_>>()?;
        for r in 2..=r_max {
            for ty in sorted_types(m, r) {
                check_type(&ty, &units)?;
                report.types += 1;
                report.classes += units.len() as u64;
            }
        }
    }
    Ok(report)
}

/// The per-type part of `check_invariants`.
pub fn check_type(ty: &CoverType, units: &[PrimeClass]) -> Result<()> {
    let genus = genus_rh(ty)?;
    let dims = (1..ty.m())
        .map(|s| eigenspace_dim(ty, s))
        .sum::<Result<u64>>()?;
    ensure_invariant!(
        dims == genus,
        "eigenspace dimensions sum to {dims}, genus {genus} for {ty}"
    );
    for class in units {
        let rep = bound_b(ty, class)?;
        if class.c() == 1 {
            ensure_invariant!(
                rep.b == genus,
                "B = {} for c = 1 but genus {genus} for {ty}",
                rep.b
            );
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ty(m: u64, a: &[u64]) -> CoverType {
        CoverType::new(m, a.to_vec()).unwrap()
    }

    fn class(m: u64, c: u64) -> PrimeClass {
        PrimeClass::new(m, c).unwrap()
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma(&ty(5, &[1, 1, 1, 2]), 1).unwrap().value, 1);
        assert_eq!(gamma(&ty(5, &[1, 1, 1, 2]), 4).unwrap().value, 3);
        assert_eq!(gamma(&ty(31, &[1, 2, 4, 8, 16]), 3).unwrap().value, 2);
        assert!(gamma(&ty(5, &[1, 4]), 0).is_err());
        assert!(gamma(&ty(5, &[1, 4]), 5).is_err());
    }

    #[test]
    fn eigenspace_examples() {
        assert_eq!(eigenspace_dim(&ty(5, &[1, 1, 1, 2]), 1), Ok(2));
        assert_eq!(eigenspace_dim(&ty(5, &[1, 1, 1, 2]), 4), Ok(0));
        let t = ty(6, &[1, 2, 3]);
        let g = gamma(&t, 3).unwrap();
        assert_eq!((g.nonzero_terms, g.value), (2, 1));
        assert_eq!(eigenspace_dim(&t, 3), Ok(0));
    }

    #[test]
    fn bound_examples() {
        let r = bound_b(&ty(5, &[1, 1, 1, 2]), &class(5, 4)).unwrap();
        assert_eq!((r.b, r.genus, r.ordinary), (2, 4, false));
        assert_eq!(bound_b(&ty(5, &[1, 1, 3]), &class(5, 4)).unwrap().b, 0);
        let r = bound_b(&ty(7, &[1, 2, 4]), &class(7, 2)).unwrap();
        assert_eq!(r.b, 3);
        assert_eq!(
            r.per_orbit,
            vec![
                OrbitBound {
                    representative: 1,
                    size: 3,
                    min_dim: 1
                },
                OrbitBound {
                    representative: 3,
                    size: 3,
                    min_dim: 0
                },
            ]
        );
        assert!(matches!(
            bound_b(&ty(5, &[1, 4]), &class(7, 2)),
            Err(Error::ClassMismatch { .. })
        ));
    }

    #[test]
    fn genus_examples() {
        assert_eq!(genus_rh(&ty(5, &[1, 1, 1, 2])), Ok(4));
        assert_eq!(genus_rh(&ty(5, &[1, 4])), Ok(0));
        assert_eq!(genus_rh(&ty(31, &[1, 2, 4, 8, 16])), Ok(45));
    }

    #[test]
    fn ordinarity_examples() {
        assert_eq!(
            is_generically_ordinary(&ty(7, &[1, 2, 4]), &class(7, 2)),
            Ok(true)
        );
        assert_eq!(
            is_generically_ordinary(&ty(5, &[1, 1, 3]), &class(5, 4)),
            Ok(false)
        );
        assert_eq!(
            is_generically_ordinary(&ty(6, &[1, 2, 3]), &class(6, 1)),
            Ok(true)
        );
    }
}
