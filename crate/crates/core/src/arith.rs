//! Modular arithmetic on small moduli: canonical residues, multiplicative
//! orders, orbits of `s -> c*s` on `{1, .., m-1}`, and cover types.
//!
//! The number `n_i` attached to a character orbit is the orbit's size,
//! obtained by enumeration. The closed form `(p^f - 1)/gcd(i, m)`
//! does not count the orbit elements and is not used.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Prime factorization by trial division, as `(prime, exponent)` pairs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n) == [(n, 1)]
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

/// Reduction of `a` into the total range `[0, m)`.
pub fn reduce(a: i128, m: u64) -> u64 {
    a.rem_euclid(m as i128) as u64
}

/// The representative of `a` modulo `m` in `(0, m)`.
pub fn canonical_residue(a: i128, m: u64) -> Result<u64> {
    check_modulus(m)?;
    match reduce(a, m) {
        0 => Err(Error::ZeroResidue { a, m }),
        r => Ok(r),
    }
}

fn check_modulus(m: u64) -> Result<()> {
    if m < 2 || m > i64::MAX as u64 {
        return Err(Error::BadModulus(m));
    }
    Ok(())
}

/// Smallest `f >= 1` with `c^f = 1 (mod m)`.
pub fn multiplicative_order(c: u64, m: u64) -> Result<u64> {
    check_modulus(m)?;
    let c = c % m;
    if gcd(c, m) != 1 {
        return Err(Error::NotAUnit { c, m });
    }
    let mut order = euler_phi(m);
    for (q, _) in factorize(order) {
        while order % q == 0 && pow_mod(c, order / q, m) == 1 {
            order /= q;
        }
    }
    Ok(order)
}

/// A residue class `c mod m` of the characteristic, with its order `f`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeClass {
    m: u64,
    c: u64,
    f: u64,
}

impl PrimeClass {
    pub fn new(m: u64, c: u64) -> Result<Self> {
        let f = multiplicative_order(c, m)?;
        Ok(PrimeClass { m, c: c % m, f })
    }

    /// The class of an actual prime `p`; rejects composites and `p | m`.
    pub fn from_prime(p: u64, m: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Self::new(m, p % m)
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn c(&self) -> u64 {
        self.c
    }

    pub fn order(&self) -> u64 {
        self.f
    }

    /// Smallest prime `p >= lower` with `p = c (mod m)`.
    pub fn smallest_prime_at_least(&self, lower: u64) -> u64 {
        let mut p = lower.max(2);
        p += (self.c + self.m - p % self.m) % self.m;
        loop {
            if is_prime(p) {
                return p;
            }
            p += self.m;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orbit {
    /// Minimal element of the orbit.
    pub representative: u64,
    /// Members in cycle order `rep, c*rep, c^2*rep, ...`.
    pub members: Vec<u64>,
}

impl Orbit {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitDecomposition {
    pub m: u64,
    pub c: u64,
    /// Sorted by representative.
    pub orbits: Vec<Orbit>,
}

pub fn orbit_decomposition(m: u64, c: u64) -> Result<OrbitDecomposition> {
    multiplicative_order(c, m)?;
    let c = c % m;
    let mut seen = vec![false; m as usize];
    let mut orbits = Vec::new();
    for s in 1..m {
        if seen[s as usize] {
            continue;
        }
        let mut members = Vec::new();
        let mut x = s;
        while !seen[x as usize] {
            seen[x as usize] = true;
            members.push(x);
            x = mul_mod(x, c, m);
        }
        orbits.push(Orbit {
            representative: s,
            members,
        });
    }
    Ok(OrbitDecomposition { m, c, orbits })
}

/// The ramification type `(m; a_1, .., a_r)` of an m-cyclic cover of the line.
///
/// Invariants: `0 < a_i < m`, `sum a_i = 0 (mod m)`, `gcd(m, a_1, .., a_r) = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoverType {
    m: u64,
    a: Vec<u64>,
}

/// Checks everything except connectedness; returns `gcd(m, a)`.
pub(crate) fn check_exponents(m: u64, a: &[u64]) -> Result<u64> {
    check_modulus(m)?;
    if a.len() < 2 {
        return Err(Error::TooFewPoints(a.len()));
    }
    let mut sum = 0u128;
    let mut g = m;
    for (index, &value) in a.iter().enumerate() {
        if value == 0 || value >= m {
            return Err(Error::BadEntry {
                index: index + 1,
                value,
                m,
            });
        }
        sum += value as u128;
        g = gcd(g, value);
    }
    if sum % m as u128 != 0 {
        return Err(Error::BadSum {
            sum: (sum % m as u128) as u64,
            m,
        });
    }
    Ok(g)
}

pub fn validate_type(m: u64, a: &[u64]) -> Result<CoverType> {
    match check_exponents(m, a)? {
        1 => Ok(CoverType { m, a: a.to_vec() }),
        gcd => Err(Error::Disconnected { gcd }),
    }
}

impl CoverType {
    pub fn new(m: u64, a: Vec<u64>) -> Result<Self> {
        validate_type(m, &a)
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn exponents(&self) -> &[u64] {
        &self.a
    }

    pub fn r(&self) -> usize {
        self.a.len()
    }

    /// `(<u*a_i>)_i` for a unit `u`; still a valid type.
    pub fn scaled(&self, u: u64) -> Result<CoverType> {
        if gcd(u % self.m, self.m) != 1 {
            return Err(Error::NotAUnit { c: u, m: self.m });
        }
        let a = self.a.iter().map(|&x| mul_mod(x, u, self.m)).collect();
        Ok(CoverType { m: self.m, a })
    }

    pub fn sorted(&self) -> CoverType {
        let mut a = self.a.clone();
        a.sort_unstable();
        CoverType { m: self.m, a }
    }

    /// Representative of the class of this type under permutations and
    /// unit scalings: the lexicographically least sorted scaling.
    pub fn canonical(&self) -> CoverType {
        (1..self.m)
            .filter(|&u| gcd(u, self.m) == 1)
            .map(|u| {
                let mut a: Vec<u64> = self.a.iter().map(|&x| mul_mod(x, u, self.m)).collect();
                a.sort_unstable();
                a
            })
            .min()
            .map(|a| CoverType { m: self.m, a })
            .expect("1 is always a unit")
    }

    pub fn is_canonical(&self) -> bool {
        *self == self.canonical()
    }
}

/// Every valid type `(m; a)` with `a` nondecreasing of length `r`.
pub fn sorted_types(m: u64, r: usize) -> Vec<CoverType> {
    fn rec(m: u64, r: usize, lo: u64, sum: u64, cur: &mut Vec<u64>, out: &mut Vec<CoverType>) {
        if cur.len() == r {
            if sum % m == 0 {
                if let Ok(t) = validate_type(m, cur) {
                    out.push(t);
                }
            }
            return;
        }
        for x in lo..m {
            cur.push(x);
            rec(m, r, x, sum + x, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if m >= 2 && r >= 2 {
        rec(m, r, 1, 0, &mut Vec::with_capacity(r), &mut out);
    }
    out
}

impl std::fmt::Display for CoverType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({};", self.m)?;
        for (i, a) in self.a.iter().enumerate() {
            write!(f, "{}{}", if i == 0 { "" } else { "," }, a)?;
        }
        write!(f, ")")
    }
}
