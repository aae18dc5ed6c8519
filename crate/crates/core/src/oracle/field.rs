//! Finite fields `F_{p^n}` in a polynomial basis.
//!
//! An element is the integer `sum d_j p^j` of its coordinates `d_j` with
//! respect to `1, t, .., t^(n-1)`, where `t` is a root of a fixed primitive
//! monic polynomial. The polynomial is the lexicographically first primitive
//! one, so encodings are stable across runs.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::arith::{factorize, is_prime, mul_mod, pow_mod};
use crate::error::{Error, Result};

/// Exp/log tables are built for fields up to this size.
const TABLE_LIMIT: u64 = 1 << 16;

#[derive(Debug)]
pub struct GfField {
    p: u64,
    n: usize,
    q: u64,
    /// Monic primitive polynomial, low degree first, length `n + 1`.
    modulus: Vec<u64>,
    /// `p^j` for `j < n`.
    place: Vec<u64>,
    tables: Option<Tables>,
}

#[derive(Debug)]
struct Tables {
    exp: Vec<u32>,
    log: Vec<u32>,
}

fn poly_mulmod_digits(a: &[u64], b: &[u64], modulus: &[u64], p: u64) -> Vec<u64> {
    let n = modulus.len() - 1;
    let mut prod = vec![0u64; 2 * n];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + mul_mod(x, y, p)) % p;
        }
    }
    for top in (n..2 * n).rev() {
        let c = prod[top];
        if c == 0 {
            continue;
        }
        prod[top] = 0;
        for j in 0..n {
            let sub = mul_mod(c, modulus[j], p);
            let k = top - n + j;
            prod[k] = (prod[k] + p - sub) % p;
        }
    }
    prod.truncate(n);
    prod
}

fn poly_powmod_t(exp: u64, modulus: &[u64], p: u64) -> Vec<u64> {
    let n = modulus.len() - 1;
    let mut acc = vec![0u64; n];
    acc[0] = 1;
    let mut base = vec![0u64; n];
    if n == 1 {
        base[0] = (p - modulus[0]) % p;
    } else {
        base[1] = 1;
    }
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mulmod_digits(&acc, &base, modulus, p);
        }
        base = poly_mulmod_digits(&base, &base, modulus, p);
        e >>= 1;
    }
    acc
}

fn is_primitive(modulus: &[u64], p: u64, q: u64, prime_factors: &[u64]) -> bool {
    if modulus[0] == 0 {
        return false;
    }
    let n = modulus.len() - 1;
    let mut one = vec![0u64; n];
    one[0] = 1;
    poly_powmod_t(q - 1, modulus, p) == one
        && prime_factors
            .iter()
            .all(|&l| poly_powmod_t((q - 1) / l, modulus, p) != one)
}

fn first_primitive_modulus(p: u64, n: usize, q: u64) -> Vec<u64> {
    let factors: Vec<u64> = factorize(q - 1).into_iter().map(|(l, _)| l).collect();
    let mut lower = vec![0u64; n];
    loop {
        let mut candidate = lower.clone();
        candidate.push(1);
        if is_primitive(&candidate, p, q, &factors) {
            return candidate;
        }
        // Odometer over the lower coefficients.
        let mut i = 0;
        loop {
            lower[i] += 1;
            if lower[i] < p {
                break;
            }
            lower[i] = 0;
            i += 1;
            assert!(i < n, "a primitive polynomial always exists");
        }
    }
}

impl GfField {
    pub fn new(p: u64, n: usize) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let q = (0..n)
            .try_fold(1u64, |acc, _| acc.checked_mul(p))
            .filter(|&q| n >= 1 && q < 1 << 62)
            .ok_or_else(|| Error::BadInstance(format!("field size {p}^{n} out of range")))?;
        let modulus = first_primitive_modulus(p, n, q);
        let place = (0..n).map(|j| p.pow(j as u32)).collect();
        let mut field = GfField {
            p,
            n,
            q,
            modulus,
            place,
            tables: None,
        };
        if q <= TABLE_LIMIT {
            let mut exp = Vec::with_capacity(q as usize - 1);
            let mut log = vec![0u32; q as usize];
            field.walk_powers(|k, x| {
                exp.push(x as u32);
                log[x as usize] = k as u32;
            });
            field.tables = Some(Tables { exp, log });
        }
        Ok(field)
    }

    /// Shared instance for `F_{p^n}`.
    pub fn cached(p: u64, n: usize) -> Result<Arc<GfField>> {
        static CACHE: OnceLock<Mutex<HashMap<(u64, usize), Arc<GfField>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(f) = cache.lock().unwrap().get(&(p, n)) {
            return Ok(f.clone());
        }
        let f = Arc::new(GfField::new(p, n)?);
        Ok(cache.lock().unwrap().entry((p, n)).or_insert(f).clone())
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> u64 {
        self.q
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn digits(&self, x: u64) -> Vec<u64> {
        let mut d = Vec::with_capacity(self.n);
        let mut x = x;
        for _ in 0..self.n {
            d.push(x % self.p);
            x /= self.p;
        }
        d
    }

    pub fn encode(&self, digits: &[u64]) -> u64 {
        digits.iter().zip(&self.place).map(|(d, w)| d * w).sum()
    }

    /// The primitive element `t`.
    pub fn generator(&self) -> u64 {
        if self.n == 1 {
            (self.p - self.modulus[0]) % self.p
        } else {
            self.p
        }
    }

    pub fn from_int(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        if self.n == 1 {
            return (a + b) % self.p;
        }
        let (da, db) = (self.digits(a), self.digits(b));
        self.encode(
            &da.iter()
                .zip(&db)
                .map(|(x, y)| (x + y) % self.p)
                .collect::<Vec<_>>(),
        )
    }

    pub fn neg(&self, a: u64) -> u64 {
        if self.n == 1 {
            return (self.p - a) % self.p;
        }
        self.encode(
            &self
                .digits(a)
                .iter()
                .map(|x| (self.p - x) % self.p)
                .collect::<Vec<_>>(),
        )
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if a == 0 || b == 0 {
            return 0;
        }
        if self.n == 1 {
            return mul_mod(a, b, self.p);
        }
        if let Some(t) = &self.tables {
            let k = (t.log[a as usize] as u64 + t.log[b as usize] as u64) % (self.q - 1);
            return t.exp[k as usize] as u64;
        }
        self.encode(&poly_mulmod_digits(
            &self.digits(a),
            &self.digits(b),
            &self.modulus,
            self.p,
        ))
    }

    pub fn pow(&self, a: u64, e: u64) -> u64 {
        if self.n == 1 {
            return pow_mod(a, e, self.p);
        }
        let mut acc = 1;
        let mut base = a;
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u64) -> u64 {
        assert!(a != 0, "inverse of zero");
        self.pow(a, self.q - 2)
    }

    /// `a^p`.
    pub fn frobenius(&self, a: u64) -> u64 {
        self.pow(a, self.p)
    }

    /// Calls `visit(k, t^k)` for `k = 0 .. q-2` by repeated multiplication
    /// by `t`, which in coordinates is a shift plus one reduction.
    pub fn walk_powers(&self, mut visit: impl FnMut(u64, u64)) {
        let (p, n) = (self.p, self.n);
        if n == 1 {
            let g = self.generator();
            let mut x = 1u64;
            for k in 0..self.q - 1 {
                visit(k, x);
                x = mul_mod(x, g, p);
            }
            return;
        }
        let mut d = vec![0u64; n];
        d[0] = 1;
        let mut x = 1u64;
        for k in 0..self.q - 1 {
            visit(k, x);
            let top = d[n - 1];
            for j in (1..n).rev() {
                d[j] = d[j - 1];
            }
            d[0] = 0;
            if top != 0 {
                for j in 0..n {
                    d[j] = (d[j] + p - mul_mod(top, self.modulus[j], p)) % p;
                }
            }
            x = self.encode(&d);
        }
    }

    /// Table of discrete logarithms reduced mod `m`, indexed by encoding.
    /// Entry 0 (the zero element) is unused. Requires `m | q - 1`.
    pub fn log_mod_table(&self, m: u64) -> Vec<u16> {
        assert!(m <= u16::MAX as u64 + 1 && (self.q - 1) % m == 0);
        let mut table = vec![0u16; self.q as usize];
        self.walk_powers(|k, x| table[x as usize] = (k % m) as u16);
        table
    }
}

/// An embedding `F_{p^e} -> F_{p^(e k)}` sending the small field's `t` to a
/// root of its modulus.
#[derive(Debug)]
pub struct Embedding {
    pub small: Arc<GfField>,
    pub large: Arc<GfField>,
    /// Image of `t^j` for `j < e`.
    basis_images: Vec<u64>,
}

impl Embedding {
    pub fn new(small: Arc<GfField>, large: Arc<GfField>) -> Result<Self> {
        if small.p != large.p || large.n % small.n != 0 {
            return Err(Error::BadInstance(
                "no embedding between these fields".into(),
            ));
        }
        let root = if small.n == 1 {
            0
        } else {
            let h = large.pow(large.generator(), (large.q - 1) / (small.q - 1));
            let mut x = 1u64;
            let mut found = None;
            for _ in 0..small.q - 1 {
                let value = small
                    .modulus
                    .iter()
                    .rev()
                    .fold(0, |acc, &c| large.add(large.mul(acc, x), c % large.p));
                if value == 0 {
                    found = Some(x);
                    break;
                }
                x = large.mul(x, h);
            }
            found.expect("the small modulus splits in the large field")
        };
        let basis_images = (0..small.n as u64).map(|j| large.pow(root, j)).collect();
        Ok(Embedding {
            small,
            large,
            basis_images,
        })
    }

    pub fn map(&self, x: u64) -> u64 {
        if self.small.n == 1 {
            return x;
        }
        self.small
            .digits(x)
            .iter()
            .zip(&self.basis_images)
            .fold(0, |acc, (&d, &img)| {
                self.large.add(acc, self.large.mul(d, img))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_generator() {
        let f = GfField::new(7, 1).unwrap();
        assert_eq!(f.generator(), 5);
        assert_eq!(f.mul(5, 6), 2);
        assert_eq!(f.inv(3), 5);
    }

    #[test]
    fn extension_field_axioms() {
        for (p, n) in [(3, 2), (5, 2), (3, 3), (2, 4), (7, 2)] {
            let f = GfField::new(p, n).unwrap();
            let q = f.size();
            let mut seen = vec![false; q as usize];
            f.walk_powers(|_, x| {
                assert!(!seen[x as usize]);
                seen[x as usize] = true;
            });
            assert!(!seen[0] && seen[1..].iter().all(|&s| s), "t is primitive");
            for a in 1..q {
                assert_eq!(f.mul(a, f.inv(a)), 1);
                assert_eq!(f.pow(a, q - 1), 1);
                assert_eq!(f.add(a, f.neg(a)), 0);
            }
            // Table-free product agrees with the table product.
            let plain = |a: u64, b: u64| {
                f.encode(&poly_mulmod_digits(
                    &f.digits(a),
                    &f.digits(b),
                    f.modulus(),
                    p,
                ))
            };
            for a in 0..q.min(40) {
                for b in 0..q.min(40) {
                    if a != 0 && b != 0 {
                        assert_eq!(f.mul(a, b), plain(a, b));
                    }
                }
            }
        }
    }

    #[test]
    fn frobenius_is_additive() {
        let f = GfField::new(5, 3).unwrap();
        for a in (0..125).step_by(7) {
            for b in (0..125).step_by(11) {
                assert_eq!(
                    f.frobenius(f.add(a, b)),
                    f.add(f.frobenius(a), f.frobenius(b))
                );
            }
        }
    }

    #[test]
    fn embedding_is_a_ring_map() {
        let small = GfField::cached(3, 2).unwrap();
        let large = GfField::cached(3, 4).unwrap();
        let e = Embedding::new(small.clone(), large.clone()).unwrap();
        for a in 0..9 {
            for b in 0..9 {
                assert_eq!(e.map(small.add(a, b)), large.add(e.map(a), e.map(b)));
                assert_eq!(e.map(small.mul(a, b)), large.mul(e.map(a), e.map(b)));
            }
            // Image lies in the fixed field of x -> x^9.
            assert_eq!(large.pow(e.map(a), 9), e.map(a));
        }
    }

    #[test]
    fn log_table_mod_m() {
        let f = GfField::new(13, 1).unwrap();
        let t = f.log_mod_table(3);
        // Cubes in F_13^* are {1, 5, 8, 12}.
        let cubes: Vec<u64> = (1..13).filter(|&x| t[x as usize] == 0).collect();
        assert_eq!(cubes, vec![1, 5, 8, 12]);
    }
}
