//! Dense univariate polynomials over a `GfField`, low degree first.

use super::field::GfField;

pub type Poly = Vec<u64>;

pub fn trim(mut a: Poly) -> Poly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

pub fn mul(f: &GfField, a: &[u64], b: &[u64]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if y != 0 {
                out[i + j] = f.add(out[i + j], f.mul(x, y));
            }
        }
    }
    trim(out)
}

pub fn pow(f: &GfField, a: &[u64], mut e: u64) -> Poly {
    let mut acc = vec![1u64];
    let mut base = a.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(f, &acc, &base);
        }
        e >>= 1;
        if e > 0 {
            base = mul(f, &base, &base);
        }
    }
    acc
}

/// `prod (x - roots_i)^{exps_i}`.
pub fn from_roots(f: &GfField, roots: &[u64], exps: &[u64]) -> Poly {
    roots.iter().zip(exps).fold(vec![1u64], |acc, (&r, &e)| {
        let linear = [f.neg(r), 1];
        mul(f, &acc, &pow(f, &linear, e))
    })
}

/// Quotient and remainder by a monic divisor.
pub fn divrem_monic(f: &GfField, a: &[u64], d: &[u64]) -> (Poly, Poly) {
    let d = trim(d.to_vec());
    assert_eq!(d.last(), Some(&1), "divisor must be monic");
    let mut rem = trim(a.to_vec());
    if rem.len() < d.len() {
        return (Vec::new(), rem);
    }
    let shift = d.len() - 1;
    let mut quot = vec![0u64; rem.len() - shift];
    for top in (shift..rem.len()).rev() {
        let c = rem[top];
        if c == 0 {
            continue;
        }
        quot[top - shift] = c;
        for (j, &dj) in d.iter().enumerate() {
            let k = top - shift + j;
            rem[k] = f.sub(rem[k], f.mul(c, dj));
        }
    }
    rem.truncate(shift);
    (trim(quot), trim(rem))
}

pub fn map_coefficients(a: &[u64], g: impl Fn(u64) -> u64) -> Poly {
    a.iter().map(|&c| g(c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divide_back() {
        let f = GfField::new(7, 2).unwrap();
        let a = from_roots(&f, &[3, 10, 22], &[2, 1, 3]);
        let d = from_roots(&f, &[10, 22], &[1, 2]);
        let (q, r) = divrem_monic(&f, &a, &d);
        assert!(r.is_empty());
        assert_eq!(mul(&f, &q, &d), a);
        let (_, r) = divrem_monic(&f, &[1, 1], &[5, 1]);
        assert_eq!(r, vec![f.sub(1, 5)]);
    }
}
