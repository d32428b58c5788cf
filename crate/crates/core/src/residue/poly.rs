//! Polynomials over F_q, low degree first, and their factorization
//! (square-free, distinct-degree, equal-degree).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::Fq;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FqPoly {
    c: Vec<u32>,
}

impl FqPoly {
    pub fn new(mut c: Vec<u32>) -> Self {
        while c.last() == Some(&0) {
            c.pop();
        }
        FqPoly { c }
    }

    pub fn zero() -> Self {
        FqPoly { c: vec![] }
    }

    pub fn constant(a: u32) -> Self {
        FqPoly::new(vec![a])
    }

    pub fn one() -> Self {
        FqPoly::constant(1)
    }

    /// a·t^k
    pub fn monomial(a: u32, k: usize) -> Self {
        let mut c = vec![0; k + 1];
        c[k] = a;
        FqPoly::new(c)
    }

    /// t
    pub fn x() -> Self {
        FqPoly::monomial(1, 1)
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> u32 {
        self.c.get(i).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.c == [1]
    }

    /// Degree, `None` for the zero polynomial.
    pub fn deg(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn degree(&self) -> usize {
        self.deg().unwrap_or(0)
    }

    pub fn lead(&self) -> u32 {
        self.c.last().copied().unwrap_or(0)
    }

    /// Multiplicity of t as a factor.
    pub fn ord0(&self) -> usize {
        self.c.iter().take_while(|&&a| a == 0).count()
    }

    pub fn add(&self, k: &Fq, o: &FqPoly) -> FqPoly {
        let n = self.c.len().max(o.c.len());
        FqPoly::new((0..n).map(|i| k.add(self.coeff(i), o.coeff(i))).collect())
    }

    pub fn sub(&self, k: &Fq, o: &FqPoly) -> FqPoly {
        let n = self.c.len().max(o.c.len());
        FqPoly::new((0..n).map(|i| k.sub(self.coeff(i), o.coeff(i))).collect())
    }

    pub fn neg(&self, k: &Fq) -> FqPoly {
        FqPoly::new(self.c.iter().map(|&a| k.neg(a)).collect())
    }

    pub fn scale(&self, k: &Fq, a: u32) -> FqPoly {
        FqPoly::new(self.c.iter().map(|&x| k.mul(x, a)).collect())
    }

    pub fn shift(&self, s: usize) -> FqPoly {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = vec![0; s];
        c.extend_from_slice(&self.c);
        FqPoly { c }
    }

    pub fn mul(&self, k: &Fq, o: &FqPoly) -> FqPoly {
        if self.is_zero() || o.is_zero() {
            return FqPoly::zero();
        }
        let mut c = vec![0u32; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                c[i + j] = k.add(c[i + j], k.mul(a, b));
            }
        }
        FqPoly::new(c)
    }

    pub fn pow(&self, k: &Fq, n: u64) -> FqPoly {
        let mut acc = FqPoly::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(k, &base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(k, &base);
            }
        }
        acc
    }

    /// Quotient and remainder; panics on division by zero.
    pub fn divrem(&self, k: &Fq, d: &FqPoly) -> (FqPoly, FqPoly) {
        let dd = d.deg().expect("division by the zero polynomial");
        let inv = k.inv(d.lead()).unwrap();
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (FqPoly::zero(), self.clone());
        }
        let mut q = vec![0u32; r.len() - dd];
        for i in (dd..r.len()).rev() {
            let c = k.mul(r[i], inv);
            if c == 0 {
                continue;
            }
            q[i - dd] = c;
            for (j, &b) in d.c.iter().enumerate() {
                r[i - dd + j] = k.sub(r[i - dd + j], k.mul(c, b));
            }
        }
        r.truncate(dd);
        (FqPoly::new(q), FqPoly::new(r))
    }

    pub fn rem(&self, k: &Fq, d: &FqPoly) -> FqPoly {
        self.divrem(k, d).1
    }

    pub fn div_exact(&self, k: &Fq, d: &FqPoly) -> FqPoly {
        let (q, r) = self.divrem(k, d);
        debug_assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    pub fn monic(&self, k: &Fq) -> FqPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(k, k.inv(self.lead()).unwrap())
    }

    /// Monic gcd (zero only if both are zero).
    pub fn gcd(&self, k: &Fq, o: &FqPoly) -> FqPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(k, &b);
            a = b;
            b = r;
        }
        a.monic(k)
    }

    pub fn derivative(&self, k: &Fq) -> FqPoly {
        FqPoly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &a)| k.mul(a, k.from_int(i as i64)))
                .collect(),
        )
    }

    pub fn eval(&self, k: &Fq, x: u32) -> u32 {
        self.c.iter().rev().fold(0, |acc, &a| k.add(k.mul(acc, x), a))
    }

    /// Inverse of Frobenius on coefficients; requires every exponent divisible by p.
    pub fn pth_root(&self, k: &Fq) -> Option<FqPoly> {
        let p = k.p() as usize;
        if self.c.iter().enumerate().any(|(i, &a)| a != 0 && i % p != 0) {
            return None;
        }
        Some(FqPoly::new(self.c.iter().step_by(p).map(|&a| k.pth_root(a)).collect()))
    }

    fn powmod(&self, k: &Fq, mut n: u64, m: &FqPoly) -> FqPoly {
        let mut acc = FqPoly::one();
        let mut base = self.rem(k, m);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(k, &base).rem(k, m);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(k, &base).rem(k, m);
            }
        }
        acc
    }

    /// Roots in F_q, each once, ascending.
    pub fn roots(&self, k: &Fq) -> Vec<u32> {
        if self.degree() == 0 {
            return vec![];
        }
        k.elements().filter(|&x| self.eval(k, x) == 0).collect()
    }

    /// Monic irreducible factorization with multiplicities, sorted.
    /// The leading coefficient is dropped.
    pub fn factor(&self, k: &Fq) -> Vec<(FqPoly, usize)> {
        let mut out = Vec::new();
        if self.degree() == 0 {
            return out;
        }
        for (sq, mult) in squarefree(k, &self.monic(k)) {
            for (g, d) in distinct_degree(k, &sq) {
                for h in equal_degree(k, &g, d) {
                    out.push((h, mult));
                }
            }
        }
        out.sort();
        out
    }

    pub fn is_irreducible(&self, k: &Fq) -> bool {
        let f = self.factor(k);
        f.len() == 1 && f[0].1 == 1
    }

    /// Multiplicity of an irreducible `pl` as a factor.
    pub fn ord_at(&self, k: &Fq, pl: &FqPoly) -> usize {
        if self.is_zero() {
            return usize::MAX;
        }
        let mut n = 0;
        let mut a = self.clone();
        loop {
            let (q, r) = a.divrem(k, pl);
            if !r.is_zero() {
                return n;
            }
            a = q;
            n += 1;
        }
    }
}

/// Square-free decomposition of a monic polynomial.
fn squarefree(k: &Fq, f: &FqPoly) -> Vec<(FqPoly, usize)> {
    let mut out = Vec::new();
    if f.degree() == 0 {
        return out;
    }
    let p = k.p() as usize;
    let df = f.derivative(k);
    if df.is_zero() {
        let r = f.pth_root(k).expect("zero derivative implies a p-th power");
        for (g, m) in squarefree(k, &r) {
            out.push((g, m * p));
        }
        return out;
    }
    let mut c = f.gcd(k, &df);
    let mut w = f.div_exact(k, &c);
    let mut i = 1;
    while w.degree() > 0 {
        let y = w.gcd(k, &c);
        let z = w.div_exact(k, &y);
        if z.degree() > 0 {
            out.push((z, i));
        }
        i += 1;
        w = y;
        c = c.div_exact(k, &w);
    }
    if c.degree() > 0 {
        let r = c.pth_root(k).expect("remaining cofactor is a p-th power");
        for (g, m) in squarefree(k, &r) {
            out.push((g, m * p));
        }
    }
    out
}

fn distinct_degree(k: &Fq, f: &FqPoly) -> Vec<(FqPoly, usize)> {
    let q = k.q() as u64;
    let mut out = Vec::new();
    let mut f = f.clone();
    let x = FqPoly::x();
    let mut h = x.clone();
    let mut d = 0;
    while f.degree() >= 2 * (d + 1) {
        d += 1;
        h = h.powmod(k, q, &f);
        let g = h.sub(k, &x).gcd(k, &f);
        if g.degree() > 0 {
            f = f.div_exact(k, &g);
            h = h.rem(k, &f);
            out.push((g, d));
        }
    }
    if f.degree() > 0 {
        let d = f.degree();
        out.push((f, d));
    }
    out
}

fn equal_degree(k: &Fq, f: &FqPoly, d: usize) -> Vec<FqPoly> {
    let n = f.degree();
    if n == d {
        return vec![f.clone()];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ (n as u64) << 8 ^ d as u64);
    let q = k.q() as u64;
    loop {
        let a = FqPoly::new((0..n).map(|_| rng.gen_range(0..k.q())).collect());
        if a.degree() == 0 {
            continue;
        }
        let b = if k.p() == 2 {
            // trace of a over F_2 from F_{q^d}
            let bits = (k.f() as usize) * d;
            let mut t = a.clone();
            let mut acc = a.clone();
            for _ in 1..bits {
                t = t.mul(k, &t).rem(k, f);
                acc = acc.add(k, &t);
            }
            acc
        } else {
            let e = (q.pow(d as u32) - 1) / 2;
            a.powmod(k, e, f).sub(k, &FqPoly::one())
        };
        let g = b.gcd(k, f);
        if g.degree() > 0 && g.degree() < n {
            let mut out = equal_degree(k, &g, d);
            out.extend(equal_degree(k, &f.div_exact(k, &g), d));
            return out;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expand(k: &Fq, fs: &[(FqPoly, usize)]) -> FqPoly {
        fs.iter().fold(FqPoly::one(), |acc, (g, m)| acc.mul(k, &g.pow(k, *m as u64)))
    }

    #[test]
    fn factor_round_trip() {
        for (p, f) in [(2, 1), (3, 1), (5, 1), (2, 2), (3, 2)] {
            let k = Fq::new(p, f).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            for _ in 0..40 {
                let deg = rng.gen_range(1..9);
                let mut c: Vec<u32> = (0..deg).map(|_| rng.gen_range(0..k.q())).collect();
                c.push(1);
                let g = FqPoly::new(c);
                let g = g.mul(&k, &g.pow(&k, p as u64 - 1).mul(&k, &FqPoly::new(vec![1, 1])));
                let fs = g.factor(&k);
                assert_eq!(expand(&k, &fs), g);
                for (h, _) in &fs {
                    assert_eq!(h.lead(), 1);
                    let dh = h.degree();
                    // irreducible: no roots in F_{q^j} for j < deg, checked via gcd with x^{q^j} - x
                    let mut xp = FqPoly::x();
                    for _ in 1..dh {
                        xp = xp.powmod(&k, k.q() as u64, h);
                        assert_eq!(xp.sub(&k, &FqPoly::x()).gcd(&k, h).degree(), 0);
                    }
                }
            }
        }
    }

    #[test]
    fn x3_minus_x_over_f3() {
        let k = Fq::new(3, 1).unwrap();
        let g = FqPoly::new(vec![0, 2, 0, 1]);
        assert_eq!(g.roots(&k), vec![0, 1, 2]);
        let irr = FqPoly::new(vec![1, 0, 1]);
        assert!(irr.is_irreducible(&k));
        assert!(irr.roots(&k).is_empty());
    }

    #[test]
    fn pth_power_detection() {
        let k = Fq::new(3, 1).unwrap();
        let g = FqPoly::new(vec![0, 0, 0, 1, 0, 0, 1]);
        assert_eq!(g.pth_root(&k).unwrap(), FqPoly::new(vec![0, 1, 1]));
        assert!(FqPoly::new(vec![0, 0, 1]).pth_root(&k).is_none());
    }
}
