//! The residue field F_q, q = p^f.
//!
//! Elements are `u32` codes `c_0 + c_1 p + ... + c_{f-1} p^{f-1}` for the
//! class of `c_0 + c_1 x + ...` modulo the first monic irreducible of degree
//! f (ordered by that same code of its lower coefficients). Multiplication
//! goes through log/exp tables.

use crate::error::{Error, Result};

pub const MAX_Q: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fq {
    p: u32,
    f: u32,
    q: u32,
    /// monic, low degree first, length f + 1
    modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl Fq {
    pub fn new(p: u32, f: u32) -> Result<Self> {
        if p < 2 || !is_prime(p as u64) {
            return Err(Error::invalid(format!("p = {p} is not prime")));
        }
        if f == 0 {
            return Err(Error::invalid("f must be at least 1"));
        }
        let q = (p as u64).checked_pow(f).filter(|q| *q <= MAX_Q).ok_or(
            Error::ExtensionCapExceeded { e: 1, f, cap: MAX_Q as u32 },
        )? as u32;
        let modulus = first_irreducible(p, f);
        let mut k = Fq { p, f, q, modulus, exp: vec![], log: vec![] };
        k.build_tables();
        Ok(k)
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn f(&self) -> u32 {
        self.f
    }
    pub fn q(&self) -> u32 {
        self.q
    }
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn digits(&self, a: u32) -> Vec<u32> {
        let mut v = Vec::with_capacity(self.f as usize);
        let mut a = a;
        for _ in 0..self.f {
            v.push(a % self.p);
            a /= self.p;
        }
        v
    }

    pub fn from_digits(&self, d: &[u32]) -> u32 {
        d.iter().rev().fold(0u32, |acc, &c| acc * self.p + c % self.p)
    }

    pub fn from_int(&self, n: i64) -> u32 {
        n.rem_euclid(self.p as i64) as u32
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.p == 2 {
            return a ^ b;
        }
        if self.f == 1 {
            return (a + b) % self.p;
        }
        let (mut a, mut b, mut out, mut place) = (a, b, 0u32, 1u32);
        for _ in 0..self.f {
            out += ((a % self.p + b % self.p) % self.p) * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        out
    }

    pub fn neg(&self, a: u32) -> u32 {
        if self.p == 2 {
            return a;
        }
        if self.f == 1 {
            return (self.p - a) % self.p;
        }
        let (mut a, mut out, mut place) = (a, 0u32, 1u32);
        for _ in 0..self.f {
            out += ((self.p - a % self.p) % self.p) * place;
            a /= self.p;
            place *= self.p;
        }
        out
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let n = self.q - 1;
        self.exp[((self.log[a as usize] + self.log[b as usize]) % n) as usize]
    }

    pub fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        let n = self.q - 1;
        Some(self.exp[((n - self.log[a as usize]) % n) as usize])
    }

    pub fn div(&self, a: u32, b: u32) -> Option<u32> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    pub fn pow(&self, a: u32, k: u64) -> u32 {
        if k == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let n = (self.q - 1) as u64;
        self.exp[((self.log[a as usize] as u64 * (k % n)) % n) as usize]
    }

    /// Unique p-th root (Frobenius is a bijection on F_q).
    pub fn pth_root(&self, a: u32) -> u32 {
        self.pow(a, (self.q / self.p) as u64)
    }

    pub fn generator(&self) -> u32 {
        self.exp[1 % self.exp.len()]
    }

    pub fn elements(&self) -> impl Iterator<Item = u32> {
        0..self.q
    }

    /// Multiply two elements as polynomials mod the modulus, without tables.
    fn mul_slow(&self, a: u32, b: u32) -> u32 {
        let p = self.p as u64;
        let f = self.f as usize;
        let da = self.digits(a);
        let db = self.digits(b);
        let mut prod = vec![0u64; 2 * f];
        for i in 0..f {
            for j in 0..f {
                prod[i + j] = (prod[i + j] + da[i] as u64 * db[j] as u64) % p;
            }
        }
        for k in (f..2 * f).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for i in 0..f {
                let m = self.modulus[i] as u64;
                prod[k - f + i] = (prod[k - f + i] + p * p - c * m % p) % p;
            }
        }
        let out: Vec<u32> = prod[..f].iter().map(|&c| c as u32).collect();
        self.from_digits(&out)
    }

    fn build_tables(&mut self) {
        let q = self.q;
        let n = q - 1;
        for g in 1..q {
            let mut exp = vec![0u32; n as usize + 1];
            let mut log = vec![0u32; q as usize];
            let mut x = 1u32;
            let mut primitive = true;
            for k in 0..n {
                if k > 0 && x == 1 {
                    primitive = false;
                    break;
                }
                exp[k as usize] = x;
                log[x as usize] = k;
                x = self.mul_slow(x, g);
            }
            if primitive && x == 1 {
                exp[n as usize] = 1;
                self.exp = exp;
                self.log = log;
                return;
            }
        }
        unreachable!("F_q has a primitive element");
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// ---- small F_p[x] helpers used only for the modulus search ----

fn trim(a: &mut Vec<u64>) {
    while a.len() > 1 && *a.last().unwrap() == 0 {
        a.pop();
    }
}

fn poly_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = pow_mod(m[dm], p - 2, p);
    while r.len() > dm && !(r.len() == 1 && r[0] == 0) {
        let k = r.len() - 1;
        let c = r[k] * lead_inv % p;
        for i in 0..=dm {
            let idx = k - dm + i;
            r[idx] = (r[idx] + p * p - c * m[i] % p) % p;
        }
        trim(&mut r);
        if r.len() - 1 < dm {
            break;
        }
    }
    r
}

fn poly_mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut prod = vec![0u64; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    poly_rem(&prod, m, p)
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(&mut a);
    trim(&mut b);
    while !(b.len() == 1 && b[0] == 0) {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

fn is_irreducible(m: &[u64], p: u64) -> bool {
    let f = m.len() - 1;
    if f == 1 {
        return true;
    }
    // x^{p^i} mod m for i = 1..f/2, gcd with x^{p^i} - x must be 1
    let mut xp = vec![0u64, 1];
    for _ in 0..f / 2 {
        let mut acc = vec![1u64];
        let mut base = xp.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = poly_mulmod(&acc, &base, m, p);
            }
            base = poly_mulmod(&base, &base, m, p);
            e >>= 1;
        }
        xp = acc;
        let mut d = xp.clone();
        d.resize(d.len().max(2), 0);
        d[1] = (d[1] + p - 1) % p;
        let g = poly_gcd(m, &d, p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

fn first_irreducible(p: u32, f: u32) -> Vec<u32> {
    if f == 1 {
        return vec![0, 1];
    }
    let p64 = p as u64;
    let count = p64.pow(f);
    for code in 0..count {
        let mut m = Vec::with_capacity(f as usize + 1);
        let mut c = code;
        for _ in 0..f {
            m.push(c % p64);
            c /= p64;
        }
        m.push(1);
        if m[0] == 0 {
            continue;
        }
        if is_irreducible(&m, p64) {
            return m.into_iter().map(|c| c as u32).collect();
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_ops() {
        let k = Fq::new(3, 1).unwrap();
        assert_eq!(k.add(2, 2), 1);
        assert_eq!(k.mul(2, 2), 1);
        assert_eq!(k.inv(2), Some(2));
        assert_eq!(k.from_int(8), 2);
        assert_eq!(k.pth_root(2), 2);
    }

    #[test]
    fn f4_and_f9() {
        let k = Fq::new(2, 2).unwrap();
        assert_eq!(k.modulus(), &[1, 1, 1]);
        for a in 1..4 {
            assert_eq!(k.mul(a, k.inv(a).unwrap()), 1);
            assert_eq!(k.pow(k.pth_root(a), 2), a);
        }
        let k9 = Fq::new(3, 2).unwrap();
        assert_eq!(k9.modulus(), &[1, 0, 1]);
        // x^2 = -1
        assert_eq!(k9.mul(3, 3), k9.neg(1));
    }

    #[test]
    fn field_axioms_f25() {
        let k = Fq::new(5, 2).unwrap();
        for a in 0..25 {
            for b in 0..25 {
                assert_eq!(k.add(a, b), k.add(b, a));
                assert_eq!(k.mul(a, b), k.mul_slow(a, b));
                for c in [0u32, 1, 7, 24] {
                    assert_eq!(k.mul(a, k.add(b, c)), k.add(k.mul(a, b), k.mul(a, c)));
                }
            }
        }
    }

    #[test]
    fn rejects_composite() {
        assert!(Fq::new(4, 1).is_err());
        assert!(Fq::new(2, 20).is_err());
    }
}
