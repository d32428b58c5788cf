//! Unramified integers Z_q / p^M as coefficient vectors modulo the lifted
//! residue-field modulus.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::fq::Fq;

pub type Zq = Vec<BigInt>;

#[derive(Debug, Clone)]
pub struct ZqCtx {
    pub f: usize,
    /// number of p-adic digits kept
    pub m: u32,
    pub pm: BigInt,
    pub pb: BigInt,
    /// monic lift of the residue modulus, low degree first, length f + 1
    pub modulus: Vec<BigInt>,
}

impl ZqCtx {
    pub fn new(k: &Fq, m: u32) -> Self {
        let pb = BigInt::from(k.p());
        ZqCtx {
            f: k.f() as usize,
            m,
            pm: num_traits::pow(pb.clone(), m as usize),
            pb,
            modulus: k.modulus().iter().map(|&c| BigInt::from(c)).collect(),
        }
    }

    pub fn zero(&self) -> Zq {
        vec![BigInt::zero(); self.f]
    }

    pub fn one(&self) -> Zq {
        let mut z = self.zero();
        z[0] = BigInt::one();
        z
    }

    pub fn from_int(&self, n: &BigInt) -> Zq {
        let mut z = self.zero();
        z[0] = n.mod_floor(&self.pm);
        z
    }

    pub fn reduce(&self, a: &mut Zq) {
        for c in a.iter_mut() {
            if c.is_negative() || *c >= self.pm {
                *c = c.mod_floor(&self.pm);
            }
        }
    }

    pub fn is_zero(&self, a: &Zq) -> bool {
        a.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, a: &Zq, b: &Zq) -> Zq {
        let mut out: Zq = a.iter().zip(b).map(|(x, y)| x + y).collect();
        self.reduce(&mut out);
        out
    }

    pub fn sub(&self, a: &Zq, b: &Zq) -> Zq {
        let mut out: Zq = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.reduce(&mut out);
        out
    }

    pub fn neg(&self, a: &Zq) -> Zq {
        let mut out: Zq = a.iter().map(|x| -x).collect();
        self.reduce(&mut out);
        out
    }

    pub fn mul(&self, a: &Zq, b: &Zq) -> Zq {
        let f = self.f;
        if f == 1 {
            return vec![(&a[0] * &b[0]).mod_floor(&self.pm)];
        }
        let mut prod = vec![BigInt::zero(); 2 * f - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if !y.is_zero() {
                    prod[i + j] += x * y;
                }
            }
        }
        for k in (f..2 * f - 1).rev() {
            let c = std::mem::take(&mut prod[k]);
            if c.is_zero() {
                continue;
            }
            for i in 0..f {
                if !self.modulus[i].is_zero() {
                    prod[k - f + i] -= &c * &self.modulus[i];
                }
            }
        }
        prod.truncate(f);
        self.reduce(&mut prod);
        prod
    }

    pub fn scale(&self, a: &Zq, s: &BigInt) -> Zq {
        let mut out: Zq = a.iter().map(|x| x * s).collect();
        self.reduce(&mut out);
        out
    }

    /// p-adic valuation of the representative (None for 0).
    pub fn vp(&self, a: &Zq) -> Option<u32> {
        a.iter().filter(|c| !c.is_zero()).map(|c| vp_int(c, &self.pb)).min()
    }

    /// Exact division of every coefficient by p^k (caller guarantees divisibility).
    pub fn div_pk(&self, a: &Zq, k: u32) -> Zq {
        if k == 0 {
            return a.clone();
        }
        let d = num_traits::pow(self.pb.clone(), k as usize);
        a.iter().map(|c| c / &d).collect()
    }

    /// Keep the class modulo p^k.
    pub fn truncate(&self, a: &Zq, k: u32) -> Zq {
        if k >= self.m {
            return a.clone();
        }
        let d = num_traits::pow(self.pb.clone(), k as usize);
        a.iter().map(|c| c.mod_floor(&d)).collect()
    }

    pub fn residue(&self, k: &Fq, a: &Zq) -> u32 {
        let digits: Vec<u32> = a
            .iter()
            .map(|c| c.mod_floor(&self.pb).try_into().unwrap_or(0u32))
            .collect();
        k.from_digits(&digits)
    }

    /// Canonical lift with coefficients in [0, p).
    pub fn lift(&self, k: &Fq, c: u32) -> Zq {
        k.digits(c).into_iter().map(BigInt::from).collect()
    }

    pub fn inv(&self, k: &Fq, a: &Zq) -> Option<Zq> {
        let r = self.residue(k, a);
        let r_inv = k.inv(r)?;
        let mut z = self.lift(k, r_inv);
        let two = self.from_int(&BigInt::from(2));
        let mut prec = 1u32;
        while prec < self.m {
            let az = self.mul(a, &z);
            z = self.mul(&z, &self.sub(&two, &az));
            prec *= 2;
        }
        Some(z)
    }
}

pub fn vp_int(c: &BigInt, p: &BigInt) -> u32 {
    if c.is_zero() {
        return u32::MAX;
    }
    let mut v = 0;
    let mut x = c.clone();
    loop {
        let (d, r) = x.div_rem(p);
        if !r.is_zero() {
            return v;
        }
        x = d;
        v += 1;
    }
}
