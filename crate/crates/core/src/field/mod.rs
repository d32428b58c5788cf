//! The working local field W = Q_q(π), π^e = p, v(p) = 1.
//!
//! Elements use capped relative precision: a nonzero element is
//! `π^val · Σ_{i<e} d_i π^i` with `d_0` a unit and the sum known modulo
//! `π^rel`, `rel ≤ e·N`. Zeros remember the absolute precision they were
//! computed to.

pub mod fq;
pub mod roots;
mod zq;

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rat::Q;
pub use fq::Fq;
pub use roots::{find_roots, Poly, RootSet};
use zq::{Zq, ZqCtx};

pub const DEFAULT_PRECISION: u32 = 48;
/// Guard band in units of v(p): values within this distance of the
/// precision limit are never reported.
pub const GUARD: i64 = 2;

const EXACT: i64 = i64::MAX / 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldConfig {
    pub p: u32,
    pub f: u32,
    pub e: u32,
    #[serde(rename = "precisionDigits", alias = "precision")]
    pub precision: u32,
}

impl FieldConfig {
    pub fn new(p: u32, f: u32, e: u32, precision: u32) -> Self {
        FieldConfig { p, f, e, precision }
    }

    pub fn qp(p: u32) -> Self {
        FieldConfig::new(p, 1, 1, DEFAULT_PRECISION)
    }
}

#[derive(Debug)]
pub struct Field {
    cfg: FieldConfig,
    fq: Fq,
    zq: ZqCtx,
}

pub type FieldRef = Arc<Field>;

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.cfg == other.cfg
    }
}

impl Field {
    pub fn new(cfg: FieldConfig) -> Result<FieldRef> {
        if cfg.e == 0 {
            return Err(Error::invalid("e must be at least 1"));
        }
        if cfg.precision == 0 {
            return Err(Error::invalid("precision must be at least 1"));
        }
        let fq = Fq::new(cfg.p, cfg.f)?;
        let zq = ZqCtx::new(&fq, cfg.precision + 2);
        Ok(Arc::new(Field { cfg, fq, zq }))
    }

    pub fn qp(p: u32) -> Result<FieldRef> {
        Field::new(FieldConfig::qp(p))
    }

    pub fn config(&self) -> FieldConfig {
        self.cfg
    }
    pub fn p(&self) -> u32 {
        self.cfg.p
    }
    pub fn e(&self) -> u32 {
        self.cfg.e
    }
    pub fn f(&self) -> u32 {
        self.cfg.f
    }
    pub fn precision(&self) -> u32 {
        self.cfg.precision
    }
    pub fn residue_field(&self) -> &Fq {
        &self.fq
    }

    fn cap(&self) -> i64 {
        self.cfg.e as i64 * self.cfg.precision as i64
    }

    fn guard(&self) -> i64 {
        GUARD * self.cfg.e as i64
    }

    /// Enlarge to e·e_mult, f·f_mult, with the embedding of `self` into it.
    pub fn extend(self: &Arc<Self>, e_mult: u32, f_mult: u32) -> Result<(FieldRef, Embedding)> {
        if e_mult == 0 || f_mult == 0 {
            return Err(Error::invalid("extension multipliers must be at least 1"));
        }
        let cfg = FieldConfig { e: self.cfg.e * e_mult, f: self.cfg.f * f_mult, ..self.cfg };
        let target = Field::new(cfg)?;
        let emb = Embedding::new(self.clone(), target.clone(), e_mult)?;
        Ok((target, emb))
    }
}

/// W → W' with π ↦ π'^k and the unramified generator sent to a lifted root
/// of its minimal polynomial.
#[derive(Debug, Clone)]
pub struct Embedding {
    source: FieldRef,
    target: FieldRef,
    ram: u32,
    gen: Zq,
}

impl Embedding {
    fn new(source: FieldRef, target: FieldRef, ram: u32) -> Result<Self> {
        let (ks, kt) = (&source.fq, &target.fq);
        let zt = &target.zq;
        let f_s = ks.f() as usize;
        let gen = if f_s == 1 {
            zt.lift(kt, kt.from_digits(&[0]))
        } else {
            let modulus = ks.modulus();
            let eval = |x: u32| -> u32 {
                modulus.iter().rev().fold(0u32, |acc, &c| kt.add(kt.mul(acc, x), kt.from_int(c as i64)))
            };
            let root = kt
                .elements()
                .find(|&x| eval(x) == 0)
                .ok_or_else(|| Error::inconsistency("residue modulus has no root in the extension"))?;
            // Newton lift of the root of the lifted modulus in Z_q'
            let coeffs: Vec<Zq> = modulus.iter().map(|&c| zt.from_int(&BigInt::from(c))).collect();
            let mut g = zt.lift(kt, root);
            let mut prec = 1;
            while prec < zt.m {
                let mut val = zt.zero();
                let mut der = zt.zero();
                for (i, c) in coeffs.iter().enumerate().rev() {
                    der = zt.add(&zt.mul(&der, &g), &val);
                    val = zt.add(&zt.mul(&val, &g), c);
                    let _ = i;
                }
                let inv = zt
                    .inv(kt, &der)
                    .ok_or_else(|| Error::inconsistency("residue modulus is not separable"))?;
                g = zt.sub(&g, &zt.mul(&val, &inv));
                prec *= 2;
            }
            g
        };
        Ok(Embedding { source, target, ram, gen })
    }

    pub fn source(&self) -> &FieldRef {
        &self.source
    }
    pub fn target(&self) -> &FieldRef {
        &self.target
    }

    fn map_zq(&self, a: &Zq) -> Zq {
        let zt = &self.target.zq;
        if a.len() == 1 {
            let mut out = zt.zero();
            out[0] = a[0].clone();
            return out;
        }
        let mut acc = zt.zero();
        for c in a.iter().rev() {
            acc = zt.add(&zt.mul(&acc, &self.gen), &zt.from_int(c));
        }
        acc
    }

    pub fn apply(&self, x: &Elem) -> Elem {
        debug_assert!(*x.k == *self.source);
        let k = self.ram as i64;
        match &x.repr {
            Repr::Zero { abs } => Elem {
                k: self.target.clone(),
                repr: Repr::Zero { abs: if *abs >= EXACT { EXACT } else { abs * k } },
            },
            Repr::Unit { val, rel, digits } => {
                let e_t = self.target.cfg.e as usize;
                let mut out = vec![self.target.zq.zero(); e_t];
                for (i, d) in digits.iter().enumerate() {
                    out[i * self.ram as usize] = self.map_zq(d);
                }
                Elem::from_raw(&self.target, val * k, out, (val + rel) * k)
            }
        }
    }

    /// Compose `self` (A → B) with `next` (B → C).
    pub fn then(&self, next: &Embedding) -> Embedding {
        debug_assert!(*self.target == *next.source);
        let gen = if self.gen.len() == 1 && self.source.fq.f() == 1 {
            next.target.zq.zero()
        } else {
            next.map_zq(&self.gen)
        };
        Embedding { source: self.source.clone(), target: next.target.clone(), ram: self.ram * next.ram, gen }
    }

    pub fn identity(k: &FieldRef) -> Embedding {
        let gen = if k.fq.f() == 1 {
            k.zq.zero()
        } else {
            let mut g = k.zq.zero();
            g[1] = BigInt::one();
            g
        };
        Embedding { source: k.clone(), target: k.clone(), ram: 1, gen }
    }
}

#[derive(Clone, Debug)]
enum Repr {
    Zero { abs: i64 },
    Unit { val: i64, rel: i64, digits: Vec<Zq> },
}

#[derive(Clone)]
pub struct Elem {
    k: FieldRef,
    repr: Repr,
}

impl Elem {
    pub fn field(&self) -> &FieldRef {
        &self.k
    }

    pub fn zero(k: &FieldRef) -> Elem {
        Elem { k: k.clone(), repr: Repr::Zero { abs: EXACT } }
    }

    /// Zero known only modulo π^abs.
    pub fn zero_to(k: &FieldRef, abs: i64) -> Elem {
        Elem { k: k.clone(), repr: Repr::Zero { abs } }
    }

    pub fn one(k: &FieldRef) -> Elem {
        Elem::from_i64(k, 1)
    }

    pub fn from_i64(k: &FieldRef, n: i64) -> Elem {
        Elem::from_bigint(k, &BigInt::from(n))
    }

    pub fn from_bigint(k: &FieldRef, n: &BigInt) -> Elem {
        if n.is_zero() {
            return Elem::zero(k);
        }
        let mut digits = vec![k.zq.zero(); k.cfg.e as usize];
        digits[0] = k.zq.from_int(n);
        let v = zq::vp_int(n, &k.zq.pb) as i64;
        // the representative mod p^M already carries the p-power
        Elem::from_raw(k, 0, digits, EXACT).with_floor_val(v * k.cfg.e as i64)
    }

    pub fn from_q(k: &FieldRef, x: &Q) -> Result<Elem> {
        let n = Elem::from_i64(k, *x.numer());
        let d = Elem::from_i64(k, *x.denom());
        n.div(&d)
    }

    /// π^j · Σ digits[i] π^i with integer digits.
    pub fn from_pi_digits(k: &FieldRef, j: i64, digits: &[BigInt]) -> Result<Elem> {
        let coords: Vec<Vec<BigInt>> = digits.iter().map(|c| vec![c.clone()]).collect();
        Elem::from_pi_coords(k, j, &coords)
    }

    /// π^j · Σ digits[i] π^i with each digit given by its coordinates in
    /// the power basis of Z_q.
    pub fn from_pi_coords(k: &FieldRef, j: i64, digits: &[Vec<BigInt>]) -> Result<Elem> {
        let e = k.cfg.e as usize;
        let f = k.cfg.f as usize;
        if digits.len() > e {
            return Err(Error::invalid(format!("{} digits given but e = {e}", digits.len())));
        }
        let mut d = vec![k.zq.zero(); e];
        for (i, c) in digits.iter().enumerate() {
            if c.len() > f {
                return Err(Error::invalid(format!("digit with {} coordinates but f = {f}", c.len())));
            }
            if c.iter().any(|x| x.abs() >= k.zq.pm) {
                return Err(Error::invalid("digit exceeds working precision"));
            }
            let mut z = k.zq.zero();
            z[..c.len()].clone_from_slice(c);
            k.zq.reduce(&mut z);
            d[i] = z;
        }
        Ok(Elem::from_raw(k, j, d, EXACT))
    }

    pub fn pi(k: &FieldRef) -> Elem {
        Elem::pi_pow(k, 1)
    }

    pub fn pi_pow(k: &FieldRef, j: i64) -> Elem {
        let mut d = vec![k.zq.zero(); k.cfg.e as usize];
        d[0] = k.zq.one();
        Elem::from_raw(k, j, d, EXACT)
    }

    /// Canonical lift of a residue with unramified coefficients in [0, p).
    pub fn lift(k: &FieldRef, c: u32) -> Elem {
        if c == 0 {
            return Elem::zero(k);
        }
        let mut d = vec![k.zq.zero(); k.cfg.e as usize];
        d[0] = k.zq.lift(&k.fq, c);
        Elem::from_raw(k, 0, d, EXACT)
    }

    // the integer constructor lets from_raw discover the p-power itself;
    // this is only a debug cross-check
    fn with_floor_val(self, v: i64) -> Elem {
        debug_assert!(matches!(self.repr, Repr::Unit { val, .. } if val == v));
        self
    }

    fn from_raw(k: &FieldRef, v0: i64, d: Vec<Zq>, abs: i64) -> Elem {
        let e = k.cfg.e as i64;
        let zq = &k.zq;
        let mut kmin: Option<i64> = None;
        for (i, c) in d.iter().enumerate() {
            if let Some(v) = zq.vp(c) {
                let t = e * v as i64 + i as i64;
                kmin = Some(kmin.map_or(t, |m: i64| m.min(t)));
            }
        }
        let kk = match kmin {
            None => return Elem { k: k.clone(), repr: Repr::Zero { abs } },
            Some(kk) => kk,
        };
        let val = v0 + kk;
        if abs < EXACT && val >= abs {
            return Elem { k: k.clone(), repr: Repr::Zero { abs } };
        }
        let (a, b) = (kk.div_euclid(e), kk.rem_euclid(e));
        let eu = e as usize;
        let bu = b as usize;
        let mut nd = vec![zq.zero(); eu];
        for (i, c) in d.iter().enumerate() {
            if zq.is_zero(c) {
                continue;
            }
            if i >= bu {
                nd[i - bu] = zq.div_pk(c, a as u32);
            } else {
                nd[i + eu - bu] = zq.div_pk(c, a as u32 + 1);
            }
        }
        let rel = if abs >= EXACT { k.cap() } else { (abs - val).min(k.cap()) };
        for (j, c) in nd.iter_mut().enumerate() {
            let t = (rel - j as i64 + e - 1).div_euclid(e).max(0);
            *c = zq.truncate(c, t as u32);
        }
        Elem { k: k.clone(), repr: Repr::Unit { val, rel, digits: nd } }
    }

    /// Absolute precision in π-units (the element is known mod π^abs).
    pub fn abs_precision(&self) -> i64 {
        match &self.repr {
            Repr::Zero { abs } => *abs,
            Repr::Unit { val, rel, .. } => val + rel,
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero { abs } if abs >= EXACT)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero { .. })
    }

    /// Zero, or too little relative precision to report a valuation.
    pub fn is_negligible(&self) -> bool {
        match &self.repr {
            Repr::Zero { .. } => true,
            Repr::Unit { rel, .. } => *rel < self.k.guard(),
        }
    }

    /// π-adic valuation of a nonzero element, ignoring the guard band.
    pub fn val_pi(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero { .. } => None,
            Repr::Unit { val, .. } => Some(*val),
        }
    }

    /// Lower bound on the valuation that is always safe, in π-units.
    pub fn val_lower_pi(&self) -> i64 {
        match &self.repr {
            Repr::Zero { abs } => *abs,
            Repr::Unit { val, .. } => *val,
        }
    }

    pub fn rel_precision(&self) -> i64 {
        match &self.repr {
            Repr::Zero { .. } => 0,
            Repr::Unit { rel, .. } => *rel,
        }
    }

    /// Exact valuation with v(p) = 1, `None` for an exact zero.
    pub fn valuation(&self) -> Result<Option<Q>> {
        match &self.repr {
            Repr::Zero { abs } if *abs >= EXACT => Ok(None),
            Repr::Zero { abs } => Err(Error::PrecisionLoss(format!(
                "zero to precision {}",
                Q::new(*abs, self.k.cfg.e as i64)
            ))),
            Repr::Unit { val, rel, .. } => {
                if *rel < self.k.guard() {
                    Err(Error::PrecisionLoss(format!(
                        "valuation {} within guard band",
                        Q::new(*val, self.k.cfg.e as i64)
                    )))
                } else {
                    Ok(Some(Q::new(*val, self.k.cfg.e as i64)))
                }
            }
        }
    }

    /// Valuation of an element that must be nonzero.
    pub fn v(&self) -> Result<Q> {
        self.valuation()?
            .ok_or_else(|| Error::PrecisionLoss("valuation of exact zero requested".into()))
    }

    pub fn residue(&self) -> Result<u32> {
        match &self.repr {
            Repr::Unit { val: 0, digits, .. } => Ok(self.k.zq.residue(&self.k.fq, &digits[0])),
            _ => Err(Error::NonUnit),
        }
    }

    /// Residue of x·π^{-v(x)}.
    pub fn leading_residue(&self) -> Result<u32> {
        match &self.repr {
            Repr::Unit { digits, .. } => Ok(self.k.zq.residue(&self.k.fq, &digits[0])),
            Repr::Zero { .. } => Err(Error::NonUnit),
        }
    }

    pub fn neg(&self) -> Elem {
        match &self.repr {
            Repr::Zero { .. } => self.clone(),
            Repr::Unit { val, rel, digits } => {
                let nd: Vec<Zq> = digits.iter().map(|d| self.k.zq.neg(d)).collect();
                Elem::from_raw(&self.k, *val, nd, val + rel)
            }
        }
    }

    fn shifted_digits(&self, digits: &[Zq], s: i64) -> Vec<Zq> {
        let e = self.k.cfg.e as i64;
        let zq = &self.k.zq;
        let (q, t) = (s.div_euclid(e), s.rem_euclid(e));
        let mut out = vec![zq.zero(); e as usize];
        let pq = num_traits::pow(zq.pb.clone(), q as usize);
        let pq1 = &pq * &zq.pb;
        for (i, d) in digits.iter().enumerate() {
            if zq.is_zero(d) {
                continue;
            }
            let j = i as i64 + t;
            if j < e {
                out[j as usize] = zq.scale(d, &pq);
            } else {
                out[(j - e) as usize] = zq.scale(d, &pq1);
            }
        }
        out
    }

    pub fn add(&self, other: &Elem) -> Elem {
        debug_assert!(*self.k == *other.k, "mixing elements of different fields");
        match (&self.repr, &other.repr) {
            (Repr::Zero { abs: a }, Repr::Zero { abs: b }) => Elem::zero_to(&self.k, (*a).min(*b)),
            (Repr::Zero { abs }, Repr::Unit { .. }) => other.with_abs_cap(*abs),
            (Repr::Unit { .. }, Repr::Zero { abs }) => self.with_abs_cap(*abs),
            (
                Repr::Unit { val: va, rel: ra, digits: da },
                Repr::Unit { val: vb, rel: rb, digits: db },
            ) => {
                let abs = (va + ra).min(vb + rb);
                let v0 = (*va).min(*vb);
                let sa = if va > vb { self.shifted_digits(da, va - v0) } else { da.clone() };
                let sb = if vb > va { self.shifted_digits(db, vb - v0) } else { db.clone() };
                let zq = &self.k.zq;
                let sum: Vec<Zq> = sa.iter().zip(&sb).map(|(x, y)| zq.add(x, y)).collect();
                Elem::from_raw(&self.k, v0, sum, abs)
            }
        }
    }

    fn with_abs_cap(&self, abs: i64) -> Elem {
        match &self.repr {
            Repr::Zero { abs: a } => Elem::zero_to(&self.k, (*a).min(abs)),
            Repr::Unit { val, rel, digits } => {
                if val + rel <= abs {
                    self.clone()
                } else {
                    Elem::from_raw(&self.k, *val, digits.clone(), abs)
                }
            }
        }
    }

    pub fn sub(&self, other: &Elem) -> Elem {
        self.add(&other.neg())
    }

    fn raw_mul(&self, a: &[Zq], b: &[Zq]) -> Vec<Zq> {
        let e = self.k.cfg.e as usize;
        let zq = &self.k.zq;
        let mut out = vec![zq.zero(); e];
        for (i, x) in a.iter().enumerate() {
            if zq.is_zero(x) {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if zq.is_zero(y) {
                    continue;
                }
                let prod = zq.mul(x, y);
                if i + j < e {
                    out[i + j] = zq.add(&out[i + j], &prod);
                } else {
                    let t = zq.scale(&prod, &zq.pb);
                    out[i + j - e] = zq.add(&out[i + j - e], &t);
                }
            }
        }
        out
    }

    pub fn mul(&self, other: &Elem) -> Elem {
        debug_assert!(*self.k == *other.k, "mixing elements of different fields");
        match (&self.repr, &other.repr) {
            (Repr::Zero { abs: a }, Repr::Zero { abs: b }) => {
                Elem::zero_to(&self.k, if *a >= EXACT || *b >= EXACT { EXACT } else { a + b })
            }
            (Repr::Zero { abs }, Repr::Unit { val, .. }) | (Repr::Unit { val, .. }, Repr::Zero { abs }) => {
                Elem::zero_to(&self.k, if *abs >= EXACT { EXACT } else { abs + val })
            }
            (
                Repr::Unit { val: va, rel: ra, digits: da },
                Repr::Unit { val: vb, rel: rb, digits: db },
            ) => {
                let prod = self.raw_mul(da, db);
                let v = va + vb;
                Elem::from_raw(&self.k, v, prod, v + (*ra).min(*rb))
            }
        }
    }

    pub fn inv(&self) -> Result<Elem> {
        match &self.repr {
            Repr::Zero { .. } => Err(Error::PrecisionLoss("division by zero to precision".into())),
            Repr::Unit { val, rel, digits } => {
                let k = &self.k;
                let zq = &k.zq;
                let e = k.cfg.e as usize;
                let mut y = vec![zq.zero(); e];
                y[0] = zq.inv(&k.fq, &digits[0]).ok_or(Error::NonUnit)?;
                let mut two = vec![zq.zero(); e];
                two[0] = zq.from_int(&BigInt::from(2));
                let mut prec = 1i64;
                while prec < k.cap() + e as i64 {
                    let uy = self.raw_mul(digits, &y);
                    let t: Vec<Zq> = two.iter().zip(&uy).map(|(a, b)| zq.sub(a, b)).collect();
                    y = self.raw_mul(&y, &t);
                    prec *= 2;
                }
                Ok(Elem::from_raw(k, -val, y, -val + rel))
            }
        }
    }

    pub fn div(&self, other: &Elem) -> Result<Elem> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, n: u32) -> Elem {
        let mut acc = Elem::one(&self.k);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn scale_i64(&self, n: i64) -> Elem {
        self.mul(&Elem::from_i64(&self.k, n))
    }

    /// The π-adic digit form `(piShift, digits)` with each digit an integer
    /// (only meaningful for f = 1; otherwise the first unramified coefficient).
    pub fn pi_digits(&self) -> Option<(i64, Vec<Vec<BigInt>>)> {
        match &self.repr {
            Repr::Zero { .. } => None,
            Repr::Unit { val, digits, .. } => Some((*val, digits.clone())),
        }
    }

    /// Deterministic total order: zeros first, then by valuation, then by digits.
    pub fn lex_cmp(&self, other: &Elem) -> Ordering {
        match (&self.repr, &other.repr) {
            (Repr::Zero { .. }, Repr::Zero { .. }) => Ordering::Equal,
            (Repr::Zero { .. }, _) => Ordering::Less,
            (_, Repr::Zero { .. }) => Ordering::Greater,
            (Repr::Unit { val: va, digits: da, .. }, Repr::Unit { val: vb, digits: db, .. }) => {
                va.cmp(vb).then_with(|| da.cmp(db))
            }
        }
    }

    /// Equality to the smaller of the two precisions.
    pub fn eq_to_precision(&self, other: &Elem) -> bool {
        self.sub(other).is_zero()
    }

    /// Whether x − y vanishes to the guard band.
    pub fn close_to(&self, other: &Elem) -> bool {
        self.sub(other).is_negligible()
    }
}

impl PartialEq for Elem {
    fn eq(&self, other: &Self) -> bool {
        *self.k == *other.k && self.eq_to_precision(other)
    }
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Zero { abs } if *abs >= EXACT => write!(f, "0"),
            Repr::Zero { abs } => write!(f, "O(pi^{abs})"),
            Repr::Unit { val, rel, digits } => {
                if self.k.cfg.e == 1 && self.k.cfg.f == 1 {
                    // print a balanced integer representative when it is small
                    let pm = num_traits::pow(self.k.zq.pb.clone(), ((rel + 0) as usize).min(self.k.zq.m as usize));
                    let mut d = digits[0][0].mod_floor(&pm);
                    if d > &pm / 2 {
                        d -= &pm;
                    }
                    if d.abs() < BigInt::from(1_000_000) {
                        return write!(f, "{}·{}^{}", d, self.k.cfg.p, val);
                    }
                }
                write!(f, "pi^{val}·{:?}", digits.iter().map(|d| d.iter().map(|c| c.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{q, qi};

    fn field(p: u32, e: u32) -> FieldRef {
        Field::new(FieldConfig::new(p, 1, e, DEFAULT_PRECISION)).unwrap()
    }

    #[test]
    fn spec_valuations() {
        let k = field(3, 2);
        assert_eq!(Elem::from_i64(&k, 3).v().unwrap(), qi(1));
        assert_eq!(Elem::pi(&k).v().unwrap(), q(1, 2));
        let k3 = field(3, 1);
        assert_eq!(Elem::from_i64(&k3, 72).v().unwrap(), qi(2));
    }

    #[test]
    fn spec_residues() {
        let k = field(3, 1);
        assert_eq!(Elem::from_i64(&k, 8).residue().unwrap(), 2);
        assert_eq!(Elem::from_i64(&k, 4).residue().unwrap(), 1);
        let k2 = field(3, 2);
        let pi = Elem::pi(&k2);
        assert_eq!(pi.div(&pi).unwrap().residue().unwrap(), 1);
        assert_eq!(pi.residue(), Err(Error::NonUnit));
    }

    #[test]
    fn ramified_arithmetic() {
        let k = field(3, 2);
        let pi = Elem::pi(&k);
        assert!(pi.mul(&pi).eq_to_precision(&Elem::from_i64(&k, 3)));
        let x = Elem::from_i64(&k, 5).add(&pi);
        let y = x.inv().unwrap();
        assert!(x.mul(&y).eq_to_precision(&Elem::one(&k)));
        assert_eq!(Elem::from_i64(&k, 9).add(&pi.pow(3)).v().unwrap(), q(3, 2));
    }

    #[test]
    fn cancellation_tracks_precision() {
        let k = field(2, 1);
        let a = Elem::from_i64(&k, 5);
        let z = a.sub(&a);
        assert!(z.is_zero());
        assert!(!z.is_exact_zero());
        assert!(matches!(z.valuation(), Err(Error::PrecisionLoss(_))));
        assert_eq!(Elem::zero(&k).valuation().unwrap(), None);
    }

    #[test]
    fn rationals() {
        let k = field(3, 1);
        let x = Elem::from_q(&k, &q(1, 2)).unwrap();
        assert!(x.scale_i64(2).eq_to_precision(&Elem::one(&k)));
        assert_eq!(Elem::from_q(&k, &q(2, 9)).unwrap().v().unwrap(), qi(-2));
    }

    #[test]
    fn spec_extend_field() {
        let k = field(3, 1);
        let (k2, emb) = k.extend(2, 1).unwrap();
        assert_eq!(k2.e(), 2);
        assert_eq!(emb.apply(&Elem::from_i64(&k, 3)).v().unwrap(), qi(1));
        let (same, _) = k.extend(1, 1).unwrap();
        assert_eq!(same.config(), k.config());
        let k2p = field(2, 1);
        let (k4, _) = k2p.extend(2, 1).unwrap();
        assert_eq!(Elem::pi(&k4).v().unwrap(), q(1, 2));
    }

    #[test]
    fn unramified_embedding_is_a_ring_map() {
        let k = Field::new(FieldConfig::new(2, 2, 1, 20)).unwrap();
        let (k4, emb) = k.extend(1, 2).unwrap();
        assert_eq!(k4.f(), 4);
        let zq = &k.zq;
        let mut g = zq.zero();
        g[1] = BigInt::one();
        let mut digits = vec![g];
        let x = Elem::from_raw(&k, 0, std::mem::take(&mut digits), EXACT);
        let y = x.mul(&x).add(&x).add(&Elem::one(&k));
        assert!(y.is_zero() || y.v().unwrap() >= qi(1));
        let (ex, ey) = (emb.apply(&x), emb.apply(&y));
        assert!(ex.mul(&ex).add(&ex).add(&Elem::one(&k4)).eq_to_precision(&ey));
        // residues are preserved through the embedding
        let r = k4.residue_field();
        let rx = ex.residue().unwrap();
        assert_eq!(r.add(r.add(r.mul(rx, rx), rx), 1), 0);
    }

    #[test]
    fn valuation_is_multiplicative() {
        let k = field(5, 3);
        let mut seeds = 1u64;
        for _ in 0..50 {
            seeds = seeds.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = Elem::from_i64(&k, (seeds >> 40) as i64 % 1000 + 1).mul(&Elem::pi_pow(&k, (seeds % 5) as i64));
            let b = Elem::from_i64(&k, (seeds >> 20) as i64 % 777 - 388).add(&Elem::pi(&k));
            let (va, vb) = (a.v().unwrap(), b.v().unwrap());
            assert_eq!(a.mul(&b).v().unwrap(), va + vb);
            let s = a.add(&b).v().unwrap();
            assert!(s >= va.min(vb));
            if va != vb {
                assert_eq!(s, va.min(vb));
            }
        }
    }
}
