//! The residue field `k = F_q`, `q = p^m`.
//!
//! Elements are encoded as integers `0..q` whose base-`p` digits are the
//! coordinates in the power basis `1, x, .., x^(m-1)` of `F_p[x]/(f)`, where
//! `f` is the first primitive monic polynomial of degree `m` in digit order.
//! For `m = 1` the code of an element is simply its value mod `p`.

use crate::error::{Error, Result};

/// An element of `F_q` in the digit encoding described above.
pub type Fq = u32;

const MAX_Q: u64 = 1 << 16;

#[derive(Clone, Debug)]
pub struct ResidueField {
    p: u32,
    m: u32,
    q: u32,
    /// Low coefficients `c_0..c_{m-1}` of the monic modulus.
    modulus: Vec<u32>,
    exp: Vec<Fq>,
    log: Vec<u32>,
    nonresidue: Fq,
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q` as `p^m` with `p` prime, if possible.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2u64;
    while p * p <= q && q % p != 0 {
        p += 1;
    }
    if q % p != 0 {
        p = q;
    }
    let mut rest = q;
    let mut m = 0;
    while rest % p == 0 {
        rest /= p;
        m += 1;
    }
    (rest == 1 && p <= u32::MAX as u64).then_some((p as u32, m))
}

impl ResidueField {
    pub fn new(p: u32, m: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("p = {p} is not prime")));
        }
        if p < 3 {
            return Err(Error::InvalidField("characteristic must be odd".into()));
        }
        if m == 0 {
            return Err(Error::InvalidField("degree m must be positive".into()));
        }
        let q = (p as u64).checked_pow(m).filter(|&q| q <= MAX_Q).ok_or_else(|| {
            Error::InvalidField(format!("q = {p}^{m} exceeds the supported size {MAX_Q}"))
        })? as u32;

        for code in 0..q {
            let modulus = digits_of(code, p, m);
            if let Some(exp) = primitive_powers(&modulus, p, q) {
                let mut log = vec![0u32; q as usize];
                for (i, &e) in exp.iter().enumerate() {
                    log[e as usize] = i as u32;
                }
                let nonresidue = (1..q).find(|&a| log[a as usize] % 2 == 1).expect("q odd");
                return Ok(Self {
                    p,
                    m,
                    q,
                    modulus,
                    exp,
                    log,
                    nonresidue,
                });
            }
        }
        unreachable!("a primitive polynomial of every degree exists")
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Low coefficients of the monic modulus defining the tower.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// The least nonsquare in code order `1, 2, .., q - 1`.
    pub fn nonresidue(&self) -> Fq {
        self.nonresidue
    }

    #[inline]
    pub fn zero(&self) -> Fq {
        0
    }

    #[inline]
    pub fn one(&self) -> Fq {
        1
    }

    /// Image of an integer in the prime field.
    pub fn from_int(&self, n: i64) -> Fq {
        n.rem_euclid(self.p as i64) as Fq
    }

    pub fn digits(&self, a: Fq) -> Vec<u32> {
        digits_of(a, self.p, self.m)
    }

    pub fn from_digits(&self, digits: &[u32]) -> Result<Fq> {
        if digits.len() > self.m as usize || digits.iter().any(|&d| d >= self.p) {
            return Err(Error::Schema(format!(
                "digit vector {digits:?} is not an element of F_{}",
                self.q
            )));
        }
        Ok(digits.iter().rev().fold(0, |acc, &d| acc * self.p + d))
    }

    pub fn contains(&self, a: Fq) -> bool {
        a < self.q
    }

    #[inline]
    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        if self.m == 1 {
            let s = a + b;
            return if s >= self.p { s - self.p } else { s };
        }
        let (mut a, mut b) = (a, b);
        let (mut out, mut place) = (0, 1);
        while a > 0 || b > 0 {
            let d = (a % self.p + b % self.p) % self.p;
            out += d * place;
            place *= self.p;
            a /= self.p;
            b /= self.p;
        }
        out
    }

    #[inline]
    pub fn neg(&self, a: Fq) -> Fq {
        if self.m == 1 {
            return if a == 0 { 0 } else { self.p - a };
        }
        let (mut a, mut out, mut place) = (a, 0, 1);
        while a > 0 {
            let d = a % self.p;
            out += ((self.p - d) % self.p) * place;
            place *= self.p;
            a /= self.p;
        }
        out
    }

    #[inline]
    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        if a == 0 || b == 0 {
            return 0;
        }
        let e = (self.log[a as usize] + self.log[b as usize]) % (self.q - 1);
        self.exp[e as usize]
    }

    pub fn inv(&self, a: Fq) -> Option<Fq> {
        (a != 0).then(|| {
            let e = (self.q - 1 - self.log[a as usize]) % (self.q - 1);
            self.exp[e as usize]
        })
    }

    pub fn pow(&self, a: Fq, e: u64) -> Fq {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let l = (self.log[a as usize] as u64 * (e % (self.q as u64 - 1))) % (self.q as u64 - 1);
        self.exp[l as usize]
    }

    /// Quadratic residue symbol: `0`, `1` or `-1`.
    pub fn legendre(&self, a: Fq) -> i8 {
        match a {
            0 => 0,
            _ if self.log[a as usize] % 2 == 0 => 1,
            _ => -1,
        }
    }

    /// All elements in code order.
    pub fn elements(&self) -> impl Iterator<Item = Fq> {
        0..self.q
    }
}

fn digits_of(mut a: u32, p: u32, m: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(m as usize);
    for _ in 0..m {
        out.push(a % p);
        a /= p;
    }
    out
}

/// Powers `x^0, .., x^(q-2)` modulo the monic polynomial with low
/// coefficients `modulus`, provided `x` has multiplicative order `q - 1`.
fn primitive_powers(modulus: &[u32], p: u32, q: u32) -> Option<Vec<Fq>> {
    let m = modulus.len();
    let mut cur = vec![0u32; m];
    cur[0] = 1;
    let mut powers = Vec::with_capacity(q as usize - 1);
    for i in 0..q - 1 {
        let code = cur.iter().rev().fold(0, |acc, &d| acc * p + d);
        if code == 0 || (i > 0 && code == 1) {
            return None;
        }
        powers.push(code);
        let top = cur[m - 1] as u64;
        let pp = p as u64;
        for j in (1..m).rev() {
            cur[j] = ((cur[j - 1] as u64 + pp - (top * modulus[j] as u64) % pp) % pp) as u32;
        }
        cur[0] = ((pp - (top * modulus[0] as u64) % pp) % pp) as u32;
    }
    let back = cur.iter().rev().fold(0, |acc, &d| acc * p + d);
    (back == 1).then_some(powers)
}
