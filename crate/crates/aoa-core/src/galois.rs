//! Arithmetic in GF(p^m) for orders up to 2^16.
//!
//! An element is stored as the base-`p` integer formed by its polynomial
//! coefficients (constant term least significant), so the canonical
//! enumeration order of the field is simply `0..s`.  Level `l` of an array
//! corresponds to the element with index `l - 1`.

use crate::error::{AoaError, Result};

/// Largest supported field order.
pub const MAX_ORDER: u32 = 1 << 16;

/// A field element, identified by its index in the canonical enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Elem(pub u32);

/// Returns `(p, m)` with `s = p^m` when `s` is a prime power.
pub fn prime_power(s: u32) -> Option<(u32, u32)> {
    if s < 2 {
        return None;
    }
    let p = (2..=s).find(|d| s % d == 0)?;
    let (mut t, mut m) = (s, 0);
    while t % p == 0 {
        t /= p;
        m += 1;
    }
    (t == 1).then_some((p, m))
}

#[derive(Clone, Debug)]
pub struct Field {
    p: u32,
    m: u32,
    s: u32,
    /// Monic modulus, coefficients from the constant term upwards (length m+1).
    modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
}

// Polynomial helpers over GF(p); coefficient vectors are low-degree first.

fn trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let b = trim(b.to_vec());
    let mut a = trim(a.to_vec());
    let lead_inv = inv_mod(*b.last().expect("nonzero divisor"), p);
    while a.len() >= b.len() {
        let shift = a.len() - b.len();
        let c = a.last().unwrap() * lead_inv % p;
        for (i, &bc) in b.iter().enumerate() {
            a[shift + i] = (a[shift + i] + p - c * bc % p) % p;
        }
        a = trim(a);
    }
    a
}

fn inv_mod(a: u32, p: u32) -> u32 {
    (1..p).find(|&x| a * x % p == 1).expect("invertible mod p")
}

fn digits(v: u32, p: u32, m: u32) -> Vec<u32> {
    let mut v = v;
    (0..m)
        .map(|_| {
            let d = v % p;
            v /= p;
            d
        })
        .collect()
}

fn undigits(d: &[u32], p: u32) -> u32 {
    d.iter().rev().fold(0, |acc, &x| acc * p + x)
}

fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let m = modulus.len() - 1;
    for deg in 1..=m / 2 {
        for low in 0..p.pow(deg as u32) {
            let mut f = digits(low, p, deg as u32);
            f.push(1);
            if poly_rem(modulus, &f, p).is_empty() {
                return false;
            }
        }
    }
    true
}

impl Field {
    /// Builds GF(s) with the lexicographically smallest irreducible monic modulus.
    pub fn new(s: u32) -> Result<Self> {
        let (p, m) = prime_power(s).ok_or(AoaError::NotPrimePower(s))?;
        if s > MAX_ORDER {
            return Err(AoaError::Field(format!("order {s} exceeds {MAX_ORDER}")));
        }
        let modulus = if m == 1 {
            vec![0, 1]
        } else {
            (0..p.pow(m))
                .map(|low| {
                    let mut f = digits(low, p, m);
                    f.push(1);
                    f
                })
                .find(|f| f[0] != 0 && is_irreducible(f, p))
                .ok_or_else(|| AoaError::Field("no irreducible polynomial found".into()))?
        };
        let mut field = Field { p, m, s, modulus, exp: Vec::new(), log: Vec::new() };
        field.build_tables()?;
        Ok(field)
    }

    fn slow_mul(&self, a: u32, b: u32) -> u32 {
        let (p, m) = (self.p, self.m);
        if m == 1 {
            return (a as u64 * b as u64 % p as u64) as u32;
        }
        let (da, db) = (digits(a, p, m), digits(b, p, m));
        let mut prod = vec![0u32; 2 * m as usize - 1];
        for (i, &x) in da.iter().enumerate() {
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % p;
            }
        }
        let mut r = poly_rem(&prod, &self.modulus, p);
        r.resize(m as usize, 0);
        undigits(&r, p)
    }

    fn build_tables(&mut self) -> Result<()> {
        let order = self.s - 1;
        let prime_factors: Vec<u32> = (2..=order).filter(|d| order % d == 0 && prime_power(*d) == Some((*d, 1))).collect();
        let generator = (1..self.s)
            .find(|&g| {
                prime_factors.iter().all(|&q| {
                    let mut x = 1;
                    for _ in 0..order / q {
                        x = self.slow_mul(x, g);
                    }
                    x != 1
                })
            })
            .ok_or_else(|| AoaError::Field("no primitive element".into()))?;
        let mut exp = Vec::with_capacity(order as usize);
        let mut log = vec![0u32; self.s as usize];
        let mut x = 1u32;
        for i in 0..order {
            exp.push(x);
            log[x as usize] = i;
            x = self.slow_mul(x, generator);
        }
        self.exp = exp;
        self.log = log;
        Ok(())
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn order(&self) -> u32 {
        self.s
    }

    /// Monic modulus, constant term first.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn zero(&self) -> Elem {
        Elem(0)
    }

    pub fn one(&self) -> Elem {
        Elem(1)
    }

    /// Elements in canonical enumeration order.
    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        (0..self.s).map(Elem)
    }

    pub fn coeffs(&self, e: Elem) -> Vec<u32> {
        digits(e.0, self.p, self.m)
    }

    pub fn from_coeffs(&self, c: &[u32]) -> Result<Elem> {
        if c.len() != self.m as usize || c.iter().any(|&d| d >= self.p) {
            return Err(AoaError::Field(format!("invalid coefficient vector {c:?}")));
        }
        Ok(Elem(undigits(c, self.p)))
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        if self.p == 2 {
            return Elem(a.0 ^ b.0);
        }
        let (p, mut x, mut y) = (self.p, a.0, b.0);
        let (mut out, mut place) = (0, 1);
        while x > 0 || y > 0 {
            out += ((x % p + y % p) % p) * place;
            x /= p;
            y /= p;
            place *= p;
        }
        Elem(out)
    }

    pub fn neg(&self, a: Elem) -> Elem {
        let p = self.p;
        let (mut x, mut out, mut place) = (a.0, 0, 1);
        while x > 0 {
            out += ((p - x % p) % p) * place;
            x /= p;
            place *= p;
        }
        Elem(out)
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a.0 == 0 || b.0 == 0 {
            return Elem(0);
        }
        let order = self.s - 1;
        let idx = (self.log[a.0 as usize] + self.log[b.0 as usize]) % order;
        Elem(self.exp[idx as usize])
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a.0 == 0 {
            return Err(AoaError::Field("inverse of zero".into()));
        }
        let order = self.s - 1;
        Ok(Elem(self.exp[((order - self.log[a.0 as usize]) % order) as usize]))
    }

    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return Elem(1);
        }
        if a.0 == 0 {
            return Elem(0);
        }
        let order = (self.s - 1) as u64;
        let idx = (self.log[a.0 as usize] as u64 * (e % order)) % order;
        Elem(self.exp[idx as usize])
    }

    /// Sum of a slice of elements.
    pub fn sum(&self, xs: &[Elem]) -> Elem {
        xs.iter().fold(Elem(0), |acc, &x| self.add(acc, x))
    }

    /// The image of an integer under the ring map Z -> GF(s).
    pub fn from_int(&self, n: u64) -> Elem {
        Elem((n % self.p as u64) as u32)
    }

    /// Trace to the prime field: `T(e) = sum_{i<m} e^{p^i}`.
    pub fn trace(&self, e: Elem) -> Elem {
        let mut acc = Elem(0);
        let mut y = e;
        for _ in 0..self.m {
            acc = self.add(acc, y);
            y = self.pow(y, self.p as u64);
        }
        acc
    }

    pub fn is_square(&self, e: Elem) -> bool {
        self.elements().any(|x| self.mul(x, x) == e)
    }

    /// First non-square in enumeration order (odd order only).
    pub fn find_nonsquare(&self) -> Result<Elem> {
        if self.p == 2 {
            return Err(AoaError::Field("every element of a field of characteristic 2 is a square".into()));
        }
        self.elements()
            .find(|&e| !self.is_square(e))
            .ok_or_else(|| AoaError::Field("no non-square found".into()))
    }

    /// First element with `zeta^{s/2} != zeta` and trace one (even order `s > 2`).
    ///
    /// Both conditions are imposed: the trace condition is what the extension
    /// construction actually needs, and for `s >= 8` the first element with
    /// `zeta^{s/2} != zeta` can have trace zero.
    pub fn find_zeta(&self) -> Result<Elem> {
        if self.p != 2 || self.s <= 2 {
            return Err(AoaError::Field(format!("zeta needs an even order above 2 (got {})", self.s)));
        }
        let half = (self.s / 2) as u64;
        self.elements()
            .find(|&z| self.pow(z, half) != z && self.trace(z) == Elem(1))
            .ok_or_else(|| AoaError::Field("no suitable zeta".into()))
    }

    /// Checks `im(x -> x + x^2) = ker T` by enumeration (characteristic 2).
    pub fn cotrace_image_check(&self) -> Result<bool> {
        if self.p != 2 {
            return Err(AoaError::Field("cotrace check is defined for characteristic 2".into()));
        }
        let mut image = vec![false; self.s as usize];
        for x in self.elements() {
            image[self.add(x, self.mul(x, x)).0 as usize] = true;
        }
        Ok(self.elements().all(|e| image[e.0 as usize] == (self.trace(e) == Elem(0))))
    }

    /// Array level (1-based) of an element.
    pub fn to_level(&self, e: Elem) -> u32 {
        e.0 + 1
    }

    /// Element carried by an array level.
    pub fn from_level(&self, level: u32) -> Result<Elem> {
        if level == 0 || level > self.s {
            return Err(AoaError::LevelOutOfRange { level, s: self.s });
        }
        Ok(Elem(level - 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moduli() {
        assert_eq!(Field::new(4).unwrap().modulus(), &[1, 1, 1]);
        assert_eq!(Field::new(9).unwrap().modulus(), &[1, 0, 1]);
        assert_eq!(Field::new(8).unwrap().modulus(), &[1, 1, 0, 1]);
        assert_eq!(Field::new(6).unwrap_err(), AoaError::NotPrimePower(6));
        assert!(Field::new(1).is_err());
    }

    #[test]
    fn small_arithmetic() {
        let f4 = Field::new(4).unwrap();
        let w = Elem(2);
        assert_eq!(f4.mul(w, w), Elem(3)); // w^2 = w + 1
        let f5 = Field::new(5).unwrap();
        assert_eq!(f5.inv(Elem(2)).unwrap(), Elem(3));
        assert!(f5.inv(Elem(0)).is_err());
        let f3 = Field::new(3).unwrap();
        assert_eq!(f3.add(Elem(2), Elem(2)), Elem(1));
    }

    #[test]
    fn traces() {
        let f4 = Field::new(4).unwrap();
        assert_eq!(f4.trace(Elem(1)), Elem(0));
        assert_eq!(f4.trace(Elem(2)), Elem(1));
        let f2 = Field::new(2).unwrap();
        assert!(f2.elements().all(|e| f2.trace(e) == e));
        for s in [2, 4, 8, 16] {
            assert!(Field::new(s).unwrap().cotrace_image_check().unwrap());
        }
        assert!(Field::new(3).unwrap().cotrace_image_check().is_err());
    }

    #[test]
    fn special_elements() {
        assert_eq!(Field::new(5).unwrap().find_nonsquare().unwrap(), Elem(2));
        assert_eq!(Field::new(3).unwrap().find_nonsquare().unwrap(), Elem(2));
        assert!(Field::new(4).unwrap().find_nonsquare().is_err());
        assert_eq!(Field::new(4).unwrap().find_zeta().unwrap(), Elem(2));
        assert!(Field::new(2).unwrap().find_zeta().is_err());
        let f8 = Field::new(8).unwrap();
        let z = f8.find_zeta().unwrap();
        assert_ne!(f8.pow(z, 4), z);
        assert_eq!(f8.trace(z), Elem(1));
        // the plain "first zeta with zeta^{s/2} != zeta" rule would pick x, of trace 0
        assert_eq!(f8.trace(Elem(2)), Elem(0));
    }

    #[test]
    fn levels_round_trip() {
        let f = Field::new(9).unwrap();
        for l in 1..=9 {
            assert_eq!(f.to_level(f.from_level(l).unwrap()), l);
        }
        assert!(f.from_level(0).is_err());
        assert_eq!(f.to_level(Elem(0)), 1);
    }

    #[test]
    fn large_orders_build() {
        let f = Field::new(1 << 16).unwrap();
        let a = Elem(12345);
        assert_eq!(f.mul(a, f.inv(a).unwrap()), Elem(1));
        let f = Field::new(59049).unwrap();
        assert_eq!(f.mul(Elem(777), f.inv(Elem(777)).unwrap()), Elem(1));
    }
}
