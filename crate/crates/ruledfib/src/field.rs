//! Exact arithmetic in F_{p^k} for small primes p and small extension degrees.
//!
//! Elements are polynomial residues modulo a deterministically chosen monic
//! irreducible polynomial, so serialized values are reproducible across runs.
//! Everything downstream (point counting, torsion search, isogeny evaluation)
//! enumerates field elements, so field sizes are capped.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::{Arc, OnceLock};
use thiserror::Error;

/// Default cap on p^k. Overridable per call (the CLI wires an env var to it).
pub const DEFAULT_FIELD_CAP: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("NonPrime: {0} is not prime")]
    NonPrime(u64),
    #[error("DegreeOutOfRange: need k >= 1 and p^k <= {cap}, got p={p}, k={k}")]
    DegreeOutOfRange { p: u64, k: usize, cap: u64 },
    #[error("DivisionByZero")]
    DivisionByZero,
    #[error("MixedFields: operands live in different fields")]
    MixedFields,
}

/// One of the four checked arithmetic operations exposed to config/CLI layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug)]
struct FieldInner {
    p: u64,
    k: usize,
    /// Monic modulus, little-endian, length k+1, leading coefficient 1.
    modulus: Vec<u64>,
    /// Cached quadratic nonresidue (odd characteristic), found lazily.
    nonresidue: OnceLock<Vec<u64>>,
    /// Cached row-reduced system for z^2 + z = d (characteristic 2).
    artin_schreier: OnceLock<ArtinSchreierTable>,
}

/// Handle to a finite field F_{p^k}. Cheap to clone; all values immutable.
#[derive(Clone)]
pub struct Field(Arc<FieldInner>);

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{{{}^{}}}", self.0.p, self.0.k)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p && self.0.k == other.0.k && self.0.modulus == other.0.modulus)
    }
}
impl Eq for Field {}

/// Serializable field description, as it appears in config files.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct FieldSpec {
    pub p: u64,
    pub k: usize,
}

/// An element of a [`Field`], stored as a reduced residue of degree < k.
#[derive(Clone)]
pub struct FieldElement {
    field: Field,
    /// Little-endian coefficients, length k, each < p.
    coeffs: Vec<u64>,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coeffs)
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.coeffs == other.coeffs
    }
}
impl Eq for FieldElement {}

impl PartialOrd for FieldElement {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for FieldElement {
    /// Order by enumeration index; used only for canonical sorting of outputs.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.index().cmp(&other.index())
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// --- polynomial helpers over F_p, little-endian Vec<u64> ---

fn poly_trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn poly_sub(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out = vec![0; n];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *o = (x + p - y) % p;
    }
    poly_trim(&mut out);
    out
}

fn poly_mul(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    poly_trim(&mut out);
    out
}

fn mod_inv_scalar(p: u64, a: u64) -> u64 {
    // Fermat; p is prime and a != 0 mod p.
    let mut result = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    result
}

/// Remainder of a modulo monic m.
fn poly_rem(p: u64, a: &[u64], m: &[u64]) -> Vec<u64> {
    debug_assert_eq!(m.last(), Some(&1), "modulus must be monic");
    let dm = m.len() - 1;
    let mut r: Vec<u64> = a.to_vec();
    poly_trim(&mut r);
    while r.len() > dm {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        for i in 0..=dm {
            r[i + shift] = (r[i + shift] + p - lead * m[i] % p) % p;
        }
        poly_trim(&mut r);
    }
    r
}

/// Extended Euclid: returns (g, s) with s*a = g mod m, g the monic gcd.
fn poly_ext_gcd(p: u64, a: &[u64], m: &[u64]) -> (Vec<u64>, Vec<u64>) {
    let mut r0 = m.to_vec();
    let mut r1 = a.to_vec();
    poly_trim(&mut r0);
    poly_trim(&mut r1);
    let mut s0: Vec<u64> = vec![];
    let mut s1: Vec<u64> = vec![1];
    while !r1.is_empty() {
        // divide r0 by r1
        let mut q: Vec<u64> = vec![0; r0.len().saturating_sub(r1.len()) + 1];
        let inv_lead = mod_inv_scalar(p, *r1.last().unwrap());
        let mut rem = r0.clone();
        while rem.len() >= r1.len() && !rem.is_empty() {
            let shift = rem.len() - r1.len();
            let c = *rem.last().unwrap() * inv_lead % p;
            q[shift] = (q[shift] + c) % p;
            for i in 0..r1.len() {
                rem[i + shift] = (rem[i + shift] + p - c * r1[i] % p) % p;
            }
            poly_trim(&mut rem);
        }
        poly_trim(&mut q);
        let s2 = poly_sub(p, &s0, &poly_mul(p, &q, &s1));
        r0 = r1;
        r1 = rem;
        s0 = s1;
        s1 = s2;
    }
    // normalize gcd monic
    if let Some(&lead) = r0.last() {
        if lead != 1 {
            let inv = mod_inv_scalar(p, lead);
            for c in r0.iter_mut() {
                *c = *c * inv % p;
            }
            for c in s0.iter_mut() {
                *c = *c * inv % p;
            }
        }
    }
    (r0, s0)
}

/// Trial division by all monic polynomials of degree 1..=k/2.
fn is_irreducible(p: u64, modulus: &[u64]) -> bool {
    let k = modulus.len() - 1;
    if k == 1 {
        return true;
    }
    for d in 1..=(k / 2) {
        let count = p.pow(d as u32);
        for idx in 0..count {
            let mut div = vec![0u64; d + 1];
            div[d] = 1;
            let mut v = idx;
            for c in div.iter_mut().take(d) {
                *c = v % p;
                v /= p;
            }
            if poly_rem(p, modulus, &div).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Lexicographically least monic irreducible of degree k over F_p
/// (coefficients read from the leading term down).
fn least_irreducible(p: u64, k: usize) -> Vec<u64> {
    let count = p.checked_pow(k as u32).expect("field size checked earlier");
    for v in 0..count {
        let mut m = vec![0u64; k + 1];
        m[k] = 1;
        // v encodes the k lower coefficients, c_{k-1} most significant
        let mut rest = v;
        for i in 0..k {
            m[i] = rest % p;
            rest /= p;
        }
        if is_irreducible(p, &m) {
            return m;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists over F_p")
}

#[derive(Debug)]
struct ArtinSchreierTable {
    /// Row-reduced augmented matrix data for solving z^2 + z = d over F_{2^k},
    /// stored as (pivot column, row image bits) pairs in elimination order.
    rows: Vec<(usize, u64, u64)>, // (pivot, map-row bits, solution-combo bits)
}

impl Field {
    /// Construct F_{p^k} with the default size cap.
    pub fn new(p: u64, k: usize) -> Result<Field, FieldError> {
        Field::with_cap(p, k, DEFAULT_FIELD_CAP)
    }

    pub fn with_cap(p: u64, k: usize, cap: u64) -> Result<Field, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NonPrime(p));
        }
        if k < 1 {
            return Err(FieldError::DegreeOutOfRange { p, k, cap });
        }
        let mut size: u64 = 1;
        for _ in 0..k {
            size = size.checked_mul(p).ok_or(FieldError::DegreeOutOfRange { p, k, cap })?;
            if size > cap {
                return Err(FieldError::DegreeOutOfRange { p, k, cap });
            }
        }
        let modulus = least_irreducible(p, k);
        Ok(Field(Arc::new(FieldInner {
            p,
            k,
            modulus,
            nonresidue: OnceLock::new(),
            artin_schreier: OnceLock::new(),
        })))
    }

    pub fn from_spec(spec: &FieldSpec, cap: u64) -> Result<Field, FieldError> {
        Field::with_cap(spec.p, spec.k, cap)
    }

    pub fn spec(&self) -> FieldSpec {
        FieldSpec { p: self.0.p, k: self.0.k }
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }

    pub fn k(&self) -> usize {
        self.0.k
    }

    /// q = p^k.
    pub fn order(&self) -> u64 {
        self.0.p.pow(self.0.k as u32)
    }

    /// Modulus coefficients, little-endian, length k+1.
    pub fn modulus(&self) -> &[u64] {
        &self.0.modulus
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { field: self.clone(), coeffs: vec![0; self.0.k] }
    }

    pub fn one(&self) -> FieldElement {
        self.from_u64(1)
    }

    pub fn from_u64(&self, n: u64) -> FieldElement {
        let mut coeffs = vec![0; self.0.k];
        coeffs[0] = n % self.0.p;
        FieldElement { field: self.clone(), coeffs }
    }

    pub fn from_i64(&self, n: i64) -> FieldElement {
        let p = self.0.p as i64;
        self.from_u64(n.rem_euclid(p) as u64)
    }

    /// Element from little-endian coefficients (shorter vectors are padded).
    pub fn from_coeffs(&self, coeffs: &[u64]) -> FieldElement {
        let mut c = vec![0; self.0.k];
        for (i, &x) in coeffs.iter().enumerate() {
            if i < self.0.k {
                c[i] = x % self.0.p;
            } else {
                assert!(x % self.0.p == 0, "coefficient beyond field degree");
            }
        }
        FieldElement { field: self.clone(), coeffs: c }
    }

    /// The residue class of the polynomial variable (a root of the modulus).
    pub fn gen(&self) -> FieldElement {
        let mut coeffs = vec![0; self.0.k];
        if self.0.k > 1 {
            coeffs[1] = 1;
        } else {
            // k = 1: the variable reduces to -modulus[0]
            coeffs[0] = (self.0.p - self.0.modulus[0]) % self.0.p;
        }
        FieldElement { field: self.clone(), coeffs }
    }

    /// Element with enumeration index i (base-p digits, little-endian).
    pub fn element(&self, index: u64) -> FieldElement {
        let mut coeffs = vec![0; self.0.k];
        let mut v = index;
        for c in coeffs.iter_mut() {
            *c = v % self.0.p;
            v /= self.0.p;
        }
        FieldElement { field: self.clone(), coeffs }
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.order()).map(move |i| self.element(i))
    }

    /// Checked arithmetic entry point used by config/CLI layers.
    pub fn arith(a: &FieldElement, b: &FieldElement, op: ArithOp) -> Result<FieldElement, FieldError> {
        if a.field != b.field {
            return Err(FieldError::MixedFields);
        }
        match op {
            ArithOp::Add => Ok(a.add(b)),
            ArithOp::Sub => Ok(a.sub(b)),
            ArithOp::Mul => Ok(a.mul(b)),
            ArithOp::Div => {
                if b.is_zero() {
                    return Err(FieldError::DivisionByZero);
                }
                Ok(a.mul(&b.inv().expect("nonzero")))
            }
        }
    }

    fn nonresidue(&self) -> FieldElement {
        let coeffs = self.0.nonresidue.get_or_init(|| {
            let exp = (self.order() - 1) / 2;
            for e in self.elements() {
                if !e.is_zero() && !e.pow(exp).is_one() {
                    return e.coeffs;
                }
            }
            unreachable!("odd field has a nonresidue")
        });
        FieldElement { field: self.clone(), coeffs: coeffs.clone() }
    }

    /// Square root in odd characteristic (Tonelli–Shanks). None if non-square.
    pub fn sqrt(&self, a: &FieldElement) -> Option<FieldElement> {
        assert!(self.0.p != 2);
        if a.is_zero() {
            return Some(self.zero());
        }
        let q = self.order();
        if !a.pow((q - 1) / 2).is_one() {
            return None;
        }
        let mut m_exp = q - 1;
        let mut s = 0u32;
        while m_exp % 2 == 0 {
            m_exp /= 2;
            s += 1;
        }
        let z = self.nonresidue();
        let mut c = z.pow(m_exp);
        let mut x = a.pow((m_exp + 1) / 2);
        let mut t = a.pow(m_exp);
        let mut m = s;
        while !t.is_one() {
            let mut i = 0u32;
            let mut tt = t.clone();
            while !tt.is_one() {
                tt = tt.mul(&tt);
                i += 1;
            }
            let mut b = c.clone();
            for _ in 0..(m - i - 1) {
                b = b.mul(&b);
            }
            x = x.mul(&b);
            c = b.mul(&b);
            t = t.mul(&c);
            m = i;
        }
        Some(x)
    }

    fn artin_schreier_table(&self) -> &ArtinSchreierTable {
        self.0.artin_schreier.get_or_init(|| {
            let k = self.0.k;
            assert!(k <= 63);
            // Column j is the image of the basis monomial t^j under the
            // F_2-linear map z -> z^2 + z. Each stored row keeps a distinct
            // pivot bit and is reduced against all earlier rows, so a single
            // forward pass solves the system.
            let mut rows: Vec<(usize, u64, u64)> = Vec::new();
            for j in 0..k {
                let mut b = self.zero();
                b.coeffs[j] = 1;
                let img = b.mul(&b).add(&b);
                let mut c = 0u64;
                for (i, &ci) in img.coeffs.iter().enumerate() {
                    if ci != 0 {
                        c |= 1 << i;
                    }
                }
                let mut src = 1u64 << j;
                for &(pb, pc, psrc) in &rows {
                    if c & (1 << pb) != 0 {
                        c ^= pc;
                        src ^= psrc;
                    }
                }
                if c != 0 {
                    rows.push((c.trailing_zeros() as usize, c, src));
                }
            }
            ArtinSchreierTable { rows }
        })
    }

    /// Solutions of z^2 + z = d over F_{2^k}: either two (z, z+1) or none.
    pub fn solve_artin_schreier(&self, d: &FieldElement) -> Option<(FieldElement, FieldElement)> {
        assert_eq!(self.0.p, 2);
        let table = self.artin_schreier_table();
        let mut target = 0u64;
        for (i, &c) in d.coeffs.iter().enumerate() {
            if c != 0 {
                target |= 1 << i;
            }
        }
        let mut combo = 0u64;
        for &(pivot, row, src) in &table.rows {
            if target & (1 << pivot) != 0 {
                target ^= row;
                combo ^= src;
            }
        }
        if target != 0 {
            return None;
        }
        let mut z = self.zero();
        for j in 0..self.0.k {
            if combo & (1 << j) != 0 {
                z.coeffs[j] = 1;
            }
        }
        debug_assert_eq!(z.mul(&z).add(&z), *d);
        let z1 = z.add(&self.one());
        Some((z, z1))
    }
}

impl FieldElement {
    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    /// Enumeration index (base-p evaluation of the coefficients).
    pub fn index(&self) -> u64 {
        let p = self.field.p();
        let mut v = 0u64;
        for &c in self.coeffs.iter().rev() {
            v = v * p + c;
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0] == 1 && self.coeffs[1..].iter().all(|&c| c == 0)
    }

    #[must_use]
    pub fn add(&self, other: &FieldElement) -> FieldElement {
        assert!(self.field == other.field, "mixed fields");
        let p = self.field.p();
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| (a + b) % p)
            .collect();
        FieldElement { field: self.field.clone(), coeffs }
    }

    #[must_use]
    pub fn sub(&self, other: &FieldElement) -> FieldElement {
        assert!(self.field == other.field, "mixed fields");
        let p = self.field.p();
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| (a + p - b) % p)
            .collect();
        FieldElement { field: self.field.clone(), coeffs }
    }

    #[must_use]
    pub fn neg(&self) -> FieldElement {
        self.field.zero().sub(self)
    }

    #[must_use]
    pub fn mul(&self, other: &FieldElement) -> FieldElement {
        assert!(self.field == other.field, "mixed fields");
        let p = self.field.p();
        let prod = poly_mul(p, &self.coeffs, &other.coeffs);
        let rem = poly_rem(p, &prod, self.field.modulus());
        self.field.from_coeffs(&rem)
    }

    pub fn inv(&self) -> Result<FieldElement, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let p = self.field.p();
        let mut a = self.coeffs.clone();
        poly_trim(&mut a);
        let (g, s) = poly_ext_gcd(p, &a, self.field.modulus());
        debug_assert_eq!(g, vec![1], "modulus is irreducible");
        let rem = poly_rem(p, &s, self.field.modulus());
        Ok(self.field.from_coeffs(&rem))
    }

    #[must_use]
    pub fn div(&self, other: &FieldElement) -> FieldElement {
        self.mul(&other.inv().expect("division by zero"))
    }

    #[must_use]
    pub fn pow(&self, mut e: u64) -> FieldElement {
        let mut result = self.field.one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        result
    }

    /// The p-power (absolute Frobenius) map.
    #[must_use]
    pub fn frobenius(&self) -> FieldElement {
        self.pow(self.field.p())
    }

    /// Inverse of the p-power map (p-th root), a bijection on a finite field.
    #[must_use]
    pub fn frobenius_inv(&self) -> FieldElement {
        let q = self.field.order();
        let p = self.field.p();
        self.pow(q / p)
    }

    /// Scale by an integer constant (reduced mod p).
    #[must_use]
    pub fn scale(&self, n: i64) -> FieldElement {
        self.mul(&self.field.from_i64(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Oracle: exhaustive root search over F_p (irreducibility of quadratics
    /// and cubics reduces to having no roots).
    fn has_root_in_prime_field(p: u64, poly: &[u64]) -> bool {
        (0..p).any(|x| {
            let mut acc = 0u64;
            for &c in poly.iter().rev() {
                acc = (acc * x + c) % p;
            }
            acc == 0
        })
    }

    #[test]
    fn make_field_prime() {
        let f = Field::new(2, 1).unwrap();
        assert_eq!(f.modulus(), &[0, 1]); // modulus x
        assert_eq!(f.order(), 2);
    }

    #[test]
    fn make_field_rejects_composite_p() {
        assert_eq!(Field::new(4, 1).unwrap_err(), FieldError::NonPrime(4));
    }

    #[test]
    fn make_field_rejects_oversized() {
        assert!(matches!(
            Field::with_cap(2, 21, 1 << 20),
            Err(FieldError::DegreeOutOfRange { .. })
        ));
        assert!(matches!(Field::new(2, 0), Err(FieldError::DegreeOutOfRange { .. })));
    }

    #[test]
    fn f9_modulus_is_least_irreducible_quadratic() {
        let f = Field::new(3, 2).unwrap();
        // x^2 is divisible by x; x^2 + 1 is the next candidate and has no
        // root in F_3, hence is irreducible.
        assert_eq!(f.modulus(), &[1, 0, 1]);
        assert!(!has_root_in_prime_field(3, f.modulus()));
    }

    #[test]
    fn f4_and_f8_moduli() {
        assert_eq!(Field::new(2, 2).unwrap().modulus(), &[1, 1, 1]);
        assert_eq!(Field::new(2, 3).unwrap().modulus(), &[1, 1, 0, 1]);
    }

    #[test]
    fn add_identity_and_inverse_law() {
        let f = Field::new(3, 2).unwrap();
        for a in f.elements() {
            assert_eq!(a.add(&f.zero()), a);
            if !a.is_zero() {
                assert!(a.mul(&a.inv().unwrap()).is_one());
            }
        }
    }

    #[test]
    fn f9_generator_square_matches_direct_multiplication() {
        let f = Field::new(3, 2).unwrap();
        // g = x + 1 generates F_9^* (order 8).
        let g = f.from_coeffs(&[1, 1]);
        let mut pow = f.one();
        let mut order = 0;
        for i in 1..=8 {
            pow = pow.mul(&g);
            if pow.is_one() {
                order = i;
                break;
            }
        }
        assert_eq!(order, 8);
        // Oracle: independent schoolbook multiplication mod (x^2 + 1, 3):
        // (x+1)^2 = x^2 + 2x + 1 = 2x + (1 - 1) = 2x.
        let prod = poly_mul(3, &[1, 1], &[1, 1]);
        let red = poly_rem(3, &prod, &[1, 0, 1]);
        assert_eq!(f.from_coeffs(&red), g.mul(&g));
        assert_eq!(g.mul(&g), f.from_coeffs(&[0, 2]));
    }

    #[test]
    fn frobenius_fixes_prime_field_and_has_order_k() {
        let f2 = Field::new(5, 1).unwrap();
        for a in f2.elements() {
            assert_eq!(a.frobenius(), a);
        }
        let f = Field::new(3, 2).unwrap();
        for a in f.elements() {
            let mut b = a.clone();
            for _ in 0..f.k() {
                b = b.frobenius();
            }
            assert_eq!(b, a);
        }
    }

    #[test]
    fn frobenius_conjugates_f4_generator() {
        let f = Field::new(2, 2).unwrap();
        let g = f.gen();
        let c = g.frobenius();
        assert_ne!(c, g);
        // Oracle: the image is the other root of the modulus x^2 + x + 1.
        let val = c.mul(&c).add(&c).add(&f.one());
        assert!(val.is_zero());
    }

    #[test]
    fn artin_schreier_solver_exact() {
        for k in 1..=4 {
            let f = Field::new(2, k).unwrap();
            for d in f.elements() {
                match f.solve_artin_schreier(&d) {
                    Some((z0, z1)) => {
                        assert_eq!(z0.mul(&z0).add(&z0), d);
                        assert_eq!(z1.mul(&z1).add(&z1), d);
                        assert_ne!(z0, z1);
                    }
                    None => {
                        for z in f.elements() {
                            assert_ne!(z.mul(&z).add(&z), d, "missed solution in F_{{2^{k}}}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn sqrt_exhaustive_small_odd_fields() {
        for (p, k) in [(3, 1), (5, 1), (7, 1), (3, 2), (5, 2)] {
            let f = Field::new(p, k).unwrap();
            for a in f.elements() {
                match f.sqrt(&a) {
                    Some(s) => assert_eq!(s.mul(&s), a),
                    None => {
                        for s in f.elements() {
                            assert_ne!(s.mul(&s), a);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn checked_arith_errors() {
        let f = Field::new(3, 1).unwrap();
        let g = Field::new(5, 1).unwrap();
        assert_eq!(
            Field::arith(&f.one(), &g.one(), ArithOp::Add).unwrap_err(),
            FieldError::MixedFields
        );
        assert_eq!(
            Field::arith(&f.one(), &f.zero(), ArithOp::Div).unwrap_err(),
            FieldError::DivisionByZero
        );
    }

    fn field_strategy() -> impl Strategy<Value = Field> {
        prop_oneof![
            Just(Field::new(2, 3).unwrap()),
            Just(Field::new(3, 2).unwrap()),
            Just(Field::new(5, 1).unwrap()),
            Just(Field::new(7, 1).unwrap()),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn ring_axioms((f, i, j, l) in field_strategy().prop_flat_map(|f| {
            let q = f.order();
            (Just(f), 0..q, 0..q, 0..q)
        })) {
            let a = f.element(i);
            let b = f.element(j);
            let c = f.element(l);
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        }

        #[test]
        fn p_power_map_is_additive((f, i, j) in field_strategy().prop_flat_map(|f| {
            let q = f.order();
            (Just(f), 0..q, 0..q)
        })) {
            let a = f.element(i);
            let b = f.element(j);
            prop_assert_eq!(a.add(&b).frobenius(), a.frobenius().add(&b.frobenius()));
        }

        #[test]
        fn unit_group_order((f, i) in field_strategy().prop_flat_map(|f| {
            let q = f.order();
            (Just(f), 1..q)
        })) {
            let a = f.element(i);
            prop_assert!(a.pow(f.order() - 1).is_one());
        }
    }
}
