//! General Weierstrass curves y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6
//! over F_{p^k}, with the chord-tangent group law written so that
//! characteristics 2 and 3 work uniformly, naive point counting, and
//! isogenies: coordinate-wise Frobenius, Vélu quotients, duals evaluated as
//! `[deg] . (any preimage)`, and explicit Weierstrass isomorphisms.
//!
//! Field extensions needed for torsion or kernels are searched up to a bound
//! and reported, never performed silently.

use crate::field::{Field, FieldElement};
use serde::Serialize;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Default bound on the extension degree searched for torsion/preimages.
pub const DEFAULT_EXTENSION_BOUND: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("SingularCurve: discriminant is zero")]
    SingularCurve,
    #[error("MixedCurves: points live on different curves")]
    MixedCurves,
    #[error("CharZero: no Frobenius in characteristic zero mode")]
    CharZero,
    #[error("IrrationalKernel: a multiple of the kernel generator is not rational")]
    IrrationalKernel,
    #[error("OrderOne: kernel generator is the identity")]
    OrderOne,
    #[error("NeedsFieldExtension: not rational over the current field (minimal extension degree {degree} up to bound {bound})")]
    NeedsFieldExtension { degree: usize, bound: usize },
    #[error("PointNotOnCurve")]
    PointNotOnCurve,
    #[error("NoIsomorphism: curves are not isomorphic over this field")]
    NoIsomorphism,
    #[error("NotComposable: codomain and domain differ")]
    NotComposable,
    #[error(transparent)]
    Field(#[from] crate::field::FieldError),
}

#[derive(Debug)]
struct CurveInner {
    field: Field,
    a1: FieldElement,
    a2: FieldElement,
    a3: FieldElement,
    a4: FieldElement,
    a6: FieldElement,
    count: u64,
    trace: i64,
    supersingular: bool,
}

/// A smooth Weierstrass curve with cached point count, trace and
/// supersingular flag. Cheap to clone.
#[derive(Clone)]
pub struct Curve(Arc<CurveInner>);

impl fmt::Debug for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Curve[{:?},{:?},{:?},{:?},{:?}]/{:?}",
            self.0.a1, self.0.a2, self.0.a3, self.0.a4, self.0.a6, self.0.field
        )
    }
}

impl PartialEq for Curve {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.field == other.0.field
                && self.0.a1 == other.0.a1
                && self.0.a2 == other.0.a2
                && self.0.a3 == other.0.a3
                && self.0.a4 == other.0.a4
                && self.0.a6 == other.0.a6)
    }
}
impl Eq for Curve {}

/// A point of `Curve`: infinity or affine exact coordinates.
#[derive(Clone, PartialEq, Eq)]
pub enum CurvePoint {
    Infinity(Curve),
    Affine(Curve, FieldElement, FieldElement),
}

impl fmt::Debug for CurvePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurvePoint::Infinity(_) => write!(f, "inf"),
            CurvePoint::Affine(_, x, y) => write!(f, "({:?},{:?})", x, y),
        }
    }
}

impl Curve {
    pub fn new(
        field: &Field,
        a1: FieldElement,
        a2: FieldElement,
        a3: FieldElement,
        a4: FieldElement,
        a6: FieldElement,
    ) -> Result<Curve, CurveError> {
        let b2 = a1.mul(&a1).add(&a2.scale(4));
        let b4 = a4.scale(2).add(&a1.mul(&a3));
        let b6 = a3.mul(&a3).add(&a6.scale(4));
        let b8 = a1
            .mul(&a1)
            .mul(&a6)
            .add(&a2.mul(&a6).scale(4))
            .sub(&a1.mul(&a3).mul(&a4))
            .add(&a2.mul(&a3).mul(&a3))
            .sub(&a4.mul(&a4));
        let disc = b2
            .mul(&b2)
            .mul(&b8)
            .neg()
            .sub(&b4.mul(&b4).mul(&b4).scale(8))
            .sub(&b6.mul(&b6).scale(27))
            .add(&b2.mul(&b4).mul(&b6).scale(9));
        if disc.is_zero() {
            return Err(CurveError::SingularCurve);
        }
        let mut inner = CurveInner {
            field: field.clone(),
            a1,
            a2,
            a3,
            a4,
            a6,
            count: 0,
            trace: 0,
            supersingular: false,
        };
        let count = count_points(&inner);
        let q = field.order() as i64;
        let trace = q + 1 - count as i64;
        debug_assert!(trace * trace <= 4 * q, "Hasse bound");
        inner.count = count;
        inner.trace = trace;
        inner.supersingular = trace.rem_euclid(field.p() as i64) == 0;
        Ok(Curve(Arc::new(inner)))
    }

    /// Short form y^2 = x^3 + a4 x + a6 (odd characteristic convenience).
    pub fn short(field: &Field, a4: i64, a6: i64) -> Result<Curve, CurveError> {
        Curve::new(
            field,
            field.zero(),
            field.zero(),
            field.zero(),
            field.from_i64(a4),
            field.from_i64(a6),
        )
    }

    pub fn from_i64(field: &Field, a: [i64; 5]) -> Result<Curve, CurveError> {
        Curve::new(
            field,
            field.from_i64(a[0]),
            field.from_i64(a[1]),
            field.from_i64(a[2]),
            field.from_i64(a[3]),
            field.from_i64(a[4]),
        )
    }

    pub fn field(&self) -> &Field {
        &self.0.field
    }
    pub fn a1(&self) -> &FieldElement {
        &self.0.a1
    }
    pub fn a2(&self) -> &FieldElement {
        &self.0.a2
    }
    pub fn a3(&self) -> &FieldElement {
        &self.0.a3
    }
    pub fn a4(&self) -> &FieldElement {
        &self.0.a4
    }
    pub fn a6(&self) -> &FieldElement {
        &self.0.a6
    }

    /// Number of rational points over the base field, including infinity.
    pub fn point_count(&self) -> u64 {
        self.0.count
    }

    pub fn trace(&self) -> i64 {
        self.0.trace
    }

    pub fn is_supersingular(&self) -> bool {
        self.0.supersingular
    }

    pub fn infinity(&self) -> CurvePoint {
        CurvePoint::Infinity(self.clone())
    }

    pub fn point(&self, x: FieldElement, y: FieldElement) -> Result<CurvePoint, CurveError> {
        let p = CurvePoint::Affine(self.clone(), x, y);
        if !p.is_on_curve() {
            return Err(CurveError::PointNotOnCurve);
        }
        Ok(p)
    }

    /// y-coordinates over x, solving the fiber quadratic exactly.
    pub fn y_solutions(&self, x: &FieldElement) -> Vec<FieldElement> {
        let f = &self.0.field;
        // y^2 + A y = B with A = a1 x + a3, B = x^3 + a2 x^2 + a4 x + a6
        let a = self.0.a1.mul(x).add(&self.0.a3);
        let b = x
            .mul(x)
            .mul(x)
            .add(&self.0.a2.mul(x).mul(x))
            .add(&self.0.a4.mul(x))
            .add(&self.0.a6);
        if f.p() == 2 {
            if a.is_zero() {
                // y^2 = B has the unique root B^(q/2)
                return vec![b.frobenius_inv()];
            }
            let d = b.div(&a.mul(&a));
            match f.solve_artin_schreier(&d) {
                Some((z0, z1)) => vec![a.mul(&z0), a.mul(&z1)],
                None => vec![],
            }
        } else {
            // complete the square: (y + A/2)^2 = B + A^2/4
            let half = f.from_u64(2).inv().expect("odd characteristic");
            let r = b.add(&a.mul(&a).mul(&half).mul(&half));
            if r.is_zero() {
                return vec![a.mul(&half).neg()];
            }
            match f.sqrt(&r) {
                Some(s) => {
                    let base = a.mul(&half).neg();
                    vec![base.add(&s), base.sub(&s)]
                }
                None => vec![],
            }
        }
    }

    /// All rational points, infinity first, in deterministic order.
    pub fn all_points(&self) -> Vec<CurvePoint> {
        let f = &self.0.field;
        let mut pts = vec![self.infinity()];
        for x in f.elements() {
            let mut ys = self.y_solutions(&x);
            ys.sort();
            for y in ys {
                pts.push(CurvePoint::Affine(self.clone(), x.clone(), y));
            }
        }
        pts
    }

    /// Exponent and invariant factors (n1, n2) with n1 | n2, n1*n2 = #E.
    pub fn group_structure(&self) -> (u64, u64) {
        let n = self.0.count;
        let mut exponent = 1u64;
        for pt in self.all_points() {
            exponent = lcm(exponent, pt.order());
        }
        (n / exponent, exponent)
    }

    /// Curve with p-th powered coefficients (codomain of Frobenius).
    pub fn frobenius_twist(&self) -> Curve {
        Curve::new(
            &self.0.field,
            self.0.a1.frobenius(),
            self.0.a2.frobenius(),
            self.0.a3.frobenius(),
            self.0.a4.frobenius(),
            self.0.a6.frobenius(),
        )
        .expect("twist of a smooth curve is smooth")
    }

    /// Curve with p-th rooted coefficients (domain of a Frobenius onto self).
    pub fn frobenius_untwist(&self) -> Curve {
        Curve::new(
            &self.0.field,
            self.0.a1.frobenius_inv(),
            self.0.a2.frobenius_inv(),
            self.0.a3.frobenius_inv(),
            self.0.a4.frobenius_inv(),
            self.0.a6.frobenius_inv(),
        )
        .expect("untwist of a smooth curve is smooth")
    }

    /// Base change along a field embedding.
    pub fn base_change(&self, emb: &FieldEmbedding) -> Curve {
        assert!(emb.from() == &self.0.field);
        Curve::new(
            emb.to(),
            emb.map(&self.0.a1),
            emb.map(&self.0.a2),
            emb.map(&self.0.a3),
            emb.map(&self.0.a4),
            emb.map(&self.0.a6),
        )
        .expect("base change preserves smoothness")
    }

    /// Point of order exactly m over the base field, if any (deterministic).
    pub fn point_of_order(&self, m: u64) -> Option<CurvePoint> {
        if m == 1 {
            return Some(self.infinity());
        }
        if self.0.count % m != 0 {
            return None;
        }
        self.all_points().into_iter().find(|pt| pt.order() == m)
    }

    /// Search extensions of degree 1..=bound for a point of order m.
    /// Returns the extension degree, the embedded curve and the point.
    pub fn point_of_order_extended(
        &self,
        m: u64,
        bound: usize,
        cap: u64,
    ) -> Result<(usize, Curve, CurvePoint), CurveError> {
        for j in 1..=bound {
            let Ok(emb) = FieldEmbedding::extension(&self.0.field, j, cap) else {
                break;
            };
            let big = self.base_change(&emb);
            if let Some(pt) = big.point_of_order(m) {
                return Ok((j, big, pt));
            }
        }
        Err(CurveError::NeedsFieldExtension { degree: 0, bound })
    }
}

fn count_points(inner: &CurveInner) -> u64 {
    // reconstruct a lightweight handle to reuse y_solutions
    let c = Curve(Arc::new(CurveInner {
        field: inner.field.clone(),
        a1: inner.a1.clone(),
        a2: inner.a2.clone(),
        a3: inner.a3.clone(),
        a4: inner.a4.clone(),
        a6: inner.a6.clone(),
        count: 0,
        trace: 0,
        supersingular: false,
    }));
    let mut n = 1u64; // infinity
    for x in inner.field.elements() {
        n += c.y_solutions(&x).len() as u64;
    }
    n
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

impl CurvePoint {
    pub fn curve(&self) -> &Curve {
        match self {
            CurvePoint::Infinity(c) | CurvePoint::Affine(c, _, _) => c,
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, CurvePoint::Infinity(_))
    }

    pub fn xy(&self) -> Option<(&FieldElement, &FieldElement)> {
        match self {
            CurvePoint::Infinity(_) => None,
            CurvePoint::Affine(_, x, y) => Some((x, y)),
        }
    }

    pub fn is_on_curve(&self) -> bool {
        match self {
            CurvePoint::Infinity(_) => true,
            CurvePoint::Affine(c, x, y) => {
                let lhs = y.mul(y).add(&c.a1().mul(x).mul(y)).add(&c.a3().mul(y));
                let rhs = x
                    .mul(x)
                    .mul(x)
                    .add(&c.a2().mul(x).mul(x))
                    .add(&c.a4().mul(x))
                    .add(&c.a6());
                lhs == rhs
            }
        }
    }

    #[must_use]
    pub fn neg(&self) -> CurvePoint {
        match self {
            CurvePoint::Infinity(_) => self.clone(),
            CurvePoint::Affine(c, x, y) => {
                let ny = y.neg().sub(&c.a1().mul(x)).sub(c.a3());
                CurvePoint::Affine(c.clone(), x.clone(), ny)
            }
        }
    }

    /// Chord-tangent addition in long Weierstrass form.
    pub fn add(&self, other: &CurvePoint) -> Result<CurvePoint, CurveError> {
        if self.curve() != other.curve() {
            return Err(CurveError::MixedCurves);
        }
        let c = self.curve().clone();
        let (x1, y1) = match self.xy() {
            None => return Ok(other.clone()),
            Some(v) => v,
        };
        let (x2, y2) = match other.xy() {
            None => return Ok(self.clone()),
            Some(v) => v,
        };
        let (a1, a2, a3, a4, a6) = (c.a1(), c.a2(), c.a3(), c.a4(), c.a6());
        if x1 == x2 && *y2 == y1.neg().sub(&a1.mul(x1)).sub(a3) {
            return Ok(c.infinity());
        }
        let (lambda, nu) = if x1 == x2 {
            // tangent line
            let den = y1.scale(2).add(&a1.mul(x1)).add(a3);
            let num = x1
                .mul(x1)
                .scale(3)
                .add(&a2.mul(x1).scale(2))
                .add(a4)
                .sub(&a1.mul(y1));
            let nu_num = x1
                .mul(x1)
                .mul(x1)
                .neg()
                .add(&a4.mul(x1))
                .add(&a6.scale(2))
                .sub(&a3.mul(y1));
            (num.div(&den), nu_num.div(&den))
        } else {
            let den = x2.sub(x1);
            let lambda = y2.sub(y1).div(&den);
            let nu = y1.mul(x2).sub(&y2.mul(x1)).div(&den);
            (lambda, nu)
        };
        let x3 = lambda
            .mul(&lambda)
            .add(&a1.mul(&lambda))
            .sub(a2)
            .sub(x1)
            .sub(x2);
        let y3 = lambda.add(a1).mul(&x3).neg().sub(&nu).sub(a3);
        Ok(CurvePoint::Affine(c, x3, y3))
    }

    #[must_use]
    pub fn sub(&self, other: &CurvePoint) -> CurvePoint {
        self.add(&other.neg()).expect("same curve")
    }

    #[must_use]
    pub fn mul(&self, n: i64) -> CurvePoint {
        let mut base = if n < 0 { self.neg() } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = self.curve().infinity();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.add(&base).expect("same curve");
            }
            base = base.add(&base).expect("same curve");
            e >>= 1;
        }
        acc
    }

    /// Least n >= 1 with nP = infinity; divides the group order.
    pub fn order(&self) -> u64 {
        if self.is_infinity() {
            return 1;
        }
        let n = self.curve().point_count();
        let mut divisors: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
        divisors.sort();
        for d in divisors {
            if self.mul(d as i64).is_infinity() {
                return d;
            }
        }
        unreachable!("point order divides the group order")
    }

    pub fn base_change(&self, emb: &FieldEmbedding, target: &Curve) -> CurvePoint {
        match self {
            CurvePoint::Infinity(_) => target.infinity(),
            CurvePoint::Affine(_, x, y) => {
                CurvePoint::Affine(target.clone(), emb.map(x), emb.map(y))
            }
        }
    }

    /// Deterministic sort key (infinity first, then x-index, y-index).
    pub fn sort_key(&self) -> (u8, u64, u64) {
        match self {
            CurvePoint::Infinity(_) => (0, 0, 0),
            CurvePoint::Affine(_, x, y) => (1, x.index(), y.index()),
        }
    }
}

/// Explicit embedding of F_{p^k} into F_{p^(k*j)}, sending the generator to
/// the deterministically least root of the small modulus in the big field.
#[derive(Clone, Debug)]
pub struct FieldEmbedding {
    from: Field,
    to: Field,
    gen_image: FieldElement,
}

impl FieldEmbedding {
    pub fn identity(f: &Field) -> FieldEmbedding {
        FieldEmbedding { from: f.clone(), to: f.clone(), gen_image: f.gen() }
    }

    pub fn extension(from: &Field, j: usize, cap: u64) -> Result<FieldEmbedding, CurveError> {
        let to = Field::with_cap(from.p(), from.k() * j, cap)?;
        if j == 1 {
            return Ok(FieldEmbedding::identity(from));
        }
        let modulus = from.modulus().to_vec();
        for i in 0..to.order() {
            let z = to.element(i);
            let mut acc = to.zero();
            for &c in modulus.iter().rev() {
                acc = acc.mul(&z).add(&to.from_u64(c));
            }
            if acc.is_zero() {
                return Ok(FieldEmbedding { from: from.clone(), to, gen_image: z });
            }
        }
        unreachable!("the modulus splits in every extension of its splitting degree")
    }

    pub fn from(&self) -> &Field {
        &self.from
    }
    pub fn to(&self) -> &Field {
        &self.to
    }

    pub fn map(&self, e: &FieldElement) -> FieldElement {
        assert!(e.field() == &self.from);
        let mut acc = self.to.zero();
        for &c in e.coeffs().iter().rev() {
            acc = acc.mul(&self.gen_image).add(&self.to.from_u64(c));
        }
        acc
    }
}

/// Structural kind of an isogeny, as reported in JSON output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IsogenyKind {
    Frobenius,
    Velu,
    Dual,
    Isomorphism,
    Identity,
    Composite,
}

#[derive(Clone, Debug)]
enum Step {
    /// (x, y) -> (x^p, y^p) onto the coefficient-twisted curve.
    Frobenius { codomain: Curve },
    /// Separable quotient by an explicit finite kernel.
    Velu { kernel: Vec<CurvePoint>, codomain: Curve },
    /// Dual of `forward`, evaluated as T -> [deg forward] . (preimage of T).
    Dual { forward: Box<Isogeny> },
    /// Weierstrass isomorphism (u, r, s, t): x = u^2 x' + r, y = u^3 y' + s u^2 x' + t.
    Iso { u: FieldElement, r: FieldElement, s: FieldElement, t: FieldElement, codomain: Curve },
}

/// A finite map of elliptic curves, stored as a chain of evaluable steps
/// together with verified metadata.
#[derive(Clone, Debug)]
pub struct Isogeny {
    domain: Curve,
    codomain: Curve,
    degree: u64,
    insep_degree: u64,
    kind: IsogenyKind,
    steps: Vec<Step>,
    /// Explicit kernel points when known over the working field
    /// (empty for Frobenius, whose kernel is infinitesimal).
    kernel_points: Vec<CurvePoint>,
    dual_separable: bool,
}

impl Isogeny {
    pub fn identity(e: &Curve) -> Isogeny {
        Isogeny {
            domain: e.clone(),
            codomain: e.clone(),
            degree: 1,
            insep_degree: 1,
            kind: IsogenyKind::Identity,
            steps: vec![],
            kernel_points: vec![e.infinity()],
            dual_separable: true,
        }
    }

    /// The degree-p coordinate-wise Frobenius onto the twisted curve.
    /// The dual is separable exactly when the curve is ordinary.
    pub fn frobenius(e: &Curve) -> Isogeny {
        let codomain = e.frobenius_twist();
        Isogeny {
            domain: e.clone(),
            codomain: codomain.clone(),
            degree: e.field().p(),
            insep_degree: e.field().p(),
            kind: IsogenyKind::Frobenius,
            steps: vec![Step::Frobenius { codomain }],
            kernel_points: vec![],
            dual_separable: !e.is_supersingular(),
        }
    }

    /// Separable quotient of E by the cyclic subgroup generated by K,
    /// via transcription of the classical quotient formulas.
    pub fn velu(e: &Curve, k: &CurvePoint) -> Result<Isogeny, CurveError> {
        if k.curve() != e {
            return Err(CurveError::MixedCurves);
        }
        if k.is_infinity() {
            return Err(CurveError::OrderOne);
        }
        let n = k.order();
        let mut kernel: Vec<CurvePoint> = Vec::with_capacity(n as usize);
        let mut acc = e.infinity();
        for _ in 0..n {
            kernel.push(acc.clone());
            acc = acc.add(k)?;
        }
        debug_assert!(acc.is_infinity());
        let codomain = velu_codomain(e, &kernel)?;
        let p = e.field().p();
        let insep = 1u64;
        // dual composed with this map is [n]; its inseparable part is that of [n]
        let dual_insep = insep_degree_of_mul(e, n) / insep;
        Ok(Isogeny {
            domain: e.clone(),
            codomain: codomain.clone(),
            degree: n,
            insep_degree: insep,
            kind: IsogenyKind::Velu,
            steps: vec![Step::Velu { kernel: kernel.clone(), codomain }],
            kernel_points: kernel,
            dual_separable: dual_insep == 1 || p == 0,
        })
    }

    /// The dual of `forward`, as an evaluable map codomain -> domain.
    pub fn dual(forward: &Isogeny) -> Isogeny {
        let n = forward.degree;
        let insep_n = insep_degree_of_mul(&forward.domain, n);
        let insep = insep_n / forward.insep_degree;
        let kernel_points = forward
            .codomain
            .all_points()
            .into_iter()
            .filter(|t| {
                forward
                    .preimage_over_base(t)
                    .map(|p| p.mul(n as i64).is_infinity())
                    .unwrap_or(false)
            })
            .collect();
        Isogeny {
            domain: forward.codomain.clone(),
            codomain: forward.domain.clone(),
            degree: n,
            insep_degree: insep,
            kind: IsogenyKind::Dual,
            steps: vec![Step::Dual { forward: Box::new(forward.clone()) }],
            kernel_points,
            dual_separable: forward.insep_degree == 1,
        }
    }

    /// Weierstrass isomorphism found by parameter search, as a degree-1 map.
    pub fn isomorphism(from: &Curve, to: &Curve) -> Result<Isogeny, CurveError> {
        let (u, r, s, t) = find_isomorphism(from, to)?;
        Ok(Isogeny {
            domain: from.clone(),
            codomain: to.clone(),
            degree: 1,
            insep_degree: 1,
            kind: IsogenyKind::Isomorphism,
            steps: vec![Step::Iso { u, r, s, t, codomain: to.clone() }],
            kernel_points: vec![from.infinity()],
            dual_separable: true,
        })
    }

    /// Composition self then g (g after self).
    pub fn compose(&self, g: &Isogeny) -> Result<Isogeny, CurveError> {
        if self.codomain != g.domain {
            return Err(CurveError::NotComposable);
        }
        let mut steps = self.steps.clone();
        steps.extend(g.steps.iter().cloned());
        let degree = self.degree * g.degree;
        let insep = self.insep_degree * g.insep_degree;
        // kernel of the composite over the base field
        let kernel_points: Vec<CurvePoint> = self
            .domain
            .all_points()
            .into_iter()
            .filter(|pt| {
                self.eval(pt)
                    .ok()
                    .and_then(|m| g.eval(&m).ok())
                    .map(|im| im.is_infinity())
                    .unwrap_or(false)
            })
            .collect();
        let kind = if degree == 1 {
            IsogenyKind::Isomorphism
        } else {
            IsogenyKind::Composite
        };
        let dual_insep = insep_degree_of_mul(&self.domain, degree) / insep;
        Ok(Isogeny {
            domain: self.domain.clone(),
            codomain: g.codomain.clone(),
            degree,
            insep_degree: insep,
            kind,
            steps,
            kernel_points,
            dual_separable: dual_insep == 1,
        })
    }

    pub fn domain(&self) -> &Curve {
        &self.domain
    }
    pub fn codomain(&self) -> &Curve {
        &self.codomain
    }
    pub fn degree(&self) -> u64 {
        self.degree
    }
    pub fn kind(&self) -> IsogenyKind {
        self.kind
    }
    pub fn is_separable(&self) -> bool {
        self.insep_degree == 1
    }
    pub fn insep_degree(&self) -> u64 {
        self.insep_degree
    }
    pub fn dual_separable(&self) -> bool {
        self.dual_separable
    }
    /// Purely inseparable: no separable part at all.
    pub fn dual_purely_inseparable(&self) -> bool {
        // dual degree equals self degree; its inseparable part is insep([n])/insep(self)
        insep_degree_of_mul(&self.domain, self.degree) / self.insep_degree == self.degree
    }
    pub fn kernel_points(&self) -> &[CurvePoint] {
        &self.kernel_points
    }

    /// Evaluate at a rational point. Dual steps may require preimages that
    /// only exist over an extension; this surfaces as NeedsFieldExtension.
    pub fn eval(&self, pt: &CurvePoint) -> Result<CurvePoint, CurveError> {
        if pt.curve() != &self.domain {
            return Err(CurveError::MixedCurves);
        }
        let mut cur = pt.clone();
        for step in &self.steps {
            cur = eval_step(step, &cur)?;
        }
        Ok(cur)
    }

    fn preimage_over_base(&self, target: &CurvePoint) -> Option<CurvePoint> {
        self.domain
            .all_points()
            .into_iter()
            .find(|p| self.eval(p).map(|im| &im == target).unwrap_or(false))
    }

    /// All rational preimages of Q together with the multiplicity each
    /// carries (the inseparable degree). For separable maps the number of
    /// preimages over the algebraic closure equals the degree; if fewer are
    /// rational here, the minimal sufficient extension degree is reported.
    pub fn preimages(&self, q: &CurvePoint, bound: usize, cap: u64) -> Result<PreimageSet, CurveError> {
        if q.curve() != &self.codomain {
            return Err(CurveError::MixedCurves);
        }
        let expected = self.degree / self.insep_degree;
        let pts: Vec<CurvePoint> = self
            .domain
            .all_points()
            .into_iter()
            .filter(|p| self.eval(p).map(|im| &im == q).unwrap_or(false))
            .collect();
        if pts.len() as u64 == expected {
            return Ok(PreimageSet { points: pts, multiplicity: self.insep_degree });
        }
        // search the minimal extension where all preimages become rational
        for j in 2..=bound {
            let Ok(emb) = FieldEmbedding::extension(self.domain.field(), j, cap) else {
                break;
            };
            let big = self.base_change(&emb);
            let qb = q.base_change(&emb, &big.codomain);
            let pts: Vec<CurvePoint> = big
                .domain
                .all_points()
                .into_iter()
                .filter(|p| big.eval(p).map(|im| im == qb).unwrap_or(false))
                .collect();
            if pts.len() as u64 == expected {
                return Err(CurveError::NeedsFieldExtension { degree: j, bound });
            }
        }
        Err(CurveError::NeedsFieldExtension { degree: 0, bound })
    }

    /// Like `preimages` but transparently returns the base-changed data:
    /// (extension degree, base-changed isogeny, preimages over there).
    pub fn preimages_extended(
        &self,
        q: &CurvePoint,
        bound: usize,
        cap: u64,
    ) -> Result<(usize, Isogeny, PreimageSet), CurveError> {
        match self.preimages(q, bound, cap) {
            Ok(set) => Ok((1, self.clone(), set)),
            Err(CurveError::NeedsFieldExtension { degree, .. }) if degree > 0 => {
                let emb = FieldEmbedding::extension(self.domain.field(), degree, cap)?;
                let big = self.base_change(&emb);
                let qb = q.base_change(&emb, &big.codomain);
                let set = big.preimages(&qb, 1, cap)?;
                Ok((degree, big, set))
            }
            Err(e) => Err(e),
        }
    }

    pub fn base_change(&self, emb: &FieldEmbedding) -> Isogeny {
        let domain = self.domain.base_change(emb);
        let codomain = self.codomain.base_change(emb);
        let steps = self
            .steps
            .iter()
            .map(|s| match s {
                Step::Frobenius { codomain } => {
                    Step::Frobenius { codomain: codomain.base_change(emb) }
                }
                Step::Velu { kernel, codomain } => {
                    let cod = codomain.base_change(emb);
                    let dom_curve = kernel[0].curve().base_change(emb);
                    Step::Velu {
                        kernel: kernel.iter().map(|k| k.base_change(emb, &dom_curve)).collect(),
                        codomain: cod,
                    }
                }
                Step::Dual { forward } => Step::Dual { forward: Box::new(forward.base_change(emb)) },
                Step::Iso { u, r, s, t, codomain } => Step::Iso {
                    u: emb.map(u),
                    r: emb.map(r),
                    s: emb.map(s),
                    t: emb.map(t),
                    codomain: codomain.base_change(emb),
                },
            })
            .collect();
        let kernel_points = self
            .kernel_points
            .iter()
            .map(|k| k.base_change(emb, &domain))
            .collect();
        Isogeny {
            domain,
            codomain,
            degree: self.degree,
            insep_degree: self.insep_degree,
            kind: self.kind,
            steps,
            kernel_points,
            dual_separable: self.dual_separable,
        }
    }
}

/// Inseparable degree of multiplication by n on E.
fn insep_degree_of_mul(e: &Curve, n: u64) -> u64 {
    let p = e.field().p();
    let mut v = 0u32;
    let mut m = n;
    while m % p == 0 {
        m /= p;
        v += 1;
    }
    if e.is_supersingular() {
        p.pow(2 * v)
    } else {
        p.pow(v)
    }
}

fn eval_step(step: &Step, pt: &CurvePoint) -> Result<CurvePoint, CurveError> {
    match step {
        Step::Frobenius { codomain } => Ok(match pt.xy() {
            None => codomain.infinity(),
            Some((x, y)) => CurvePoint::Affine(codomain.clone(), x.frobenius(), y.frobenius()),
        }),
        Step::Velu { kernel, codomain } => {
            if kernel.contains(pt) {
                return Ok(codomain.infinity());
            }
            let (x, y) = pt.xy().expect("non-kernel point is affine");
            let mut xx = x.clone();
            let mut yy = y.clone();
            for q in kernel {
                if q.is_infinity() {
                    continue;
                }
                let (xq, yq) = q.xy().unwrap();
                let s = pt.add(q)?;
                let (xs, ys) = s.xy().expect("P + Q affine for P outside the kernel");
                xx = xx.add(&xs.sub(xq));
                yy = yy.add(&ys.sub(yq));
            }
            Ok(CurvePoint::Affine(codomain.clone(), xx, yy))
        }
        Step::Dual { forward } => {
            if pt.is_infinity() {
                return Ok(forward.domain().infinity());
            }
            let pre = forward
                .preimage_over_base(pt)
                .ok_or(CurveError::NeedsFieldExtension { degree: 0, bound: 0 })?;
            Ok(pre.mul(forward.degree() as i64))
        }
        Step::Iso { u, r, s, t, codomain } => Ok(match pt.xy() {
            None => codomain.infinity(),
            Some((x, y)) => {
                let u2 = u.mul(u);
                let u3 = u2.mul(u);
                let xr = x.sub(r);
                let xp = xr.div(&u2);
                let yp = y.sub(t).sub(&s.mul(&xr)).div(&u3);
                CurvePoint::Affine(codomain.clone(), xp, yp)
            }
        }),
    }
}

/// Codomain of the quotient by an explicit kernel, long Weierstrass form.
fn velu_codomain(e: &Curve, kernel: &[CurvePoint]) -> Result<Curve, CurveError> {
    let f = e.field();
    let (a1, a2, a3, a4, a6) = (e.a1(), e.a2(), e.a3(), e.a4(), e.a6());
    // one representative per {Q, -Q} pair; 2-torsion included once
    let mut reps: Vec<&CurvePoint> = Vec::new();
    for q in kernel {
        if q.is_infinity() {
            continue;
        }
        if reps.iter().any(|r| **r == q.neg()) {
            continue;
        }
        reps.push(q);
    }
    let mut t_acc = f.zero();
    let mut w_acc = f.zero();
    for q in reps {
        let (xq, yq) = q.xy().unwrap();
        let gx = xq
            .mul(xq)
            .scale(3)
            .add(&a2.mul(xq).scale(2))
            .add(a4)
            .sub(&a1.mul(yq));
        let gy = yq.scale(-2).sub(&a1.mul(xq)).sub(a3);
        let is_two_torsion = *q == q.neg();
        let tq = if is_two_torsion {
            gx.clone()
        } else {
            gx.scale(2).sub(&a1.mul(&gy))
        };
        let uq = gy.mul(&gy);
        t_acc = t_acc.add(&tq);
        w_acc = w_acc.add(&uq).add(&xq.mul(&tq));
    }
    let b2 = a1.mul(a1).add(&a2.scale(4));
    let a4_new = a4.sub(&t_acc.scale(5));
    let a6_new = a6.sub(&b2.mul(&t_acc)).sub(&w_acc.scale(7));
    Curve::new(f, a1.clone(), a2.clone(), a3.clone(), a4_new, a6_new)
}

/// Rational preimages with shared multiplicity (the inseparable degree).
#[derive(Debug, Clone)]
pub struct PreimageSet {
    pub points: Vec<CurvePoint>,
    pub multiplicity: u64,
}

/// Search for a Weierstrass isomorphism (u, r, s, t) from `from` onto `to`.
/// Quadratic in the field size: for each (u, r) the remaining parameters
/// satisfy linear or Artin–Schreier equations and are solved exactly.
fn find_isomorphism(
    from: &Curve,
    to: &Curve,
) -> Result<(FieldElement, FieldElement, FieldElement, FieldElement), CurveError> {
    if from.field() != to.field() {
        return Err(CurveError::MixedCurves);
    }
    let f = from.field().clone();
    let p = f.p();
    let (a1, a2, a3, a4, a6) = (from.a1(), from.a2(), from.a3(), from.a4(), from.a6());
    let (b1, b2, b3, b4, b6) = (to.a1(), to.a2(), to.a3(), to.a4(), to.a6());
    for u in f.elements().filter(|u| !u.is_zero()) {
        let u2 = u.mul(&u);
        let u3 = u2.mul(&u);
        let u4 = u2.mul(&u2);
        let u6 = u3.mul(&u3);
        for r in f.elements() {
            let s_candidates: Vec<FieldElement> = if p != 2 {
                vec![u.mul(b1).sub(a1).div(&f.from_u64(2))]
            } else {
                // u b1 = a1 (+ 2s vanishes): consistency, then s from the a2 relation
                if u.mul(b1) != *a1 {
                    continue;
                }
                // s^2 + a1 s + (a2 + r - u^2 b2) = 0
                let c = a2.add(&r).sub(&u2.mul(b2));
                if a1.is_zero() {
                    vec![c.frobenius_inv()] // s^2 = c
                } else {
                    let d = c.div(&a1.mul(a1));
                    match f.solve_artin_schreier(&d) {
                        Some((z0, z1)) => vec![a1.mul(&z0), a1.mul(&z1)],
                        None => continue,
                    }
                }
            };
            for s in s_candidates {
                let t_candidates: Vec<FieldElement> = if p != 2 {
                    vec![u3.mul(b3).sub(a3).sub(&r.mul(a1)).div(&f.from_u64(2))]
                } else if !a1.is_zero() {
                    // t a1 = u^4 b4 + a4 + s a3 + r s a1 + r^2
                    let rhs = u4
                        .mul(b4)
                        .add(a4)
                        .add(&s.mul(a3))
                        .add(&r.mul(&s).mul(a1))
                        .add(&r.mul(&r));
                    vec![rhs.div(a1)]
                } else {
                    // t^2 + a3 t = a6 + r a4 + r^2 a2 + r^3 + u^6 b6
                    let c = a6
                        .add(&r.mul(a4))
                        .add(&r.mul(&r).mul(a2))
                        .add(&r.mul(&r).mul(&r))
                        .add(&u6.mul(b6));
                    if a3.is_zero() {
                        vec![c.frobenius_inv()]
                    } else {
                        let d = c.div(&a3.mul(a3));
                        match f.solve_artin_schreier(&d) {
                            Some((z0, z1)) => vec![a3.mul(&z0), a3.mul(&z1)],
                            None => continue,
                        }
                    }
                };
                for t in t_candidates {
                    if iso_relations_hold(from, to, &u, &r, &s, &t) {
                        return Ok((u, r, s, t));
                    }
                }
            }
        }
    }
    Err(CurveError::NoIsomorphism)
}

fn iso_relations_hold(
    from: &Curve,
    to: &Curve,
    u: &FieldElement,
    r: &FieldElement,
    s: &FieldElement,
    t: &FieldElement,
) -> bool {
    let (a1, a2, a3, a4, a6) = (from.a1(), from.a2(), from.a3(), from.a4(), from.a6());
    let u2 = u.mul(u);
    let u3 = u2.mul(u);
    let u4 = u2.mul(&u2);
    let u6 = u3.mul(&u3);
    let e1 = a1.add(&s.scale(2));
    let e2 = a2.sub(&s.mul(a1)).add(&r.scale(3)).sub(&s.mul(s));
    let e3 = a3.add(&r.mul(a1)).add(&t.scale(2));
    let e4 = a4
        .sub(&s.mul(a3))
        .add(&r.mul(a2).scale(2))
        .sub(&t.add(&r.mul(s)).mul(a1))
        .add(&r.mul(r).scale(3))
        .sub(&s.mul(t).scale(2));
    let e6 = a6
        .add(&r.mul(a4))
        .add(&r.mul(r).mul(a2))
        .add(&r.mul(r).mul(r))
        .sub(&t.mul(a3))
        .sub(&t.mul(t))
        .sub(&r.mul(t).mul(a1));
    u.mul(to.a1()) == e1
        && u2.mul(to.a2()) == e2
        && u3.mul(to.a3()) == e3
        && u4.mul(to.a4()) == e4
        && u6.mul(to.a6()) == e6
}
