//! Symbolic calculus of vector bundles on an elliptic curve, following the
//! classification of indecomposables: line classes, the self-dual towers
//! E_{r,0}, and the degree-one rank-two extensions E_Q, together with their
//! cohomology, symmetric powers, and behaviour under isogenies.
//!
//! Bundles are normalized formal sums, not cocycle data; every cohomology
//! number comes from the classification rules, and every pullback rule
//! checks its hypotheses against the isogeny's verified metadata before
//! firing. Degree-zero line classes are moved around by exact divisor
//! arithmetic on curve points.

use crate::curve::{Curve, CurveError, CurvePoint, Isogeny, IsogenyKind};
use crate::field::FieldElement;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BundleError {
    #[error("UnknownOrder: symbolic line class has no designated order")]
    UnknownOrder,
    #[error("UnsupportedShape: {0}")]
    UnsupportedShape(String),
    #[error("UnsupportedExponent: Sym^{m} of the rank-2 self-dual bundle with {m} > p = {p}")]
    UnsupportedExponent { m: u64, p: u64 },
    #[error("RuleHypothesisUnmet: {0}")]
    RuleHypothesisUnmet(String),
    #[error("UnsupportedDegree: pushforward with neither an inseparable-dual prime case nor a separable dual")]
    UnsupportedDegree,
    #[error("InfiniteOrder: cannot kill a line class of infinite order")]
    InfiniteOrder,
    #[error("MixedContexts: bundle and map live over different curves")]
    MixedContexts,
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Finite or infinite order of a line class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineOrder {
    Finite(u64),
    Infinite,
}

/// Symbolic stand-in for an elliptic curve, for statements that are not
/// reachable over a finite field (characteristic zero, infinite order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicCurve {
    p: u64,
    ordinary: Option<bool>,
    designated_order: Option<LineOrder>,
}

impl SymbolicCurve {
    /// p = 0 takes no ordinary flag; p > 0 requires one.
    pub fn new(p: u64, ordinary: Option<bool>, designated_order: Option<LineOrder>) -> SymbolicCurve {
        assert_eq!(p == 0, ordinary.is_none(), "ordinary flag is n/a exactly for p = 0");
        SymbolicCurve { p, ordinary, designated_order }
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn ordinary(&self) -> Option<bool> {
        self.ordinary
    }
    pub fn designated_order(&self) -> Option<LineOrder> {
        self.designated_order
    }
}

/// The base of a bundle expression: a concrete curve or a symbolic handle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CurveCtx {
    Concrete(Curve),
    Symbolic(SymbolicCurve),
}

impl CurveCtx {
    pub fn p(&self) -> u64 {
        match self {
            CurveCtx::Concrete(c) => c.field().p(),
            CurveCtx::Symbolic(s) => s.p,
        }
    }

    pub fn curve(&self) -> Option<&Curve> {
        match self {
            CurveCtx::Concrete(c) => Some(c),
            CurveCtx::Symbolic(_) => None,
        }
    }
}

/// Degree-zero datum of a line class: a concrete point of the curve, or an
/// integer multiple of the designated symbolic class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinePart {
    Concrete(CurvePoint),
    Symbolic(i64),
}

/// A line bundle written as (class of P - O) twisted by `shift` copies of O,
/// so the degree is exactly `shift`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineClass {
    pub part: LinePart,
    pub shift: i64,
}

impl LineClass {
    pub fn degree(&self) -> i64 {
        self.shift
    }

    fn tensor(&self, other: &LineClass) -> LineClass {
        let part = match (&self.part, &other.part) {
            (LinePart::Concrete(a), LinePart::Concrete(b)) => {
                LinePart::Concrete(a.add(b).expect("same curve"))
            }
            (LinePart::Symbolic(a), LinePart::Symbolic(b)) => LinePart::Symbolic(a + b),
            _ => panic!("mixed concrete/symbolic line parts"),
        };
        LineClass { part, shift: self.shift + other.shift }
    }

    fn power(&self, n: i64) -> LineClass {
        let part = match &self.part {
            LinePart::Concrete(p) => LinePart::Concrete(p.mul(n)),
            LinePart::Symbolic(i) => LinePart::Symbolic(i * n),
        };
        LineClass { part, shift: self.shift * n }
    }

    fn inverse(&self) -> LineClass {
        self.power(-1)
    }

    /// Order of a degree-zero class; None means infinite (symbolic only).
    pub fn order(&self, ctx: &CurveCtx) -> Result<Option<u64>, BundleError> {
        assert_eq!(self.shift, 0, "order only makes sense in degree zero");
        match &self.part {
            LinePart::Concrete(p) => Ok(Some(p.order())),
            LinePart::Symbolic(i) => {
                let designated = match ctx {
                    CurveCtx::Symbolic(s) => s.designated_order.ok_or(BundleError::UnknownOrder)?,
                    CurveCtx::Concrete(_) => return Err(BundleError::UnknownOrder),
                };
                match designated {
                    LineOrder::Infinite => Ok(if *i == 0 { Some(1) } else { None }),
                    LineOrder::Finite(m) => {
                        let g = gcd_i(m, i.unsigned_abs());
                        Ok(Some(m / g))
                    }
                }
            }
        }
    }

    pub fn is_trivial(&self, ctx: &CurveCtx) -> Result<bool, BundleError> {
        if self.shift != 0 {
            return Ok(false);
        }
        Ok(self.order(ctx)? == Some(1))
    }

    fn sort_key(&self) -> (i64, u8, u64, u64, i64) {
        match &self.part {
            LinePart::Concrete(p) => {
                let (a, b, c) = p.sort_key();
                (self.shift, a, b, c, 0)
            }
            LinePart::Symbolic(i) => (self.shift, 2, 0, 0, *i),
        }
    }
}

fn gcd_i(a: u64, b: u64) -> u64 {
    if b == 0 {
        a.max(1)
    } else {
        gcd_i(b, a % b)
    }
}

/// A normalized indecomposable summand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Summand {
    /// A line bundle.
    Line(LineClass),
    /// E_{r,0} twisted by a line class (trivial class = E_{r,0} itself).
    AtiyahTwist { rank: u64, cls: LineClass },
    /// E_Q twisted by a line class.
    ExtTwist { q: LinePart, cls: LineClass },
}

impl Summand {
    pub fn rank(&self) -> u64 {
        match self {
            Summand::Line(_) => 1,
            Summand::AtiyahTwist { rank, .. } => *rank,
            Summand::ExtTwist { .. } => 2,
        }
    }

    pub fn degree(&self) -> i64 {
        match self {
            Summand::Line(c) => c.degree(),
            Summand::AtiyahTwist { rank, cls } => *rank as i64 * cls.degree(),
            Summand::ExtTwist { cls, .. } => 1 + 2 * cls.degree(),
        }
    }

    fn tensor_line(&self, lc: &LineClass) -> Summand {
        match self {
            Summand::Line(c) => Summand::Line(c.tensor(lc)),
            Summand::AtiyahTwist { rank, cls } => {
                Summand::AtiyahTwist { rank: *rank, cls: cls.tensor(lc) }
            }
            Summand::ExtTwist { q, cls } => {
                Summand::ExtTwist { q: q.clone(), cls: cls.tensor(lc) }
            }
        }
    }

    fn sort_key(&self) -> (u8, u64, (i64, u8, u64, u64, i64), (u8, u64, u64, i64)) {
        let q_key = match self {
            Summand::ExtTwist { q: LinePart::Concrete(p), .. } => {
                let (a, b, c) = p.sort_key();
                (a, b, c, 0)
            }
            Summand::ExtTwist { q: LinePart::Symbolic(i), .. } => (2, 0, 0, *i),
            _ => (0, 0, 0, 0),
        };
        match self {
            Summand::Line(c) => (0, 1, c.sort_key(), q_key),
            Summand::AtiyahTwist { rank, cls } => (1, *rank, cls.sort_key(), q_key),
            Summand::ExtTwist { cls, .. } => (2, 2, cls.sort_key(), q_key),
        }
    }
}

/// A normalized direct sum of indecomposable summands over a fixed base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleExpr {
    ctx: CurveCtx,
    summands: Vec<Summand>,
}

impl BundleExpr {
    fn normalized(ctx: CurveCtx, mut summands: Vec<Summand>) -> BundleExpr {
        summands.sort_by_key(|s| s.sort_key());
        BundleExpr { ctx, summands }
    }

    /// The unit O_E.
    pub fn structure_sheaf(ctx: CurveCtx) -> BundleExpr {
        let part = match &ctx {
            CurveCtx::Concrete(c) => LinePart::Concrete(c.infinity()),
            CurveCtx::Symbolic(_) => LinePart::Symbolic(0),
        };
        BundleExpr::normalized(ctx, vec![Summand::Line(LineClass { part, shift: 0 })])
    }

    /// Line bundle of class (P - O) + shift * O.
    pub fn line(ctx: CurveCtx, part: LinePart, shift: i64) -> BundleExpr {
        check_part(&ctx, &part);
        BundleExpr::normalized(ctx, vec![Summand::Line(LineClass { part, shift })])
    }

    /// E_{r,0}.
    pub fn atiyah_triv(ctx: CurveCtx, rank: u64) -> BundleExpr {
        assert!(rank >= 1);
        let cls = trivial_class(&ctx);
        BundleExpr::normalized(ctx, vec![Summand::AtiyahTwist { rank, cls }])
    }

    /// E_Q.
    pub fn ext_q(ctx: CurveCtx, q: LinePart) -> BundleExpr {
        check_part(&ctx, &q);
        let cls = trivial_class(&ctx);
        BundleExpr::normalized(ctx, vec![Summand::ExtTwist { q, cls }])
    }

    pub fn direct_sum(parts: Vec<BundleExpr>) -> BundleExpr {
        assert!(!parts.is_empty());
        let ctx = parts[0].ctx.clone();
        let mut summands = Vec::new();
        for p in parts {
            assert!(p.ctx == ctx, "direct sum over mixed bases");
            summands.extend(p.summands);
        }
        BundleExpr::normalized(ctx, summands)
    }

    pub fn tensor_line(&self, lc: &LineClass) -> BundleExpr {
        BundleExpr::normalized(
            self.ctx.clone(),
            self.summands.iter().map(|s| s.tensor_line(lc)).collect(),
        )
    }

    pub fn ctx(&self) -> &CurveCtx {
        &self.ctx
    }

    pub fn summands(&self) -> &[Summand] {
        &self.summands
    }

    pub fn rank(&self) -> u64 {
        self.summands.iter().map(|s| s.rank()).sum()
    }

    pub fn degree(&self) -> i64 {
        self.summands.iter().map(|s| s.degree()).sum()
    }

    pub fn is_indecomposable(&self) -> bool {
        self.summands.len() == 1 && !matches!(self.summands[0], Summand::Line(_))
            || (self.summands.len() == 1 && self.rank() == 1)
    }

    /// O_E as a summand test: a single trivial line class.
    pub fn is_trivial_line(&self) -> Result<bool, BundleError> {
        if self.summands.len() != 1 {
            return Ok(false);
        }
        match &self.summands[0] {
            Summand::Line(c) => c.is_trivial(&self.ctx),
            _ => Ok(false),
        }
    }

    /// Fully split with every line class trivial (e.g. O + O after pullback).
    pub fn is_trivial_sum(&self) -> Result<bool, BundleError> {
        for s in &self.summands {
            match s {
                Summand::Line(c) => {
                    if !c.is_trivial(&self.ctx)? {
                        return Ok(false);
                    }
                }
                _ => return Ok(false),
            }
        }
        Ok(true)
    }

    /// Dual bundle for the degree-zero shapes (the E_{r,0} tower is self-dual).
    pub fn dual(&self) -> Result<BundleExpr, BundleError> {
        let mut out = Vec::new();
        for s in &self.summands {
            match s {
                Summand::Line(c) => out.push(Summand::Line(c.inverse())),
                Summand::AtiyahTwist { rank, cls } => {
                    out.push(Summand::AtiyahTwist { rank: *rank, cls: cls.inverse() })
                }
                Summand::ExtTwist { .. } => {
                    return Err(BundleError::UnsupportedShape(
                        "dual of the degree-one extension is outside the calculus".into(),
                    ))
                }
            }
        }
        Ok(BundleExpr::normalized(self.ctx.clone(), out))
    }

    /// (h0, h1) from the classification rules plus Riemann–Roch.
    pub fn cohomology(&self) -> Result<(u64, u64), BundleError> {
        let mut h0 = 0u64;
        let mut h1 = 0u64;
        for s in &self.summands {
            let (a, b) = match s {
                Summand::Line(c) => {
                    let d = c.degree();
                    if d > 0 {
                        (d as u64, 0)
                    } else if d < 0 {
                        (0, (-d) as u64)
                    } else if c.is_trivial(&self.ctx)? {
                        (1, 1)
                    } else {
                        (0, 0)
                    }
                }
                Summand::AtiyahTwist { rank, cls } => {
                    let d = cls.degree();
                    if d > 0 {
                        ((*rank as i64 * d) as u64, 0)
                    } else if d < 0 {
                        (0, (*rank as i64 * -d) as u64)
                    } else if cls.is_trivial(&self.ctx)? {
                        (1, 1)
                    } else {
                        (0, 0)
                    }
                }
                Summand::ExtTwist { cls, .. } => {
                    let d = 1 + 2 * cls.degree();
                    if d > 0 {
                        (d as u64, 0)
                    } else {
                        (0, (-d) as u64)
                    }
                }
            };
            h0 += a;
            h1 += b;
        }
        Ok((h0, h1))
    }

    /// Symmetric power of the two supported rank-2 shapes.
    pub fn sym_power(&self, m: u64) -> Result<BundleExpr, BundleError> {
        if m == 0 {
            return Ok(BundleExpr::structure_sheaf(self.ctx.clone()));
        }
        match self.summands.as_slice() {
            [Summand::Line(c1), Summand::Line(c2)] => {
                let parts = (0..=m)
                    .map(|i| {
                        let cls = c1.power((m - i) as i64).tensor(&c2.power(i as i64));
                        BundleExpr::normalized(self.ctx.clone(), vec![Summand::Line(cls)])
                    })
                    .collect();
                Ok(BundleExpr::direct_sum(parts))
            }
            [Summand::AtiyahTwist { rank: 2, cls }] => {
                let p = self.ctx.p();
                let twist = cls.power(m as i64);
                if p == 0 || m < p {
                    Ok(BundleExpr::normalized(
                        self.ctx.clone(),
                        vec![Summand::AtiyahTwist { rank: m + 1, cls: twist }],
                    ))
                } else if m == p {
                    Ok(BundleExpr::normalized(
                        self.ctx.clone(),
                        vec![
                            Summand::Line(twist.clone()),
                            Summand::AtiyahTwist { rank: p, cls: twist },
                        ],
                    ))
                } else {
                    Err(BundleError::UnsupportedExponent { m, p })
                }
            }
            _ => Err(BundleError::UnsupportedShape(
                "symmetric powers are supported for rank-2 split or self-dual shapes".into(),
            )),
        }
    }

    /// Base change of a concrete-based bundle along a field embedding onto
    /// the already-embedded curve.
    pub fn base_change(&self, emb: &crate::curve::FieldEmbedding, target: &Curve) -> BundleExpr {
        let old = self.ctx.curve().expect("base change needs a concrete base");
        assert!(old.field() == emb.from());
        let map_part = |part: &LinePart| match part {
            LinePart::Concrete(p) => LinePart::Concrete(p.base_change(emb, target)),
            LinePart::Symbolic(i) => LinePart::Symbolic(*i),
        };
        let map_cls = |cls: &LineClass| LineClass { part: map_part(&cls.part), shift: cls.shift };
        let summands = self
            .summands
            .iter()
            .map(|s| match s {
                Summand::Line(c) => Summand::Line(map_cls(c)),
                Summand::AtiyahTwist { rank, cls } => {
                    Summand::AtiyahTwist { rank: *rank, cls: map_cls(cls) }
                }
                Summand::ExtTwist { q, cls } => {
                    Summand::ExtTwist { q: map_part(q), cls: map_cls(cls) }
                }
            })
            .collect();
        BundleExpr::normalized(CurveCtx::Concrete(target.clone()), summands)
    }

    /// Stable JSON rendering of the normalized expression.
    pub fn to_json(&self) -> Value {
        let summands: Vec<Value> = self
            .summands
            .iter()
            .map(|s| match s {
                Summand::Line(c) => json!({
                    "kind": "line",
                    "degree": c.degree(),
                    "part": part_json(&c.part),
                    "shift": c.shift,
                }),
                Summand::AtiyahTwist { rank, cls } => json!({
                    "kind": "atiyah",
                    "rank": rank,
                    "twist": part_json(&cls.part),
                    "shift": cls.shift,
                }),
                Summand::ExtTwist { q, cls } => json!({
                    "kind": "ext",
                    "q": part_json(q),
                    "twist": part_json(&cls.part),
                    "shift": cls.shift,
                }),
            })
            .collect();
        json!({
            "rank": self.rank(),
            "degree": self.degree(),
            "summands": summands,
        })
    }
}

fn part_json(part: &LinePart) -> Value {
    match part {
        LinePart::Concrete(p) => match p.xy() {
            None => json!("infinity"),
            Some((x, y)) => json!({ "x": x.coeffs(), "y": y.coeffs() }),
        },
        LinePart::Symbolic(i) => json!({ "symbolic_multiple": i }),
    }
}

fn trivial_class(ctx: &CurveCtx) -> LineClass {
    let part = match ctx {
        CurveCtx::Concrete(c) => LinePart::Concrete(c.infinity()),
        CurveCtx::Symbolic(_) => LinePart::Symbolic(0),
    };
    LineClass { part, shift: 0 }
}

fn check_part(ctx: &CurveCtx, part: &LinePart) {
    match (ctx, part) {
        (CurveCtx::Concrete(c), LinePart::Concrete(p)) => {
            assert!(p.curve() == c, "point is not on the base curve")
        }
        (CurveCtx::Symbolic(_), LinePart::Symbolic(_)) => {}
        _ => panic!("line part does not match the base context"),
    }
}

/// Pull back a bundle along an isogeny into the domain curve.
///
/// Line classes move by divisor arithmetic. The nontrivial indecomposables
/// move by the three verified rules: trivialization of the rank-2 self-dual
/// bundle along a degree-p map with purely inseparable dual, the Frobenius
/// image of E_Q in characteristic 2, and the splitting of E_Q along a
/// separable degree-2 map (with the order-2 difference post-verified).
/// Anything else is refused rather than guessed.
pub fn pullback(
    bundle: &BundleExpr,
    phi: &Isogeny,
    bound: usize,
    cap: u64,
) -> Result<BundleExpr, BundleError> {
    let codomain = bundle
        .ctx
        .curve()
        .ok_or_else(|| BundleError::RuleHypothesisUnmet("pullback needs a concrete base".into()))?;
    if codomain != phi.codomain() {
        return Err(BundleError::MixedContexts);
    }
    let dom_ctx = CurveCtx::Concrete(phi.domain().clone());
    let p = phi.domain().field().p();
    let mut out: Vec<Summand> = Vec::new();
    for s in &bundle.summands {
        match s {
            Summand::Line(c) => {
                out.push(Summand::Line(pullback_line(c, phi, bound, cap)?));
            }
            Summand::AtiyahTwist { rank: 2, cls } => {
                if phi.degree() == p && phi.dual_purely_inseparable() {
                    let pulled = pullback_line(cls, phi, bound, cap)?;
                    out.push(Summand::Line(pulled.clone()));
                    out.push(Summand::Line(pulled));
                } else {
                    return Err(BundleError::RuleHypothesisUnmet(format!(
                        "rank-2 self-dual pullback needs degree p = {} with purely inseparable dual; got degree {} (dual separable: {})",
                        p,
                        phi.degree(),
                        phi.dual_separable()
                    )));
                }
            }
            Summand::ExtTwist { q, cls } => {
                let qp = match q {
                    LinePart::Concrete(pt) => pt,
                    LinePart::Symbolic(_) => {
                        return Err(BundleError::RuleHypothesisUnmet(
                            "pullback of a symbolic extension point".into(),
                        ))
                    }
                };
                let twist = pullback_line(cls, phi, bound, cap)?;
                if p == 2 && phi.kind() == IsogenyKind::Frobenius {
                    let pre = phi.preimages(qp, bound, cap)?;
                    let qprime = pre.points[0].clone();
                    let base = LineClass { part: LinePart::Concrete(qprime), shift: 1 };
                    out.push(Summand::AtiyahTwist { rank: 2, cls: base.tensor(&twist) });
                } else if phi.is_separable() && phi.degree() == 2 {
                    let pre = phi.preimages(qp, bound, cap)?;
                    let (q1, q2) = (pre.points[0].clone(), pre.points[1].clone());
                    let diff = q1.sub(&q2);
                    if diff.order() != 2 {
                        return Err(BundleError::RuleHypothesisUnmet(
                            "preimage difference does not have order 2".into(),
                        ));
                    }
                    out.push(Summand::Line(
                        LineClass { part: LinePart::Concrete(q1), shift: 1 }.tensor(&twist),
                    ));
                    out.push(Summand::Line(
                        LineClass { part: LinePart::Concrete(q2), shift: 1 }.tensor(&twist),
                    ));
                } else {
                    return Err(BundleError::RuleHypothesisUnmet(
                        "extension pullback needs Frobenius in characteristic 2 or a separable degree-2 map"
                            .into(),
                    ));
                }
            }
            Summand::AtiyahTwist { rank, .. } => {
                return Err(BundleError::UnsupportedShape(format!(
                    "no pullback rule for the rank-{rank} self-dual twist"
                )));
            }
        }
    }
    Ok(BundleExpr::normalized(dom_ctx, out))
}

/// Divisor-arithmetic pullback of a line class:
/// phi^*(P + (n-1) O) normalizes to (group sum) + (n deg - 1) O.
fn pullback_line(
    c: &LineClass,
    phi: &Isogeny,
    bound: usize,
    cap: u64,
) -> Result<LineClass, BundleError> {
    let pt = match &c.part {
        LinePart::Concrete(pt) => pt,
        LinePart::Symbolic(_) => {
            return Err(BundleError::RuleHypothesisUnmet(
                "divisor pullback of a symbolic class".into(),
            ))
        }
    };
    let domain = phi.domain();
    let sigma_p = group_sum_of_preimages(phi, pt, bound, cap)?;
    let sigma_o = group_sum_of_preimages(phi, &phi.codomain().infinity(), bound, cap)?;
    let part = sigma_p.add(&sigma_o.mul(c.shift - 1)).expect("same curve");
    let _ = domain;
    Ok(LineClass {
        part: LinePart::Concrete(part),
        shift: c.shift * phi.degree() as i64,
    })
}

fn group_sum_of_preimages(
    phi: &Isogeny,
    q: &CurvePoint,
    bound: usize,
    cap: u64,
) -> Result<CurvePoint, BundleError> {
    let set = phi.preimages(q, bound, cap)?;
    let mut acc = phi.domain().infinity();
    for p in &set.points {
        acc = acc.add(p).expect("same curve");
    }
    Ok(acc.mul(set.multiplicity as i64))
}

/// Result of a pushforward: the bundle lives over the codomain, base-changed
/// to the reported extension degree when the dual kernel needed one.
#[derive(Debug, Clone)]
pub struct Pushforward {
    pub bundle: BundleExpr,
    pub extension_degree: usize,
}

/// Pushforward of the structure sheaf along an isogeny: the rank-n tower
/// E_{n,0} when the degree is p and the dual is purely inseparable, and the
/// direct sum of the line classes killed by pullback (the dual kernel) when
/// the dual is separable.
pub fn pushforward_structure(phi: &Isogeny, bound: usize, cap: u64) -> Result<Pushforward, BundleError> {
    let e = phi.codomain().clone();
    if phi.degree() == 1 {
        return Ok(Pushforward {
            bundle: BundleExpr::structure_sheaf(CurveCtx::Concrete(e)),
            extension_degree: 1,
        });
    }
    let p = e.field().p();
    if phi.degree() == p && phi.dual_purely_inseparable() {
        return Ok(Pushforward {
            bundle: BundleExpr::atiyah_triv(CurveCtx::Concrete(e), p),
            extension_degree: 1,
        });
    }
    if !phi.dual_separable() {
        return Err(BundleError::UnsupportedDegree);
    }
    let n = phi.degree();
    for j in 1..=bound {
        let (big_phi, jdeg) = if j == 1 {
            (phi.clone(), 1usize)
        } else {
            let emb = crate::curve::FieldEmbedding::extension(phi.domain().field(), j, cap)?;
            (phi.base_change(&emb), j)
        };
        // image of the n-torsion of the domain under phi = kernel of the dual
        let mut images: Vec<CurvePoint> = Vec::new();
        for pt in big_phi.domain().all_points() {
            if !pt.mul(n as i64).is_infinity() {
                continue;
            }
            if let Ok(im) = big_phi.eval(&pt) {
                if !images.contains(&im) {
                    images.push(im);
                }
            }
        }
        if images.len() as u64 == n {
            images.sort_by_key(|p| p.sort_key());
            let ctx = CurveCtx::Concrete(big_phi.codomain().clone());
            let summands = images
                .into_iter()
                .map(|pt| Summand::Line(LineClass { part: LinePart::Concrete(pt), shift: 0 }))
                .collect();
            return Ok(Pushforward {
                bundle: BundleExpr::normalized(ctx, summands),
                extension_degree: jdeg,
            });
        }
    }
    Err(BundleError::Curve(CurveError::NeedsFieldExtension { degree: 0, bound }))
}

/// Degree-m isogeny phi with phi^*(class of P - O) trivial, built as the
/// dual of the quotient by the cyclic group generated by P, and verified by
/// the divisor-arithmetic pullback (over a bounded extension if necessary).
pub fn kill_torsion_line(e: &Curve, p: &CurvePoint, bound: usize, cap: u64) -> Result<Isogeny, BundleError> {
    if p.curve() != e {
        return Err(BundleError::Curve(CurveError::MixedCurves));
    }
    if p.is_infinity() {
        return Ok(Isogeny::identity(e));
    }
    let quotient = Isogeny::velu(e, p)?;
    let phi = Isogeny::dual(&quotient);
    verify_kill(&phi, p, bound, cap)?;
    Ok(phi)
}

fn verify_kill(phi: &Isogeny, p: &CurvePoint, bound: usize, cap: u64) -> Result<(), BundleError> {
    let cls = LineClass { part: LinePart::Concrete(p.clone()), shift: 0 };
    match pullback_line(&cls, phi, bound, cap) {
        Ok(pulled) => {
            let ctx = CurveCtx::Concrete(phi.domain().clone());
            let degree_zero = LineClass { part: pulled.part, shift: 0 };
            if degree_zero.is_trivial(&ctx)? {
                Ok(())
            } else {
                Err(BundleError::RuleHypothesisUnmet(
                    "trivialization failed: pulled-back class is nontrivial".into(),
                ))
            }
        }
        Err(BundleError::Curve(CurveError::NeedsFieldExtension { degree, .. })) if degree > 0 => {
            let emb = crate::curve::FieldEmbedding::extension(phi.domain().field(), degree, cap)?;
            let big_phi = phi.base_change(&emb);
            let big_p = p.base_change(&emb, big_phi.codomain());
            verify_kill(&big_phi, &big_p, bound, cap)
        }
        Err(e) => Err(e),
    }
}

/// Convenience: pull an element out of the context for display.
pub fn field_elem_json(e: &FieldElement) -> Value {
    json!(e.coeffs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::DEFAULT_EXTENSION_BOUND;
    use crate::field::{Field, DEFAULT_FIELD_CAP};

    fn concrete_f5() -> (Field, Curve) {
        let f = Field::new(5, 1).unwrap();
        let e = Curve::short(&f, 1, 2).unwrap();
        (f, e)
    }

    fn ctx(e: &Curve) -> CurveCtx {
        CurveCtx::Concrete(e.clone())
    }

    #[test]
    fn rank_degree_of_basic_shapes() {
        let (_, e) = concrete_f5();
        let o = BundleExpr::structure_sheaf(ctx(&e));
        assert_eq!((o.rank(), o.degree()), (1, 0));
        let q = e.all_points().into_iter().find(|p| !p.is_infinity()).unwrap();
        let eq = BundleExpr::ext_q(ctx(&e), LinePart::Concrete(q.clone()));
        assert_eq!((eq.rank(), eq.degree()), (2, 1));
        let e20 = BundleExpr::atiyah_triv(ctx(&e), 2);
        let twisted = e20.tensor_line(&LineClass { part: LinePart::Concrete(q), shift: 1 });
        assert_eq!((twisted.rank(), twisted.degree()), (2, 2));
    }

    #[test]
    fn atiyah_tower_is_self_dual() {
        let (_, e) = concrete_f5();
        for r in 1..=5 {
            let b = BundleExpr::atiyah_triv(ctx(&e), r);
            assert_eq!(b.dual().unwrap(), b);
        }
    }

    #[test]
    fn cohomology_of_atiyah_and_torsion_line() {
        let (_, e) = concrete_f5();
        for r in 1..=4 {
            assert_eq!(BundleExpr::atiyah_triv(ctx(&e), r).cohomology().unwrap(), (1, 1));
        }
        // a point of order 4 gives a nontrivial degree-0 class: (0, 0)
        let p = e.point_of_order(4).unwrap();
        let l = BundleExpr::line(ctx(&e), LinePart::Concrete(p), 0);
        assert_eq!(l.cohomology().unwrap(), (0, 0));
        // order-3 class on the 3-point curve over F_2
        let f2 = Field::new(2, 1).unwrap();
        let e3 = Curve::from_i64(&f2, [0, 0, 1, 0, 0]).unwrap();
        let t3 = e3.point_of_order(3).unwrap();
        let l3 = BundleExpr::line(CurveCtx::Concrete(e3), LinePart::Concrete(t3), 0);
        assert_eq!(l3.cohomology().unwrap(), (0, 0));
    }

    #[test]
    fn cohomology_of_ext_q_from_riemann_roch_and_nonsplitness() {
        let (_, e) = concrete_f5();
        let q = e.all_points().into_iter().find(|p| !p.is_infinity()).unwrap();
        let eq = BundleExpr::ext_q(ctx(&e), LinePart::Concrete(q));
        // oracle: rank 2, degree 1 and the defining sequence
        // 0 -> O -> E_Q -> O(Q) -> 0 give h0 - h1 = 1 with h1 = 0, and the
        // nonsplit extension keeps h0 at 1 = h0(O) + 0.
        assert_eq!(eq.cohomology().unwrap(), (1, 0));
    }

    #[test]
    fn riemann_roch_holds_across_shapes() {
        let (_, e) = concrete_f5();
        let q = e.all_points().into_iter().find(|p| !p.is_infinity()).unwrap();
        let shapes = vec![
            BundleExpr::structure_sheaf(ctx(&e)),
            BundleExpr::atiyah_triv(ctx(&e), 3),
            BundleExpr::ext_q(ctx(&e), LinePart::Concrete(q.clone())),
            BundleExpr::line(ctx(&e), LinePart::Concrete(q.clone()), 2),
            BundleExpr::line(ctx(&e), LinePart::Concrete(q), -1),
        ];
        for b in shapes {
            let (h0, h1) = b.cohomology().unwrap();
            assert_eq!(h0 as i64 - h1 as i64, b.degree(), "{:?}", b);
        }
    }

    #[test]
    fn sym_power_of_split_bundle_closed_form() {
        // O + L with ord L = 4 on E/F_5
        let (_, e) = concrete_f5();
        let p4 = e.point_of_order(4).unwrap();
        let o_plus_l = BundleExpr::direct_sum(vec![
            BundleExpr::structure_sheaf(ctx(&e)),
            BundleExpr::line(ctx(&e), LinePart::Concrete(p4), 0),
        ]);
        for m in 0..=8u64 {
            let sym = o_plus_l.sym_power(m).unwrap();
            assert_eq!(sym.rank(), m + 1);
            let (h0, _) = sym.cohomology().unwrap();
            assert_eq!(h0, m / 4 + 1, "h0(Sym^{m}) mismatches the floor formula");
        }
        // the two rows of the splitting lemma
        assert_eq!(o_plus_l.sym_power(3).unwrap().cohomology().unwrap().0, 1);
        assert_eq!(o_plus_l.sym_power(4).unwrap().cohomology().unwrap().0, 2);
    }

    #[test]
    fn sym_power_of_self_dual_rank_two() {
        let f3 = Field::new(3, 1).unwrap();
        let e = Curve::from_i64(&f3, [0, 1, 0, 0, 1]).unwrap();
        let c = CurveCtx::Concrete(e);
        let e20 = BundleExpr::atiyah_triv(c.clone(), 2);
        // below p: the tower continues
        let s2 = e20.sym_power(2).unwrap();
        assert_eq!(s2, BundleExpr::atiyah_triv(c.clone(), 3));
        assert_eq!(s2.cohomology().unwrap(), (1, 1));
        // at p: it splits off the structure sheaf
        let s3 = e20.sym_power(3).unwrap();
        assert_eq!(s3.rank(), 4);
        assert_eq!(s3.cohomology().unwrap().0, 2);
        assert!(matches!(
            e20.sym_power(4).unwrap_err(),
            BundleError::UnsupportedExponent { m: 4, p: 3 }
        ));
        // Sym^0 of anything supported is O
        assert!(e20.sym_power(0).unwrap().is_trivial_line().unwrap());
    }

    #[test]
    fn symbolic_orders_infinite_and_unknown() {
        let sym = CurveCtx::Symbolic(SymbolicCurve::new(0, None, Some(LineOrder::Infinite)));
        let l = BundleExpr::line(sym.clone(), LinePart::Symbolic(1), 0);
        assert_eq!(l.cohomology().unwrap(), (0, 0));
        let o_plus_l = BundleExpr::direct_sum(vec![BundleExpr::structure_sheaf(sym), l]);
        for m in 1..=10 {
            assert_eq!(o_plus_l.sym_power(m).unwrap().cohomology().unwrap().0, 1);
        }
        let unknown = CurveCtx::Symbolic(SymbolicCurve::new(0, None, None));
        let l2 = BundleExpr::line(unknown, LinePart::Symbolic(1), 0);
        assert_eq!(l2.cohomology().unwrap_err(), BundleError::UnknownOrder);
    }

    #[test]
    fn pullback_splits_ext_along_separable_degree_two() {
        let (f, e) = concrete_f5();
        let k = e.point(f.from_u64(4), f.from_u64(0)).unwrap();
        let phi = Isogeny::velu(&e, &k).unwrap();
        // E_Q on the codomain for Q = (3, 0), whose preimages are rational
        let q = phi.codomain().point(f.from_u64(3), f.from_u64(0)).unwrap();
        let eq = BundleExpr::ext_q(CurveCtx::Concrete(phi.codomain().clone()), LinePart::Concrete(q));
        let pulled = pullback(&eq, &phi, DEFAULT_EXTENSION_BOUND, DEFAULT_FIELD_CAP).unwrap();
        assert_eq!(pulled.rank(), 2);
        assert_eq!(pulled.degree(), 2); // deg multiplies by deg phi
        assert_eq!(pulled.summands().len(), 2);
        // determinant class is Q1 + Q2 of degree 2; difference has order 2
        let pts: Vec<CurvePoint> = pulled
            .summands()
            .iter()
            .map(|s| match s {
                Summand::Line(LineClass { part: LinePart::Concrete(p), shift: 1 }) => p.clone(),
                other => panic!("expected degree-1 line summands, got {:?}", other),
            })
            .collect();
        assert_eq!(pts[0].sub(&pts[1]).order(), 2);
    }

    #[test]
    fn pullback_trivializes_self_dual_rank_two_along_inseparable_dual() {
        // ordinary and supersingular over F_2: the dual of Frobenius has
        // purely inseparable dual (namely Frobenius), so the rule fires.
        let f2 = Field::new(2, 1).unwrap();
        for coeffs in [[1i64, 1, 0, 0, 1], [0, 0, 1, 0, 0]] {
            let e = Curve::from_i64(&f2, coeffs).unwrap();
            let v = Isogeny::dual(&Isogeny::frobenius(&e));
            assert!(v.dual_purely_inseparable());
            let e20 = BundleExpr::atiyah_triv(CurveCtx::Concrete(v.codomain().clone()), 2);
            let pulled = pullback(&e20, &v, DEFAULT_EXTENSION_BOUND, DEFAULT_FIELD_CAP).unwrap();
            assert!(pulled.is_trivial_sum().unwrap(), "{:?}", pulled);
            assert_eq!(pulled.rank(), 2);
            assert_eq!(pulled.degree(), 0);
        }
    }

    #[test]
    fn pullback_frobenius_of_ext_in_char_two() {
        let f2 = Field::new(2, 1).unwrap();
        let e = Curve::from_i64(&f2, [1, 1, 0, 0, 1]).unwrap();
        let fr = Isogeny::frobenius(&e);
        let q = fr.codomain().all_points().into_iter().find(|p| !p.is_infinity()).unwrap();
        let eq = BundleExpr::ext_q(CurveCtx::Concrete(fr.codomain().clone()), LinePart::Concrete(q.clone()));
        let pulled = pullback(&eq, &fr, DEFAULT_EXTENSION_BOUND, DEFAULT_FIELD_CAP).unwrap();
        // shape: rank-2 self-dual twisted by a degree-1 class at the preimage
        assert_eq!(pulled.rank(), 2);
        assert_eq!(pulled.degree(), 2);
        match &pulled.summands()[0] {
            Summand::AtiyahTwist { rank: 2, cls } => {
                assert_eq!(cls.degree(), 1);
                match &cls.part {
                    LinePart::Concrete(qp) => assert_eq!(fr.eval(qp).unwrap(), q),
                    _ => panic!("expected concrete twist point"),
                }
            }
            other => panic!("expected twisted rank-2 self-dual shape, got {:?}", other),
        }
    }

    #[test]
    fn pullback_refuses_unmet_hypotheses() {
        let (f, e) = concrete_f5();
        let k = e.point(f.from_u64(4), f.from_u64(0)).unwrap();
        let phi = Isogeny::velu(&e, &k).unwrap(); // separable degree 2, dual separable
        let e20 = BundleExpr::atiyah_triv(CurveCtx::Concrete(phi.codomain().clone()), 2);
        assert!(matches!(
            pullback(&e20, &phi, DEFAULT_EXTENSION_BOUND, DEFAULT_FIELD_CAP),
            Err(BundleError::RuleHypothesisUnmet(_))
        ));
    }

    #[test]
    fn pullback_line_rank_and_degree_bookkeeping() {
        let (f, e) = concrete_f5();
        let k = e.point(f.from_u64(4), f.from_u64(0)).unwrap();
        let phi = Isogeny::velu(&e, &k).unwrap();
        let q = phi.codomain().point(f.from_u64(3), f.from_u64(0)).unwrap();
        for shift in [-1i64, 0, 1, 2] {
            let l = BundleExpr::line(
                CurveCtx::Concrete(phi.codomain().clone()),
                LinePart::Concrete(q.clone()),
                shift,
            );
            let pulled = pullback(&l, &phi, DEFAULT_EXTENSION_BOUND, DEFAULT_FIELD_CAP).unwrap();
            assert_eq!(pulled.rank(), 1);
            assert_eq!(pulled.degree(), shift * phi.degree() as i64);
        }
    }

    #[test]
    fn pushforward_of_identity_and_frobenius() {
        let f2 = Field::new(2, 1).unwrap();
        let ss = Curve::from_i64(&f2, [0, 0, 1, 0, 0]).unwrap();
        let id = Isogeny::identity(&ss);
        let push = pushforward_structure(&id, DEFAULT_EXTENSION_BOUND, DEFAULT_FIELD_CAP).unwrap();
        assert!(push.bundle.is_trivial_line().unwrap());
        // supersingular Frobenius has purely inseparable dual: the tower
        let fr = Isogeny::frobenius(&ss);
        let push = pushforward_structure(&fr, DEFAULT_EXTENSION_BOUND, DEFAULT_FIELD_CAP).unwrap();
        assert_eq!(
            push.bundle,
            BundleExpr::atiyah_triv(CurveCtx::Concrete(fr.codomain().clone()), 2)
        );
        assert_eq!((push.bundle.rank(), push.bundle.degree()), (2, 0));
    }

    #[test]
    fn pushforward_separable_degree_two_gives_order_two_class() {
        let (f, e) = concrete_f5();
        let k = e.point(f.from_u64(4), f.from_u64(0)).unwrap();
        let phi = Isogeny::velu(&e, &k).unwrap();
        let push = pushforward_structure(&phi, DEFAULT_EXTENSION_BOUND, DEFAULT_FIELD_CAP).unwrap();
        // the 2-torsion of the domain is not fully rational over F_5; the
        // dual kernel appears over the quadratic extension
        assert_eq!(push.extension_degree, 2);
        assert_eq!(push.bundle.rank(), 2);
        assert_eq!(push.bundle.degree(), 0);
        let classes: Vec<&Summand> = push.bundle.summands().iter().collect();
        assert_eq!(classes.len(), 2);
        let mut orders: Vec<u64> = push
            .bundle
            .summands()
            .iter()
            .map(|s| match s {
                Summand::Line(c) => c.order(push.bundle.ctx()).unwrap().unwrap(),
                _ => panic!("expected line classes"),
            })
            .collect();
        orders.sort();
        assert_eq!(orders, vec![1, 2]); // O plus a class of order exactly 2
    }

    #[test]
    fn kill_torsion_line_identity_and_small_orders() {
        let (f, e) = concrete_f5();
        // the identity case
        let id = kill_torsion_line(&e, &e.infinity(), DEFAULT_EXTENSION_BOUND, DEFAULT_FIELD_CAP).unwrap();
        assert_eq!(id.degree(), 1);
        // order 2 on E/F_5
        let p2 = e.point(f.from_u64(4), f.from_u64(0)).unwrap();
        let phi = kill_torsion_line(&e, &p2, DEFAULT_EXTENSION_BOUND, DEFAULT_FIELD_CAP).unwrap();
        assert_eq!(phi.degree(), 2);
        assert_eq!(phi.codomain(), &e);
        // order 3 on the 3-point curve over F_2 (verification crosses an extension)
        let f2 = Field::new(2, 1).unwrap();
        let e3 = Curve::from_i64(&f2, [0, 0, 1, 0, 0]).unwrap();
        let p3 = e3.point_of_order(3).unwrap();
        let phi3 = kill_torsion_line(&e3, &p3, DEFAULT_EXTENSION_BOUND, DEFAULT_FIELD_CAP).unwrap();
        assert_eq!(phi3.degree(), 3);
        assert_eq!(phi3.codomain(), &e3);
    }

    #[test]
    fn normalization_sorts_and_flattens() {
        let (f, e) = concrete_f5();
        let p = e.point(f.from_u64(1), f.from_u64(2)).unwrap();
        let a = BundleExpr::line(ctx(&e), LinePart::Concrete(p.clone()), 0);
        let b = BundleExpr::structure_sheaf(ctx(&e));
        let s1 = BundleExpr::direct_sum(vec![a.clone(), b.clone()]);
        let s2 = BundleExpr::direct_sum(vec![b, a]);
        assert_eq!(s1, s2);
        let json = serde_json::to_string(&s1.to_json()).unwrap();
        assert_eq!(json, serde_json::to_string(&s2.to_json()).unwrap());
    }
}
