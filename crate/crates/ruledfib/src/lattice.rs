//! Numerical divisor arithmetic on the ruled surface over an elliptic curve:
//! the rank-2 lattice spanned by a minimal section C0 (with C0^2 = -e) and a
//! ruling fiber F (with C0.F = 1, F^2 = 0), the canonical class -2 C0 - e F,
//! and the nefness gate e in {0, -1} with its normalized-bundle menu.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("MixedSurfaces: classes live on surfaces with different invariants")]
    MixedSurfaces,
    #[error("OutOfScope: invariant e = {0} admits no fibration (need 0 or -1)")]
    OutOfScope(i64),
}

/// A numerical class a*C0 + b*F on the surface with invariant e.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SurfaceClass {
    pub c0: i64,
    pub f: i64,
    pub e: i64,
}

impl SurfaceClass {
    pub fn new(c0: i64, f: i64, e: i64) -> SurfaceClass {
        SurfaceClass { c0, f, e }
    }

    /// The class of the minimal section.
    pub fn section(e: i64) -> SurfaceClass {
        SurfaceClass { c0: 1, f: 0, e }
    }

    /// The class of a ruling fiber.
    pub fn fiber(e: i64) -> SurfaceClass {
        SurfaceClass { c0: 0, f: 1, e }
    }

    /// K = -2 C0 - e F.
    pub fn canonical(e: i64) -> SurfaceClass {
        SurfaceClass { c0: -2, f: -e, e }
    }

    pub fn add(&self, other: &SurfaceClass) -> Result<SurfaceClass, LatticeError> {
        if self.e != other.e {
            return Err(LatticeError::MixedSurfaces);
        }
        Ok(SurfaceClass { c0: self.c0 + other.c0, f: self.f + other.f, e: self.e })
    }

    pub fn scale(&self, n: i64) -> SurfaceClass {
        SurfaceClass { c0: self.c0 * n, f: self.f * n, e: self.e }
    }
}

/// Bilinear intersection number from C0^2 = -e, C0.F = 1, F^2 = 0.
pub fn intersect(x: &SurfaceClass, y: &SurfaceClass) -> Result<i64, LatticeError> {
    if x.e != y.e {
        return Err(LatticeError::MixedSurfaces);
    }
    Ok(-x.e * x.c0 * y.c0 + x.c0 * y.f + x.f * y.c0)
}

/// The anticanonical class is nef exactly for e in {0, -1}.
pub fn minus_k_nef(e: i64) -> bool {
    e == 0 || e == -1
}

/// Shapes a normalized rank-2 bundle can take on each admissible surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BundleShapeId {
    /// O + L for a degree-zero line class L.
    SplitWithLine,
    /// The indecomposable self-dual rank-2 bundle of degree 0.
    SelfDualRank2,
    /// The indecomposable degree-1 extension attached to a point.
    ExtOfPoint,
}

/// Menu of normalized bundle shapes for the given invariant.
pub fn normalized_bundle_menu(e: i64, _p: u64) -> Result<Vec<BundleShapeId>, LatticeError> {
    match e {
        0 => Ok(vec![BundleShapeId::SplitWithLine, BundleShapeId::SelfDualRank2]),
        -1 => Ok(vec![BundleShapeId::ExtOfPoint]),
        other => Err(LatticeError::OutOfScope(other)),
    }
}

/// Reduction class of a fiber of the elliptic fibration: numerically -K for
/// e = -1 (so D = 2 C0 - F), and C0 for e = 0.
pub fn fibration_reduction_class(e: i64) -> Result<SurfaceClass, LatticeError> {
    match e {
        0 => Ok(SurfaceClass::section(0)),
        -1 => Ok(SurfaceClass::canonical(-1).scale(-1)),
        other => Err(LatticeError::OutOfScope(other)),
    }
}

/// Pullback of numerical classes along the degree-2 vertical map of a
/// resolution stage from an e = -1 surface to its e = 0 double cover.
/// On the basis: F pulls back to 2F', and C0 to C0' + F' (forced by
/// bilinearity and the projection formula).
pub fn stage_pullback_to_cover(x: &SurfaceClass) -> Result<SurfaceClass, LatticeError> {
    if x.e != -1 {
        return Err(LatticeError::MixedSurfaces);
    }
    let c0_up = SurfaceClass { c0: 1, f: 1, e: 0 };
    let f_up = SurfaceClass { c0: 0, f: 2, e: 0 };
    c0_up.scale(x.c0).add(&f_up.scale(x.f))
}
