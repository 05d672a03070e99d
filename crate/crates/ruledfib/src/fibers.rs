//! Arithmetic of multiple fibers on elliptic fibrations over the projective
//! line with chi(O_S) = 0: constraint validation, the congruence feasibility
//! condition (for each distinguished index there must be integers n_j with
//! n_i = 1 mod nu_i and sum n_j/m_j integral), and exhaustive enumeration of
//! the surviving configurations, which fall into six families.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FiberError {
    #[error("EmptyInput: no fiber types given")]
    EmptyInput,
    #[error("OutOfScope: d = {0} (need 0 or -1)")]
    OutOfScope(i64),
    #[error("MixedMultiplicities: fibers do not share a common multiplicity")]
    MixedMultiplicities,
    #[error("InvalidType: need 1 <= nu <= m, got m = {m}, nu = {nu}")]
    InvalidType { m: u64, nu: u64 },
    #[error("LcmTooLarge: common denominator {0} exceeds the solver limit")]
    LcmTooLarge(u128),
}

/// One multiple fiber: multiplicity m, canonical-formula coefficient a,
/// normal-bundle order nu, and the wild flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct MultipleFiber {
    pub m: u64,
    pub a: i64,
    pub nu: u64,
    pub wild: bool,
}

impl MultipleFiber {
    pub fn tame(m: u64) -> MultipleFiber {
        MultipleFiber { m, a: m as i64 - 1, nu: m, wild: false }
    }

    pub fn wild(m: u64, a: i64, nu: u64) -> MultipleFiber {
        MultipleFiber { m, a, nu, wild: true }
    }

    /// Wild with a = m - 1 (the obstruction case for cover reductions).
    pub fn is_strange_type(&self) -> bool {
        self.wild && self.a == self.m as i64 - 1
    }
}

/// A configuration of multiple fibers over the projective line, with the
/// degree d of the invertible part of the first higher direct image. With
/// chi(O_S) = 0 the torsion part has h0 = -d, one per wild fiber.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiberConfig {
    pub d: i64,
    pub p: u64,
    pub fibers: Vec<MultipleFiber>,
    /// Reduction type of the fibers when known (they are all isogenous).
    pub supersingular: Option<bool>,
}

impl FiberConfig {
    pub fn new(d: i64, p: u64, mut fibers: Vec<MultipleFiber>) -> FiberConfig {
        fibers.sort();
        FiberConfig { d, p, fibers, supersingular: None }
    }

    pub fn with_reduction(mut self, supersingular: bool) -> FiberConfig {
        self.supersingular = Some(supersingular);
        self
    }

    pub fn h0_torsion(&self) -> i64 {
        -self.d
    }

    pub fn lambda(&self) -> usize {
        self.fibers.len()
    }
}

/// A named violated constraint; validation never throws.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Violation {
    /// a outside 0..=m-1.
    CanonicalCoefficientRange { index: usize },
    /// tame fiber with a != m - 1.
    TameCoefficient { index: usize },
    /// m is not nu times a power of p (or nu does not divide m).
    MultiplicityFactorization { index: usize },
    /// nu = m must hold exactly for tame fibers.
    TameOrderCriterion { index: usize },
    /// over a supersingular reduction, tame must match p not dividing m.
    SupersingularTameCriterion { index: usize },
    /// neither a + 1 = m nor a + nu + 1 = m.
    CoefficientBranch { index: usize },
    /// sum of a_i/m_i must be strictly below 2 + d.
    CanonicalDegreeBound,
    /// number of wild fibers must equal -d.
    WildCountMatchesTorsion { wild: usize, expected: i64 },
    /// d outside {0, -1}.
    DegreeOutOfScope { d: i64 },
    /// multiplicity below 2.
    MultiplicityTooSmall { index: usize },
}

/// Check every structural invariant; returns the (possibly empty) list of
/// named violations.
pub fn validate_config(cfg: &FiberConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    if cfg.d != 0 && cfg.d != -1 {
        out.push(Violation::DegreeOutOfScope { d: cfg.d });
    }
    for (i, f) in cfg.fibers.iter().enumerate() {
        if f.m < 2 {
            out.push(Violation::MultiplicityTooSmall { index: i });
            continue;
        }
        if f.a < 0 || f.a > f.m as i64 - 1 {
            out.push(Violation::CanonicalCoefficientRange { index: i });
        }
        if !f.wild && f.a != f.m as i64 - 1 {
            out.push(Violation::TameCoefficient { index: i });
        }
        // m = p^alpha nu with alpha >= 0, and nu = m exactly for tame fibers
        let factor_ok = f.nu >= 1 && f.m % f.nu == 0 && is_p_power(cfg.p, f.m / f.nu);
        if !factor_ok {
            out.push(Violation::MultiplicityFactorization { index: i });
        }
        if (f.nu == f.m) == f.wild {
            out.push(Violation::TameOrderCriterion { index: i });
        }
        if let Some(true) = cfg.supersingular {
            let tame = !f.wild;
            let p_coprime = cfg.p == 0 || f.m % cfg.p != 0;
            if tame != p_coprime {
                out.push(Violation::SupersingularTameCriterion { index: i });
            }
        }
        let m = f.m as i64;
        let nu = f.nu as i64;
        if f.a + 1 != m && f.a + nu + 1 != m {
            out.push(Violation::CoefficientBranch { index: i });
        }
    }
    // sum a_i/m_i < 2 + d, compared exactly over a common denominator
    let mut l: i128 = 1;
    for f in &cfg.fibers {
        l = lcm_i128(l, f.m as i128);
    }
    let lhs: i128 = cfg.fibers.iter().map(|f| f.a as i128 * (l / f.m as i128)).sum();
    if lhs >= (2 + cfg.d as i128) * l {
        out.push(Violation::CanonicalDegreeBound);
    }
    let wild = cfg.fibers.iter().filter(|f| f.wild).count();
    if wild as i64 != cfg.h0_torsion() {
        out.push(Violation::WildCountMatchesTorsion { wild, expected: cfg.h0_torsion() });
    }
    out
}

fn is_p_power(p: u64, mut n: u64) -> bool {
    if n == 1 {
        return true;
    }
    if p == 0 {
        return false;
    }
    while n % p == 0 {
        n /= p;
    }
    n == 1
}

fn gcd_u128(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd_u128(b, a % b)
    }
}

fn lcm_i128(a: i128, b: i128) -> i128 {
    (a as u128 / gcd_u128(a as u128, b as u128) * b as u128) as i128
}

/// Feasibility report: overall verdict plus one sub-problem per
/// distinguished index, each with a witness residue vector when feasible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KuOutcome {
    pub feasible: bool,
    pub per_index: Vec<KuIndexOutcome>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KuIndexOutcome {
    pub index: usize,
    pub feasible: bool,
    pub witness: Option<Vec<u64>>,
}

const LCM_LIMIT: u128 = 1 << 22;

/// Decide, for every distinguished index i, whether residues n_j mod m_j
/// exist with n_i = 1 mod nu_i and sum n_j/m_j integral. All indices must be
/// feasible for the overall verdict. Dynamic programming over partial sums
/// modulo the common denominator, with backtracked witnesses.
pub fn ku_feasible(types: &[(u64, u64)]) -> Result<KuOutcome, FiberError> {
    if types.is_empty() {
        return Err(FiberError::EmptyInput);
    }
    for &(m, nu) in types {
        if m == 0 || nu == 0 || nu > m {
            return Err(FiberError::InvalidType { m, nu });
        }
    }
    let mut l: u128 = 1;
    for &(m, _) in types {
        l = l / gcd_u128(l, m as u128) * m as u128;
        if l > LCM_LIMIT {
            return Err(FiberError::LcmTooLarge(l));
        }
    }
    let lam = l as u64;
    let mut per_index = Vec::with_capacity(types.len());
    let mut all = true;
    for i in 0..types.len() {
        let witness = solve_one_index(types, i, lam);
        all &= witness.is_some();
        per_index.push(KuIndexOutcome { index: i, feasible: witness.is_some(), witness });
    }
    Ok(KuOutcome { feasible: all, per_index })
}

fn allowed_residues(types: &[(u64, u64)], j: usize, distinguished: usize) -> Vec<u64> {
    let (m, nu) = types[j];
    if j == distinguished {
        (0..m).filter(|n| n % nu == 1 % nu).collect()
    } else {
        (0..m).collect()
    }
}

fn solve_one_index(types: &[(u64, u64)], distinguished: usize, lam: u64) -> Option<Vec<u64>> {
    let words = (lam as usize + 63) / 64;
    let mut layer = vec![0u64; words];
    set_bit(&mut layer, 0);
    let mut layers: Vec<Vec<u64>> = vec![layer];
    for j in 0..types.len() {
        let step = lam / types[j].0;
        let prev = layers.last().unwrap();
        let mut next = vec![0u64; words];
        for n in allowed_residues(types, j, distinguished) {
            or_rotated(&mut next, prev, (n * step % lam) as usize, lam as usize);
        }
        layers.push(next);
    }
    if !get_bit(layers.last().unwrap(), 0) {
        return None;
    }
    // backtrack, preferring the smallest residue at each step
    let mut witness = vec![0u64; types.len()];
    let mut state = 0u64;
    for j in (0..types.len()).rev() {
        let step = lam / types[j].0;
        let mut found = false;
        for n in allowed_residues(types, j, distinguished) {
            let shift = n * step % lam;
            let prev_state = (state + lam - shift) % lam;
            if get_bit(&layers[j], prev_state as usize) {
                witness[j] = n;
                state = prev_state;
                found = true;
                break;
            }
        }
        debug_assert!(found, "reachable state must have a predecessor");
    }
    debug_assert_eq!(state, 0);
    Some(witness)
}

fn set_bit(bits: &mut [u64], i: usize) {
    bits[i / 64] |= 1 << (i % 64);
}

fn get_bit(bits: &[u64], i: usize) -> bool {
    bits[i / 64] & (1 << (i % 64)) != 0
}

/// dst |= src rotated left by r within a width of `width` bits.
fn or_rotated(dst: &mut [u64], src: &[u64], r: usize, width: usize) {
    // widths here are small; a bit loop keeps this obviously correct
    for i in 0..width {
        if get_bit(src, i) {
            let j = (i + r) % width;
            dst[j / 64] |= 1 << (j % 64);
        }
    }
}

/// The six families of surviving configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum FamilyId {
    I,
    II,
    III,
    IV,
    V,
    VI,
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyEntry {
    pub family: FamilyId,
    pub configs: Vec<FiberConfig>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Enumeration {
    pub d: i64,
    pub p: u64,
    pub bound: u64,
    pub families: Vec<FamilyEntry>,
}

/// Enumerate every constraint-satisfying, feasibility-passing configuration
/// with all multiplicities at most M, grouped into families.
///
/// For d = 0 the torsion part vanishes, so every fiber is tame with
/// a = m - 1; each tame term contributes at least 1/2 to the degree bound,
/// capping the count at three fibers. For d = -1 exactly one fiber is wild.
pub fn enumerate_configs(d: i64, p: u64, m_bound: u64) -> Result<Enumeration, FiberError> {
    if d != 0 && d != -1 {
        return Err(FiberError::OutOfScope(d));
    }
    let mut survivors: Vec<FiberConfig> = Vec::new();
    if d == 0 {
        survivors.push(FiberConfig::new(0, p, vec![]));
        // one or two tame fibers: the degree bound is automatic
        for m1 in 2..=m_bound {
            if ku_ok(&[(m1, m1)])? {
                survivors.push(FiberConfig::new(0, p, vec![MultipleFiber::tame(m1)]));
            }
            for m2 in m1..=m_bound {
                if ku_ok(&[(m1, m1), (m2, m2)])? {
                    survivors.push(FiberConfig::new(
                        0,
                        p,
                        vec![MultipleFiber::tame(m1), MultipleFiber::tame(m2)],
                    ));
                }
            }
        }
        // three tame fibers under the degree bound
        for m1 in 2..=m_bound {
            for m2 in m1..=m_bound {
                for m3 in m2..=m_bound {
                    if !sum_below(&[(m1 as i64 - 1, m1), (m2 as i64 - 1, m2), (m3 as i64 - 1, m3)], 2) {
                        continue;
                    }
                    if ku_ok(&[(m1, m1), (m2, m2), (m3, m3)])? {
                        survivors.push(FiberConfig::new(
                            0,
                            p,
                            vec![
                                MultipleFiber::tame(m1),
                                MultipleFiber::tame(m2),
                                MultipleFiber::tame(m3),
                            ],
                        ));
                    }
                }
            }
        }
    } else {
        if p == 0 {
            // no torsion in characteristic zero: d = -1 is unpopulated
            return Ok(Enumeration { d, p, bound: m_bound, families: vec![] });
        }
        // a single wild fiber
        for m in 2..=m_bound {
            for nu in divisors(m) {
                if !is_p_power(p, m / nu) || m / nu == 1 {
                    continue; // wild needs a positive power of p
                }
                for a in [m as i64 - 1, m as i64 - nu as i64 - 1] {
                    if a < 0 || !sum_below(&[(a, m)], 1) {
                        continue;
                    }
                    if ku_ok(&[(m, nu)])? {
                        survivors.push(FiberConfig::new(-1, p, vec![MultipleFiber::wild(m, a, nu)]));
                    }
                }
            }
        }
        // one tame plus one wild fiber
        for m1 in 2..=m_bound {
            for m2 in 2..=m_bound {
                for nu2 in divisors(m2) {
                    if !is_p_power(p, m2 / nu2) || m2 / nu2 == 1 {
                        continue;
                    }
                    for a2 in [m2 as i64 - 1, m2 as i64 - nu2 as i64 - 1] {
                        if a2 < 0 || !sum_below(&[(m1 as i64 - 1, m1), (a2, m2)], 1) {
                            continue;
                        }
                        if ku_ok(&[(m1, m1), (m2, nu2)])? {
                            let cfg = FiberConfig::new(
                                -1,
                                p,
                                vec![MultipleFiber::tame(m1), MultipleFiber::wild(m2, a2, nu2)],
                            );
                            if !survivors.contains(&cfg) {
                                survivors.push(cfg);
                            }
                        }
                    }
                }
            }
        }
    }
    // group into families by shape
    let mut families: Vec<FamilyEntry> = Vec::new();
    for cfg in survivors {
        let family = classify_family(&cfg);
        match families.iter_mut().find(|f| f.family == family) {
            Some(entry) => entry.configs.push(cfg),
            None => families.push(FamilyEntry { family, configs: vec![cfg] }),
        }
    }
    families.sort_by_key(|f| f.family);
    for f in &mut families {
        f.configs.sort_by_key(config_sort_key);
    }
    Ok(Enumeration { d, p, bound: m_bound, families })
}

fn classify_family(cfg: &FiberConfig) -> FamilyId {
    let wild = cfg.fibers.iter().filter(|f| f.wild).count();
    match (cfg.d, cfg.lambda(), wild) {
        (0, 0, 0) => FamilyId::I,
        (0, 2, 0) => FamilyId::II,
        (0, 3, 0) => FamilyId::III,
        (-1, 1, 1) => {
            let f = &cfg.fibers[0];
            if f.a == f.m as i64 - 1 {
                FamilyId::IV
            } else {
                FamilyId::V
            }
        }
        (-1, 2, 1) => FamilyId::VI,
        _ => unreachable!("enumeration produced an unclassifiable configuration: {:?}", cfg),
    }
}

fn config_sort_key(cfg: &FiberConfig) -> (usize, Vec<(u64, i64, u64, bool)>) {
    (
        cfg.lambda(),
        cfg.fibers.iter().map(|f| (f.m, f.a, f.nu, f.wild)).collect(),
    )
}

fn ku_ok(types: &[(u64, u64)]) -> Result<bool, FiberError> {
    Ok(ku_feasible(types)?.feasible)
}

/// Exact check of sum(num_i / den_i) < bound.
fn sum_below(terms: &[(i64, u64)], bound: i64) -> bool {
    let mut l: i128 = 1;
    for &(_, d) in terms {
        l = lcm_i128(l, d as i128);
    }
    let lhs: i128 = terms.iter().map(|&(n, d)| n as i128 * (l / d as i128)).sum();
    lhs < bound as i128 * l
}

fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n % d == 0).collect()
}

/// The coefficient (-2 - d) m + sum a_i of the canonical class against the
/// common fiber reduction; m = 1 when there are no multiple fibers.
pub fn kodaira_coefficient(cfg: &FiberConfig) -> Result<i64, FiberError> {
    let m = match cfg.fibers.first() {
        None => 1,
        Some(f) => {
            if cfg.fibers.iter().any(|g| g.m != f.m) {
                return Err(FiberError::MixedMultiplicities);
            }
            f.m
        }
    };
    let sum_a: i64 = cfg.fibers.iter().map(|f| f.a).sum();
    Ok((-2 - cfg.d) * m as i64 + sum_a)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Oracle: full residue-vector exhaustion for one distinguished index.
    fn exhaust_one(types: &[(u64, u64)], distinguished: usize) -> bool {
        let mut l: u64 = 1;
        for &(m, _) in types {
            l = l / gcd(l, m) * m;
        }
        let mut stack = vec![(0usize, 0u64)];
        // depth-first over residue vectors
        fn rec(types: &[(u64, u64)], d: usize, idx: usize, acc: u64, l: u64) -> bool {
            if idx == types.len() {
                return acc % l == 0;
            }
            let (m, nu) = types[idx];
            let step = l / m;
            for n in 0..m {
                if idx == d && n % nu != 1 % nu {
                    continue;
                }
                if rec(types, d, idx + 1, (acc + n * step) % l, l) {
                    return true;
                }
            }
            false
        }
        stack.pop();
        rec(types, distinguished, 0, 0, l)
    }

    fn exhaust(types: &[(u64, u64)]) -> bool {
        (0..types.len()).all(|i| exhaust_one(types, i))
    }

    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }

    #[test]
    fn validate_three_tame_twos() {
        let cfg = FiberConfig::new(
            0,
            0,
            vec![MultipleFiber::tame(2), MultipleFiber::tame(2), MultipleFiber::tame(2)],
        );
        assert!(validate_config(&cfg).is_empty());
    }

    #[test]
    fn validate_single_wild_two_char_two() {
        let cfg = FiberConfig::new(-1, 2, vec![MultipleFiber::wild(2, 0, 1)]);
        assert!(validate_config(&cfg).is_empty());
        // the a + nu + 1 = m branch holds: 0 + 1 + 1 = 2
        let f = &cfg.fibers[0];
        assert_eq!(f.a + f.nu as i64 + 1, f.m as i64);
    }

    #[test]
    fn validate_flags_tame_with_wrong_coefficient() {
        let bad = FiberConfig::new(
            0,
            0,
            vec![MultipleFiber { m: 4, a: 1, nu: 4, wild: false }],
        );
        let violations = validate_config(&bad);
        assert!(violations.contains(&Violation::TameCoefficient { index: 0 }));
    }

    #[test]
    fn validate_supersingular_criterion() {
        // over a supersingular reduction, a tame fiber of multiplicity 2 in
        // characteristic 2 is impossible
        let cfg = FiberConfig::new(0, 2, vec![MultipleFiber::tame(2), MultipleFiber::tame(2)])
            .with_reduction(true);
        assert!(validate_config(&cfg)
            .contains(&Violation::SupersingularTameCriterion { index: 0 }));
        let ord = FiberConfig::new(0, 2, vec![MultipleFiber::tame(2), MultipleFiber::tame(2)])
            .with_reduction(false);
        assert!(validate_config(&ord).is_empty());
    }

    #[test]
    fn ku_equal_pair_feasible_with_expected_witness() {
        for m in 2..=60u64 {
            let out = ku_feasible(&[(m, m), (m, m)]).unwrap();
            assert!(out.feasible, "pair ({m}, {m})");
            assert_eq!(out.per_index[0].witness.as_deref(), Some(&[1, m - 1][..]));
        }
    }

    #[test]
    fn ku_single_tame_infeasible() {
        for m in 2..=60u64 {
            let out = ku_feasible(&[(m, m)]).unwrap();
            assert!(!out.feasible);
            assert!(!exhaust(&[(m, m)]), "oracle agrees for ({m})");
        }
    }

    #[test]
    fn ku_two_three_m_infeasible() {
        for m in 3..=5u64 {
            let types = [(2, 2), (3, 3), (m, m)];
            assert!(!ku_feasible(&types).unwrap().feasible);
            assert!(!exhaust(&types));
        }
    }

    #[test]
    fn ku_empty_input() {
        assert_eq!(ku_feasible(&[]).unwrap_err(), FiberError::EmptyInput);
    }

    #[test]
    fn ku_permutation_invariance() {
        let cases: Vec<Vec<(u64, u64)>> = vec![
            vec![(2, 2), (4, 2), (8, 1)],
            vec![(3, 3), (3, 1), (9, 3)],
            vec![(2, 2), (3, 3), (6, 6)],
            vec![(5, 1), (2, 2), (10, 10)],
        ];
        for types in cases {
            let base = ku_feasible(&types).unwrap().feasible;
            let mut perm = types.clone();
            perm.rotate_left(1);
            assert_eq!(ku_feasible(&perm).unwrap().feasible, base);
            perm.swap(0, 1);
            assert_eq!(ku_feasible(&perm).unwrap().feasible, base);
        }
    }

    #[test]
    fn ku_matches_exhaustion_on_divisor_pairs() {
        // oracle equivalence on a small sweep; the full sweep runs in the
        // acceptance suite
        for m1 in 1..=8u64 {
            for nu1 in divisors(m1) {
                for m2 in 1..=8u64 {
                    for nu2 in divisors(m2) {
                        let types = [(m1, nu1), (m2, nu2)];
                        assert_eq!(
                            ku_feasible(&types).unwrap().feasible,
                            exhaust(&types),
                            "{:?}",
                            types
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn witnesses_are_valid() {
        let cases: Vec<Vec<(u64, u64)>> = vec![
            vec![(4, 4), (4, 4)],
            vec![(2, 1), (2, 2)],
            vec![(6, 3), (2, 2), (3, 3)],
        ];
        for types in cases {
            let out = ku_feasible(&types).unwrap();
            for idx in &out.per_index {
                if let Some(w) = &idx.witness {
                    let (m_i, nu_i) = types[idx.index];
                    assert_eq!(w[idx.index] % nu_i, 1 % nu_i);
                    let mut l = 1u64;
                    for &(m, _) in &types {
                        l = l / gcd(l, m) * m;
                    }
                    let s: u64 = w
                        .iter()
                        .zip(&types)
                        .map(|(&n, &(m, _))| n * (l / m) % l)
                        .fold(0, |a, b| (a + b) % l);
                    assert_eq!(s, 0, "witness sums to an integer");
                    let _ = m_i;
                }
            }
        }
    }

    #[test]
    fn enumerate_d0_families() {
        let e = enumerate_configs(0, 0, 60).unwrap();
        let ids: Vec<FamilyId> = e.families.iter().map(|f| f.family).collect();
        assert_eq!(ids, vec![FamilyId::I, FamilyId::II, FamilyId::III]);
        let ii = &e.families[1];
        assert_eq!(ii.configs.len(), 59); // m = 2..=60
        for cfg in &ii.configs {
            assert_eq!(cfg.fibers[0].m, cfg.fibers[1].m);
            assert!(validate_config(cfg).is_empty());
        }
        let iii = &e.families[2];
        assert_eq!(iii.configs.len(), 1);
        assert_eq!(
            iii.configs[0].fibers.iter().map(|f| f.m).collect::<Vec<_>>(),
            vec![2, 2, 2]
        );
    }

    #[test]
    fn enumerate_d_minus_one_char_two() {
        let e = enumerate_configs(-1, 2, 16).unwrap();
        let ids: Vec<FamilyId> = e.families.iter().map(|f| f.family).collect();
        assert_eq!(ids, vec![FamilyId::IV, FamilyId::V, FamilyId::VI]);
        let ms = |fam: &FamilyEntry| -> Vec<u64> {
            fam.configs.iter().map(|c| c.fibers.last().unwrap().m).collect()
        };
        assert_eq!(ms(&e.families[0]), vec![2, 4, 8, 16]);
        assert_eq!(ms(&e.families[1]), vec![2, 4, 8, 16]);
        let vi = &e.families[2];
        assert_eq!(vi.configs.len(), 1);
        let cfg = &vi.configs[0];
        assert_eq!(cfg.fibers[0], MultipleFiber::wild(2, 0, 1));
        assert_eq!(cfg.fibers[1], MultipleFiber::tame(2));
        for fam in &e.families {
            for cfg in &fam.configs {
                assert!(validate_config(cfg).is_empty(), "{:?}", cfg);
            }
        }
    }

    #[test]
    fn enumerate_d_minus_one_char_five() {
        let e = enumerate_configs(-1, 5, 60).unwrap();
        let ids: Vec<FamilyId> = e.families.iter().map(|f| f.family).collect();
        assert_eq!(ids, vec![FamilyId::IV, FamilyId::V]);
        for fam in &e.families {
            let ms: Vec<u64> = fam.configs.iter().map(|c| c.fibers[0].m).collect();
            assert_eq!(ms, vec![5, 25]);
        }
    }

    #[test]
    fn enumerate_rejects_other_d() {
        assert_eq!(enumerate_configs(1, 0, 10).unwrap_err(), FiberError::OutOfScope(1));
    }

    #[test]
    fn kodaira_coefficients_per_family() {
        // two equal tame fibers: always -2
        for m in 2..=10u64 {
            let cfg = FiberConfig::new(0, 0, vec![MultipleFiber::tame(m), MultipleFiber::tame(m)]);
            assert_eq!(kodaira_coefficient(&cfg).unwrap(), -2);
        }
        // three tame twos: -1
        let iii = FiberConfig::new(
            0,
            0,
            vec![MultipleFiber::tame(2), MultipleFiber::tame(2), MultipleFiber::tame(2)],
        );
        assert_eq!(kodaira_coefficient(&iii).unwrap(), -1);
        // single wild p-power with a = m - 2: -2
        for (p, alpha) in [(3u64, 1u32), (5, 1), (2, 2)] {
            let m = p.pow(alpha);
            let cfg = FiberConfig::new(-1, p, vec![MultipleFiber::wild(m, m as i64 - 2, 1)]);
            assert_eq!(kodaira_coefficient(&cfg).unwrap(), -2);
        }
        // mixed multiplicities are refused
        let mixed = FiberConfig::new(0, 0, vec![MultipleFiber::tame(2), MultipleFiber::tame(3)]);
        assert_eq!(kodaira_coefficient(&mixed).unwrap_err(), FiberError::MixedMultiplicities);
    }

    #[test]
    fn kodaira_parity_tracks_families() {
        let even = |cfg: &FiberConfig| kodaira_coefficient(cfg).unwrap() % 2 == 0;
        let d0 = enumerate_configs(0, 0, 12).unwrap();
        for fam in &d0.families {
            for cfg in &fam.configs {
                match fam.family {
                    FamilyId::I | FamilyId::II => assert!(even(cfg)),
                    FamilyId::III => assert!(!even(cfg)),
                    _ => unreachable!(),
                }
            }
        }
        let d1 = enumerate_configs(-1, 2, 16).unwrap();
        for fam in &d1.families {
            for cfg in &fam.configs {
                match fam.family {
                    FamilyId::V => assert!(even(cfg)),
                    FamilyId::IV | FamilyId::VI => assert!(!even(cfg)),
                    _ => unreachable!(),
                }
            }
        }
    }
}
