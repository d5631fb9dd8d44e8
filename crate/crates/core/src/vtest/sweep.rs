//! Bounded V-test sweeps.
//!
//! Layer `m` covers every `x` with denominator dividing `Q = 2^{dm} - 1`, where
//! `2^d - 1` is the least such number divisible by all (twisted) character
//! denominators. Pruning uses `lhs(N, x) = lhs(2N, 2x)`:
//!
//! * explicit path: `N` runs over the least elements of the `<2>`-orbits of
//!   units mod the character modulus `Lc`; for a fixed `N` the stabilizer is
//!   multiplication by `2^d`, so `x = c/Q` is kept when `c` is least among its
//!   rotations by multiples of `d` bits. Points are ordered by `(m, N, c)`.
//! * structured path (full product upstairs, downstairs `{}`, `Char(B)` or
//!   `Char(B) \ {1}`): the sets are stable under every unit `N`, so
//!   `lhs(N, x) = lhs(1, x + N x0)` and only `y = x + x0` with `N = 1` is swept.
//!   `y = c/Q` is kept when `c` is least among all its bit rotations. Points
//!   are ordered by `(m, c)`; the witness is reported as `(1, y - x0)`.
//!
//! On layers `m >= 2`, points already in a layer `m' | m` are skipped. The least
//! violating point in the order is always canonical, so the reported witness
//! does not depend on the worker count.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::charset::{DownstairsShape, HypSpecOf};
use crate::digits::Lattice;
use crate::error::{Error, Result};
use crate::qz::{mult_order, QzOf};
use crate::scalar::mulmod64;
use crate::spec_json::ser_rational;
use crate::vtest::eval::{threshold, vtest_lhs, VTestPoint};

/// Default cap on the number of sweep points.
pub const DEFAULT_BUDGET: u64 = 1 << 28;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepConfig {
    pub m_max: u32,
    /// Maximum number of points over all layers, checked before each layer.
    pub budget: u64,
    /// Worker threads; changes wall time only.
    pub jobs: usize,
    /// Evaluate every character term even when a closed form exists.
    pub force_naive: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            m_max: 1,
            budget: DEFAULT_BUDGET,
            jobs: 1,
            force_naive: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    PassUpToBound,
    FailWithWitness,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepPath {
    Explicit,
    Structured,
    ProductScan,
}

impl fmt::Display for SweepPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepPath::Explicit => "explicit",
            SweepPath::Structured => "structured",
            SweepPath::ProductScan => "product_scan",
        })
    }
}

/// A violating point with its exact left side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub point: VTestPoint<u64>,
    #[serde(serialize_with = "ser_rational")]
    pub lhs: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub threshold: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub slack: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub outcome: Outcome,
    /// Last layer explored (the failing layer for a witness).
    pub bound: u32,
    pub witness: Option<Witness>,
    /// Points up to and including the witness, or all points swept.
    pub points: u128,
    pub path: SweepPath,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.outcome == Outcome::PassUpToBound
    }
}

/// Re-evaluates a claimed witness through the naive path.
pub fn verify_witness(spec: &HypSpecOf<u64>, point: VTestPoint<u64>) -> Result<Witness> {
    let lhs = vtest_lhs(spec, &point);
    let threshold = threshold(spec);
    let slack = &lhs - &threshold;
    if !slack.is_negative() {
        return Err(Error::WitnessMismatch(format!(
            "N = {}, x = {}",
            point.n, point.x
        )));
    }
    Ok(Witness {
        point,
        lhs,
        threshold,
        slack,
    })
}

/// Runs the bounded V-test.
pub fn run_vtest(spec: &HypSpecOf<u64>, cfg: &SweepConfig) -> Result<Verdict> {
    if cfg.m_max == 0 {
        return Err(Error::Invalid("m_max must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| Error::Invalid(e.to_string()))?;
    pool.install(|| run_in_pool(spec, cfg))
}

/// Searches the lattice `x(i_1, ..., i_t) = sum i_j / (2^{a_j} + 1)` (shifted
/// by the twist) for a violation: tuples with every `i_j` nonzero first, each
/// group in lexicographic order. Scans at most `cfg.budget` points.
pub fn witness_search(spec: &HypSpecOf<u64>, cfg: &SweepConfig) -> Result<Option<(Witness, u128)>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| Error::Invalid(e.to_string()))?;
    pool.install(|| {
        let kernel = Kernel::for_spec(spec).ok_or_else(|| {
            Error::Unsupported(
                "witness search needs a product upstairs and a recognized downstairs set".into(),
            )
        })?;
        match product_scan(spec, &kernel, cfg.budget)? {
            ScanResult::Found {
                point,
                slack2k,
                weight,
                index,
            } => {
                let w = verify_witness(spec, point)?;
                check_slack(&w, slack2k, weight)?;
                Ok(Some((w, index + 1)))
            }
            ScanResult::Exhausted { .. } => Ok(None),
        }
    })
}

fn run_in_pool(spec: &HypSpecOf<u64>, cfg: &SweepConfig) -> Result<Verdict> {
    if spec.p() != 2 {
        return Err(Error::Unsupported(
            "sweeps are implemented for p = 2".into(),
        ));
    }
    let lc = spec
        .twisted_modulus()
        .to_u64()
        .ok_or(Error::Overflow("character modulus exceeds a word"))?;
    let d = mult_order(2, &lc)? as u32;
    let kernel = if cfg.force_naive {
        None
    } else {
        Kernel::for_spec(spec)
    };
    match kernel {
        Some(k) => match structured_sweep(spec, &k, d, cfg) {
            Err(Error::BudgetExceeded {
                required,
                budget,
                completed_bound,
                partial,
            }) => match product_scan(spec, &k, cfg.budget)? {
                ScanResult::Found {
                    point,
                    slack2k,
                    weight,
                    index,
                } => {
                    let w = verify_witness(spec, point)?;
                    check_slack(&w, slack2k, weight)?;
                    Ok(Verdict {
                        outcome: Outcome::FailWithWitness,
                        bound: 1,
                        witness: Some(w),
                        points: index + 1,
                        path: SweepPath::ProductScan,
                    })
                }
                ScanResult::Exhausted { scanned } => Err(Error::BudgetExceeded {
                    required,
                    budget,
                    completed_bound,
                    partial: format!(
                        "{partial}; x(i) lattice scan of {scanned} points found no violation"
                    ),
                }),
            },
            r => r,
        },
        None => explicit_sweep(spec, lc, d, cfg),
    }
}

fn check_slack(w: &Witness, slack2k: i64, weight: u64) -> Result<()> {
    let sweep = BigRational::new(BigInt::from(slack2k), BigInt::from(2 * weight));
    if sweep != w.slack {
        return Err(Error::WitnessMismatch(format!(
            "N = {}, x = {}: sweep slack {sweep}, naive slack {}",
            w.point.n, w.point.x, w.slack
        )));
    }
    Ok(())
}

fn budget_error(required: u128, cfg: &SweepConfig, m: u32, used: u128) -> Error {
    Error::BudgetExceeded {
        required,
        budget: cfg.budget,
        completed_bound: m - 1,
        partial: if m == 1 {
            "no layer completed".into()
        } else {
            format!("layers m = 1..{} passed ({used} points)", m - 1)
        },
    }
}

/// `c` rotated left by `s` bits inside a `k`-bit word.
#[inline]
fn rot(c: u64, s: u32, k: u32, q: u64) -> u64 {
    let c = c as u128;
    (((c << s) | (c >> (k - s))) as u64) & q
}

/// Whether `c` lies in a layer `m' | m`, `m' < m`, i.e. has period `d m'`.
#[inline]
fn in_lower_layer(c: u64, d: u32, m: u32, k: u32, q: u64) -> bool {
    (1..m).any(|mp| m.is_multiple_of(mp) && rot(c, d * mp, k, q) == c)
}

/// Whether `c` is least among its rotations by multiples of `step` bits.
#[inline]
fn least_rotation(c: u64, step: u32, k: u32, q: u64) -> bool {
    let mut s = step;
    while s < k {
        if rot(c, s, k, q) < c {
            return false;
        }
        s += step;
    }
    true
}

#[inline]
fn neg_pop(z: u64, k: u32) -> u32 {
    if z == 0 {
        0
    } else {
        k - z.count_ones()
    }
}

fn explicit_sweep(spec: &HypSpecOf<u64>, lc: u64, d: u32, cfg: &SweepConfig) -> Result<Verdict> {
    let up = spec.upstairs_set()?;
    let down = spec.downstairs_set();
    let reps = unit_orbit_reps(lc, d, cfg.budget)?;
    let bound2 = (spec.d() + spec.m() - 1) as u64;
    let mut used: u128 = 0;
    for m in 1..=cfg.m_max {
        let k = d * m;
        let required = (reps.len() as u128).saturating_mul(1u128 << k.min(127));
        if k > 63 || used + required > cfg.budget as u128 {
            return Err(budget_error(required, cfg, m, used));
        }
        let q = (1u64 << k) - 1;
        let over_q = |x: &QzOf<u64>| mulmod64(*x.num(), q / x.den(), q);
        let ups: Vec<u64> = up.iter().map(over_q).collect();
        let downs: Vec<u64> = down.iter().map(over_q).collect();
        for (rank, &n) in reps.iter().enumerate() {
            let tu: Vec<u64> = ups.iter().map(|&a| mulmod64(n, a, q)).collect();
            let td: Vec<u64> = downs.iter().map(|&b| mulmod64(n, b, q)).collect();
            let sum = |c: u64| -> u64 {
                let mut s = 0u64;
                for &t in &tu {
                    s += t.add_mod_word(c, q).count_ones() as u64;
                }
                for &t in &td {
                    s += neg_pop(t.add_mod_word(c, q), k) as u64;
                }
                s
            };
            let hit = (0..q).into_par_iter().find_first(|&c| {
                (m == 1 || (!in_lower_layer(c, d, m, k, q) && least_rotation(c, d, k, q)))
                    && 2 * sum(c) < bound2 * k as u64
            });
            if let Some(c) = hit {
                let x = QzOf::new(c, q, 2)?;
                let n_lift = lift_unit(n, lc, d);
                let w = verify_witness(spec, VTestPoint::new(n_lift, x))?;
                let slack2k = 2 * sum(c) as i64 - (bound2 * k as u64) as i64;
                check_slack(&w, slack2k, k as u64)?;
                return Ok(Verdict {
                    outcome: Outcome::FailWithWitness,
                    bound: m,
                    witness: Some(w),
                    points: used + rank as u128 * q as u128 + c as u128 + 1,
                    path: SweepPath::Explicit,
                });
            }
        }
        used += required;
    }
    Ok(Verdict {
        outcome: Outcome::PassUpToBound,
        bound: cfg.m_max,
        witness: None,
        points: used,
        path: SweepPath::Explicit,
    })
}

trait AddModWord {
    fn add_mod_word(self, c: u64, q: u64) -> u64;
}

impl AddModWord for u64 {
    #[inline]
    fn add_mod_word(self, c: u64, q: u64) -> u64 {
        let s = self as u128 + c as u128;
        if s >= q as u128 {
            (s - q as u128) as u64
        } else {
            s as u64
        }
    }
}

/// Least elements of the `<2>`-orbits on units mod `lc`, ascending.
pub(crate) fn unit_orbit_reps(lc: u64, d: u32, budget: u64) -> Result<Vec<u64>> {
    if lc == 1 {
        return Ok(vec![1]);
    }
    if lc > budget {
        return Err(Error::BudgetExceeded {
            required: lc as u128,
            budget,
            completed_bound: 0,
            partial: "enumerating units of the character modulus".into(),
        });
    }
    Ok((1..lc)
        .filter(|n| n.gcd(&lc) == 1)
        .filter(|&n| {
            let mut r = n;
            for _ in 1..d {
                r = mulmod64(r, 2, lc);
                if r < n {
                    return false;
                }
            }
            true
        })
        .collect())
}

/// Least `N' = N (mod lc)` that is a unit mod `2^d - 1`.
pub(crate) fn lift_unit(n: u64, lc: u64, d: u32) -> u64 {
    let ld = (1u128 << d) - 1;
    let mut cand = n as u128;
    while cand.gcd(&ld) != 1 {
        cand += lc as u128;
    }
    cand as u64
}

/// Multipliers of the collapsed evaluator and the downstairs closed form.
struct Kernel {
    /// `(prod_{j in S} (2^{a_j}+1), sign)` for every subset `S`.
    subsets: Vec<(BigUint, bool)>,
    shape: DownstairsShape,
    moduli: Vec<u64>,
}

impl Kernel {
    fn for_spec(spec: &HypSpecOf<u64>) -> Option<Self> {
        let prof = spec.profile()?;
        let shape = spec.downstairs().shape();
        if shape == DownstairsShape::Other || spec.p() != 2 {
            return None;
        }
        let moduli = prof.moduli();
        let t = moduli.len();
        let subsets = (0u32..1 << t)
            .map(|mask| {
                let prod: BigUint = moduli
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| mask >> j & 1 == 1)
                    .map(|(_, &m)| BigUint::from(m))
                    .product();
                (prod, (t - mask.count_ones() as usize).is_multiple_of(2))
            })
            .collect();
        Some(Self {
            subsets,
            shape,
            moduli,
        })
    }

    /// Word multipliers reduced mod `l`.
    fn reduced(&self, l: u64) -> (Vec<(u64, bool)>, u64) {
        let lb = BigUint::from(l);
        let subs = self
            .subsets
            .iter()
            .map(|(p, s)| ((p % &lb).to_u64().expect("reduced"), *s))
            .collect();
        let b = match self.shape {
            DownstairsShape::Full(b) | DownstairsShape::FullMinusTrivial(b) => b % l,
            _ => 0,
        };
        (subs, b)
    }

    fn down_modulus(&self) -> u64 {
        match self.shape {
            DownstairsShape::Full(b) | DownstairsShape::FullMinusTrivial(b) => b,
            _ => 1,
        }
    }

    /// `2 * weight * slack` at `y = c / l`, given a digit-sum function on the
    /// lattice `(1/l)Z/Z` of weight `k`.
    #[inline]
    fn slack2k(
        &self,
        c: u64,
        l: u64,
        k: u64,
        subs: &[(u64, bool)],
        b: u64,
        pop: impl Fn(u64) -> u64,
    ) -> i64 {
        let neg = |z: u64| if z == 0 { 0 } else { pop(l - z) };
        let mut s = 0i64;
        for &(pm, plus) in subs {
            let v = pop(mulmod64(c, pm, l)) as i64;
            s += if plus { v } else { -v };
        }
        let down = match self.shape {
            DownstairsShape::Empty => 0,
            DownstairsShape::Full(_) => 2 * neg(mulmod64(c, b, l)) as i64 - k as i64,
            DownstairsShape::FullMinusTrivial(_) => {
                2 * neg(mulmod64(c, b, l)) as i64 - 2 * neg(c) as i64
            }
            DownstairsShape::Other => unreachable!("kernel requires a recognized shape"),
        };
        2 * s + down + k as i64
    }
}

fn structured_sweep(
    spec: &HypSpecOf<u64>,
    kernel: &Kernel,
    d: u32,
    cfg: &SweepConfig,
) -> Result<Verdict> {
    let mut used: u128 = 0;
    for m in 1..=cfg.m_max {
        let k = d * m;
        let required = 1u128 << k.min(127);
        if k > 63 || used + required > cfg.budget as u128 {
            return Err(budget_error(required, cfg, m, used));
        }
        let q = (1u64 << k) - 1;
        let (subs, b) = kernel.reduced(q);
        let slack = |c: u64| kernel.slack2k(c, q, k as u64, &subs, b, |z| z.count_ones() as u64);
        let hit = (0..q).into_par_iter().find_first(|&c| {
            least_rotation(c, 1, k, q) && (m == 1 || !in_lower_layer(c, d, m, k, q)) && slack(c) < 0
        });
        if let Some(c) = hit {
            let y = QzOf::new(c, q, 2)?;
            let x = y.sub(spec.twist());
            let w = verify_witness(spec, VTestPoint::new(1, x))?;
            check_slack(&w, slack(c), k as u64)?;
            return Ok(Verdict {
                outcome: Outcome::FailWithWitness,
                bound: m,
                witness: Some(w),
                points: used + c as u128 + 1,
                path: SweepPath::Structured,
            });
        }
        used += required;
    }
    Ok(Verdict {
        outcome: Outcome::PassUpToBound,
        bound: cfg.m_max,
        witness: None,
        points: used,
        path: SweepPath::Structured,
    })
}

enum ScanResult {
    Found {
        point: VTestPoint<u64>,
        slack2k: i64,
        weight: u64,
        index: u128,
    },
    Exhausted {
        scanned: u128,
    },
}

fn product_scan(spec: &HypSpecOf<u64>, kernel: &Kernel, budget: u64) -> Result<ScanResult> {
    let prod: u64 = kernel
        .moduli
        .iter()
        .try_fold(1u64, |acc, &m| acc.checked_mul(m))
        .ok_or(Error::Overflow("product modulus exceeds a word"))?;
    let l = prod.lcm(&kernel.down_modulus());
    let extra = l / prod;
    let lat = Lattice::new(2, l)?;
    let (subs, b) = kernel.reduced(l);
    let k = lat.weight();
    // Coordinates: one per factor, then the extra downstairs factor if any.
    let mut radices: Vec<u64> = kernel.moduli.clone();
    let mut gens: Vec<u64> = kernel.moduli.iter().map(|&m| l / m).collect();
    if extra > 1 {
        radices.push(extra);
        gens.push(l / extra);
    }
    let t = kernel.moduli.len();
    let numerator = |digits: &[u64]| -> u64 {
        digits.iter().zip(&gens).fold(0u64, |acc, (&i, &g)| {
            (acc as u128 + mulmod64(i, g, l) as u128).rem_euclid(l as u128) as u64
        })
    };
    let slack = |c: u64| kernel.slack2k(c, l, k, &subs, b, |z| lat.digit_sum(z));

    let phase1: u128 = radices
        .iter()
        .enumerate()
        .map(|(j, &r)| if j < t { (r - 1) as u128 } else { r as u128 })
        .product();
    let total: u128 = radices.iter().map(|&r| r as u128).product();
    let budget = budget as u128;

    let decode = |mut idx: u128, nonzero: bool| -> Vec<u64> {
        let mut digits = vec![0u64; radices.len()];
        for j in (0..radices.len()).rev() {
            let r = if nonzero && j < t {
                radices[j] - 1
            } else {
                radices[j]
            } as u128;
            digits[j] = (idx % r) as u64 + u64::from(nonzero && j < t);
            idx /= r;
        }
        digits
    };

    let lim1 = phase1.min(budget);
    let hit = (0..lim1 as u64)
        .into_par_iter()
        .find_first(|&i| slack(numerator(&decode(i as u128, true))) < 0)
        .map(|i| (i as u128, decode(i as u128, true)));
    let hit = match hit {
        Some(h) => Some(h),
        None => {
            let span = total.min(budget.saturating_sub(lim1));
            (0..span as u64)
                .into_par_iter()
                .find_first(|&i| {
                    let dg = decode(i as u128, false);
                    dg[..t].contains(&0) && slack(numerator(&dg)) < 0
                })
                .map(|i| (phase1 + i as u128, decode(i as u128, false)))
        }
    };
    match hit {
        Some((index, digits)) => {
            let c = numerator(&digits);
            let y = QzOf::new(c, l, 2)?;
            let x = y.sub(spec.twist());
            Ok(ScanResult::Found {
                point: VTestPoint::new(1, x),
                slack2k: slack(c),
                weight: k,
                index,
            })
        }
        None => Ok(ScanResult::Exhausted {
            scanned: total.min(budget),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charset::CharSetOf;

    type S = CharSetOf<u64>;

    #[test]
    fn rotations() {
        let k = 6;
        let q = 63;
        assert_eq!(rot(0b000011, 1, k, q), 0b000110);
        assert_eq!(rot(0b100001, 1, k, q), 0b000011);
        assert!(least_rotation(0b000011, 1, k, q));
        assert!(!least_rotation(0b000110, 1, k, q));
        assert!(in_lower_layer(0b010101, 1, 6, k, q));
        assert!(!in_lower_layer(0b000011, 1, 6, k, q));
    }

    #[test]
    fn orbit_reps_of_units() {
        // Units mod 15 under doubling: {1,2,4,8}, {7,14,13,11}.
        assert_eq!(unit_orbit_reps(15, 4, 1 << 20).unwrap(), vec![1, 7]);
        assert_eq!(lift_unit(2, 5, 4), 2);
        assert_eq!(lift_unit(1, 3, 2), 1);
    }

    #[test]
    fn kloosterman_passes() {
        let spec = HypSpecOf::new(2, S::full_minus_trivial(&5, 2).unwrap(), S::empty()).unwrap();
        for naive in [false, true] {
            let cfg = SweepConfig {
                m_max: 2,
                force_naive: naive,
                ..Default::default()
            };
            let v = run_vtest(&spec, &cfg).unwrap();
            assert!(v.passed(), "{v:?}");
            assert_eq!(v.bound, 2);
        }
    }

    #[test]
    fn non_finite_sheaf_fails_identically_on_both_paths() {
        // Char(3) \ {1} over {1} has D = 2 > M = 1 but fails the test.
        let spec = HypSpecOf::new(
            2,
            S::full_minus_trivial(&9, 2).unwrap(),
            S::full(&1, 2).unwrap(),
        )
        .unwrap();
        let a = run_vtest(&spec, &SweepConfig::default()).unwrap();
        let b = run_vtest(
            &spec,
            &SweepConfig {
                force_naive: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(a.outcome, b.outcome);
    }

    #[test]
    fn budget_is_reported() {
        let spec = HypSpecOf::new(2, S::full_minus_trivial(&5, 2).unwrap(), S::empty()).unwrap();
        let cfg = SweepConfig {
            m_max: 3,
            budget: 300,
            ..Default::default()
        };
        match run_vtest(&spec, &cfg) {
            Err(Error::BudgetExceeded {
                completed_bound, ..
            }) => assert_eq!(completed_bound, 2),
            other => panic!("{other:?}"),
        }
    }
}
