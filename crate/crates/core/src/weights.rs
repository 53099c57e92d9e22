//! Weight sequences `b_k`, their Dirichlet metadata and the built-in
//! families.
//!
//! A weight sequence assigns a nonnegative real `b_k` to every component
//! size `k ≥ 1`; `b_k` counts the types of indecomposable components of size
//! `k` (for assemblies `b_k = m_k / k!` where `m_k` is the number of labelled
//! component types). The asymptotic machinery additionally needs the
//! analytic data of the Dirichlet series `D(s) = Σ b_k k^{-s}`: the pole
//! location `r`, its residue `A`, the values `D(0)`, `D'(0)` and the width
//! `C₀` of the continuation strip. Families that know this data carry it as
//! [`DirichletMeta`]; operations that need it fail fast otherwise.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::Error;
use crate::special;
use crate::Result;

/// The three classic decomposable structure types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StructureKind {
    /// Weighted partitions, generating function `prod (1-z^k)^(-b_k)`.
    Multiset,
    /// No (size, type) pair repeats, generating function `prod (1+z^k)^(b_k)`.
    Selection,
    /// Labelled structures, exponential generating function `exp(Σ b_k z^k)`.
    Assembly,
}

impl StructureKind {
    pub const ALL: [StructureKind; 3] = [
        StructureKind::Multiset,
        StructureKind::Selection,
        StructureKind::Assembly,
    ];

    /// Conventional index: 1 multisets, 2 selections, 3 assemblies.
    pub fn index(self) -> u8 {
        match self {
            StructureKind::Multiset => 1,
            StructureKind::Selection => 2,
            StructureKind::Assembly => 3,
        }
    }

    /// The modulus constant M^(i) of the characteristic-function bound:
    /// 4/ln 5 for multisets, 4 for selections, 1 for assemblies.
    pub fn modulus_constant(self) -> f64 {
        match self {
            StructureKind::Multiset => 4.0 / 5.0_f64.ln(),
            StructureKind::Selection => 4.0,
            StructureKind::Assembly => 1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            StructureKind::Multiset => "multiset",
            StructureKind::Selection => "selection",
            StructureKind::Assembly => "assembly",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "multiset" | "partition" | "1" => Ok(StructureKind::Multiset),
            "selection" | "2" => Ok(StructureKind::Selection),
            "assembly" | "3" => Ok(StructureKind::Assembly),
            other => Err(Error::InvalidParameter(format!(
                "unknown structure kind `{other}` (expected multiset|selection|assembly)"
            ))),
        }
    }
}

impl fmt::Display for StructureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Analytic data of the Dirichlet series `D(s) = Σ b_k k^(-s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirichletMeta {
    /// Pole location, r > 0.
    pub r: f64,
    /// Residue at the pole, A > 0.
    pub a: f64,
    /// D(0).
    pub d0: f64,
    /// D'(0).
    pub d0_prime: f64,
    /// Width of the analytic continuation strip, 0 < C₀ ≤ 1.
    pub c0: f64,
}

impl DirichletMeta {
    pub fn new(r: f64, a: f64, d0: f64, d0_prime: f64, c0: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::InvalidParameter(format!("pole r must be > 0, got {r}")));
        }
        if !(a > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "residue A must be > 0, got {a}"
            )));
        }
        if !(c0 > 0.0 && c0 <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "C0 must lie in (0, 1], got {c0}"
            )));
        }
        if !d0.is_finite() || !d0_prime.is_finite() {
            return Err(Error::InvalidParameter(
                "D(0), D'(0) must be finite".to_string(),
            ));
        }
        Ok(Self {
            r,
            a,
            d0,
            d0_prime,
            c0,
        })
    }
}

/// Constants derived from the metadata, computed once on first use.
#[derive(Debug, Clone, Copy)]
pub(crate) struct DerivedConstants {
    pub zeta_r_plus_1: f64,
    pub gamma_r: f64,
    pub gamma_r_plus_1: f64,
    pub gamma_r_plus_2: f64,
    pub gamma_r_plus_3: f64,
}

type WeightFn = dyn Fn(u64) -> f64 + Send + Sync;

/// A deterministic nonnegative weight sequence with optional Dirichlet
/// metadata. Immutable after construction; safe to share across threads.
pub struct WeightSequence {
    label: String,
    b: Arc<WeightFn>,
    meta: Option<DirichletMeta>,
    derived: OnceLock<DerivedConstants>,
    growth_constant: OnceLock<f64>,
}

impl fmt::Debug for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightSequence")
            .field("label", &self.label)
            .field("meta", &self.meta)
            .finish()
    }
}

impl WeightSequence {
    fn from_parts(
        label: impl Into<String>,
        meta: Option<DirichletMeta>,
        b: Arc<WeightFn>,
    ) -> Self {
        Self {
            label: label.into(),
            b,
            meta,
            derived: OnceLock::new(),
            growth_constant: OnceLock::new(),
        }
    }

    /// `b_k` for `k ≥ 1`.
    pub fn b(&self, k: u64) -> f64 {
        debug_assert!(k >= 1, "weights are indexed from k = 1");
        (self.b)(k)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn meta(&self) -> Option<&DirichletMeta> {
        self.meta.as_ref()
    }

    /// Metadata or a typed error naming the operation that needed it.
    pub fn require_meta(&self, op: &'static str) -> Result<&DirichletMeta> {
        self.meta.as_ref().ok_or_else(|| Error::MissingMeta {
            op,
            label: self.label.clone(),
        })
    }

    pub(crate) fn derived(&self) -> Result<&DerivedConstants> {
        let meta = self.require_meta("derived constants")?;
        if let Some(d) = self.derived.get() {
            return Ok(d);
        }
        let d = DerivedConstants {
            zeta_r_plus_1: special::zeta(meta.r + 1.0)?,
            gamma_r: special::gamma(meta.r)?,
            gamma_r_plus_1: special::gamma(meta.r + 1.0)?,
            gamma_r_plus_2: special::gamma(meta.r + 2.0)?,
            gamma_r_plus_3: special::gamma(meta.r + 3.0)?,
        };
        Ok(self.derived.get_or_init(|| d))
    }

    /// Empirical constant `max_{k ≤ 1e4} b_k / k^r` used in truncation-tail
    /// bounds. Falls back to exponent r = 1 when metadata is absent.
    pub(crate) fn growth_constant(&self) -> f64 {
        *self.growth_constant.get_or_init(|| {
            let r = self.meta.map_or(1.0, |m| m.r);
            let mut best = 0.0f64;
            for k in 1..=10_000u64 {
                let ratio = self.b(k) / (k as f64).powf(r);
                if ratio > best {
                    best = ratio;
                }
            }
            best.max(f64::MIN_POSITIVE)
        })
    }

    /// Power-law family `b_k = ρ k^(r-1)` (generalized Bose-Einstein gas;
    /// ρ = r = 1 is ordinary partitions, ρ = 1, r = 2 planar partitions).
    /// `D(s) = ρ ζ(s - r + 1)`: pole at r with residue ρ, `D(0) = ρ ζ(1-r)`,
    /// `D'(0) = ρ ζ'(1-r)`.
    pub fn power_law(rho: f64, r: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "power-law rho must be > 0, got {rho}"
            )));
        }
        if !(r > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "power-law r must be > 0, got {r}"
            )));
        }
        let d0 = rho * special::zeta(1.0 - r)?;
        let d0_prime = rho * special::zeta_prime(1.0 - r)?;
        let meta = DirichletMeta::new(r, rho, d0, d0_prime, 1.0)?;
        Ok(Self::from_parts(
            format!("power-law:rho={rho},r={r}"),
            Some(meta),
            Arc::new(move |k: u64| rho * (k as f64).powf(r - 1.0)),
        ))
    }

    /// The lattice family `b_k = 1` when `4 | k`, else 0. Its Dirichlet
    /// series `4^(-s) ζ(s)` has a simple pole at 1 with residue 1/4, yet the
    /// trigonometric sum vanishes identically at α = 1/4.
    pub fn example2() -> Self {
        let d0 = -0.5; // zeta(0)
        let d0_prime = 2.0 * std::f64::consts::LN_2 * 0.5
            - 0.5 * (2.0 * std::f64::consts::PI).ln(); // -ln4 * zeta(0) + zeta'(0)
        let meta = DirichletMeta::new(1.0, 0.25, d0, d0_prime, 1.0).expect("static meta");
        Self::from_parts(
            "example2",
            Some(meta),
            Arc::new(|k: u64| if k % 4 == 0 { 1.0 } else { 0.0 }),
        )
    }

    /// A three-branch logarithmic family built so that the weakened
    /// trigonometric condition holds while the classical power-bound
    /// condition fails. With `L(x) = ln(x)/x`:
    ///
    /// - `b_k = 12 e^7 L(k)` when `4 ∤ k`,
    /// - `b_k = 12 e^7 (50 + L(k) - 2 L(k/4))` when `4 | k`, `16 ∤ k`,
    /// - `b_k = 12 e^7 (50 + L(k) - 2 L(k/4) + L(k/16))` when `16 | k`.
    ///
    /// Its Dirichlet series is
    /// `D(s) = 12 e^7 (-(1-4^(-s))^2 ζ'(s+1) + 50 · 4^(-s) ζ(s))`,
    /// analytic except the simple pole of `50 · 4^(-s) ζ(s)` at s = 1, so
    /// the residue is `A = 12 e^7 · 50 / 4`. At s = 0 the squared factor
    /// `(1-4^(-s))^2` vanishes, leaving `D(0) = 12 e^7 · 50 · ζ(0)` and
    /// `D'(0) = 12 e^7 · 50 · (-ln 4 · ζ(0) + ζ'(0))`.
    pub fn example3() -> Self {
        let scale = 12.0 * 7.0_f64.exp();
        let zeta0 = -0.5;
        let zeta0_prime = -0.5 * (2.0 * std::f64::consts::PI).ln();
        let ln4 = 4.0_f64.ln();
        let meta = DirichletMeta::new(
            1.0,
            scale * 50.0 / 4.0,
            scale * 50.0 * zeta0,
            scale * 50.0 * (-ln4 * zeta0 + zeta0_prime),
            1.0,
        )
        .expect("static meta");
        let l = |x: f64| x.ln() / x;
        Self::from_parts(
            "example3",
            Some(meta),
            Arc::new(move |k: u64| {
                let kf = k as f64;
                if k % 4 != 0 {
                    scale * l(kf)
                } else if k % 16 != 0 {
                    scale * (50.0 + l(kf) - 2.0 * l(kf / 4.0))
                } else {
                    scale * (50.0 + l(kf) - 2.0 * l(kf / 4.0) + l(kf / 16.0))
                }
            }),
        )
    }

    /// Assembly-of-forests alias: components are labelled linear trees, so
    /// `m_k = k!` and `b_k = 1`. Same analytic data as `power_law(1, 1)`.
    pub fn forest() -> Self {
        let mut w = Self::power_law(1.0, 1.0).expect("valid parameters");
        w.label = "forest".to_string();
        w
    }

    /// Finite table of weights: `b_k = values[k-1]` for `k ≤ len`, 0 beyond.
    /// Carries no Dirichlet metadata.
    pub fn tabulated(values: Vec<f64>) -> Result<Self> {
        for (i, &v) in values.iter().enumerate() {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "tabulated weight b_{} = {v} must be a finite nonnegative real",
                    i + 1
                )));
            }
        }
        let values = Arc::new(values);
        let vals = Arc::clone(&values);
        Ok(Self::from_parts(
            format!("tabulated[{}]", values.len()),
            None,
            Arc::new(move |k: u64| {
                let idx = (k - 1) as usize;
                vals.get(idx).copied().unwrap_or(0.0)
            }),
        ))
    }

    /// Tabulated weights with explicit metadata attached (used when the
    /// caller knows the analytic continuation of a finite perturbation).
    pub fn tabulated_with_meta(values: Vec<f64>, meta: DirichletMeta) -> Result<Self> {
        let mut w = Self::tabulated(values)?;
        w.meta = Some(meta);
        Ok(w)
    }

    /// Parses a family identifier: `power-law:rho=R,r=S`, `example2`,
    /// `example3` or `forest`.
    pub fn parse_family(spec: &str) -> Result<Self> {
        match spec {
            "example2" => return Ok(Self::example2()),
            "example3" => return Ok(Self::example3()),
            "forest" => return Ok(Self::forest()),
            _ => {}
        }
        if let Some(args) = spec.strip_prefix("power-law:") {
            let mut rho = None;
            let mut r = None;
            for part in args.split(',') {
                let (key, value) = part.split_once('=').ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "malformed power-law parameter `{part}` (expected key=value)"
                    ))
                })?;
                let parsed: f64 = value.parse().map_err(|_| {
                    Error::InvalidParameter(format!("cannot parse `{value}` as a number"))
                })?;
                match key {
                    "rho" => rho = Some(parsed),
                    "r" => r = Some(parsed),
                    other => {
                        return Err(Error::InvalidParameter(format!(
                            "unknown power-law parameter `{other}`"
                        )))
                    }
                }
            }
            let rho = rho.ok_or_else(|| {
                Error::InvalidParameter("power-law spec missing rho".to_string())
            })?;
            let r = r
                .ok_or_else(|| Error::InvalidParameter("power-law spec missing r".to_string()))?;
            return Self::power_law(rho, r);
        }
        Err(Error::InvalidParameter(format!(
            "unknown weight family `{spec}` (expected power-law:rho=..,r=.. | example2 | example3 | forest | @file)"
        )))
    }
}

/// Result of scanning `b_k / k^r` for growth-bound violations.
#[derive(Debug, Clone)]
pub struct GrowthReport {
    /// `max_{1 ≤ k ≤ K} b_k / k^r`.
    pub max_ratio: f64,
    /// Maximum of the ratio over dyadic windows `[2^j, min(2^(j+1), K))`.
    pub window_maxima: Vec<f64>,
    /// Set when the windowed maximum is nondecreasing across the last three
    /// windows, contradicting `b_k = o(k^r)`.
    pub flagged: bool,
}

/// Scans `b_k / k^r` for `k ≤ max_k` and flags sequences whose dyadic window
/// maxima fail to decay, i.e. candidates violating `b_k = o(k^r)`.
pub fn check_growth_bound(w: &WeightSequence, max_k: u64) -> Result<GrowthReport> {
    let meta = w.require_meta("check_growth_bound")?;
    if max_k < 10 {
        return Err(Error::InvalidParameter(format!(
            "growth scan requires K >= 10, got {max_k}"
        )));
    }
    let r = meta.r;
    let mut max_ratio = 0.0f64;
    let mut window_maxima = Vec::new();
    let mut lo = 1u64;
    while lo <= max_k {
        let hi = (lo * 2).min(max_k + 1);
        let mut m = 0.0f64;
        for k in lo..hi {
            let ratio = w.b(k) / (k as f64).powf(r);
            if ratio > m {
                m = ratio;
            }
        }
        window_maxima.push(m);
        if m > max_ratio {
            max_ratio = m;
        }
        lo = hi;
    }
    let flagged = window_maxima
        .windows(3)
        .last()
        .is_some_and(|w3| w3[0] <= w3[1] && w3[1] <= w3[2]);
    Ok(GrowthReport {
        max_ratio,
        window_maxima,
        flagged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn power_law_unit_weights() {
        let w = WeightSequence::power_law(1.0, 1.0).unwrap();
        for k in [1u64, 2, 17, 1000] {
            assert_eq!(w.b(k), 1.0);
        }
        let meta = w.meta().unwrap();
        assert_relative_eq!(meta.d0, -0.5, max_relative = 1e-12);
        assert_relative_eq!(
            meta.d0_prime,
            -0.5 * (2.0 * std::f64::consts::PI).ln(),
            max_relative = 1e-12
        );
        assert_eq!(meta.r, 1.0);
        assert_eq!(meta.a, 1.0);
    }

    #[test]
    fn power_law_planar() {
        let w = WeightSequence::power_law(1.0, 2.0).unwrap();
        assert_eq!(w.b(5), 5.0);
        assert_relative_eq!(w.meta().unwrap().d0, -1.0 / 12.0, max_relative = 1e-12);
    }

    #[test]
    fn power_law_scaled() {
        let w = WeightSequence::power_law(2.0, 1.0).unwrap();
        assert_eq!(w.b(5), 2.0);
    }

    #[test]
    fn power_law_rejects_nonpositive() {
        assert!(WeightSequence::power_law(0.0, 1.0).is_err());
        assert!(WeightSequence::power_law(1.0, -2.0).is_err());
    }

    #[test]
    fn example2_lattice() {
        let w = WeightSequence::example2();
        assert_eq!(w.b(4), 1.0);
        assert_eq!(w.b(5), 0.0);
        assert_eq!(w.b(16), 1.0);
        assert_eq!(w.meta().unwrap().a, 0.25);
    }

    #[test]
    fn example3_branches() {
        let w = WeightSequence::example3();
        let scale = 12.0 * 7.0_f64.exp();
        assert_eq!(w.b(1), 0.0);
        assert_relative_eq!(w.b(3), scale * 3.0_f64.ln() / 3.0, max_relative = 1e-14);
        // 4 | 8, 16 does not divide 8.
        let want8 = scale * (50.0 + 8.0_f64.ln() / 8.0 - 2.0 * 2.0_f64.ln() / 2.0);
        assert_relative_eq!(w.b(8), want8, max_relative = 1e-14);
        // 16 | 32.
        let want32 = scale
            * (50.0 + 32.0_f64.ln() / 32.0 - 2.0 * 8.0_f64.ln() / 8.0 + 2.0_f64.ln() / 2.0);
        assert_relative_eq!(w.b(32), want32, max_relative = 1e-14);
    }

    #[test]
    fn example3_lower_bound_holds() {
        // b_k >= 12 e^7 ln(k)/k for all k (checked to 1e4).
        let w = WeightSequence::example3();
        let scale = 12.0 * 7.0_f64.exp();
        for k in 1..=10_000u64 {
            let floor = scale * (k as f64).ln() / k as f64;
            assert!(
                w.b(k) >= floor - 1e-9 * floor.abs(),
                "k = {k}: {} < {floor}",
                w.b(k)
            );
        }
    }

    #[test]
    fn builtin_families_nonnegative_log_sampled() {
        let families = [
            WeightSequence::power_law(1.0, 1.0).unwrap(),
            WeightSequence::power_law(1.0, 2.0).unwrap(),
            WeightSequence::power_law(0.5, 0.5).unwrap(),
            WeightSequence::example2(),
            WeightSequence::example3(),
            WeightSequence::forest(),
        ];
        let mut k = 1u64;
        while k <= 1_000_000 {
            for w in &families {
                assert!(w.b(k) >= 0.0, "{} at k = {k}", w.label());
            }
            k = (k as f64 * 1.37).ceil() as u64 + 1;
        }
    }

    #[test]
    fn tabulated_lookup_and_validation() {
        let w = WeightSequence::tabulated(vec![1.0, 0.0, 2.0]).unwrap();
        assert_eq!(w.b(3), 2.0);
        assert_eq!(w.b(4), 0.0);
        let empty = WeightSequence::tabulated(vec![]).unwrap();
        assert_eq!(empty.b(1), 0.0);
        assert_eq!(empty.b(100), 0.0);
        let half = WeightSequence::tabulated(vec![0.5]).unwrap();
        assert_eq!(half.b(1), 0.5);
        assert!(WeightSequence::tabulated(vec![1.0, -0.1]).is_err());
    }

    #[test]
    fn deterministic_evaluation() {
        let w = WeightSequence::example3();
        for k in 1..200 {
            assert_eq!(w.b(k).to_bits(), w.b(k).to_bits());
        }
    }

    #[test]
    fn growth_bound_power_law_clean() {
        let w = WeightSequence::power_law(1.0, 1.0).unwrap();
        let report = check_growth_bound(&w, 1000).unwrap();
        assert!(!report.flagged);
        assert_relative_eq!(report.max_ratio, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn growth_bound_example2_clean() {
        let report = check_growth_bound(&WeightSequence::example2(), 1000).unwrap();
        assert!(!report.flagged);
        assert!(report.max_ratio <= 0.25);
    }

    #[test]
    fn growth_bound_flags_quadratic_under_linear_claim() {
        // b_k = k^2 declared to have r = 1: ratio k grows, must flag.
        let values: Vec<f64> = (1..=100u64).map(|k| (k * k) as f64).collect();
        let meta = DirichletMeta::new(1.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        let w = WeightSequence::tabulated_with_meta(values, meta).unwrap();
        let report = check_growth_bound(&w, 100).unwrap();
        assert!(report.flagged);
    }

    #[test]
    fn growth_bound_requires_meta_and_sane_k() {
        let w = WeightSequence::tabulated(vec![1.0]).unwrap();
        assert!(matches!(
            check_growth_bound(&w, 100),
            Err(Error::MissingMeta { .. })
        ));
        let w2 = WeightSequence::power_law(1.0, 1.0).unwrap();
        assert!(check_growth_bound(&w2, 5).is_err());
    }

    #[test]
    fn parse_family_specs() {
        let w = WeightSequence::parse_family("power-law:rho=1,r=2").unwrap();
        assert_eq!(w.b(3), 3.0);
        assert!(WeightSequence::parse_family("example2").is_ok());
        assert!(WeightSequence::parse_family("example3").is_ok());
        assert!(WeightSequence::parse_family("forest").is_ok());
        assert!(WeightSequence::parse_family("nope").is_err());
        assert!(WeightSequence::parse_family("power-law:rho=1").is_err());
        assert!(WeightSequence::parse_family("power-law:rho=x,r=1").is_err());
    }
}
