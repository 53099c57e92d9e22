//! The probabilistic core: tilted component ensembles, the saddle equation,
//! the lattice point probability and the characteristic function.
//!
//! For a weight sequence `b_k` and tilt `δ > 0`, the component variables
//! `Y_k / k` are independent with laws
//!
//! - NegativeBinomial(b_k; e^(-kδ)) for multisets,
//! - Binomial(b_k; e^(-kδ)/(1+e^(-kδ))) for selections,
//! - Poisson(b_k e^(-kδ)) for assemblies,
//!
//! and `Z_n = Σ_{k≤n} Y_k` rebuilds the counts through the exact identity
//! `c_n = e^(nδ) f_n(e^(-δ)) P(Z_n = n)`, valid for every `δ > 0`. The tilt
//! `δ_n` solving `E Z_n = n` makes the point probability asymptotically
//! Gaussian, which is what the estimate modules exploit.

use num_complex::Complex64;

use crate::error::Error;
use crate::exec;
use crate::util::{cos_pi, sin_pi, Kahan, KahanComplex};
use crate::weights::{StructureKind, WeightSequence};
use crate::Result;

/// Convolution is quadratic in `n`; past this size use the quadrature.
pub const CONVOLUTION_LIMIT: u64 = 4000;

/// First three cumulants of `Z_n` at a fixed tilt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub third_cumulant: f64,
}

/// A weight sequence together with a structure kind, truncation level `n`
/// and tilt `δ`. Immutable; evaluations at distinct `α` are independent.
#[derive(Debug, Clone, Copy)]
pub struct TiltedEnsemble<'w> {
    w: &'w WeightSequence,
    kind: StructureKind,
    n: u64,
    delta: f64,
}

impl<'w> TiltedEnsemble<'w> {
    /// Requires `δ > 0`. `n = 0` denotes the empty ensemble (`f_0 = 1`,
    /// `Z_0 = 0`), which keeps the reconstruction identity total.
    pub fn new(w: &'w WeightSequence, kind: StructureKind, n: u64, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "tilt delta must be a positive real, got {delta}"
            )));
        }
        Ok(Self { w, kind, n, delta })
    }

    pub fn weights(&self) -> &'w WeightSequence {
        self.w
    }

    pub fn kind(&self) -> StructureKind {
        self.kind
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `log f_n(e^(-δ))`: `-Σ b_k ln(1-e^(-kδ))` (multiset),
    /// `Σ b_k ln(1+e^(-kδ))` (selection), `Σ b_k e^(-kδ)` (assembly),
    /// truncated at `k = n`, compensated summation.
    pub fn log_fn(&self) -> f64 {
        let mut acc = Kahan::new();
        for k in 1..=self.n {
            let kd = k as f64 * self.delta;
            if kd > 745.0 {
                break; // e^(-kδ) underflows; remaining terms are exact zeros
            }
            let b = self.w.b(k);
            if b == 0.0 {
                continue;
            }
            let term = match self.kind {
                // 1 - e^(-kδ) = -expm1(-kδ), accurate for small kδ.
                StructureKind::Multiset => -b * (-(-kd).exp_m1()).ln(),
                StructureKind::Selection => b * (-kd).exp().ln_1p(),
                StructureKind::Assembly => b * (-kd).exp(),
            };
            acc.add(term);
        }
        acc.value()
    }

    /// First three cumulants of `Z_n` from the per-component closed forms.
    /// With `q = e^(-kδ)`:
    ///
    /// ```text
    /// multiset:  mean k b q/(1-q),  var k² b q/(1-q)²,  κ₃ k³ b q(1+q)/(1-q)³
    /// selection: mean k b q/(1+q),  var k² b q/(1+q)²,  κ₃ k³ b q(1-q)/(1+q)³
    /// assembly:  all equal to k^j b q
    /// ```
    pub fn moments(&self) -> Moments {
        let mut mean = Kahan::new();
        let mut var = Kahan::new();
        let mut third = Kahan::new();
        for k in 1..=self.n {
            let kf = k as f64;
            let kd = kf * self.delta;
            if kd > 745.0 {
                break;
            }
            let b = self.w.b(k);
            if b == 0.0 {
                continue;
            }
            let q = (-kd).exp();
            match self.kind {
                StructureKind::Multiset => {
                    let omq = -(-kd).exp_m1(); // 1 - q without cancellation
                    mean.add(kf * b * q / omq);
                    var.add(kf * kf * b * q / (omq * omq));
                    third.add(kf * kf * kf * b * q * (1.0 + q) / (omq * omq * omq));
                }
                StructureKind::Selection => {
                    let opq = 1.0 + q;
                    mean.add(kf * b * q / opq);
                    var.add(kf * kf * b * q / (opq * opq));
                    third.add(kf * kf * kf * b * q * (1.0 - q) / (opq * opq * opq));
                }
                StructureKind::Assembly => {
                    let base = b * q;
                    mean.add(kf * base);
                    var.add(kf * kf * base);
                    third.add(kf * kf * kf * base);
                }
            }
        }
        Moments {
            mean: mean.value(),
            variance: var.value(),
            third_cumulant: third.value(),
        }
    }

    /// log of the characteristic factor ratio summed over `k ≤ n`:
    /// `log φ_n(α) = Σ_k b_k (g_k(z) - g_k(e^(-δ)))` with
    /// `z^k = e^(-kδ) e^(2πi kα)`. Each factor stays in the right half-plane
    /// (`Re(1 ∓ z^k) > 0`), so the principal branch per factor is exact and
    /// no winding bookkeeping is needed.
    fn log_char_fn(&self, alpha: f64) -> Complex64 {
        let mut acc = KahanComplex::new();
        for k in 1..=self.n {
            let kf = k as f64;
            let kd = kf * self.delta;
            if kd > 745.0 {
                break;
            }
            let b = self.w.b(k);
            if b == 0.0 {
                continue;
            }
            let q = (-kd).exp();
            let phase = 2.0 * (kf * alpha);
            let zk = Complex64::new(q * cos_pi(phase), q * sin_pi(phase));
            let term = match self.kind {
                StructureKind::Multiset => {
                    let num = Complex64::new(1.0, 0.0) - zk;
                    let den = -(-kd).exp_m1();
                    -(num.ln() - Complex64::new(den.ln(), 0.0))
                }
                StructureKind::Selection => {
                    let num = Complex64::new(1.0, 0.0) + zk;
                    num.ln() - Complex64::new(q.ln_1p(), 0.0)
                }
                StructureKind::Assembly => zk - Complex64::new(q, 0.0),
            };
            acc.add(term * b);
        }
        acc.value()
    }

    /// Characteristic function `φ_n(α) = f_n(e^(-δ+2πiα)) / f_n(e^(-δ))`,
    /// computed in log space. `|φ_n| ≤ 1` holds analytically; the real part
    /// of the log is clamped at 0 to keep it true under roundoff.
    pub fn char_fn(&self, alpha: f64) -> Complex64 {
        let lg = self.log_char_fn(alpha);
        let re = lg.re.min(0.0);
        re.exp() * Complex64::new(lg.im.cos(), lg.im.sin())
    }

    /// `log |φ_n(α)|` (≤ 0), exposed for the modulus-bound checks.
    pub fn log_char_modulus(&self, alpha: f64) -> f64 {
        self.log_char_fn(alpha).re.min(0.0)
    }

    /// Exact-in-model `P(Z_n = n)` by sequential lattice convolution of the
    /// truncated component laws; O(n² log n) work, capped at
    /// [`CONVOLUTION_LIMIT`]. Mass falling beyond `n` is absorbed by an
    /// overflow cell; cells `≤ n` are unaffected since all `Y_k ≥ 0`.
    pub fn point_prob_convolution(&self) -> Result<PointProbability> {
        if self.n > CONVOLUTION_LIMIT {
            return Err(Error::TooLarge {
                n: self.n,
                limit: CONVOLUTION_LIMIT,
                op: "point_prob_convolution",
            });
        }
        let n = self.n as usize;
        let mut dist = vec![0.0f64; n + 1];
        dist[0] = 1.0;
        let mut overflow = 0.0f64;
        let mut log_scale = 0.0f64;
        let mut pmf = Vec::new();
        for k in 1..=self.n {
            let b = self.w.b(k);
            if b == 0.0 {
                continue;
            }
            self.component_pmf(k, b, &mut pmf)?;
            let tail = (1.0 - pmf.iter().sum::<f64>()).max(0.0);
            let ku = k as usize;
            let mut next = vec![0.0f64; n + 1];
            for (j, &pj) in pmf.iter().enumerate() {
                if pj == 0.0 {
                    continue;
                }
                let shift = j * ku;
                for m in shift..=n {
                    next[m] += pj * dist[m - shift];
                }
                // mass pushed past n by this component value
                if shift > 0 {
                    let lost: f64 = dist[n + 1 - shift..].iter().sum();
                    overflow += pj * lost * log_scale.exp();
                }
            }
            let carried: f64 = dist.iter().sum();
            overflow += tail * carried * log_scale.exp();

            let peak = next.iter().cloned().fold(0.0f64, f64::max);
            let peak = if peak > 0.0 { peak } else { 1.0 };
            for v in &mut next {
                *v /= peak;
            }
            log_scale += peak.ln();
            dist = next;
        }
        // The lattice cells plus the overflow cell carry the whole mass.
        let conserved = dist.iter().sum::<f64>() * log_scale.exp() + overflow;
        debug_assert!(
            (conserved - 1.0).abs() < 1e-6,
            "mass conservation violated: {conserved}"
        );
        let log_value = dist[n].ln() + log_scale;
        Ok(PointProbability {
            value: log_value.exp(),
            log_value,
            method: ProbMethod::Convolution,
            error_estimate: 0.0,
            imaginary_residual: 0.0,
        })
    }

    /// Truncated pmf of `Y_k / k` on `j = 0..=n/k` into `out`.
    fn component_pmf(&self, k: u64, b: f64, out: &mut Vec<f64>) -> Result<()> {
        out.clear();
        let kd = k as f64 * self.delta;
        let q = (-kd).exp();
        let j_max = (self.n / k) as usize;
        match self.kind {
            StructureKind::Multiset => {
                // NegativeBinomial(b; q): P(j+1) = P(j) q (b+j)/(j+1).
                let omq_log = (-(-kd).exp_m1()).ln();
                let mut p = (b * omq_log).exp();
                for j in 0..=j_max {
                    out.push(p);
                    p *= q * (b + j as f64) / (j as f64 + 1.0);
                }
            }
            StructureKind::Selection => {
                // Binomial(b; p), p/(1-p) = q; requires integer b.
                if b.fract() != 0.0 {
                    return Err(Error::NonIntegerWeight {
                        k,
                        value: b,
                        context: "selection pmf needs integer b_k (generalized binomial weights can be negative)",
                    });
                }
                let bi = b as u64;
                let mut p = (-(b * q.ln_1p())).exp();
                for j in 0..=j_max.min(bi as usize) {
                    out.push(p);
                    p *= q * (b - j as f64) / (j as f64 + 1.0);
                }
            }
            StructureKind::Assembly => {
                let lambda = b * q;
                let mut p = (-lambda).exp();
                for j in 0..=j_max {
                    out.push(p);
                    p *= lambda / (j as f64 + 1.0);
                }
            }
        }
        Ok(())
    }

    /// `P(Z_n = n)` as the Fourier inversion
    /// `∫_{-1/2}^{1/2} φ_n(α) e^(-2πinα) dα`.
    ///
    /// The domain splits at `α₀ = δ^((r+2)/(2(r+1))) ln²n` (capped at 1/2;
    /// no split without metadata): a uniform grid with at least 40 points
    /// per standard-deviation width `1/B_n` covers `|α| ≤ α₀`, adaptive
    /// Simpson covers the exponentially small remainder. The error estimate
    /// comes from doubling the grid; the value returned is the refined one.
    pub fn point_prob_quadrature(&self) -> Result<PointProbability> {
        let moments = self.moments();
        let bn = moments.variance.max(f64::MIN_POSITIVE).sqrt();
        let alpha0 = match self.w.meta() {
            Some(meta) if self.n >= 2 => {
                let ln_n = (self.n as f64).ln();
                (self
                    .delta
                    .powf((meta.r + 2.0) / (2.0 * (meta.r + 1.0)))
                    * ln_n
                    * ln_n)
                    .min(0.5)
            }
            _ => 0.5,
        };
        let full_period = alpha0 >= 0.5;
        let width = 2.0 * alpha0;
        let base_m = ((40.0 * bn * width).ceil() as usize)
            .max((4.0 * (self.n as f64 + 1.0) * width).ceil() as usize)
            .max(512);

        let (coarse, _) = self.inner_integral(alpha0, base_m, full_period);
        let (fine, imag) = self.inner_integral(alpha0, base_m * 2, full_period);

        let mut value = fine.re;
        let mut error = (fine.re - coarse.re).abs();
        if !full_period {
            // Conjugate-symmetric pair of tails: 2 Re ∫_{α₀}^{1/2}.
            let tail = crate::util::adaptive_simpson_complex(
                &|alpha| self.char_fn(alpha) * self.phase(alpha),
                alpha0,
                0.5,
                1e-14 * value.abs().max(1e-300),
            );
            value += 2.0 * tail.re;
            error += 1e-13 * tail.re.abs();
        }
        let value = value.max(0.0);
        Ok(PointProbability {
            value,
            log_value: value.ln(),
            method: ProbMethod::Quadrature,
            error_estimate: error,
            imaginary_residual: imag.abs(),
        })
    }

    fn phase(&self, alpha: f64) -> Complex64 {
        let t = 2.0 * (self.n as f64 * alpha);
        Complex64::new(cos_pi(t), -sin_pi(t))
    }

    /// Trapezoid/periodic sum over the inner region with deterministic
    /// chunked reduction; returns (integral, imaginary residual).
    fn inner_integral(&self, alpha0: f64, m: usize, full_period: bool) -> (Complex64, f64) {
        let this = *self;
        if full_period {
            // Periodic trapezoid = plain average over m equispaced points.
            let h = 1.0 / m as f64;
            let total = exec::indexed_sum_complex(m, move |j| {
                let alpha = -0.5 + j as f64 * h;
                this.char_fn(alpha) * this.phase(alpha)
            });
            let v = total * h;
            (v, v.im)
        } else {
            // Composite trapezoid on [-α₀, α₀]; endpoint values are
            // Gaussian-small by the choice of α₀.
            let h = 2.0 * alpha0 / m as f64;
            let total = exec::indexed_sum_complex(m + 1, move |j| {
                let alpha = -alpha0 + j as f64 * h;
                let fv = this.char_fn(alpha) * this.phase(alpha);
                if j == 0 || j == m {
                    fv * 0.5
                } else {
                    fv
                }
            });
            let v = total * h;
            (v, v.im)
        }
    }

    /// `log ĉ_n = nδ + log f_n(e^(-δ)) + log P(Z_n = n)`, an exact identity
    /// with `log c_n` for every `δ > 0`.
    pub fn reconstruct_count(&self, p: &PointProbability) -> Result<f64> {
        if p.value <= 0.0 {
            return Err(Error::ZeroProbability);
        }
        Ok(self.n as f64 * self.delta + self.log_fn() + p.log_value)
    }
}

/// How a point probability was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbMethod {
    Convolution,
    Quadrature,
}

/// `P(Z_n = n)` with provenance and error information.
#[derive(Debug, Clone, Copy)]
pub struct PointProbability {
    /// The probability, in `[0, 1]`.
    pub value: f64,
    /// `ln value`; kept separately so extreme tilts cannot underflow the
    /// reconstruction identity.
    pub log_value: f64,
    pub method: ProbMethod,
    /// 0 for the convolution (exact in the model up to roundoff); a grid
    /// refinement estimate for the quadrature.
    pub error_estimate: f64,
    /// Magnitude of the imaginary part of the Fourier integral; the
    /// integrand is Hermitian so this is a pure roundoff diagnostic.
    pub imaginary_residual: f64,
}

/// Solved tilt `δ_n` with its residual and the cumulants of `Z_n` at `δ_n`.
#[derive(Debug, Clone, Copy)]
pub struct SaddlePoint {
    /// Root of `E Z_n(δ) = n`.
    pub delta_n: f64,
    /// `E Z_n(δ_n) - n`.
    pub residual: f64,
    pub mean: f64,
    /// `B_n² = Var Z_n > 0`.
    pub variance: f64,
    /// `T_n`, the third cumulant of `Z_n`.
    pub third_cumulant: f64,
    pub iterations: u32,
}

/// Supremum of `E Z_n(δ)` as `δ → 0⁺`: `+∞` for multisets with any positive
/// weight (each geometric factor diverges), `½ Σ k b_k` for selections and
/// `Σ k b_k` for assemblies.
fn mean_supremum(w: &WeightSequence, kind: StructureKind, n: u64) -> (f64, &'static str) {
    match kind {
        StructureKind::Multiset => {
            let any_positive = (1..=n).any(|k| w.b(k) > 0.0);
            if any_positive {
                (f64::INFINITY, "multiset: sup E Z_n = +inf when some b_k > 0")
            } else {
                (0.0, "multiset: needs some b_k > 0 for k <= n")
            }
        }
        StructureKind::Selection => {
            let s: f64 = (1..=n).map(|k| k as f64 * w.b(k)).sum::<f64>() * 0.5;
            (s, "selection: needs (1/2) sum k b_k > n")
        }
        StructureKind::Assembly => {
            let s: f64 = (1..=n).map(|k| k as f64 * w.b(k)).sum();
            (s, "assembly: needs sum k b_k > n")
        }
    }
}

/// Solves the saddle equation `E Z_n(δ_n) = n` by bracketed bisection with a
/// Newton polish (`dE/dδ = -B_n²`, nonzero whenever the mean is), to
/// relative accuracy 1e-9.
pub fn solve_saddle(w: &WeightSequence, kind: StructureKind, n: u64) -> Result<SaddlePoint> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "saddle equation needs n >= 1".to_string(),
        ));
    }
    let (supremum, rule) = mean_supremum(w, kind, n);
    if supremum <= n as f64 {
        return Err(Error::Unsolvable { n, supremum, rule });
    }
    let mean_at = |delta: f64| -> f64 {
        TiltedEnsemble::new(w, kind, n, delta)
            .expect("positive delta")
            .moments()
            .mean
    };

    // Bracket the decreasing map δ -> E Z_n(δ) around n.
    let (mut lo, mut hi) = match w.derived() {
        Ok(consts) => {
            let meta = w.meta().expect("derived implies meta");
            let h = match kind {
                StructureKind::Multiset => {
                    meta.a * consts.gamma_r_plus_1 * consts.zeta_r_plus_1
                }
                StructureKind::Selection => {
                    meta.a
                        * consts.gamma_r_plus_1
                        * (1.0 - 2.0_f64.powf(-meta.r))
                        * consts.zeta_r_plus_1
                }
                StructureKind::Assembly => meta.a * consts.gamma_r_plus_1,
            };
            let principal = (h / n as f64).powf(1.0 / (meta.r + 1.0));
            (principal / 10.0, principal * 10.0)
        }
        Err(_) => (1e-12, 50.0),
    };
    let mut iterations = 0u32;
    while mean_at(hi) > n as f64 {
        hi *= 2.0;
        iterations += 1;
        if hi > 1e9 {
            return Err(Error::Domain(
                "saddle bracket expansion failed on the right".to_string(),
            ));
        }
    }
    while mean_at(lo) < n as f64 {
        lo *= 0.25;
        iterations += 1;
        if lo < 1e-300 {
            return Err(Error::Unsolvable {
                n,
                supremum: mean_at(1e-300),
                rule,
            });
        }
    }

    let target = n as f64;
    let tol = 1e-9 * target;
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let e = mean_at(mid);
        iterations += 1;
        if (e - target).abs() <= 0.25 * tol || (hi - lo) < 1e-14 * mid {
            break;
        }
        if e > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // Newton polish with the analytic derivative.
    let mut delta = mid;
    for _ in 0..6 {
        let ens = TiltedEnsemble::new(w, kind, n, delta)?;
        let m = ens.moments();
        iterations += 1;
        let resid = m.mean - target;
        if resid.abs() <= 0.1 * tol {
            break;
        }
        let step = resid / m.variance;
        let candidate = delta + step;
        if candidate > 0.0 && candidate.is_finite() {
            delta = candidate;
        } else {
            break;
        }
    }

    let ens = TiltedEnsemble::new(w, kind, n, delta)?;
    let m = ens.moments();
    let residual = m.mean - target;
    if residual.abs() > tol {
        return Err(Error::Domain(format!(
            "saddle solver failed to reach |E Z_n - n| <= 1e-9 n (residual {residual:e} at delta {delta:e})"
        )));
    }
    Ok(SaddlePoint {
        delta_n: delta,
        residual,
        mean: m.mean,
        variance: m.variance,
        third_cumulant: m.third_cumulant,
        iterations,
    })
}

/// Diagnostic: the untruncated mean `-(log F)'(δ) = Σ_{k≥1} ...` summed to
/// numerical convergence, with a crude integral bound on the dropped tail.
/// The saddle equation itself always uses the truncated sum.
pub fn untruncated_mean(w: &WeightSequence, kind: StructureKind, delta: f64) -> Result<(f64, f64)> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let r = w.meta().map_or(1.0, |m| m.r);
    let cutoff = (((1.0 / 1e-12_f64).ln() + (r + 2.0) * (1.0 / delta).ln()) / delta).ceil();
    let cutoff = cutoff.max(64.0) as u64;
    let ens = TiltedEnsemble::new(w, kind, cutoff, delta)?;
    let mean = ens.moments().mean;
    // tail <= C ∫_K^∞ x^(r+1) e^(-δx) dx with empirical C, bounded by the
    // geometric-decay estimate below (valid once Kδ > r+1).
    let c = w.growth_constant();
    let kd = cutoff as f64 * delta;
    let tail_bound = if kd > r + 2.0 {
        c * (cutoff as f64).powf(r + 1.0) * (-kd).exp() / (delta - (r + 1.0) / cutoff as f64)
    } else {
        f64::INFINITY
    };
    Ok((mean, tail_bound))
}
