//! Small numerical helpers: compensated summation, argument-exact
//! trigonometry on the lattice, adaptive quadrature and big-integer logs.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Bernoulli numbers B_2, B_4, ..., B_30 (odd ones beyond B_1 vanish).
pub(crate) const BERNOULLI_EVEN: [f64; 15] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
];

/// Neumaier-compensated accumulator. Long positive sums in this crate
/// (truncated generating functions, trigonometric sums with up to ~1e6
/// terms) need the compensation: plain accumulation loses ~5 digits at the
/// term counts reached for delta = 1e-4.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Complex compensated accumulator (component-wise Neumaier).
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanComplex {
    re: Kahan,
    im: Kahan,
}

impl KahanComplex {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// `sin(pi * x)` with exact argument reduction modulo 2.
///
/// The reduction `x % 2`, the shift into `[0, 1)` and the fold onto
/// `[0, 1/2]` are all exact floating-point operations, so lattice zeros are
/// hit exactly: `sin_pi(k/4)` is bit-zero for `4 | k`, for any magnitude of
/// `k`. Plain `f64::sin(PI * k * alpha)` loses one digit per decade of `k`.
pub(crate) fn sin_pi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    let mut r = x % 2.0;
    if r < 0.0 {
        r += 2.0;
    }
    let mut sign = 1.0;
    if r >= 1.0 {
        r -= 1.0;
        sign = -1.0;
    }
    if r > 0.5 {
        r = 1.0 - r;
    }
    sign * (std::f64::consts::PI * r).sin()
}

/// `cos(pi * x)` with the same exact reduction as [`sin_pi`].
pub(crate) fn cos_pi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    let mut r = x % 2.0;
    if r < 0.0 {
        r += 2.0;
    }
    if r > 1.0 {
        r = 2.0 - r;
    }
    if r > 0.5 {
        -(std::f64::consts::PI * (1.0 - r)).cos()
    } else {
        (std::f64::consts::PI * r).cos()
    }
}

/// `sin^2(pi * x)` via [`sin_pi`]; exact zero on the integer lattice.
#[inline]
pub(crate) fn sin2_pi(x: f64) -> f64 {
    let s = sin_pi(x);
    s * s
}

/// Natural log of a positive big integer without overflow, accurate to
/// ~1 ulp of the result (top 53 bits drive the mantissa, the bit length
/// drives the exponent).
pub(crate) fn ln_bigint(x: &BigInt) -> f64 {
    debug_assert!(x.is_positive());
    let bits = x.bits();
    if bits <= 53 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 53;
    let top: BigInt = x >> shift;
    top.to_f64().expect("53-bit value").ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of a positive big rational.
pub(crate) fn ln_bigrational(x: &BigRational) -> f64 {
    debug_assert!(x.is_positive());
    ln_bigint(x.numer()) - ln_bigint(x.denom())
}

/// Returns true when `x` is zero.
pub(crate) fn rational_is_zero(x: &BigRational) -> bool {
    x.is_zero()
}

const SIMPSON_MAX_DEPTH: u32 = 48;

/// Adaptive Simpson quadrature for real integrands.
pub(crate) fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, SIMPSON_MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Adaptive Simpson quadrature for complex integrands.
pub(crate) fn adaptive_simpson_complex<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
) -> Complex64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (fa + 4.0 * fm + fb) * ((b - a) / 6.0);
    simpson_step_complex(f, a, b, fa, fm, fb, whole, tol, SIMPSON_MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step_complex<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
) -> Complex64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (fa + 4.0 * flm + fm) * ((m - a) / 6.0);
    let right = (fm + 4.0 * frm + fb) * ((b - m) / 6.0);
    let delta = left + right - whole;
    if depth == 0 || delta.norm() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step_complex(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_step_complex(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}
