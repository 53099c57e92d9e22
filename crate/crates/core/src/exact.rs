//! Exact counts of weighted partitions, selections and assemblies.
//!
//! Counts are produced by logarithmic-derivative recurrences in exact
//! arithmetic: with `Λ(m)` the divisor sums below,
//!
//! ```text
//! n c_n = Σ_{m=1}^{n} Λ(m) c_{n-m},      c_0 = 1,
//! Λ(m) = Σ_{d|m} d b_d                    (multisets)
//! Λ(m) = Σ_{d|m} (-1)^(m/d+1) d b_d       (selections)
//! Λ(m) = m b_m                            (assemblies)
//! ```
//!
//! Multisets and selections require integer `b_k` (type multiplicities) and
//! produce big integers. Assemblies count labelled structures through the
//! integer recurrence `s_n = Σ_k C(n-1, k-1) m_k s_{n-k}` and expose
//! `c_n = s_n / n!` as exact rationals. A brute-force enumeration over
//! partitions of `n` serves as an independent oracle for small `n`.

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::Error;
use crate::util::{ln_bigrational, rational_is_zero};
use crate::weights::{StructureKind, WeightSequence};
use crate::Result;

/// Hard cap for the enumeration oracle.
pub const BRUTE_FORCE_LIMIT: u64 = 25;

/// Exact counts `c_0..c_N` for one structure kind.
///
/// For multisets and selections the entries are integers (stored as
/// rationals with unit denominator); for assemblies `c_n = s_n / n!` and the
/// labelled integer counts `s_n` are kept alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTable {
    kind: StructureKind,
    counts: Vec<BigRational>,
    labelled: Option<Vec<BigInt>>,
}

impl CountTable {
    /// Largest size `N` held by the table.
    pub fn n_max(&self) -> u64 {
        (self.counts.len() - 1) as u64
    }

    pub fn kind(&self) -> StructureKind {
        self.kind
    }

    /// `c_n` as an exact rational (integral for multisets/selections).
    pub fn count(&self, n: u64) -> &BigRational {
        &self.counts[n as usize]
    }

    pub fn counts(&self) -> &[BigRational] {
        &self.counts
    }

    /// Labelled counts `s_n` (assemblies only).
    pub fn labelled(&self) -> Option<&[BigInt]> {
        self.labelled.as_deref()
    }

    /// `c_n` as a decimal string: plain digits when integral, `p/q` for
    /// assembly rationals.
    pub fn count_decimal(&self, n: u64) -> String {
        let c = self.count(n);
        if c.is_integer() {
            c.to_integer().to_string()
        } else {
            c.to_string()
        }
    }

    /// `ln c_n` to full double accuracy, without overflowing on big counts.
    pub fn log_count(&self, n: u64) -> Result<f64> {
        let c = self.count(n);
        if rational_is_zero(c) {
            return Err(Error::LogOfZero { n });
        }
        Ok(ln_bigrational(c))
    }

    fn from_integers(kind: StructureKind, counts: Vec<BigInt>) -> Self {
        Self {
            kind,
            counts: counts.into_iter().map(BigRational::from).collect(),
            labelled: None,
        }
    }
}

/// Extracts `b_k` for `k = 1..=n` as exact nonnegative integers, failing on
/// fractional weights. Integral weights are exact in `f64` up to 2^53 and are
/// converted losslessly.
fn integer_weights(w: &WeightSequence, n: u64, context: &'static str) -> Result<Vec<BigInt>> {
    let mut out = Vec::with_capacity(n as usize);
    for k in 1..=n {
        let v = w.b(k);
        if !(v >= 0.0) || v.fract() != 0.0 || v > 9.007_199_254_740_992e15 {
            return Err(Error::NonIntegerWeight {
                k,
                value: v,
                context,
            });
        }
        out.push(BigInt::from(v as u64));
    }
    Ok(out)
}

/// Assembly component counts `m_k = b_k k!` for `k = 1..=n`, required to be
/// exact nonnegative integers. Every finite `f64` is a dyadic rational, so
/// the product is evaluated exactly.
fn assembly_component_counts(w: &WeightSequence, n: u64) -> Result<Vec<BigInt>> {
    let mut out = Vec::with_capacity(n as usize);
    let mut factorial = BigInt::one();
    for k in 1..=n {
        factorial *= k;
        let v = w.b(k);
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::NonIntegerComponentCount { k });
        }
        let b = BigRational::from_float(v).ok_or(Error::NonIntegerComponentCount { k })?;
        let m = b * BigRational::from(factorial.clone());
        if !m.is_integer() || m.is_negative() {
            return Err(Error::NonIntegerComponentCount { k });
        }
        out.push(m.to_integer());
    }
    Ok(out)
}

/// Divisor-sum sieve: `Λ(m) = Σ_{d|m} sign(m/d) d b_d` for `m = 1..=n`,
/// where `sign(j)` is 1 for multisets and `(-1)^(j+1)` for selections.
/// One pass per divisor, O(n log n) additions.
fn lambda_sieve(weights: &[BigInt], selection_signs: bool) -> Vec<BigInt> {
    let n = weights.len();
    let mut lambda = vec![BigInt::zero(); n + 1];
    for d in 1..=n {
        if weights[d - 1].is_zero() {
            continue;
        }
        let contribution = &weights[d - 1] * d;
        let mut m = d;
        let mut j = 1usize;
        while m <= n {
            if selection_signs && j % 2 == 0 {
                lambda[m] -= &contribution;
            } else {
                lambda[m] += &contribution;
            }
            m += d;
            j += 1;
        }
    }
    lambda
}

fn counts_from_lambda(lambda: &[BigInt], n: u64) -> Vec<BigInt> {
    let n = n as usize;
    let mut counts = Vec::with_capacity(n + 1);
    counts.push(BigInt::one());
    for size in 1..=n {
        let mut acc = BigInt::zero();
        for m in 1..=size {
            if !lambda[m].is_zero() {
                acc += &lambda[m] * &counts[size - m];
            }
        }
        let (q, rem) = num_integer::Integer::div_rem(&acc, &BigInt::from(size));
        debug_assert!(rem.is_zero(), "log-derivative recurrence must divide exactly");
        counts.push(q);
    }
    counts
}

/// Labelled assembly counts via `s_n = Σ_{k=1}^{n} C(n-1, k-1) m_k s_{n-k}`,
/// `s_0 = 1`. The binomial factor is updated incrementally:
/// `C(n-1, k) = C(n-1, k-1) (n-k) / k`, an exact division.
fn labelled_assembly_counts(component_counts: &[BigInt], n: u64) -> Vec<BigInt> {
    let n = n as usize;
    let mut s = Vec::with_capacity(n + 1);
    s.push(BigInt::one());
    for size in 1..=n {
        let mut acc = BigInt::zero();
        let mut g = BigInt::one();
        for k in 1..=size {
            if !component_counts[k - 1].is_zero() {
                acc += &g * &component_counts[k - 1] * &s[size - k];
            }
            if k < size {
                g = g * (size - k) / k;
            }
        }
        s.push(acc);
    }
    s
}

/// Exact counts `c_0..c_N` by the logarithmic-derivative recurrence
/// (multisets, selections) or the labelled binomial recurrence (assemblies).
pub fn count_exact(w: &WeightSequence, kind: StructureKind, n: u64) -> Result<CountTable> {
    match kind {
        StructureKind::Multiset | StructureKind::Selection => {
            let ctx = match kind {
                StructureKind::Multiset => "multiset counting needs integer type counts",
                _ => "selection counting needs integer type counts",
            };
            let weights = integer_weights(w, n, ctx)?;
            let lambda = lambda_sieve(&weights, kind == StructureKind::Selection);
            let counts = counts_from_lambda(&lambda, n);
            debug_assert!(counts.iter().all(|c| !c.is_negative()));
            Ok(CountTable::from_integers(kind, counts))
        }
        StructureKind::Assembly => {
            let m = assembly_component_counts(w, n)?;
            let s = labelled_assembly_counts(&m, n);
            let mut factorial = BigInt::one();
            let counts = s
                .iter()
                .enumerate()
                .map(|(i, sn)| {
                    if i > 0 {
                        factorial *= i;
                    }
                    BigRational::new(sn.clone(), factorial.clone())
                })
                .collect();
            Ok(CountTable {
                kind,
                counts,
                labelled: Some(s),
            })
        }
    }
}

/// Enumerates partitions of `total` (parts listed largest-first) and feeds
/// the multiplicity profile of each to `visit`.
fn for_each_partition<F: FnMut(&[(u64, u32)])>(total: u64, visit: &mut F) {
    fn recurse<F: FnMut(&[(u64, u32)])>(
        remaining: u64,
        max_part: u64,
        profile: &mut Vec<(u64, u32)>,
        visit: &mut F,
    ) {
        if remaining == 0 {
            visit(profile);
            return;
        }
        let mut part = max_part.min(remaining);
        while part >= 1 {
            // multiplicity of `part`
            let mut mult = 1u32;
            while u64::from(mult) * part <= remaining {
                profile.push((part, mult));
                recurse(remaining - u64::from(mult) * part, part - 1, profile, visit);
                profile.pop();
                mult += 1;
            }
            part -= 1;
        }
    }
    if total == 0 {
        visit(&[]);
        return;
    }
    recurse(total, total, &mut Vec::new(), &mut |profile| visit(profile));
}

/// Independent enumeration oracle, exponential in `n` (capped at
/// [`BRUTE_FORCE_LIMIT`]).
///
/// - multisets: a partition with multiplicity `m` of size `k` contributes
///   `C(b_k + m - 1, m)` ways to assign types with repetition;
/// - selections: `C(b_k, m)` ways without repetition;
/// - assemblies: `s_n = Σ_partitions n! Π_k m_k^(ρ_k) / ((k!)^(ρ_k) ρ_k!)`.
pub fn count_bruteforce(w: &WeightSequence, kind: StructureKind, n: u64) -> Result<CountTable> {
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: BRUTE_FORCE_LIMIT,
            op: "count_bruteforce",
        });
    }
    match kind {
        StructureKind::Multiset | StructureKind::Selection => {
            let ctx = "brute-force counting needs integer type counts";
            let weights = integer_weights(w, n, ctx)?;
            let mut counts = Vec::with_capacity(n as usize + 1);
            for size in 0..=n {
                let mut total = BigInt::zero();
                for_each_partition(size, &mut |profile| {
                    let mut ways = BigInt::one();
                    for &(part, mult) in profile {
                        let b = &weights[(part - 1) as usize];
                        let m = BigInt::from(mult);
                        let choices = match kind {
                            StructureKind::Multiset => {
                                if b.is_zero() {
                                    BigInt::zero()
                                } else {
                                    binomial(b + &m - 1, m)
                                }
                            }
                            _ => {
                                if BigInt::from(mult) > *b {
                                    BigInt::zero()
                                } else {
                                    binomial(b.clone(), m)
                                }
                            }
                        };
                        ways *= choices;
                        if ways.is_zero() {
                            break;
                        }
                    }
                    total += ways;
                });
                counts.push(total);
            }
            Ok(CountTable::from_integers(kind, counts))
        }
        StructureKind::Assembly => {
            let m = assembly_component_counts(w, n)?;
            let mut factorials = vec![BigInt::one()];
            for k in 1..=n {
                let next = factorials.last().unwrap() * k;
                factorials.push(next);
            }
            let mut labelled = Vec::with_capacity(n as usize + 1);
            for size in 0..=n {
                let mut total = BigInt::zero();
                for_each_partition(size, &mut |profile| {
                    // n! / prod((k!)^mult * mult!) * prod(m_k^mult)
                    let mut numer = factorials[size as usize].clone();
                    let mut denom = BigInt::one();
                    for &(part, mult) in profile {
                        let mk = &m[(part - 1) as usize];
                        numer *= mk.pow(mult);
                        denom *= factorials[part as usize].pow(mult);
                        denom *= &factorials[mult as usize];
                    }
                    let (q, rem) = num_integer::Integer::div_rem(&numer, &denom);
                    debug_assert!(rem.is_zero(), "assembly term must be integral");
                    total += q;
                });
                labelled.push(total);
            }
            let mut factorial = BigInt::one();
            let counts = labelled
                .iter()
                .enumerate()
                .map(|(i, sn)| {
                    if i > 0 {
                        factorial *= i;
                    }
                    BigRational::new(sn.clone(), factorial.clone())
                })
                .collect();
            Ok(CountTable {
                kind,
                counts,
                labelled: Some(labelled),
            })
        }
    }
}
