//! `d_M`, `p_M(k)`, model counts, finite-n subalgebra probabilities and the
//! asymptotic verdicts derived from them.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use statrs::function::factorial::ln_binomial;

use crate::analysis::Transversal;
use crate::error::{Error, Result};

/// `(d_i, q_i)` for every nontrivial transversal entry, sorted by `d_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parameters {
    pub d_min: usize,
    pub entries: Vec<(usize, u64)>,
}

pub fn parameters(transversal: &Transversal) -> Result<Parameters> {
    let mut entries: Vec<(usize, u64)> = transversal.nontrivial().iter().map(|e| (e.arity, e.q)).collect();
    entries.sort();
    let d_min = entries
        .first()
        .map(|e| e.0)
        .ok_or_else(|| Error::Assumption("every linear term is trivial; there is no free data to sample".into()))?;
    if d_min < 2 {
        return Err(Error::Assumption("a nontrivial class has a single essential variable".into()));
    }
    Ok(Parameters { d_min, entries })
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn binomial_u64(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc.checked_mul(n as u128 - i)? / (i + 1);
    }
    u64::try_from(acc).ok()
}

impl Parameters {
    /// `p(k) = Σ q_i·C(k, d_i)`.
    pub fn p_of_k(&self, k: u64) -> BigUint {
        self.entries
            .iter()
            .map(|&(d, q)| binomial(k, d as u64) * q)
            .sum()
    }

    /// `p(k)` when it fits in 64 bits.
    pub fn p(&self, k: u64) -> Result<u64> {
        let mut total: u64 = 0;
        for &(d, q) in &self.entries {
            total = binomial_u64(k, d as u64)
                .and_then(|c| c.checked_mul(q))
                .and_then(|c| total.checked_add(c))
                .ok_or_else(|| Error::Budget(format!("p({k}) does not fit in 64 bits")))?;
        }
        Ok(total)
    }

    pub fn has_arity(&self, d: usize) -> bool {
        self.entries.iter().any(|e| e.0 == d)
    }

    /// `|Mod_n| = n^{p(n)}`.
    pub fn model_count(&self, n: u64) -> Result<BigUint> {
        if n == 0 {
            return Err(Error::Invalid("carrier must be non-empty".into()));
        }
        let p = self.p(n)?;
        let bits = p as f64 * (n as f64).log2();
        if bits > 1e8 {
            return Err(Error::Budget(format!("model count for n={n} has about {bits:.0} bits")));
        }
        let exp = u32::try_from(p).map_err(|_| Error::Budget(format!("exponent p({n}) too large")))?;
        Ok(BigUint::from(n).pow(exp))
    }

    /// Probability that a fixed `k`-subset is a subuniverse: `(k/n)^{p(k)}`.
    pub fn fixed_subalgebra_probability(&self, k: u64, n: u64) -> Result<BigRational> {
        if k > n || n == 0 {
            return Err(Error::Invalid(format!("need 1 <= k <= n, got k={k}, n={n}")));
        }
        if (k as usize) < self.d_min {
            return Err(Error::Invalid(format!(
                "every subset of size {k} < d_M = {} is a subuniverse (probability 1)",
                self.d_min
            )));
        }
        let p = u32::try_from(self.p(k)?).map_err(|_| Error::Budget("exponent too large".into()))?;
        let base = BigRational::new(k.into(), n.into());
        Ok(num_traits::pow::Pow::pow(base, p))
    }

    /// Probability that no `d_M`-subset is a subuniverse:
    /// `(1 - (d/n)^{p(d)})^{C(n,d)}`. The exact value is kept when it stays small.
    pub fn no_size_d_subalgebra_probability(&self, n: u64) -> Result<FiniteProbability> {
        let d = self.d_min as u64;
        if n <= d {
            return Err(Error::Invalid(format!("need n > d_M = {d}, got {n}")));
        }
        let pd = self.p(d)?;
        let subsets = binomial_u64(n, d).ok_or_else(|| Error::Budget("C(n, d) overflows".into()))?;
        let single = (d as f64 / n as f64).powf(pd as f64);
        let value = (subsets as f64 * (-single).ln_1p()).exp();
        let bits = subsets as f64 * pd as f64 * (n as f64).log2();
        let exact = if bits <= 2e5 {
            let one = BigRational::one();
            let base = one - self.fixed_subalgebra_probability(d, n)?;
            Some(num_traits::pow::Pow::pow(base, subsets as u32))
        } else {
            None
        };
        Ok(FiniteProbability { exact, value })
    }

    /// Asymptotic probabilities of proper subalgebras by size.
    pub fn asymptotic_table(&self) -> Result<SubalgebraTable> {
        let d = self.d_min;
        let pd = self.p(d as u64)?;
        let pd1 = self.p(d as u64 + 1)?;
        let mut rows = Vec::new();
        if d > 2 {
            rows.push((SizeClass::Below(d), LimitValue::One));
        }
        let at_d = match pd.cmp(&(d as u64)) {
            std::cmp::Ordering::Less => LimitValue::One,
            std::cmp::Ordering::Equal => LimitValue::one_minus_exp_neg(d_pow_d(d), crate::perm::factorial(d)),
            std::cmp::Ordering::Greater => LimitValue::Zero,
        };
        rows.push((SizeClass::Exactly(d), at_d));
        let next = if pd1 > d as u64 + 1 { LimitValue::Zero } else { LimitValue::Open };
        rows.push((SizeClass::Exactly(d + 1), next));
        rows.push((SizeClass::AtLeast(d + 2), LimitValue::Zero));
        Ok(SubalgebraTable { rows })
    }

    pub fn idemprimality_verdict(&self) -> Result<IdemprimalityVerdict> {
        let d = self.d_min;
        let mut why = vec![format!("d_M = {d}")];
        let limit = if d == 2 {
            let p2 = self.p(2)?;
            let p3 = self.p(3)?;
            why.push(format!("p(2) = {p2}"));
            match p2 {
                1 => {
                    why.push("p(2) < 2: a 2-element subalgebra exists with limit probability 1".into());
                    LimitValue::Zero
                }
                2 => {
                    why.push(format!("p(3) = {p3} > 3: no 3-element or larger proper subalgebras almost surely"));
                    why.push("no 2-element subalgebra has limit probability e^(-2)".into());
                    why.push("nontrivial automorphisms and compatible crosses vanish almost surely".into());
                    LimitValue::exp_neg(2, 1)
                }
                _ => {
                    why.push("p(2) > 2: no proper subalgebras of size > 1 almost surely".into());
                    why.push("nontrivial automorphisms and compatible crosses vanish almost surely".into());
                    LimitValue::One
                }
            }
        } else {
            why.push("d_M >= 3: every 2-element subset is a subuniverse, so no model is idemprimal".into());
            LimitValue::Zero
        };
        Ok(IdemprimalityVerdict {
            almost_surely: limit == LimitValue::One,
            limit,
            justification: why,
        })
    }
}

fn d_pow_d(d: usize) -> u64 {
    (d as u64).pow(d as u32)
}

/// An exact finite-n probability with its float value.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteProbability {
    pub exact: Option<BigRational>,
    pub value: f64,
}

/// Limit values appearing in the asymptotic statements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitValue {
    Zero,
    One,
    /// `e^{-num/den}`.
    ExpNeg { num: u64, den: u64 },
    /// `1 - e^{-num/den}`.
    OneMinusExpNeg { num: u64, den: u64 },
    Open,
}

impl LimitValue {
    pub fn exp_neg(num: u64, den: u64) -> Self {
        let g = num.gcd(&den);
        LimitValue::ExpNeg { num: num / g, den: den / g }
    }

    pub fn one_minus_exp_neg(num: u64, den: u64) -> Self {
        let g = num.gcd(&den);
        LimitValue::OneMinusExpNeg { num: num / g, den: den / g }
    }

    pub fn value(&self) -> Option<f64> {
        match *self {
            LimitValue::Zero => Some(0.0),
            LimitValue::One => Some(1.0),
            LimitValue::ExpNeg { num, den } => Some((-(num as f64) / den as f64).exp()),
            LimitValue::OneMinusExpNeg { num, den } => Some(-(-(num as f64) / den as f64).exp_m1()),
            LimitValue::Open => None,
        }
    }
}

impl fmt::Display for LimitValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let exponent = |num: u64, den: u64| {
            if den == 1 {
                format!("{num}")
            } else {
                format!("{num}/{den}")
            }
        };
        match *self {
            LimitValue::Zero => f.write_str("0"),
            LimitValue::One => f.write_str("1"),
            LimitValue::ExpNeg { num, den } => write!(f, "e^(-{})", exponent(num, den)),
            LimitValue::OneMinusExpNeg { num, den } => write!(f, "1-e^(-{})", exponent(num, den)),
            LimitValue::Open => f.write_str("open"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeClass {
    /// Sizes `2..d`.
    Below(usize),
    Exactly(usize),
    AtLeast(usize),
}

impl fmt::Display for SizeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SizeClass::Below(d) => write!(f, "<{d}"),
            SizeClass::Exactly(d) => write!(f, "={d}"),
            SizeClass::AtLeast(d) => write!(f, ">={d}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubalgebraTable {
    pub rows: Vec<(SizeClass, LimitValue)>,
}

impl SubalgebraTable {
    /// Limit probability of a proper subalgebra of size exactly `k >= 2`.
    pub fn limit_for_size(&self, k: usize) -> LimitValue {
        for &(class, v) in &self.rows {
            let hit = match class {
                SizeClass::Below(d) => k < d,
                SizeClass::Exactly(d) => k == d,
                SizeClass::AtLeast(d) => k >= d,
            };
            if hit {
                return v;
            }
        }
        LimitValue::One
    }

    pub fn has_open_cell(&self) -> bool {
        self.rows.iter().any(|r| r.1 == LimitValue::Open)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdemprimalityVerdict {
    pub almost_surely: bool,
    pub limit: LimitValue,
    pub justification: Vec<String>,
}

/// `ζ_n(k) = C(n,k)·(k/n)^{C(k,2)}`, evaluated in the log domain.
pub fn zeta(n: u64, k: u64) -> f64 {
    if k > n || k == 0 {
        return 0.0;
    }
    let pairs = (k * (k - 1) / 2) as f64;
    (ln_binomial(n, k) + pairs * (k as f64 / n as f64).ln()).exp()
}

/// `Σ_{k=4}^{n-1} ζ_n(k)`.
pub fn murskii_tail(n: u64) -> Result<f64> {
    if n < 5 {
        return Err(Error::Invalid(format!("the tail needs n >= 5, got {n}")));
    }
    Ok((4..n).map(|k| zeta(n, k)).sum())
}

/// Float value of an exact rational.
pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
