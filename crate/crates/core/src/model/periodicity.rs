use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::{Error, Result};

/// Reduced fraction with positive denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i64,
    den: i64,
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rational {
    /// Returns `None` for a zero denominator or when the reduced value does
    /// not fit in `i64`.
    pub fn new(num: i64, den: i64) -> Option<Self> {
        Self::from_i128(num as i128, den as i128)
    }

    fn from_i128(num: i128, den: i128) -> Option<Self> {
        if den == 0 {
            return None;
        }
        let g = gcd(num, den).max(1);
        let (mut n, mut d) = (num / g, den / g);
        if d < 0 {
            n = -n;
            d = -d;
        }
        Some(Self {
            num: i64::try_from(n).ok()?,
            den: i64::try_from(d).ok()?,
        })
    }

    pub fn numer(&self) -> i64 {
        self.num
    }

    pub fn denom(&self) -> i64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Accepts `p`, `p/q` and terminating decimals such as `-0.125`.
impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::IrrationalInputUnsupported(format!("cannot read {s:?} as an exact rational"));
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            return Rational::new(p, q).ok_or_else(bad);
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 18 {
                return Err(bad());
            }
            let negative = int.starts_with('-');
            let int_digits = int.trim_start_matches(['-', '+']);
            if !int_digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let mut digits = int_digits.to_string();
            digits.push_str(frac);
            let mag: i128 = if digits.is_empty() { 0 } else { digits.parse().map_err(|_| bad())? };
            let den = 10i128.pow(frac.len() as u32);
            let num = if negative { -mag } else { mag };
            return Rational::from_i128(num, den).ok_or_else(bad);
        }
        let p: i64 = s.parse().map_err(|_| bad())?;
        Ok(Rational { num: p, den: 1 })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComponentPeriodicity {
    pub periodic: bool,
    /// Minimal period on the unit torus; `None` for a resting component,
    /// which is periodic with every period.
    pub period_exact: Option<Rational>,
    /// Minimal period on the model's torus, `L · period_exact`.
    pub period: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Periodicity {
    pub components: Vec<ComponentPeriodicity>,
    pub jointly_periodic: bool,
    pub period_exact: Option<Rational>,
    pub period: Option<f64>,
}

/// lcm of reduced positive fractions: lcm(numerators) / gcd(denominators).
fn lcm_fractions(values: &[Rational]) -> Result<Option<Rational>> {
    let mut acc: Option<(i128, i128)> = None;
    for q in values {
        let (n, d) = (q.num as i128, q.den as i128);
        acc = Some(match acc {
            None => (n, d),
            Some((an, ad)) => {
                let l = (an / gcd(an, n))
                    .checked_mul(n)
                    .ok_or(Error::Overflow("transport period"))?;
                (l, gcd(ad, d))
            }
        });
    }
    match acc {
        None => Ok(None),
        Some((n, d)) => Rational::from_i128(n, d)
            .map(Some)
            .ok_or(Error::Overflow("transport period")),
    }
}

pub(super) fn analyze(exact: &[Rational], n: usize, d: usize, length: f64) -> Result<Periodicity> {
    let mut components = Vec::with_capacity(n);
    let mut all = Vec::new();
    for j in 0..n {
        // τ·p/q ∈ ℤ  ⇔  τ ∈ (q/|p|)·ℤ
        let steps: Vec<Rational> = exact[j * d..(j + 1) * d]
            .iter()
            .filter(|r| !r.is_zero())
            .map(|r| Rational::new(r.den, r.num.abs()).ok_or(Error::Overflow("transport period")))
            .collect::<Result<_>>()?;
        all.extend_from_slice(&steps);
        let period_exact = lcm_fractions(&steps)?;
        components.push(ComponentPeriodicity {
            periodic: true,
            period: period_exact.map(|p| p.to_f64() * length),
            period_exact,
        });
    }
    let period_exact = lcm_fractions(&all)?;
    Ok(Periodicity {
        components,
        jointly_periodic: true,
        period: period_exact.map(|p| p.to_f64() * length),
        period_exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RealMatrix;
    use crate::ModelSpec;
    use alloc::vec;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn parsing() {
        assert_eq!(r("3"), Rational::new(3, 1).unwrap());
        assert_eq!(r("2/4"), Rational::new(1, 2).unwrap());
        assert_eq!(r("1/-8"), Rational::new(-1, 8).unwrap());
        assert_eq!(r("-0.125"), Rational::new(-1, 8).unwrap());
        assert_eq!(r("0.5"), Rational::new(1, 2).unwrap());
        assert!("sqrt(2)".parse::<Rational>().is_err());
        assert!("1/0".parse::<Rational>().is_err());
        assert!("1.4142135623730951e0".parse::<Rational>().is_err());
        assert_eq!(r("-7/3").to_string(), "-7/3");
    }

    fn spec(d: usize, v: &[&[&str]]) -> ModelSpec {
        let n = v.len();
        let exact: Vec<Vec<Rational>> = v.iter().map(|row| row.iter().map(|s| r(s)).collect()).collect();
        let float: Vec<Vec<f64>> = exact.iter().map(|row| row.iter().map(Rational::to_f64).collect()).collect();
        ModelSpec::new(d, &float, RealMatrix::zeros(n, n), 1.0)
            .unwrap()
            .with_exact_velocities(&exact)
            .unwrap()
    }

    #[test]
    fn two_dimensional_period() {
        let p = spec(2, &[&["1/4", "1/8"]]).transport_periodicity().unwrap();
        assert!(p.jointly_periodic);
        assert_eq!(p.components[0].period_exact, Some(Rational::new(8, 1).unwrap()));
        assert_eq!(p.period, Some(8.0));
    }

    #[test]
    fn single_speed_period() {
        let p = spec(1, &[&["3"]]).transport_periodicity().unwrap();
        assert_eq!(p.period_exact, Some(Rational::new(1, 3).unwrap()));
    }

    #[test]
    fn joint_period_is_common_multiple() {
        let p = spec(1, &[&["1/2"], &["-1/3"], &["0"]]).transport_periodicity().unwrap();
        assert_eq!(p.components[0].period_exact, Some(Rational::new(2, 1).unwrap()));
        assert_eq!(p.components[1].period_exact, Some(Rational::new(3, 1).unwrap()));
        assert_eq!(p.components[2].period_exact, None);
        assert_eq!(p.period_exact, Some(Rational::new(6, 1).unwrap()));
    }

    #[test]
    fn period_scales_with_length() {
        let s = spec(1, &[&["1/2"]]).with_length(3.0).unwrap();
        assert_eq!(s.transport_periodicity().unwrap().period, Some(6.0));
    }

    #[test]
    fn float_only_velocities_refused() {
        let s = ModelSpec::new(2, &[[1.0, core::f64::consts::SQRT_2]], RealMatrix::zeros(1, 1), 1.0).unwrap();
        assert!(matches!(s.transport_periodicity(), Err(Error::IrrationalInputUnsupported(_))));
        let mismatch = s.with_exact_velocities(&[vec![r("1"), r("1.414")]]);
        assert!(matches!(mismatch, Err(Error::IrrationalInputUnsupported(_))));
    }
}
