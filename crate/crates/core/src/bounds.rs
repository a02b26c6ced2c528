//! Closed-form and asymptotic bounds on `A(n, d)`.
//!
//! Combinatorial quantities are exact (`BigUint` / `BigRational`); only the
//! log-scale asymptotic evaluators use `f64`.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Code length `n` and minimum Ulam distance `d`, with `n >= 2` and
/// `1 <= d <= n - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CodeParams {
    pub n: usize,
    pub d: usize,
}

impl CodeParams {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!("need n >= 2, got n = {n}")));
        }
        if d < 1 || d > n - 1 {
            return Err(Error::InvalidParams(format!(
                "need 1 <= d <= n - 1 = {}, got d = {d}",
                n - 1
            )));
        }
        Ok(CodeParams { n, d })
    }

    /// `Δ = d - 1`.
    pub fn delta(&self) -> usize {
        self.d - 1
    }

    /// Length of the subsequences no two codewords may share, `n - d + 1`.
    pub fn pattern_len(&self) -> usize {
        self.n - self.d + 1
    }
}

pub fn factorial(k: usize) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// `(n - d + 1)!`.
pub fn singleton_upper(params: CodeParams) -> BigUint {
    factorial(params.pattern_len())
}

/// `⌈(n - d + 1)! / C(n, d - 1)⌉`, the raw Gilbert–Varshamov-type value.
pub fn gv_lower(params: CodeParams) -> BigUint {
    let num = factorial(params.pattern_len());
    let den = binomial(params.n, params.delta());
    Integer::div_ceil(&num, &den)
}

/// Binary entropy in nats, with `0 ln 0 = 0`.
pub fn entropy_nats(p: f64) -> f64 {
    fn xlnx(x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            x * x.ln()
        }
    }
    -xlnx(p) - xlnx(1.0 - p)
}

/// Exponent of the entropy-form lower bound
/// `(n - Δ)(ln(n - Δ) - 1) - n h_e(Δ / n)`.
pub fn entropy_lower_log(params: CodeParams) -> f64 {
    let n = params.n as f64;
    let m = (params.n - params.delta()) as f64;
    m * (m.ln() - 1.0) - n * entropy_nats(params.delta() as f64 / n)
}

/// `2 √n c (ln c - 1)`, the exponent of the lower bound when `Δ = n - c√n`.
pub fn asymptotic_lower_log(c: f64, n: usize) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::Domain(format!("need c > 0, got {c}")));
    }
    Ok(2.0 * (n as f64).sqrt() * c * (c.ln() - 1.0))
}

/// Large-deviation rate `I(c) = 2c ln(c/2 + √(c²/4 - 1)) - 2√(c² - 4)`.
pub fn rate_function_i(c: f64) -> Result<f64> {
    check_rate_domain(c)?;
    let root = (c * c / 4.0 - 1.0).max(0.0).sqrt();
    Ok(2.0 * c * (c / 2.0 + root).ln() - 2.0 * (c * c - 4.0).max(0.0).sqrt())
}

/// The same rate written with the inverse hyperbolic cosine.
pub fn rate_function_i_acosh(c: f64) -> Result<f64> {
    check_rate_domain(c)?;
    Ok(2.0 * c * (c / 2.0).acosh() - 2.0 * (c * c - 4.0).max(0.0).sqrt())
}

fn check_rate_domain(c: f64) -> Result<()> {
    if !(c >= 2.0) {
        return Err(Error::Domain(format!("rate function needs c >= 2, got {c}")));
    }
    Ok(())
}

/// Largest admissible `t` in Kim's tail estimate, `n^{1/3} / 20`.
pub fn kim_t_max(n: usize) -> f64 {
    (n as f64).cbrt() / 20.0
}

/// Log of Kim's upper estimate on `P(L_n - 2√n >= t n^{1/6})`:
/// `-(4/3) t^{3/2} + φ(t)`.
pub fn kim_upper_log(n: usize, t: f64) -> Result<f64> {
    if n == 0 || !(t > 0.0) || t > kim_t_max(n) {
        return Err(Error::Domain(format!(
            "Kim's estimate needs 0 < t <= n^(1/3)/20 = {}, got t = {t}",
            kim_t_max(n)
        )));
    }
    let nf = n as f64;
    let n13 = nf.cbrt();
    let t32 = t.powf(1.5);
    let phi = (t / (27.0 * n13) + 5.0 * nf.ln() / (t.sqrt() * n13)) * t32;
    Ok(-4.0 / 3.0 * t32 + phi)
}

/// A value the underlying argument only supports up to unstated constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Approximate {
    pub log_value: f64,
    pub approximate: bool,
}

/// `(c - 2)^{3/2} (38 - c)/27 √n`, the exponent of the lower bound that Kim's
/// estimate suggests for `Δ = n - c√n`, `c ∈ (2, 2 + 1/20]`. Never a certificate.
pub fn kim_approx_lower_log(c: f64, n: usize) -> Result<Approximate> {
    if !(c > 2.0 && c <= 2.0 + 1.0 / 20.0) {
        return Err(Error::Domain(format!("need 2 < c <= 2.05, got {c}")));
    }
    Ok(Approximate {
        log_value: (c - 2.0).powf(1.5) * (38.0 - c) / 27.0 * (n as f64).sqrt(),
        approximate: true,
    })
}

/// `C(n, Δ) / (n - Δ)!`, an upper estimate of `P(L_n >= n - Δ)`.
pub fn simple_estimate(params: CodeParams) -> BigRational {
    simple_estimate_for(params.n, params.delta()).expect("valid params")
}

/// [`simple_estimate`] for any `0 <= Δ <= n - 1`.
pub fn simple_estimate_for(n: usize, delta: usize) -> Result<BigRational> {
    if n == 0 || delta >= n {
        return Err(Error::InvalidParams(format!(
            "need 0 <= delta <= n - 1, got n = {n}, delta = {delta}"
        )));
    }
    Ok(BigRational::new(
        binomial(n, delta).into(),
        factorial(n - delta).into(),
    ))
}

/// `ln k!` by direct summation.
pub fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

pub fn ln_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// `(1/√n) ln[m! / C(n, m)]`, the normalised log of the lower bound with
/// `m = n - Δ` symbols kept.
pub fn normalized_log_gv(n: usize, m: usize) -> f64 {
    (ln_factorial(m) - ln_binomial(n, m)) / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn cp(n: usize, d: usize) -> CodeParams {
        CodeParams::new(n, d).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(CodeParams::new(1, 1).is_err());
        assert!(CodeParams::new(5, 0).is_err());
        assert!(CodeParams::new(5, 5).is_err());
        assert_eq!(cp(5, 3).delta(), 2);
        assert_eq!(cp(5, 3).pattern_len(), 3);
    }

    #[test]
    fn singleton_values() {
        assert_eq!(singleton_upper(cp(5, 3)), BigUint::from(6u32));
        assert_eq!(singleton_upper(cp(7, 4)), BigUint::from(24u32));
        for n in 2..=12 {
            assert_eq!(singleton_upper(cp(n, 1)), factorial(n));
        }
        // exact beyond u128
        assert_eq!(singleton_upper(cp(40, 1)).to_string(), "815915283247897734345611269596115894272000000000");
    }

    #[test]
    fn gv_values() {
        assert_eq!(gv_lower(cp(6, 3)), BigUint::from(2u32));
        assert_eq!(gv_lower(cp(5, 3)), BigUint::from(1u32));
        for n in 2..=10 {
            assert_eq!(gv_lower(cp(n, 1)), factorial(n));
        }
    }

    #[test]
    fn gv_below_singleton_and_singleton_ratio() {
        for n in 2..=10 {
            for d in 1..n {
                assert!(gv_lower(cp(n, d)) <= singleton_upper(cp(n, d)));
                if d >= 2 {
                    assert_eq!(
                        singleton_upper(cp(n, d)) * BigUint::from(n - d + 2),
                        singleton_upper(cp(n, d - 1))
                    );
                }
            }
        }
    }

    #[test]
    fn entropy_form() {
        assert!((entropy_nats(0.5) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(entropy_nats(0.0), 0.0);
        assert_eq!(entropy_nats(1.0), 0.0);
        let expected = 20.0 * (20f64.ln() - 1.0) - 100.0 * entropy_nats(0.8);
        assert!((entropy_lower_log(cp(100, 81)) - expected).abs() < 1e-9);
    }

    #[test]
    fn entropy_form_never_exceeds_exact_ratio() {
        for n in 3..=30 {
            for d in 2..n {
                let p = cp(n, d);
                let exact = ln_factorial(p.pattern_len()) - ln_binomial(n, p.delta());
                assert!(entropy_lower_log(p) <= exact + 1e-9, "({n},{d})");
            }
        }
    }

    #[test]
    fn asymptotic_form() {
        assert!(asymptotic_lower_log(std::f64::consts::E, 50).unwrap().abs() < 1e-12);
        assert!((asymptotic_lower_log(1.0, 100).unwrap() + 20.0).abs() < 1e-12);
        let a = asymptotic_lower_log(4.0, 100).unwrap();
        let b = asymptotic_lower_log(4.0, 400).unwrap();
        assert!(a > 0.0 && b > a);
        assert!(asymptotic_lower_log(0.0, 10).is_err());
    }

    #[test]
    fn rate_function_values() {
        assert!(rate_function_i(2.0).unwrap().abs() < 1e-12);
        assert!(rate_function_i(1.99).is_err());
        let expected = 6.0 * (1.5 + 1.25f64.sqrt()).ln() - 2.0 * 5f64.sqrt();
        assert!((rate_function_i(3.0).unwrap() - expected).abs() < 1e-12);
        for c in [2.1, 2.5, 3.0, 5.0, 10.0] {
            assert!(rate_function_i(c).unwrap() > 2.0 * c * (c.ln() - 1.0));
        }
        // continuity at the left end
        assert!(rate_function_i(2.0 + 1e-10).unwrap() < 1e-9);
    }

    #[test]
    fn rate_function_dominates_on_grid() {
        for k in 1..=80 {
            let c = 2.0 + 0.1 * k as f64;
            assert!(rate_function_i(c).unwrap() > 2.0 * c * (c.ln() - 1.0), "c = {c}");
        }
    }

    #[test]
    fn rate_function_forms_agree() {
        for k in 0..=4800 {
            let c = 2.0 + k as f64 * 0.01;
            let a = rate_function_i(c).unwrap();
            let b = rate_function_i_acosh(c).unwrap();
            assert!((a - b).abs() <= 1e-12, "c = {c}: {a} vs {b}");
        }
    }

    #[test]
    fn kim_domain_and_value() {
        let n = 8000;
        let edge = kim_t_max(n);
        assert!(kim_upper_log(n, edge).is_ok());
        assert!(kim_upper_log(n, edge + 1e-9).is_err());
        assert!(kim_upper_log(n, 0.0).is_err());
        let expected = -4.0 / 3.0 + (1.0 / (27.0 * 20.0) + 5.0 * 8000f64.ln() / 20.0);
        assert!((kim_upper_log(n, 1.0).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn kim_approximation_is_flagged() {
        let a = kim_approx_lower_log(2.04, 10_000).unwrap();
        assert!(a.approximate && a.log_value > 0.0);
        assert!(kim_approx_lower_log(2.1, 10).is_err());
    }

    #[test]
    fn simple_estimate_values() {
        assert_eq!(
            simple_estimate_for(5, 0).unwrap(),
            BigRational::new(1.into(), 120.into())
        );
        assert_eq!(
            simple_estimate(cp(5, 3)),
            BigRational::new(10.into(), 6.into())
        );
        assert!(simple_estimate_for(4, 4).is_err());
    }

    #[test]
    fn normalized_log_gv_approaches_limit() {
        let c = 3.0f64;
        let limit = 2.0 * c * (c.ln() - 1.0);
        let errs: Vec<f64> = [100usize, 10_000, 1_000_000]
            .iter()
            .map(|&n| {
                let m = (c * (n as f64).sqrt()).round() as usize;
                (normalized_log_gv(n, m) - limit).abs()
            })
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn ln_helpers_match_exact_values() {
        for n in 1..=20 {
            let f = factorial(n).to_f64().unwrap().ln();
            assert!((ln_factorial(n) - f).abs() < 1e-9);
            for k in 0..=n {
                let b = binomial(n, k).to_f64().unwrap().ln();
                assert!((ln_binomial(n, k) - b).abs() < 1e-9);
            }
        }
    }
}
