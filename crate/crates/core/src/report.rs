//! All bounds on `A(n, d)` for one parameter pair, gathered in one place.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::ball::{self, BallTable, DistributionCache};
use crate::bounds::{self, CodeParams};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::ip::{self, IlpStatus};

/// Which of the optional bounds to compute.
#[derive(Debug, Clone, Default)]
pub struct BoundOptions {
    /// Solve the integer program under this budget.
    pub ip_budget: Option<Budget>,
    pub sphere: bool,
    pub enumeration_limit: Option<usize>,
    pub cache: Option<DistributionCache>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub params: CodeParams,
    pub singleton_upper: u128,
    pub gv_lower: u128,
    pub ip_upper: Option<u128>,
    /// `optimal` when the integer program was solved, `bound_only` when the
    /// budget ran out first (the value is still a valid bound).
    pub ip_status: Option<IlpStatus>,
    pub sphere_lower: Option<u128>,
    pub sphere_upper: Option<u128>,
    /// The packing radius was rounded down from an odd `Δ / 2`.
    pub sphere_odd_delta: Option<bool>,
    pub best_lower: u128,
    pub best_upper: u128,
    /// Log of the lower bound suggested by Kim's tail estimate, when
    /// `c = (n - Δ)/√n` lies in `(2, 2.05]`. Approximate, never used above.
    pub kim_approx_lower_log: Option<f64>,
}

fn to_u128(v: &BigUint, what: &str) -> Result<u128> {
    v.to_u128()
        .ok_or_else(|| Error::Capacity(format!("{what} does not fit in 128 bits")))
}

pub fn bound_report(params: CodeParams, options: &BoundOptions) -> Result<BoundReport> {
    let singleton_upper = to_u128(&bounds::singleton_upper(params), "(n-d+1)!")?;
    let gv_lower = to_u128(&bounds::gv_lower(params), "the GV bound")?;

    let (ip_upper, ip_status) = match options.ip_budget {
        Some(budget) => {
            let b = ip::ip_upper_bound(params, budget)?;
            (Some(b.value as u128), Some(b.status))
        }
        None => (None, None),
    };

    let (mut sphere_lower, mut sphere_upper, mut sphere_odd_delta) = (None, None, None);
    if options.sphere {
        let limit = options
            .enumeration_limit
            .unwrap_or(ball::DEFAULT_ENUMERATION_LIMIT);
        let dist = match &options.cache {
            Some(cache) => cache.load_or_compute(params.n, limit)?,
            None => ball::lis_distribution_exact_with_limit(params.n, limit)?,
        };
        let s = ball::sphere_packing_from_table(params, &BallTable::from_distribution(&dist)?)?;
        sphere_lower = Some(s.lower as u128);
        sphere_upper = Some(s.upper as u128);
        sphere_odd_delta = Some(s.odd_delta);
    }

    // {e, reversal} is a code at distance n - 1 >= d
    let trivial = if params.d == 1 { 1 } else { 2 };
    let best_lower = [Some(gv_lower), sphere_lower, Some(trivial)]
        .into_iter()
        .flatten()
        .max()
        .unwrap();
    let best_upper = [Some(singleton_upper), ip_upper, sphere_upper]
        .into_iter()
        .flatten()
        .min()
        .unwrap();
    if best_lower > best_upper {
        return Err(Error::Invariant(format!(
            "inconsistent bounds at {params:?}: {best_lower} > {best_upper}"
        )));
    }

    let delta = params.delta() as f64;
    let n = params.n as f64;
    let c = (n - delta) / n.sqrt();
    let kim_approx_lower_log = bounds::kim_approx_lower_log(c, params.n)
        .ok()
        .map(|a| a.log_value);

    Ok(BoundReport {
        params,
        singleton_upper,
        gv_lower,
        ip_upper,
        ip_status,
        sphere_lower,
        sphere_upper,
        sphere_odd_delta,
        best_lower,
        best_upper,
        kim_approx_lower_log,
    })
}

impl BoundReport {
    /// Aligned `name  value` lines.
    pub fn to_text(&self) -> String {
        let opt = |v: Option<u128>| v.map_or_else(|| "-".to_string(), |v| v.to_string());
        let mut lines = vec![
            ("n", self.params.n.to_string()),
            ("d", self.params.d.to_string()),
            ("singleton_upper", self.singleton_upper.to_string()),
            ("gv_lower", self.gv_lower.to_string()),
        ];
        let ip = match (self.ip_upper, self.ip_status) {
            (Some(v), Some(IlpStatus::BoundOnly)) => format!("{v} (bound only)"),
            (v, _) => opt(v),
        };
        lines.push(("ip_upper", ip));
        lines.push(("sphere_lower", opt(self.sphere_lower)));
        let sphere = match (self.sphere_upper, self.sphere_odd_delta) {
            (Some(v), Some(true)) => format!("{v} (radius rounded down, odd delta)"),
            (v, _) => opt(v),
        };
        lines.push(("sphere_upper", sphere));
        lines.push(("best_lower", self.best_lower.to_string()));
        lines.push(("best_upper", self.best_upper.to_string()));
        if let Some(k) = self.kim_approx_lower_log {
            lines.push(("kim_lower_log", format!("{k:.6} (approximate)")));
        }
        let width = lines.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        lines
            .iter()
            .map(|(k, v)| format!("{k:<width$}  {v}\n"))
            .collect()
    }

    pub fn csv_header() -> &'static str {
        "n,d,singleton_upper,gv_lower,ip_upper,sphere_lower,sphere_upper,best_lower,best_upper"
    }

    pub fn to_csv_row(&self) -> String {
        let opt = |v: Option<u128>| v.map_or_else(String::new, |v| v.to_string());
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.params.n,
            self.params.d,
            self.singleton_upper,
            self.gv_lower,
            opt(self.ip_upper),
            opt(self.sphere_lower),
            opt(self.sphere_upper),
            self.best_lower,
            self.best_upper
        )
    }
}
