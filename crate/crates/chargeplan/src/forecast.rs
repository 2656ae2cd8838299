//! Compound-growth projection of county EV shares, conversion of traffic
//! counts into hourly EV arrival rates, and multi-year port capacity paths.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Registration statistics for one county. The share columns are two
/// consecutive annual observations; growth is their ratio, no regression.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountyStats {
    pub county_id: String,
    pub ev_count: f64,
    pub vehicle_count: f64,
    pub share_2024: f64,
    pub share_2025: f64,
    pub avg_hourly_wage: f64,
}

impl CountyStats {
    pub fn validate(&self) -> Result<()> {
        if !(self.vehicle_count > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "county {}: vehicle count must be positive",
                self.county_id
            )));
        }
        for (name, share) in [("share_2024", self.share_2024), ("share_2025", self.share_2025)] {
            if !(0.0..=1.0).contains(&share) {
                return Err(Error::InvalidParameter(format!(
                    "county {}: {name} {share} outside [0, 1]",
                    self.county_id
                )));
            }
        }
        if !(self.ev_count >= 0.0) || !(self.avg_hourly_wage >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "county {}: counts and wages must be non-negative",
                self.county_id
            )));
        }
        Ok(())
    }

    /// EV share of the fleet.
    pub fn beta(&self) -> f64 {
        self.ev_count / self.vehicle_count
    }

    /// Compound annual growth from the two share observations. Zero growth
    /// when both shares are zero; growth from literally nothing is
    /// undefined and rejected.
    pub fn cagr(&self) -> Result<f64> {
        if self.share_2024 == 0.0 {
            if self.share_2025 == 0.0 {
                return Ok(0.0);
            }
            return Err(Error::InvalidParameter(format!(
                "county {}: growth undefined from a zero base share",
                self.county_id
            )));
        }
        Ok(self.share_2025 / self.share_2024 - 1.0)
    }
}

/// Statewide maximum EV share per projection year. Holds its last value
/// beyond the listed horizon; an empty envelope never caps.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PenetrationEnvelope {
    caps: Vec<f64>,
}

impl PenetrationEnvelope {
    pub fn none() -> PenetrationEnvelope {
        PenetrationEnvelope { caps: Vec::new() }
    }

    pub fn from_caps(caps: Vec<f64>) -> Result<PenetrationEnvelope> {
        for pair in caps.windows(2) {
            if pair[1] < pair[0] {
                return Err(Error::InvalidParameter(format!(
                    "penetration envelope must be non-decreasing, got {} after {}",
                    pair[1], pair[0]
                )));
            }
        }
        if caps.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::InvalidParameter(
                "penetration envelope values must lie in [0, 1]".into(),
            ));
        }
        Ok(PenetrationEnvelope { caps })
    }

    pub fn cap(&self, year_offset: u32) -> f64 {
        match self.caps.get(year_offset as usize) {
            Some(&c) => c,
            None => self.caps.last().copied().unwrap_or(1.0),
        }
    }
}

/// beta_base * (1+g)^k, capped by the envelope and by 1.
pub fn project_share(
    beta_base: f64,
    growth: f64,
    year_offset: u32,
    envelope: &PenetrationEnvelope,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&beta_base) {
        return Err(Error::InvalidParameter(format!(
            "base share {beta_base} outside [0, 1]"
        )));
    }
    if !(growth > -1.0) || !growth.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "growth rate must be finite and above -1, got {growth}"
        )));
    }
    let raw = beta_base * (1.0 + growth).powi(year_offset as i32);
    Ok(raw.min(envelope.cap(year_offset)).min(1.0))
}

pub const HOURS_PER_DAY: usize = 24;
/// Daytime window whose mean is the design arrival rate: hours 8..=19,
/// twelve one-hour bins.
pub const DESIGN_HOURS: std::ops::RangeInclusive<usize> = 8..=19;

#[derive(Debug, Clone, Serialize)]
pub struct ArrivalProfile {
    pub site_id: u64,
    /// Gross vehicles per hour passing the site.
    pub gross: [f64; HOURS_PER_DAY],
    /// EV arrivals per hour: gross * beta.
    pub lambdas: [f64; HOURS_PER_DAY],
    /// Design arrival rate: mean of the daytime hours.
    pub design_lambda: f64,
}

/// Scale a 24-hour traffic profile by the EV share and take the daytime
/// mean as the design rate.
pub fn arrival_rates(site_id: u64, gross: &[f64], beta: f64) -> Result<ArrivalProfile> {
    if gross.len() != HOURS_PER_DAY {
        return Err(Error::MissingHours((gross.len()..HOURS_PER_DAY).collect()));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidParameter(format!(
            "EV share {beta} outside [0, 1]"
        )));
    }
    if let Some(h) = gross.iter().position(|n| !(*n >= 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "site {site_id}: negative or non-finite traffic count at hour {h}"
        )));
    }
    let mut gross_arr = [0.0; HOURS_PER_DAY];
    gross_arr.copy_from_slice(gross);
    let mut lambdas = [0.0; HOURS_PER_DAY];
    for (l, n) in lambdas.iter_mut().zip(gross) {
        *l = n * beta;
    }
    let window = DESIGN_HOURS.count() as f64;
    let design_lambda = DESIGN_HOURS.map(|h| lambdas[h]).sum::<f64>() / window;
    Ok(ArrivalProfile {
        site_id,
        gross: gross_arr,
        lambdas,
        design_lambda,
    })
}

/// Growth rate implied by two endpoints `years` apart:
/// (target/base)^(1/years) - 1.
pub fn implied_cagr(base: f64, target: f64, years: u32) -> Result<f64> {
    if !(base > 0.0) || !(target > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "endpoints must be positive, got base {base} target {target}"
        )));
    }
    if years == 0 {
        return Err(Error::InvalidParameter(
            "implied growth needs at least one year between endpoints".into(),
        ));
    }
    Ok((target / base).powf(1.0 / years as f64) - 1.0)
}

/// Geometric port-count path: round(base * (1+g)^k) for k in 0..=years.
pub fn capacity_path(base: f64, growth: f64, years: u32) -> Result<Vec<u64>> {
    if !(base > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "base port count must be positive, got {base}"
        )));
    }
    if !(growth > -1.0) || !growth.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "growth rate must be finite and above -1, got {growth}"
        )));
    }
    Ok((0..=years)
        .map(|k| (base * (1.0 + growth).powi(k as i32)).round() as u64)
        .collect())
}
