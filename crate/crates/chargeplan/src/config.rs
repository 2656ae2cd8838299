//! Pipeline configuration: one JSON document with per-stage sections,
//! strict unknown-field rejection, and dotted-path `--set` overrides.
//!
//! Every field has a default, so an empty document `{}` is a complete,
//! valid configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::forecast::PenetrationEnvelope;
use crate::hexgrid::GridSpec;
use crate::queueing::{AreaClass, EffectivePortsMode};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub grid: GridSpec,
    pub centrality: CentralityConfig,
    pub demand: DemandConfig,
    pub mclp: MclpConfig,
    pub queueing: QueueingConfig,
    pub reachability: ReachabilityConfig,
    pub forecast: ForecastConfig,
    pub equity: EquityConfig,
    pub inputs: InputPaths,
    /// Master seed for every random draw in the pipeline.
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            grid: GridSpec::default(),
            centrality: CentralityConfig::default(),
            demand: DemandConfig::default(),
            mclp: MclpConfig::default(),
            queueing: QueueingConfig::default(),
            reachability: ReachabilityConfig::default(),
            forecast: ForecastConfig::default(),
            equity: EquityConfig::default(),
            inputs: InputPaths::default(),
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CentralityConfig {
    /// Percentile filter: keep intersections scoring at or above the
    /// tau-quantile of their zone.
    pub tau: f64,
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    /// Zones whose exact betweenness trains the model. Empty means all
    /// zones with road edges.
    pub training_zones: Vec<String>,
}

impl Default for CentralityConfig {
    fn default() -> Self {
        CentralityConfig {
            tau: 0.5,
            hidden_dim: 16,
            learning_rate: 0.01,
            epochs: 500,
            training_zones: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DemandConfig {
    pub w_pop: f64,
    pub w_poi: f64,
    /// Resolution of the demand cells (one point per cell centroid).
    pub fine_resolution: u8,
    /// Resolution whose cells lend population and POI score to the demand
    /// points and POI load to the candidates.
    pub parent_resolution: u8,
    /// Per-class POI weight overrides; classes not listed keep the
    /// rank-derived default.
    pub poi_weights: BTreeMap<String, f64>,
}

impl Default for DemandConfig {
    fn default() -> Self {
        DemandConfig {
            w_pop: 0.6,
            w_poi: 0.4,
            fine_resolution: 10,
            parent_resolution: 8,
            poi_weights: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MclpConfig {
    /// Service radius in meters.
    pub radius_m: f64,
    pub beta_poi: f64,
    pub beta_cent: f64,
    /// Coverage weight in the per-zone site score.
    pub beta_cov: f64,
    /// Candidates advanced per zone.
    pub top_k: usize,
    /// Budget mode: maximum number of sites. Exactly one of `budget` and
    /// `alpha` must be set.
    pub budget: Option<usize>,
    /// Coverage mode: stop once this demand fraction is covered.
    pub alpha: Option<f64>,
    /// Demand multiplier for below-median-income cells; 1.0 disables.
    pub income_upweight: f64,
}

impl Default for MclpConfig {
    fn default() -> Self {
        MclpConfig {
            radius_m: 5_000.0,
            beta_poi: 0.6,
            beta_cent: 0.4,
            beta_cov: 0.6,
            top_k: 5,
            budget: None,
            alpha: Some(0.8),
            income_upweight: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SiteChargerType {
    Dcfc,
    L2,
    /// Per site, whichever type yields the lower sizing objective.
    Auto,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostTable {
    pub dcfc_unit: f64,
    pub dcfc_install: f64,
    pub l2_unit: f64,
    pub l2_install: f64,
}

impl Default for CostTable {
    fn default() -> Self {
        CostTable {
            dcfc_unit: 113_100.0,
            dcfc_install: 80_350.0,
            l2_unit: 3_400.0,
            l2_install: 4_100.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AreaMultipliers {
    pub urban: f64,
    pub suburban: f64,
    pub mixed: f64,
    pub rural: f64,
}

impl Default for AreaMultipliers {
    fn default() -> Self {
        AreaMultipliers {
            urban: 1.0,
            suburban: 0.9,
            mixed: 0.8,
            rural: 0.7,
        }
    }
}

impl AreaMultipliers {
    pub fn multiplier(&self, class: AreaClass) -> f64 {
        match class {
            AreaClass::Urban => self.urban,
            AreaClass::Suburban => self.suburban,
            AreaClass::Mixed => self.mixed,
            AreaClass::Rural => self.rural,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QueueingConfig {
    pub utilisation_cap: f64,
    /// Waiting spaces beyond the ports: system capacity N = c + this.
    pub waiting_spaces: u32,
    pub min_ports: u32,
    pub max_ports: u32,
    /// Fast-charge service rate, vehicles/hour/port.
    pub mu_dcfc: f64,
    /// Level-2 service rate, vehicles/hour/port.
    pub mu_l2: f64,
    pub costs: CostTable,
    pub area_multipliers: AreaMultipliers,
    /// Area class applied to every site's installation cost.
    pub area_class: AreaClass,
    pub effective_ports: EffectivePortsMode,
    /// Charger type for demand-selected sites; repair hubs are always
    /// fast-charge.
    pub site_charger_type: SiteChargerType,
    /// Flat hourly gross arrivals per assigned resident, used to size hubs
    /// added by coverage repair (no observed traffic exists there).
    pub hub_gross_per_capita: f64,
}

impl Default for QueueingConfig {
    fn default() -> Self {
        QueueingConfig {
            utilisation_cap: 0.9,
            waiting_spaces: 10,
            min_ports: 1,
            max_ports: 30,
            mu_dcfc: 2.0,
            mu_l2: 0.25,
            costs: CostTable::default(),
            area_multipliers: AreaMultipliers::default(),
            area_class: AreaClass::Urban,
            effective_ports: EffectivePortsMode::Continuous,
            site_charger_type: SiteChargerType::Dcfc,
            hub_gross_per_capita: 0.003,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReachabilityConfig {
    pub threshold_m: f64,
    /// Resolution of the super-cells whose centroids must be reachable.
    pub coarse_resolution: u8,
}

impl Default for ReachabilityConfig {
    fn default() -> Self {
        ReachabilityConfig {
            threshold_m: 30_000.0,
            coarse_resolution: 7,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForecastConfig {
    /// Plan horizon in years; year 1 is the base year.
    pub years: u32,
    /// Statewide share cap per year offset; empty means uncapped.
    pub envelope: Vec<f64>,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        ForecastConfig {
            years: 5,
            envelope: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EquityConfig {
    /// Radii at which coverage metrics are reported.
    pub radii_m: Vec<f64>,
    pub mc_samples: u32,
}

impl Default for EquityConfig {
    fn default() -> Self {
        EquityConfig {
            radii_m: vec![5_000.0, 30_000.0],
            mc_samples: 100_000,
        }
    }
}

/// Input file locations, resolved relative to the config file's directory
/// (or the working directory when the config is synthesized).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InputPaths {
    pub cells: PathBuf,
    pub edges: PathBuf,
    pub pois: PathBuf,
    pub counties: PathBuf,
    pub traffic: PathBuf,
    pub zones: PathBuf,
    pub study_area: PathBuf,
    pub exclusions: Option<PathBuf>,
    pub outages: Option<PathBuf>,
}

impl Default for InputPaths {
    fn default() -> Self {
        InputPaths {
            cells: PathBuf::from("cells.csv"),
            edges: PathBuf::from("edges.csv"),
            pois: PathBuf::from("pois.csv"),
            counties: PathBuf::from("counties.csv"),
            traffic: PathBuf::from("traffic.csv"),
            zones: PathBuf::from("zones.geojson"),
            study_area: PathBuf::from("study_area.geojson"),
            exclusions: None,
            outages: None,
        }
    }
}

impl InputPaths {
    /// Resolve every relative path against `base`.
    pub fn resolved(&self, base: &Path) -> InputPaths {
        let join = |p: &PathBuf| {
            if p.is_absolute() {
                p.clone()
            } else {
                base.join(p)
            }
        };
        InputPaths {
            cells: join(&self.cells),
            edges: join(&self.edges),
            pois: join(&self.pois),
            counties: join(&self.counties),
            traffic: join(&self.traffic),
            zones: join(&self.zones),
            study_area: join(&self.study_area),
            exclusions: self.exclusions.as_ref().map(|p| join(p)),
            outages: self.outages.as_ref().map(|p| join(p)),
        }
    }
}

impl PipelineConfig {
    /// Load a config file, apply `--set` overrides, and validate. Relative
    /// input paths are rebased onto the config file's directory.
    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<PipelineConfig> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut value: Value = serde_json::from_str(&text).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: format!("invalid JSON: {e}"),
        })?;
        for (key, raw) in overrides {
            apply_override(&mut value, key, raw).map_err(|e| Error::Config {
                path: path.to_path_buf(),
                message: format!("--set {key}: {e}"),
            })?;
        }
        let mut config: PipelineConfig =
            serde_json::from_value(value).map_err(|e| Error::Config {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
        config.validate().map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if let Some(dir) = path.parent() {
            config.inputs = config.inputs.resolved(dir);
        }
        Ok(config)
    }

    /// Overrides applied to the built-in defaults, no file involved.
    pub fn from_overrides(overrides: &[(String, String)]) -> Result<PipelineConfig> {
        let mut value = serde_json::to_value(PipelineConfig::default())
            .expect("default config serializes");
        for (key, raw) in overrides {
            apply_override(&mut value, key, raw)
                .map_err(|e| Error::InvalidParameter(format!("--set {key}: {e}")))?;
        }
        let config: PipelineConfig = serde_json::from_value(value)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Canonical JSON rendering: pretty, sorted keys, trailing newline.
    /// Sorting comes from re-serializing through `Value`, whose object map
    /// is ordered by key.
    pub fn to_json_string(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let mut s = serde_json::to_string_pretty(&value).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        let c = &self.centrality;
        if !(c.tau > 0.0 && c.tau < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "centrality.tau must lie in (0, 1), got {}",
                c.tau
            )));
        }
        if !(c.learning_rate > 0.0) || c.epochs == 0 || c.hidden_dim == 0 {
            return Err(Error::InvalidParameter(
                "centrality training needs a positive learning rate, at least \
                 one epoch, and a non-empty hidden layer"
                    .into(),
            ));
        }
        let d = &self.demand;
        if !(d.w_pop >= 0.0 && d.w_poi >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "demand weights must be non-negative, got w_pop={} w_poi={}",
                d.w_pop, d.w_poi
            )));
        }
        self.grid.edge_length(d.fine_resolution)?;
        self.grid.edge_length(d.parent_resolution)?;
        self.grid.edge_length(self.reachability.coarse_resolution)?;
        if d.parent_resolution >= d.fine_resolution {
            return Err(Error::InvalidParameter(format!(
                "demand.parent_resolution {} must be coarser than fine_resolution {}",
                d.parent_resolution, d.fine_resolution
            )));
        }
        let m = &self.mclp;
        if !(m.radius_m > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mclp.radius_m must be positive, got {}",
                m.radius_m
            )));
        }
        if !(m.beta_poi >= 0.0 && m.beta_cent >= 0.0) || m.beta_poi + m.beta_cent == 0.0 {
            return Err(Error::InvalidParameter(
                "mclp rank weights must be non-negative and not both zero".into(),
            ));
        }
        if !(m.beta_cov >= 0.0) || m.beta_cov + m.beta_cent == 0.0 {
            return Err(Error::InvalidParameter(
                "zone score weights must be non-negative and not both zero".into(),
            ));
        }
        if m.top_k == 0 {
            return Err(Error::InvalidParameter("mclp.top_k must be >= 1".into()));
        }
        match (m.budget, m.alpha) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidParameter(
                    "set exactly one of mclp.budget and mclp.alpha, not both".into(),
                ));
            }
            (None, None) => {
                return Err(Error::InvalidParameter(
                    "set exactly one of mclp.budget and mclp.alpha".into(),
                ));
            }
            (None, Some(alpha)) if !(alpha > 0.0 && alpha <= 1.0) => {
                return Err(Error::InvalidParameter(format!(
                    "mclp.alpha must lie in (0, 1], got {alpha}"
                )));
            }
            _ => {}
        }
        if !(m.income_upweight >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "mclp.income_upweight must be >= 1, got {}",
                m.income_upweight
            )));
        }
        let q = &self.queueing;
        if !(q.utilisation_cap > 0.0 && q.utilisation_cap <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "queueing.utilisation_cap must lie in (0, 1], got {}",
                q.utilisation_cap
            )));
        }
        if q.min_ports < 1 || q.min_ports > q.max_ports {
            return Err(Error::InvalidParameter(format!(
                "queueing port range [{}, {}] is empty or starts below 1",
                q.min_ports, q.max_ports
            )));
        }
        if !(q.mu_dcfc > 0.0) || !(q.mu_l2 > 0.0) {
            return Err(Error::InvalidParameter(
                "service rates must be positive".into(),
            ));
        }
        if !(q.hub_gross_per_capita >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "queueing.hub_gross_per_capita must be non-negative, got {}",
                q.hub_gross_per_capita
            )));
        }
        let t = &q.costs;
        for (name, v) in [
            ("dcfc_unit", t.dcfc_unit),
            ("dcfc_install", t.dcfc_install),
            ("l2_unit", t.l2_unit),
            ("l2_install", t.l2_install),
        ] {
            if !(v >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "queueing.costs.{name} must be non-negative, got {v}"
                )));
            }
        }
        let a = &q.area_multipliers;
        for (name, v) in [
            ("urban", a.urban),
            ("suburban", a.suburban),
            ("mixed", a.mixed),
            ("rural", a.rural),
        ] {
            if !(v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "queueing.area_multipliers.{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.reachability.threshold_m > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "reachability.threshold_m must be positive, got {}",
                self.reachability.threshold_m
            )));
        }
        if self.forecast.years == 0 {
            return Err(Error::InvalidParameter(
                "forecast.years must be >= 1".into(),
            ));
        }
        PenetrationEnvelope::from_caps(self.forecast.envelope.clone())?;
        let e = &self.equity;
        if e.radii_m.is_empty() || e.radii_m.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::InvalidParameter(
                "equity.radii_m must be a non-empty list of positive radii".into(),
            ));
        }
        if e.mc_samples == 0 {
            return Err(Error::InvalidParameter(
                "equity.mc_samples must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Set a dotted-path key in a JSON document. The value string is parsed as
/// JSON when possible and treated as a bare string otherwise. Intermediate
/// objects are created as needed; overwriting a non-object intermediate is
/// an error.
pub fn apply_override(root: &mut Value, key: &str, raw: &str) -> std::result::Result<(), String> {
    if key.is_empty() {
        return Err("empty key".into());
    }
    let parsed: Value = serde_json::from_str(raw).unwrap_or(Value::String(raw.to_string()));
    let mut node = root;
    let segments: Vec<&str> = key.split('.').collect();
    for (i, segment) in segments.iter().enumerate() {
        if segment.is_empty() {
            return Err(format!("empty path segment in {key:?}"));
        }
        let obj = node
            .as_object_mut()
            .ok_or_else(|| format!("{} is not an object", segments[..i].join(".")))?;
        if i + 1 == segments.len() {
            obj.insert(segment.to_string(), parsed);
            return Ok(());
        }
        node = obj
            .entry(segment.to_string())
            .or_insert_with(|| Value::Object(serde_json::Map::new()));
    }
    unreachable!("loop returns on the last segment");
}
